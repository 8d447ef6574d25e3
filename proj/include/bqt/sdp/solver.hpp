#pragma once

// Dense primal-dual interior-point solver for linear cone programs over
// products of real symmetric PSD blocks, with optional linear equality
// constraints on the parameter vector:
//
//     minimize    c'x
//     subject to  X_k = F0_k + sum_i x_i F_{i,k}  is PSD for each block k,
//                 A x = b.
//
// Nesterov-Todd scaling, Mehrotra predictor-corrector, infeasible start.
// Complex Hermitian problems enter through the real symmetric embedding
// performed by the modeling layer (see model.hpp).

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace bqt::sdp {

struct SolverOptions {
  int max_iters = 100;
  double feas_tol = 1e-8;
  double gap_tol = 1e-7;
  int verbosity = 0;
  double step_frac = 0.98;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, Inaccurate };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    default: return "inaccurate";
  }
}

struct SolverForm {
  struct Entry {
    int param;
    // full symmetric triplet list (both mirror positions present off-diagonal)
    std::vector<Eigen::Triplet<double>> trips;
  };
  struct Block {
    int dim = 0;
    Eigen::MatrixXd f0;
    std::vector<Entry> entries;
  };

  int num_params = 0;
  Eigen::VectorXd c;
  std::vector<Block> blocks;
  Eigen::SparseMatrix<double> eq_a;  // m x n, may be empty
  Eigen::VectorXd eq_b;
};

struct RawSolution {
  SolveStatus status = SolveStatus::Inaccurate;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  std::vector<Eigen::MatrixXd> cone;  // X_k at termination
  std::vector<Eigen::MatrixXd> dual_cone;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double gap = 0.0;
  double primal_resid = 0.0;  // max over blocks and equalities, relative
  double dual_resid = 0.0;
  int iterations = 0;
};

namespace detail {

inline double max_abs(const Eigen::MatrixXd& m) {
  return m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
}

// Largest alpha with P + alpha D still PSD (P positive definite), capped.
inline double max_psd_step(const Eigen::LLT<Eigen::MatrixXd>& lltP, const Eigen::MatrixXd& d,
                           double cap) {
  Eigen::MatrixXd m = lltP.matrixL().solve(d);
  m = lltP.matrixL().solve(m.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                    Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues().minCoeff();
  if (lmin >= 0.0) return cap;
  return std::min(cap, -1.0 / lmin);
}

}  // namespace detail

class ConeSolver {
 public:
  ConeSolver(const SolverForm& form, SolverOptions opts) : f_(form), opts_(opts) {}

  RawSolution solve() {
    const int n = f_.num_params;
    const int m = static_cast<int>(f_.eq_a.rows());
    const int nb = static_cast<int>(f_.blocks.size());

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
    std::vector<Eigen::MatrixXd> X(nb), S(nb);
    double total_dim = 0.0;
    for (int k = 0; k < nb; ++k) {
      double beta = std::max(1.0, detail::max_abs(f_.blocks[k].f0));
      X[k] = beta * Eigen::MatrixXd::Identity(f_.blocks[k].dim, f_.blocks[k].dim);
      S[k] = X[k];
      total_dim += f_.blocks[k].dim;
    }

    RawSolution sol;
    RawSolution best;
    double best_score = std::numeric_limits<double>::infinity();
    const double bnorm = 1.0 + (m ? f_.eq_b.cwiseAbs().maxCoeff() : 0.0);
    const double cnorm = 1.0 + (n ? f_.c.cwiseAbs().maxCoeff() : 0.0);
    double f0norm = 1.0;
    for (const auto& blk : f_.blocks) f0norm = std::max(f0norm, detail::max_abs(blk.f0));

    auto grade = [&](const RawSolution& s) {
      return s.primal_resid <= opts_.feas_tol && s.dual_resid <= opts_.feas_tol &&
             s.gap / (1.0 + std::abs(s.primal_obj) + std::abs(s.dual_obj)) <= opts_.gap_tol;
    };
    const char* exit_reason = "max iterations";
    auto finish = [&](SolveStatus fallback) {
      RawSolution out = (best_score < std::numeric_limits<double>::infinity()) ? best : sol;
      out.status = grade(out) ? SolveStatus::Optimal : fallback;
      if (opts_.verbosity > 0)
        std::fprintf(stderr, "exit: %s (graded %s)\n", exit_reason, to_string(out.status));
      return out;
    };

    Eigen::MatrixXd H(n, n);
    std::vector<Eigen::MatrixXd> winv(nb), g(nb), ginv(nb), rc(nb), dXa(nb), dSa(nb), dX(nb),
        dS(nb);
    std::vector<Eigen::VectorXd> lam(nb);
    int worse_count = 0;

    // Gram matrix of the constraint maps, used to project the numerical
    // dual-feasibility defect out of each Delta-S (the W-sandwich loses
    // digits once the scaling becomes extreme).
    Eigen::LDLT<Eigen::MatrixXd> gram;
    {
      std::vector<Eigen::MatrixXd> eye(nb);
      for (int k = 0; k < nb; ++k)
        eye[k] = Eigen::MatrixXd::Identity(f_.blocks[k].dim, f_.blocks[k].dim);
      build_schur(eye, H);
      gram.compute(H);
    }
    const bool gram_ok = gram.info() == Eigen::Success;

    for (int iter = 0; iter < opts_.max_iters; ++iter) {
      // residuals
      std::vector<Eigen::MatrixXd> rp(nb);
      double prim_inf = 0.0;
      for (int k = 0; k < nb; ++k) {
        rp[k] = f_.blocks[k].f0 - X[k];
        add_gop(k, x, rp[k]);
        prim_inf = std::max(prim_inf, detail::max_abs(rp[k]) / f0norm);
      }
      Eigen::VectorXd req;
      if (m) {
        req = f_.eq_b - f_.eq_a * x;
        prim_inf = std::max(prim_inf, req.cwiseAbs().maxCoeff() / bnorm);
      }
      Eigen::VectorXd rd = f_.c;
      for (int k = 0; k < nb; ++k) sub_gadj(k, S[k], rd);
      if (m) rd -= f_.eq_a.transpose() * y;
      double dual_inf = rd.cwiseAbs().maxCoeff() / cnorm;

      double gap = 0.0, f0s = 0.0;
      for (int k = 0; k < nb; ++k) {
        gap += (X[k].array() * S[k].array()).sum();
        f0s += (f_.blocks[k].f0.array() * S[k].array()).sum();
      }
      double pobj = f_.c.dot(x);
      double dobj = (m ? f_.eq_b.dot(y) : 0.0) - f0s;
      double relgap = gap / (1.0 + std::abs(pobj) + std::abs(dobj));
      double mu = gap / total_dim;

      sol.x = x;
      sol.y = y;
      sol.cone = X;
      sol.dual_cone = S;
      sol.primal_obj = pobj;
      sol.dual_obj = dobj;
      sol.gap = gap;
      sol.primal_resid = prim_inf;
      sol.dual_resid = dual_inf;
      sol.iterations = iter;

      if (opts_.verbosity > 0)
        std::fprintf(stderr, "it %3d  pobj %+.9e dobj %+.9e gap %.2e pinf %.2e dinf %.2e\n",
                     iter, pobj, dobj, relgap, prim_inf, dual_inf);

      if (prim_inf <= opts_.feas_tol && dual_inf <= opts_.feas_tol && relgap <= opts_.gap_tol) {
        sol.status = SolveStatus::Optimal;
        return sol;
      }
      // Residual accuracy dictates value accuracy for weakly-interior
      // problems, so it dominates the iterate ranking near the end.
      double score = std::max({prim_inf, dual_inf, 0.05 * relgap});
      if (score < 0.9 * best_score) {
        best_score = score;
        best = sol;
        worse_count = 0;
      } else if (++worse_count >= 8) {
        // no progress beyond the best iterate: return it
        exit_reason = "no further progress";
        return finish(SolveStatus::Inaccurate);
      }
      if (iter >= 1) {
        if (auto st = certificate_status(y, S, x, X, pobj, dobj, prim_inf, dual_inf)) {
          sol.status = *st;
          return sol;
        }
      }

      // NT scaling per block; iterates whose Cholesky fails numerically are
      // nudged back into the cone by a minimal diagonal shift
      bool scaling_ok = true;
      std::vector<Eigen::LLT<Eigen::MatrixXd>> lltX(nb), lltS(nb);
      for (int k = 0; k < nb; ++k) {
        auto recenter = [](Eigen::MatrixXd& mat, Eigen::LLT<Eigen::MatrixXd>& llt) {
          llt.compute(mat);
          if (llt.info() == Eigen::Success) return true;
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mat, Eigen::EigenvaluesOnly);
          double shift = 2.0 * std::max(0.0, -es.eigenvalues().minCoeff()) +
                         1e-14 * (1.0 + es.eigenvalues().cwiseAbs().maxCoeff());
          mat += shift * Eigen::MatrixXd::Identity(mat.rows(), mat.cols());
          llt.compute(mat);
          return llt.info() == Eigen::Success;
        };
        if (!recenter(X[k], lltX[k]) || !recenter(S[k], lltS[k])) {
          scaling_ok = false;
          break;
        }
        Eigen::MatrixXd lx = lltX[k].matrixL();
        Eigen::MatrixXd msc = lx.transpose() * S[k] * lx;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (msc + msc.transpose()));
        Eigen::VectorXd ev = es.eigenvalues().cwiseMax(1e-300);
        Eigen::VectorXd q14 = ev.array().pow(0.25);
        g[k] = lx * es.eigenvectors() * q14.cwiseInverse().asDiagonal();
        ginv[k] = q14.asDiagonal() * es.eigenvectors().transpose() *
                  lx.triangularView<Eigen::Lower>().solve(
                      Eigen::MatrixXd::Identity(X[k].rows(), X[k].rows()));
        winv[k] = ginv[k].transpose() * ginv[k];
        lam[k] = ev.cwiseSqrt();
      }
      if (!scaling_ok) {
        exit_reason = "cone iterate lost positive definiteness";
        return finish(SolveStatus::Inaccurate);
      }

      build_schur(winv, H);
      // Jacobi scaling keeps the factorization alive when the barrier makes
      // the raw Schur matrix extremely ill-conditioned.
      Eigen::VectorXd hscale(n);
      for (int i = 0; i < n; ++i) hscale(i) = 1.0 / std::sqrt(std::max(H(i, i), 1e-300));
      H = hscale.asDiagonal() * H * hscale.asDiagonal();
      // the scaled matrix has unit diagonal, so a tiny ridge is a relative
      // regularization that the refinement pass cleans up
      Eigen::LLT<Eigen::MatrixXd> lltH(H);
      bool factored = lltH.info() == Eigen::Success;
      for (double ridge : {1e-14, 3e-13, 1e-11, 1e-9}) {
        if (factored) break;
        lltH.compute(H + ridge * Eigen::MatrixXd::Identity(n, n));
        factored = lltH.info() == Eigen::Success;
      }
      if (!factored) {
        exit_reason = "Schur factorization failed";
        return finish(SolveStatus::Inaccurate);
      }
      auto hsolve = [&](const Eigen::MatrixXd& rhs) {
        Eigen::MatrixXd out = lltH.solve(hscale.asDiagonal() * rhs);
        return Eigen::MatrixXd(hscale.asDiagonal() * out);
      };

      // Equality Schur complement; redundant equality rows make it exactly
      // singular, which is harmless for A' dy, so a scaled ridge suffices.
      Eigen::MatrixXd schur_u;  // H^{-1} A'
      Eigen::LLT<Eigen::MatrixXd> lltM;
      Eigen::VectorXd mscale;
      if (m) {
        schur_u = hsolve(Eigen::MatrixXd(f_.eq_a.transpose()));
        Eigen::MatrixXd mm = f_.eq_a * schur_u;
        mm = 0.5 * (mm + mm.transpose()).eval();
        mscale.resize(m);
        for (int i = 0; i < m; ++i) mscale(i) = 1.0 / std::sqrt(std::max(mm(i, i), 1e-300));
        mm = mscale.asDiagonal() * mm * mscale.asDiagonal();
        bool factored = false;
        for (double ridge : {0.0, 1e-12, 1e-10, 1e-8}) {
          lltM.compute(ridge == 0.0
                           ? mm
                           : Eigen::MatrixXd(mm + ridge * Eigen::MatrixXd::Identity(m, m)));
          if (lltM.info() == Eigen::Success) {
            factored = true;
            break;
          }
        }
        if (!factored) {
          exit_reason = "equality Schur factorization failed";
          return finish(SolveStatus::Inaccurate);
        }
      }
      auto msolve = [&](const Eigen::VectorXd& rhs) {
        return Eigen::VectorXd(mscale.asDiagonal() *
                               lltM.solve(Eigen::VectorXd(mscale.asDiagonal() * rhs)));
      };

      auto newton = [&](const std::vector<Eigen::MatrixXd>& rcv, Eigen::VectorXd& dx,
                        Eigen::VectorXd& dy, std::vector<Eigen::MatrixXd>& dXv,
                        std::vector<Eigen::MatrixXd>& dSv) {
        Eigen::VectorXd rhs1 = -rd;
        for (int k = 0; k < nb; ++k) {
          Eigen::MatrixXd t = winv[k] * (rcv[k] - rp[k]) * winv[k];
          add_gadj(k, t, rhs1);
        }
        auto kkt_solve = [&](const Eigen::VectorXd& r1, const Eigen::VectorXd& r2,
                             Eigen::VectorXd& ox, Eigen::VectorXd& oy) {
          Eigen::VectorXd u1 = hsolve(r1);
          if (m) {
            oy = msolve(r2 - f_.eq_a * u1);
            ox = u1 + schur_u * oy;
          } else {
            oy.resize(0);
            ox = u1;
          }
        };
        auto hmul = [&](const Eigen::VectorXd& v) {
          // multiply by the unscaled Schur matrix
          return Eigen::VectorXd(hscale.cwiseInverse().asDiagonal() *
                                 (H * (hscale.cwiseInverse().asDiagonal() * v)));
        };
        kkt_solve(rhs1, m ? req : Eigen::VectorXd(), dx, dy);
        {
          // one pass of iterative refinement on the reduced KKT system
          Eigen::VectorXd r1 = rhs1 - hmul(dx);
          if (m) r1 += f_.eq_a.transpose() * dy;
          Eigen::VectorXd r2 = m ? Eigen::VectorXd(req - f_.eq_a * dx) : Eigen::VectorXd();
          Eigen::VectorXd ex, ey;
          kkt_solve(r1, r2, ex, ey);
          dx += ex;
          if (m) dy += ey;
        }
        for (int k = 0; k < nb; ++k) {
          dXv[k] = rp[k];
          add_gop(k, dx, dXv[k]);
          dSv[k] = winv[k] * (rcv[k] - dXv[k]) * winv[k];
          dXv[k] = 0.5 * (dXv[k] + dXv[k].transpose()).eval();
          dSv[k] = 0.5 * (dSv[k] + dSv[k].transpose()).eval();
        }
        if (gram_ok) {
          // restore Gadj(dS) + A' dy = rd against sandwich round-off, but
          // only when the defect is material (the projection perturbs
          // centrality slightly)
          Eigen::VectorXd defect = rd;
          for (int k = 0; k < nb; ++k) sub_gadj(k, dSv[k], defect);
          if (m) defect -= f_.eq_a.transpose() * dy;
          if (defect.size() && defect.cwiseAbs().maxCoeff() > 1e-11 * cnorm) {
            Eigen::VectorXd wcorr = gram.solve(defect);
            for (int k = 0; k < nb; ++k) add_gop(k, wcorr, dSv[k]);
          }
        }
      };

      // predictor
      for (int k = 0; k < nb; ++k) rc[k] = -X[k];
      Eigen::VectorXd dxa, dya;
      newton(rc, dxa, dya, dXa, dSa);

      double ap = 1.0, ad = 1.0;
      for (int k = 0; k < nb; ++k) {
        ap = std::min(ap, detail::max_psd_step(lltX[k], dXa[k], 1.0));
        ad = std::min(ad, detail::max_psd_step(lltS[k], dSa[k], 1.0));
      }
      double gap_aff = 0.0;
      for (int k = 0; k < nb; ++k)
        gap_aff += ((X[k] + ap * dXa[k]).array() * (S[k] + ad * dSa[k]).array()).sum();
      double sigma = std::pow(std::max(0.0, gap_aff / gap), 3.0);
      sigma = std::min(1.0, sigma);

      // corrector
      for (int k = 0; k < nb; ++k) {
        Eigen::MatrixXd dxt = ginv[k] * dXa[k] * ginv[k].transpose();
        Eigen::MatrixXd dst = g[k].transpose() * dSa[k] * g[k];
        Eigen::MatrixXd gam = 0.5 * (dxt * dst + dst * dxt);
        Eigen::MatrixXd rt(lam[k].size(), lam[k].size());
        for (int i = 0; i < rt.rows(); ++i)
          for (int j = 0; j < rt.cols(); ++j) {
            double num = sigma * mu * (i == j ? 1.0 : 0.0) -
                         (i == j ? lam[k](i) * lam[k](i) : 0.0) - gam(i, j);
            rt(i, j) = 2.0 * num / (lam[k](i) + lam[k](j));
          }
        rc[k] = g[k] * rt * g[k].transpose();
      }
      Eigen::VectorXd dx, dy;
      newton(rc, dx, dy, dX, dS);

      double frac = std::min(0.99, opts_.step_frac + 0.08 * std::min(ap, ad));
      ap = frac;
      ad = frac;
      for (int k = 0; k < nb; ++k) {
        ap = std::min(ap, frac * detail::max_psd_step(lltX[k], dX[k], 1.0 / frac));
        ad = std::min(ad, frac * detail::max_psd_step(lltS[k], dS[k], 1.0 / frac));
      }
      ap = std::min(ap, 1.0);
      ad = std::min(ad, 1.0);

      x += ap * dx;
      if (m) y += ad * dy;
      for (int k = 0; k < nb; ++k) {
        X[k] += ap * dX[k];
        S[k] += ad * dS[k];
      }
      if (ap < 1e-8 && ad < 1e-8) {
        ++stall_count_;
        if (stall_count_ >= 3) {
          exit_reason = "step length collapsed";
          return finish(SolveStatus::Inaccurate);
        }
      } else {
        stall_count_ = 0;
      }
    }
    return finish(SolveStatus::Inaccurate);
  }

 private:
  void add_gop(int k, const Eigen::VectorXd& x, Eigen::MatrixXd& out) const {
    for (const auto& e : f_.blocks[k].entries) {
      double xv = x(e.param);
      if (xv == 0.0) continue;
      for (const auto& t : e.trips) out(t.row(), t.col()) += xv * t.value();
    }
  }
  void add_gadj(int k, const Eigen::MatrixXd& s, Eigen::VectorXd& out) const {
    for (const auto& e : f_.blocks[k].entries) {
      double acc = 0.0;
      for (const auto& t : e.trips) acc += t.value() * s(t.row(), t.col());
      out(e.param) += acc;
    }
  }
  void sub_gadj(int k, const Eigen::MatrixXd& s, Eigen::VectorXd& out) const {
    for (const auto& e : f_.blocks[k].entries) {
      double acc = 0.0;
      for (const auto& t : e.trips) acc += t.value() * s(t.row(), t.col());
      out(e.param) -= acc;
    }
  }

  // H_ij = sum_k <F_ik, Winv_k F_jk Winv_k>, computed entrywise from the
  // sparse coefficient triplets: <E_rc, Winv E_r'c' Winv> = Winv(r,r') Winv(c',c).
  void build_schur(const std::vector<Eigen::MatrixXd>& winv, Eigen::MatrixXd& h) const {
    h.setZero();
    for (std::size_t k = 0; k < f_.blocks.size(); ++k) {
      const auto& entries = f_.blocks[k].entries;
      const Eigen::MatrixXd& w = winv[k];
      for (std::size_t a = 0; a < entries.size(); ++a) {
        const auto& ea = entries[a];
        for (std::size_t b = a; b < entries.size(); ++b) {
          const auto& eb = entries[b];
          double acc = 0.0;
          for (const auto& ta : ea.trips)
            for (const auto& tb : eb.trips)
              acc += ta.value() * tb.value() * w(ta.row(), tb.row()) * w(tb.col(), ta.col());
          if (ea.param <= eb.param)
            h(ea.param, eb.param) += acc;
          else
            h(eb.param, ea.param) += acc;
        }
      }
    }
    h.triangularView<Eigen::StrictlyLower>() = h.transpose();
  }

  // Detect primal-infeasibility / unboundedness certificates.
  std::optional<SolveStatus> certificate_status(const Eigen::VectorXd& y,
                                                const std::vector<Eigen::MatrixXd>& S,
                                                const Eigen::VectorXd& x,
                                                const std::vector<Eigen::MatrixXd>& X,
                                                double pobj, double dobj, double prim_inf,
                                                double dual_inf) const {
    const int m = static_cast<int>(f_.eq_a.rows());
    // primal infeasibility: Gadj(S) + A'y ~ 0 with b'y - <F0,S> > 0
    double snorm = 0.0;
    for (const auto& s : S) snorm = std::max(snorm, detail::max_abs(s));
    if (m) snorm = std::max(snorm, y.cwiseAbs().maxCoeff());
    if (snorm > 0) {
      Eigen::VectorXd adj = Eigen::VectorXd::Zero(f_.num_params);
      for (std::size_t k = 0; k < f_.blocks.size(); ++k) add_gadj(static_cast<int>(k), S[k], adj);
      if (m) adj += f_.eq_a.transpose() * y;
      double viol = adj.cwiseAbs().maxCoeff() / snorm;
      double val = ((m ? f_.eq_b.dot(y) : 0.0) -
                    [&] {
                      double t = 0;
                      for (std::size_t k = 0; k < f_.blocks.size(); ++k)
                        t += (f_.blocks[k].f0.array() * S[k].array()).sum();
                      return t;
                    }()) /
                   snorm;
      if (viol <= 1e-9 && val >= 1e7 * std::max(viol, 1e-16) && val > 1e-6)
        return SolveStatus::Infeasible;
    }
    // unboundedness: primal objective diverging with feasibility intact
    if (prim_inf <= opts_.feas_tol && pobj < -1e10 * (1.0 + std::abs(dobj)) && dual_inf > 1e-2)
      return SolveStatus::Unbounded;
    (void)x;
    (void)X;
    return std::nullopt;
  }

  const SolverForm& f_;
  SolverOptions opts_;
  int stall_count_ = 0;
};

inline RawSolution solve_cone_program(const SolverForm& form, const SolverOptions& opts = {}) {
  return ConeSolver(form, opts).solve();
}

}  // namespace bqt::sdp
