#pragma once

// Modeling layer for conic problems over complex Hermitian matrix variables:
// declare variables, build affine operator expressions, impose PSD and
// equality constraints, and compile to the real symmetric solver form of
// solver.hpp. Complex Hermitian PSD blocks are embedded as 2n x 2n real
// symmetric blocks [[Re, -Im], [Im, Re]]; blocks whose data is entirely real
// skip the embedding.

#include "bqt/qmat.hpp"
#include "bqt/sdp/solver.hpp"

#include <functional>
#include <map>
#include <memory>
#include <variant>

namespace bqt::sdp {

// ---------------------------------------------------------------------------
// sparse complex entries + the linear-op atoms applied to them

struct CTrip {
  long r, c;
  cxd v;
};
using CTrips = std::vector<CTrip>;

namespace ops {

struct Scale {
  cxd a;
};
struct PartialTranspose {
  SubsystemSet set;
};
struct PartialTrace {
  SubsystemSet set;
};
// X -> Tr_set[(C on set-factors) X]; yields an operator on the kept factors.
struct Contract {
  Matrix c;
  SubsystemSet set;
};
struct KronRight {
  Matrix c;
  std::vector<int> cdims;
};
struct KronLeft {
  Matrix c;
  std::vector<int> cdims;
};
struct Permute {
  std::vector<int> perm;
};
struct Adjoint {};
struct RealPart {};
// place into block (i, j) of a 2x2 block-Hermitian matrix of equal blocks
struct Embed2x2 {
  int bi, bj;
};
// principal submatrix X[off:off+size, off:off+size], relabeled with out_dims
struct Restrict {
  long off, size;
  std::vector<int> out_dims;
};
// left * X[ra:, 0:ra] * right for a block-2x2-structured X of corner sizes
// (ra, rb); the result is square on out_dims
struct OffBlockSandwich {
  Matrix left;   // D x rb
  Matrix right;  // ra x D
  long ra, rb;
  std::vector<int> out_dims;
};

using Atom = std::variant<Scale, PartialTranspose, PartialTrace, Contract, KronRight, KronLeft,
                          Permute, Adjoint, RealPart, Embed2x2, Restrict, OffBlockSandwich>;

inline void apply_atom(const Atom& atom, CTrips& trips, std::vector<int>& dims) {
  using bqt::detail::from_digits;
  using bqt::detail::to_digits;
  CTrips out;
  out.reserve(trips.size());

  if (auto* s = std::get_if<Scale>(&atom)) {
    for (auto& t : trips) t.v *= s->a;
    return;
  }
  if (auto* pt = std::get_if<PartialTranspose>(&atom)) {
    pt->set.check_against(dims.size());
    std::vector<int> dr, dc;
    for (auto& t : trips) {
      to_digits(t.r, dims, dr);
      to_digits(t.c, dims, dc);
      for (int i : pt->set.indices) std::swap(dr[i], dc[i]);
      t.r = from_digits(dr, dims);
      t.c = from_digits(dc, dims);
    }
    return;
  }
  if (auto* ptr = std::get_if<PartialTrace>(&atom)) {
    ptr->set.check_against(dims.size());
    std::vector<int> kept_dims, dr, dc, kr, kc;
    for (std::size_t i = 0; i < dims.size(); ++i)
      if (!ptr->set.contains(static_cast<int>(i))) kept_dims.push_back(dims[i]);
    if (kept_dims.empty()) kept_dims.push_back(1);
    const std::size_t nkept = kept_dims.size();
    for (const auto& t : trips) {
      to_digits(t.r, dims, dr);
      to_digits(t.c, dims, dc);
      bool diag = true;
      kr.clear();
      kc.clear();
      for (std::size_t i = 0; i < dims.size(); ++i) {
        if (ptr->set.contains(static_cast<int>(i))) {
          if (dr[i] != dc[i]) {
            diag = false;
            break;
          }
        } else {
          kr.push_back(dr[i]);
          kc.push_back(dc[i]);
        }
      }
      if (diag) {
        kr.resize(nkept, 0);
        kc.resize(nkept, 0);
        out.push_back({from_digits(kr, kept_dims), from_digits(kc, kept_dims), t.v});
      }
    }
    trips = std::move(out);
    dims = std::move(kept_dims);
    return;
  }
  if (auto* ct = std::get_if<Contract>(&atom)) {
    ct->set.check_against(dims.size());
    std::vector<int> kept_dims, set_dims, dr, dc, kr, kc, sr, sc;
    for (std::size_t i = 0; i < dims.size(); ++i) {
      if (ct->set.contains(static_cast<int>(i)))
        set_dims.push_back(dims[i]);
      else
        kept_dims.push_back(dims[i]);
    }
    if (kept_dims.empty()) kept_dims.push_back(1);
    const std::size_t nkept = kept_dims.size();
    for (const auto& t : trips) {
      to_digits(t.r, dims, dr);
      to_digits(t.c, dims, dc);
      kr.clear();
      kc.clear();
      sr.clear();
      sc.clear();
      for (std::size_t i = 0; i < dims.size(); ++i) {
        if (ct->set.contains(static_cast<int>(i))) {
          sr.push_back(dr[i]);
          sc.push_back(dc[i]);
        } else {
          kr.push_back(dr[i]);
          kc.push_back(dc[i]);
        }
      }
      cxd coef = ct->c(from_digits(sc, set_dims), from_digits(sr, set_dims));
      if (coef != 0.0) {
        kr.resize(nkept, 0);
        kc.resize(nkept, 0);
        out.push_back({from_digits(kr, kept_dims), from_digits(kc, kept_dims), t.v * coef});
      }
    }
    trips = std::move(out);
    dims = std::move(kept_dims);
    return;
  }
  if (auto* kr = std::get_if<KronRight>(&atom)) {
    const long dc = kr->c.rows();
    for (const auto& t : trips)
      for (long i = 0; i < dc; ++i)
        for (long j = 0; j < dc; ++j)
          if (kr->c(i, j) != 0.0)
            out.push_back({t.r * dc + i, t.c * dc + j, t.v * kr->c(i, j)});
    trips = std::move(out);
    dims.insert(dims.end(), kr->cdims.begin(), kr->cdims.end());
    return;
  }
  if (auto* kl = std::get_if<KronLeft>(&atom)) {
    const long dc = kl->c.rows();
    long d = 1;
    for (int x : dims) d *= x;
    for (const auto& t : trips)
      for (long i = 0; i < dc; ++i)
        for (long j = 0; j < dc; ++j)
          if (kl->c(i, j) != 0.0)
            out.push_back({i * d + t.r, j * d + t.c, t.v * kl->c(i, j)});
    trips = std::move(out);
    dims.insert(dims.begin(), kl->cdims.begin(), kl->cdims.end());
    return;
  }
  if (auto* pm = std::get_if<Permute>(&atom)) {
    std::vector<int> new_dims(pm->perm.size()), dr, dc, nr(pm->perm.size()), nc(pm->perm.size());
    for (std::size_t i = 0; i < pm->perm.size(); ++i) new_dims[i] = dims[pm->perm[i]];
    for (auto& t : trips) {
      to_digits(t.r, dims, dr);
      to_digits(t.c, dims, dc);
      for (std::size_t i = 0; i < pm->perm.size(); ++i) {
        nr[i] = dr[pm->perm[i]];
        nc[i] = dc[pm->perm[i]];
      }
      t.r = from_digits(nr, new_dims);
      t.c = from_digits(nc, new_dims);
    }
    dims = std::move(new_dims);
    return;
  }
  if (std::get_if<Adjoint>(&atom)) {
    for (auto& t : trips) {
      std::swap(t.r, t.c);
      t.v = std::conj(t.v);
    }
    return;
  }
  if (std::get_if<RealPart>(&atom)) {
    out = trips;
    for (auto& t : out) t.v *= 0.5;
    for (const auto& t : trips) out.push_back({t.c, t.r, 0.5 * std::conj(t.v)});
    trips = std::move(out);
    return;
  }
  if (auto* em = std::get_if<Embed2x2>(&atom)) {
    long d = 1;
    for (int x : dims) d *= x;
    for (auto& t : trips) {
      t.r += em->bi * d;
      t.c += em->bj * d;
    }
    std::vector<int> new_dims{2};
    new_dims.insert(new_dims.end(), dims.begin(), dims.end());
    dims = std::move(new_dims);
    return;
  }
  if (auto* rs = std::get_if<Restrict>(&atom)) {
    for (const auto& t : trips)
      if (t.r >= rs->off && t.r < rs->off + rs->size && t.c >= rs->off &&
          t.c < rs->off + rs->size)
        out.push_back({t.r - rs->off, t.c - rs->off, t.v});
    trips = std::move(out);
    dims = rs->out_dims;
    return;
  }
  if (auto* ob = std::get_if<OffBlockSandwich>(&atom)) {
    const long dd = ob->left.rows();
    for (const auto& t : trips) {
      if (t.r < ob->ra || t.c >= ob->ra) continue;
      long i0 = t.r - ob->ra, j0 = t.c;
      for (long i = 0; i < dd; ++i) {
        cxd li = ob->left(i, i0);
        if (li == 0.0) continue;
        for (long j = 0; j < dd; ++j) {
          cxd rj = ob->right(j0, j);
          if (rj != 0.0) out.push_back({i, j, t.v * li * rj});
        }
      }
    }
    trips = std::move(out);
    dims = ob->out_dims;
    return;
  }
  throw std::logic_error("unhandled op atom");
}

}  // namespace ops

// ---------------------------------------------------------------------------
// variables

enum class VarKind { Scalar, Hermitian, HermitianTP, GeneralComplex };

struct VarRef {
  int id = -1;
};

namespace detail_model {

struct VarDesc {
  std::string name;
  VarKind kind;
  std::vector<int> dims;   // factor dims (empty for Scalar)
  bool real_only = false;
  // HermitianTP: the trailing `tp_traced` factors have fixed partial trace
  int tp_traced = 0;
  Matrix tp_rhs;
  int first_param = 0;
  int num_params = 0;
  long total_dim() const {
    long d = 1;
    for (int x : dims) d *= x;
    return d;
  }
};

// Enumerate the real-parameter basis of a variable: calls f(local_param,
// trips) for each basis element; `x0` receives the affine offset (only
// nonzero for HermitianTP).
inline void for_each_basis(const VarDesc& v, const std::function<void(int, const CTrips&)>& f,
                           CTrips* x0 = nullptr) {
  const cxd I(0.0, 1.0);
  int p = 0;
  switch (v.kind) {
    case VarKind::Scalar:
      f(p++, CTrips{});  // seed supplied per-term
      break;
    case VarKind::Hermitian: {
      const long d = v.total_dim();
      for (long r = 0; r < d; ++r) f(p++, CTrips{{r, r, 1.0}});
      for (long r = 0; r < d; ++r)
        for (long c = r + 1; c < d; ++c) {
          f(p++, CTrips{{r, c, 1.0}, {c, r, 1.0}});
          if (!v.real_only) f(p++, CTrips{{r, c, I}, {c, r, -I}});
        }
      break;
    }
    case VarKind::GeneralComplex: {
      const long d = v.total_dim();
      for (long r = 0; r < d; ++r)
        for (long c = 0; c < d; ++c) {
          f(p++, CTrips{{r, c, 1.0}});
          if (!v.real_only) f(p++, CTrips{{r, c, I}});
        }
      break;
    }
    case VarKind::HermitianTP: {
      long g = 1, o = 1;
      const int nk = static_cast<int>(v.dims.size()) - v.tp_traced;
      for (int i = 0; i < nk; ++i) g *= v.dims[i];
      for (int i = nk; i < static_cast<int>(v.dims.size()); ++i) o *= v.dims[i];
      if (x0) {
        for (long a = 0; a < g; ++a)
          for (long b = 0; b < g; ++b)
            if (v.tp_rhs(a, b) != 0.0)
              for (long t = 0; t < o; ++t)
                x0->push_back({a * o + t, b * o + t, v.tp_rhs(a, b) / static_cast<double>(o)});
      }
      // off-diagonal in the traced factors: unconstrained
      for (long a = 0; a < g; ++a)
        for (long b = 0; b < g; ++b)
          for (long u = 0; u < o; ++u)
            for (long t = 0; t < o; ++t) {
              long r = a * o + u, c = b * o + t;
              if (u == t || r > c) continue;
              f(p++, CTrips{{r, c, 1.0}, {c, r, 1.0}});
              if (!v.real_only) f(p++, CTrips{{r, c, I}, {c, r, -I}});
            }
      // diagonal in the traced factors: differences keep the trace fixed
      for (long a = 0; a < g; ++a)
        for (long t = 0; t + 1 < o; ++t)
          f(p++, CTrips{{a * o + t, a * o + t, 1.0}, {a * o + t + 1, a * o + t + 1, -1.0}});
      for (long a = 0; a < g; ++a)
        for (long b = a + 1; b < g; ++b)
          for (long t = 0; t + 1 < o; ++t) {
            long r0 = a * o + t, c0 = b * o + t, r1 = a * o + t + 1, c1 = b * o + t + 1;
            f(p++, CTrips{{r0, c0, 1.0}, {c0, r0, 1.0}, {r1, c1, -1.0}, {c1, r1, -1.0}});
            if (!v.real_only) f(p++, CTrips{{r0, c0, I}, {c0, r0, -I}, {r1, c1, -I}, {c1, r1, I}});
          }
      break;
    }
  }
}

inline int count_params(const VarDesc& v) {
  int n = 0;
  for_each_basis(v, [&](int, const CTrips&) { ++n; });
  return n;
}

}  // namespace detail_model

// ---------------------------------------------------------------------------
// affine operator expressions

struct AffineTerm {
  int var_id = -1;
  std::vector<ops::Atom> chain;
  // Scalar variables enter as (scalar) * seed
  CTrips seed;
  std::vector<int> seed_dims;
};

struct Expr {
  std::vector<int> dims;
  std::vector<AffineTerm> terms;
  CTrips constant;

  static Expr zero(std::vector<int> dims) { return Expr{std::move(dims), {}, {}}; }
};

inline CTrips to_trips(const Matrix& m) {
  CTrips t;
  for (long r = 0; r < m.rows(); ++r)
    for (long c = 0; c < m.cols(); ++c)
      if (m(r, c) != 0.0) t.push_back({r, c, m(r, c)});
  return t;
}

inline Matrix to_dense(const CTrips& trips, long d) {
  Matrix m = Matrix::Zero(d, d);
  for (const auto& t : trips) m(t.r, t.c) += t.v;
  return m;
}

inline Expr constant_expr(const LabeledOperator& c) {
  Expr e;
  e.dims = c.dims;
  e.constant = to_trips(c.data);
  return e;
}

inline Expr operator+(Expr a, const Expr& b) {
  if (a.dims != b.dims) throw std::invalid_argument("expression dims mismatch in +");
  a.terms.insert(a.terms.end(), b.terms.begin(), b.terms.end());
  a.constant.insert(a.constant.end(), b.constant.begin(), b.constant.end());
  return a;
}

inline Expr apply_op(Expr e, const ops::Atom& atom) {
  for (auto& t : e.terms) t.chain.push_back(atom);
  std::vector<int> cdims = e.dims;
  ops::apply_atom(atom, e.constant, cdims);
  e.dims = std::move(cdims);
  return e;
}

inline Expr operator*(cxd s, Expr e) { return apply_op(std::move(e), ops::Scale{s}); }
inline Expr operator*(double s, Expr e) { return apply_op(std::move(e), ops::Scale{cxd(s, 0)}); }
inline Expr operator-(Expr a, const Expr& b) { return std::move(a) + (-1.0) * b; }
inline Expr operator-(Expr e) { return (-1.0) * std::move(e); }

inline Expr transposed_on(Expr e, SubsystemSet set) {
  return apply_op(std::move(e), ops::PartialTranspose{std::move(set)});
}
inline Expr traced_over(Expr e, SubsystemSet set) {
  return apply_op(std::move(e), ops::PartialTrace{std::move(set)});
}
inline Expr contracted(const LabeledOperator& c, SubsystemSet set, Expr e) {
  return apply_op(std::move(e), ops::Contract{c.data, std::move(set)});
}
inline Expr kron_right(Expr e, const LabeledOperator& c) {
  return apply_op(std::move(e), ops::KronRight{c.data, c.dims});
}
inline Expr kron_left(const LabeledOperator& c, Expr e) {
  return apply_op(std::move(e), ops::KronLeft{c.data, c.dims});
}
inline Expr permuted(Expr e, std::vector<int> perm) {
  return apply_op(std::move(e), ops::Permute{std::move(perm)});
}
inline Expr adjointed(Expr e) { return apply_op(std::move(e), ops::Adjoint{}); }
inline Expr real_part(Expr e) { return apply_op(std::move(e), ops::RealPart{}); }

/// Full trace as a 1x1 expression: Tr[c^dagger X] with Hermitian weight c.
inline Expr weighted_trace(const LabeledOperator& c, Expr e) {
  SubsystemSet all;
  for (std::size_t i = 0; i < e.dims.size(); ++i) all.indices.push_back(static_cast<int>(i));
  return contracted(c, all, std::move(e));
}

/// [[a, b], [c, d]] as one Hermitian expression on a doubled space.
inline Expr block2x2(Expr a, Expr b, Expr c, Expr d) {
  Expr out = apply_op(std::move(a), ops::Embed2x2{0, 0}) +
             apply_op(std::move(b), ops::Embed2x2{0, 1}) +
             apply_op(std::move(c), ops::Embed2x2{1, 0}) +
             apply_op(std::move(d), ops::Embed2x2{1, 1});
  return out;
}

/// Range decomposition of a PSD constant: eigenvalues above tol and the
/// matching eigenvector columns.
inline std::pair<Eigen::VectorXd, Matrix> psd_range(const Matrix& a, double tol = 1e-12) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.adjoint()));
  double top = std::max(1.0, es.eigenvalues().maxCoeff());
  std::vector<long> keep;
  for (long i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > tol * top) keep.push_back(i);
  Eigen::VectorXd ev(keep.size());
  Matrix v(a.rows(), keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    ev(i) = es.eigenvalues()(keep[i]);
    v.col(i) = es.eigenvectors().col(keep[i]);
  }
  return {std::move(ev), std::move(v)};
}

// ---------------------------------------------------------------------------
// problem

struct ConicSolution {
  SolveStatus status = SolveStatus::Inaccurate;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
  std::map<std::string, LabeledOperator> blocks;
  std::map<std::string, double> scalars;
  double max_eq_violation = 0.0;
  double min_psd_eig = 0.0;
  int iterations = 0;
  bool optimal() const { return status == SolveStatus::Optimal; }
};

class ConicProblem {
 public:
  VarRef add_scalar(const std::string& name) {
    detail_model::VarDesc v;
    v.name = name;
    v.kind = VarKind::Scalar;
    vars_.push_back(std::move(v));
    return {static_cast<int>(vars_.size()) - 1};
  }
  VarRef add_hermitian(const std::string& name, std::vector<int> dims, bool real_only = false) {
    detail_model::VarDesc v;
    v.name = name;
    v.kind = VarKind::Hermitian;
    v.dims = std::move(dims);
    v.real_only = real_only;
    vars_.push_back(std::move(v));
    return {static_cast<int>(vars_.size()) - 1};
  }
  /// Hermitian variable whose partial trace over the trailing `traced`
  /// factors is fixed to `rhs` (a matrix on the kept factors).
  VarRef add_hermitian_tp(const std::string& name, std::vector<int> dims, int traced,
                          const LabeledOperator& rhs, bool real_only = false) {
    detail_model::VarDesc v;
    v.name = name;
    v.kind = VarKind::HermitianTP;
    v.dims = std::move(dims);
    v.real_only = real_only;
    v.tp_traced = traced;
    v.tp_rhs = rhs.data;
    long g = 1;
    for (std::size_t i = 0; i + traced < v.dims.size(); ++i) g *= v.dims[i];
    if (rhs.data.rows() != g)
      throw std::invalid_argument("add_hermitian_tp: rhs dimension mismatch");
    vars_.push_back(std::move(v));
    return {static_cast<int>(vars_.size()) - 1};
  }
  VarRef add_general(const std::string& name, std::vector<int> dims, bool real_only = false) {
    detail_model::VarDesc v;
    v.name = name;
    v.kind = VarKind::GeneralComplex;
    v.dims = std::move(dims);
    v.real_only = real_only;
    vars_.push_back(std::move(v));
    return {static_cast<int>(vars_.size()) - 1};
  }

  Expr var(VarRef r) const {
    const auto& v = vars_.at(r.id);
    if (v.kind == VarKind::Scalar)
      throw std::invalid_argument("scalar variables enter via scaled_seed()");
    Expr e;
    e.dims = v.dims;
    e.terms.push_back(AffineTerm{r.id, {}, {}, {}});
    return e;
  }
  /// The scalar variable times a fixed Hermitian seed, e.g. mu * I.
  Expr scaled_seed(VarRef r, const LabeledOperator& seed) const {
    const auto& v = vars_.at(r.id);
    if (v.kind != VarKind::Scalar) throw std::invalid_argument("scaled_seed: not a scalar var");
    Expr e;
    e.dims = seed.dims;
    e.terms.push_back(AffineTerm{r.id, {}, to_trips(seed.data), seed.dims});
    return e;
  }

  void add_psd(Expr e, const std::string& name) { psd_.push_back({std::move(e), name}); }
  void add_eq(Expr e, const std::string& name) { eq_.push_back({std::move(e), name}); }

  /// Objective must reduce to a 1x1 expression.
  void set_objective(bool maximize, Expr e) {
    long d = 1;
    for (int x : e.dims) d *= x;
    if (d != 1) throw std::invalid_argument("objective expression must be scalar");
    maximize_ = maximize;
    objective_ = std::move(e);
  }

  ConicSolution solve(const SolverOptions& opts = {}) const;

  /// Evaluate all constraints at a given assignment of variable values.
  /// Returns true when every PSD constraint has min eigenvalue >= -tol and
  /// every equality holds entrywise within tol.
  bool check_feasible(const std::map<std::string, LabeledOperator>& values,
                      const std::map<std::string, double>& scalars, double tol,
                      std::string* why = nullptr) const;

  Matrix eval_expr(const Expr& e, const std::map<std::string, LabeledOperator>& values,
                   const std::map<std::string, double>& scalars) const;

  const std::vector<detail_model::VarDesc>& variables() const { return vars_; }

 private:
  struct NamedExpr {
    Expr expr;
    std::string name;
  };

  friend class Compiler;
  std::vector<detail_model::VarDesc> vars_;
  std::vector<NamedExpr> psd_, eq_;
  Expr objective_;
  bool maximize_ = false;
};

// ---------------------------------------------------------------------------
// compilation

class Compiler {
 public:
  explicit Compiler(const ConicProblem& p) : p_(p) {}

  void run() {
    int next = 0;
    vars_ = p_.vars_;
    for (auto& v : vars_) {
      v.first_param = next;
      v.num_params = detail_model::count_params(v);
      next += v.num_params;
    }
    form_.num_params = next;
    form_.c = Eigen::VectorXd::Zero(next);

    // objective
    {
      auto [f0, images] = compile_expr(p_.objective_);
      obj_const_ = f0.empty() ? 0.0 : to_dense(f0, 1)(0, 0).real();
      for (auto& [param, trips] : images) {
        double coef = 0.0;
        for (const auto& t : trips) coef += t.v.real();
        form_.c(param) += p_.maximize_ ? -coef : coef;
      }
    }

    for (const auto& ne : p_.psd_) compile_psd(ne);
    std::vector<Eigen::Triplet<double>> arows;
    std::vector<double> brows;
    for (const auto& ne : p_.eq_) compile_eq(ne, arows, brows);
    form_.eq_a.resize(static_cast<long>(brows.size()), form_.num_params);
    form_.eq_a.setFromTriplets(arows.begin(), arows.end());
    form_.eq_b = Eigen::Map<Eigen::VectorXd>(brows.data(), static_cast<long>(brows.size()));
  }

  const SolverForm& form() const { return form_; }

  /// Reconstruct variable values from the solved parameter vector.
  void extract(const Eigen::VectorXd& x, std::map<std::string, LabeledOperator>& blocks,
               std::map<std::string, double>& scalars) const {
    for (const auto& v : vars_) {
      if (v.kind == VarKind::Scalar) {
        scalars[v.name] = x(v.first_param);
        continue;
      }
      Matrix m = Matrix::Zero(v.total_dim(), v.total_dim());
      CTrips x0;
      detail_model::for_each_basis(
          v,
          [&](int local, const CTrips& trips) {
            double xv = x(v.first_param + local);
            for (const auto& t : trips) m(t.r, t.c) += xv * t.v;
          },
          &x0);
      for (const auto& t : x0) m(t.r, t.c) += t.v;
      blocks.emplace(v.name, LabeledOperator{std::move(m), v.dims});
    }
  }

  double objective_constant() const { return obj_const_; }
  bool maximize() const { return p_.maximize_; }

 private:
  // Apply every term of the expression to every basis element of its
  // variable; returns the constant part and per-parameter images.
  std::pair<CTrips, std::map<int, CTrips>> compile_expr(const Expr& e) const {
    CTrips f0 = e.constant;
    std::map<int, CTrips> images;
    for (const auto& term : e.terms) {
      const auto& v = vars_.at(term.var_id);
      CTrips x0;
      CTrips* x0p = (v.kind == VarKind::HermitianTP) ? &x0 : nullptr;
      detail_model::for_each_basis(
          v,
          [&](int local, const CTrips& basis) {
            CTrips trips = (v.kind == VarKind::Scalar) ? term.seed : basis;
            std::vector<int> dims = (v.kind == VarKind::Scalar) ? term.seed_dims : v.dims;
            for (const auto& atom : term.chain) ops::apply_atom(atom, trips, dims);
            auto& dst = images[v.first_param + local];
            dst.insert(dst.end(), trips.begin(), trips.end());
          },
          x0p);
      if (x0p && !x0.empty()) {
        std::vector<int> dims = v.dims;
        for (const auto& atom : term.chain) ops::apply_atom(atom, x0, dims);
        f0.insert(f0.end(), x0.begin(), x0.end());
      }
    }
    merge(f0);
    for (auto& [p, t] : images) merge(t);
    return {std::move(f0), std::move(images)};
  }

  static void merge(CTrips& t) {
    std::map<std::pair<long, long>, cxd> acc;
    for (const auto& x : t) acc[{x.r, x.c}] += x.v;
    t.clear();
    for (const auto& [rc, v] : acc)
      if (std::abs(v.real()) > 0.0 || std::abs(v.imag()) > 0.0) t.push_back({rc.first, rc.second, v});
  }

  static bool all_real(const CTrips& t) {
    for (const auto& x : t)
      if (x.v.imag() != 0.0) return false;
    return true;
  }

  void compile_psd(const ConicProblem::NamedExpr& ne) {
    auto [f0, images] = compile_expr(ne.expr);
    long d = 1;
    for (int x : ne.expr.dims) d *= x;

    bool real = all_real(f0);
    if (real)
      for (const auto& [p, t] : images)
        if (!all_real(t)) {
          real = false;
          break;
        }

    SolverForm::Block blk;
    blk.dim = static_cast<int>(real ? d : 2 * d);
    blk.f0 = embed(f0, d, real);
    for (const auto& [p, t] : images) {
      SolverForm::Entry e;
      e.param = p;
      e.trips = embed_trips(t, d, real);
      if (!e.trips.empty()) blk.entries.push_back(std::move(e));
    }
    form_.blocks.push_back(std::move(blk));
    psd_block_names_.push_back(ne.name);
  }

  void compile_eq(const ConicProblem::NamedExpr& ne, std::vector<Eigen::Triplet<double>>& arows,
                  std::vector<double>& brows) {
    auto [f0, images] = compile_expr(ne.expr);
    long d = 1;
    for (int x : ne.expr.dims) d *= x;
    Matrix c0 = to_dense(f0, d);

    // one real row per (r <= c) real part, one per (r < c) imaginary part
    auto row_index = [&](long r, long c, bool im) {
      return std::make_tuple(r, c, im);
    };
    std::map<std::tuple<long, long, bool>, long> live;
    auto ensure_row = [&](long r, long c, bool im) -> long {
      auto key = row_index(r, c, im);
      auto it = live.find(key);
      if (it != live.end()) return it->second;
      long idx = static_cast<long>(brows.size());
      live.emplace(key, idx);
      double rhs = im ? -c0(r, c).imag() : -c0(r, c).real();
      brows.push_back(rhs);
      return idx;
    };
    // touch every row that appears in the constant, so pure-constant
    // contradictions are caught by the solver as infeasibility
    for (long r = 0; r < d; ++r)
      for (long c = r; c < d; ++c) {
        if (c0(r, c).real() != 0.0) ensure_row(r, c, false);
        if (r < c && c0(r, c).imag() != 0.0) ensure_row(r, c, true);
      }
    for (const auto& [p, trips] : images) {
      Matrix img = to_dense(trips, d);
      for (long r = 0; r < d; ++r)
        for (long c = r; c < d; ++c) {
          if (img(r, c).real() != 0.0)
            arows.emplace_back(ensure_row(r, c, false), p, img(r, c).real());
          if (r < c && img(r, c).imag() != 0.0)
            arows.emplace_back(ensure_row(r, c, true), p, img(r, c).imag());
        }
    }
  }

  static Eigen::MatrixXd embed(const CTrips& t, long d, bool real) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(real ? d : 2 * d, real ? d : 2 * d);
    for (const auto& tr : embed_trips(t, d, real)) m(tr.row(), tr.col()) += tr.value();
    return m;
  }

  static std::vector<Eigen::Triplet<double>> embed_trips(const CTrips& t, long d, bool real) {
    std::vector<Eigen::Triplet<double>> out;
    for (const auto& x : t) {
      double re = x.v.real(), im = x.v.imag();
      if (real) {
        if (re != 0.0) out.emplace_back(static_cast<int>(x.r), static_cast<int>(x.c), re);
        continue;
      }
      if (re != 0.0) {
        out.emplace_back(static_cast<int>(x.r), static_cast<int>(x.c), re);
        out.emplace_back(static_cast<int>(x.r + d), static_cast<int>(x.c + d), re);
      }
      if (im != 0.0) {
        out.emplace_back(static_cast<int>(x.r), static_cast<int>(x.c + d), -im);
        out.emplace_back(static_cast<int>(x.r + d), static_cast<int>(x.c), im);
      }
    }
    return out;
  }

  const ConicProblem& p_;
  std::vector<detail_model::VarDesc> vars_;
  SolverForm form_;
  double obj_const_ = 0.0;
  std::vector<std::string> psd_block_names_;
};

inline Matrix ConicProblem::eval_expr(const Expr& e,
                                      const std::map<std::string, LabeledOperator>& values,
                                      const std::map<std::string, double>& scalars) const {
  long d = 1;
  for (int x : e.dims) d *= x;
  CTrips acc = e.constant;
  for (const auto& term : e.terms) {
    const auto& v = vars_.at(term.var_id);
    CTrips trips;
    std::vector<int> dims;
    if (v.kind == VarKind::Scalar) {
      auto it = scalars.find(v.name);
      if (it == scalars.end()) throw std::invalid_argument("missing scalar " + v.name);
      trips = term.seed;
      for (auto& t : trips) t.v *= it->second;
      dims = term.seed_dims;
    } else {
      auto it = values.find(v.name);
      if (it == values.end()) throw std::invalid_argument("missing variable " + v.name);
      trips = to_trips(it->second.data);
      dims = v.dims;
    }
    for (const auto& atom : term.chain) ops::apply_atom(atom, trips, dims);
    acc.insert(acc.end(), trips.begin(), trips.end());
  }
  return to_dense(acc, d);
}

inline bool ConicProblem::check_feasible(const std::map<std::string, LabeledOperator>& values,
                                         const std::map<std::string, double>& scalars, double tol,
                                         std::string* why) const {
  for (const auto& ne : eq_) {
    Matrix m = eval_expr(ne.expr, values, scalars);
    double dev = m.cwiseAbs().maxCoeff();
    if (dev > tol) {
      if (why) *why = "equality '" + ne.name + "' violated by " + std::to_string(dev);
      return false;
    }
  }
  for (const auto& ne : psd_) {
    Matrix m = eval_expr(ne.expr, values, scalars);
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    double mineig = es.eigenvalues().minCoeff();
    if (mineig < -tol) {
      if (why)
        *why = "psd constraint '" + ne.name + "' has eigenvalue " + std::to_string(mineig);
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// compressed fidelity blocks
//
// The constraint [[A, Q^dag], [Q, B]] >= 0 with a constant PSD A forces Q to
// live on range(A), so the block has no interior whenever A is singular.
// Declaring the compressed block as one PSD variable with corner-pinning
// equalities restores a strictly feasible interior; Q is recovered from the
// off-diagonal corner for use in further constraints.

struct FidelityBlock {
  VarRef g;
  Expr q;  // reconstructed Q on the original space
};

/// Corner A constant, corner B an affine expression on dims `b_dims`.
inline FidelityBlock add_fidelity_block(ConicProblem& prob, const LabeledOperator& a,
                                        const Expr& b, const std::string& name,
                                        bool real_only) {
  auto [lam, v] = psd_range(a.data);
  const long ra = lam.size();
  const long d = a.data.rows();
  long db = 1;
  for (int x : b.dims) db *= x;

  FidelityBlock fb;
  fb.g = prob.add_hermitian(name + ".G", {static_cast<int>(ra + db)}, real_only);
  prob.add_psd(prob.var(fb.g), name + " block");
  Matrix corner = lam.cast<cxd>().asDiagonal();
  prob.add_eq(apply_op(prob.var(fb.g), ops::Restrict{0, ra, {static_cast<int>(ra)}}) -
                  constant_expr({corner, {static_cast<int>(ra)}}),
              name + " corner A");
  prob.add_eq(apply_op(prob.var(fb.g), ops::Restrict{ra, db, b.dims}) - b, name + " corner B");
  fb.q = apply_op(prob.var(fb.g),
                  ops::OffBlockSandwich{Matrix::Identity(d, d), v.adjoint(), ra, db, b.dims});
  return fb;
}

/// Both corners constant PSD operators on the same space.
inline FidelityBlock add_fidelity_block(ConicProblem& prob, const LabeledOperator& a,
                                        const LabeledOperator& b, const std::string& name,
                                        bool real_only) {
  auto [lam_a, va] = psd_range(a.data);
  auto [lam_b, vb] = psd_range(b.data);
  const long ra = lam_a.size(), rb = lam_b.size();

  FidelityBlock fb;
  fb.g = prob.add_hermitian(name + ".G", {static_cast<int>(ra + rb)}, real_only);
  prob.add_psd(prob.var(fb.g), name + " block");
  Matrix ca = lam_a.cast<cxd>().asDiagonal();
  Matrix cb = lam_b.cast<cxd>().asDiagonal();
  prob.add_eq(apply_op(prob.var(fb.g), ops::Restrict{0, ra, {static_cast<int>(ra)}}) -
                  constant_expr({ca, {static_cast<int>(ra)}}),
              name + " corner A");
  prob.add_eq(apply_op(prob.var(fb.g), ops::Restrict{ra, rb, {static_cast<int>(rb)}}) -
                  constant_expr({cb, {static_cast<int>(rb)}}),
              name + " corner B");
  fb.q = apply_op(prob.var(fb.g), ops::OffBlockSandwich{vb, va.adjoint(), ra, rb, a.dims});
  return fb;
}

inline ConicSolution ConicProblem::solve(const SolverOptions& opts) const {
  Compiler comp(*this);
  comp.run();
  RawSolution raw = solve_cone_program(comp.form(), opts);

  ConicSolution sol;
  sol.status = raw.status;
  sol.iterations = raw.iterations;
  double sign = maximize_ ? -1.0 : 1.0;
  sol.primal_value = sign * raw.primal_obj + comp.objective_constant();
  sol.dual_value = sign * raw.dual_obj + comp.objective_constant();
  sol.gap = std::abs(raw.primal_obj - raw.dual_obj);
  comp.extract(raw.x, sol.blocks, sol.scalars);

  // residuals measured on the reconstructed solution
  sol.max_eq_violation = 0.0;
  sol.min_psd_eig = std::numeric_limits<double>::infinity();
  for (const auto& ne : eq_) {
    Matrix m = eval_expr(ne.expr, sol.blocks, sol.scalars);
    if (m.size()) sol.max_eq_violation = std::max(sol.max_eq_violation, m.cwiseAbs().maxCoeff());
  }
  for (const auto& ne : psd_) {
    Matrix m = eval_expr(ne.expr, sol.blocks, sol.scalars);
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().size())
      sol.min_psd_eig = std::min(sol.min_psd_eig, es.eigenvalues().minCoeff());
  }
  if (psd_.empty()) sol.min_psd_eig = 0.0;
  return sol;
}

}  // namespace bqt::sdp
