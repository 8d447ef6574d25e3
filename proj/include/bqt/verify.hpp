#pragma once

// End-to-end verification suite: every benchmark value the library is
// expected to reproduce, with its tolerance pinned in code. Each check
// reports pass/fail plus a short detail line; the CLI `verify` subcommand
// and the acceptance test binary both run these.

#include "bqt/analytic.hpp"
#include "bqt/protocols.hpp"
#include "bqt/simerr.hpp"

#include <chrono>
#include <functional>
#include <random>
#include <sstream>

namespace bqt::verify {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

inline LabeledOperator random_density(std::mt19937_64& rng, std::vector<int> dims) {
  long d = 1;
  for (int x : dims) d *= x;
  std::normal_distribution<double> g;
  Matrix m(d, d);
  for (long i = 0; i < d; ++i)
    for (long j = 0; j < d; ++j) m(i, j) = cxd(g(rng), g(rng));
  Matrix rho = m * m.adjoint();
  rho /= rho.trace();
  return {std::move(rho), std::move(dims)};
}

struct Tracker {
  double worst = 0.0;
  std::string where;
  void update(double dev, const std::string& w) {
    if (dev > worst) {
      worst = dev;
      where = w;
    }
  }
};

}  // namespace detail

/// 1. No-resource benchmark: analytic, LP and SDP all give 1 - 1/d^2.
inline CheckResult check_no_resource(const sdp::SolverOptions& opts) {
  CheckResult r{"no-resource-benchmark"};
  detail::Tracker t;
  for (int d : {2, 3}) {
    double an = no_resource_error(d);
    auto lp = sdp::solve_lp(build_no_resource_lp(d), opts);
    t.update(std::abs(1.0 - lp.primal_value - an), "lp d=" + std::to_string(d));
    auto rep = eppt_swap(ResourceState::none(), d, opts);
    t.update(std::abs(rep.value - an), "sdp d=" + std::to_string(d));
  }
  r.pass = t.worst <= 1e-6;
  std::ostringstream os;
  os << "worst deviation " << t.worst << " at " << t.where << " (tol 1e-6)";
  r.detail = os.str();
  return r;
}

/// 2. Isotropic grid: analytic = LP = SDP, including the single-edit point.
inline CheckResult check_isotropic_grid(const sdp::SolverOptions& opts) {
  CheckResult r{"isotropic-grid"};
  detail::Tracker t;
  const int d = 2;
  for (double fid : {0.0, 0.25, 0.5, 0.75, 0.9, 1.0})
    for (int dA : {2, 3, 4}) {
      double an = isotropic_error(fid, dA, d);
      auto lp = sdp::solve_lp(build_isotropic_lp(fid, dA, d), opts);
      auto rep = eppt_swap(ResourceState::isotropic(fid, dA), d, opts);
      std::string tag = "F=" + std::to_string(fid) + ",dA=" + std::to_string(dA);
      t.update(std::abs(1.0 - lp.primal_value - an), "lp " + tag);
      t.update(std::abs(rep.value - an), "sdp " + tag);
      if (fid == 1.0 && dA == 2) t.update(std::abs(rep.value - 0.5), "single-edit point");
    }
  r.pass = t.worst <= 1e-5;
  std::ostringstream os;
  os << "worst deviation " << t.worst << " at " << t.where << " (tol 1e-5)";
  r.detail = os.str();
  return r;
}

/// 3. Werner grid, with continuity of the closed form at p = 1/2.
inline CheckResult check_werner_grid(const sdp::SolverOptions& opts) {
  CheckResult r{"werner-grid"};
  detail::Tracker t;
  const int d = 2;
  for (double p : {0.0, 0.25, 0.5, 0.75, 1.0})
    for (int dA : {2, 3}) {
      double an = werner_error(p, dA, d);
      auto lp = sdp::solve_lp(build_werner_lp(p, dA, d), opts);
      auto rep = eppt_swap(ResourceState::werner(p, dA), d, opts);
      std::string tag = "p=" + std::to_string(p) + ",dA=" + std::to_string(dA);
      t.update(std::abs(1.0 - lp.primal_value - an), "lp " + tag);
      t.update(std::abs(rep.value - an), "sdp " + tag);
    }
  bool continuous = true;
  for (int dA : {2, 3}) {
    double below = 1.0 - 1.0 / (d * d);
    double above = 1.0 - (4.0 * 0.5 - 2.0 + dA) / (d * d * double(dA));
    if (std::abs(below - above) > 1e-12) continuous = false;
  }
  r.pass = t.worst <= 1e-5 && continuous;
  std::ostringstream os;
  os << "worst deviation " << t.worst << " at " << t.where << " (tol 1e-5), boundary "
     << (continuous ? "continuous" : "DISCONTINUOUS");
  r.detail = os.str();
  return r;
}

/// 4. GADC 5x5 grid against 1 - max{F(gamma,N), 1/16}.
inline CheckResult check_gadc_grid(const sdp::SolverOptions& opts) {
  CheckResult r{"gadc-grid"};
  detail::Tracker t;
  double zero_row = 0.0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      double gamma = i / 4.0, noise = j / 4.0;
      auto rep = eppt_swap(ResourceState::gadc_bell(gamma, noise), 2, opts);
      std::string tag = "gamma=" + std::to_string(gamma) + ",N=" + std::to_string(noise);
      t.update(std::abs(rep.value - gadc_error(gamma, noise)), tag);
      if (i == 0) zero_row = std::max(zero_row, std::abs(rep.value));
    }
  r.pass = t.worst <= 1e-4 && zero_row <= 1e-6;
  std::ostringstream os;
  os << "worst |sdp - analytic| " << t.worst << " (tol 1e-4), gamma=0 row max " << zero_row
     << " (tol 1e-6)";
  r.detail = os.str();
  return r;
}

/// 5. Trigger-qubit protocols: closed-form fidelity vs numeric overlap, the
/// diamond-error landscape, and the second protocol's constants.
inline CheckResult check_kpf16(const sdp::SolverOptions& opts) {
  CheckResult r{"kpf16-protocols"};
  detail::Tracker t;
  double min_err = 2.0;
  std::pair<double, double> argmin{-1, -1};
  bool bound_ok = true;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      Kpf16Params p{i / 4.0, j / 4.0};
      double fid = kpf16_fidelity(p);  // throws if formula and overlap disagree > 1e-12
      double err = kpf16_error(p, opts);
      if (err < min_err) {
        min_err = err;
        argmin = {p.p1, p.p2};
      }
      if (err < 1.0 - fid - 1e-7) bound_ok = false;
    }
  bool corners = (argmin == std::pair<double, double>{1.0, 0.0}) ||
                 (argmin == std::pair<double, double>{0.0, 1.0});
  t.update(std::abs(min_err - 0.75), "grid minimum");
  double second_dev = 0.0;
  for (double p : {0.0, 0.5, 1.0}) {
    auto [fid, dd] = kpf16_second_error(p, opts);
    second_dev = std::max(second_dev, std::abs((1.0 - fid) - 0.75));
    second_dev = std::max(second_dev, std::abs(dd - 0.75));
  }
  r.pass = t.worst <= 1e-4 && corners && bound_ok && second_dev <= 1e-5;
  std::ostringstream os;
  os << "min diamond error " << min_err << " at (" << argmin.first << "," << argmin.second
     << "), fidelity bound " << (bound_ok ? "holds" : "VIOLATED") << ", second-protocol dev "
     << second_dev << " (tol 1e-5)";
  r.detail = os.str();
  return r;
}

/// 6. Diamond-distance and infidelity errors coincide on the swap channel.
inline CheckResult check_error_measure_equality(const sdp::SolverOptions& opts) {
  CheckResult r{"error-measure-equality"};
  detail::Tracker t;
  std::mt19937_64 rng(20260809);
  for (int i = 0; i < 10; ++i) {
    auto rho = ResourceState::custom(detail::random_density(rng, {2, 2}));
    auto a = eppt_swap(rho, 2, opts);
    auto b = eppt_infid_bipartite(swap_channel_choi(2), rho, opts);
    t.update(std::abs(a.value - b.value), "instance " + std::to_string(i));
  }
  r.pass = t.worst <= 1e-5;
  std::ostringstream os;
  os << "worst |diamond - infidelity| " << t.worst << " over 10 resources (tol 1e-5)";
  r.detail = os.str();
  return r;
}

/// 7. General bipartite program vs its swap simplification and its dual.
inline CheckResult check_sdp_family(const sdp::SolverOptions& opts) {
  CheckResult r{"sdp-family-consistency"};
  detail::Tracker tp, td;
  std::mt19937_64 rng(31337);
  for (int i = 0; i < 10; ++i) {
    auto rho = ResourceState::custom(detail::random_density(rng, {2, 2}));
    auto general = eppt_bipartite(swap_channel_choi(2), rho, false, opts);
    auto simplified = eppt_swap(rho, 2, opts);
    tp.update(std::abs(general.value - simplified.value), "instance " + std::to_string(i));
    if (i < 5) {
      auto dual = eppt_bipartite(swap_channel_choi(2), rho, true, opts);
      td.update(std::abs(general.value - dual.value), "instance " + std::to_string(i));
    }
  }
  r.pass = tp.worst <= 1e-4 && td.worst <= 1e-6;
  std::ostringstream os;
  os << "worst |general - simplified| " << tp.worst << " (tol 1e-4), worst primal-dual gap "
     << td.worst << " (tol 1e-6)";
  r.detail = os.str();
  return r;
}

/// 8. Every feasible point quoted for the linear programs checks out.
inline CheckResult check_lp_feasible_points(const sdp::SolverOptions&) {
  CheckResult r{"lp-feasible-points"};
  const double tol = 1e-9;
  detail::Tracker t;
  int checked = 0;
  auto record = [&](bool ok, const std::string& what) {
    ++checked;
    if (!ok) t.update(1.0, what);
  };
  for (int d = 2; d <= 11; ++d) {
    auto lp = build_no_resource_lp(d);
    record(sdp::lp_feasible(lp, no_resource_primal_point(d), tol), "no-res primal d");
    record(sdp::lp_feasible(sdp::lp_dual(lp), no_resource_dual_point(d), tol), "no-res dual d");
  }
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> u;
  // isotropic, small-dimension regime (F > 1/dA, dA <= d^2)
  for (int i = 0; i < 10; ++i) {
    int d = 2 + (i % 2), dA = 2 + (i % 3);
    while (dA > d * d) dA = 2;
    double lo = 1.0 / dA;
    double fid = lo + (1.0 - lo) * (0.05 + 0.9 * u(rng));
    auto lp = build_isotropic_lp(fid, dA, d);
    record(sdp::lp_feasible(lp, isotropic_primal_point(fid, dA, d), tol), "iso small primal");
    record(sdp::lp_feasible(sdp::lp_dual(lp), isotropic_dual_point(fid, dA, d), tol),
           "iso small dual");
  }
  // isotropic, large-dimension regime (dA > d^2)
  for (int i = 0; i < 10; ++i) {
    int d = 2, dA = 5 + i;
    double lo = 1.0 / dA;
    double fid = lo + (1.0 - lo) * (0.05 + 0.9 * u(rng));
    auto lp = build_isotropic_lp(fid, dA, d);
    record(sdp::lp_feasible(lp, isotropic_primal_point(fid, dA, d), tol), "iso large primal");
    record(sdp::lp_feasible(sdp::lp_dual(lp), isotropic_dual_point(fid, dA, d), tol),
           "iso large dual");
  }
  // werner, entangled regime (p > 1/2)
  for (int i = 0; i < 10; ++i) {
    int d = 2 + (i % 2), dA = 2 + (i % 4);
    double p = 0.5 + 0.5 * (0.05 + 0.9 * u(rng));
    auto lp = build_werner_lp(p, dA, d);
    record(sdp::lp_feasible(lp, werner_primal_point(p, dA, d), tol), "werner primal");
    record(sdp::lp_feasible(sdp::lp_dual(lp), werner_dual_point(p, dA, d), tol), "werner dual");
  }
  r.pass = t.worst == 0.0;
  std::ostringstream os;
  os << checked << " feasible points checked at tol 1e-9"
     << (r.pass ? "" : ", first failure: " + t.where);
  r.detail = os.str();
  return r;
}

/// 9. Controlled teleportation: trivial Charlie reduces to the bipartite
/// program; no-resource and Phi (x) uncorrelated-Charlie values.
inline CheckResult check_bcqt(const sdp::SolverOptions& opts) {
  CheckResult r{"bcqt"};
  detail::Tracker t;
  std::mt19937_64 rng(777000);
  for (int i = 0; i < 5; ++i) {
    LabeledOperator rho = detail::random_density(rng, {2, 2});
    LabeledOperator rho3 = rho;
    rho3.dims = {2, 2, 1};
    auto via_bcqt = eppt_bcqt(rho3, 2, opts);
    auto via_swap = eppt_swap(ResourceState::custom(rho), 2, opts);
    t.update(std::abs(via_bcqt.value - via_swap.value), "trivial-Chat " + std::to_string(i));
  }
  LabeledOperator none{Matrix::Ones(1, 1), {1, 1, 1}};
  t.update(std::abs(eppt_bcqt(none, 2, opts).value - 0.75), "no-resource");
  LabeledOperator phi_pi = kron(max_entangled(2), max_mixed(2));
  t.update(std::abs(eppt_bcqt(phi_pi, 2, opts).value - 0.5), "Phi x pi");
  r.pass = t.worst <= 1e-5;
  std::ostringstream os;
  os << "worst deviation " << t.worst << " at " << t.where << " (tol 1e-5)";
  r.detail = os.str();
  return r;
}

/// 10. Infrastructure: teleportation composes to the identity, twirls are
/// idempotent projections onto their families, partial transpose is a
/// bit-exact involution.
inline CheckResult check_infrastructure(const sdp::SolverOptions&) {
  CheckResult r{"infrastructure"};
  detail::Tracker t;
  for (int d : {2, 3}) {
    ChoiOperator tele = teleportation_choi(d);
    double dev = (tele.op.data - identity_choi({d}).op.data).cwiseAbs().maxCoeff();
    t.update(dev > 1e-10 ? 1.0 : 0.0, "teleportation d=" + std::to_string(d));
  }
  std::mt19937_64 rng(424242);
  for (int i = 0; i < 50; ++i) {
    int d = 2 + (i % 3);
    LabeledOperator rho = detail::random_density(rng, {d, d});
    LabeledOperator ti = isotropic_twirl(rho);
    LabeledOperator tw = werner_twirl(rho);
    double fid = (max_entangled(d).data.adjoint() * rho.data).trace().real();
    auto [sym, anti] = sym_antisym_projectors(d);
    double p = (anti.data.adjoint() * rho.data).trace().real();
    double dev = (isotropic_twirl(ti).data - ti.data).cwiseAbs().maxCoeff();
    dev = std::max(dev, (werner_twirl(tw).data - tw.data).cwiseAbs().maxCoeff());
    dev = std::max(dev, (ti.data - isotropic_state(fid, d).data).cwiseAbs().maxCoeff());
    dev = std::max(dev, (tw.data - werner_state(p, d).data).cwiseAbs().maxCoeff());
    if (dev > 1e-10) t.update(1.0, "twirl closure " + std::to_string(i));

    LabeledOperator h = detail::random_density(rng, {2, 3});
    LabeledOperator twice = partial_transpose(partial_transpose(h, SubsystemSet{1}),
                                              SubsystemSet{1});
    if ((twice.data - h.data).cwiseAbs().maxCoeff() != 0.0)
      t.update(1.0, "pt involution " + std::to_string(i));
  }
  r.pass = t.worst == 0.0;
  r.detail = r.pass ? "teleportation identity, twirl closure, involution all hold"
                    : "failure at " + t.where;
  return r;
}

inline std::vector<std::pair<std::string, std::function<CheckResult(const sdp::SolverOptions&)>>>
all_checks() {
  return {
      {"no-resource-benchmark", check_no_resource},
      {"isotropic-grid", check_isotropic_grid},
      {"werner-grid", check_werner_grid},
      {"gadc-grid", check_gadc_grid},
      {"kpf16-protocols", check_kpf16},
      {"error-measure-equality", check_error_measure_equality},
      {"sdp-family-consistency", check_sdp_family},
      {"lp-feasible-points", check_lp_feasible_points},
      {"bcqt", check_bcqt},
      {"infrastructure", check_infrastructure},
  };
}

inline std::vector<CheckResult> run_checks(const sdp::SolverOptions& opts,
                                           const std::string& only = "") {
  std::vector<CheckResult> results;
  for (auto& [name, fn] : all_checks()) {
    if (!only.empty() && name != only) continue;
    auto t0 = std::chrono::steady_clock::now();
    CheckResult res = fn(opts);
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    results.push_back(std::move(res));
  }
  return results;
}

}  // namespace bqt::verify
