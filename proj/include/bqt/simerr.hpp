#pragma once

// Simulation-error computations: the diamond-distance and channel-fidelity
// SDPs, the PPT-relaxed simulation-error programs for bipartite and
// multipartite channels (with their swap-channel simplifications), the
// explicit dual of the general bipartite program, the bidirectional
// controlled variant, and the channel-box transformation program.

#include "bqt/analytic.hpp"
#include "bqt/channels.hpp"
#include "bqt/sdp/model.hpp"
#include "bqt/states.hpp"

#include <numeric>
#include <optional>

namespace bqt {

using sdp::adjointed;
using sdp::block2x2;
using sdp::constant_expr;
using sdp::contracted;
using sdp::Expr;
using sdp::kron_left;
using sdp::kron_right;
using sdp::permuted;
using sdp::real_part;
using sdp::traced_over;
using sdp::transposed_on;
using sdp::weighted_trace;

enum class Method { Analytic, Lp, SdpPrimal, SdpDual };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::Analytic: return "analytic";
    case Method::Lp: return "lp";
    case Method::SdpPrimal: return "sdp-primal";
    default: return "sdp-dual";
  }
}

struct ErrorReport {
  double value = 0.0;
  Method method = Method::SdpPrimal;
  double gap = 0.0;
  sdp::SolveStatus status = sdp::SolveStatus::Inaccurate;
  std::map<std::string, LabeledOperator> certificate;
  std::string resource;
  std::string target;
  int iterations = 0;
  bool optimal() const { return status == sdp::SolveStatus::Optimal; }
};

namespace detail {

/// Error computations default to tighter tolerances than the general solver
/// so that reported values carry ~1e-8 accuracy out of the box.
inline sdp::SolverOptions tight_opts() {
  sdp::SolverOptions o;
  o.feas_tol = 1e-9;
  o.gap_tol = 1e-8;
  return o;
}

inline bool exactly_real(const Matrix& m) {
  for (long r = 0; r < m.rows(); ++r)
    for (long c = 0; c < m.cols(); ++c)
      if (m(r, c).imag() != 0.0) return false;
  return true;
}

inline long embedded_dim(long complex_dim, bool real) { return real ? complex_dim : 2 * complex_dim; }

inline void check_ambient(long complex_dim, bool real, long cap) {
  if (embedded_dim(complex_dim, real) > cap)
    throw std::invalid_argument(
        "problem dimension " + std::to_string(embedded_dim(complex_dim, real)) +
        " (real embedded) exceeds the cap of " + std::to_string(cap) +
        "; reduce the resource or channel dimensions");
}

inline SubsystemSet range_set(int from, int count) {
  std::vector<int> idx(count);
  std::iota(idx.begin(), idx.end(), from);
  return SubsystemSet{idx};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// diamond distance and channel fidelity

/// (1/2)||N - M||_diamond via its standard SDP. Both arguments must be CP
/// maps on matching spaces.
inline ErrorReport diamond_distance_report(const ChoiOperator& n, const ChoiOperator& m,
                                           const sdp::SolverOptions& opts = detail::tight_opts()) {
  if (n.input_dims != m.input_dims || n.output_dims != m.output_dims)
    throw std::invalid_argument("diamond_distance: channel dimensions differ");
  if (min_eigenvalue(n.op) < -kPsdTol || min_eigenvalue(m.op) < -kPsdTol)
    throw std::invalid_argument("diamond_distance: inputs must be completely positive");

  LabeledOperator delta = n.op - m.op;
  const bool real = detail::exactly_real(delta.data);
  const int nin = static_cast<int>(n.input_dims.size());
  const int nout = static_cast<int>(n.output_dims.size());

  sdp::ConicProblem prob;
  auto mu = prob.add_scalar("mu");
  auto z = prob.add_hermitian("Z", n.op.dims, real);
  LabeledOperator id_in = identity_op(n.input_dims);
  prob.add_psd(prob.scaled_seed(mu, identity_op({1})), "mu >= 0");
  prob.add_psd(prob.var(z), "Z >= 0");
  prob.add_psd(prob.scaled_seed(mu, id_in) - traced_over(prob.var(z), detail::range_set(nin, nout)),
               "mu I >= Tr_out Z");
  prob.add_psd(prob.var(z) - constant_expr(delta), "Z >= Gamma^N - Gamma^M");
  prob.set_objective(false, prob.scaled_seed(mu, identity_op({1})));

  sdp::ConicSolution sol = prob.solve(opts);
  ErrorReport rep;
  rep.value = sol.primal_value;
  rep.method = Method::SdpPrimal;
  rep.gap = sol.gap;
  rep.status = sol.status;
  rep.iterations = sol.iterations;
  rep.certificate.insert(sol.blocks.begin(), sol.blocks.end());
  rep.target = "diamond-distance";
  return rep;
}

inline double diamond_distance(const ChoiOperator& n, const ChoiOperator& m,
                               const sdp::SolverOptions& opts = detail::tight_opts()) {
  return diamond_distance_report(n, m, opts).value;
}

/// Channel fidelity F(N, M) through the dual form of the root-fidelity SDP;
/// the 2x2 operator block is compressed onto the ranges of the two Choi
/// operators so that the program has a strictly feasible interior.
inline double channel_fidelity(const ChoiOperator& n, const ChoiOperator& m,
                               const sdp::SolverOptions& opts = detail::tight_opts()) {
  if (n.input_dims != m.input_dims || n.output_dims != m.output_dims)
    throw std::invalid_argument("channel_fidelity: channel dimensions differ");
  const bool real = detail::exactly_real(n.op.data) && detail::exactly_real(m.op.data);
  const int nin = static_cast<int>(n.input_dims.size());
  const int nout = static_cast<int>(n.output_dims.size());

  sdp::ConicProblem prob;
  auto lam = prob.add_scalar("lambda");
  auto fb = sdp::add_fidelity_block(prob, m.op, n.op, "fidelity", real);
  LabeledOperator id_in = identity_op(n.input_dims);
  prob.add_psd(prob.scaled_seed(lam, identity_op({1})), "lambda >= 0");
  prob.add_psd(real_part(traced_over(fb.q, detail::range_set(nin, nout))) -
                   prob.scaled_seed(lam, id_in),
               "lambda I <= Re Tr_out Q");
  prob.set_objective(true, prob.scaled_seed(lam, identity_op({1})));

  sdp::ConicSolution sol = prob.solve(opts);
  double lambda = sol.primal_value;
  return lambda * lambda;
}

/// Primal form of the root-fidelity SDP (cross-check of channel_fidelity).
inline double channel_fidelity_primal(const ChoiOperator& n, const ChoiOperator& m,
                                      const sdp::SolverOptions& opts = detail::tight_opts()) {
  const bool real = detail::exactly_real(n.op.data) && detail::exactly_real(m.op.data);
  const int nin = static_cast<int>(n.input_dims.size());

  sdp::ConicProblem prob;
  auto rho = prob.add_hermitian("rho", n.input_dims, real);
  auto w = prob.add_hermitian("W", n.op.dims, real);
  auto z = prob.add_hermitian("Z", n.op.dims, real);
  LabeledOperator id_out = identity_op(n.output_dims);
  prob.add_psd(prob.var(rho), "rho >= 0");
  prob.add_eq(weighted_trace(identity_op(n.input_dims), prob.var(rho)) -
                  constant_expr({Matrix::Ones(1, 1), {1}}),
              "Tr rho = 1");
  Expr rho_ext = kron_right(prob.var(rho), id_out);
  prob.add_psd(block2x2(prob.var(w), rho_ext, rho_ext, prob.var(z)), "primal block");
  prob.set_objective(false, 0.5 * (weighted_trace(n.op, prob.var(w)) +
                                   weighted_trace(m.op, prob.var(z))));
  (void)nin;
  sdp::ConicSolution sol = prob.solve(opts);
  double root = sol.primal_value;
  return root * root;
}

// ---------------------------------------------------------------------------
// PPT-relaxed simulation error, general bipartite channel

/// General bipartite program: the channel n acts on [A,B] -> [A',B'] and is
/// simulated from the resource with PPT-preserving operations. Setting
/// `use_dual` solves the explicit dual program instead.
inline ErrorReport eppt_bipartite(const ChoiOperator& n, const ResourceState& rho,
                                  bool use_dual = false, const sdp::SolverOptions& opts = detail::tight_opts(),
                                  long ambient_cap = 4096) {
  if (n.input_dims.size() != 2 || n.output_dims.size() != 2)
    throw std::invalid_argument("eppt_bipartite: need a bipartite channel [A,B]->[A',B']");
  ValidationReport val = validate(n);
  if (!val.cp || !val.tp)
    throw std::invalid_argument("eppt_bipartite: channel Choi operator is not CP+TP");

  LabeledOperator res = rho.materialize();
  const bool real = detail::exactly_real(res.data) && detail::exactly_real(n.op.data);
  const int a = n.input_dims[0], b = n.input_dims[1];
  const int ah = res.dims[0], bh = res.dims[1];
  const int ap = n.output_dims[0], bp = n.output_dims[1];
  const std::vector<int> pdims = {a, b, ah, bh, ap, bp};
  long pdim = static_cast<long>(a) * b * ah * bh * ap * bp;
  detail::check_ambient(pdim, real, ambient_cap);

  LabeledOperator t_rho = partial_transpose(res, SubsystemSet{0, 1});
  t_rho.data = 0.5 * (t_rho.data + t_rho.data.adjoint()).eval();
  LabeledOperator id_ab = identity_op({a, b});
  LabeledOperator id_abhh = identity_op({a, b, ah, bh});
  LabeledOperator id_out = identity_op({ap, bp});

  ErrorReport rep;
  rep.resource = rho.describe();
  rep.target = "bipartite-channel";

  if (!use_dual) {
    sdp::ConicProblem prob;
    auto mu = prob.add_scalar("mu");
    auto z = prob.add_hermitian("Z", {a, b, ap, bp}, real);
    auto p = prob.add_hermitian_tp("P", pdims, 2, id_abhh, real);
    prob.add_psd(prob.scaled_seed(mu, identity_op({1})), "mu >= 0");
    prob.add_psd(prob.var(z), "Z >= 0");
    prob.add_psd(prob.var(p), "P >= 0");
    prob.add_psd(prob.scaled_seed(mu, id_ab) - traced_over(prob.var(z), SubsystemSet{2, 3}),
                 "mu I >= Z_AB");
    prob.add_psd(transposed_on(prob.var(p), SubsystemSet{1, 3, 5}), "PPT cut");
    prob.add_psd(prob.var(z) - constant_expr(n.op) +
                     contracted(t_rho, SubsystemSet{2, 3}, prob.var(p)),
                 "Z >= Gamma^N - Tr[T(rho) P]");
    prob.set_objective(false, prob.scaled_seed(mu, identity_op({1})));

    sdp::ConicSolution sol = prob.solve(opts);
    rep.value = sol.primal_value;
    rep.method = Method::SdpPrimal;
    rep.gap = sol.gap;
    rep.status = sol.status;
    rep.iterations = sol.iterations;
    rep.certificate.emplace("Z", sol.blocks.at("Z"));
    rep.certificate.emplace("P", sol.blocks.at("P"));
    return rep;
  }

  // explicit dual program
  sdp::ConicProblem prob;
  auto x1 = prob.add_hermitian("X1", {a, b}, real);
  auto x2 = prob.add_hermitian("X2", {a, b, ap, bp}, real);
  auto x3 = prob.add_hermitian("X3", pdims, real);
  auto w = prob.add_hermitian("W", {a, b, ah, bh}, real);
  prob.add_psd(prob.var(x1), "X1 >= 0");
  prob.add_psd(prob.var(x2), "X2 >= 0");
  prob.add_psd(prob.var(x3), "X3 >= 0");
  prob.add_psd(constant_expr({Matrix::Ones(1, 1), {1}}) -
                   weighted_trace(id_ab, prob.var(x1)),
               "Tr X1 <= 1");
  prob.add_psd(kron_right(prob.var(x1), id_out) - prob.var(x2), "X2 <= X1 (x) I");
  // X2 (x) T(rho), arranged on (A,B,Ahat,Bhat,A',B')
  Expr x2rho = permuted(kron_right(prob.var(x2), t_rho), {0, 1, 4, 5, 2, 3});
  prob.add_psd(kron_right(prob.var(w), id_out) - x2rho -
                   transposed_on(prob.var(x3), SubsystemSet{1, 3, 5}),
               "dual operator inequality");
  prob.set_objective(true, weighted_trace(n.op, prob.var(x2)) -
                               weighted_trace(id_abhh, prob.var(w)));

  sdp::ConicSolution sol = prob.solve(opts);
  rep.value = sol.primal_value;
  rep.method = Method::SdpDual;
  rep.gap = sol.gap;
  rep.status = sol.status;
  rep.iterations = sol.iterations;
  rep.certificate.insert(sol.blocks.begin(), sol.blocks.end());
  return rep;
}

// ---------------------------------------------------------------------------
// swap-channel simplification (POVM form)

/// Simplified program for simulating the d-dimensional swap channel: a
/// four-outcome POVM {K,L,M,N} on the resource with partial-transpose
/// inequality constraints. Works for any resource dims, including the
/// trivial one (no resource), where it degenerates to a linear program.
inline ErrorReport eppt_swap(const ResourceState& rho, int d,
                             const sdp::SolverOptions& opts = detail::tight_opts()) {
  if (d < 2) throw std::invalid_argument("eppt_swap: d must be >= 2");
  LabeledOperator res = rho.materialize();
  const bool real = detail::exactly_real(res.data);
  const std::vector<int> hdims = res.dims;
  LabeledOperator id = identity_op(hdims);
  const SubsystemSet bhat{1};
  const double dm = d - 1.0, dp = d + 1.0;

  sdp::ConicProblem prob;
  auto k = prob.add_hermitian("K", hdims, real);
  auto l = prob.add_hermitian("L", hdims, real);
  auto m = prob.add_hermitian("M", hdims, real);
  Expr nn = constant_expr(id) - prob.var(k) - prob.var(l) - prob.var(m);
  prob.add_psd(prob.var(k), "K >= 0");
  prob.add_psd(prob.var(l), "L >= 0");
  prob.add_psd(prob.var(m), "M >= 0");
  prob.add_psd(nn, "N >= 0");
  prob.add_psd(transposed_on(prob.var(k) + (1.0 / dp) * prob.var(l) + (1.0 / dp) * prob.var(m) +
                                 (1.0 / (dp * dp)) * nn,
                             bhat),
               "pt-1");
  prob.add_psd(transposed_on((1.0 / dm) * (prob.var(l) + (1.0 / dp) * nn) -
                                 (prob.var(k) + (1.0 / dp) * prob.var(m)),
                             bhat),
               "pt-2");
  prob.add_psd(transposed_on((1.0 / dm) * (prob.var(m) + (1.0 / dp) * nn) -
                                 (prob.var(k) + (1.0 / dp) * prob.var(l)),
                             bhat),
               "pt-3");
  prob.add_psd(transposed_on(prob.var(k) + (1.0 / (dm * dm)) * nn -
                                 (1.0 / dm) * (prob.var(l) + prob.var(m)),
                             bhat),
               "pt-4");
  prob.set_objective(true, weighted_trace(res, prob.var(k)));

  sdp::ConicSolution sol = prob.solve(opts);
  ErrorReport rep;
  rep.value = 1.0 - sol.primal_value;
  rep.method = Method::SdpPrimal;
  rep.gap = sol.gap;
  rep.status = sol.status;
  rep.iterations = sol.iterations;
  rep.resource = rho.describe();
  rep.target = "swap-" + std::to_string(d);
  LabeledOperator kv = sol.blocks.at("K"), lv = sol.blocks.at("L"), mv = sol.blocks.at("M");
  rep.certificate.emplace("K", kv);
  rep.certificate.emplace("L", lv);
  rep.certificate.emplace("M", mv);
  rep.certificate.emplace("N", id - kv - lv - mv);
  return rep;
}

// ---------------------------------------------------------------------------
// infidelity-based bipartite program

inline ErrorReport eppt_infid_bipartite(const ChoiOperator& n, const ResourceState& rho,
                                        const sdp::SolverOptions& opts = detail::tight_opts(),
                                        long ambient_cap = 4096) {
  if (n.input_dims.size() != 2 || n.output_dims.size() != 2)
    throw std::invalid_argument("eppt_infid_bipartite: need a bipartite channel");
  ValidationReport val = validate(n);
  if (!val.cp || !val.tp)
    throw std::invalid_argument("eppt_infid_bipartite: channel Choi operator is not CP+TP");

  LabeledOperator res = rho.materialize();
  const bool real = detail::exactly_real(res.data) && detail::exactly_real(n.op.data);
  const int a = n.input_dims[0], b = n.input_dims[1];
  const int ah = res.dims[0], bh = res.dims[1];
  const int ap = n.output_dims[0], bp = n.output_dims[1];
  const std::vector<int> pdims = {a, b, ah, bh, ap, bp};
  detail::check_ambient(static_cast<long>(a) * b * ah * bh * ap * bp, real, ambient_cap);

  LabeledOperator t_rho = partial_transpose(res, SubsystemSet{0, 1});
  t_rho.data = 0.5 * (t_rho.data + t_rho.data.adjoint()).eval();
  LabeledOperator id_abhh = identity_op({a, b, ah, bh});

  sdp::ConicProblem prob;
  auto lam = prob.add_scalar("lambda");
  auto p = prob.add_hermitian_tp("P", pdims, 2, id_abhh, real);
  auto fb = sdp::add_fidelity_block(prob, n.op,
                                    contracted(t_rho, SubsystemSet{2, 3}, prob.var(p)),
                                    "fidelity", real);
  prob.add_psd(prob.scaled_seed(lam, identity_op({1})), "lambda >= 0");
  prob.add_psd(prob.var(p), "P >= 0");
  prob.add_psd(transposed_on(prob.var(p), SubsystemSet{1, 3, 5}), "PPT cut");
  prob.add_psd(real_part(traced_over(fb.q, SubsystemSet{2, 3})) -
                   prob.scaled_seed(lam, identity_op({a, b})),
               "lambda I <= Re Tr_out Q");
  prob.set_objective(true, prob.scaled_seed(lam, identity_op({1})));

  sdp::ConicSolution sol = prob.solve(opts);
  ErrorReport rep;
  double lambda = sol.primal_value;
  rep.value = 1.0 - lambda * lambda;
  rep.method = Method::SdpPrimal;
  rep.gap = sol.gap;
  rep.status = sol.status;
  rep.iterations = sol.iterations;
  rep.resource = rho.describe();
  rep.target = "bipartite-channel-infidelity";
  rep.certificate.emplace("P", sol.blocks.at("P"));
  return rep;
}

// ---------------------------------------------------------------------------
// multipartite channel simulation

struct Party {
  int in = 1;
  int hat = 1;
  int out = 1;
};

/// Nonredundant PPT cuts: subsets of parties of size <= floor(M/2); at even
/// M the size-M/2 subsets containing party 0 break the complement tie.
inline std::vector<std::vector<int>> multipartite_cuts(int m) {
  std::vector<std::vector<int>> cuts;
  for (unsigned mask = 1; mask + 1 < (1u << m); ++mask) {
    int pc = __builtin_popcount(mask);
    if (2 * pc > m) continue;
    if (2 * pc == m && !(mask & 1u)) continue;
    std::vector<int> s;
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) s.push_back(i);
    cuts.push_back(std::move(s));
  }
  return cuts;
}

/// PPT-relaxed simulation error of an M-party channel from an M-party
/// resource state (diamond-distance form; `infidelity` switches to the
/// fidelity-based variant).
inline ErrorReport eppt_multipartite(const ChoiOperator& n, const std::vector<Party>& parties,
                                     const LabeledOperator& rho, bool infidelity = false,
                                     const sdp::SolverOptions& opts = detail::tight_opts(),
                                     long ambient_cap = 4096) {
  const int m = static_cast<int>(parties.size());
  if (m < 2) throw std::invalid_argument("eppt_multipartite: need at least two parties");
  if (m > 3) throw std::invalid_argument("eppt_multipartite: more than three parties unsupported");
  std::vector<int> ins, hats, outs;
  for (const auto& pt : parties) {
    ins.push_back(pt.in);
    hats.push_back(pt.hat);
    outs.push_back(pt.out);
  }
  if (n.input_dims != ins || n.output_dims != outs)
    throw std::invalid_argument("eppt_multipartite: channel dims do not match parties");
  if (rho.dims != hats)
    throw std::invalid_argument("eppt_multipartite: resource dims do not match parties");
  ValidationReport val = validate(n);
  if (!val.cp || !val.tp)
    throw std::invalid_argument("eppt_multipartite: channel Choi operator is not CP+TP");

  const bool real = detail::exactly_real(rho.data) && detail::exactly_real(n.op.data);
  std::vector<int> pdims = ins;
  pdims.insert(pdims.end(), hats.begin(), hats.end());
  pdims.insert(pdims.end(), outs.begin(), outs.end());
  long pdim = 1;
  for (int x : pdims) pdim *= x;
  detail::check_ambient(pdim, real, ambient_cap);

  SubsystemSet all_hats;
  for (std::size_t i = 0; i < hats.size(); ++i) all_hats.indices.push_back(static_cast<int>(i));
  LabeledOperator t_rho = partial_transpose(rho, all_hats);
  t_rho.data = 0.5 * (t_rho.data + t_rho.data.adjoint()).eval();
  LabeledOperator id_in = identity_op(ins);
  std::vector<int> inhat = ins;
  inhat.insert(inhat.end(), hats.begin(), hats.end());
  LabeledOperator id_inhat = identity_op(inhat);
  SubsystemSet hat_set = detail::range_set(m, m);  // hats inside P

  sdp::ConicProblem prob;
  auto p = prob.add_hermitian_tp("P", pdims, m, id_inhat, real);
  prob.add_psd(prob.var(p), "P >= 0");
  for (const auto& cut : multipartite_cuts(m)) {
    std::vector<int> idx;
    std::string nm = "PPT cut {";
    for (int i : cut) {
      idx.push_back(i);
      idx.push_back(m + i);
      idx.push_back(2 * m + i);
      nm += std::to_string(i);
    }
    nm += "}";
    prob.add_psd(transposed_on(prob.var(p), SubsystemSet{idx}), nm);
  }

  ErrorReport rep;
  rep.resource = "multipartite(" + std::to_string(m) + ")";
  rep.target = infidelity ? "multipartite-channel-infidelity" : "multipartite-channel";

  if (!infidelity) {
    auto mu = prob.add_scalar("mu");
    std::vector<int> zdims = ins;
    zdims.insert(zdims.end(), outs.begin(), outs.end());
    auto z = prob.add_hermitian("Z", zdims, real);
    prob.add_psd(prob.scaled_seed(mu, identity_op({1})), "mu >= 0");
    prob.add_psd(prob.var(z), "Z >= 0");
    prob.add_psd(prob.scaled_seed(mu, id_in) - traced_over(prob.var(z), detail::range_set(m, m)),
                 "mu I >= Z_in");
    prob.add_psd(prob.var(z) - constant_expr(n.op) + contracted(t_rho, hat_set, prob.var(p)),
                 "Z >= Gamma^N - Tr[T(rho) P]");
    prob.set_objective(false, prob.scaled_seed(mu, identity_op({1})));
    sdp::ConicSolution sol = prob.solve(opts);
    rep.value = sol.primal_value;
    rep.method = Method::SdpPrimal;
    rep.gap = sol.gap;
    rep.status = sol.status;
    rep.iterations = sol.iterations;
    rep.certificate.emplace("P", sol.blocks.at("P"));
    rep.certificate.emplace("Z", sol.blocks.at("Z"));
    return rep;
  }

  auto lam = prob.add_scalar("lambda");
  auto fb = sdp::add_fidelity_block(prob, n.op, contracted(t_rho, hat_set, prob.var(p)),
                                    "fidelity", real);
  prob.add_psd(prob.scaled_seed(lam, identity_op({1})), "lambda >= 0");
  prob.add_psd(real_part(traced_over(fb.q, detail::range_set(m, m))) -
                   prob.scaled_seed(lam, id_in),
               "lambda I <= Re Tr_out Q");
  prob.set_objective(true, prob.scaled_seed(lam, identity_op({1})));
  sdp::ConicSolution sol = prob.solve(opts);
  double lambda = sol.primal_value;
  rep.value = 1.0 - lambda * lambda;
  rep.method = Method::SdpPrimal;
  rep.gap = sol.gap;
  rep.status = sol.status;
  rep.iterations = sol.iterations;
  rep.certificate.emplace("P", sol.blocks.at("P"));
  return rep;
}

// ---------------------------------------------------------------------------
// bidirectional controlled teleportation

/// Swap-channel simulation with a helping third party: POVM {K,L,M,N} on
/// (Ahat, Bhat, Chat) with the partial-transpose inequality families for
/// Alice's and Bob's shares and PPT of every outcome across Charlie's share.
inline ErrorReport eppt_bcqt(const LabeledOperator& rho_abc, int d,
                             const sdp::SolverOptions& opts = detail::tight_opts()) {
  if (d < 2) throw std::invalid_argument("eppt_bcqt: d must be >= 2");
  if (rho_abc.num_factors() != 3)
    throw std::invalid_argument("eppt_bcqt: resource must have dims [Ahat, Bhat, Chat]");
  const bool real = detail::exactly_real(rho_abc.data);
  LabeledOperator id = identity_op(rho_abc.dims);
  const double dm = d - 1.0, dp = d + 1.0;

  sdp::ConicProblem prob;
  auto k = prob.add_hermitian("K", rho_abc.dims, real);
  auto l = prob.add_hermitian("L", rho_abc.dims, real);
  auto m = prob.add_hermitian("M", rho_abc.dims, real);
  Expr nn = constant_expr(id) - prob.var(k) - prob.var(l) - prob.var(m);
  prob.add_psd(prob.var(k), "K >= 0");
  prob.add_psd(prob.var(l), "L >= 0");
  prob.add_psd(prob.var(m), "M >= 0");
  prob.add_psd(nn, "N >= 0");
  for (int s : {0, 1}) {
    SubsystemSet cut{s};
    std::string tag = (s == 0) ? "Ahat" : "Bhat";
    prob.add_psd(transposed_on(prob.var(k) + (1.0 / dp) * prob.var(l) +
                                   (1.0 / dp) * prob.var(m) + (1.0 / (dp * dp)) * nn,
                               cut),
                 "pt-1-" + tag);
    prob.add_psd(transposed_on((1.0 / dm) * (prob.var(l) + (1.0 / dp) * nn) -
                                   (prob.var(k) + (1.0 / dp) * prob.var(m)),
                               cut),
                 "pt-2-" + tag);
    prob.add_psd(transposed_on((1.0 / dm) * (prob.var(m) + (1.0 / dp) * nn) -
                                   (prob.var(k) + (1.0 / dp) * prob.var(l)),
                               cut),
                 "pt-3-" + tag);
    prob.add_psd(transposed_on(prob.var(k) + (1.0 / (dm * dm)) * nn -
                                   (1.0 / dm) * (prob.var(l) + prob.var(m)),
                               cut),
                 "pt-4-" + tag);
  }
  const SubsystemSet chat{2};
  prob.add_psd(transposed_on(prob.var(k), chat), "T_C K >= 0");
  prob.add_psd(transposed_on(prob.var(l), chat), "T_C L >= 0");
  prob.add_psd(transposed_on(prob.var(m), chat), "T_C M >= 0");
  prob.add_psd(transposed_on(nn, chat), "T_C N >= 0");
  prob.set_objective(true, weighted_trace(rho_abc, prob.var(k)));

  sdp::ConicSolution sol = prob.solve(opts);
  ErrorReport rep;
  rep.value = 1.0 - sol.primal_value;
  rep.method = Method::SdpPrimal;
  rep.gap = sol.gap;
  rep.status = sol.status;
  rep.iterations = sol.iterations;
  rep.resource = "tripartite";
  rep.target = "bcqt-swap-" + std::to_string(d);
  LabeledOperator kv = sol.blocks.at("K"), lv = sol.blocks.at("L"), mv = sol.blocks.at("M");
  rep.certificate.emplace("K", kv);
  rep.certificate.emplace("L", lv);
  rep.certificate.emplace("M", mv);
  rep.certificate.emplace("N", id - kv - lv - mv);
  return rep;
}

// ---------------------------------------------------------------------------
// channel-box transformation (fidelity error measure)

/// Smallest infidelity with which a superchannel taking (n -> k) can be
/// found subject to converting m to l exactly.
inline ErrorReport channel_box_error(const ChoiOperator& n, const ChoiOperator& m,
                                     const ChoiOperator& k, const ChoiOperator& l,
                                     const sdp::SolverOptions& opts = detail::tight_opts()) {
  if (n.op.dims != m.op.dims || k.op.dims != l.op.dims)
    throw std::invalid_argument("channel_box_error: mismatched channel pairs");
  if (n.input_dims.size() != 1 || n.output_dims.size() != 1 || k.input_dims.size() != 1 ||
      k.output_dims.size() != 1)
    throw std::invalid_argument("channel_box_error: expects single-factor channels");
  const int da = n.input_dims[0], db = n.output_dims[0];
  const int dc = k.input_dims[0], dd = k.output_dims[0];
  const bool real = detail::exactly_real(n.op.data) && detail::exactly_real(m.op.data) &&
                    detail::exactly_real(k.op.data) && detail::exactly_real(l.op.data);

  // theta lives on (C, B, A, D); Tr_{AD} theta = I_{CB}
  sdp::ConicProblem prob;
  auto theta = prob.add_hermitian_tp("Theta", {dc, db, da, dd}, 2, identity_op({dc, db}), real);
  auto lam = prob.add_scalar("lambda");
  prob.add_psd(prob.var(theta), "Theta >= 0");
  prob.add_psd(prob.scaled_seed(lam, identity_op({1})), "lambda >= 0");

  // Tr_D[theta] = Tr_{BD}[theta] (x) I_B / d_B, arranged on (C, B, A)
  Expr lhs = traced_over(prob.var(theta), SubsystemSet{3});
  Expr rhs = permuted(kron_right(traced_over(prob.var(theta), SubsystemSet{1, 3}),
                                 (1.0 / db) * identity_op({db})),
                      {0, 2, 1});
  prob.add_eq(lhs - rhs, "non-signaling");

  // exact conversion of m to l
  LabeledOperator tm = partial_transpose(m.op, SubsystemSet{0, 1});
  tm = permute_subsystems(tm, {1, 0});  // (B, A) to match theta factor order
  prob.add_eq(contracted(tm, SubsystemSet{1, 2}, prob.var(theta)) - constant_expr(l.op),
              "exact conversion");

  LabeledOperator tn = partial_transpose(n.op, SubsystemSet{0, 1});
  tn = permute_subsystems(tn, {1, 0});
  auto fb = sdp::add_fidelity_block(
      prob, k.op, contracted(tn, SubsystemSet{1, 2}, prob.var(theta)), "fidelity", real);
  prob.add_psd(real_part(traced_over(fb.q, SubsystemSet{1})) -
                   prob.scaled_seed(lam, identity_op({dc})),
               "lambda I <= Re Tr_D Q");
  prob.set_objective(true, prob.scaled_seed(lam, identity_op({1})));

  sdp::ConicSolution sol = prob.solve(opts);
  ErrorReport rep;
  double lambda = sol.primal_value;
  rep.value = 1.0 - lambda * lambda;
  rep.method = Method::SdpPrimal;
  rep.gap = sol.gap;
  rep.status = sol.status;
  rep.iterations = sol.iterations;
  rep.target = "channel-box";
  rep.certificate.emplace("Theta", sol.blocks.at("Theta"));
  return rep;
}

}  // namespace bqt
