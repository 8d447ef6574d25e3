#pragma once

// Analyses of the two trigger-qubit bidirectional-teleportation protocols
// built from a single shared Bell pair, and the provably optimal single-edit
// scheme they are compared against.

#include "bqt/simerr.hpp"

namespace bqt {

struct Kpf16Params {
  double p1 = 0.0;  // sin^2(theta_1 / 2)
  double p2 = 0.0;

  void validate() const {
    if (!(p1 >= 0.0 && p1 <= 1.0) || !(p2 >= 0.0 && p2 <= 1.0))
      throw std::invalid_argument("Kpf16Params: p1, p2 must lie in [0,1]");
  }
};

namespace detail {

// The four channel branches as operators on registers (Q_A, C_A, C_B, Q_B).
inline LabeledOperator kpf16_term(int which) {
  LabeledOperator i2 = identity_op({2});
  LabeledOperator phi = max_entangled(2);
  LabeledOperator gamma = max_entangled(2, false);
  LabeledOperator pi = max_mixed(2);
  switch (which) {
    case 0:  // both triggers idle: constant Bell output
      return kron(kron(i2, phi), i2);
    case 1:  // Bob teleports: Gamma couples (C_A, Q_B)
      return permute_subsystems(kron(i2, kron(gamma, pi)), {0, 1, 3, 2});
    case 2:  // Alice teleports: Gamma couples (Q_A, C_B)
      return permute_subsystems(kron(kron(gamma, pi), i2), {0, 2, 1, 3});
    default:  // both teleport: jammed, maximally mixed output
      return kron(kron(i2, kron(pi, pi)), i2);
  }
}

inline LabeledOperator kpf16_operator_paper_order(const Kpf16Params& p) {
  p.validate();
  LabeledOperator out = ((1 - p.p1) * (1 - p.p2)) * kpf16_term(0) +
                        ((1 - p.p1) * p.p2) * kpf16_term(1) +
                        (p.p1 * (1 - p.p2)) * kpf16_term(2) + (p.p1 * p.p2) * kpf16_term(3);
  return out;
}

// Projector onto Phi_{Q_A C_B} (x) Phi_{C_A Q_B} on registers (Q_A,C_A,C_B,Q_B).
inline LabeledOperator swap_target_state_paper_order() {
  LabeledOperator phi = max_entangled(2);
  // built on (Q_A, C_B, C_A, Q_B), then reordered
  return permute_subsystems(kron(phi, phi), {0, 2, 1, 3});
}

}  // namespace detail

/// Choi operator of the first protocol on layout [Q_A, Q_B | C_A, C_B].
inline ChoiOperator kpf16_choi(const Kpf16Params& p) {
  LabeledOperator op = detail::kpf16_operator_paper_order(p);
  op = permute_subsystems(op, {0, 3, 1, 2});
  ChoiOperator choi{std::move(op), {2, 2}, {2, 2}};
  ValidationReport rep = validate(choi);
  if (!rep.cp || !rep.tp) throw std::logic_error("kpf16_choi: constructed operator not CP+TP");
  return choi;
}

/// Fidelity of the protocol's Choi state to the ideal bidirectional
/// teleportation output on maximally entangled inputs; the closed form is
/// cross-checked against the numeric overlap.
inline double kpf16_fidelity(const Kpf16Params& p) {
  p.validate();
  double formula = (1.0 + 3.0 * (p.p1 + p.p2) - 6.0 * p.p1 * p.p2) / 16.0;
  LabeledOperator state = detail::kpf16_operator_paper_order(p);
  state.data /= 4.0;  // Choi state of the channel
  double numeric =
      (detail::swap_target_state_paper_order().data.adjoint() * state.data).trace().real();
  if (std::abs(formula - numeric) > 1e-12)
    throw std::logic_error("kpf16_fidelity: closed form and overlap disagree");
  return formula;
}

/// Diamond-distance simulation error of the first protocol against the swap.
inline double kpf16_error(const Kpf16Params& p, const sdp::SolverOptions& opts = detail::tight_opts()) {
  return diamond_distance(kpf16_choi(p), swap_channel_choi(2), opts);
}

/// Second protocol: a classical bit chooses who teleports. Returns the
/// channel fidelity to the swap and the diamond-distance error; both are
/// constant in p (1/4 and 3/4).
inline std::pair<double, double> kpf16_second_error(double p,
                                                    const sdp::SolverOptions& opts = detail::tight_opts()) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("kpf16_second_error: p must lie in [0,1]");
  LabeledOperator op = p * detail::kpf16_term(1) + (1.0 - p) * detail::kpf16_term(2);
  op = permute_subsystems(op, {0, 3, 1, 2});
  ChoiOperator choi{std::move(op), {2, 2}, {2, 2}};
  ChoiOperator target = swap_channel_choi(2);
  double fid = channel_fidelity(choi, target, opts);
  double dd = diamond_distance(choi, target, opts);
  return {fid, dd};
}

/// Embed a bipartite operator into larger local spaces (basis-prefix
/// isometries on both sides).
inline LabeledOperator embed_bipartite(const LabeledOperator& x, int new_da, int new_db) {
  if (x.num_factors() != 2) throw std::invalid_argument("embed_bipartite: need two factors");
  const int da = x.dims[0], db = x.dims[1];
  if (new_da < da || new_db < db) throw std::invalid_argument("embed_bipartite: shrinking");
  Matrix out = Matrix::Zero(static_cast<long>(new_da) * new_db, static_cast<long>(new_da) * new_db);
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < db; ++j)
      for (int k = 0; k < da; ++k)
        for (int l = 0; l < db; ++l)
          out(static_cast<long>(i) * new_db + j, static_cast<long>(k) * new_db + l) =
              x.data(i * db + j, k * db + l);
  return {std::move(out), {new_da, new_db}};
}

/// Error of the optimal single-edit scheme: twirl the embedded maximally
/// entangled resource and run teleportation in both directions. Equals
/// 1 - 1/d, the isotropic value at (F = 1, dA = d).
inline double single_ebit_scheme_error(int d) {
  if (d < 2) throw std::invalid_argument("single_ebit_scheme_error: d must be >= 2");
  if (d > 3) throw std::invalid_argument("single_ebit_scheme_error: d > 3 exceeds desk scale");
  const int d2 = d * d;
  LabeledOperator omega = isotropic_twirl(embed_bipartite(max_entangled(d), d2, d2));
  double value = 0.5 * trace_norm(max_entangled(d2) - omega);
  double expect = 1.0 - 1.0 / d;
  if (std::abs(value - expect) > 1e-10 ||
      std::abs(value - isotropic_error(1.0, d, d)) > 1e-10)
    throw std::logic_error("single_ebit_scheme_error: data-processing chain mismatch");
  return value;
}

}  // namespace bqt
