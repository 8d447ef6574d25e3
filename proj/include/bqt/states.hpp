#pragma once

// Constructors for the fixed states and operators used throughout the
// library, the two bilateral twirl channels, and the resource-state family
// accepted by the simulation-error solvers.

#include "bqt/qmat.hpp"

#include <cmath>
#include <variant>

namespace bqt {

/// Unnormalized maximally entangled operator Gamma (normalized: Phi = Gamma/d).
inline LabeledOperator max_entangled(int d, bool normalized = true) {
  if (d < 1) throw std::invalid_argument("max_entangled: d must be >= 1");
  Matrix m = Matrix::Zero(static_cast<long>(d) * d, static_cast<long>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i * d + i, j * d + j) = 1.0;
  if (normalized) m /= static_cast<double>(d);
  return {std::move(m), {d, d}};
}

inline LabeledOperator max_mixed(int d) {
  return {Matrix::Identity(d, d) / static_cast<double>(d), {d}};
}

/// Unitary swap (flip) operator F on two d-dimensional factors.
inline LabeledOperator swap_operator(int d) {
  if (d < 1) throw std::invalid_argument("swap_operator: d must be >= 1");
  Matrix m = Matrix::Zero(static_cast<long>(d) * d, static_cast<long>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i * d + j, j * d + i) = 1.0;
  return {std::move(m), {d, d}};
}

/// Projectors onto the symmetric and antisymmetric subspaces of C^d (x) C^d.
inline std::pair<LabeledOperator, LabeledOperator> sym_antisym_projectors(int d) {
  LabeledOperator f = swap_operator(d);
  LabeledOperator id = identity_op({d, d});
  LabeledOperator sym = 0.5 * (id + f);
  LabeledOperator anti = 0.5 * (id - f);
  return {sym, anti};
}

/// Discrete Weyl operator W^{z,x} = Z(z) X(x).
inline LabeledOperator weyl_operator(int z, int x, int d) {
  if (d < 1) throw std::invalid_argument("weyl_operator: d must be >= 1");
  if (z < 0 || z >= d || x < 0 || x >= d)
    throw std::invalid_argument("weyl_operator: z, x must lie in [0, d)");
  Matrix m = Matrix::Zero(d, d);
  const double two_pi = 2.0 * M_PI;
  for (int k = 0; k < d; ++k) {
    int kx = (k + x) % d;
    m(kx, k) = std::polar(1.0, two_pi * kx * z / d);
  }
  return {std::move(m), {d}};
}

/// U (x) conj(U) twirl, evaluated by its closed-form projection onto
/// span{Phi, I - Phi}.
inline LabeledOperator isotropic_twirl(const LabeledOperator& x) {
  if (x.num_factors() != 2 || x.dims[0] != x.dims[1])
    throw std::invalid_argument("isotropic_twirl: need a bipartite operator with equal factor dims");
  const int d = x.dims[0];
  LabeledOperator phi = max_entangled(d);
  LabeledOperator rest = identity_op({d, d}) - phi;
  cxd wp = (phi.data.adjoint() * x.data).trace();
  cxd wr = (rest.data.adjoint() * x.data).trace();
  return wp * phi + (wr / static_cast<double>(d * d - 1)) * rest;
}

/// U (x) U twirl, evaluated by its closed-form projection onto the
/// symmetric/antisymmetric projectors.
inline LabeledOperator werner_twirl(const LabeledOperator& x) {
  if (x.num_factors() != 2 || x.dims[0] != x.dims[1])
    throw std::invalid_argument("werner_twirl: need a bipartite operator with equal factor dims");
  const int d = x.dims[0];
  auto [sym, anti] = sym_antisym_projectors(d);
  cxd ws = (sym.data.adjoint() * x.data).trace();
  cxd wa = (anti.data.adjoint() * x.data).trace();
  double ns = d * (d + 1.0) / 2.0, na = d * (d - 1.0) / 2.0;
  return (ws / ns) * sym + (wa / na) * anti;
}

/// Generalized amplitude damping channel acting on a qubit state.
inline LabeledOperator gadc_apply(double gamma, double noise, const LabeledOperator& rho) {
  if (rho.dim() != 2) throw std::invalid_argument("gadc_apply: qubit input required");
  if (gamma < 0 || gamma > 1 || noise < 0 || noise > 1)
    throw std::invalid_argument("gadc_apply: gamma, N must lie in [0,1]");
  Matrix a1(2, 2), a2(2, 2), a3(2, 2), a4(2, 2);
  a1 << std::sqrt(1 - noise), 0, 0, std::sqrt(1 - noise) * std::sqrt(1 - gamma);
  a2 << 0, std::sqrt(gamma * (1 - noise)), 0, 0;
  a3 << std::sqrt(noise) * std::sqrt(1 - gamma), 0, 0, std::sqrt(noise);
  a4 << 0, 0, std::sqrt(gamma * noise), 0;
  Matrix out = Matrix::Zero(2, 2);
  for (const Matrix* k : {&a1, &a2, &a3, &a4}) out += (*k) * rho.data * k->adjoint();
  return {std::move(out), rho.dims};
}

namespace detail {

/// GADC applied to one factor of a multi-qubit operator.
inline LabeledOperator gadc_apply_factor(double gamma, double noise, const LabeledOperator& x,
                                         int factor) {
  Matrix a1(2, 2), a2(2, 2), a3(2, 2), a4(2, 2);
  a1 << std::sqrt(1 - noise), 0, 0, std::sqrt(1 - noise) * std::sqrt(1 - gamma);
  a2 << 0, std::sqrt(gamma * (1 - noise)), 0, 0;
  a3 << std::sqrt(noise) * std::sqrt(1 - gamma), 0, 0, std::sqrt(noise);
  a4 << 0, 0, std::sqrt(gamma * noise), 0;
  Matrix out = Matrix::Zero(x.dim(), x.dim());
  for (const Matrix* k : {&a1, &a2, &a3, &a4}) {
    LabeledOperator big = identity_op({1});
    for (std::size_t i = 0; i < x.dims.size(); ++i) {
      LabeledOperator fac = (static_cast<int>(i) == factor)
                                ? LabeledOperator{*k, {2}}
                                : identity_op({x.dims[i]});
      big = (i == 0) ? fac : kron(big, fac);
    }
    out += big.data * x.data * big.data.adjoint();
  }
  return {std::move(out), x.dims};
}

}  // namespace detail

struct IsotropicParams {
  double fidelity = 1.0;
  int dA = 2;
};
struct WernerParams {
  double p = 0.0;
  int dA = 2;
};
struct GadcBellParams {
  double gamma = 0.0;
  double noise = 0.0;
};

/// Resource state shared between Alice and Bob: nothing at all, one of the
/// twirl-invariant one-parameter families, the GADC-damped double Bell
/// state, or an arbitrary bipartite density operator.
struct ResourceState {
  struct None {};
  using Custom = LabeledOperator;  // dims [dA, dB]
  std::variant<None, IsotropicParams, WernerParams, GadcBellParams, Custom> value;

  ResourceState() : value(None{}) {}

  static ResourceState none() { return ResourceState{}; }
  static ResourceState isotropic(double fidelity, int dA) {
    if (!(fidelity >= 0.0 && fidelity <= 1.0) || dA < 2)
      throw std::invalid_argument("isotropic resource: need F in [0,1], dA >= 2");
    ResourceState r;
    r.value = IsotropicParams{fidelity, dA};
    return r;
  }
  static ResourceState werner(double p, int dA) {
    if (!(p >= 0.0 && p <= 1.0) || dA < 2)
      throw std::invalid_argument("werner resource: need p in [0,1], dA >= 2");
    ResourceState r;
    r.value = WernerParams{p, dA};
    return r;
  }
  static ResourceState gadc_bell(double gamma, double noise) {
    if (!(gamma >= 0.0 && gamma <= 1.0) || !(noise >= 0.0 && noise <= 1.0))
      throw std::invalid_argument("gadc resource: need gamma, N in [0,1]");
    ResourceState r;
    r.value = GadcBellParams{gamma, noise};
    return r;
  }
  static ResourceState custom(LabeledOperator rho) {
    if (rho.num_factors() != 2)
      throw std::invalid_argument("custom resource: dims must be [dA, dB]");
    if (!rho.is_hermitian(1e-8)) throw std::invalid_argument("custom resource: not Hermitian");
    if (min_eigenvalue(rho) < -kPsdTol)
      throw std::invalid_argument("custom resource: not positive semi-definite");
    if (std::abs(rho.trace().real() - 1.0) > 1e-8 || std::abs(rho.trace().imag()) > 1e-10)
      throw std::invalid_argument("custom resource: trace must equal 1");
    ResourceState r;
    r.value = std::move(rho);
    return r;
  }

  bool is_none() const { return std::holds_alternative<None>(value); }

  /// Dense density operator with dims [dA, dB]; None materializes as the
  /// scalar 1 on dims [1, 1].
  LabeledOperator materialize() const;

  std::string describe() const;
};

inline LabeledOperator isotropic_state(double fidelity, int dA) {
  LabeledOperator phi = max_entangled(dA);
  LabeledOperator rest = identity_op({dA, dA}) - phi;
  LabeledOperator out = fidelity * phi + ((1.0 - fidelity) / (dA * dA - 1.0)) * rest;
  out.data = 0.5 * (out.data + out.data.adjoint()).eval();
  return out;
}

inline LabeledOperator werner_state(double p, int dA) {
  auto [sym, anti] = sym_antisym_projectors(dA);
  double ns = dA * (dA + 1.0) / 2.0, na = dA * (dA - 1.0) / 2.0;
  LabeledOperator out = ((1.0 - p) / ns) * sym + (p / na) * anti;
  out.data = 0.5 * (out.data + out.data.adjoint()).eval();
  return out;
}

/// A_{gamma,N}^{(x)4}(Phi^{(x)2}) regrouped from qubit order (A1,B1,A2,B2) to
/// the bipartite cut (A1 A2 | B1 B2) with dims [4, 4].
inline LabeledOperator gadc_bell_state(double gamma, double noise) {
  LabeledOperator phi2 = max_entangled(2);
  LabeledOperator state = kron(phi2, phi2);  // factors (A1, B1, A2, B2)
  for (int q = 0; q < 4; ++q) state = detail::gadc_apply_factor(gamma, noise, state, q);
  state = permute_subsystems(state, {0, 2, 1, 3});  // (A1, A2, B1, B2)
  state.dims = {4, 4};
  state.data = 0.5 * (state.data + state.data.adjoint()).eval();
  return state;
}

inline ResourceState gadc_resource_state(double gamma, double noise) {
  return ResourceState::gadc_bell(gamma, noise);
}

inline LabeledOperator ResourceState::materialize() const {
  if (std::holds_alternative<None>(value)) return {Matrix::Ones(1, 1), {1, 1}};
  if (auto* iso = std::get_if<IsotropicParams>(&value))
    return isotropic_state(iso->fidelity, iso->dA);
  if (auto* w = std::get_if<WernerParams>(&value)) return werner_state(w->p, w->dA);
  if (auto* g = std::get_if<GadcBellParams>(&value)) return gadc_bell_state(g->gamma, g->noise);
  return std::get<Custom>(value);
}

inline std::string ResourceState::describe() const {
  if (std::holds_alternative<None>(value)) return "none";
  if (auto* iso = std::get_if<IsotropicParams>(&value))
    return "isotropic(F=" + std::to_string(iso->fidelity) + ",dA=" + std::to_string(iso->dA) + ")";
  if (auto* w = std::get_if<WernerParams>(&value))
    return "werner(p=" + std::to_string(w->p) + ",dA=" + std::to_string(w->dA) + ")";
  if (auto* g = std::get_if<GadcBellParams>(&value))
    return "gadc(gamma=" + std::to_string(g->gamma) + ",N=" + std::to_string(g->noise) + ")";
  const auto& c = std::get<Custom>(value);
  return "custom(" + std::to_string(c.dims[0]) + "x" + std::to_string(c.dims[1]) + ")";
}

}  // namespace bqt
