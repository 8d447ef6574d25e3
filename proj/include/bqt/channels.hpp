#pragma once

// Choi-operator calculus: representation, validation, application, serial
// composition, and the fixed channels analyzed elsewhere in the library.
//
// Convention: the Choi operator of N with input factors C and output factors
// D is Gamma^N = N(Gamma_{RC}) stored on factor order [C..., D...] (the
// reference copy of the input first). CP holds iff the operator is PSD and
// TP iff its partial trace over the outputs is the identity.

#include "bqt/qmat.hpp"
#include "bqt/states.hpp"

namespace bqt {

struct ChoiOperator {
  LabeledOperator op;  // factors = input_dims ++ output_dims
  std::vector<int> input_dims;
  std::vector<int> output_dims;

  ChoiOperator() = default;
  ChoiOperator(LabeledOperator o, std::vector<int> in, std::vector<int> out)
      : op(std::move(o)), input_dims(std::move(in)), output_dims(std::move(out)) {
    std::vector<int> expect = input_dims;
    expect.insert(expect.end(), output_dims.begin(), output_dims.end());
    if (expect != op.dims)
      throw std::invalid_argument("ChoiOperator: factor list must be inputs then outputs");
  }

  long input_dim() const {
    long d = 1;
    for (int x : input_dims) d *= x;
    return d;
  }
  long output_dim() const {
    long d = 1;
    for (int x : output_dims) d *= x;
    return d;
  }
  SubsystemSet output_set() const {
    std::vector<int> idx;
    for (std::size_t i = input_dims.size(); i < op.dims.size(); ++i)
      idx.push_back(static_cast<int>(i));
    return SubsystemSet{idx};
  }
};

namespace detail {

// Z[(p q),(p' q')] = sum_{c c'} X[(p c),(p' c')] Y[(c q),(c' q')], realized
// as one matrix product after reshuffling; contracted factors must trail in
// X and lead in Y.
inline Matrix link_contract(const Matrix& x, long dp, long dc, const Matrix& y, long dq) {
  Matrix xm(dp * dp, dc * dc), ym(dc * dc, dq * dq);
  for (long p = 0; p < dp; ++p)
    for (long c = 0; c < dc; ++c)
      for (long pp = 0; pp < dp; ++pp)
        for (long cc = 0; cc < dc; ++cc)
          xm(p * dp + pp, c * dc + cc) = x(p * dc + c, pp * dc + cc);
  for (long c = 0; c < dc; ++c)
    for (long q = 0; q < dq; ++q)
      for (long cc = 0; cc < dc; ++cc)
        for (long qq = 0; qq < dq; ++qq)
          ym(c * dc + cc, q * dq + qq) = y(c * dq + q, cc * dq + qq);
  Matrix zm = xm * ym;
  Matrix z(dp * dq, dp * dq);
  for (long p = 0; p < dp; ++p)
    for (long q = 0; q < dq; ++q)
      for (long pp = 0; pp < dp; ++pp)
        for (long qq = 0; qq < dq; ++qq)
          z(p * dq + q, pp * dq + qq) = zm(p * dp + pp, q * dq + qq);
  return z;
}

inline std::vector<int> squeeze_dims(const std::vector<int>& dims) {
  std::vector<int> out;
  for (int d : dims)
    if (d > 1) out.push_back(d);
  if (out.empty()) out.push_back(1);
  return out;
}

}  // namespace detail

/// Identity channel on the given factor dims.
inline ChoiOperator identity_choi(const std::vector<int>& dims) {
  long d = 1;
  for (int x : dims) d *= x;
  LabeledOperator g = max_entangled(static_cast<int>(d), /*normalized=*/false);
  std::vector<int> fac = dims;
  fac.insert(fac.end(), dims.begin(), dims.end());
  g.dims = fac;
  return {std::move(g), dims, dims};
}

/// Choi operator from a Kraus decomposition.
inline ChoiOperator choi_from_kraus(const std::vector<Matrix>& kraus, std::vector<int> in_dims,
                                    std::vector<int> out_dims) {
  long din = 1, dout = 1;
  for (int x : in_dims) din *= x;
  for (int x : out_dims) dout *= x;
  Matrix g = Matrix::Zero(din * dout, din * dout);
  for (const Matrix& k : kraus) {
    if (k.rows() != dout || k.cols() != din)
      throw std::invalid_argument("choi_from_kraus: Kraus operator has wrong shape");
    Eigen::VectorXcd v(din * dout);
    for (long r = 0; r < din; ++r)
      for (long o = 0; o < dout; ++o) v(r * dout + o) = k(o, r);
    g += v * v.adjoint();
  }
  std::vector<int> fac = in_dims;
  fac.insert(fac.end(), out_dims.begin(), out_dims.end());
  return {LabeledOperator{std::move(g), fac}, std::move(in_dims), std::move(out_dims)};
}

/// Apply a channel, given by its Choi operator, to the trailing factors of a
/// state; leading factors are spectators.
inline LabeledOperator apply(const ChoiOperator& choi, const LabeledOperator& state) {
  const std::size_t nin = choi.input_dims.size();
  if (state.num_factors() < nin)
    throw std::invalid_argument("apply: state has fewer factors than the channel input");
  const std::size_t nspec = state.num_factors() - nin;
  for (std::size_t i = 0; i < nin; ++i)
    if (state.dims[nspec + i] != choi.input_dims[i])
      throw std::invalid_argument("apply: trailing state factors do not match channel input");
  long dspec = 1;
  for (std::size_t i = 0; i < nspec; ++i) dspec *= state.dims[i];
  Matrix z = detail::link_contract(state.data, dspec, choi.input_dim(), choi.op.data,
                                   choi.output_dim());
  std::vector<int> dims(state.dims.begin(), state.dims.begin() + nspec);
  dims.insert(dims.end(), choi.output_dims.begin(), choi.output_dims.end());
  return {std::move(z), dims};
}

/// Choi operator of second o first (first runs first).
inline ChoiOperator compose(const ChoiOperator& first, const ChoiOperator& second) {
  if (first.output_dim() != second.input_dim())
    throw std::invalid_argument("compose: inner dimensions do not match");
  Matrix z = detail::link_contract(first.op.data, first.input_dim(), first.output_dim(),
                                   second.op.data, second.output_dim());
  std::vector<int> fac = first.input_dims;
  fac.insert(fac.end(), second.output_dims.begin(), second.output_dims.end());
  return {LabeledOperator{std::move(z), fac}, first.input_dims, second.output_dims};
}

/// Choi operator of a (x) b acting in parallel; trivial factors are dropped.
inline ChoiOperator choi_kron(const ChoiOperator& a, const ChoiOperator& b) {
  LabeledOperator big = kron(a.op, b.op);
  // current factor order: [inA, outA, inB, outB] -> [inA, inB, outA, outB]
  std::vector<int> perm;
  const int na_in = static_cast<int>(a.input_dims.size());
  const int na_out = static_cast<int>(a.output_dims.size());
  const int nb_in = static_cast<int>(b.input_dims.size());
  const int nb_out = static_cast<int>(b.output_dims.size());
  for (int i = 0; i < na_in; ++i) perm.push_back(i);
  for (int i = 0; i < nb_in; ++i) perm.push_back(na_in + na_out + i);
  for (int i = 0; i < na_out; ++i) perm.push_back(na_in + i);
  for (int i = 0; i < nb_out; ++i) perm.push_back(na_in + na_out + nb_in + i);
  big = permute_subsystems(big, perm);

  std::vector<int> in = a.input_dims, out = a.output_dims;
  in.insert(in.end(), b.input_dims.begin(), b.input_dims.end());
  out.insert(out.end(), b.output_dims.begin(), b.output_dims.end());
  in = detail::squeeze_dims(in);
  out = detail::squeeze_dims(out);
  std::vector<int> fac = in;
  fac.insert(fac.end(), out.begin(), out.end());
  big.dims = fac;
  return {std::move(big), in, out};
}

/// Choi operator of the unitary swap channel on two d-dimensional systems,
/// Gamma_{AB'} (x) Gamma_{BA'} arranged on factor order [A, B, A', B'].
inline ChoiOperator swap_channel_choi(int d) {
  if (d < 2) throw std::invalid_argument("swap_channel_choi: d must be >= 2");
  LabeledOperator g = max_entangled(d, false);
  LabeledOperator x = kron(g, g);                       // (A, B', B, A')
  x = permute_subsystems(x, {0, 2, 3, 1});              // (A, B, A', B')
  return {std::move(x), {d, d}, {d, d}};
}

/// Choi operator (d I - Gamma)/(d^2 - 1) of the uniform nontrivial Weyl mix.
inline ChoiOperator gen_pauli_channel_choi(int d) {
  if (d < 2) throw std::invalid_argument("gen_pauli_channel_choi: d must be >= 2");
  LabeledOperator g = max_entangled(d, false);
  LabeledOperator x = (1.0 / (d * d - 1.0)) * (static_cast<double>(d) * identity_op({d, d}) - g);
  return {std::move(x), {d}, {d}};
}

/// Choi operator of the channel that traces its input and outputs the
/// maximally mixed state.
inline ChoiOperator replace_with_mixed_choi(int d) {
  LabeledOperator x = kron(identity_op({d}), max_mixed(d));
  return {std::move(x), {d}, {d}};
}

namespace detail {

/// Bell-measurement instrument on (A, Ahat) -> (A, Ahat, C_A); the classical
/// register C_A stores the outcome (z, x) as a d^2-dimensional basis state.
inline ChoiOperator bell_instrument_choi(int d) {
  LabeledOperator phi = max_entangled(d);
  std::vector<Matrix> kraus;
  for (int z = 0; z < d; ++z)
    for (int x = 0; x < d; ++x) {
      LabeledOperator w = weyl_operator(z, x, d);
      Matrix proj = kron(LabeledOperator{w.data, {d}}, identity_op({d})).data * phi.data *
                    kron(LabeledOperator{w.data, {d}}, identity_op({d})).data.adjoint();
      Eigen::VectorXcd e = Eigen::VectorXcd::Zero(d * d);
      e(z * d + x) = 1.0;
      Matrix k(d * d * d * d, d * d);  // (A Ahat C_A) x (A Ahat)
      k.setZero();
      for (long r = 0; r < d * d; ++r)
        for (long c = 0; c < d * d; ++c) k(r * d * d + (z * d + x), c) = proj(r, c);
      kraus.push_back(std::move(k));
    }
  return choi_from_kraus(kraus, {d, d}, {d, d, d * d});
}

/// Classical d^2-dimensional channel copying C_A to C_B.
inline ChoiOperator classical_channel_choi(int d2) {
  std::vector<Matrix> kraus;
  for (int i = 0; i < d2; ++i) {
    Matrix k = Matrix::Zero(d2, d2);
    k(i, i) = 1.0;
    kraus.push_back(std::move(k));
  }
  return choi_from_kraus(kraus, {d2}, {d2});
}

/// Correction on (C_B, B) -> B: reads (z, x) from C_B and applies W^{z,x}.
inline ChoiOperator correction_choi(int d) {
  std::vector<Matrix> kraus;
  for (int z = 0; z < d; ++z)
    for (int x = 0; x < d; ++x) {
      LabeledOperator w = weyl_operator(z, x, d);
      Matrix k = Matrix::Zero(d, d * d * d);  // B x (C_B B)
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) k(r, (z * d + x) * d + c) = w.data(r, c);
      kraus.push_back(std::move(k));
    }
  return choi_from_kraus(kraus, {d * d, d}, {d});
}

inline ChoiOperator trace_channel_choi(const std::vector<int>& dims) {
  long din = 1;
  for (int x : dims) din *= x;
  std::vector<Matrix> kraus;
  for (long i = 0; i < din; ++i) {
    Matrix k = Matrix::Zero(1, din);
    k(0, i) = 1.0;
    kraus.push_back(std::move(k));
  }
  return choi_from_kraus(kraus, dims, {1});
}

}  // namespace detail

/// Choi operator of the full one-directional teleportation pipeline
/// (append the entangled resource, Bell-measure, communicate, correct).
/// Equals the identity Choi operator.
///
/// With `with_correction == false` the final correction is skipped and the
/// classical register discarded, leaving the uniformly Weyl-twirled channel.
inline ChoiOperator teleportation_choi(int d, bool with_correction = true) {
  if (d < 2) throw std::invalid_argument("teleportation_choi: d must be >= 2");
  const int d2 = d * d;

  // A -> (A, Ahat, B): append the maximally entangled resource.
  LabeledOperator phi = max_entangled(d);
  Eigen::VectorXcd phivec(d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) phivec(i * d + j) = (i == j) ? 1.0 / std::sqrt(double(d)) : 0.0;
  Matrix append(d * d * d, d);
  append.setZero();
  for (int a = 0; a < d; ++a)
    for (long r = 0; r < d * d; ++r) append(a * d * d + r, a) = phivec(r);
  ChoiOperator prep = choi_from_kraus({append}, {d}, {d, d, d});

  ChoiOperator stage2 = choi_kron(detail::bell_instrument_choi(d), identity_choi({d}));
  ChoiOperator stage3 =
      choi_kron(detail::trace_channel_choi({d, d}), identity_choi({d2, d}));
  ChoiOperator stage4 = choi_kron(detail::classical_channel_choi(d2), identity_choi({d}));

  ChoiOperator pipe = compose(compose(compose(prep, stage2), stage3), stage4);
  if (with_correction) return compose(pipe, detail::correction_choi(d));
  ChoiOperator discard = choi_kron(detail::trace_channel_choi({d2}), identity_choi({d}));
  return compose(pipe, discard);
}

struct ValidationReport {
  bool cp = false;
  bool tp = false;
  double min_eig = 0.0;       // smallest eigenvalue of the Choi operator
  double tp_deviation = 0.0;  // max |Tr_out[Choi] - I|
  std::vector<std::pair<SubsystemSet, bool>> ppt;  // requested cuts
  bool all_ppt() const {
    for (const auto& [set, ok] : ppt)
      if (!ok) return false;
    return true;
  }
};

/// Check CP, TP, and PPT of the Choi operator across the requested cuts
/// (each cut is a set of factor indices whose joint transpose must preserve
/// positivity).
inline ValidationReport validate(const ChoiOperator& choi,
                                 const std::vector<SubsystemSet>& ppt_cuts = {},
                                 double tol = kPsdTol) {
  ValidationReport rep;
  rep.min_eig = min_eigenvalue(choi.op);
  rep.cp = rep.min_eig >= -tol;
  LabeledOperator marg = partial_trace(choi.op, choi.output_set());
  rep.tp_deviation =
      (marg.data - Matrix::Identity(marg.dim(), marg.dim())).cwiseAbs().maxCoeff();
  rep.tp = rep.tp_deviation <= 1e-8;
  for (const auto& cut : ppt_cuts) {
    cut.check_against(choi.op.num_factors());
    LabeledOperator t = partial_transpose(choi.op, cut);
    rep.ppt.emplace_back(cut, min_eigenvalue(t) >= -tol);
  }
  return rep;
}

}  // namespace bqt
