#pragma once

// Dense complex linear algebra over labeled tensor-product spaces.
//
// Index convention used everywhere in this library: an operator on factors
// with dims [d0, d1, ..., dk-1] is stored as a D x D row-major-indexed matrix
// with D = d0*d1*...*dk-1, and subsystem 0 is the most significant digit of
// a flat index, i.e. |i0 i1 ... ik-1>  <->  ((i0*d1 + i1)*d2 + i2)*...

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace bqt {

using cxd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kHermTol = 1e-10;
inline constexpr double kPsdTol = 1e-8;

/// Sorted, unique positions into a LabeledOperator's factor list.
struct SubsystemSet {
  std::vector<int> indices;

  SubsystemSet() = default;
  SubsystemSet(std::initializer_list<int> il) : indices(il) { normalize(); }
  explicit SubsystemSet(std::vector<int> v) : indices(std::move(v)) { normalize(); }

  void normalize() {
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  }
  bool contains(int i) const {
    return std::binary_search(indices.begin(), indices.end(), i);
  }
  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }

  void check_against(std::size_t num_factors) const {
    for (int i : indices)
      if (i < 0 || static_cast<std::size_t>(i) >= num_factors)
        throw std::invalid_argument("subsystem index " + std::to_string(i) +
                                    " out of range for " + std::to_string(num_factors) +
                                    " factors");
  }
};

/// A dense complex square matrix together with the ordered list of the
/// subsystem dimensions its row/column indices factorize over.
struct LabeledOperator {
  Matrix data;
  std::vector<int> dims;

  LabeledOperator() = default;
  LabeledOperator(Matrix m, std::vector<int> d) : data(std::move(m)), dims(std::move(d)) {
    long prod = 1;
    for (int di : dims) {
      if (di < 1) throw std::invalid_argument("subsystem dimension must be >= 1");
      prod *= di;
    }
    if (data.rows() != data.cols() || data.rows() != prod)
      throw std::invalid_argument("matrix dimension does not match product of factor dims");
  }

  long dim() const { return data.rows(); }
  std::size_t num_factors() const { return dims.size(); }
  cxd trace() const { return data.trace(); }

  LabeledOperator adjoint() const { return {data.adjoint(), dims}; }

  bool is_hermitian(double tol = kHermTol) const {
    return (data - data.adjoint()).cwiseAbs().maxCoeff() <= tol;
  }
  bool is_psd(double tol = kPsdTol) const;

  LabeledOperator& operator+=(const LabeledOperator& o) {
    data += o.data;
    return *this;
  }
};

inline LabeledOperator operator+(LabeledOperator a, const LabeledOperator& b) {
  a.data += b.data;
  return a;
}
inline LabeledOperator operator-(LabeledOperator a, const LabeledOperator& b) {
  a.data -= b.data;
  return a;
}
inline LabeledOperator operator*(cxd s, LabeledOperator a) {
  a.data *= s;
  return a;
}
inline LabeledOperator operator*(const LabeledOperator& a, const LabeledOperator& b) {
  return {a.data * b.data, a.dims};
}

inline LabeledOperator identity_op(std::vector<int> dims) {
  long d = 1;
  for (int di : dims) d *= di;
  return {Matrix::Identity(d, d), std::move(dims)};
}

namespace detail {

inline void to_digits(long flat, const std::vector<int>& dims, std::vector<int>& out) {
  out.resize(dims.size());
  for (std::size_t i = dims.size(); i-- > 0;) {
    out[i] = static_cast<int>(flat % dims[i]);
    flat /= dims[i];
  }
}

inline long from_digits(const std::vector<int>& digits, const std::vector<int>& dims) {
  long flat = 0;
  for (std::size_t i = 0; i < dims.size(); ++i) flat = flat * dims[i] + digits[i];
  return flat;
}

}  // namespace detail

/// Kronecker product; dims concatenate.
inline LabeledOperator kron(const LabeledOperator& a, const LabeledOperator& b) {
  const long da = a.dim(), db = b.dim();
  Matrix out(da * db, da * db);
  for (long i = 0; i < da; ++i)
    for (long j = 0; j < da; ++j)
      out.block(i * db, j * db, db, db) = a.data(i, j) * b.data;
  std::vector<int> dims = a.dims;
  dims.insert(dims.end(), b.dims.begin(), b.dims.end());
  return {std::move(out), std::move(dims)};
}

/// Trace out the factors in `over`; the remaining factors keep their order.
inline LabeledOperator partial_trace(const LabeledOperator& x, const SubsystemSet& over) {
  over.check_against(x.num_factors());
  if (over.empty()) return x;

  std::vector<int> kept_dims, traced_dims;
  std::vector<int> kept_pos, traced_pos;
  for (std::size_t i = 0; i < x.dims.size(); ++i) {
    if (over.contains(static_cast<int>(i))) {
      traced_dims.push_back(x.dims[i]);
      traced_pos.push_back(static_cast<int>(i));
    } else {
      kept_dims.push_back(x.dims[i]);
      kept_pos.push_back(static_cast<int>(i));
    }
  }
  long dk = 1, dt = 1;
  for (int d : kept_dims) dk *= d;
  for (int d : traced_dims) dt *= d;

  Matrix out = Matrix::Zero(dk, dk);
  std::vector<int> gr, gc, t, full_r(x.dims.size()), full_c(x.dims.size());
  for (long r = 0; r < dk; ++r) {
    detail::to_digits(r, kept_dims, gr);
    for (long c = 0; c < dk; ++c) {
      detail::to_digits(c, kept_dims, gc);
      cxd acc = 0.0;
      for (long tt = 0; tt < dt; ++tt) {
        detail::to_digits(tt, traced_dims, t);
        for (std::size_t i = 0; i < kept_pos.size(); ++i) {
          full_r[kept_pos[i]] = gr[i];
          full_c[kept_pos[i]] = gc[i];
        }
        for (std::size_t i = 0; i < traced_pos.size(); ++i) {
          full_r[traced_pos[i]] = t[i];
          full_c[traced_pos[i]] = t[i];
        }
        acc += x.data(detail::from_digits(full_r, x.dims), detail::from_digits(full_c, x.dims));
      }
      out(r, c) = acc;
    }
  }
  if (kept_dims.empty()) kept_dims.push_back(1);
  return {std::move(out), std::move(kept_dims)};
}

/// Transpose the factors in `on`. Involution; full-set transpose equals
/// the plain matrix transpose.
inline LabeledOperator partial_transpose(const LabeledOperator& x, const SubsystemSet& on) {
  on.check_against(x.num_factors());
  if (on.empty()) return x;
  const long D = x.dim();
  Matrix out(D, D);
  std::vector<int> dr, dc;
  for (long r = 0; r < D; ++r) {
    detail::to_digits(r, x.dims, dr);
    for (long c = 0; c < D; ++c) {
      detail::to_digits(c, x.dims, dc);
      std::vector<int> sr = dr, sc = dc;
      for (int i : on.indices) std::swap(sr[i], sc[i]);
      out(detail::from_digits(sr, x.dims), detail::from_digits(sc, x.dims)) = x.data(r, c);
    }
  }
  return {std::move(out), x.dims};
}

/// Reorder factors: new factor i is old factor perm[i].
inline LabeledOperator permute_subsystems(const LabeledOperator& x, const std::vector<int>& perm) {
  if (perm.size() != x.dims.size())
    throw std::invalid_argument("permutation length mismatch");
  std::vector<int> seen(perm.size(), 0), new_dims(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (perm[i] < 0 || static_cast<std::size_t>(perm[i]) >= perm.size() || seen[perm[i]]++)
      throw std::invalid_argument("not a permutation");
    new_dims[i] = x.dims[perm[i]];
  }
  const long D = x.dim();
  Matrix out(D, D);
  std::vector<int> dr, dc, nr(perm.size()), nc(perm.size());
  for (long r = 0; r < D; ++r) {
    detail::to_digits(r, x.dims, dr);
    for (long c = 0; c < D; ++c) {
      detail::to_digits(c, x.dims, dc);
      for (std::size_t i = 0; i < perm.size(); ++i) {
        nr[i] = dr[perm[i]];
        nc[i] = dc[perm[i]];
      }
      out(detail::from_digits(nr, new_dims), detail::from_digits(nc, new_dims)) = x.data(r, c);
    }
  }
  return {std::move(out), std::move(new_dims)};
}

/// Sum of singular values.
inline double trace_norm(const LabeledOperator& x) {
  if (x.is_hermitian()) {
    Matrix h = 0.5 * (x.data + x.data.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
    return es.eigenvalues().cwiseAbs().sum();
  }
  Eigen::BDCSVD<Matrix> svd(x.data);
  if (svd.info() != Eigen::Success) throw std::runtime_error("SVD failed");
  return svd.singularValues().sum();
}

inline bool LabeledOperator::is_psd(double tol) const {
  if (!is_hermitian(1e-8)) return false;
  Matrix h = 0.5 * (data + data.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

inline double min_eigenvalue(const LabeledOperator& x) {
  Matrix h = 0.5 * (x.data + x.data.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Hermitian square root with negative eigenvalues clamped to zero.
inline LabeledOperator herm_sqrt(const LabeledOperator& x) {
  Matrix h = 0.5 * (x.data + x.data.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Matrix out = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  return {std::move(out), x.dims};
}

/// Uhlmann fidelity ||sqrt(rho) sqrt(sigma)||_1^2 of two states.
inline double state_fidelity(const LabeledOperator& rho, const LabeledOperator& sigma) {
  if (rho.dim() != sigma.dim()) throw std::invalid_argument("state dimensions differ");
  auto check = [](const LabeledOperator& s, const char* which) {
    if (min_eigenvalue(s) < -kPsdTol)
      throw std::invalid_argument(std::string(which) + " is not positive semi-definite");
    if (std::abs(s.trace().real() - 1.0) > 1e-6 || std::abs(s.trace().imag()) > 1e-6)
      throw std::invalid_argument(std::string(which) + " does not have unit trace");
  };
  check(rho, "rho");
  check(sigma, "sigma");
  LabeledOperator prod = herm_sqrt(rho) * herm_sqrt(sigma);
  double root = trace_norm(prod);
  return std::min(1.0, root * root);
}

}  // namespace bqt
