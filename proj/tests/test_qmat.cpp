#include <catch2/catch_amalgamated.hpp>

#include "bqt/qmat.hpp"
#include "bqt/states.hpp"

#include <random>

using namespace bqt;
using Catch::Approx;

namespace {

std::mt19937_64 rng(12345);

Matrix random_matrix(int n) {
  std::normal_distribution<double> g;
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cxd(g(rng), g(rng));
  return m;
}

LabeledOperator random_density(std::vector<int> dims) {
  long d = 1;
  for (int x : dims) d *= x;
  Matrix g = random_matrix(static_cast<int>(d));
  Matrix rho = g * g.adjoint();
  rho /= rho.trace();
  return {std::move(rho), std::move(dims)};
}

LabeledOperator random_hermitian(std::vector<int> dims) {
  long d = 1;
  for (int x : dims) d *= x;
  Matrix g = random_matrix(static_cast<int>(d));
  Matrix h = 0.5 * (g + g.adjoint());
  return {std::move(h), std::move(dims)};
}

}  // namespace

TEST_CASE("kron basics") {
  LabeledOperator i2 = identity_op({2});
  LabeledOperator i4 = kron(i2, i2);
  REQUIRE(i4.dims == std::vector<int>{2, 2});
  REQUIRE((i4.data - Matrix::Identity(4, 4)).norm() == Approx(0.0).margin(1e-15));

  Matrix p0 = Matrix::Zero(2, 2), p1 = Matrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  LabeledOperator out = kron({p0, {2}}, {p1, {2}});
  Matrix expect = Matrix::Zero(4, 4);
  expect(1, 1) = 1.0;  // |01><01|
  REQUIRE((out.data - expect).norm() == Approx(0.0).margin(1e-15));
}

TEST_CASE("kron(Z,Z) fixes the maximally entangled state") {
  Matrix z(2, 2);
  z << 1, 0, 0, -1;
  LabeledOperator zz = kron({z, {2}}, {z, {2}});
  LabeledOperator phi = max_entangled(2);
  Matrix moved = zz.data * phi.data * zz.data.adjoint();
  REQUIRE((moved - phi.data).norm() == Approx(0.0).margin(1e-14));
}

TEST_CASE("trace multiplicativity under kron") {
  for (int rep = 0; rep < 20; ++rep) {
    LabeledOperator a{random_matrix(3), {3}};
    LabeledOperator b{random_matrix(4), {4}};
    cxd lhs = kron(a, b).trace();
    cxd rhs = a.trace() * b.trace();
    REQUIRE(std::abs(lhs - rhs) < 1e-10);
  }
}

TEST_CASE("partial trace marginals") {
  LabeledOperator phi = max_entangled(2);
  LabeledOperator marg = partial_trace(phi, SubsystemSet{1});
  REQUIRE((marg.data - Matrix::Identity(2, 2) / 2.0).norm() == Approx(0.0).margin(1e-14));

  LabeledOperator rho = random_density({3});
  LabeledOperator sigma = random_density({2});
  LabeledOperator joint = kron(rho, sigma);
  LabeledOperator back = partial_trace(joint, SubsystemSet{1});
  REQUIRE((back.data - rho.data).norm() == Approx(0.0).margin(1e-12));

  LabeledOperator gamma = max_entangled(3, false);
  LabeledOperator gm = partial_trace(gamma, SubsystemSet{0});
  REQUIRE((gm.data - Matrix::Identity(3, 3)).norm() == Approx(0.0).margin(1e-13));

  // trace preservation
  LabeledOperator h = random_hermitian({2, 3, 2});
  REQUIRE(std::abs(partial_trace(h, SubsystemSet{0, 2}).trace() - h.trace()) < 1e-12);
}

TEST_CASE("partial transpose involution and spectrum") {
  LabeledOperator h = random_hermitian({2, 3});
  LabeledOperator t = partial_transpose(h, SubsystemSet{1});
  REQUIRE(t.is_hermitian());
  LabeledOperator tt = partial_transpose(t, SubsystemSet{1});
  REQUIRE((tt.data - h.data).norm() == 0.0);  // bit-exact involution

  // full-set transpose equals matrix transpose
  LabeledOperator full = partial_transpose(h, SubsystemSet{0, 1});
  REQUIRE((full.data - h.data.transpose()).norm() == Approx(0.0).margin(1e-15));

  // T_B(Phi_2) has eigenvalues {1/2, 1/2, 1/2, -1/2}
  LabeledOperator phi = max_entangled(2);
  LabeledOperator tphi = partial_transpose(phi, SubsystemSet{1});
  Eigen::SelfAdjointEigenSolver<Matrix> es(tphi.data);
  Eigen::VectorXd ev = es.eigenvalues();
  REQUIRE(ev(0) == Approx(-0.5).margin(1e-12));
  REQUIRE(ev(1) == Approx(0.5).margin(1e-12));
  REQUIRE(ev(3) == Approx(0.5).margin(1e-12));

  // T_B(Phi) = F/d
  int d = 3;
  LabeledOperator f = swap_operator(d);
  LabeledOperator lhs = partial_transpose(max_entangled(d), SubsystemSet{1});
  REQUIRE((lhs.data - f.data / double(d)).norm() == Approx(0.0).margin(1e-13));
}

TEST_CASE("partial transpose commutes with partial trace on disjoint sets") {
  LabeledOperator h = random_hermitian({2, 2, 3});
  LabeledOperator a = partial_trace(partial_transpose(h, SubsystemSet{0}), SubsystemSet{2});
  LabeledOperator b = partial_transpose(partial_trace(h, SubsystemSet{2}), SubsystemSet{0});
  REQUIRE((a.data - b.data).norm() == Approx(0.0).margin(1e-13));
}

TEST_CASE("permute_subsystems relabels factors") {
  LabeledOperator a = random_hermitian({2});
  LabeledOperator b = random_hermitian({3});
  LabeledOperator c = random_hermitian({2});
  LabeledOperator abc = kron(kron(a, b), c);
  LabeledOperator perm = permute_subsystems(abc, {2, 0, 1});
  LabeledOperator expect = kron(kron(c, a), b);
  REQUIRE(perm.dims == std::vector<int>{2, 2, 3});
  REQUIRE((perm.data - expect.data).norm() == Approx(0.0).margin(1e-12));
}

TEST_CASE("trace norm") {
  LabeledOperator rho = random_density({2, 2});
  REQUIRE(trace_norm(rho) == Approx(1.0).margin(1e-10));

  Matrix diag = Matrix::Zero(2, 2);
  diag(0, 0) = 3.0;
  diag(1, 1) = -4.0;
  REQUIRE(trace_norm({diag, {2}}) == Approx(7.0).margin(1e-12));

  // the twirled no-resource state sits at distance 1 - 1/d^2 from Phi
  for (int d : {2, 3}) {
    int d2 = d * d;
    LabeledOperator phi = max_entangled(d2);
    LabeledOperator rest = identity_op({d2, d2}) - phi;
    LabeledOperator omega =
        (1.0 / d2) * phi + ((1.0 - 1.0 / d2) / (d2 * d2 - 1.0)) * rest;
    REQUIRE(0.5 * trace_norm(phi - omega) == Approx(1.0 - 1.0 / d2).margin(1e-11));
  }

  // triangle inequality + unitary invariance on random inputs
  for (int rep = 0; rep < 10; ++rep) {
    LabeledOperator x{random_matrix(4), {4}};
    LabeledOperator y{random_matrix(4), {4}};
    REQUIRE(trace_norm(x + y) <= trace_norm(x) + trace_norm(y) + 1e-10);
    Eigen::HouseholderQR<Matrix> qr(random_matrix(4));
    Matrix q = qr.householderQ();
    LabeledOperator rotated{q * x.data * q.adjoint(), {4}};
    REQUIRE(trace_norm(rotated) == Approx(trace_norm(x)).margin(1e-9));
  }
}

TEST_CASE("state fidelity") {
  LabeledOperator rho = random_density({2, 2});
  REQUIRE(state_fidelity(rho, rho) == Approx(1.0).margin(1e-9));

  LabeledOperator ket0{Matrix::Zero(2, 2), {2}};
  ket0.data(0, 0) = 1.0;
  REQUIRE(state_fidelity(ket0, max_mixed(2)) == Approx(0.5).margin(1e-12));

  // pure states: fidelity = |<psi|phi>|^2
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::VectorXcd u = Eigen::VectorXcd::Random(4).normalized();
    Eigen::VectorXcd v = Eigen::VectorXcd::Random(4).normalized();
    LabeledOperator pu{u * u.adjoint(), {4}};
    LabeledOperator pv{v * v.adjoint(), {4}};
    double overlap = std::norm(u.dot(v));
    REQUIRE(state_fidelity(pu, pv) == Approx(overlap).margin(1e-10));
  }

  // symmetry and range
  LabeledOperator sigma = random_density({2, 2});
  double fab = state_fidelity(rho, sigma);
  double fba = state_fidelity(sigma, rho);
  REQUIRE(fab == Approx(fba).margin(1e-9));
  REQUIRE(fab >= 0.0);
  REQUIRE(fab <= 1.0);

  REQUIRE_THROWS_AS(state_fidelity(rho, random_density({2})), std::invalid_argument);
  Matrix ind(2, 2);
  ind << 2.0, 0.0, 0.0, -1.0;  // unit trace, not PSD
  REQUIRE_THROWS_AS(state_fidelity({ind, {2}}, max_mixed(2)), std::invalid_argument);
}

TEST_CASE("subsystem set validation") {
  LabeledOperator h = random_hermitian({2, 2});
  REQUIRE_THROWS_AS(partial_trace(h, SubsystemSet{2}), std::invalid_argument);
  REQUIRE_THROWS_AS(partial_transpose(h, SubsystemSet{-1}), std::invalid_argument);
  SubsystemSet s{1, 0, 1};
  REQUIRE(s.indices == std::vector<int>{0, 1});
}
