#include <catch2/catch_amalgamated.hpp>

#include "bqt/states.hpp"

#include <random>

using namespace bqt;
using Catch::Approx;

namespace {

std::mt19937_64 rng(777);

LabeledOperator random_density(std::vector<int> dims) {
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

}  // namespace

TEST_CASE("maximally entangled operator") {
  LabeledOperator g1 = max_entangled(1, false);
  REQUIRE(g1.dim() == 1);
  REQUIRE(g1.data(0, 0) == cxd(1.0, 0.0));

  for (int d : {2, 3, 5}) {
    LabeledOperator gamma = max_entangled(d, false);
    LabeledOperator phi = max_entangled(d);
    REQUIRE(gamma.trace().real() == Approx(double(d)));
    REQUIRE(phi.trace().real() == Approx(1.0));
    REQUIRE((phi.data * phi.data - phi.data).norm() == Approx(0.0).margin(1e-12));  // rank 1
    for (int side : {0, 1}) {
      LabeledOperator marg = partial_trace(phi, SubsystemSet{side});
      REQUIRE((marg.data - Matrix::Identity(d, d) / double(d)).norm() ==
              Approx(0.0).margin(1e-13));
    }
  }
  REQUIRE_THROWS_AS(max_entangled(0), std::invalid_argument);
}

TEST_CASE("swap operator") {
  LabeledOperator f = swap_operator(2);
  Eigen::VectorXcd v01 = Eigen::VectorXcd::Zero(4), v10 = Eigen::VectorXcd::Zero(4);
  v01(1) = 1.0;
  v10(2) = 1.0;
  REQUIRE(((f.data * v01) - v10).norm() == Approx(0.0).margin(1e-15));

  for (int d : {2, 3, 4}) {
    LabeledOperator fd = swap_operator(d);
    REQUIRE((fd.data * fd.data - Matrix::Identity(d * d, d * d)).norm() ==
            Approx(0.0).margin(1e-14));
    // Tr[F] = sum_i <ii|F|ii> = d
    cxd tr = 0.0;
    for (int i = 0; i < d; ++i) tr += fd.data(i * d + i, i * d + i);
    REQUIRE(fd.trace().real() == Approx(tr.real()));
    REQUIRE(fd.trace().real() == Approx(double(d)));
    // T_B(F)/d = Phi
    LabeledOperator tb = partial_transpose(fd, SubsystemSet{1});
    REQUIRE((tb.data / double(d) - max_entangled(d).data).norm() ==
            Approx(0.0).margin(1e-14));
  }
}

TEST_CASE("symmetric/antisymmetric projectors") {
  for (int d : {2, 3, 4}) {
    auto [sym, anti] = sym_antisym_projectors(d);
    REQUIRE((sym.data + anti.data - Matrix::Identity(d * d, d * d)).norm() ==
            Approx(0.0).margin(1e-14));
    REQUIRE((sym.data * anti.data).norm() == Approx(0.0).margin(1e-14));
    REQUIRE((sym.data * sym.data - sym.data).norm() == Approx(0.0).margin(1e-14));
    REQUIRE((anti.data * anti.data - anti.data).norm() == Approx(0.0).margin(1e-14));
    REQUIRE(sym.trace().real() == Approx(d * (d + 1) / 2.0));
    REQUIRE(anti.trace().real() == Approx(d * (d - 1) / 2.0));
  }
  // the d=2 antisymmetric projector is the singlet
  auto [sym2, anti2] = sym_antisym_projectors(2);
  Eigen::VectorXcd singlet = Eigen::VectorXcd::Zero(4);
  singlet(1) = 1.0 / std::sqrt(2.0);
  singlet(2) = -1.0 / std::sqrt(2.0);
  REQUIRE((anti2.data - singlet * singlet.adjoint()).norm() == Approx(0.0).margin(1e-14));
}

TEST_CASE("Weyl operators") {
  Matrix z(2, 2), x(2, 2);
  z << 1, 0, 0, -1;
  x << 0, 1, 1, 0;
  REQUIRE((weyl_operator(1, 0, 2).data - z).norm() == Approx(0.0).margin(1e-14));
  REQUIRE((weyl_operator(0, 1, 2).data - x).norm() == Approx(0.0).margin(1e-14));

  for (int d : {2, 3}) {
    // unitarity and Hilbert-Schmidt orthogonality
    for (int z1 = 0; z1 < d; ++z1)
      for (int x1 = 0; x1 < d; ++x1) {
        Matrix w = weyl_operator(z1, x1, d).data;
        REQUIRE((w.adjoint() * w - Matrix::Identity(d, d)).norm() ==
                Approx(0.0).margin(1e-13));
        for (int z2 = 0; z2 < d; ++z2)
          for (int x2 = 0; x2 < d; ++x2) {
            cxd ip = (weyl_operator(z2, x2, d).data.adjoint() * w).trace();
            double expect = (z1 == z2 && x1 == x2) ? double(d) : 0.0;
            REQUIRE(std::abs(ip) == Approx(expect).margin(1e-12));
          }
      }
    // full Weyl twirl sends everything to the maximally mixed state
    LabeledOperator sigma = random_density({d});
    Matrix acc = Matrix::Zero(d, d);
    for (int zz = 0; zz < d; ++zz)
      for (int xx = 0; xx < d; ++xx) {
        Matrix w = weyl_operator(zz, xx, d).data;
        acc += w * sigma.data * w.adjoint();
      }
    acc /= double(d * d);
    REQUIRE((acc - Matrix::Identity(d, d) / double(d)).norm() == Approx(0.0).margin(1e-12));
  }
  REQUIRE_THROWS_AS(weyl_operator(2, 0, 2), std::invalid_argument);
}

TEST_CASE("isotropic twirl") {
  int d = 2;
  LabeledOperator phi = max_entangled(d);
  REQUIRE((isotropic_twirl(phi).data - phi.data).norm() == Approx(0.0).margin(1e-14));

  // |00><00| on two 4-dimensional factors: Tr[Phi_4 |00><00|] = 1/4, and the
  // twirl preserves that overlap
  Matrix zero = Matrix::Zero(16, 16);
  zero(0, 0) = 1.0;
  LabeledOperator twirled = isotropic_twirl({zero, {4, 4}});
  REQUIRE((max_entangled(4).data.adjoint() * twirled.data).trace().real() ==
          Approx(0.25).margin(1e-13));

  // |0><0| (x) |0><0| on d x d systems twirls to the state used in the
  // no-resource achievability argument
  for (int dd : {2, 3}) {
    int d2 = dd * dd;
    Matrix z00 = Matrix::Zero(d2 * d2, d2 * d2);
    z00(0, 0) = 1.0;
    LabeledOperator out = isotropic_twirl({z00, {d2, d2}});
    LabeledOperator phi4 = max_entangled(d2);
    LabeledOperator rest = identity_op({d2, d2}) - phi4;
    // (1/d^2) Phi + (1 - 1/d^2) (I - Phi)/(d^4 - 1)
    LabeledOperator expect =
        (1.0 / d2) * phi4 + ((1.0 - 1.0 / d2) / (double(d2) * d2 - 1.0)) * rest;
    REQUIRE((out.data - expect.data).norm() == Approx(0.0).margin(1e-12));
  }

  // idempotence, trace preservation, and closure onto the isotropic family
  for (int rep = 0; rep < 25; ++rep) {
    LabeledOperator rho = random_density({3, 3});
    LabeledOperator t1 = isotropic_twirl(rho);
    LabeledOperator t2 = isotropic_twirl(t1);
    REQUIRE((t1.data - t2.data).norm() == Approx(0.0).margin(1e-10));
    REQUIRE(std::abs(t1.trace() - rho.trace()) < 1e-12);
    double f = (max_entangled(3).data.adjoint() * rho.data).trace().real();
    REQUIRE((t1.data - isotropic_state(f, 3).data).norm() == Approx(0.0).margin(1e-10));
  }
}

TEST_CASE("werner twirl") {
  int d = 3;
  for (int rep = 0; rep < 25; ++rep) {
    LabeledOperator rho = random_density({d, d});
    LabeledOperator t1 = werner_twirl(rho);
    REQUIRE((werner_twirl(t1).data - t1.data).norm() == Approx(0.0).margin(1e-10));
    REQUIRE(std::abs(t1.trace() - rho.trace()) < 1e-12);
    auto [sym, anti] = sym_antisym_projectors(d);
    double p = (anti.data.adjoint() * rho.data).trace().real();
    REQUIRE((t1.data - werner_state(p, d).data).norm() == Approx(0.0).margin(1e-10));
  }

  // fixed point
  LabeledOperator w = werner_state(0.7, 2);
  REQUIRE((werner_twirl(w).data - w.data).norm() == Approx(0.0).margin(1e-13));

  // Phi_2 lies in the symmetric subspace: its Werner twirl has p = 0
  auto [sym2, anti2] = sym_antisym_projectors(2);
  REQUIRE((anti2.data.adjoint() * max_entangled(2).data).trace().real() ==
          Approx(0.0).margin(1e-13));
  LabeledOperator tphi = werner_twirl(max_entangled(2));
  REQUIRE((tphi.data - werner_state(0.0, 2).data).norm() == Approx(0.0).margin(1e-13));

  // the maximally mixed two-qubit state carries antisymmetric weight 1/4,
  // splitting (3/4, 1/4) across the normalized projector parts
  LabeledOperator pi4 = {Matrix::Identity(4, 4) / 4.0, {2, 2}};
  REQUIRE((anti2.data.adjoint() * pi4.data).trace().real() == Approx(0.25).margin(1e-13));
  REQUIRE((werner_twirl(pi4).data - werner_state(0.25, 2).data).norm() ==
          Approx(0.0).margin(1e-13));
}

TEST_CASE("GADC action") {
  LabeledOperator ket0{Matrix::Zero(2, 2), {2}};
  ket0.data(0, 0) = 1.0;
  LabeledOperator ket1{Matrix::Zero(2, 2), {2}};
  ket1.data(1, 1) = 1.0;

  LabeledOperator rho = random_density({2});
  REQUIRE((gadc_apply(0.0, 0.3, rho).data - rho.data).norm() == Approx(0.0).margin(1e-14));
  REQUIRE((gadc_apply(1.0, 0.0, ket1).data - ket0.data).norm() == Approx(0.0).margin(1e-14));
  REQUIRE((gadc_apply(1.0, 1.0, ket0).data - ket1.data).norm() == Approx(0.0).margin(1e-14));
  REQUIRE(std::abs(gadc_apply(0.37, 0.62, rho).trace() - 1.0) < 1e-13);
  REQUIRE_THROWS_AS(gadc_apply(0.5, 0.5, random_density({3})), std::invalid_argument);
}

TEST_CASE("GADC resource state") {
  auto formula = [](double g, double n) {
    double v = 1.0 + (g / 2.0) * (g - 2.0 * (1.0 + g * n * (1.0 - n)));
    return v * v;
  };

  LabeledOperator phi2 = max_entangled(2);
  LabeledOperator phiphi = kron(phi2, phi2);                       // (A1,B1,A2,B2)
  LabeledOperator phi_grouped = permute_subsystems(phiphi, {0, 2, 1, 3});
  phi_grouped.dims = {4, 4};

  for (double g : {0.0, 0.3, 1.0})
    for (double n : {0.0, 0.25, 0.5, 1.0}) {
      LabeledOperator rho = gadc_bell_state(g, n);
      REQUIRE(rho.dims == std::vector<int>{4, 4});
      REQUIRE(std::abs(rho.trace() - 1.0) < 1e-12);
      REQUIRE(min_eigenvalue(rho) >= -1e-12);
      double overlap = (phi_grouped.data.adjoint() * rho.data).trace().real();
      REQUIRE(overlap == Approx(formula(g, n)).margin(1e-12));
      // twirling isotropically lands on the isotropic state of the same overlap
      LabeledOperator tw = isotropic_twirl(rho);
      REQUIRE((tw.data - isotropic_state(formula(g, n), 4).data).norm() ==
              Approx(0.0).margin(1e-12));
    }

  REQUIRE(formula(1.0, 0.5) == Approx(1.0 / 16.0).margin(1e-15));
  LabeledOperator at0 = gadc_bell_state(0.0, 0.9);
  REQUIRE(state_fidelity(at0, phi_grouped) == Approx(1.0).margin(1e-10));
}

TEST_CASE("resource state materialization") {
  REQUIRE(ResourceState::none().materialize().dim() == 1);
  REQUIRE(ResourceState::none().materialize().data(0, 0) == cxd(1.0, 0.0));

  for (const ResourceState& r :
       {ResourceState::isotropic(0.8, 3), ResourceState::werner(0.6, 2),
        ResourceState::gadc_bell(0.4, 0.2), ResourceState::custom(random_density({2, 2}))}) {
    LabeledOperator rho = r.materialize();
    REQUIRE(std::abs(rho.trace() - 1.0) <= 1e-12);
    REQUIRE(min_eigenvalue(rho) >= -1e-10);
    REQUIRE(rho.is_hermitian());
  }

  REQUIRE_THROWS_AS(ResourceState::isotropic(1.5, 2), std::invalid_argument);
  REQUIRE_THROWS_AS(ResourceState::isotropic(std::nan(""), 2), std::invalid_argument);
  REQUIRE_THROWS_AS(ResourceState::werner(0.5, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(ResourceState::gadc_bell(-0.1, 0.0), std::invalid_argument);

  LabeledOperator bad = random_density({2, 2});
  bad.data *= 2.0;
  REQUIRE_THROWS_AS(ResourceState::custom(bad), std::invalid_argument);
}
