#pragma once

// Closed-form simulation errors for the swap channel and the explicit
// linear-program reductions that certify the SDP values for the no-resource,
// isotropic, and Werner cases, together with the known primal/dual feasible
// points for those linear programs.

#include "bqt/sdp/lp.hpp"

#include <cmath>
#include <stdexcept>

namespace bqt {

// ---------------------------------------------------------------------------
// closed forms

inline double no_resource_error(int d) {
  if (d < 2) throw std::invalid_argument("no_resource_error: d must be >= 2");
  return 1.0 - 1.0 / (static_cast<double>(d) * d);
}

enum class IsotropicRegime { Separable, SmallDim, LargeDim };
enum class WernerRegime { Separable, Entangled };

inline IsotropicRegime isotropic_regime(double fid, int dA, int d) {
  if (fid <= 1.0 / dA) return IsotropicRegime::Separable;
  return (dA <= d * d) ? IsotropicRegime::SmallDim : IsotropicRegime::LargeDim;
}

inline double isotropic_error(double fid, int dA, int d) {
  if (!(fid >= 0.0 && fid <= 1.0) || dA < 2 || d < 2)
    throw std::invalid_argument("isotropic_error: need F in [0,1], dA >= 2, d >= 2");
  const double d2 = static_cast<double>(d) * d;
  switch (isotropic_regime(fid, dA, d)) {
    case IsotropicRegime::Separable: return 1.0 - 1.0 / d2;
    case IsotropicRegime::SmallDim: return 1.0 - fid * dA / d2;
    case IsotropicRegime::LargeDim:
    default: return (1.0 - 1.0 / d2) * (1.0 - fid) / (1.0 - 1.0 / dA);
  }
}

inline WernerRegime werner_regime(double p) {
  return p <= 0.5 ? WernerRegime::Separable : WernerRegime::Entangled;
}

inline double werner_error(double p, int dA, int d) {
  if (!(p >= 0.0 && p <= 1.0) || dA < 2 || d < 2)
    throw std::invalid_argument("werner_error: need p in [0,1], dA >= 2, d >= 2");
  const double d2 = static_cast<double>(d) * d;
  if (werner_regime(p) == WernerRegime::Separable) return 1.0 - 1.0 / d2;
  return 1.0 - (4.0 * p - 2.0 + dA) / (d2 * dA);
}

/// Overlap Tr[Phi^(x)2 A^(x)4(Phi^(x)2)] of the GADC-damped double Bell state
/// with the ideal one.
inline double gadc_overlap(double gamma, double noise) {
  if (!(gamma >= 0.0 && gamma <= 1.0) || !(noise >= 0.0 && noise <= 1.0))
    throw std::invalid_argument("gadc_overlap: gamma, N must lie in [0,1]");
  double v = 1.0 + (gamma / 2.0) * (gamma - 2.0 * (1.0 + gamma * noise * (1.0 - noise)));
  return v * v;
}

/// Error of the twirl-then-teleport protocol on the GADC-damped double Bell
/// state: the isotropic closed form at dA = d^2 = 4, i.e.
/// 1 - max{F(gamma,N), 1/4}. Matches the swap-channel SDP on the full
/// parameter square.
inline double gadc_error(double gamma, double noise) {
  double val = 1.0 - std::max(gadc_overlap(gamma, noise), 0.25);
  // same thing through the general isotropic formula
  double via_iso = isotropic_error(gadc_overlap(gamma, noise), 4, 2);
  if (std::abs(val - via_iso) > 1e-12)
    throw std::logic_error("gadc_error: inconsistent with the isotropic closed form");
  return val;
}

// ---------------------------------------------------------------------------
// linear-program reductions
//
// All three LPs are stated as 1 - sup { c'x : A x <= b, x >= 0 }; the
// builders return the inner maximization, so callers convert via
// 1 - solve_lp(...).primal_value.

/// Four-variable LP of the no-resource case; x = (p1, p2, p3, p4), the
/// trivially redundant first PSD inequality already eliminated.
inline sdp::LpProblem build_no_resource_lp(int d) {
  if (d < 2) throw std::invalid_argument("build_no_resource_lp: d must be >= 2");
  const double dm = d - 1.0, dp = d + 1.0, d21 = dm * dp;
  sdp::LpProblem lp;
  lp.c.resize(4);
  lp.c << 1, 0, 0, 0;
  lp.a.resize(5, 4);
  lp.a << 1, -1 / dm, 1 / dp, -1 / d21,
      1, 1 / dp, -1 / dm, -1 / d21,
      -1, 1 / dm, 1 / dm, -1 / (dm * dm),
      1, 1, 1, 1,
      -1, -1, -1, -1;
  lp.b.resize(5);
  lp.b << 0, 0, 0, 1, -1;
  lp.maximize = true;
  return lp;
}

/// The inequality row dropped from the no-resource LP as redundant.
inline Eigen::RowVectorXd no_resource_redundant_row(int d) {
  const double dp = d + 1.0;
  Eigen::RowVectorXd row(4);
  row << -1, -1 / dp, -1 / dp, -1 / (dp * dp);
  return row;  // <= 0
}

inline Eigen::VectorXd no_resource_primal_point(int d) {
  Eigen::VectorXd x(4);
  double inv = 1.0 / (static_cast<double>(d) * d);
  x << inv, 0, 0, 1 - inv;
  return x;
}

inline Eigen::VectorXd no_resource_dual_point(int d) {
  Eigen::VectorXd y(5);
  double inv = 1.0 / (static_cast<double>(d) * d);
  y << (1 - inv) / 2, (1 - inv) / 2, 0, inv, 0;
  return y;
}

/// Eight-variable LP of the isotropic reduction;
/// x = (k1, l1, m1, n1, k2, l2, m2, n2).
inline sdp::LpProblem build_isotropic_lp(double fid, int dA, int d) {
  if (!(fid >= 0.0 && fid <= 1.0) || dA < 2 || d < 2)
    throw std::invalid_argument("build_isotropic_lp: invalid parameters");
  const double dm = d - 1.0, dp = d + 1.0, d21 = dm * dp;
  const double am = dA - 1.0, ap = dA + 1.0;
  sdp::LpProblem lp;
  lp.c.resize(8);
  lp.c << fid, 0, 0, 0, 1 - fid, 0, 0, 0;
  lp.a.resize(11, 8);
  lp.a << 1, 1, 1, 1, 0, 0, 0, 0,
      -1, -1, -1, -1, 0, 0, 0, 0,
      0, 0, 0, 0, 1, 1, 1, 1,
      0, 0, 0, 0, -1, -1, -1, -1,
      1, 1 / dp, 1 / dp, 1 / (dp * dp), -ap, -ap / dp, -ap / dp, -ap / (dp * dp),
      1, -1 / dm, 1 / dp, -1 / d21, am, -am / dm, am / dp, -am / d21,
      -1, 1 / dm, -1 / dp, 1 / d21, ap, -ap / dm, ap / dp, -ap / d21,
      1, 1 / dp, -1 / dm, -1 / d21, am, am / dp, -am / dm, -am / d21,
      -1, -1 / dp, 1 / dm, 1 / d21, ap, ap / dp, -ap / dm, -ap / d21,
      -1, 1 / dm, 1 / dm, -1 / (dm * dm), -am, am / dm, am / dm, -am / (dm * dm),
      1, -1 / dm, -1 / dm, 1 / (dm * dm), -ap, ap / dm, ap / dm, -ap / (dm * dm);
  lp.b.resize(11);
  lp.b << 1, -1, 1, -1, 0, 0, 0, 0, 0, 0, 0;
  lp.maximize = true;
  return lp;
}

/// Primal feasible point of the isotropic LP for F > 1/dA (regime-dependent).
inline Eigen::VectorXd isotropic_primal_point(double fid, int dA, int d) {
  const double d2 = static_cast<double>(d) * d;
  Eigen::VectorXd x(8);
  if (isotropic_regime(fid, dA, d) == IsotropicRegime::SmallDim) {
    double k1 = dA / d2, n1 = 1 - dA / d2;
    double l2 = dA / (d2 * (dA + 1.0));
    x << k1, 0, 0, n1, 0, l2, l2, 1 - 2 * l2;
    return x;
  }
  // dA > d^2
  double k2 = (dA - d2) / (d2 * (dA - 1.0));
  double hi = (d - 1.0) * dA * (dA + 1.0 - d2 + d) / (d2 * (dA * dA - 1.0));
  double lo = (dA + 1.0 < d + d2)
                  ? (1.0 + d) * (d2 + d - (dA + 1.0)) * dA / (d2 * (dA * dA - 1.0))
                  : 0.0;
  double l2 = 0.5 * (lo + hi);
  x << 1, 0, 0, 0, k2, l2, l2, 1 - k2 - 2 * l2;
  return x;
}

/// Dual feasible point of the isotropic LP for F > 1/dA (regime-dependent).
inline Eigen::VectorXd isotropic_dual_point(double fid, int dA, int d) {
  const double d2 = static_cast<double>(d) * d;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(11);
  if (isotropic_regime(fid, dA, d) == IsotropicRegime::SmallDim) {
    double y1 = 0.5 * (1.0 / (dA * d2) + fid / d2);  // midpoint of the stated interval
    y(0) = y1;
    y(2) = fid * dA / d2 - y1;
    y(4) = (d + 1.0) * (d + 1.0) * (fid - d2 * y1) / (4 * d2);
    y(5) = (d2 - 1.0) * (fid + d2 * y1) / (4 * d2);
    y(7) = y(5);
    y(10) = (d - 1.0) * (d - 1.0) * (fid - d2 * y1) / (4 * d2);
    return y;
  }
  double y1 = (1.0 - fid + d2 * (dA * fid - 1.0)) / (d2 * (dA - 1.0));
  y(0) = y1;
  y(2) = (dA - 1.0) * (fid - y1) / (d2 - 1.0);
  y(5) = 0.5 * (fid - y1);
  y(7) = y(5);
  return y;
}

/// Eight-variable LP of the Werner reduction; same variable order as the
/// isotropic one. Row 6 is taken from the derivation's displayed
/// inequalities (the summary matrix misprints its last coefficient).
inline sdp::LpProblem build_werner_lp(double p, int dA, int d) {
  if (!(p >= 0.0 && p <= 1.0) || dA < 2 || d < 2)
    throw std::invalid_argument("build_werner_lp: invalid parameters");
  const double dm = d - 1.0, dp = d + 1.0, d21 = dm * dp;
  const double am = dA - 1.0, ap = dA + 1.0;
  sdp::LpProblem lp;
  lp.c.resize(8);
  lp.c << 1 - p, 0, 0, 0, p, 0, 0, 0;
  lp.a.resize(11, 8);
  lp.a << 1, 1, 1, 1, 0, 0, 0, 0,
      -1, -1, -1, -1, 0, 0, 0, 0,
      0, 0, 0, 0, 1, 1, 1, 1,
      0, 0, 0, 0, -1, -1, -1, -1,
      -ap, -ap / dp, -ap / dp, -ap / (dp * dp), am, am / dp, am / dp, am / (dp * dp),
      ap, -ap / dm, ap / dp, -ap / d21, -am, am / dm, -am / dp, am / d21,
      1, -1 / dm, 1 / dp, -1 / d21, 1, -1 / dm, 1 / dp, -1 / d21,
      ap, ap / dp, -ap / dm, -ap / d21, -am, -am / dp, am / dm, am / d21,
      1, 1 / dp, -1 / dm, -1 / d21, 1, 1 / dp, -1 / dm, -1 / d21,
      -ap, ap / dm, ap / dm, -ap / (dm * dm), am, -am / dm, -am / dm, am / (dm * dm),
      -1, 1 / dm, 1 / dm, -1 / (dm * dm), -1, 1 / dm, 1 / dm, -1 / (dm * dm);
  lp.b.resize(11);
  lp.b << 1, -1, 1, -1, 0, 0, 0, 0, 0, 0, 0;
  lp.maximize = true;
  return lp;
}

/// Primal feasible point of the Werner LP for p > 1/2.
inline Eigen::VectorXd werner_primal_point(double /*p*/, int dA, int d) {
  const double d2 = static_cast<double>(d) * d;
  double k1 = (dA - 2.0) / (d2 * dA);
  double l1lo = 2.0 / (d2 * (dA + 1.0));
  double l1hi = (2.0 + d * (dA - 1.0) - dA) / (d2 * dA);
  double l1 = 0.5 * (l1lo + l1hi);
  double k2 = (dA + 2.0) / (d2 * dA);
  double l2 = (d2 * (dA + 1.0) * l1 - 2.0) / (d2 * (dA - 1.0));
  Eigen::VectorXd x(8);
  x << k1, l1, l1, 1 - k1 - 2 * l1, k2, l2, l2, 1 - k2 - 2 * l2;
  return x;
}

/// Dual feasible point of the Werner LP for p > 1/2.
inline Eigen::VectorXd werner_dual_point(double p, int dA, int d) {
  const double d2 = static_cast<double>(d) * d;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(11);
  y(0) = ((dA + 2.0) * p - 1.0) / (d2 * dA);
  y(2) = (dA * (1.0 - p) + 2.0 * p - 1.0) / (d2 * dA);
  y(4) = (d + 1.0) * (d + 1.0) * (2.0 * p - 1.0) / (4 * d2 * dA);
  y(6) = (d2 - 1.0) * (2.0 * p - 1.0 + dA) / (4 * d2 * dA);
  y(8) = y(6);
  y(9) = (d - 1.0) * (d - 1.0) * (2.0 * p - 1.0) / (4 * d2 * dA);
  return y;
}

}  // namespace bqt
