#pragma once

// Classical rate equation for photon-scattering induced pumping among the four
// S1/2 levels of the ion:
//   |0> = F=0 (dark),  |1> = F=1 mF=0,  |2> = F=1 mF=-1,  |3> = F=1 mF=+1.
//
//   dP_a/dt = -P_a sum_b R[a->b] + sum_b R[b->a] P_b

#include <array>
#include <cmath>
#include <complex>
#include <numeric>

#include <Eigen/Dense>

#include "mcmr/errors.hpp"

namespace mcmr {

inline constexpr int kLevels = 4;

/// Relative intensities of sigma-, pi and sigma+ light at the ion.
struct PolarizationWeights {
  double w_minus = 1.0 / 3.0;
  double w_pi = 1.0 / 3.0;
  double w_plus = 1.0 / 3.0;

  static PolarizationWeights balanced() { return {}; }

  /// Normalizes arbitrary nonnegative weights to unit sum.
  static PolarizationWeights normalized(double minus, double pi, double plus) {
    const double total = minus + pi + plus;
    if (!(minus >= 0 && pi >= 0 && plus >= 0) || !(total > 0)) {
      throw ParameterError("polarization weights must be nonnegative with positive sum");
    }
    return {minus / total, pi / total, plus / total};
  }

  void validate() const {
    if (!(w_minus >= 0 && w_pi >= 0 && w_plus >= 0)) {
      throw ParameterError("polarization weights must be nonnegative");
    }
    if (std::abs(w_minus + w_pi + w_plus - 1.0) > 1e-12) {
      throw ParameterError("polarization weights must sum to 1");
    }
  }

  bool is_balanced(double tol = 1e-12) const {
    return std::abs(w_minus - 1.0 / 3) < tol && std::abs(w_pi - 1.0 / 3) < tol &&
           std::abs(w_plus - 1.0 / 3) < tol;
  }
};

/// Level populations P[0..3].
struct Populations {
  std::array<double, kLevels> p{1.0, 0.0, 0.0, 0.0};

  static Populations basis(int level) {
    Populations out;
    out.p.fill(0.0);
    out.p.at(static_cast<std::size_t>(level)) = 1.0;
    return out;
  }

  double total() const { return std::accumulate(p.begin(), p.end(), 0.0); }
  double operator[](int i) const { return p[static_cast<std::size_t>(i)]; }

  void validate(double tol = 1e-12) const {
    for (double v : p) {
      if (!(v >= -tol && v <= 1.0 + tol)) throw StateError("population outside [0, 1]");
    }
    if (std::abs(total() - 1.0) > tol) throw StateError("populations do not sum to 1");
  }
};

/// Transition rates R[from][to] in 1/s (or in any consistent unit of inverse time).
/// Diagonal entries are Rayleigh-like self-scattering: they do not move population but
/// count towards the total scattering rate that dephases the level.
struct RateModel {
  std::array<std::array<double, kLevels>, kLevels> rate{};

  double& at(int from, int to) { return rate[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)]; }
  double at(int from, int to) const {
    return rate[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)];
  }

  /// Total photon scattering rate out of `level`, including self-scattering.
  double scattering_rate(int level) const {
    double s = 0.0;
    for (int b = 0; b < kLevels; ++b) s += at(level, b);
    return s;
  }

  void validate() const {
    for (int a = 0; a < kLevels; ++a) {
      for (int b = 0; b < kLevels; ++b) {
        if (!(std::isfinite(at(a, b)) && at(a, b) >= 0.0)) {
          throw ParameterError("rate model: rates must be finite and >= 0");
        }
      }
    }
    for (int b = 0; b < kLevels; ++b) {
      if (at(0, b) != 0.0) throw ParameterError("rate model: dark state |0> must not scatter");
    }
  }

  /// R[a->b] = gamma for every pair of bright levels.
  static RateModel equal_rates(double gamma) {
    if (!(gamma >= 0.0)) throw ParameterError("rate model: gamma must be >= 0");
    RateModel m;
    for (int a = 1; a < kLevels; ++a)
      for (int b = 1; b < kLevels; ++b) m.at(a, b) = gamma;
    return m;
  }

  /// Off-resonant scattering on F=1 -> P1/2 F'=0 with per-level Rabi rate and Zeeman
  /// detuning; rates do not depend on the final level:
  ///   R[a->b] = Omega_a^2 Gamma / (Gamma^2/4 + Delta_a^2),  a, b in {1, 2, 3}.
  /// `rabi` and `zeeman` are indexed by bright level 1..3 (entry 0 ignored).
  static RateModel from_zeeman(const std::array<double, kLevels>& rabi,
                               const std::array<double, kLevels>& zeeman, double linewidth) {
    if (!(linewidth > 0.0)) throw ParameterError("rate model: linewidth must be > 0");
    RateModel m;
    for (int a = 1; a < kLevels; ++a) {
      const auto ia = static_cast<std::size_t>(a);
      const double r = rabi[ia] * rabi[ia] * linewidth /
                       (linewidth * linewidth / 4.0 + zeeman[ia] * zeeman[ia]);
      for (int b = 1; b < kLevels; ++b) m.at(a, b) = r;
    }
    m.validate();
    return m;
  }

  /// Detection light (F=1 -> P1/2 F'=0). Level |1> couples through pi light, |2> through
  /// sigma+, |3> through sigma-. Balanced weights give R[a->b] = gamma.
  static RateModel measurement(double gamma, const PolarizationWeights& pol) {
    if (!(gamma >= 0.0)) throw ParameterError("rate model: gamma must be >= 0");
    pol.validate();
    const std::array<double, kLevels> scale{0.0, 3.0 * pol.w_pi, 3.0 * pol.w_plus, 3.0 * pol.w_minus};
    RateModel m;
    for (int a = 1; a < kLevels; ++a)
      for (int b = 1; b < kLevels; ++b) m.at(a, b) = gamma * scale[static_cast<std::size_t>(a)];
    return m;
  }

  /// Repump light (F=1 -> P1/2 F'=1). Level |1> (mF=0) only couples through sigma+-,
  /// |2> through pi and sigma+, |3> through pi and sigma-. A scattered photon leaves the
  /// ion in |0> with probability `dark_branching`, otherwise uniformly in F=1.
  /// Balanced weights give a total scattering rate of 3 gamma from each bright level.
  static RateModel reset(double gamma, const PolarizationWeights& pol, double dark_branching) {
    if (!(gamma >= 0.0)) throw ParameterError("rate model: gamma must be >= 0");
    if (!(dark_branching >= 0.0 && dark_branching <= 1.0)) {
      throw ParameterError("rate model: dark branching must lie in [0, 1]");
    }
    pol.validate();
    const std::array<double, kLevels> scale{0.0, 1.5 * (pol.w_plus + pol.w_minus),
                                            1.5 * (pol.w_pi + pol.w_plus),
                                            1.5 * (pol.w_pi + pol.w_minus)};
    RateModel m;
    for (int a = 1; a < kLevels; ++a) {
      const double total = 3.0 * gamma * scale[static_cast<std::size_t>(a)];
      m.at(a, 0) = total * dark_branching;
      for (int b = 1; b < kLevels; ++b) m.at(a, b) = total * (1.0 - dark_branching) / 3.0;
    }
    return m;
  }

  /// Generator Q with dP/dt = Q P.
  Eigen::Matrix4d generator() const {
    Eigen::Matrix4d q = Eigen::Matrix4d::Zero();
    for (int a = 0; a < kLevels; ++a) {
      for (int b = 0; b < kLevels; ++b) {
        if (a == b) continue;
        q(b, a) += at(a, b);
        q(a, a) -= at(a, b);
      }
    }
    return q;
  }
};

namespace detail {

// exp(A) by scaling and squaring of a truncated Taylor series; used only when the
// generator is close to defective.
inline Eigen::Matrix4d expm_taylor(const Eigen::Matrix4d& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Eigen::Matrix4d scaled = a / std::ldexp(1.0, squarings);
  Eigen::Matrix4d term = Eigen::Matrix4d::Identity();
  Eigen::Matrix4d sum = Eigen::Matrix4d::Identity();
  for (int k = 1; k <= 20; ++k) {
    term = term * scaled / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

}  // namespace detail

/// Propagator exp(Q t) of the rate equation. Uses the eigendecomposition of Q and
/// falls back to scaling-and-squaring when the eigenbasis is ill-conditioned.
inline Eigen::Matrix4d rate_propagator(const RateModel& model, double t) {
  model.validate();
  if (!(std::isfinite(t) && t >= 0.0)) throw ParameterError("rate_evolve: time must be >= 0");
  const Eigen::Matrix4d q = model.generator();
  if (t == 0.0 || q.isZero(0.0)) return Eigen::Matrix4d::Identity();

  Eigen::EigenSolver<Eigen::Matrix4d> es(q);
  if (es.info() == Eigen::Success) {
    const Eigen::Matrix4cd v = es.eigenvectors();
    Eigen::JacobiSVD<Eigen::Matrix4cd> svd(v);
    const auto& sv = svd.singularValues();
    if (sv(3) > 0.0 && sv(0) / sv(3) < 1e8) {
      Eigen::Vector4cd d = (es.eigenvalues() * t).array().exp();
      const Eigen::Matrix4cd prop = v * d.asDiagonal() * v.inverse();
      return prop.real();
    }
  }
  return detail::expm_taylor(q * t);
}

/// Populations after evolving `p0` for time `t` under `model`.
inline Populations rate_evolve(const RateModel& model, const Populations& p0, double t) {
  p0.validate();
  const Eigen::Matrix4d prop = rate_propagator(model, t);
  Eigen::Vector4d v(p0.p[0], p0.p[1], p0.p[2], p0.p[3]);
  const Eigen::Vector4d out = prop * v;
  Populations result;
  for (int i = 0; i < kLevels; ++i) result.p[static_cast<std::size_t>(i)] = std::max(0.0, out(i));
  return result;
}

/// Bright-state depumping probability P2 + P3 after a stray-light exposure of length t,
/// starting from |1> with equal rates gamma: (2/3)(1 - exp(-3 gamma t)).
inline double depump_probability(double gamma, double t) {
  if (!(gamma >= 0.0 && t >= 0.0)) throw ParameterError("depump: gamma and t must be >= 0");
  return (2.0 / 3.0) * (-std::expm1(-3.0 * gamma * t));
}

}  // namespace mcmr
