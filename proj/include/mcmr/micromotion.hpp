#pragma once

// Doppler frequency-modulation model of an ion displaced from the RF null.
// All frequencies are angular (rad/s); wavenumber in 1/m; displacement in m.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>

#include <boost/math/tools/toms748_solve.hpp>

#include "mcmr/errors.hpp"

namespace mcmr {

struct MicromotionConfig {
  double rf_frequency = 0.0;        // Omega
  double secular_frequency = 0.0;   // omega
  double linewidth = 0.0;           // Gamma
  double wavenumber = 0.0;          // k
  double beam_angle = 0.0;          // theta, angle between micromotion and beam
  double displacement = 0.0;        // r

  void validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(rf_frequency) || !positive(secular_frequency) || !positive(linewidth) ||
        !positive(wavenumber)) {
      throw ParameterError("micromotion: frequencies and wavenumber must be finite and > 0");
    }
    if (!(secular_frequency < rf_frequency)) {
      throw ParameterError("micromotion: secular frequency must be below the RF frequency");
    }
    if (!(beam_angle >= 0.0 && beam_angle <= std::numbers::pi / 2)) {
      throw ParameterError("micromotion: beam angle must lie in [0, pi/2]");
    }
    if (!(std::isfinite(displacement) && displacement >= 0.0)) {
      throw ParameterError("micromotion: displacement must be >= 0");
    }
  }

  /// Omega / Gamma, the sideband resolution ratio.
  double omega_over_gamma() const { return rf_frequency / linewidth; }
};

/// Micromotion amplitude in the pseudo-potential approximation, sqrt(2) omega r / Omega.
inline double micromotion_amplitude(const MicromotionConfig& cfg) {
  cfg.validate();
  return std::numbers::sqrt2 * cfg.secular_frequency * cfg.displacement / cfg.rf_frequency;
}

/// cos(theta), with the rounding residue at theta = pi/2 (about 6e-17) flushed to zero.
inline double beam_projection(double beam_angle) {
  const double c = std::cos(beam_angle);
  return std::abs(c) < 1e-12 ? 0.0 : c;
}

/// Frequency-modulation index n = k A cos(theta).
inline double modulation_index(const MicromotionConfig& cfg) {
  return cfg.wavenumber * micromotion_amplitude(cfg) * beam_projection(cfg.beam_angle);
}

/// Displacement that produces modulation index `n` with every other parameter of `cfg`.
inline double displacement_for_index(const MicromotionConfig& cfg, double n) {
  MicromotionConfig unit = cfg;
  unit.displacement = 1.0;
  const double per_metre = modulation_index(unit);
  if (!(per_metre > 0.0)) {
    throw ParameterError("micromotion: beam orthogonal to micromotion, index cannot be tuned");
  }
  if (!(n >= 0.0)) throw ParameterError("micromotion: modulation index must be >= 0");
  return n / per_metre;
}

struct SuppressionOptions {
  int max_order = 50;
  double term_tolerance = 1e-15;
};

/// Scattering rate with modulation index n relative to the unmodulated rate, in the
/// low-saturation limit:
///
///   I(n)/I0 = J0(n)^2 + 2 sum_{v>=1} Jv(n)^2 / (1 + 4 v^2 (Omega/Gamma)^2)
///
/// The sum stops at `max_order` or at the first order v > n whose term is below
/// `term_tolerance`, whichever comes first.
inline double suppression_factor(double n, double omega_over_gamma, SuppressionOptions opt = {}) {
  if (!(std::isfinite(n) && n >= 0.0)) throw ParameterError("suppression: n must be >= 0");
  if (!(std::isfinite(omega_over_gamma) && omega_over_gamma > 0.0)) {
    throw ParameterError("suppression: Omega/Gamma must be > 0");
  }
  if (opt.max_order < 1) throw ParameterError("suppression: series cutoff must be >= 1");
  if (n == 0.0) return 1.0;

  const double j0 = std::cyl_bessel_j(0.0, n);
  double total = j0 * j0;
  const double ratio2 = omega_over_gamma * omega_over_gamma;
  for (int v = 1; v <= opt.max_order; ++v) {
    const double jv = std::cyl_bessel_j(static_cast<double>(v), n);
    const double term = 2.0 * jv * jv / (1.0 + 4.0 * v * v * ratio2);
    total += term;
    if (v > n && term < opt.term_tolerance) break;
  }
  return std::clamp(total, 0.0, 1.0);
}

/// Root of J0 inside [lo, hi]; the bracket must straddle exactly one sign change.
inline double bessel_j0_root(double lo, double hi, double abs_tol = 1e-12) {
  auto f = [](double x) { return std::cyl_bessel_j(0.0, x); };
  if (!(f(lo) * f(hi) < 0.0)) throw ParameterError("bessel_j0_root: bracket does not straddle a root");
  std::uintmax_t iters = 200;
  auto tol = [abs_tol](double a, double b) { return std::abs(b - a) <= abs_tol; };
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, tol, iters);
  return 0.5 * (a + b);
}

/// Modulation index of maximal carrier suppression, J0(n) = 0, n in (2, 3).
inline double first_null_modulation_index() { return bessel_j0_root(2.0, 3.0); }

/// Second zero of J0, n in (4, 7).
inline double second_null_modulation_index() { return bessel_j0_root(4.0, 7.0); }

}  // namespace mcmr
