#pragma once

// Standard and leakage analyses of a benchmarking dataset, derived error metrics, and
// the two-layer bootstrap for their uncertainties.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mcmr/errors.hpp"
#include "mcmr/parallel.hpp"
#include "mcmr/rb/dataset.hpp"
#include "mcmr/rb/fit.hpp"
#include "mcmr/rng.hpp"

namespace mcmr::rb {

/// eps = (1 - r + L) / 2.
inline double average_error(double r, double leakage) {
  if (!(r >= 0.0 && r <= 1.0)) throw ParameterError("average_error: r must lie in [0, 1]");
  if (!(leakage >= 0.0 && leakage <= 1.0)) throw ParameterError("average_error: L must lie in [0, 1]");
  return 0.5 * (1.0 - r + leakage);
}

/// Photon-scattering probability per interleaved operation, gamma * t_meas, inferred
/// from each decay assuming small scattering.
struct ScatteringEstimates {
  double standard = 0.0;  // 3 (1 - r) / 4
  double leakage = 0.0;   // 2 (1 - t) / 3
};

inline ScatteringEstimates scattering_estimates(double r, double t_minus) {
  if (!(r >= 0.0 && r <= 1.0)) throw ParameterError("scattering_estimates: r must lie in [0, 1]");
  if (!(t_minus >= 0.0 && t_minus <= 1.0)) throw ParameterError("scattering_estimates: t must lie in [0, 1]");
  return {0.75 * (1.0 - r), 2.0 * (1.0 - t_minus) / 3.0};
}

/// Same, divided by the exposure time to give a rate.
inline ScatteringEstimates scattering_rates(double r, double t_minus, double t_meas) {
  if (!(t_meas > 0.0)) throw ParameterError("scattering_rates: exposure time must be positive");
  auto e = scattering_estimates(r, t_minus);
  return {e.standard / t_meas, e.leakage / t_meas};
}

/// Every fitted and derived quantity of one analysis.
struct Quantities {
  double amplitude = 0.0;       // A
  double decay_base = 1.0;      // r
  double b0 = 0.0;
  double c0 = 0.5;
  double t_minus = 1.0;
  double leakage = 0.0;         // L
  double seepage = 0.0;         // S
  double average_error = 0.0;   // eps
  double scattering_standard = 0.0;
  double scattering_leakage = 0.0;
  /// t - (1 - L - S) with L and S from the fitted B0, C0; zero only if B0 + C0 = 1/2.
  double closure_residual = 0.0;

  static constexpr int kCount = 11;
  std::array<double, kCount> as_array() const {
    return {amplitude, decay_base, b0, c0, t_minus, leakage, seepage, average_error, scattering_standard,
            scattering_leakage, closure_residual};
  }
  static const std::array<const char*, kCount>& names() {
    static const std::array<const char*, kCount> n{"amplitude", "decay_base", "b0", "c0", "t_minus", "leakage",
                                                   "seepage", "average_error", "scattering_standard",
                                                   "scattering_leakage", "closure_residual"};
    return n;
  }
};

struct AnalysisOptions {
  double ls_ratio = 1.0;  // leakage-fit seed, see fit_leakage
  int resamples = 200;    // 0 disables the bootstrap
  std::uint64_t seed = 0;
  int threads = 1;
};

struct AnalysisResult {
  Quantities value;
  Quantities sigma;  // bootstrap standard deviations
  int resamples = 0;
  int failed_resamples = 0;
  std::vector<LengthPoint> standard_curve;
  std::vector<LengthPoint> leakage_curve;
  std::vector<std::string> warnings;
};

/// Both fits plus derived quantities, no uncertainties.
inline Quantities fit_quantities(const RBDataset& ds, double ls_ratio) {
  const auto std_fit = fit_standard(RBDataset::to_series(ds.standard_curve()));
  const auto leak_fit = fit_leakage(RBDataset::to_series(ds.leakage_curve()), ls_ratio);
  Quantities q;
  q.amplitude = std_fit.amplitude;
  q.decay_base = std_fit.decay_base;
  q.b0 = leak_fit.b0;
  q.c0 = leak_fit.c0;
  q.t_minus = leak_fit.t_minus;
  q.leakage = leak_fit.leakage;
  q.seepage = leak_fit.seepage;
  q.average_error = average_error(q.decay_base, std::clamp(q.leakage, 0.0, 1.0));
  const auto sc = scattering_estimates(q.decay_base, q.t_minus);
  q.scattering_standard = sc.standard;
  q.scattering_leakage = sc.leakage;
  q.closure_residual = q.t_minus - (1.0 - q.leakage - q.seepage);
  return q;
}

/// One bootstrap replicate: within every length, sequences are redrawn with replacement
/// separately for dark-target and bright-target groups (keeping the Pauli balance), then
/// each drawn sequence's counts are redrawn binomially at its observed dark fraction.
inline RBDataset bootstrap_replicate(const RBDataset& ds, Rng& rng) {
  std::map<std::pair<int, int>, std::vector<const SequenceRecord*>> strata;
  for (const auto& r : ds.sequences) strata[{r.length, r.target}].push_back(&r);
  RBDataset out;
  out.sequences.reserve(ds.sequences.size());
  int next_id = 0;
  int last_length = -1;
  for (const auto& [key, members] : strata) {
    if (key.first != last_length) {
      next_id = 0;
      last_length = key.first;
    }
    std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
    for (std::size_t i = 0; i < members.size(); ++i) {
      SequenceRecord r = *members[pick(rng)];
      std::binomial_distribution<std::int64_t> redraw(r.shots, r.dark_fraction());
      r.dark = redraw(rng);
      r.bright = r.shots - r.dark;
      r.seq_id = next_id++;
      out.sequences.push_back(r);
    }
  }
  return out;
}

inline AnalysisResult analyze(const RBDataset& ds, const AnalysisOptions& opt = {}) {
  ds.validate();
  if (ds.lengths().size() < 3) throw FitError("analyze: need at least 3 distinct lengths", {});
  if (opt.resamples != 0 && opt.resamples < 100) throw ConfigError("analyze: bootstrap needs at least 100 resamples");

  AnalysisResult res;
  res.standard_curve = ds.standard_curve();
  res.leakage_curve = ds.leakage_curve();
  for (int l : ds.unbalanced_lengths()) {
    res.warnings.push_back("length " + std::to_string(l) +
                           ": unequal numbers of {I,Z} and {X,Y} sequences; leakage-analysis variance is inflated "
                           "and may be mistaken for leakage");
  }
  res.value = fit_quantities(ds, opt.ls_ratio);
  res.resamples = opt.resamples;
  if (opt.resamples == 0) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    res.sigma = Quantities{nan, nan, nan, nan, nan, nan, nan, nan, nan, nan, nan};
    return res;
  }

  const auto n = static_cast<std::size_t>(opt.resamples);
  std::vector<std::optional<Quantities>> reps(n);
  parallel_for(n, opt.threads, [&](std::size_t b) {
    Rng rng = make_stream(opt.seed, {stream_tag::kBootstrap, b});
    try {
      reps[b] = fit_quantities(bootstrap_replicate(ds, rng), opt.ls_ratio);
    } catch (const FitError&) {
      reps[b].reset();
    }
  });

  std::array<double, Quantities::kCount> sum{}, sum2{};
  std::size_t ok = 0;
  for (const auto& r : reps) {
    if (!r) continue;
    ++ok;
    const auto a = r->as_array();
    for (int k = 0; k < Quantities::kCount; ++k) {
      sum[static_cast<std::size_t>(k)] += a[static_cast<std::size_t>(k)];
    }
  }
  res.failed_resamples = static_cast<int>(n - ok);
  if (static_cast<double>(res.failed_resamples) > 0.1 * static_cast<double>(n)) {
    throw InstabilityError("bootstrap: " + std::to_string(res.failed_resamples) + " of " + std::to_string(n) +
                           " refits failed");
  }
  std::array<double, Quantities::kCount> mean{};
  for (int k = 0; k < Quantities::kCount; ++k) mean[static_cast<std::size_t>(k)] = sum[static_cast<std::size_t>(k)] / static_cast<double>(ok);
  for (const auto& r : reps) {
    if (!r) continue;
    const auto a = r->as_array();
    for (int k = 0; k < Quantities::kCount; ++k) {
      const double d = a[static_cast<std::size_t>(k)] - mean[static_cast<std::size_t>(k)];
      sum2[static_cast<std::size_t>(k)] += d * d;
    }
  }
  std::array<double, Quantities::kCount> sd{};
  for (int k = 0; k < Quantities::kCount; ++k) {
    sd[static_cast<std::size_t>(k)] = ok > 1 ? std::sqrt(sum2[static_cast<std::size_t>(k)] / static_cast<double>(ok - 1)) : 0.0;
  }
  res.sigma = Quantities{sd[0], sd[1], sd[2], sd[3], sd[4], sd[5], sd[6], sd[7], sd[8], sd[9], sd[10]};
  return res;
}

}  // namespace mcmr::rb
