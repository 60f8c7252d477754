#pragma once

// Estimated versus injected error for crosstalk under uneven polarization mixtures.
// Each (model, gamma_t) point is benchmarked on several independent sets of sequences.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mcmr/parallel.hpp"
#include "mcmr/rb/experiment.hpp"

namespace mcmr::rb {

struct PolarizationModel {
  std::string name;
  PolarizationWeights weights;
};

/// Balanced light and four uneven mixtures of (sigma-, pi, sigma+).
inline std::vector<PolarizationModel> default_polarization_models() {
  return {{"balanced", PolarizationWeights::balanced()},
          {"no_left_circular", PolarizationWeights::normalized(0.0, 1.0, 1.0)},
          {"no_right_circular", PolarizationWeights::normalized(1.0, 1.0, 0.0)},
          {"no_linear", PolarizationWeights::normalized(1.0, 0.0, 1.0)},
          {"double_linear", PolarizationWeights::normalized(1.0, 2.0, 1.0)}};
}

struct PolarizationSweep {
  std::string kind = "measurement";  // or "reset"
  std::vector<PolarizationModel> models = default_polarization_models();
  std::vector<double> gamma_t{1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
  int repetitions = 20;
  Sampling sampling;
  SpamModel probe_spam;

  bool is_reset() const { return kind == "reset"; }
};

/// Estimates at one (model, gamma_t): injected values and the mean, median and spread of
/// the per-repetition estimates. With three lengths the leakage fit is exactly determined,
/// so a few repetitions end on a parameter bound with L near 1; the median ignores them.
struct SweepPoint {
  std::string model;
  double gamma_t = 0.0;
  InjectedValues injected;
  int repetitions = 0;
  int failures = 0;
  double error_mean = 0.0;
  double error_median = 0.0;
  double error_sd = 0.0;
  double scattering_standard_mean = 0.0;
  double scattering_standard_sd = 0.0;
  double scattering_leakage_mean = 0.0;
  double scattering_leakage_sd = 0.0;

  /// |median / injected - 1|, or |median| when nothing was injected.
  double relative_error() const {
    return injected.average_infidelity > 0.0 ? std::abs(error_median / injected.average_infidelity - 1.0)
                                             : std::abs(error_median);
  }
  double relative_error_of_mean() const {
    return injected.average_infidelity > 0.0 ? std::abs(error_mean / injected.average_infidelity - 1.0)
                                             : std::abs(error_mean);
  }
};

inline ExperimentConfig sweep_experiment(const PolarizationSweep& sw, const PolarizationModel& m, double gamma_t) {
  ExperimentConfig cfg;
  cfg.name = sw.kind + "_" + m.name;
  cfg.focus_qubits = {1};
  cfg.probe_qubits = {0};
  if (sw.is_reset()) {
    cfg.ops = {InterleavedOp::kReset};
    cfg.channel.reset_gamma_t = gamma_t;
    cfg.channel.reset_polarization = m.weights;
  } else {
    cfg.ops = {InterleavedOp::kMeasure};
    cfg.channel.measurement_gamma_t = gamma_t;
    cfg.channel.measurement_polarization = m.weights;
  }
  cfg.probe_spam = sw.probe_spam;
  cfg.sampling = sw.sampling;
  return cfg;
}

/// Repetition k of grid point (mi, gi) draws from (seed, kTrial, mi, gi, k). No bootstrap
/// is run; the spread across repetitions is the uncertainty.
/// Median of a copy; NaN for an empty input.
inline double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

inline std::vector<SweepPoint> run_polarization_sweep(const PolarizationSweep& sw, std::uint64_t seed, int threads = 1) {
  if (sw.repetitions < 1) throw ConfigError("sweep: repetitions must be >= 1");
  if (sw.kind != "measurement" && sw.kind != "reset") throw ConfigError("sweep: kind must be measurement or reset");
  std::vector<SweepPoint> points;
  for (std::size_t mi = 0; mi < sw.models.size(); ++mi) {
    for (std::size_t gi = 0; gi < sw.gamma_t.size(); ++gi) {
      const auto cfg = sweep_experiment(sw, sw.models[mi], sw.gamma_t[gi]);
      cfg.validate();
      SweepPoint pt;
      pt.model = sw.models[mi].name;
      pt.gamma_t = sw.gamma_t[gi];
      pt.injected = injected_values(cfg.channel, cfg.ops);
      const LeakageChannel ch = slot_channel(cfg.channel, cfg.ops);
      const SurvivalEngine engine(ch, cfg.probe_spam);

      const auto n = static_cast<std::size_t>(sw.repetitions);
      std::vector<std::optional<Quantities>> reps(n);
      parallel_for(n, threads, [&](std::size_t k) {
        const std::uint64_t s = derive_seed(seed, {stream_tag::kTrial, mi, gi, k});
        const auto seqs = generate_sequences(cfg.sampling.lengths, cfg.sampling.sequences, s, cfg.sampling.selection);
        RBDataset ds;
        ds.sequences = simulate_probe(engine, seqs, cfg.sampling.shots, s);
        try {
          reps[k] = fit_quantities(ds, cfg.expected_ls_ratio());
        } catch (const FitError&) {
          reps[k].reset();
        }
      });

      std::vector<double> e, ss, sl;
      for (const auto& r : reps) {
        if (!r) {
          ++pt.failures;
          continue;
        }
        e.push_back(r->average_error);
        ss.push_back(r->scattering_standard);
        sl.push_back(r->scattering_leakage);
      }
      pt.repetitions = static_cast<int>(e.size());
      auto mean_sd = [](const std::vector<double>& v, double& mean, double& sd) {
        mean = sd = std::nan("");
        if (v.empty()) return;
        double s = 0.0;
        for (double x : v) s += x;
        mean = s / static_cast<double>(v.size());
        double s2 = 0.0;
        for (double x : v) s2 += (x - mean) * (x - mean);
        sd = v.size() > 1 ? std::sqrt(s2 / static_cast<double>(v.size() - 1)) : 0.0;
      };
      mean_sd(e, pt.error_mean, pt.error_sd);
      pt.error_median = median(e);
      mean_sd(ss, pt.scattering_standard_mean, pt.scattering_standard_sd);
      mean_sd(sl, pt.scattering_leakage_mean, pt.scattering_leakage_sd);
      points.push_back(pt);
    }
  }
  return points;
}

}  // namespace mcmr::rb
