#pragma once

// Simulated bright-state depumping experiment: prepare |1>, expose to stray light for a
// time t, flip with X(pi), read out. Any population scattered into mF = +/-1 stays bright.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mcmr/errors.hpp"
#include "mcmr/rate_model.hpp"
#include "mcmr/rb/fit.hpp"
#include "mcmr/rng.hpp"

namespace mcmr::rb {

struct DepumpSimulation {
  RateModel model;              // rates in 1/s
  double amplitude_scale = 1.0; // multiplies the bright probability (calibration bias)
  std::int64_t shots = 1000;
};

/// Exact bright probability after exposure `t`.
inline double depump_bright_probability(const DepumpSimulation& sim, double t) {
  const Populations p = rate_evolve(sim.model, Populations::basis(1), t);
  // X(pi) swaps levels 0 and 1, so the bright readout sees 0 -> 1 plus both mF = +/-1 levels.
  return std::clamp(sim.amplitude_scale * (p[0] + p[2] + p[3]), 0.0, 1.0);
}

/// Bright fractions at each time; time point i draws from stream (seed, kDepump, i).
inline Series simulate_depump(const DepumpSimulation& sim, std::span<const double> times, std::uint64_t seed) {
  if (sim.shots < 1) throw ConfigError("depump: shots must be >= 1");
  if (times.size() < 4) throw ConfigError("depump: need at least 4 time points");
  Series s;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0)) throw ConfigError("depump: times must be >= 0");
    Rng rng = make_stream(seed, {stream_tag::kDepump, i});
    std::binomial_distribution<std::int64_t> draw(sim.shots, depump_bright_probability(sim, times[i]));
    s.x.push_back(times[i]);
    s.y.push_back(static_cast<double>(draw(rng)) / static_cast<double>(sim.shots));
  }
  return s;
}

}  // namespace mcmr::rb
