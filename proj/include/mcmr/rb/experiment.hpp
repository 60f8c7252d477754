#pragma once

// One benchmarking experiment: probe qubits run random Clifford sequences while focus
// qubits receive mid-circuit measurement and reset after every Clifford. Produces the
// probe analyses and the focus-qubit SPAM estimates.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mcmr/channels.hpp"
#include "mcmr/errors.hpp"
#include "mcmr/parallel.hpp"
#include "mcmr/rb/analysis.hpp"
#include "mcmr/rb/dataset.hpp"
#include "mcmr/rb/sequences.hpp"
#include "mcmr/rb/survival.hpp"
#include "mcmr/rng.hpp"

namespace mcmr::rb {

enum class InterleavedOp { kMeasure, kReset, kXPi, kRandomSU2 };

inline const char* to_string(InterleavedOp op) {
  switch (op) {
    case InterleavedOp::kMeasure: return "measure";
    case InterleavedOp::kReset: return "reset";
    case InterleavedOp::kXPi: return "x_pi";
    case InterleavedOp::kRandomSU2: return "random_su2";
  }
  return "?";
}

inline InterleavedOp interleaved_op_from_string(const std::string& s) {
  if (s == "measure") return InterleavedOp::kMeasure;
  if (s == "reset") return InterleavedOp::kReset;
  if (s == "x_pi" || s == "X(pi)" || s == "x") return InterleavedOp::kXPi;
  if (s == "random_su2" || s == "SU(2)" || s == "su2") return InterleavedOp::kRandomSU2;
  throw ConfigError("unknown interleaved operation '" + s + "'");
}

/// Crosstalk seen by one probe qubit.
struct ChannelParams {
  double measurement_gamma_t = 0.0;  // scattering per measure op
  double reset_gamma_t = 0.0;        // scattering per reset op
  PolarizationWeights measurement_polarization = PolarizationWeights::balanced();
  PolarizationWeights reset_polarization = PolarizationWeights::balanced();
  double dark_branching = kDefaultDarkBranching;
  double gate_error = 0.0;   // depolarizing strength of every Clifford
  double extra_phase = 0.0;  // relative phase the gates imprint on the extra subspace

  void validate() const {
    if (!(measurement_gamma_t >= 0.0 && reset_gamma_t >= 0.0)) throw ConfigError("channel: gamma_t must be >= 0");
    if (!(gate_error >= 0.0 && gate_error <= 1.0)) throw ConfigError("channel: gate_error must lie in [0, 1]");
    if (!std::isfinite(extra_phase)) throw ConfigError("channel: extra_phase must be finite");
    try {
      measurement_polarization.validate();
      reset_polarization.validate();
    } catch (const ParameterError& e) {
      throw ConfigError(std::string("channel: ") + e.what());
    }
  }

  Matrix2c extra_rotation() const {
    Matrix2c w = Matrix2c::Identity();
    w(1, 1) = std::polar(1.0, extra_phase);
    return w;
  }
};

/// Classical readout model of the focus qubits.
struct FocusSpam {
  double prep_error = 0.0;          // preparation or reset lands in the wrong state
  double meas_error_dark = 0.0;     // dark read as bright
  double meas_error_bright = 0.0;   // bright read as dark
  double depump_probability = 0.0;  // a measured bright ion ends in |0>

  void validate() const {
    for (double v : {prep_error, meas_error_dark, meas_error_bright, depump_probability}) {
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("focus spam: probabilities must lie in [0, 1]");
    }
  }
};

struct Sampling {
  std::vector<int> lengths{2, 11, 81};
  int sequences = 40;
  std::int64_t shots = 100;
  PauliSelection selection = PauliSelection::kBalanced;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::vector<int> focus_qubits;
  std::vector<int> probe_qubits{0};
  int initial_state = 0;
  std::vector<InterleavedOp> ops;
  ChannelParams channel;                   // default for every probe
  std::map<int, ChannelParams> probe_channels;  // per-probe overrides
  SpamModel probe_spam;
  FocusSpam focus_spam;
  Sampling sampling;

  bool is_control() const { return focus_qubits.empty(); }

  const ChannelParams& channel_for(int probe) const {
    auto it = probe_channels.find(probe);
    return it == probe_channels.end() ? channel : it->second;
  }

  void validate() const {
    if (name.empty()) throw ConfigError("experiment: name must not be empty");
    if (probe_qubits.empty()) throw ConfigError("experiment '" + name + "': at least one probe qubit required");
    if (initial_state != 0 && initial_state != 1) throw ConfigError("experiment '" + name + "': initial_state must be 0 or 1");
    if (ops.empty() != focus_qubits.empty()) {
      throw ConfigError("experiment '" + name + "': interleaved operations require focus qubits and vice versa");
    }
    std::set<int> seen;
    for (int q : focus_qubits)
      if (!seen.insert(q).second) throw ConfigError("experiment '" + name + "': duplicate qubit " + std::to_string(q));
    for (int q : probe_qubits)
      if (!seen.insert(q).second) throw ConfigError("experiment '" + name + "': qubit " + std::to_string(q) + " listed twice");
    for (const auto& [q, _] : probe_channels) {
      if (std::find(probe_qubits.begin(), probe_qubits.end(), q) == probe_qubits.end()) {
        throw ConfigError("experiment '" + name + "': channel given for non-probe qubit " + std::to_string(q));
      }
    }
    channel.validate();
    for (const auto& [_, c] : probe_channels) c.validate();
    try {
      probe_spam.validate();
    } catch (const ParameterError& e) {
      throw ConfigError(std::string("experiment: probe ") + e.what());
    }
    focus_spam.validate();
    if (sampling.lengths.size() < 3) throw ConfigError("experiment '" + name + "': need at least 3 lengths");
    if (sampling.shots < 1) throw ConfigError("experiment '" + name + "': shots must be >= 1");
  }

  /// Expected L/S of the interleaved error, used only to seed the leakage fit: 1 for
  /// measurement light, 0.4 for balanced repump light, in between when both act.
  double expected_ls_ratio() const {
    const bool m = std::count(ops.begin(), ops.end(), InterleavedOp::kMeasure) > 0;
    const bool r = std::count(ops.begin(), ops.end(), InterleavedOp::kReset) > 0;
    if (r && !m) return 0.4;
    if (r && m) return 0.7;
    return 1.0;
  }
};

/// Error channel after every Clifford on a probe: the gate error, then each interleaved
/// operation's crosstalk in order. X(pi) and SU(2) on focus qubits act trivially here.
inline LeakageChannel slot_channel(const ChannelParams& p, const std::vector<InterleavedOp>& ops) {
  LeakageChannel ch = depolarizing(p.gate_error);
  for (InterleavedOp op : ops) {
    if (op == InterleavedOp::kMeasure) {
      ch = measurement_crosstalk(p.measurement_gamma_t, p.measurement_polarization).after(ch);
    } else if (op == InterleavedOp::kReset) {
      ch = reset_crosstalk(p.reset_gamma_t, p.reset_polarization, p.dark_branching).after(ch);
    }
  }
  return ch;
}

/// Wrong-readout frequency with its binomial standard deviation.
struct SpamEstimate {
  int focus_qubit = -1;  // -1: pooled over qubits
  int measurement = 0;
  int length = 0;        // 0: pooled over lengths
  std::int64_t errors = 0;
  std::int64_t shots = 0;

  double rate() const { return shots > 0 ? static_cast<double>(errors) / static_cast<double>(shots) : 0.0; }
  double sigma() const {
    if (shots == 0) return 0.0;
    const double p = rate();
    return std::sqrt(p * (1.0 - p) / static_cast<double>(shots));
  }
};

/// Fraction of outcomes that landed bright where the ideal outcome is unknown.
struct UnknownOutcomeSummary {
  int focus_qubit = 0;
  int measurement = 0;
  std::int64_t bright = 0;
  std::int64_t shots = 0;
};

/// Per-shot Monte Carlo of the focus qubits. Sequence records come in the order of
/// `seqs`; each (focus qubit, sequence) pair draws from its own stream.
inline std::vector<FocusRecord> simulate_focus(const ExperimentConfig& cfg, std::span<const RBSequence> seqs,
                                               std::uint64_t seed, int threads = 1) {
  if (cfg.is_control()) return {};
  const auto li = length_indices(seqs);
  const auto& fs = cfg.focus_spam;
  int n_meas = 0;
  for (auto op : cfg.ops) n_meas += op == InterleavedOp::kMeasure ? 1 : 0;

  const std::size_t n_focus = cfg.focus_qubits.size();
  std::vector<std::vector<FocusRecord>> per_task(n_focus * seqs.size());
  parallel_for(per_task.size(), threads, [&](std::size_t task) {
    const std::size_t fi = task / seqs.size();
    const std::size_t si = task % seqs.size();
    const auto& seq = seqs[si];
    Rng rng = make_stream(seed, {stream_tag::kFocusShots, fi, li[si], static_cast<std::uint64_t>(seq.seq_id)});
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto slots = static_cast<std::size_t>(seq.length);
    const auto nm = static_cast<std::size_t>(n_meas);

    // The random SU(2) of a slot is shared by all shots; it fixes P(bright).
    std::vector<double> su2_bright(slots, 0.0);
    for (auto& p : su2_bright) p = u(rng);

    std::vector<std::int64_t> bright(slots * nm, 0);
    std::vector<int> expected(slots * nm, 0);
    for (std::int64_t shot = 0; shot < cfg.sampling.shots; ++shot) {
      int state = cfg.initial_state;
      if (u(rng) < fs.prep_error) state ^= 1;
      int ideal = cfg.initial_state;
      for (std::size_t slot = 0; slot < slots; ++slot) {
        std::size_t m = 0;
        for (InterleavedOp op : cfg.ops) {
          switch (op) {
            case InterleavedOp::kMeasure: {
              const bool read_bright = state == 1 ? u(rng) >= fs.meas_error_bright : u(rng) < fs.meas_error_dark;
              bright[slot * nm + m] += read_bright ? 1 : 0;
              expected[slot * nm + m] = ideal;
              if (state == 1 && u(rng) < fs.depump_probability) state = 0;
              ++m;
              break;
            }
            case InterleavedOp::kReset:
              state = u(rng) < fs.prep_error ? 1 : 0;
              ideal = 0;
              break;
            case InterleavedOp::kXPi:
              state ^= 1;
              if (ideal >= 0) ideal ^= 1;
              break;
            case InterleavedOp::kRandomSU2:
              state = u(rng) < su2_bright[slot] ? 1 : 0;
              ideal = -1;
              break;
          }
        }
      }
    }
    auto& out = per_task[task];
    for (std::size_t slot = 0; slot < slots; ++slot) {
      for (std::size_t m = 0; m < nm; ++m) {
        out.push_back({seq.length, seq.seq_id, cfg.focus_qubits[fi], static_cast<int>(slot) + 1, static_cast<int>(m),
                       expected[slot * nm + m], cfg.sampling.shots, bright[slot * nm + m]});
      }
    }
  });
  std::vector<FocusRecord> out;
  for (auto& v : per_task) out.insert(out.end(), v.begin(), v.end());
  return out;
}

/// Focus SPAM estimates from the records: per (qubit, measurement) pooled over lengths,
/// per (qubit, measurement, length), and per measurement pooled over qubits.
struct SpamReport {
  std::vector<SpamEstimate> pooled;          // focus_qubit = -1, length = 0
  std::vector<SpamEstimate> per_qubit;       // length = 0
  std::vector<SpamEstimate> per_length;
  std::vector<UnknownOutcomeSummary> unknown;

  /// Headline number: pooled error of the last measurement index with known outcomes.
  std::optional<SpamEstimate> headline() const {
    if (pooled.empty()) return std::nullopt;
    return pooled.back();
  }
};

inline SpamReport summarize_spam(const std::vector<FocusRecord>& records) {
  std::map<std::tuple<int, int, int>, SpamEstimate> acc;  // (qubit, meas, length)
  std::map<std::pair<int, int>, UnknownOutcomeSummary> unk;
  for (const auto& r : records) {
    if (r.expected < 0) {
      auto& s = unk[{r.focus_qubit, r.measurement}];
      s.focus_qubit = r.focus_qubit;
      s.measurement = r.measurement;
      s.bright += r.bright;
      s.shots += r.shots;
      continue;
    }
    const std::int64_t errors = r.expected == 1 ? r.shots - r.bright : r.bright;
    for (auto key : {std::tuple{r.focus_qubit, r.measurement, r.length}, std::tuple{r.focus_qubit, r.measurement, 0},
                     std::tuple{-1, r.measurement, 0}}) {
      auto& e = acc[key];
      e.focus_qubit = std::get<0>(key);
      e.measurement = std::get<1>(key);
      e.length = std::get<2>(key);
      e.errors += errors;
      e.shots += r.shots;
    }
  }
  SpamReport rep;
  for (const auto& [key, e] : acc) {
    if (std::get<0>(key) == -1) rep.pooled.push_back(e);
    else if (std::get<2>(key) == 0) rep.per_qubit.push_back(e);
    else rep.per_length.push_back(e);
  }
  for (const auto& [_, s] : unk) rep.unknown.push_back(s);
  return rep;
}

/// Values implied by the injected channel, for comparison with the fits.
struct InjectedValues {
  double decay_base = 1.0;
  double leakage = 0.0;
  double seepage = 0.0;
  double t_minus = 1.0;
  double average_infidelity = 0.0;  // computed directly from the channel
  double average_error = 0.0;       // (1 - r + L) / 2 of the twirl
  double measurement_gamma_t = 0.0;
  double reset_gamma_t = 0.0;
};

/// Read from the channel coefficients, which the twirl leaves unchanged, so uneven
/// polarization (outside the symmetric leakage form) is still reported.
inline InjectedValues injected_values(const ChannelParams& p, const std::vector<InterleavedOp>& ops) {
  const LeakageChannel ch = slot_channel(p, ops);
  const TwirledChannel tw = twirl_coefficients(ch.superop());
  InjectedValues v;
  v.decay_base = tw.decay_base;
  v.leakage = tw.leakage;
  v.seepage = tw.seepage;
  v.t_minus = tw.t_minus;
  v.average_infidelity = average_infidelity(ch);
  v.average_error = 0.5 * (1.0 - tw.decay_base + tw.leakage);
  v.measurement_gamma_t = p.measurement_gamma_t;
  v.reset_gamma_t = p.reset_gamma_t;
  return v;
}

struct ProbeReport {
  int probe = 0;
  InjectedValues injected;
  AnalysisResult analysis;
  RBDataset dataset;  // probe sequences only
};

struct ExperimentReport {
  std::string name;
  std::vector<ProbeReport> probes;
  std::vector<FocusRecord> focus;
  SpamReport spam;
};

struct RunOptions {
  int resamples = 200;
  int threads = 1;
};

inline ExperimentReport run_experiment(const ExperimentConfig& cfg, std::uint64_t seed, const RunOptions& opt = {}) {
  cfg.validate();
  const auto seqs = generate_sequences(cfg.sampling.lengths, cfg.sampling.sequences,
                                       derive_seed(seed, {stream_tag::kSequences}), cfg.sampling.selection);
  ExperimentReport rep;
  rep.name = cfg.name;
  rep.focus = simulate_focus(cfg, seqs, derive_seed(seed, {stream_tag::kFocusShots}), opt.threads);
  rep.spam = summarize_spam(rep.focus);
  for (std::size_t pi = 0; pi < cfg.probe_qubits.size(); ++pi) {
    const int probe = cfg.probe_qubits[pi];
    const ChannelParams& params = cfg.channel_for(probe);
    const LeakageChannel ch = slot_channel(params, cfg.ops);
    const SurvivalEngine engine(ch, cfg.probe_spam, params.extra_rotation());
    ProbeReport pr;
    pr.probe = probe;
    pr.injected = injected_values(params, cfg.ops);
    pr.dataset.sequences = simulate_probe(engine, seqs, cfg.sampling.shots,
                                          derive_seed(seed, {stream_tag::kProbeShots}), pi, opt.threads);
    AnalysisOptions ao;
    ao.ls_ratio = cfg.expected_ls_ratio();
    ao.resamples = opt.resamples;
    ao.seed = derive_seed(seed, {stream_tag::kBootstrap, pi});
    ao.threads = opt.threads;
    pr.analysis = analyze(pr.dataset, ao);
    rep.probes.push_back(std::move(pr));
  }
  return rep;
}

}  // namespace mcmr::rb
