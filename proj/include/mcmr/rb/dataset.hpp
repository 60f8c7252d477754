#pragma once

// Counts from benchmarking runs: probe outcomes per sequence and focus-qubit outcomes
// per interleaved slot, plus shot sampling from the analytic survival probabilities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "mcmr/channels.hpp"
#include "mcmr/errors.hpp"
#include "mcmr/parallel.hpp"
#include "mcmr/rb/fit.hpp"
#include "mcmr/rb/sequences.hpp"
#include "mcmr/rb/survival.hpp"
#include "mcmr/rng.hpp"

namespace mcmr::rb {

struct SequenceRecord {
  int length = 0;
  int seq_id = 0;
  Pauli pauli = Pauli::kI;
  int target = 0;
  std::int64_t shots = 0;
  std::int64_t dark = 0;
  std::int64_t bright = 0;

  std::int64_t target_counts() const { return target == 0 ? dark : bright; }
  double target_fraction() const { return static_cast<double>(target_counts()) / static_cast<double>(shots); }
  double dark_fraction() const { return static_cast<double>(dark) / static_cast<double>(shots); }
};

/// Readout of one focus qubit at one measurement of one interleaved slot. `expected` is
/// the ideal outcome, or -1 when it is unknown (after a random SU(2)).
struct FocusRecord {
  int length = 0;
  int seq_id = 0;
  int focus_qubit = 0;
  int slot = 0;
  int measurement = 0;
  int expected = 0;
  std::int64_t shots = 0;
  std::int64_t bright = 0;
};

/// Mean of a per-length quantity across sequences.
struct LengthPoint {
  int length = 0;
  double mean = 0.0;
  std::size_t sequences = 0;
};

struct RBDataset {
  std::vector<SequenceRecord> sequences;
  std::vector<FocusRecord> focus;

  std::vector<int> lengths() const {
    std::set<int> s;
    for (const auto& r : sequences) s.insert(r.length);
    return {s.begin(), s.end()};
  }

  /// Throws DataError on structurally invalid contents.
  void validate() const {
    if (sequences.empty()) throw DataError("dataset: no sequence records", 0);
    for (std::size_t i = 0; i < sequences.size(); ++i) {
      const auto& r = sequences[i];
      std::ostringstream os;
      os << "dataset: record " << i << " (length " << r.length << ", seq " << r.seq_id << "): ";
      if (r.length < 1) throw DataError(os.str() + "length must be >= 1", 0);
      if (r.shots < 1) throw DataError(os.str() + "shots must be >= 1", 0);
      if (r.dark < 0 || r.bright < 0 || r.dark > r.shots || r.bright > r.shots) {
        throw DataError(os.str() + "counts must lie in [0, shots]", 0);
      }
      if (r.dark + r.bright != r.shots) throw DataError(os.str() + "dark + bright must equal shots", 0);
      if (r.target != target_outcome(r.pauli)) throw DataError(os.str() + "target outcome does not match Pauli", 0);
    }
    for (const auto& f : focus) {
      if (f.shots < 1 || f.bright < 0 || f.bright > f.shots) throw DataError("dataset: focus counts out of range", 0);
      if (f.expected < -1 || f.expected > 1) throw DataError("dataset: focus expected outcome must be -1, 0 or 1", 0);
    }
  }

  /// Lengths whose {1, Z} and {X, Y} sequence counts differ.
  std::vector<int> unbalanced_lengths() const {
    std::map<int, std::pair<int, int>> counts;
    for (const auto& r : sequences) {
      auto& c = counts[r.length];
      (r.target == 0 ? c.first : c.second) += 1;
    }
    std::vector<int> out;
    for (const auto& [l, c] : counts)
      if (c.first != c.second) out.push_back(l);
    return out;
  }

  bool balanced() const { return unbalanced_lengths().empty(); }

  /// Per-length mean of the target-outcome fraction (standard analysis).
  std::vector<LengthPoint> standard_curve() const { return curve([](const SequenceRecord& r) { return r.target_fraction(); }); }

  /// Per-length mean of the dark fraction over all sequences (leakage analysis).
  std::vector<LengthPoint> leakage_curve() const { return curve([](const SequenceRecord& r) { return r.dark_fraction(); }); }

  static Series to_series(const std::vector<LengthPoint>& pts) {
    Series s;
    for (const auto& p : pts) {
      s.x.push_back(static_cast<double>(p.length));
      s.y.push_back(p.mean);
    }
    return s;
  }

 private:
  template <class F>
  std::vector<LengthPoint> curve(F value) const {
    std::map<int, std::pair<double, std::size_t>> acc;
    for (const auto& r : sequences) {
      auto& a = acc[r.length];
      a.first += value(r);
      a.second += 1;
    }
    std::vector<LengthPoint> out;
    for (const auto& [l, a] : acc) out.push_back({l, a.first / static_cast<double>(a.second), a.second});
    return out;
  }
};

/// Index of each sequence's length in the sorted length list.
inline std::vector<std::size_t> length_indices(std::span<const RBSequence> seqs) {
  std::set<int> s;
  for (const auto& q : seqs) s.insert(q.length);
  const std::vector<int> sorted(s.begin(), s.end());
  std::vector<std::size_t> out;
  out.reserve(seqs.size());
  for (const auto& q : seqs) {
    out.push_back(static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), q.length) - sorted.begin()));
  }
  return out;
}

/// Binomial shot sampling of every sequence against the exact survival probability.
/// Sequence i draws from stream (seed, kProbeShots, stream_id, length index, seq_id), so
/// the result does not depend on `threads`.
inline std::vector<SequenceRecord> simulate_probe(const SurvivalEngine& engine, std::span<const RBSequence> seqs,
                                                  std::int64_t shots, std::uint64_t seed, std::uint64_t stream_id = 0,
                                                  int threads = 1) {
  if (shots < 1) throw ConfigError("simulate: shots must be >= 1");
  const auto li = length_indices(seqs);
  std::vector<SequenceRecord> out(seqs.size());
  parallel_for(seqs.size(), threads, [&](std::size_t i) {
    const auto& q = seqs[i];
    Rng rng = make_stream(seed, {stream_tag::kProbeShots, stream_id, li[i], static_cast<std::uint64_t>(q.seq_id)});
    const double p_dark = engine.dark_probability(q);
    std::binomial_distribution<std::int64_t> draw(shots, p_dark);
    SequenceRecord r;
    r.length = q.length;
    r.seq_id = q.seq_id;
    r.pauli = q.pauli;
    r.target = q.target;
    r.shots = shots;
    r.dark = draw(rng);
    r.bright = shots - r.dark;
    out[i] = r;
  });
  return out;
}

}  // namespace mcmr::rb
