#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mcmr/clifford.hpp"
#include "mcmr/errors.hpp"
#include "mcmr/rng.hpp"

namespace mcmr::rb {

/// One random Clifford sequence with its inversion gate and the Pauli compiled into it.
struct RBSequence {
  int length = 0;
  int seq_id = 0;
  std::vector<int> cliffords;
  int inversion = 0;
  Pauli pauli = Pauli::kI;
  int target = 0;  // expected outcome for the standard analysis
};

/// How final Paulis are drawn. `kBalanced` puts exactly half of every length's
/// sequences in {1, Z} and half in {X, Y}; `kUniform` draws each Pauli independently.
enum class PauliSelection { kBalanced, kUniform };

/// Sequences for every length, `n_per_length` each. Sequence s of length index li
/// draws from stream (seed, kSequences, li, s).
inline std::vector<RBSequence> generate_sequences(std::span<const int> lengths, int n_per_length,
                                                  std::uint64_t seed,
                                                  PauliSelection selection = PauliSelection::kBalanced) {
  if (lengths.empty()) throw ConfigError("generate_sequences: no lengths given");
  if (n_per_length < 1) throw ConfigError("generate_sequences: need at least one sequence per length");
  if (selection == PauliSelection::kBalanced && n_per_length % 2 != 0) {
    throw ConfigError("generate_sequences: balanced Pauli selection needs an even sequence count");
  }
  for (int l : lengths) {
    if (l < 1) throw ConfigError("generate_sequences: lengths must be >= 1");
  }
  const auto& group = clifford_group();
  std::vector<RBSequence> out;
  out.reserve(lengths.size() * static_cast<std::size_t>(n_per_length));
  for (std::size_t li = 0; li < lengths.size(); ++li) {
    for (int s = 0; s < n_per_length; ++s) {
      Rng rng = make_stream(seed, {stream_tag::kSequences, li, static_cast<std::uint64_t>(s)});
      std::uniform_int_distribution<int> pick(0, CliffordGroup::kOrder - 1);
      std::uniform_int_distribution<int> coin(0, 1);
      RBSequence seq;
      seq.length = lengths[li];
      seq.seq_id = s;
      seq.cliffords.resize(static_cast<std::size_t>(seq.length));
      for (auto& g : seq.cliffords) g = pick(rng);
      if (selection == PauliSelection::kBalanced) {
        const bool dark_target = s < n_per_length / 2;
        const int flip = coin(rng);
        seq.pauli = dark_target ? (flip ? Pauli::kZ : Pauli::kI) : (flip ? Pauli::kY : Pauli::kX);
      } else {
        std::uniform_int_distribution<int> any(0, 3);
        seq.pauli = static_cast<Pauli>(any(rng));
      }
      seq.inversion = group.inversion_for(seq.cliffords, seq.pauli);
      seq.target = target_outcome(seq.pauli);
      out.push_back(std::move(seq));
    }
  }
  return out;
}

}  // namespace mcmr::rb
