#pragma once

// The 24-element single-qubit Clifford group acting on the computational subspace.
//
// Every element carries its conjugation action on the Pauli operators (the image of X
// and of Z as signed Paulis). Composition and inversion work on these images, so long
// products never accumulate phase error; the 2x2 matrices are only used to build
// superoperators.

#include <array>
#include <cmath>
#include <complex>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcmr/errors.hpp"
#include "mcmr/liouville.hpp"

namespace mcmr {

enum class Pauli : int { kI = 0, kX = 1, kY = 2, kZ = 3 };

inline constexpr std::array<Pauli, 4> kAllPaulis{Pauli::kI, Pauli::kX, Pauli::kY, Pauli::kZ};

inline char pauli_char(Pauli p) { return "IXYZ"[static_cast<int>(p)]; }

inline Pauli pauli_from_char(char c) {
  switch (c) {
    case 'I': return Pauli::kI;
    case 'X': return Pauli::kX;
    case 'Y': return Pauli::kY;
    case 'Z': return Pauli::kZ;
    default: throw ParameterError(std::string("unknown Pauli label '") + c + "'");
  }
}

/// Measurement outcome selected by the standard analysis: dark (0) for I and Z, bright
/// (1) for X and Y.
inline int target_outcome(Pauli p) { return (p == Pauli::kX || p == Pauli::kY) ? 1 : 0; }

inline Matrix2c pauli_matrix(Pauli p) {
  using namespace std::complex_literals;
  Matrix2c m;
  switch (p) {
    case Pauli::kI: m << 1, 0, 0, 1; break;
    case Pauli::kX: m << 0, 1, 1, 0; break;
    case Pauli::kY: m << 0, -1i, 1i, 0; break;
    case Pauli::kZ: m << 1, 0, 0, -1; break;
  }
  return m;
}

/// +/- X, Y or Z.
struct SignedPauli {
  int sign = 1;
  Pauli axis = Pauli::kX;
  bool operator==(const SignedPauli&) const = default;
};

struct CliffordElement {
  int index = 0;
  Matrix2c unitary = Matrix2c::Identity();
  SignedPauli image_x{1, Pauli::kX};
  SignedPauli image_z{1, Pauli::kZ};

  /// U P U^dag for a signed non-identity Pauli.
  SignedPauli conjugate(SignedPauli p) const {
    switch (p.axis) {
      case Pauli::kX: return {p.sign * image_x.sign, image_x.axis};
      case Pauli::kZ: return {p.sign * image_z.sign, image_z.axis};
      case Pauli::kY: {
        // Y = i X Z, so U Y U^dag = i (s_x P_a)(s_z P_b) = -eps_abc s_x s_z P_c.
        const int a = static_cast<int>(image_x.axis);
        const int b = static_cast<int>(image_z.axis);
        const int c = 6 - a - b;
        const int eps = ((b - a + 3) % 3 == 1) ? 1 : -1;
        return {-eps * image_x.sign * image_z.sign * p.sign, static_cast<Pauli>(c)};
      }
      case Pauli::kI: break;
    }
    throw ParameterError("conjugate: identity has no signed image");
  }
};

class CliffordGroup {
 public:
  static constexpr int kOrder = 24;

  CliffordGroup() { build(); }

  std::span<const CliffordElement> elements() const { return elements_; }
  const CliffordElement& operator[](int i) const { return elements_.at(static_cast<std::size_t>(i)); }
  int identity() const { return 0; }

  /// Index of the element with the given Pauli image.
  int find(SignedPauli image_x, SignedPauli image_z) const {
    for (const auto& e : elements_)
      if (e.image_x == image_x && e.image_z == image_z) return e.index;
    throw ParameterError("clifford: Pauli image is not a Clifford");
  }

  /// a * b (apply b first), computed on Pauli images.
  int compose(int a, int b) const {
    const auto& ea = (*this)[a];
    const auto& eb = (*this)[b];
    return find(ea.conjugate(eb.image_x), ea.conjugate(eb.image_z));
  }

  int inverse(int a) const { return inverse_.at(static_cast<std::size_t>(a)); }

  /// Element equal to the Pauli gate p up to phase.
  int pauli_element(Pauli p) const { return pauli_index_.at(static_cast<std::size_t>(p)); }

  /// p * (g_l ... g_1)^-1 for a sequence g_1..g_l applied in order.
  int inversion_for(std::span<const int> sequence, Pauli p) const {
    int total = identity();
    for (int g : sequence) total = compose(g, total);
    return compose(pauli_element(p), inverse(total));
  }

  /// Superoperator of V_c (+) W_e; W_e defaults to identity.
  SuperOperator to_superop(int g, const Matrix2c& extra = Matrix2c::Identity()) const {
    return embed_gate((*this)[g].unitary, extra);
  }

  /// Cached superoperators with W_e = identity.
  const SuperOperator& superop(int g) const { return superops_.at(static_cast<std::size_t>(g)); }

 private:
  static std::optional<SignedPauli> identify(const Matrix2c& m) {
    for (Pauli p : {Pauli::kX, Pauli::kY, Pauli::kZ}) {
      for (int s : {1, -1}) {
        if ((m - static_cast<double>(s) * pauli_matrix(p)).cwiseAbs().maxCoeff() < 1e-9) {
          return SignedPauli{s, p};
        }
      }
    }
    return std::nullopt;
  }

  // Fixes the global phase so the first entry of largest magnitude in column 0 is real
  // and positive.
  static Matrix2c canonical_phase(const Matrix2c& u) {
    const int k = std::abs(u(0, 0)) > 1e-9 ? 0 : 1;
    const cplx phase = u(k, 0) / std::abs(u(k, 0));
    return u / phase;
  }

  void build() {
    using namespace std::complex_literals;
    const double s = 1.0 / std::sqrt(2.0);
    Matrix2c h;
    h << s, s, s, -s;
    Matrix2c phase_gate;
    phase_gate << 1, 0, 0, 1i;

    auto make = [](const Matrix2c& u) {
      CliffordElement e;
      e.unitary = canonical_phase(u);
      const Matrix2c ux = e.unitary * pauli_matrix(Pauli::kX) * e.unitary.adjoint();
      const Matrix2c uz = e.unitary * pauli_matrix(Pauli::kZ) * e.unitary.adjoint();
      e.image_x = identify(ux).value();
      e.image_z = identify(uz).value();
      return e;
    };

    std::deque<Matrix2c> frontier{Matrix2c::Identity()};
    while (!frontier.empty() && elements_.size() < kOrder) {
      const Matrix2c u = frontier.front();
      frontier.pop_front();
      CliffordElement e = make(u);
      bool seen = false;
      for (const auto& x : elements_) seen = seen || (x.image_x == e.image_x && x.image_z == e.image_z);
      if (seen) continue;
      e.index = static_cast<int>(elements_.size());
      elements_.push_back(e);
      frontier.push_back(h * e.unitary);
      frontier.push_back(phase_gate * e.unitary);
    }
    if (elements_.size() != kOrder) throw Error("clifford: group enumeration failed");

    for (int a = 0; a < kOrder; ++a) {
      for (int b = 0; b < kOrder; ++b) {
        if (compose(a, b) == identity()) inverse_[static_cast<std::size_t>(a)] = b;
      }
    }
    for (Pauli p : kAllPaulis) {
      const CliffordElement probe = make(pauli_matrix(p));
      pauli_index_[static_cast<std::size_t>(p)] = find(probe.image_x, probe.image_z);
    }
    superops_.reserve(kOrder);
    for (const auto& e : elements_) superops_.push_back(embed_gate(e.unitary));
  }

  std::vector<CliffordElement> elements_;
  std::array<int, kOrder> inverse_{};
  std::array<int, 4> pauli_index_{};
  std::vector<SuperOperator> superops_;
};

/// Shared immutable group table.
inline const CliffordGroup& clifford_group() {
  static const CliffordGroup group;
  return group;
}

}  // namespace mcmr
