#pragma once

// Survival probabilities of benchmarking sequences, exact by superoperator contraction,
// and the closed-form sequence average predicted by the twirled channel.

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mcmr/channels.hpp"
#include "mcmr/clifford.hpp"
#include "mcmr/liouville.hpp"
#include "mcmr/rb/sequences.hpp"

namespace mcmr::rb {

/// Probe-qubit state preparation and readout errors, incoherent and symmetric in the
/// extra subspace.
struct SpamModel {
  double prep_error = 0.0;          // prepared |1> instead of |0>
  double prep_leakage = 0.0;        // prepared in the extra subspace, split evenly
  double meas_error_dark = 0.0;     // |0> read as bright
  double meas_error_bright = 0.0;   // F=1 read as dark

  void validate() const {
    for (double v : {prep_error, prep_leakage, meas_error_dark, meas_error_bright}) {
      if (!(v >= 0.0 && v <= 1.0)) throw ParameterError("spam: probabilities must lie in [0, 1]");
    }
    if (prep_error + prep_leakage > 1.0) throw ParameterError("spam: preparation errors exceed 1");
  }

  /// Lambda_P |0>>.
  SuperVector prepared_state() const {
    validate();
    Matrix4c rho = Matrix4c::Zero();
    rho(0, 0) = 1.0 - prep_error - prep_leakage;
    rho(1, 1) = prep_error;
    rho(2, 2) = rho(3, 3) = 0.5 * prep_leakage;
    return SuperVector::from_operator(rho);
  }

  /// Lambda_M^dag |E_k>>, k = 0 dark, 1 bright.
  SuperVector effect(int outcome) const {
    validate();
    Matrix4c e0 = Matrix4c::Zero();
    e0(0, 0) = 1.0 - meas_error_dark;
    e0(1, 1) = e0(2, 2) = e0(3, 3) = meas_error_bright;
    if (outcome == 0) return SuperVector::from_operator(e0);
    return SuperVector::from_operator(Matrix4c::Identity() - e0);
  }
};

/// Precomputes Lambda U_g for all 24 Cliffords so a sequence costs one 16x16 product
/// per gate. Superoperators are checked to be real and then stored as real matrices.
class SurvivalEngine {
 public:
  using RealSuper = Eigen::Matrix<double, kSuperDim, kSuperDim>;
  using RealVec = Eigen::Matrix<double, kSuperDim, 1>;

  SurvivalEngine(const LeakageChannel& channel, const SpamModel& spam,
                 const Matrix2c& extra_rotation = Matrix2c::Identity()) {
    const auto& group = clifford_group();
    const SuperOperator& lam = channel.superop();
    if (lam.max_imag() > 1e-10) throw RepresentationError("survival: channel superoperator is not real");
    for (int g = 0; g < CliffordGroup::kOrder; ++g) {
      const SuperOperator u = group.to_superop(g, extra_rotation);
      if (u.max_imag() > 1e-10) throw RepresentationError("survival: gate superoperator is not real");
      gate_[static_cast<std::size_t>(g)] = u.matrix().real();
      noisy_gate_[static_cast<std::size_t>(g)] = (lam * u).matrix().real();
    }
    prepared_ = spam.prepared_state().coeffs().real();
    effect_dark_ = spam.effect(0).coeffs().real();
  }

  /// Probability of the dark outcome after the sequence
  ///   Lambda_M U_inv Lambda U_l ... Lambda U_1 Lambda_P |0>>,
  /// with no error after the inversion gate.
  double dark_probability(std::span<const int> cliffords, int inversion) const {
    RealVec v = prepared_;
    for (int g : cliffords) v = noisy_gate_[static_cast<std::size_t>(g)] * v;
    v = gate_[static_cast<std::size_t>(inversion)] * v;
    return std::clamp(effect_dark_.dot(v), 0.0, 1.0);
  }

  double dark_probability(const RBSequence& seq) const { return dark_probability(seq.cliffords, seq.inversion); }

  /// Probability of observing `outcome` (0 dark, 1 bright).
  double outcome_probability(const RBSequence& seq, int outcome) const {
    const double p0 = dark_probability(seq);
    return outcome == 0 ? p0 : 1.0 - p0;
  }

  /// Probability of the outcome the standard analysis counts as survival.
  double survival(const RBSequence& seq) const { return outcome_probability(seq, seq.target); }

  /// Exact average over all 24^length sequences for final Pauli p and outcome k.
  /// Intended as an oracle for short lengths only.
  double exact_group_average(int length, Pauli p, int outcome) const {
    if (length < 0 || length > 4) throw ParameterError("exact_group_average: length must be in [0, 4]");
    const auto& group = clifford_group();
    const int pauli_elem = group.pauli_element(p);
    double sum = 0.0;
    std::size_t count = 0;
    // Walk the tree of prefixes, carrying the running state and composed gate.
    struct Frame {
      RealVec state;
      int composed;
    };
    std::vector<Frame> stack{{prepared_, group.identity()}};
    std::vector<int> depth{0};
    while (!stack.empty()) {
      Frame f = stack.back();
      const int d = depth.back();
      stack.pop_back();
      depth.pop_back();
      if (d == length) {
        const int inv = group.compose(pauli_elem, group.inverse(f.composed));
        const RealVec v = gate_[static_cast<std::size_t>(inv)] * f.state;
        const double p0 = effect_dark_.dot(v);
        sum += outcome == 0 ? p0 : 1.0 - p0;
        ++count;
        continue;
      }
      for (int g = 0; g < CliffordGroup::kOrder; ++g) {
        stack.push_back({noisy_gate_[static_cast<std::size_t>(g)] * f.state, group.compose(g, f.composed)});
        depth.push_back(d + 1);
      }
    }
    return sum / static_cast<double>(count);
  }

 private:
  std::array<RealSuper, CliffordGroup::kOrder> gate_;
  std::array<RealSuper, CliffordGroup::kOrder> noisy_gate_;
  RealVec prepared_;
  RealVec effect_dark_;
};

/// Survival of a single sequence under `channel` and `spam`.
inline double survival_analytic(const LeakageChannel& channel, const RBSequence& seq, const SpamModel& spam = {}) {
  return SurvivalEngine(channel, spam).survival(seq);
}

/// Coefficients of the sequence-averaged survival
///   p_{j,k}(l) = A_{j,k} r^l + B_k t_-^l + C_k
/// for a channel of the restricted leakage form. B_k multiplies the decaying mode
/// (projector Pi-), C_k the stationary one (Pi+).
struct DecayCoefficients {
  std::array<std::array<double, 2>, 4> a{};  // [pauli][outcome]
  std::array<double, 2> b{};
  std::array<double, 2> c{};
  double decay_base = 1.0;
  double t_minus = 1.0;

  double predict(Pauli p, int outcome, int length) const {
    const auto k = static_cast<std::size_t>(outcome);
    return a[static_cast<std::size_t>(p)][k] * std::pow(decay_base, length) +
           b[k] * std::pow(t_minus, length) + c[k];
  }

  /// Standard analysis: (1/4)[p_{1,0} + p_{X,1} + p_{Y,1} + p_{Z,0}] = A r^l + 1/2.
  double mean_amplitude() const {
    return 0.25 * (a[0][0] + a[1][1] + a[2][1] + a[3][0]);
  }
};

inline DecayCoefficients decay_coefficients(const TwirledChannel& tw, const SpamModel& spam) {
  using namespace basis_index;
  const Eigen::Matrix<double, kSuperDim, 1> rho = spam.prepared_state().coeffs().real();
  DecayCoefficients out;
  out.decay_base = tw.decay_base;
  out.t_minus = tw.t_minus;

  const auto es = decay_eigensystem(std::clamp(tw.leakage, 0.0, 1.0), std::clamp(tw.seepage, 0.0, 1.0));
  Eigen::Matrix2d pi_plus = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d pi_minus = Eigen::Matrix2d::Zero();
  if (es.pi_plus) {
    pi_plus = *es.pi_plus;
    pi_minus = *es.pi_minus;
  }
  const Eigen::Vector2d pop(rho(kIdC), rho(kIdE));
  const Eigen::Vector2d stationary = pi_plus * pop;
  const Eigen::Vector2d decaying = pi_minus * pop;

  const auto& group = clifford_group();
  for (int k = 0; k < 2; ++k) {
    const Eigen::Matrix<double, kSuperDim, 1> e = spam.effect(k).coeffs().real();
    out.b[static_cast<std::size_t>(k)] = e(kIdC) * decaying(0) + e(kIdE) * decaying(1);
    out.c[static_cast<std::size_t>(k)] = e(kIdC) * stationary(0) + e(kIdE) * stationary(1);
    for (Pauli p : kAllPaulis) {
      // P_j restricted to the traceless computational part.
      const auto pj = group.superop(group.pauli_element(p)).matrix().real();
      double amp = 0.0;
      for (int row = kXC; row <= kZC; ++row)
        for (int col = kXC; col <= kZC; ++col) amp += e(row) * pj(row, col) * rho(col);
      out.a[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)] = amp;
    }
  }
  return out;
}

}  // namespace mcmr::rb
