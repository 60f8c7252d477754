#pragma once

// Crosstalk channels on a probe ion and their Clifford twirl.
//
// Measurement and reset light on a neighbouring ion scatter photons off the probe. In
// the rate-equation limit the resulting channel moves population between levels and
// damps every coherence rho_ab at the Lindblad rate (G_a + G_b)/2, where G_a is the
// total scattering rate out of level a (self-scattering included).

#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcmr/clifford.hpp"
#include "mcmr/errors.hpp"
#include "mcmr/liouville.hpp"
#include "mcmr/rate_model.hpp"

namespace mcmr {

enum class ChannelKind { kIdentity, kMeasurement, kReset, kDepolarizing, kComposite, kCustom };

inline const char* to_string(ChannelKind k) {
  switch (k) {
    case ChannelKind::kIdentity: return "identity";
    case ChannelKind::kMeasurement: return "measurement";
    case ChannelKind::kReset: return "reset";
    case ChannelKind::kDepolarizing: return "depolarizing";
    case ChannelKind::kComposite: return "composite";
    case ChannelKind::kCustom: return "custom";
  }
  return "custom";
}

/// An error process acting after each Clifford on the probe.
class LeakageChannel {
 public:
  LeakageChannel() = default;
  LeakageChannel(SuperOperator superop, ChannelKind kind) : superop_(std::move(superop)), kind_(kind) {}

  static LeakageChannel identity() { return {SuperOperator::identity(), ChannelKind::kIdentity}; }

  const SuperOperator& superop() const { return superop_; }
  ChannelKind kind() const { return kind_; }

  /// Population transfer rates between subspaces in the restricted form: lambda^{c->e}_i
  /// multiplies |1_e>><<P_c,i| and lambda^{e->c}_i multiplies |P_c,i>><<1_e|, i in {1, Z}.
  double lambda_c_to_e(Pauli p) const { return superop_(basis_index::kIdE, coefficient_slot(p)).real(); }
  double lambda_e_to_c(Pauli p) const { return superop_(coefficient_slot(p), basis_index::kIdE).real(); }

  /// Computational-block restriction Lambda_c (4x4, real part).
  Eigen::Matrix4d computational_block() const {
    return superop_.matrix().block<4, 4>(0, 0).real();
  }
  Eigen::Matrix4d extra_block() const { return superop_.matrix().block<4, 4>(4, 4).real(); }

  /// this after `first`.
  LeakageChannel after(const LeakageChannel& first) const {
    return {superop_ * first.superop_, ChannelKind::kComposite};
  }

 private:
  static int coefficient_slot(Pauli p) {
    if (p == Pauli::kI) return basis_index::kIdC;
    if (p == Pauli::kZ) return basis_index::kZC;
    throw ParameterError("leakage coefficients exist only for 1 and Z");
  }

  SuperOperator superop_;
  ChannelKind kind_ = ChannelKind::kIdentity;
};

/// Channel generated by a rate model acting for unit time: populations follow the rate
/// equation, coherences decay at the mean scattering rate of their two levels.
inline SuperOperator rate_channel_superop(const RateModel& model) {
  const Eigen::Matrix4d transfer = rate_propagator(model, 1.0);
  std::array<double, kLevels> total{};
  for (int a = 0; a < kLevels; ++a) total[static_cast<std::size_t>(a)] = model.scattering_rate(a);
  return SuperOperator::from_action([&](const Matrix4c& rho) {
    Matrix4c out = Matrix4c::Zero();
    for (int a = 0; a < kLevels; ++a) {
      for (int b = 0; b < kLevels; ++b) {
        if (a == b) {
          for (int c = 0; c < kLevels; ++c) out(c, c) += transfer(c, a) * rho(a, a);
        } else {
          const double rate = 0.5 * (total[static_cast<std::size_t>(a)] + total[static_cast<std::size_t>(b)]);
          out(a, b) += std::exp(-rate) * rho(a, b);
        }
      }
    }
    return out;
  });
}

/// Crosstalk from detection light. `gamma_t` is the per-final-level scattering
/// probability gamma * t_meas.
inline LeakageChannel measurement_crosstalk(double gamma_t,
                                            const PolarizationWeights& pol = PolarizationWeights::balanced()) {
  if (!(std::isfinite(gamma_t) && gamma_t >= 0.0)) throw ParameterError("measurement_crosstalk: gamma_t must be >= 0");
  if (gamma_t == 0.0) return LeakageChannel::identity();
  return {rate_channel_superop(RateModel::measurement(gamma_t, pol)), ChannelKind::kMeasurement};
}

inline constexpr double kDefaultDarkBranching = 1.0 / 3.0;

/// Crosstalk from reset (repump) light, which also pumps bright levels into |0>.
inline LeakageChannel reset_crosstalk(double gamma_t,
                                      const PolarizationWeights& pol = PolarizationWeights::balanced(),
                                      double dark_branching = kDefaultDarkBranching) {
  if (!(std::isfinite(gamma_t) && gamma_t >= 0.0)) throw ParameterError("reset_crosstalk: gamma_t must be >= 0");
  if (!(dark_branching >= 0.0 && dark_branching <= 1.0)) {
    throw ParameterError("reset_crosstalk: dark branching must lie in [0, 1]");
  }
  if (gamma_t == 0.0) return LeakageChannel::identity();
  return {rate_channel_superop(RateModel::reset(gamma_t, pol, dark_branching)), ChannelKind::kReset};
}

/// Depolarizing error of strength p on the computational subspace: the X, Y, Z
/// components shrink by (1 - p); the extra subspace is untouched.
inline LeakageChannel depolarizing(double p) {
  if (!(p >= 0.0 && p <= 4.0 / 3.0)) throw ParameterError("depolarizing: p must lie in [0, 4/3]");
  if (p == 0.0) return LeakageChannel::identity();
  std::vector<Matrix4c> kraus;
  kraus.push_back(std::sqrt(1.0 - 0.75 * p) * Matrix4c::Identity());
  for (Pauli q : {Pauli::kX, Pauli::kY, Pauli::kZ}) {
    kraus.push_back(std::sqrt(0.25 * p) * direct_sum(pauli_matrix(q), Matrix2c::Identity()));
  }
  return {kraus_to_superop(std::span<const Matrix4c>(kraus)), ChannelKind::kDepolarizing};
}

/// Leakage L = 1/2 Tr(Lambda[1_c] 1_e) and seepage S = 1/2 Tr(Lambda[1_e] 1_c), evaluated
/// on operators.
struct LeakageSeepage {
  double leakage = 0.0;
  double seepage = 0.0;
};

inline LeakageSeepage leakage_seepage(const LeakageChannel& ch) {
  Matrix4c id_c = Matrix4c::Zero();
  id_c(0, 0) = id_c(1, 1) = 1.0;
  const Matrix4c id_e = Matrix4c::Identity() - id_c;
  const cplx l = 0.5 * (ch.superop().apply(id_c) * id_e).trace();
  const cplx s = 0.5 * (ch.superop().apply(id_e) * id_c).trace();
  if (std::abs(l.imag()) > 1e-9 || std::abs(s.imag()) > 1e-9) {
    throw RepresentationError("leakage_seepage: complex trace");
  }
  return {l.real(), s.real()};
}

/// Average gate infidelity over pure computational states,
///   1 - 1/2 (<<1_c|M|1_c>> + (M_XX + M_YY + M_ZZ)/3),
/// read directly from the channel (no twirl).
inline double average_infidelity(const LeakageChannel& ch) {
  const auto& m = ch.superop();
  const double diag = (m(1, 1) + m(2, 2) + m(3, 3)).real() / 3.0;
  return 1.0 - 0.5 * (m(0, 0).real() + diag);
}

/// Twirled channel r P_c + t_c |1_c>><<1_c| + L |1_e>><<1_c| + S |1_c>><<1_e| + t_e |1_e>><<1_e|.
struct TwirledChannel {
  double decay_base = 1.0;  // r
  double leakage = 0.0;     // L
  double seepage = 0.0;     // S
  double t_c = 1.0;
  double t_e = 1.0;
  double t_minus = 1.0;
  SuperOperator matrix;     // explicit Clifford average

  /// Closed form of the twirled channel on span{P_c, 1_e}; zero elsewhere.
  SuperOperator closed_form() const {
    SuperMatrix m = SuperMatrix::Zero();
    using namespace basis_index;
    m(kXC, kXC) = m(kYC, kYC) = m(kZC, kZC) = decay_base;
    m(kIdC, kIdC) = t_c;
    m(kIdE, kIdC) = leakage;
    m(kIdC, kIdE) = seepage;
    m(kIdE, kIdE) = t_e;
    return SuperOperator(m);
  }
};

/// Largest entry of `m` outside the restricted leakage structure:
///   Lambda_c (any), Lambda_e with 1_e decoupled from X_e, Y_e, Z_e,
///   transfer terms between 1_e and {1_c, Z_c}, and any cross-to-cross block.
inline double lambda_form_violation(const SuperOperator& m) {
  auto allowed = [](int a, int b) {
    const bool ca = a < 4, cb = b < 4;
    const bool ea = a >= 4 && a < 8, eb = b >= 4 && b < 8;
    const bool xa = a >= 8, xb = b >= 8;
    if (ca && cb) return true;
    if (xa && xb) return true;
    if (ea && eb) return (a == 4) == (b == 4);
    if (a == 4 && (b == 0 || b == 3)) return true;
    if (b == 4 && (a == 0 || a == 3)) return true;
    return false;
  };
  double worst = 0.0;
  for (int a = 0; a < kSuperDim; ++a)
    for (int b = 0; b < kSuperDim; ++b)
      if (!allowed(a, b)) worst = std::max(worst, std::abs(m(a, b)));
  return worst;
}

/// Reads r = Tr(P_c Lambda)/3, L, S, t_c, t_e straight from the channel coefficients.
/// These are invariant under the twirl.
inline TwirledChannel twirl_coefficients(const SuperOperator& m) {
  using namespace basis_index;
  TwirledChannel t;
  t.decay_base = (m(kXC, kXC) + m(kYC, kYC) + m(kZC, kZC)).real() / 3.0;
  t.leakage = m(kIdE, kIdC).real();
  t.seepage = m(kIdC, kIdE).real();
  t.t_c = m(kIdC, kIdC).real();
  t.t_e = m(kIdE, kIdE).real();
  t.t_minus = 1.0 - t.leakage - t.seepage;
  t.matrix = t.closed_form();
  return t;
}

/// Explicit average (1/24) sum_g D_g Lambda D_g^dag over the Clifford group, and the
/// coefficients of the result. Throws AssumptionError when the channel has entries
/// outside the restricted leakage structure above 1e-8.
inline TwirledChannel twirl(const LeakageChannel& ch, double structure_tol = 1e-8) {
  const double violation = lambda_form_violation(ch.superop());
  if (violation > structure_tol) {
    std::ostringstream os;
    os << "twirl: channel violates the incoherent symmetric leakage form (largest forbidden "
       << "coefficient " << violation << ")";
    throw AssumptionError(os.str(), violation);
  }
  const auto& group = clifford_group();
  SuperMatrix sum = SuperMatrix::Zero();
  for (const auto& g : group.elements()) {
    const auto& d = group.superop(g.index).matrix();
    sum += d * ch.superop().matrix() * d.adjoint();
  }
  sum /= static_cast<double>(CliffordGroup::kOrder);
  const SuperOperator avg(sum);
  TwirledChannel out = twirl_coefficients(avg);
  out.matrix = avg;
  return out;
}

/// Eigendecomposition of [[1-L, S], [L, 1-S]] = t+ Pi+ + t- Pi-.
struct DecayEigensystem {
  double t_plus = 1.0;
  double t_minus = 1.0;
  /// Absent when L + S = 0 (the matrix is the identity and Pi+ is undefined).
  std::optional<Eigen::Matrix2d> pi_plus;
  std::optional<Eigen::Matrix2d> pi_minus;
};

inline DecayEigensystem decay_eigensystem(double leakage, double seepage) {
  if (!(leakage >= 0.0 && leakage <= 1.0 && seepage >= 0.0 && seepage <= 1.0)) {
    throw ParameterError("decay_eigensystem: L and S must lie in [0, 1]");
  }
  DecayEigensystem es;
  es.t_minus = 1.0 - leakage - seepage;
  const double sum = leakage + seepage;
  if (sum == 0.0) return es;
  Eigen::Matrix2d plus;
  plus << seepage, seepage, leakage, leakage;
  Eigen::Matrix2d minus;
  minus << leakage, -seepage, -leakage, seepage;
  es.pi_plus = plus / sum;
  es.pi_minus = minus / sum;
  return es;
}

/// The fixed-point matrix itself, for reconstruction checks.
inline Eigen::Matrix2d population_transfer_matrix(double leakage, double seepage) {
  Eigen::Matrix2d m;
  m << 1.0 - leakage, seepage, leakage, 1.0 - seepage;
  return m;
}

}  // namespace mcmr
