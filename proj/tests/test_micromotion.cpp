#include <cmath>
#include <numbers>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include "mcmr/micromotion.hpp"

namespace {

using Big = boost::multiprecision::cpp_bin_float_50;

// Power series J0(x) = sum_m (-1)^m (x/2)^(2m) / (m!)^2 in 50-digit arithmetic.
Big j0_series(const Big& x) {
  Big term = 1, sum = 1;
  const Big q = -(x * x) / 4;
  for (int m = 1; m < 200; ++m) {
    term *= q / (Big(m) * Big(m));
    sum += term;
    if (abs(term) < Big("1e-45")) break;
  }
  return sum;
}

// Plain bisection on the series.
double j0_root_oracle(double lo, double hi) {
  Big a = lo, b = hi;
  const bool neg_at_a = j0_series(a) < 0;
  for (int i = 0; i < 200; ++i) {
    const Big m = (a + b) / 2;
    if ((j0_series(m) < 0) == neg_at_a) a = m;
    else b = m;
  }
  return static_cast<double>((a + b) / 2);
}

mcmr::MicromotionConfig yb_like() {
  mcmr::MicromotionConfig c;
  c.rf_frequency = 2 * std::numbers::pi * 45e6;
  c.secular_frequency = 2 * std::numbers::pi * 2e6;
  c.linewidth = 2 * std::numbers::pi * 19.6e6;
  c.wavenumber = 2 * std::numbers::pi / 369.5e-9;
  return c;
}

}  // namespace

TEST(Micromotion, FirstNullMatchesSeriesBisection) {
  EXPECT_NEAR(mcmr::first_null_modulation_index(), j0_root_oracle(2.0, 3.0), 1e-11);
  EXPECT_NEAR(mcmr::first_null_modulation_index(), 2.404825557695773, 1e-10);
}

TEST(Micromotion, SecondNullMatchesSeriesBisection) {
  EXPECT_NEAR(mcmr::second_null_modulation_index(), j0_root_oracle(4.0, 7.0), 1e-11);
}

TEST(Micromotion, RootRejectsBadBracket) {
  EXPECT_THROW(mcmr::bessel_j0_root(0.0, 1.0), mcmr::ParameterError);
}

TEST(Micromotion, SuppressionIsOneAtZeroIndex) {
  EXPECT_DOUBLE_EQ(mcmr::suppression_factor(0.0, 2.0), 1.0);
}

TEST(Micromotion, SuppressionMatchesLongDirectSum) {
  for (double n : {0.3, 1.1, 2.404825557695773, 3.7, 5.52}) {
    for (double ratio : {0.5, 2.0, 10.0}) {
      double direct = std::pow(std::cyl_bessel_j(0.0, n), 2);
      for (int v = 1; v <= 120; ++v) {
        direct += 2 * std::pow(std::cyl_bessel_j(double(v), n), 2) / (1 + 4.0 * v * v * ratio * ratio);
      }
      EXPECT_NEAR(mcmr::suppression_factor(n, ratio), direct, 1e-14) << "n=" << n << " ratio=" << ratio;
    }
  }
}

TEST(Micromotion, SuppressionWithoutSidebandPenaltyIsOne) {
  // With Omega/Gamma -> 0 the sidebands are not resolved and sum J_v^2 = 1.
  EXPECT_NEAR(mcmr::suppression_factor(3.1, 1e-9), 1.0, 1e-12);
  EXPECT_THROW(mcmr::suppression_factor(3.1, 0.0), mcmr::ParameterError);
}

TEST(Micromotion, TenfoldSuppressionAtNullForResolvedSidebands) {
  const double n1 = mcmr::first_null_modulation_index();
  for (double ratio : {2.0, 3.0, 10.0}) {
    EXPECT_LE(mcmr::suppression_factor(n1, ratio), 0.1 * mcmr::suppression_factor(0.0, ratio));
  }
}

TEST(Micromotion, ModulationIndexIsLinearInDisplacement) {
  auto c = yb_like();
  c.displacement = 1e-6;
  const double n1 = mcmr::modulation_index(c);
  c.displacement = 3e-6;
  EXPECT_NEAR(mcmr::modulation_index(c), 3 * n1, 1e-12);
  // sqrt(2) omega r / Omega * k
  EXPECT_NEAR(n1, std::sqrt(2.0) * (2.0 / 45.0) * 1e-6 * (2 * std::numbers::pi / 369.5e-9), 1e-12);
}

TEST(Micromotion, DisplacementInvertsIndex) {
  auto c = yb_like();
  c.beam_angle = 0.3;
  const double r = mcmr::displacement_for_index(c, 2.4048);
  c.displacement = r;
  EXPECT_NEAR(mcmr::modulation_index(c), 2.4048, 1e-12);
}

TEST(Micromotion, OrthogonalBeamCannotBeTuned) {
  auto c = yb_like();
  c.beam_angle = std::numbers::pi / 2;
  EXPECT_THROW(mcmr::displacement_for_index(c, 1.0), mcmr::ParameterError);
}

TEST(Micromotion, InvalidConfigRejected) {
  auto c = yb_like();
  c.linewidth = 0.0;
  EXPECT_THROW(mcmr::modulation_index(c), mcmr::ParameterError);
  c = yb_like();
  c.displacement = -1.0;
  EXPECT_THROW(mcmr::modulation_index(c), mcmr::ParameterError);
}

TEST(Micromotion, NegativeIndexRejected) {
  EXPECT_THROW(mcmr::suppression_factor(-1.0, 2.0), mcmr::ParameterError);
}
