#include <complex>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "mcmr/clifford.hpp"

using namespace mcmr;

namespace {

// U1 == U2 up to a global phase.
bool equal_up_to_phase(const Matrix2c& a, const Matrix2c& b) {
  const cplx overlap = (a.adjoint() * b).trace() / 2.0;
  return std::abs(std::abs(overlap) - 1.0) < 1e-10;
}

}  // namespace

TEST(Clifford, HasTwentyFourDistinctUnitaries) {
  const auto& g = clifford_group();
  ASSERT_EQ(g.elements().size(), 24u);
  for (int a = 0; a < 24; ++a) {
    EXPECT_TRUE(is_unitary(g[a].unitary));
    for (int b = a + 1; b < 24; ++b) EXPECT_FALSE(equal_up_to_phase(g[a].unitary, g[b].unitary));
  }
  EXPECT_TRUE(equal_up_to_phase(g[g.identity()].unitary, Matrix2c::Identity()));
}

TEST(Clifford, ImagesMatchMatrices) {
  const auto& g = clifford_group();
  for (const auto& e : g.elements()) {
    for (Pauli p : {Pauli::kX, Pauli::kY, Pauli::kZ}) {
      const SignedPauli img = e.conjugate({1, p});
      const Matrix2c lhs = e.unitary * pauli_matrix(p) * e.unitary.adjoint();
      EXPECT_LT((lhs - double(img.sign) * pauli_matrix(img.axis)).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Clifford, CompositionMatchesMatrixProduct) {
  const auto& g = clifford_group();
  for (int a = 0; a < 24; ++a)
    for (int b = 0; b < 24; ++b)
      EXPECT_TRUE(equal_up_to_phase(g[g.compose(a, b)].unitary, g[a].unitary * g[b].unitary));
}

TEST(Clifford, InverseAndPaulis) {
  const auto& g = clifford_group();
  for (int a = 0; a < 24; ++a) EXPECT_EQ(g.compose(a, g.inverse(a)), g.identity());
  for (Pauli p : kAllPaulis) EXPECT_TRUE(equal_up_to_phase(g[g.pauli_element(p)].unitary, pauli_matrix(p)));
}

TEST(Clifford, InversionRealizesPauliOnStateVector) {
  const auto& g = clifford_group();
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> pick(0, 23);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> seq(static_cast<std::size_t>(1 + trial % 30));
    for (auto& c : seq) c = pick(rng);
    const Pauli p = kAllPaulis[static_cast<std::size_t>(trial % 4)];
    Eigen::Vector2cd psi(1, 0);
    for (int c : seq) psi = g[c].unitary * psi;
    psi = g[g.inversion_for(seq, p)].unitary * psi;
    // Ideal final state is P|0>: |0> for 1, Z and |1> for X, Y.
    const int expected = target_outcome(p);
    EXPECT_NEAR(std::norm(psi(expected)), 1.0, 1e-10);
  }
}

TEST(Clifford, SuperopsAreRealUnitaryChannels) {
  const auto& g = clifford_group();
  for (int a = 0; a < 24; ++a) {
    const auto& s = g.superop(a);
    EXPECT_LT(s.max_imag(), 1e-14);
    EXPECT_TRUE(s.is_trace_preserving(1e-12));
    const SuperMatrix prod = s.matrix() * s.matrix().adjoint();
    EXPECT_LT((prod - SuperMatrix::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Clifford, PauliLabels) {
  for (Pauli p : kAllPaulis) EXPECT_EQ(pauli_from_char(pauli_char(p)), p);
  EXPECT_THROW(pauli_from_char('Q'), ParameterError);
  EXPECT_EQ(target_outcome(Pauli::kI), 0);
  EXPECT_EQ(target_outcome(Pauli::kZ), 0);
  EXPECT_EQ(target_outcome(Pauli::kX), 1);
  EXPECT_EQ(target_outcome(Pauli::kY), 1);
}
