#pragma once

// Liouville representation of operators and channels on the 4-level ion space
// H = H_c (+) H_e, H_c = span{|0>,|1>}, H_e = span{|2>,|3>}.
//
// Operators are expanded in a fixed Hilbert-Schmidt orthonormal basis {P_i}:
//   0..3   (1_c, X_c, Y_c, Z_c) / sqrt(2)
//   4..7   (1_e, X_e, Y_e, Z_e) / sqrt(2)
//   8..15  X_ce,ij and Y_ce,ij / sqrt(2) for (i, j) in (0,2), (0,3), (1,2), (1,3),
//          X before Y within each pair, with
//            X_ce,ij = |i><j| + |j><i|,   Y_ce,ij = -i|i><j| + i|j><i|.
// A superoperator M has entries M(a, b) = Tr(P_a^dag Lambda[P_b]).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcmr/errors.hpp"

namespace mcmr {

using cplx = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;

inline constexpr int kSuperDim = 16;

using SuperMatrix = Eigen::Matrix<cplx, kSuperDim, kSuperDim>;
using SuperCoeffs = Eigen::Matrix<cplx, kSuperDim, 1>;

namespace basis_index {
inline constexpr int kIdC = 0, kXC = 1, kYC = 2, kZC = 3;
inline constexpr int kIdE = 4, kXE = 5, kYE = 6, kZE = 7;
inline constexpr int kCrossBegin = 8;
}  // namespace basis_index

enum class BasisKind { kPauliC, kPauliE, kCross };

struct BasisElement {
  int index = 0;
  BasisKind kind = BasisKind::kPauliC;
  std::string label;
  Matrix4c matrix = Matrix4c::Zero();
};

namespace detail {

inline std::array<BasisElement, kSuperDim> build_basis() {
  using namespace std::complex_literals;
  const double s = 1.0 / std::numbers::sqrt2;
  Matrix2c id = Matrix2c::Identity();
  Matrix2c x, y, z;
  x << 0, 1, 1, 0;
  y << 0, -1i, 1i, 0;
  z << 1, 0, 0, -1;
  const std::array<Matrix2c, 4> paulis{id, x, y, z};
  const std::array<const char*, 4> names{"I", "X", "Y", "Z"};

  std::array<BasisElement, kSuperDim> out;
  for (int k = 0; k < 4; ++k) {
    auto& c = out[static_cast<std::size_t>(k)];
    c.index = k;
    c.kind = BasisKind::kPauliC;
    c.label = std::string(names[static_cast<std::size_t>(k)]) + "_c";
    c.matrix.setZero();
    c.matrix.topLeftCorner<2, 2>() = s * paulis[static_cast<std::size_t>(k)];

    auto& e = out[static_cast<std::size_t>(k + 4)];
    e.index = k + 4;
    e.kind = BasisKind::kPauliE;
    e.label = std::string(names[static_cast<std::size_t>(k)]) + "_e";
    e.matrix.setZero();
    e.matrix.bottomRightCorner<2, 2>() = s * paulis[static_cast<std::size_t>(k)];
  }
  int idx = basis_index::kCrossBegin;
  for (int i = 0; i < 2; ++i) {
    for (int j = 2; j < 4; ++j) {
      auto& bx = out[static_cast<std::size_t>(idx)];
      bx.index = idx++;
      bx.kind = BasisKind::kCross;
      bx.label = "X_ce" + std::to_string(i) + std::to_string(j);
      bx.matrix.setZero();
      bx.matrix(i, j) = s;
      bx.matrix(j, i) = s;

      auto& by = out[static_cast<std::size_t>(idx)];
      by.index = idx++;
      by.kind = BasisKind::kCross;
      by.label = "Y_ce" + std::to_string(i) + std::to_string(j);
      by.matrix.setZero();
      by.matrix(i, j) = -1i * s;
      by.matrix(j, i) = 1i * s;
    }
  }
  return out;
}

// Columns are vec(P_i) in column-stacking order.
inline SuperMatrix build_basis_change() {
  const auto basis = build_basis();
  SuperMatrix b;
  for (int i = 0; i < kSuperDim; ++i) {
    const auto& m = basis[static_cast<std::size_t>(i)].matrix;
    for (int col = 0; col < 4; ++col)
      for (int row = 0; row < 4; ++row) b(col * 4 + row, i) = m(row, col);
  }
  return b;
}

}  // namespace detail

/// The 16 orthonormal basis operators, in the fixed order documented above.
inline const std::array<BasisElement, kSuperDim>& standard_basis() {
  static const std::array<BasisElement, kSuperDim> basis = detail::build_basis();
  return basis;
}

inline const SuperMatrix& basis_change() {
  static const SuperMatrix b = detail::build_basis_change();
  return b;
}

/// Coefficients of an operator (state or effect) in the standard basis.
class SuperVector {
 public:
  SuperVector() : c_(SuperCoeffs::Zero()) {}
  explicit SuperVector(const SuperCoeffs& c) : c_(c) {}

  static SuperVector from_operator(const Matrix4c& op) {
    SuperCoeffs c;
    const auto& basis = standard_basis();
    for (int i = 0; i < kSuperDim; ++i) {
      c(i) = (basis[static_cast<std::size_t>(i)].matrix.adjoint() * op).trace();
    }
    return SuperVector(c);
  }

  /// |level><level|
  static SuperVector projector(int level) {
    Matrix4c m = Matrix4c::Zero();
    m(level, level) = 1.0;
    return from_operator(m);
  }

  static SuperVector identity() { return from_operator(Matrix4c::Identity()); }

  Matrix4c to_operator() const {
    Matrix4c m = Matrix4c::Zero();
    const auto& basis = standard_basis();
    for (int i = 0; i < kSuperDim; ++i) m += c_(i) * basis[static_cast<std::size_t>(i)].matrix;
    return m;
  }

  const SuperCoeffs& coeffs() const { return c_; }
  SuperCoeffs& coeffs() { return c_; }
  cplx operator[](int i) const { return c_(i); }

  SuperVector operator+(const SuperVector& o) const { return SuperVector(c_ + o.c_); }
  SuperVector operator-(const SuperVector& o) const { return SuperVector(c_ - o.c_); }
  SuperVector operator*(double s) const { return SuperVector(c_ * s); }

 private:
  SuperCoeffs c_;
};

/// <<a|b>> = Tr(a^dag b).
inline cplx inner(const SuperVector& a, const SuperVector& b) { return a.coeffs().dot(b.coeffs()); }

class SuperOperator {
 public:
  SuperOperator() : m_(SuperMatrix::Identity()) {}
  explicit SuperOperator(const SuperMatrix& m) : m_(m) {}

  static SuperOperator identity() { return SuperOperator(); }

  /// Builds the superoperator of an arbitrary linear map on 4x4 operators.
  template <class Map>
  static SuperOperator from_action(Map&& action) {
    const auto& basis = standard_basis();
    SuperMatrix m;
    for (int b = 0; b < kSuperDim; ++b) {
      const Matrix4c image = action(basis[static_cast<std::size_t>(b)].matrix);
      for (int a = 0; a < kSuperDim; ++a) {
        m(a, b) = (basis[static_cast<std::size_t>(a)].matrix.adjoint() * image).trace();
      }
    }
    return SuperOperator(m);
  }

  const SuperMatrix& matrix() const { return m_; }
  cplx operator()(int a, int b) const { return m_(a, b); }

  /// Composition: (A * B) applies B first.
  SuperOperator operator*(const SuperOperator& o) const { return SuperOperator(m_ * o.m_); }
  SuperVector operator*(const SuperVector& v) const { return SuperVector(m_ * v.coeffs()); }

  SuperOperator adjoint() const { return SuperOperator(m_.adjoint()); }

  Matrix4c apply(const Matrix4c& rho) const {
    return (*this * SuperVector::from_operator(rho)).to_operator();
  }

  /// <<1| M == <<1| within `tol` (max abs deviation).
  bool is_trace_preserving(double tol = 1e-10) const { return trace_deviation() <= tol; }

  double trace_deviation() const {
    const SuperCoeffs one = SuperVector::identity().coeffs();
    const Eigen::Matrix<cplx, 1, kSuperDim> row = one.adjoint() * m_;
    return (row - one.adjoint()).cwiseAbs().maxCoeff();
  }

  /// Largest imaginary part of any entry.
  double max_imag() const { return m_.imag().cwiseAbs().maxCoeff(); }

 private:
  SuperMatrix m_;
};

/// Sum_i A_i^* (x) A_i expressed in the standard basis.
inline SuperOperator kraus_to_superop(std::span<const Matrix4c> kraus) {
  if (kraus.empty()) throw ShapeError("kraus_to_superop: need at least one Kraus operator");
  SuperMatrix vec = SuperMatrix::Zero();
  for (const auto& a : kraus) {
    if (a.rows() != 4 || a.cols() != 4) throw ShapeError("kraus_to_superop: Kraus operators must be 4x4");
    const Matrix4c ac = a.conjugate();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) vec.block<4, 4>(i * 4, j * 4) += ac(i, j) * a;
  }
  const SuperMatrix& b = basis_change();
  return SuperOperator(b.adjoint() * vec * b);
}

/// Overload for dynamically sized inputs; validates the shape of each operator.
inline SuperOperator kraus_to_superop(const std::vector<Eigen::MatrixXcd>& kraus) {
  std::vector<Matrix4c> fixed;
  fixed.reserve(kraus.size());
  for (const auto& a : kraus) {
    if (a.rows() != 4 || a.cols() != 4) throw ShapeError("kraus_to_superop: Kraus operators must be 4x4");
    fixed.emplace_back(a);
  }
  return kraus_to_superop(std::span<const Matrix4c>(fixed));
}

/// Sum_i A_i^dag A_i == 1 within `tol`.
inline bool kraus_is_trace_preserving(std::span<const Matrix4c> kraus, double tol = 1e-10) {
  Matrix4c s = Matrix4c::Zero();
  for (const auto& a : kraus) s += a.adjoint() * a;
  return (s - Matrix4c::Identity()).cwiseAbs().maxCoeff() <= tol;
}

/// Born rule <<E|rho>> for an effect and a state; tiny excursions outside [0, 1] are
/// clamped.
inline double born_probability(const SuperVector& effect, const SuperVector& state) {
  const cplx p = inner(effect, state);
  if (std::abs(p.imag()) > 1e-9) {
    throw RepresentationError("born_probability: complex residue " + std::to_string(p.imag()));
  }
  if (p.real() < -1e-9 || p.real() > 1.0 + 1e-9) {
    throw RepresentationError("born_probability: value " + std::to_string(p.real()) + " outside [0, 1]");
  }
  return std::clamp(p.real(), 0.0, 1.0);
}

inline bool is_unitary(const Matrix2c& u, double tol = 1e-10) {
  return (u.adjoint() * u - Matrix2c::Identity()).cwiseAbs().maxCoeff() <= tol;
}

inline Matrix4c direct_sum(const Matrix2c& vc, const Matrix2c& we) {
  Matrix4c u = Matrix4c::Zero();
  u.topLeftCorner<2, 2>() = vc;
  u.bottomRightCorner<2, 2>() = we;
  return u;
}

/// Superoperator of the block unitary U = V_c (+) W_e.
inline SuperOperator embed_gate(const Matrix2c& vc, const Matrix2c& we = Matrix2c::Identity()) {
  if (!is_unitary(vc) || !is_unitary(we)) throw ParameterError("embed_gate: blocks must be unitary");
  const std::array<Matrix4c, 1> k{direct_sum(vc, we)};
  return kraus_to_superop(std::span<const Matrix4c>(k));
}

/// Index range [begin, end) of an operator subspace.
struct IndexRange {
  int begin;
  int end;
};
inline constexpr IndexRange kComputationalOps{0, 4};
inline constexpr IndexRange kExtraOps{4, 8};
inline constexpr IndexRange kCrossOps{8, 16};

/// Largest |M(a, b)| with a in `rows`, b in `cols`.
inline double max_block_magnitude(const SuperOperator& m, IndexRange rows, IndexRange cols) {
  double worst = 0.0;
  for (int a = rows.begin; a < rows.end; ++a)
    for (int b = cols.begin; b < cols.end; ++b) worst = std::max(worst, std::abs(m(a, b)));
  return worst;
}

/// Debug dump: real parts as a 16x16 CSV grid at full precision.
inline void write_superop_csv(std::ostream& os, const SuperOperator& m) {
  char buf[32];
  for (int a = 0; a < kSuperDim; ++a) {
    for (int b = 0; b < kSuperDim; ++b) {
      std::snprintf(buf, sizeof buf, "%.17g", m(a, b).real());
      os << buf << (b + 1 < kSuperDim ? "," : "\n");
    }
  }
}

}  // namespace mcmr
