#pragma once

// Bounded nonlinear least-squares fits for the benchmarking decays and the depumping curve.

#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <ceres/ceres.h>

#include "mcmr/errors.hpp"

namespace mcmr::rb {

/// Points (x, y) to fit.
struct Series {
  std::vector<double> x;
  std::vector<double> y;

  std::size_t size() const { return x.size(); }
  void validate(std::size_t min_points, const char* who) const {
    if (x.size() != y.size()) throw ShapeError(std::string(who) + ": x and y differ in length");
    if (x.size() < min_points) {
      std::ostringstream os;
      os << who << ": need at least " << min_points << " points, got " << x.size();
      throw FitError(os.str(), {});
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw FitError(std::string(who) + ": non-finite data", {});
    }
  }
};

/// Outcome of a fit: parameters, covariance s^2 (J^T J)^+, residuals.
struct FitResult {
  std::vector<double> params;
  Eigen::MatrixXd covariance;  // NaN when there are no degrees of freedom
  std::vector<double> residuals;
  double cost = 0.0;
  int iterations = 0;

  double sigma(std::size_t i) const {
    const double v = covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    return std::isfinite(v) ? std::sqrt(std::max(v, 0.0)) : v;
  }
};

namespace detail {

template <typename Model, int N>
struct PointResidual {
  double x, y;
  template <typename T>
  bool operator()(const T* const p, T* r) const {
    r[0] = Model::eval(p, T(x)) - T(y);
    return true;
  }
};

template <typename Model, int N>
FitResult solve(const Series& s, std::array<double, N> init, const std::array<double, N>& lo,
                const std::array<double, N>& hi, const std::array<bool, N>& fixed, const char* who) {
  ceres::Problem problem;
  double* p = init.data();
  for (std::size_t i = 0; i < s.size(); ++i) {
    problem.AddResidualBlock(
        new ceres::AutoDiffCostFunction<PointResidual<Model, N>, 1, N>(new PointResidual<Model, N>{s.x[i], s.y[i]}),
        nullptr, p);
  }
  std::vector<int> constant;
  for (int k = 0; k < N; ++k) {
    if (fixed[static_cast<std::size_t>(k)]) constant.push_back(k);
  }
  if (!constant.empty()) problem.SetParameterization(p, new ceres::SubsetParameterization(N, constant));
  for (int k = 0; k < N; ++k) {
    if (fixed[static_cast<std::size_t>(k)]) continue;
    problem.SetParameterLowerBound(p, k, lo[static_cast<std::size_t>(k)]);
    problem.SetParameterUpperBound(p, k, hi[static_cast<std::size_t>(k)]);
  }

  ceres::Solver::Options opt;
  opt.linear_solver_type = ceres::DENSE_QR;
  opt.max_num_iterations = 500;
  opt.function_tolerance = 1e-15;
  opt.gradient_tolerance = 1e-16;
  opt.parameter_tolerance = 1e-14;
  opt.logging_type = ceres::SILENT;
  opt.num_threads = 1;
  ceres::Solver::Summary summary;
  ceres::Solve(opt, &problem, &summary);

  FitResult out;
  out.params.assign(init.begin(), init.end());
  out.iterations = static_cast<int>(summary.iterations.size());
  out.cost = summary.final_cost;
  out.residuals.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out.residuals[i] = Model::eval(p, s.x[i]) - s.y[i];

  const bool finite = std::all_of(out.params.begin(), out.params.end(), [](double v) { return std::isfinite(v); });
  if (!summary.IsSolutionUsable() || !finite) {
    throw FitError(std::string(who) + ": solver did not converge (" + summary.message + ")", out.residuals);
  }

  // Covariance from the numerically exact Jacobian at the optimum, free parameters only.
  std::vector<int> free_idx;
  for (int k = 0; k < N; ++k)
    if (!fixed[static_cast<std::size_t>(k)]) free_idx.push_back(k);
  const auto m = static_cast<Eigen::Index>(s.size());
  const auto nf = static_cast<Eigen::Index>(free_idx.size());
  Eigen::MatrixXd jac(m, nf);
  for (Eigen::Index i = 0; i < m; ++i) {
    using Jet = ceres::Jet<double, N>;
    std::array<Jet, N> pj;
    for (int k = 0; k < N; ++k) pj[static_cast<std::size_t>(k)] = Jet(p[k], k);
    const Jet v = Model::eval(pj.data(), Jet(s.x[static_cast<std::size_t>(i)]));
    for (Eigen::Index c = 0; c < nf; ++c) jac(i, c) = v.v[free_idx[static_cast<std::size_t>(c)]];
  }
  out.covariance = Eigen::MatrixXd::Constant(N, N, std::numeric_limits<double>::quiet_NaN());
  const Eigen::Index dof = m - nf;
  if (dof > 0) {
    double ss = 0.0;
    for (double r : out.residuals) ss += r * r;
    const double s2 = ss / static_cast<double>(dof);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::MatrixXd inv = jtj.completeOrthogonalDecomposition().pseudoInverse();
    for (Eigen::Index a = 0; a < N; ++a)
      for (Eigen::Index b = 0; b < N; ++b) out.covariance(a, b) = 0.0;
    for (Eigen::Index a = 0; a < nf; ++a)
      for (Eigen::Index b = 0; b < nf; ++b) out.covariance(free_idx[a], free_idx[b]) = s2 * inv(a, b);
  }
  return out;
}

struct StandardModel {
  template <typename T>
  static T eval(const T* p, T l) { return p[0] * pow(p[1], l) + T(0.5); }
};

struct LeakageModel {
  template <typename T>
  static T eval(const T* p, T l) { return p[0] * pow(p[2], l + T(1.0)) + p[1]; }
};

struct DepumpModel {
  template <typename T>
  static T eval(const T* p, T t) { return p[0] * (T(1.0) - exp(T(-3.0) * p[1] * t)); }
};

}  // namespace detail

/// p(l) = A r^l + 1/2.
struct StandardFit {
  double amplitude = 0.0;
  double decay_base = 1.0;
  FitResult raw;
};

inline StandardFit fit_standard(const Series& s) {
  s.validate(3, "fit_standard");
  // Seed r from the first and last points; A from the first.
  const double a0 = std::clamp(s.y.front() - 0.5, 1e-3, 0.5);
  const double alast = std::clamp(s.y.back() - 0.5, 1e-4, 0.5);
  const double span = std::max(s.x.back() - s.x.front(), 1.0);
  const double r0 = std::clamp(std::pow(alast / a0, 1.0 / span), 0.5, 1.0 - 1e-9);
  const double amp0 = std::clamp(a0 / std::pow(r0, s.x.front()), -1.0, 1.0);
  auto res = detail::solve<detail::StandardModel, 2>(s, {amp0, r0}, {-1.0, 1e-9}, {1.0, 1.0}, {false, false},
                                                      "fit_standard");
  return {res.params[0], res.params[1], std::move(res)};
}

/// p_L(l) = B0 t^(l+1) + C0 with L = 2 B0 (1 - t), S = 2 C0 (1 - t).
struct LeakageFit {
  double b0 = 0.0;
  double c0 = 0.5;
  double t_minus = 1.0;
  double leakage = 0.0;
  double seepage = 0.0;
  FitResult raw;
};

/// `ls_ratio` is the expected L/S used to seed the split between B0 and C0: 1 for
/// measurement crosstalk, below 1 for reset.
inline LeakageFit fit_leakage(const Series& s, double ls_ratio = 1.0) {
  s.validate(3, "fit_leakage");
  if (!(ls_ratio >= 0.0 && std::isfinite(ls_ratio))) throw ParameterError("fit_leakage: L/S ratio must be >= 0");
  // The population in the computational subspace relaxes towards S/(L+S) (scaled by
  // readout); the intercept share of the decaying part is L/(L+S).
  const double total = std::clamp(s.y.front(), 0.05, 1.0);
  const double b_init = total * ls_ratio / (1.0 + ls_ratio);
  const double c_init = total - b_init;
  const double drop = std::max(s.y.front() - s.y.back(), 1e-6);
  const double span = std::max(s.x.back() - s.x.front(), 1.0);
  const double t_init = std::clamp(1.0 - drop / (std::max(b_init, 1e-3) * span), 0.5, 1.0 - 1e-7);
  auto res = detail::solve<detail::LeakageModel, 3>(s, {b_init, c_init, t_init}, {0.0, 0.0, 1e-9}, {1.0, 1.0, 1.0},
                                                     {false, false, false}, "fit_leakage");
  LeakageFit out;
  out.b0 = res.params[0];
  out.c0 = res.params[1];
  out.t_minus = res.params[2];
  if (!(out.t_minus > 0.0 && out.t_minus <= 1.0)) throw FitError("fit_leakage: t outside (0, 1]", res.residuals);
  out.leakage = 2.0 * out.b0 * (1.0 - out.t_minus);
  out.seepage = 2.0 * out.c0 * (1.0 - out.t_minus);
  out.raw = std::move(res);
  return out;
}

/// p(t) = a (1 - exp(-3 gamma t)); a is pinned at 2/3 unless `free_amplitude`.
struct DepumpFit {
  double amplitude = 2.0 / 3.0;
  double gamma = 0.0;
  double gamma_sigma = 0.0;
  double amplitude_sigma = 0.0;
  /// 1/gamma and its propagated uncertainty; infinite when gamma is zero.
  double time_constant = std::numeric_limits<double>::infinity();
  double time_constant_sigma = std::numeric_limits<double>::infinity();
  FitResult raw;
};

inline DepumpFit fit_depump(const Series& s, bool free_amplitude = false) {
  s.validate(4, "fit_depump");
  const double tmax = *std::max_element(s.x.begin(), s.x.end());
  if (!(tmax > 0.0)) throw FitError("fit_depump: times must include a positive value", {});
  // Seed gamma from the largest time point.
  std::size_t imax = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s.x[i] > s.x[imax]) imax = i;
  const double frac = std::clamp(s.y[imax] / (2.0 / 3.0), 1e-6, 0.95);
  const double g0 = -std::log1p(-frac) / (3.0 * s.x[imax]);
  auto res = detail::solve<detail::DepumpModel, 2>(s, {2.0 / 3.0, g0}, {0.0, 0.0},
                                                    {1.0, std::numeric_limits<double>::max()},
                                                    {!free_amplitude, false}, "fit_depump");
  DepumpFit out;
  out.amplitude = res.params[0];
  out.gamma = res.params[1];
  out.gamma_sigma = res.sigma(1);
  out.amplitude_sigma = free_amplitude ? res.sigma(0) : 0.0;
  // A rate whose total effect over the scan is below 1e-9 is indistinguishable from zero.
  if (out.gamma * 3.0 * tmax < 1e-9) out.gamma = 0.0;
  if (out.gamma > 0.0) {
    out.time_constant = 1.0 / out.gamma;
    out.time_constant_sigma = out.gamma_sigma / (out.gamma * out.gamma);
  }
  out.raw = std::move(res);
  return out;
}

}  // namespace mcmr::rb
