// Acceptance suite: one PASS/FAIL line per criterion. Tolerances and trial counts are
// fixed here; a criterion's wall time counts against its budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "channel_fixtures.hpp"
#include "mcmr/micromotion.hpp"
#include "mcmr/rate_model.hpp"
#include "mcmr/rb/depump.hpp"
#include "mcmr/rb/experiment.hpp"
#include "mcmr/rb/sweep.hpp"

using namespace mcmr;
using namespace mcmr::rb;

namespace {

constexpr std::uint64_t kSeed = 20240611;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------- 1

Outcome bessel_null() {
  constexpr double kExpected = 2.404825557, kTol = 1e-8;
  const double n1 = first_null_modulation_index();
  bool ok = std::abs(n1 - kExpected) <= kTol;
  double worst = 0.0;
  for (double ratio : {2.0, 2.3, 3.0, 5.0, 10.0, 50.0}) {
    const double rel = suppression_factor(n1, ratio) / suppression_factor(0.0, ratio);
    worst = std::max(worst, rel);
  }
  ok = ok && worst <= 0.1;
  return {ok, format("n1=%.12f |dn|=%.2e (tol %.0e); worst S(n1)/S(0) for Omega/Gamma>=2: %.4f (need <=0.1)", n1,
                     std::abs(n1 - kExpected), kTol, worst)};
}

// ---------------------------------------------------------------- 2

Outcome rate_closed_form() {
  constexpr double kTol = 1e-10;
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> lg(-4.0, 3.0), lt(-4.0, 0.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double gamma = std::pow(10.0, lg(rng)), t = std::pow(10.0, lt(rng));
    const auto p = rate_evolve(RateModel::equal_rates(gamma), Populations::basis(1), t);
    const double e = std::exp(-3 * gamma * t);
    worst = std::max({worst, std::abs(p[1] - 2.0 / 3.0 * (e + 0.5)), std::abs(p[2] - (1 - e) / 3),
                      std::abs(p[3] - (1 - e) / 3), std::abs(p[0])});
  }
  return {worst <= kTol, format("100 random (gamma, t): max deviation %.2e (tol %.0e)", worst, kTol)};
}

// ---------------------------------------------------------------- 3

Outcome depump_round_trip() {
  constexpr double kTau = 6.4e-3, kRelTol = 0.05;
  constexpr int kTrials = 20, kNeeded = 18;
  DepumpSimulation sim{RateModel::equal_rates(1.0 / kTau), 1.0, 1000};
  std::vector<double> times;
  for (int i = 1; i <= 10; ++i) times.push_back(1e-3 * i);
  int ok = 0;
  double worst = 0.0;
  for (int k = 0; k < kTrials; ++k) {
    const auto s = simulate_depump(sim, times, derive_seed(kSeed, {stream_tag::kTrial, 3, static_cast<std::uint64_t>(k)}));
    const auto f = fit_depump(s);
    const double rel = std::abs(f.time_constant / kTau - 1.0);
    worst = std::max(worst, rel);
    ok += rel < kRelTol;
  }
  return {ok >= kNeeded, format("1/gamma within 5%% of 6.4 ms in %d/%d trials (need %d); worst %.1f%%", ok, kTrials,
                                kNeeded, 100 * worst)};
}

// ---------------------------------------------------------------- 4

SuperOperator operator_space_twirl(const LeakageChannel& ch) {
  const auto& g = clifford_group();
  return SuperOperator::from_action([&](const Matrix4c& rho) {
    Matrix4c acc = Matrix4c::Zero();
    for (const auto& e : g.elements()) {
      const Matrix4c u = direct_sum(e.unitary, Matrix2c::Identity());
      acc += u * ch.superop().apply(u.adjoint() * rho * u) * u.adjoint();
    }
    return Matrix4c(acc / 24.0);
  });
}

Outcome twirl_equivalence() {
  constexpr double kTol = 1e-10;
  std::mt19937_64 rng(kSeed + 4);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto ch = fixtures::random_lambda_form_channel(rng, 0.1);
    const auto tw = twirl(ch);
    const SuperMatrix avg = operator_space_twirl(ch).matrix();
    const SuperMatrix closed = tw.closed_form().matrix();
    worst = std::max(worst, (tw.matrix.matrix() - avg).cwiseAbs().maxCoeff());
    worst = std::max(worst, (avg.block<5, 5>(0, 0) - closed.block<5, 5>(0, 0)).cwiseAbs().maxCoeff());
    worst = std::max(worst, avg.block<5, 11>(0, 5).cwiseAbs().maxCoeff());
    worst = std::max(worst, avg.block<11, 5>(5, 0).cwiseAbs().maxCoeff());
  }
  return {worst <= kTol, format("20 random channels: max deviation from closed form %.2e (tol %.0e)", worst, kTol)};
}

// ---------------------------------------------------------------- 5

Outcome decay_law() {
  constexpr double kExactTol = 1e-10, kSigmas = 3.0;
  std::mt19937_64 rng(kSeed + 5);
  const SpamModel spam{0.01, 0.003, 0.02, 0.03};
  std::vector<LeakageChannel> channels{measurement_crosstalk(2.7e-3), reset_crosstalk(0.01),
                                       fixtures::random_lambda_form_channel(rng, 0.05)};
  double worst_exact = 0.0, worst_z = 0.0;
  for (const auto& ch : channels) {
    const SurvivalEngine engine(ch, spam);
    const auto coeff = decay_coefficients(twirl(ch), spam);
    for (int l = 0; l <= 3; ++l)
      for (Pauli p : kAllPaulis)
        for (int k = 0; k < 2; ++k)
          worst_exact = std::max(worst_exact, std::abs(engine.exact_group_average(l, p, k) - coeff.predict(p, k, l)));

    for (int l : {2, 11, 81}) {
      const auto seqs = generate_sequences(std::vector<int>{l}, 500, kSeed + static_cast<std::uint64_t>(l));
      // Survival of the target outcome, and the dark (leakage-analysis) probability.
      double expect_surv = 0.0, expect_dark = 0.0;
      for (Pauli p : kAllPaulis) {
        expect_surv += 0.25 * coeff.predict(p, target_outcome(p), l);
        expect_dark += 0.25 * coeff.predict(p, 0, l);
      }
      std::vector<double> surv, dark;
      for (const auto& s : seqs) {
        surv.push_back(engine.survival(s));
        dark.push_back(engine.dark_probability(s));
      }
      for (auto [v, expect] : {std::pair{&surv, expect_surv}, std::pair{&dark, expect_dark}}) {
        double m = 0.0, m2 = 0.0;
        for (double x : *v) m += x;
        m /= static_cast<double>(v->size());
        for (double x : *v) m2 += (x - m) * (x - m);
        const double se = std::sqrt(m2 / static_cast<double>(v->size() - 1) / static_cast<double>(v->size()));
        worst_z = std::max(worst_z, std::abs(m - expect) / std::max(se, 1e-15));
      }
    }
  }
  return {worst_exact <= kExactTol && worst_z <= kSigmas,
          format("exact l<=3: max deviation %.2e (tol %.0e); 500-sequence means: max |z| %.2f (need <=%.0f)",
                 worst_exact, kExactTol, worst_z, kSigmas)};
}

// ---------------------------------------------------------------- 6

Outcome rb_round_trip() {
  constexpr int kTrials = 50, kNeeded = 45;
  constexpr double kSigmas = 2.0, kLsTol = 1e-10;
  bool ok = true;
  std::string detail;
  double ls_worst = 0.0;
  const std::vector<double> grid{1e-3, 2.7e-3, 1e-2};
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const double g = grid[gi];
    const auto ls = leakage_seepage(measurement_crosstalk(g));
    ls_worst = std::max(ls_worst, std::abs(ls.leakage - ls.seepage));
    ExperimentConfig cfg;
    cfg.name = "round_trip";
    cfg.focus_qubits = {1};
    cfg.ops = {InterleavedOp::kMeasure};
    cfg.channel.measurement_gamma_t = g;
    int std_ok = 0, leak_ok = 0;
    double std_bias = 0.0, leak_bias = 0.0;
    for (int k = 0; k < kTrials; ++k) {
      try {
        const auto rep = run_experiment(cfg, derive_seed(kSeed, {stream_tag::kTrial, 6, gi, static_cast<std::uint64_t>(k)}),
                                        {200, 1});
        const auto& a = rep.probes[0].analysis;
        std_ok += std::abs(a.value.scattering_standard - g) <= kSigmas * a.sigma.scattering_standard;
        leak_ok += std::abs(a.value.scattering_leakage - g) <= kSigmas * a.sigma.scattering_leakage;
        std_bias += (a.value.scattering_standard / g - 1.0) / kTrials;
        leak_bias += (a.value.scattering_leakage / g - 1.0) / kTrials;
      } catch (const Error&) {
        // counts as a miss for both estimators
      }
    }
    ok = ok && std_ok >= kNeeded && leak_ok >= kNeeded;
    detail += format("gt=%.1e: 3(1-r)/4 %d/%d (mean bias %+.1f%%), 2(1-t)/3 %d/%d (mean bias %+.1f%%); ", g, std_ok,
                     kTrials, 100 * std_bias, leak_ok, kTrials, 100 * leak_bias);
  }
  ok = ok && ls_worst <= kLsTol;
  detail += format("|L-S| balanced %.1e (tol %.0e); need %d/%d within 2 sigma", ls_worst, kLsTol, kNeeded, kTrials);
  return {ok, detail};
}

// ---------------------------------------------------------------- 7

Outcome polarization_sweep(int repetitions) {
  constexpr double kRelTol = 0.25, kMinMagnitude = 1e-3;
  bool ok = true;
  double worst_rel = 0.0, worst_mean_rel = 0.0;
  std::string worst_at;
  std::string bias;
  for (const char* kind : {"measurement", "reset"}) {
    PolarizationSweep sw;
    sw.kind = kind;
    sw.repetitions = repetitions;
    const auto pts = run_polarization_sweep(sw, derive_seed(kSeed, {stream_tag::kTrial, 7}));
    for (const auto& p : pts) {
      if (p.injected.average_infidelity < kMinMagnitude) continue;
      worst_mean_rel = std::max(worst_mean_rel, p.relative_error_of_mean());
      if (p.relative_error() > worst_rel) {
        worst_rel = p.relative_error();
        worst_at = format("%s/%s gt=%.0e", kind, p.model.c_str(), p.gamma_t);
      }
      ok = ok && p.relative_error() < kRelTol && p.failures * 10 <= p.repetitions + p.failures;
    }
    if (sw.is_reset()) {
      // Uneven light lowers the standard scattering estimate relative to balanced light.
      int lower = 0, compared = 0;
      for (std::size_t gi = 0; gi < sw.gamma_t.size(); ++gi) {
        if (sw.gamma_t[gi] < kMinMagnitude) continue;
        double balanced = 0.0, uneven = 0.0;
        int n_uneven = 0;
        for (const auto& p : pts) {
          if (p.gamma_t != sw.gamma_t[gi]) continue;
          if (p.model == "balanced") balanced = p.scattering_standard_mean;
          else {
            uneven += p.scattering_standard_mean;
            ++n_uneven;
          }
        }
        uneven /= n_uneven;
        ++compared;
        lower += uneven < balanced;
        if (sw.gamma_t[gi] == 1e-2) {
          bias = format("reset gt=%.0e: uneven/balanced scattering estimate %.3f", sw.gamma_t[gi], uneven / balanced);
        }
      }
      ok = ok && lower == compared;
      bias += format(" (lower at %d/%d magnitudes)", lower, compared);
    }
  }
  return {ok, format("median estimate: worst relative error %.1f%% at %s (need <%.0f%% for infidelity>=1e-3, %d reps; "
                     "mean estimate worst %.1f%%, not scored); %s",
                     100 * worst_rel, worst_at.c_str(), 100 * kRelTol, repetitions, 100 * worst_mean_rel, bias.c_str())};
}

// ---------------------------------------------------------------- 8

// Chi-square of the per-length leakage-curve means against their shot-noise variance.
double leakage_chi_square(const RBDataset& ds) {
  std::map<int, std::pair<double, double>> acc;  // length -> (sum f, sum var)
  std::map<int, int> n;
  for (const auto& r : ds.sequences) {
    const double f = r.dark_fraction();
    acc[r.length].first += f;
    acc[r.length].second += f * (1 - f) / static_cast<double>(r.shots - 1);
    ++n[r.length];
  }
  std::vector<double> mean, var;
  for (const auto& [l, a] : acc) {
    const double k = n[l];
    mean.push_back(a.first / k);
    var.push_back(a.second / (k * k));
  }
  double wsum = 0.0, wmean = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    wsum += 1 / var[i];
    wmean += mean[i] / var[i];
  }
  wmean /= wsum;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i) chi2 += (mean[i] - wmean) * (mean[i] - wmean) / var[i];
  return chi2;
}

Outcome balanced_variance() {
  constexpr int kTrials = 50, kNeeded = 45;
  constexpr double kCritical = 5.991;  // chi-square, 2 degrees of freedom, 5%
  constexpr double kInflatedRejection = 0.5;
  const SpamModel spam{0.0, 0.0, 0.01, 0.01};
  const SurvivalEngine engine(LeakageChannel::identity(), spam);
  const std::vector<int> lengths{2, 11, 81};
  int balanced_pass = 0, uniform_reject = 0;
  for (int k = 0; k < kTrials; ++k) {
    for (auto sel : {PauliSelection::kBalanced, PauliSelection::kUniform}) {
      const std::uint64_t s = derive_seed(kSeed, {stream_tag::kTrial, 8, static_cast<std::uint64_t>(sel), static_cast<std::uint64_t>(k)});
      RBDataset ds;
      ds.sequences = simulate_probe(engine, generate_sequences(lengths, 40, s, sel), 100, s);
      const double chi2 = leakage_chi_square(ds);
      if (sel == PauliSelection::kBalanced) balanced_pass += chi2 <= kCritical;
      else uniform_reject += chi2 > kCritical;
    }
  }
  const bool ok = balanced_pass >= kNeeded && uniform_reject >= kInflatedRejection * kTrials;
  return {ok, format("balanced: %d/%d pass chi2<=%.3f (need %d); uniform Pauli selection rejected in %d/%d (need >=%.0f%%)",
                     balanced_pass, kTrials, kCritical, kNeeded, uniform_reject, kTrials, 100 * kInflatedRejection)};
}

// ---------------------------------------------------------------- 9

Outcome channel_invariants() {
  constexpr double kTol = 1e-10;
  double tp = 0.0, ls_meas = 0.0, ls_reset_excess = -1.0;
  int count = 0;
  auto check_tp = [&](const LeakageChannel& ch) {
    tp = std::max(tp, ch.superop().trace_deviation());
    ++count;
  };
  std::vector<PolarizationWeights> pols;
  for (const auto& m : default_polarization_models()) pols.push_back(m.weights);
  for (double g : {0.0, 1e-4, 1e-3, 2.7e-3, 1e-2, 0.1, 1.0}) {
    const auto m = measurement_crosstalk(g);
    check_tp(m);
    const auto ls = leakage_seepage(m);
    ls_meas = std::max(ls_meas, std::abs(ls.leakage - ls.seepage));
    for (const auto& w : pols) {
      check_tp(measurement_crosstalk(g, w));
      // Physical branching (1/3) and complete pumping to |0>; below 1/4 uneven light can give L > S.
      for (double b : {1.0 / 3.0, 1.0}) {
        const auto r = reset_crosstalk(g, w, b);
        check_tp(r);
        const auto lr = leakage_seepage(r);
        ls_reset_excess = std::max(ls_reset_excess, lr.leakage - lr.seepage);
      }
    }
    check_tp(depolarizing(std::min(g, 1.0)));
    check_tp(slot_channel(ChannelParams{g, g, pols[1], pols[3], 1.0 / 3.0, 1e-3, 0.0},
                          {InterleavedOp::kMeasure, InterleavedOp::kReset}));
  }
  for (int g = 0; g < CliffordGroup::kOrder; ++g) {
    check_tp(LeakageChannel(clifford_group().superop(g), ChannelKind::kCustom));
  }
  std::mt19937_64 rng(kSeed + 9);
  for (int i = 0; i < 20; ++i) check_tp(fixtures::random_lambda_form_channel(rng, 0.2));
  const bool ok = tp <= kTol && ls_meas <= kTol && ls_reset_excess <= 0.0;
  return {ok, format("%d channels: max trace deviation %.1e; measurement |L-S| %.1e (tol %.0e); reset max(L-S) %.2e (need <=0)",
                     count, tp, ls_meas, kTol, ls_reset_excess)};
}

}  // namespace

int main(int argc, char** argv) {
  // --quick shortens the polarization sweep for local iteration; the registered test runs the full suite.
  const bool quick = argc > 1 && std::string(argv[1]) == "--quick";
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "bessel_null", 1, bessel_null},
      {2, "rate_closed_form", 1, rate_closed_form},
      {3, "depump_round_trip", 10, depump_round_trip},
      {4, "twirl_equivalence", 10, twirl_equivalence},
      {5, "decay_law_oracle", 120, decay_law},
      {6, "rb_round_trip", 300, rb_round_trip},
      {7, "polarization_sweep", 1800, [quick] { return polarization_sweep(quick ? 10 : 100); }},
      {8, "balanced_pauli_variance", 300, balanced_variance},
      {9, "channel_invariants", 1, channel_invariants},
  };
  int passed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = dt < c.budget_s;
    const bool pass = o.pass && in_time;
    passed += pass;
    std::printf("%s [%d] %s: %s; %.2f s (budget %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), dt,
                c.budget_s);
    std::fflush(stdout);
  }
  std::printf("acceptance: %d/%zu criteria passed\n", passed, criteria.size());
  return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
