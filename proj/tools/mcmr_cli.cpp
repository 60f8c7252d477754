// Command-line front end: micromotion scans, depumping fits, benchmark campaigns and
// re-analysis of recorded datasets.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcmr/io.hpp"
#include "mcmr/micromotion.hpp"
#include "mcmr/rb/depump.hpp"
#include "mcmr/rb/experiment.hpp"
#include "mcmr/rb/sweep.hpp"

namespace fs = std::filesystem;
using mcmr::io::fmt;
using mcmr::io::json;

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kData = 3, kFit = 4 };

struct Common {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  int resamples = -1;  // -1: take from config
  int parallel = 1;
};

fs::path prepare_out(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw mcmr::ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

// ------------------------------------------------------------------ micromotion-scan

int cmd_micromotion(const Common& c) {
  const json j = mcmr::io::read_json_file(c.config);
  const auto base = mcmr::io::micromotion_config_from_json(j);
  const auto grid = mcmr::io::displacement_grid_from_json(j);
  const auto out = prepare_out(c.out);

  std::ostringstream csv;
  csv << "displacement_m,modulation_index,suppression\n";
  const double ratio = base.omega_over_gamma();
  for (double r : grid) {
    auto cfg = base;
    cfg.displacement = r;
    const double n = mcmr::modulation_index(cfg);
    csv << fmt(r) << ',' << fmt(n) << ',' << fmt(mcmr::suppression_factor(n, ratio)) << '\n';
  }
  mcmr::io::write_file_atomic(out / "micromotion_scan.csv", csv.str());

  const double n1 = mcmr::first_null_modulation_index();
  const double n2 = mcmr::second_null_modulation_index();
  json nulls = {{"omega_over_gamma", ratio},
                {"first_null", {{"modulation_index", n1},
                                {"displacement_m", mcmr::displacement_for_index(base, n1)},
                                {"suppression", mcmr::suppression_factor(n1, ratio)}}},
                {"second_null", {{"modulation_index", n2},
                                 {"displacement_m", mcmr::displacement_for_index(base, n2)},
                                 {"suppression", mcmr::suppression_factor(n2, ratio)}}}};
  mcmr::io::write_file_atomic(out / "micromotion_nulls.json", nulls.dump(2) + "\n");
  std::cout << "wrote " << grid.size() << " rows to " << (out / "micromotion_scan.csv").string() << "\n";
  return kOk;
}

// ------------------------------------------------------------------ depump

// Keys: gamma_per_s or time_constant_s; times_s (list) or time_grid_s {start, stop,
// points}; shots; free_amplitude; amplitude_scale; polarization; seed.
int cmd_depump(const Common& c) {
  using mcmr::io::detail::get_or;
  const json j = mcmr::io::read_json_file(c.config);
  double gamma = 0.0;
  if (j.contains("gamma_per_s")) {
    gamma = get_or<double>(j, "gamma_per_s", 0.0);
  } else if (j.contains("time_constant_s")) {
    const double tau = get_or<double>(j, "time_constant_s", 0.0);
    if (!(tau > 0.0)) throw mcmr::ConfigError("depump: time_constant_s must be positive");
    gamma = 1.0 / tau;
  } else {
    throw mcmr::ConfigError("depump: give gamma_per_s or time_constant_s");
  }
  if (!(gamma >= 0.0)) throw mcmr::ConfigError("depump: gamma must be >= 0");

  std::vector<double> times;
  if (j.contains("times_s")) {
    times = get_or<std::vector<double>>(j, "times_s", {});
  } else if (j.contains("time_grid_s")) {
    const auto& g = j.at("time_grid_s");
    const double a = get_or<double>(g, "start", 0.0);
    const double b = get_or<double>(g, "stop", 0.0);
    const int n = get_or<int>(g, "points", 0);
    if (n < 2) throw mcmr::ConfigError("depump: time grid needs at least 2 points");
    for (int i = 0; i < n; ++i) times.push_back(a + (b - a) * i / (n - 1.0));
  } else {
    throw mcmr::ConfigError("depump: give times_s or time_grid_s");
  }

  mcmr::rb::DepumpSimulation sim;
  const auto pol = j.contains("polarization") ? mcmr::io::polarization_from_json(j.at("polarization"))
                                              : mcmr::PolarizationWeights::balanced();
  sim.model = mcmr::RateModel::measurement(gamma, pol);
  sim.amplitude_scale = get_or<double>(j, "amplitude_scale", 1.0);
  sim.shots = get_or<std::int64_t>(j, "shots", 1000);
  const bool free_amp = get_or<bool>(j, "free_amplitude", false);
  const std::uint64_t seed = c.seed.value_or(get_or<std::uint64_t>(j, "seed", 0));

  const auto out = prepare_out(c.out);
  const auto data = mcmr::rb::simulate_depump(sim, times, seed);
  std::ostringstream csv;
  csv << "time_s,bright_fraction,shots\n";
  for (std::size_t i = 0; i < data.size(); ++i) csv << fmt(data.x[i]) << ',' << fmt(data.y[i]) << ',' << sim.shots << '\n';
  mcmr::io::write_file_atomic(out / "depump_data.csv", csv.str());

  const auto fit = mcmr::rb::fit_depump(data, free_amp);
  json rep = {{"injected_gamma_per_s", gamma},
              {"injected_time_constant_s", mcmr::io::detail::num(gamma > 0 ? 1.0 / gamma : INFINITY)},
              {"free_amplitude", free_amp},
              {"amplitude", fit.amplitude},
              {"amplitude_sigma", mcmr::io::detail::num(fit.amplitude_sigma)},
              {"gamma_per_s", fit.gamma},
              {"gamma_sigma_per_s", mcmr::io::detail::num(fit.gamma_sigma)},
              {"time_constant_s", mcmr::io::detail::num(fit.time_constant)},
              {"time_constant_sigma_s", mcmr::io::detail::num(fit.time_constant_sigma)},
              {"time_constant_unbounded", !std::isfinite(fit.time_constant)},
              {"residuals", fit.raw.residuals},
              {"seed", seed}};
  mcmr::io::write_file_atomic(out / "depump_fit.json", rep.dump(2) + "\n");
  if (std::isfinite(fit.time_constant)) {
    std::cout << "1/gamma = " << fmt(fit.time_constant) << " s +/- " << fmt(fit.time_constant_sigma) << " s\n";
  } else {
    std::cout << "no depumping resolved: 1/gamma is unbounded\n";
  }
  return kOk;
}

// ------------------------------------------------------------------ benchmark

json report_json(const mcmr::rb::ExperimentConfig& cfg, const mcmr::rb::ExperimentReport& rep, std::uint64_t seed) {
  json probes = json::array();
  for (std::size_t i = 0; i < rep.probes.size(); ++i) {
    const auto& p = rep.probes[i];
    probes.push_back({{"probe", p.probe},
                      {"channel", mcmr::io::to_json(cfg.channel_for(p.probe))},
                      {"injected", mcmr::io::to_json(p.injected)},
                      {"analysis", mcmr::io::to_json(p.analysis)},
                      {"bootstrap_seed", mcmr::derive_seed(seed, {mcmr::stream_tag::kBootstrap, i})},
                      {"ls_ratio_seed", cfg.expected_ls_ratio()}});
  }
  std::vector<std::string> ops;
  for (auto op : cfg.ops) ops.emplace_back(mcmr::rb::to_string(op));
  return {{"name", cfg.name},
          {"focus_qubits", cfg.focus_qubits},
          {"probe_qubits", cfg.probe_qubits},
          {"initial_state", cfg.initial_state},
          {"interleaved_ops", ops},
          {"sampling", mcmr::io::to_json(cfg.sampling)},
          {"seed", seed},
          {"probes", probes},
          {"spam", mcmr::io::to_json(rep.spam)}};
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s.empty() ? "-" : s;
}

int cmd_benchmark(const Common& c) {
  const auto spec = mcmr::io::campaign_from_json(mcmr::io::read_json_file(c.config));
  const std::uint64_t seed = c.seed.value_or(spec.seed);
  const int resamples = c.resamples >= 0 ? c.resamples : spec.resamples;
  if (resamples != 0 && resamples < 100) throw mcmr::ConfigError("--resamples must be 0 or >= 100");
  const auto out = prepare_out(c.out);

  // Experiments run one after another; each one parallelizes internally.
  std::ostringstream summary;
  summary << "experiment,probe,focus_qubits,status,avg_error,avg_error_sigma,spam_error,spam_error_sigma,"
             "injected_avg_error,decay_base,leakage,seepage,message\n";
  int failed = 0;
  for (std::size_t e = 0; e < spec.experiments.size(); ++e) {
    const auto& cfg = spec.experiments[e];
    const std::uint64_t es = mcmr::derive_seed(seed, {mcmr::stream_tag::kExperiment, e});
    try {
      const auto rep = mcmr::rb::run_experiment(cfg, es, {resamples, c.parallel});
      mcmr::io::write_file_atomic(out / (cfg.name + ".json"), report_json(cfg, rep, es).dump(2) + "\n");
      std::ostringstream curves;
      for (const auto& p : rep.probes) {
        mcmr::io::write_file_atomic(out / (cfg.name + "_probe" + std::to_string(p.probe) + "_dataset.csv"),
                                    mcmr::io::dataset_csv(p.dataset.sequences));
        std::istringstream lines(mcmr::io::decay_curve_csv(p.analysis));
        std::string line;
        bool header = true;
        while (std::getline(lines, line)) {
          if (header) {
            if (curves.tellp() == 0) curves << "probe," << line << '\n';
            header = false;
            continue;
          }
          curves << p.probe << ',' << line << '\n';
        }
      }
      mcmr::io::write_file_atomic(out / (cfg.name + "_decay.csv"), curves.str());
      if (!rep.focus.empty()) {
        mcmr::io::write_file_atomic(out / (cfg.name + "_focus.csv"), mcmr::io::focus_csv(rep.focus));
      }
      const auto head = rep.spam.headline();
      for (const auto& p : rep.probes) {
        const auto& v = p.analysis.value;
        const auto& s = p.analysis.sigma;
        summary << cfg.name << ',' << p.probe << ',' << join(cfg.focus_qubits) << ",ok," << fmt(v.average_error) << ','
                << fmt(s.average_error) << ',' << (head ? fmt(head->rate()) : "") << ','
                << (head ? fmt(head->sigma()) : "") << ',' << fmt(p.injected.average_error) << ','
                << fmt(v.decay_base) << ',' << fmt(v.leakage) << ',' << fmt(v.seepage) << ",\n";
      }
      std::cout << cfg.name << ": ok\n";
    } catch (const mcmr::Error& err) {
      ++failed;
      std::string msg = err.what();
      for (auto& ch : msg)
        if (ch == ',' || ch == '\n') ch = ';';
      summary << cfg.name << ",," << join(cfg.focus_qubits) << ",failed,,,,,,,,," << msg << '\n';
      std::cerr << cfg.name << ": failed: " << err.what() << "\n";
    }
  }
  if (!spec.experiments.empty()) mcmr::io::write_file_atomic(out / "summary.csv", summary.str());

  if (spec.sweep) {
    const auto pts = mcmr::rb::run_polarization_sweep(*spec.sweep, mcmr::derive_seed(seed, {mcmr::stream_tag::kTrial}),
                                                      c.parallel);
    mcmr::io::write_file_atomic(out / ("sweep_" + spec.sweep->kind + ".csv"), mcmr::io::sweep_csv(pts));
    std::cout << "polarization sweep: " << pts.size() << " points\n";
  }
  return failed == 0 ? kOk : kOther;
}

// ------------------------------------------------------------------ fit

int cmd_fit(const Common& c, const std::string& data, const std::string& focus, double ls_ratio) {
  std::ifstream is(data);
  if (!is) throw mcmr::DataError("cannot open dataset '" + data + "'", 0);
  mcmr::rb::RBDataset ds;
  ds.sequences = mcmr::io::read_dataset_csv(is);
  if (!focus.empty()) {
    std::ifstream fis(focus);
    if (!fis) throw mcmr::DataError("cannot open focus file '" + focus + "'", 0);
    ds.focus = mcmr::io::read_focus_csv(fis);
  }
  mcmr::rb::AnalysisOptions opt;
  opt.ls_ratio = ls_ratio;
  opt.resamples = c.resamples >= 0 ? c.resamples : 200;
  opt.seed = c.seed.value_or(0);
  opt.threads = c.parallel;
  const auto res = mcmr::rb::analyze(ds, opt);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";

  json j = {{"dataset", data}, {"bootstrap_seed", opt.seed}, {"ls_ratio_seed", ls_ratio},
            {"analysis", mcmr::io::to_json(res)}};
  if (!ds.focus.empty()) j["spam"] = mcmr::io::to_json(mcmr::rb::summarize_spam(ds.focus));
  const auto out = prepare_out(c.out);
  mcmr::io::write_file_atomic(out / "analysis.json", j.dump(2) + "\n");
  mcmr::io::write_file_atomic(out / "decay.csv", mcmr::io::decay_curve_csv(res));
  std::cout << "avg_error = " << fmt(res.value.average_error) << " +/- " << fmt(res.sigma.average_error) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mid-circuit measurement and reset crosstalk toolkit"};
  app.require_subcommand(1);

  Common common;
  std::string data, focus;
  double ls_ratio = 1.0;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", common.config, "JSON configuration file");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--out", common.out, "output directory")->capture_default_str();
    sub->add_option("--seed", common.seed, "master seed (overrides the config)");
    sub->add_option("--resamples", common.resamples, "bootstrap resamples (0 disables)");
    sub->add_option("--parallel", common.parallel, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  };
  auto* mm = app.add_subcommand("micromotion-scan", "suppression factor versus ion displacement");
  add_common(mm, true);
  auto* dp = app.add_subcommand("depump", "simulate and fit a bright-state depumping experiment");
  add_common(dp, true);
  auto* bm = app.add_subcommand("benchmark", "run a benchmarking campaign");
  add_common(bm, true);
  auto* ft = app.add_subcommand("fit", "analyze a recorded dataset");
  add_common(ft, false);
  ft->add_option("--data", data, "dataset CSV")->required();
  ft->add_option("--focus", focus, "focus-qubit CSV");
  ft->add_option("--ls-ratio", ls_ratio, "expected leakage/seepage ratio seeding the leakage fit")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*mm) return cmd_micromotion(common);
    if (*dp) return cmd_depump(common);
    if (*bm) return cmd_benchmark(common);
    if (*ft) return cmd_fit(common, data, focus, ls_ratio);
  } catch (const mcmr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const mcmr::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const mcmr::FitError& e) {
    std::cerr << "fit error: " << e.what() << "\n";
    if (!e.residuals().empty()) {
      std::cerr << "residuals:";
      for (double r : e.residuals()) std::cerr << ' ' << fmt(r);
      std::cerr << "\n";
    }
    return kFit;
  } catch (const mcmr::ParameterError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
  return kOther;
}
