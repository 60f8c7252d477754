#pragma once

// JSON configuration and result files, CSV datasets. Every floating-point value is
// written with 17 significant digits so files round-trip exactly.

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mcmr/errors.hpp"
#include "mcmr/micromotion.hpp"
#include "mcmr/rb/analysis.hpp"
#include "mcmr/rb/dataset.hpp"
#include "mcmr/rb/experiment.hpp"
#include "mcmr/rb/sweep.hpp"

namespace mcmr::io {

using json = nlohmann::json;

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Writes through a temporary file and renames, so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open '" + tmp + "' for writing");
    os << content;
    if (!os) throw Error("write to '" + tmp + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path.string() + "'");
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

// ---------------------------------------------------------------- JSON helpers

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

template <class T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("config: missing key '") + key + "'");
  return get_or<T>(j, key, T{});
}

/// JSON cannot hold NaN or infinity; they become null.
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace detail

// ---------------------------------------------------------------- micromotion

/// Keys: rf_frequency_hz, secular_frequency_hz, linewidth_hz, wavelength_m,
/// beam_angle_deg, displacement_m. Frequencies are converted to angular units.
inline MicromotionConfig micromotion_config_from_json(const json& j) {
  using detail::get_or;
  using detail::require;
  MicromotionConfig c;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  c.rf_frequency = two_pi * require<double>(j, "rf_frequency_hz");
  c.secular_frequency = two_pi * require<double>(j, "secular_frequency_hz");
  c.linewidth = two_pi * require<double>(j, "linewidth_hz");
  const double wavelength = require<double>(j, "wavelength_m");
  if (!(wavelength > 0.0)) throw ConfigError("micromotion: wavelength_m must be positive");
  c.wavenumber = two_pi / wavelength;
  c.beam_angle = get_or<double>(j, "beam_angle_deg", 0.0) * std::numbers::pi / 180.0;
  c.displacement = get_or<double>(j, "displacement_m", 0.0);
  try {
    c.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("micromotion: ") + e.what());
  }
  return c;
}

/// Either an explicit "displacements_m" list or a {"start", "stop", "points"} grid under
/// "displacement_grid_m".
inline std::vector<double> displacement_grid_from_json(const json& j) {
  std::vector<double> out;
  if (j.contains("displacements_m")) {
    out = detail::require<std::vector<double>>(j, "displacements_m");
  } else if (j.contains("displacement_grid_m")) {
    const auto& g = j.at("displacement_grid_m");
    const double a = detail::require<double>(g, "start");
    const double b = detail::require<double>(g, "stop");
    const int n = detail::require<int>(g, "points");
    if (n < 2) throw ConfigError("micromotion: displacement grid needs at least 2 points");
    for (int i = 0; i < n; ++i) out.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  } else {
    throw ConfigError("micromotion: give 'displacements_m' or 'displacement_grid_m'");
  }
  if (out.empty()) throw ConfigError("micromotion: empty displacement grid");
  for (double r : out)
    if (!(std::isfinite(r) && r >= 0.0)) throw ConfigError("micromotion: displacements must be >= 0");
  return out;
}

// ---------------------------------------------------------------- experiments

inline PolarizationWeights polarization_from_json(const json& j) {
  const double m = detail::get_or<double>(j, "w_minus", 1.0);
  const double p = detail::get_or<double>(j, "w_pi", 1.0);
  const double s = detail::get_or<double>(j, "w_plus", 1.0);
  try {
    return PolarizationWeights::normalized(m, p, s);
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("polarization: ") + e.what());
  }
}

inline json to_json(const PolarizationWeights& w) {
  return {{"w_minus", w.w_minus}, {"w_pi", w.w_pi}, {"w_plus", w.w_plus}};
}

inline rb::ChannelParams channel_from_json(const json& j, const rb::ChannelParams& base = {}) {
  using detail::get_or;
  rb::ChannelParams c = base;
  c.measurement_gamma_t = get_or<double>(j, "measurement_gamma_t", c.measurement_gamma_t);
  c.reset_gamma_t = get_or<double>(j, "reset_gamma_t", c.reset_gamma_t);
  if (j.contains("measurement_polarization")) c.measurement_polarization = polarization_from_json(j.at("measurement_polarization"));
  if (j.contains("reset_polarization")) c.reset_polarization = polarization_from_json(j.at("reset_polarization"));
  c.dark_branching = get_or<double>(j, "dark_branching", c.dark_branching);
  c.gate_error = get_or<double>(j, "gate_error", c.gate_error);
  c.extra_phase = get_or<double>(j, "extra_phase", c.extra_phase);
  return c;
}

inline json to_json(const rb::ChannelParams& c) {
  return {{"measurement_gamma_t", c.measurement_gamma_t},
          {"reset_gamma_t", c.reset_gamma_t},
          {"measurement_polarization", to_json(c.measurement_polarization)},
          {"reset_polarization", to_json(c.reset_polarization)},
          {"dark_branching", c.dark_branching},
          {"gate_error", c.gate_error},
          {"extra_phase", c.extra_phase}};
}

inline rb::Sampling sampling_from_json(const json& j, const rb::Sampling& base = {}) {
  using detail::get_or;
  rb::Sampling s = base;
  s.lengths = get_or<std::vector<int>>(j, "lengths", s.lengths);
  s.sequences = get_or<int>(j, "sequences", s.sequences);
  s.shots = get_or<std::int64_t>(j, "shots", s.shots);
  const std::string sel = get_or<std::string>(j, "selection", s.selection == rb::PauliSelection::kBalanced ? "balanced" : "uniform");
  if (sel == "balanced") s.selection = rb::PauliSelection::kBalanced;
  else if (sel == "uniform") s.selection = rb::PauliSelection::kUniform;
  else throw ConfigError("sampling: selection must be 'balanced' or 'uniform'");
  return s;
}

inline json to_json(const rb::Sampling& s) {
  return {{"lengths", s.lengths},
          {"sequences", s.sequences},
          {"shots", s.shots},
          {"selection", s.selection == rb::PauliSelection::kBalanced ? "balanced" : "uniform"}};
}

inline rb::ExperimentConfig experiment_from_json(const json& j, const rb::Sampling& shared = {}) {
  using detail::get_or;
  rb::ExperimentConfig c;
  c.name = detail::require<std::string>(j, "name");
  c.focus_qubits = get_or<std::vector<int>>(j, "focus_qubits", {});
  c.probe_qubits = get_or<std::vector<int>>(j, "probe_qubits", {0});
  c.initial_state = get_or<int>(j, "initial_state", 0);
  for (const auto& op : get_or<std::vector<std::string>>(j, "interleaved_ops", {})) {
    c.ops.push_back(rb::interleaved_op_from_string(op));
  }
  if (j.contains("channel")) c.channel = channel_from_json(j.at("channel"));
  if (j.contains("probe_channels")) {
    for (const auto& [key, val] : j.at("probe_channels").items()) {
      int q = 0;
      const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), q);
      if (ec != std::errc{} || ptr != key.data() + key.size()) {
        throw ConfigError("probe_channels: key '" + key + "' is not a qubit index");
      }
      c.probe_channels[q] = channel_from_json(val, c.channel);
    }
  }
  if (j.contains("probe_spam")) {
    const auto& s = j.at("probe_spam");
    c.probe_spam.prep_error = get_or<double>(s, "prep_error", 0.0);
    c.probe_spam.prep_leakage = get_or<double>(s, "prep_leakage", 0.0);
    c.probe_spam.meas_error_dark = get_or<double>(s, "meas_error_dark", 0.0);
    c.probe_spam.meas_error_bright = get_or<double>(s, "meas_error_bright", 0.0);
  }
  if (j.contains("focus_spam")) {
    const auto& s = j.at("focus_spam");
    c.focus_spam.prep_error = get_or<double>(s, "prep_error", 0.0);
    c.focus_spam.meas_error_dark = get_or<double>(s, "meas_error_dark", 0.0);
    c.focus_spam.meas_error_bright = get_or<double>(s, "meas_error_bright", 0.0);
    c.focus_spam.depump_probability = get_or<double>(s, "depump_probability", 0.0);
  }
  c.sampling = j.contains("sampling") ? sampling_from_json(j.at("sampling"), shared) : shared;
  c.validate();
  return c;
}

/// A list of experiments sharing sampling parameters and a seed, plus an optional
/// polarization sweep.
struct CampaignSpec {
  std::string name = "campaign";
  std::uint64_t seed = 0;
  int resamples = 200;
  rb::Sampling sampling;
  std::vector<rb::ExperimentConfig> experiments;
  std::optional<rb::PolarizationSweep> sweep;
};

inline CampaignSpec campaign_from_json(const json& j) {
  using detail::get_or;
  CampaignSpec c;
  c.name = get_or<std::string>(j, "name", c.name);
  c.seed = get_or<std::uint64_t>(j, "seed", 0);
  c.resamples = get_or<int>(j, "resamples", c.resamples);
  if (j.contains("sampling")) c.sampling = sampling_from_json(j.at("sampling"));
  std::set<std::string> names;
  for (const auto& e : get_or<json>(j, "experiments", json::array())) {
    c.experiments.push_back(experiment_from_json(e, c.sampling));
    if (!names.insert(c.experiments.back().name).second) {
      throw ConfigError("campaign: duplicate experiment name '" + c.experiments.back().name + "'");
    }
  }
  if (j.contains("polarization_sweep")) {
    const auto& s = j.at("polarization_sweep");
    rb::PolarizationSweep sw;
    sw.kind = get_or<std::string>(s, "kind", sw.kind);
    if (sw.kind != "measurement" && sw.kind != "reset") throw ConfigError("polarization_sweep: kind must be 'measurement' or 'reset'");
    if (s.contains("models")) {
      sw.models.clear();
      for (const auto& m : s.at("models")) sw.models.push_back({detail::require<std::string>(m, "name"), polarization_from_json(m)});
    }
    sw.gamma_t = get_or<std::vector<double>>(s, "gamma_t", sw.gamma_t);
    sw.repetitions = get_or<int>(s, "repetitions", sw.repetitions);
    if (sw.repetitions < 1) throw ConfigError("polarization_sweep: repetitions must be >= 1");
    for (double g : sw.gamma_t)
      if (!(g >= 0.0)) throw ConfigError("polarization_sweep: gamma_t must be >= 0");
    sw.sampling = s.contains("sampling") ? sampling_from_json(s.at("sampling"), c.sampling) : c.sampling;
    if (s.contains("probe_spam")) {
      const auto& p = s.at("probe_spam");
      sw.probe_spam.prep_error = get_or<double>(p, "prep_error", 0.0);
      sw.probe_spam.meas_error_dark = get_or<double>(p, "meas_error_dark", 0.0);
      sw.probe_spam.meas_error_bright = get_or<double>(p, "meas_error_bright", 0.0);
    }
    c.sweep = sw;
  }
  if (c.experiments.empty() && !c.sweep) throw ConfigError("campaign: no experiments and no polarization sweep");
  if (c.resamples != 0 && c.resamples < 100) throw ConfigError("campaign: resamples must be 0 or >= 100");
  return c;
}

// ---------------------------------------------------------------- results

inline json to_json(const rb::Quantities& q) {
  json j;
  const auto a = q.as_array();
  const auto& n = rb::Quantities::names();
  for (std::size_t i = 0; i < a.size(); ++i) j[n[i]] = detail::num(a[i]);
  return j;
}

inline json to_json(const std::vector<rb::LengthPoint>& pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back({{"length", p.length}, {"mean", p.mean}, {"sequences", p.sequences}});
  return arr;
}

inline json to_json(const rb::AnalysisResult& a) {
  return {{"value", to_json(a.value)},
          {"sigma", to_json(a.sigma)},
          {"resamples", a.resamples},
          {"failed_resamples", a.failed_resamples},
          {"standard_curve", to_json(a.standard_curve)},
          {"leakage_curve", to_json(a.leakage_curve)},
          {"warnings", a.warnings}};
}

inline json to_json(const rb::InjectedValues& v) {
  return {{"decay_base", v.decay_base},       {"leakage", v.leakage},
          {"seepage", v.seepage},             {"t_minus", v.t_minus},
          {"average_infidelity", v.average_infidelity}, {"average_error", v.average_error},
          {"measurement_gamma_t", v.measurement_gamma_t}, {"reset_gamma_t", v.reset_gamma_t}};
}

inline json to_json(const rb::SpamEstimate& e) {
  return {{"focus_qubit", e.focus_qubit}, {"measurement", e.measurement}, {"length", e.length},
          {"errors", e.errors},           {"shots", e.shots},               {"rate", e.rate()},
          {"sigma", e.sigma()}};
}

inline json to_json(const rb::SpamReport& r) {
  json j;
  auto list = [](const std::vector<rb::SpamEstimate>& v) {
    json a = json::array();
    for (const auto& e : v) a.push_back(to_json(e));
    return a;
  };
  j["pooled"] = list(r.pooled);
  j["per_qubit"] = list(r.per_qubit);
  j["per_length"] = list(r.per_length);
  json unk = json::array();
  for (const auto& u : r.unknown) {
    unk.push_back({{"focus_qubit", u.focus_qubit}, {"measurement", u.measurement}, {"bright", u.bright}, {"shots", u.shots}});
  }
  j["unknown_expected"] = unk;
  if (auto h = r.headline()) j["headline"] = to_json(*h);
  return j;
}

// ---------------------------------------------------------------- CSV

inline constexpr std::string_view kDatasetHeader = "length,seq_id,pauli,target_outcome,shots,dark_counts,bright_counts";
inline constexpr std::string_view kFocusHeader = "length,seq_id,focus_qubit,slot,measurement,expected,shots,bright_counts";

inline std::string dataset_csv(const std::vector<rb::SequenceRecord>& recs) {
  std::ostringstream os;
  os << kDatasetHeader << '\n';
  for (const auto& r : recs) {
    os << r.length << ',' << r.seq_id << ',' << pauli_char(r.pauli) << ',' << r.target << ',' << r.shots << ','
       << r.dark << ',' << r.bright << '\n';
  }
  return os.str();
}

inline std::string focus_csv(const std::vector<rb::FocusRecord>& recs) {
  std::ostringstream os;
  os << kFocusHeader << '\n';
  for (const auto& r : recs) {
    os << r.length << ',' << r.seq_id << ',' << r.focus_qubit << ',' << r.slot << ',' << r.measurement << ','
       << r.expected << ',' << r.shots << ',' << r.bright << '\n';
  }
  return os.str();
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::int64_t parse_int(std::string_view s, std::size_t line, const char* field) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw DataError("line " + std::to_string(line) + ": field '" + field + "' is not an integer: '" + std::string(s) + "'",
                    line);
  }
  return v;
}

// Reads non-empty lines; the first must equal `header`.
template <class RowFn>
void read_csv(std::istream& is, std::string_view header, std::size_t columns, RowFn&& row) {
  std::string line;
  std::size_t n = 0;
  bool seen_header = false;
  while (std::getline(is, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!seen_header) {
      if (line != header) throw DataError("line " + std::to_string(n) + ": expected header '" + std::string(header) + "'", n);
      seen_header = true;
      continue;
    }
    const auto f = split(line);
    if (f.size() != columns) {
      throw DataError("line " + std::to_string(n) + ": expected " + std::to_string(columns) + " fields, got " +
                          std::to_string(f.size()),
                      n);
    }
    row(f, n);
  }
  if (!seen_header) throw DataError("empty file: missing header", 0);
}

}  // namespace detail

inline std::vector<rb::SequenceRecord> read_dataset_csv(std::istream& is) {
  std::vector<rb::SequenceRecord> out;
  detail::read_csv(is, kDatasetHeader, 7, [&](const std::vector<std::string_view>& f, std::size_t n) {
    using detail::parse_int;
    rb::SequenceRecord r;
    r.length = static_cast<int>(parse_int(f[0], n, "length"));
    r.seq_id = static_cast<int>(parse_int(f[1], n, "seq_id"));
    if (f[2].size() != 1 || std::string_view("IXYZ").find(f[2][0]) == std::string_view::npos) {
      throw DataError("line " + std::to_string(n) + ": field 'pauli' must be one of I, X, Y, Z", n);
    }
    r.pauli = pauli_from_char(f[2][0]);
    r.target = static_cast<int>(parse_int(f[3], n, "target_outcome"));
    r.shots = parse_int(f[4], n, "shots");
    r.dark = parse_int(f[5], n, "dark_counts");
    r.bright = parse_int(f[6], n, "bright_counts");
    auto bad = [n](const std::string& msg) { return DataError("line " + std::to_string(n) + ": " + msg, n); };
    if (r.length < 1) throw bad("length must be >= 1");
    if (r.target != target_outcome(r.pauli)) throw bad("target_outcome does not match pauli");
    if (r.shots < 1) throw bad("shots must be >= 1");
    if (r.dark < 0 || r.bright < 0 || r.dark + r.bright != r.shots) throw bad("dark_counts + bright_counts must equal shots");
    out.push_back(r);
  });
  if (out.empty()) throw DataError("dataset has a header but no rows", 0);
  return out;
}

inline std::vector<rb::FocusRecord> read_focus_csv(std::istream& is) {
  std::vector<rb::FocusRecord> out;
  detail::read_csv(is, kFocusHeader, 8, [&](const std::vector<std::string_view>& f, std::size_t n) {
    using detail::parse_int;
    rb::FocusRecord r;
    r.length = static_cast<int>(parse_int(f[0], n, "length"));
    r.seq_id = static_cast<int>(parse_int(f[1], n, "seq_id"));
    r.focus_qubit = static_cast<int>(parse_int(f[2], n, "focus_qubit"));
    r.slot = static_cast<int>(parse_int(f[3], n, "slot"));
    r.measurement = static_cast<int>(parse_int(f[4], n, "measurement"));
    r.expected = static_cast<int>(parse_int(f[5], n, "expected"));
    r.shots = parse_int(f[6], n, "shots");
    r.bright = parse_int(f[7], n, "bright_counts");
    if (r.expected < -1 || r.expected > 1) throw DataError("line " + std::to_string(n) + ": expected must be -1, 0 or 1", n);
    if (r.shots < 1 || r.bright < 0 || r.bright > r.shots) {
      throw DataError("line " + std::to_string(n) + ": bright_counts must lie in [0, shots]", n);
    }
    out.push_back(r);
  });
  return out;
}

inline std::string sweep_csv(const std::vector<rb::SweepPoint>& pts) {
  std::ostringstream os;
  os << "model,gamma_t,injected_infidelity,injected_decay_base,injected_leakage,injected_seepage,repetitions,failures,"
        "estimated_error_mean,estimated_error_median,estimated_error_sd,relative_error,scattering_standard_mean,"
        "scattering_standard_sd,scattering_leakage_mean,scattering_leakage_sd\n";
  for (const auto& p : pts) {
    os << p.model << ',' << fmt(p.gamma_t) << ',' << fmt(p.injected.average_infidelity) << ','
       << fmt(p.injected.decay_base) << ',' << fmt(p.injected.leakage) << ',' << fmt(p.injected.seepage) << ','
       << p.repetitions << ',' << p.failures << ',' << fmt(p.error_mean) << ',' << fmt(p.error_median) << ','
       << fmt(p.error_sd) << ',' << fmt(p.relative_error()) << ',' << fmt(p.scattering_standard_mean) << ',' << fmt(p.scattering_standard_sd)
       << ',' << fmt(p.scattering_leakage_mean) << ',' << fmt(p.scattering_leakage_sd) << '\n';
  }
  return os.str();
}

/// Per-length means and the fitted curves, one row per length.
inline std::string decay_curve_csv(const rb::AnalysisResult& a) {
  std::ostringstream os;
  os << "length,standard_mean,standard_fit,leakage_mean,leakage_fit\n";
  const auto& v = a.value;
  for (std::size_t i = 0; i < a.standard_curve.size(); ++i) {
    const double l = a.standard_curve[i].length;
    const double sfit = v.amplitude * std::pow(v.decay_base, l) + 0.5;
    const double lfit = v.b0 * std::pow(v.t_minus, l + 1.0) + v.c0;
    const double lmean = i < a.leakage_curve.size() ? a.leakage_curve[i].mean : std::nan("");
    os << a.standard_curve[i].length << ',' << fmt(a.standard_curve[i].mean) << ',' << fmt(sfit) << ',' << fmt(lmean)
       << ',' << fmt(lfit) << '\n';
  }
  return os.str();
}

}  // namespace mcmr::io
