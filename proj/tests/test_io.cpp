#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "mcmr/io.hpp"

using namespace mcmr;
using namespace mcmr::rb;
using namespace mcmr::io;
using nlohmann::json;

namespace {

std::vector<SequenceRecord> sample_records() {
  const auto seqs = generate_sequences(std::vector<int>{2, 11, 81}, 10, 6);
  return simulate_probe(SurvivalEngine(measurement_crosstalk(0.004), {}), seqs, 100, 6);
}

json campaign_json() {
  return json::parse(R"({
    "name": "t", "seed": 3, "resamples": 100,
    "sampling": {"lengths": [2, 11, 81], "sequences": 10, "shots": 50},
    "experiments": [
      {"name": "measure", "focus_qubits": [1], "probe_qubits": [0, 2], "interleaved_ops": ["measure"],
       "channel": {"measurement_gamma_t": 0.003},
       "probe_channels": {"2": {"measurement_gamma_t": 0.001}},
       "focus_spam": {"meas_error_bright": 0.01}},
      {"name": "control"}
    ]})");
}

}  // namespace

TEST(IO, FormatsRoundTripExactly) {
  for (double v : {0.1, 1.0 / 3.0, 2.7e-3, 1e300}) EXPECT_EQ(std::stod(fmt(v)), v);
}

TEST(IO, DatasetCsvRoundTrip) {
  const auto recs = sample_records();
  std::istringstream is(dataset_csv(recs));
  const auto back = read_dataset_csv(is);
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(back[i].length, recs[i].length);
    EXPECT_EQ(back[i].seq_id, recs[i].seq_id);
    EXPECT_EQ(back[i].pauli, recs[i].pauli);
    EXPECT_EQ(back[i].dark, recs[i].dark);
    EXPECT_EQ(back[i].bright, recs[i].bright);
  }
}

TEST(IO, AnalysisOfReloadedDataIsIdentical) {
  RBDataset ds;
  ds.sequences = sample_records();
  std::istringstream is(dataset_csv(ds.sequences));
  RBDataset back;
  back.sequences = read_dataset_csv(is);
  AnalysisOptions opt;
  opt.resamples = 100;
  opt.seed = 4;
  EXPECT_EQ(to_json(analyze(ds, opt)).dump(), to_json(analyze(back, opt)).dump());
}

TEST(IO, TruncatedCsvReportsLine) {
  std::string text = dataset_csv(sample_records());
  // Cut the fifth data row (line 6) in half.
  std::size_t pos = 0;
  for (int i = 0; i < 5; ++i) pos = text.find('\n', pos) + 1;
  const std::size_t end = text.find('\n', pos);
  const std::string cut = text.substr(0, pos + (end - pos) / 2);
  std::istringstream is(cut);
  try {
    read_dataset_csv(is);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.line(), 6u);
    EXPECT_NE(std::string(e.what()).find("line 6"), std::string::npos);
  }
}

TEST(IO, BadHeaderAndCountsRejected) {
  std::istringstream bad_header("length,seq,pauli\n2,0,I,0,10,10,0\n");
  EXPECT_THROW(read_dataset_csv(bad_header), DataError);
  std::istringstream bad_counts(std::string(kDatasetHeader) + "\n2,0,I,0,10,9,0\n");
  EXPECT_THROW(read_dataset_csv(bad_counts), DataError);
  std::istringstream bad_target(std::string(kDatasetHeader) + "\n2,0,X,0,10,10,0\n");
  EXPECT_THROW(read_dataset_csv(bad_target), DataError);
  std::istringstream empty("");
  EXPECT_THROW(read_dataset_csv(empty), DataError);
}

TEST(IO, FocusCsvRoundTrip) {
  std::vector<FocusRecord> recs{{2, 0, 1, 1, 0, 1, 100, 97}, {2, 0, 1, 2, 0, -1, 100, 40}};
  std::istringstream is(focus_csv(recs));
  const auto back = read_focus_csv(is);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].expected, -1);
  EXPECT_EQ(back[0].bright, 97);
  std::istringstream bad(std::string(kFocusHeader) + "\n2,0,1,1,0,1,100,101\n");
  EXPECT_THROW(read_focus_csv(bad), DataError);
}

TEST(IO, CampaignParsing) {
  const auto c = campaign_from_json(campaign_json());
  EXPECT_EQ(c.seed, 3u);
  ASSERT_EQ(c.experiments.size(), 2u);
  const auto& m = c.experiments[0];
  EXPECT_EQ(m.ops.size(), 1u);
  EXPECT_DOUBLE_EQ(m.channel_for(0).measurement_gamma_t, 0.003);
  EXPECT_DOUBLE_EQ(m.channel_for(2).measurement_gamma_t, 0.001);
  EXPECT_DOUBLE_EQ(m.focus_spam.meas_error_bright, 0.01);
  EXPECT_EQ(m.sampling.shots, 50);
  EXPECT_TRUE(c.experiments[1].is_control());
  EXPECT_FALSE(c.sweep.has_value());
}

TEST(IO, CampaignRejectsBadInput) {
  auto j = campaign_json();
  j["experiments"][1]["name"] = "measure";
  EXPECT_THROW(campaign_from_json(j), ConfigError);
  j = campaign_json();
  j["resamples"] = 20;
  EXPECT_THROW(campaign_from_json(j), ConfigError);
  j = campaign_json();
  j["experiments"][0]["interleaved_ops"] = {"juggle"};
  EXPECT_THROW(campaign_from_json(j), ConfigError);
  j = campaign_json();
  j["experiments"][0]["channel"]["measurement_gamma_t"] = "lots";
  EXPECT_THROW(campaign_from_json(j), ConfigError);
  EXPECT_THROW(campaign_from_json(json::object()), ConfigError);
}

TEST(IO, SweepSection) {
  auto j = campaign_json();
  j["polarization_sweep"] = json::parse(R"({"kind": "reset", "gamma_t": [0.001, 0.01], "repetitions": 3,
    "models": [{"name": "uneven", "w_minus": 0, "w_pi": 1, "w_plus": 1}]})");
  const auto c = campaign_from_json(j);
  ASSERT_TRUE(c.sweep.has_value());
  EXPECT_TRUE(c.sweep->is_reset());
  ASSERT_EQ(c.sweep->models.size(), 1u);
  EXPECT_EQ(c.sweep->models[0].name, "uneven");
  j["polarization_sweep"]["kind"] = "shake";
  EXPECT_THROW(campaign_from_json(j), ConfigError);
}

TEST(IO, MicromotionConfig) {
  const auto j = json::parse(R"({"rf_frequency_hz": 45e6, "secular_frequency_hz": 2e6, "linewidth_hz": 19.6e6,
    "wavelength_m": 369.5e-9, "displacement_grid_m": {"start": 0, "stop": 5e-6, "points": 11}})");
  const auto c = micromotion_config_from_json(j);
  EXPECT_NEAR(c.wavenumber, 2 * std::numbers::pi / 369.5e-9, 1e-3);
  const auto g = displacement_grid_from_json(j);
  ASSERT_EQ(g.size(), 11u);
  EXPECT_DOUBLE_EQ(g.back(), 5e-6);
  auto bad = j;
  bad["wavelength_m"] = -1.0;
  EXPECT_THROW(micromotion_config_from_json(bad), ConfigError);
  bad = j;
  bad.erase("rf_frequency_hz");
  EXPECT_THROW(micromotion_config_from_json(bad), ConfigError);
}

TEST(IO, NonFiniteBecomesNull) {
  Quantities q;
  q.decay_base = std::numeric_limits<double>::quiet_NaN();
  EXPECT_TRUE(to_json(q)["decay_base"].is_null());
}

TEST(IO, AtomicWrite) {
  const auto dir = std::filesystem::temp_directory_path() / "mcmr_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "out.txt";
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  std::ifstream is(path);
  std::string s;
  std::getline(is, s);
  EXPECT_EQ(s, "second");
  EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove_all(dir);
}
