#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "doctest.h"
#include "wbslope/delay_alignment.hpp"
#include "wbslope/errors.hpp"
#include "wbslope/experiment.hpp"
#include "wbslope/io.hpp"

using namespace wbs;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "wbslope_unit" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ChannelInstance sqrt_prime_channel() {
  Eigen::MatrixXd tau(3, 3);
  tau << 0, std::sqrt(2.0), std::sqrt(3.0), std::sqrt(5.0), 0, std::sqrt(6.0), std::sqrt(7.0),
      std::sqrt(10.0), 0;
  return symmetric_channel(tau / 10.0, 1.0, 0.8);
}

}  // namespace

TEST_CASE("numbers round-trip through text") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, std::sqrt(2.0) / 10.0})
    CHECK(parse_double(format_double(v), "v") == v);
  CHECK_THROWS_AS(parse_double("1.5x", "v"), SchemaError);
  CHECK_THROWS_AS(parse_int("2.0", "n"), SchemaError);
  CHECK(parse_double_list("1, 2;3  4", "l") == std::vector<double>{1, 2, 3, 4});
}

TEST_CASE("key-value parsing") {
  const auto kv = parse_key_values("# comment\n\na = 1\n b= two words \n", "t");
  CHECK(kv.at("a") == "1");
  CHECK(kv.at("b") == "two words");
  CHECK_THROWS_AS(parse_key_values("a = 1\na = 2\n", "t"), SchemaError);
  CHECK_THROWS_AS(parse_key_values("novalue\n", "t"), SchemaError);
}

TEST_CASE("channel files round-trip exactly") {
  auto chan = sqrt_prime_channel();
  chan.gains(0, 1) = std::complex<double>(0.3, -0.7);
  chan.powers << 1.5, 2.0, 1e-3;
  chan.noise_density = 0.25;
  const fs::path p = scratch("chan") / "c.chan";
  write_channel(chan, p);
  const auto back = read_channel(p);
  CHECK(back.gains == chan.gains);
  CHECK(back.delays == chan.delays);
  CHECK(back.powers == chan.powers);
  CHECK(back.noise_density == chan.noise_density);
  CHECK(read_delays(p) == chan.delays);

  CHECK_THROWS_AS(channel_from_key_values(parse_key_values("users = 2\ndelays = 0 1 1 0\n", "t")),
                  SchemaError);
  CHECK_THROWS_AS(channel_from_key_values(parse_key_values(
                      "users = 2\ndelays = 0 1 1\npower_gains = 1 0 0 1\n", "t")),
                  SchemaError);
}

TEST_CASE("CSV text") {
  CsvTable t;
  t.header = {"x", "y"};
  t.rows = {{"1", "2"}, {"3", ""}};
  const auto back = parse_csv(t.to_text());
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK(back.column("y") == 1);
  CHECK_THROWS_AS(back.column("z"), SchemaError);
  CHECK_THROWS_AS(parse_csv("a,b\n1\n"), SchemaError);
}

TEST_CASE("config validation") {
  KeyValues kv{{"experiment", "TwoUserSweep"}, {"seed", "3"}, {"output", "o.csv"}};
  CHECK(ExperimentConfig::from_key_values(kv).experiment == ExperimentKind::TwoUserSweep);
  CHECK(parse_experiment("pairing-mc") == ExperimentKind::PairingMC);
  CHECK(parse_experiment("align_peaks") == ExperimentKind::AlignPeaks);
  auto missing = kv;
  missing.erase("seed");
  CHECK_THROWS_AS(ExperimentConfig::from_key_values(missing), SchemaError);
  auto unknown = kv;
  unknown["channel"] = "x";
  CHECK_THROWS_AS(ExperimentConfig::from_key_values(unknown), SchemaError);
  auto bad = kv;
  bad["experiment"] = "Nope";
  CHECK_THROWS_AS(ExperimentConfig::from_key_values(bad), SchemaError);
  auto neg = kv;
  neg["a_step"] = "-1";
  CHECK_THROWS_AS(run_experiment(ExperimentConfig::from_key_values(neg)), SchemaError);
}

TEST_CASE("two-user sweep: one row per grid point") {
  const auto cfg = ExperimentConfig::from_key_values(
      {{"experiment", "TwoUserSweep"}, {"seed", "1"}, {"output", "o.csv"}});
  const auto t = run_experiment(cfg).table;
  CHECK(t.rows.size() == 40);
  CHECK(t.rows[4][t.column("a")] == "0.25");
  CHECK(t.rows[4][t.column("exact")] == "1");
  CHECK(t.rows[5][t.column("exact")] == "0");
  CHECK(t.rows[19][t.column("outer_s0")].empty());
}

TEST_CASE("run: files, manifest digest, determinism, output override") {
  const fs::path dir = scratch("run");
  write_channel(sqrt_prime_channel(), dir / "c.chan");
  KeyValues kv{{"experiment", "AlignPeaks"}, {"seed", "5"}, {"output", (dir / "peaks.csv").string()},
               {"channel", "c.chan"}, {"count", "3"}};
  const auto cfg = ExperimentConfig::from_key_values(kv, dir);
  const auto m1 = run(cfg);
  REQUIRE(m1.outputs.size() == 1);
  const std::string first = read_text(dir / "peaks.csv");
  CHECK(m1.outputs[0].sha256 == sha256_file(dir / "peaks.csv"));
  CHECK(fs::exists(dir / "peaks.csv.manifest.json"));
  run(cfg);
  CHECK(read_text(dir / "peaks.csv") == first);

  // Same numbers as calling the module directly.
  const auto seq = peak_sequence(sqrt_prime_channel(), AlignmentConfig{}, 3);
  const auto t = parse_csv(first);
  REQUIRE(t.rows.size() == 4);
  for (std::size_t i = 0; i < 3; ++i) CHECK(t.rows[i][t.column("b")] == std::to_string(seq.peaks[i].b));
  CHECK(t.rows[3][t.column("row")] == "slope");

  ::setenv("WBSLOPE_OUTPUT_DIR", (dir / "override").c_str(), 1);
  kv["output"] = "moved.csv";
  run(ExperimentConfig::from_key_values(kv, dir));
  ::unsetenv("WBSLOPE_OUTPUT_DIR");
  CHECK(fs::exists(dir / "override" / "moved.csv"));
}

TEST_CASE("SHA-256 known answer") {
  const fs::path p = scratch("sha") / "abc.txt";
  write_text(p, "abc");
  CHECK(sha256_file(p) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("plot data recipes") {
  const auto fig2 = run_experiment(ExperimentConfig::from_key_values(
                                       {{"experiment", "TwoUserSweep"}, {"seed", "1"}, {"output", "o"}}))
                        .table;
  const std::string j = plotdata_json(fig2, PlotRecipe::Fig2);
  CHECK(j.find("\"exact region\"") != std::string::npos);
  CHECK_THROWS_AS(plotdata_json(fig2, PlotRecipe::Fig3a), SchemaError);
  CHECK_THROWS_AS(plotdata_json(fig2, PlotRecipe::Fig3b), SchemaError);
  CHECK(parse_recipe("Fig3b") == PlotRecipe::Fig3b);
  CHECK_THROWS_AS(parse_recipe("fig9"), SchemaError);
}
