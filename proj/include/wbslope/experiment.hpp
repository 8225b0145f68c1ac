#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wbslope/io.hpp"

namespace wbs {

inline constexpr const char* kToolVersion = "0.1.0";

enum class ExperimentKind { TwoUserSweep, AlignSearch, AlignSweep, AlignPeaks, KUserOuter, PairingMC };

std::string to_string(ExperimentKind k);
/// Accepts the CamelCase names and their snake/kebab spellings.
ExperimentKind parse_experiment(const std::string& name);

/// One experiment per file. Required everywhere: `experiment`, `seed`,
/// `output`. Every other key belongs to the experiment and is checked
/// against its list of known keys.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::TwoUserSweep;
  KeyValues parameters;
  std::filesystem::path output_path;
  std::uint64_t seed = 0;
  /// Relative paths in parameters (channel, delays) resolve against this.
  std::filesystem::path base_dir;

  static ExperimentConfig from_key_values(const KeyValues& kv, const std::filesystem::path& base_dir = {});
  static ExperimentConfig read(const std::filesystem::path& path);
};

struct ExperimentResult {
  CsvTable table;
  std::vector<std::string> warnings;
};

/// The table an experiment produces. Throws SchemaError for bad or missing
/// parameters and the module's own errors otherwise.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct OutputFile {
  std::filesystem::path path;
  std::string sha256;
};

struct RunManifest {
  KeyValues config;
  std::string tool_version = kToolVersion;
  double wall_seconds = 0.0;
  std::vector<OutputFile> outputs;
  std::vector<std::string> warnings;

  std::string to_json() const;
};

/// Output directory override from the environment (WBSLOPE_OUTPUT_DIR); empty
/// when unset.
std::filesystem::path output_dir_override();
/// `p` placed under the override directory when one is set and `p` is relative.
std::filesystem::path resolve_output(const std::filesystem::path& p);

/// Runs the experiment, writes the CSV and `<csv>.manifest.json` next to it.
RunManifest run(const ExperimentConfig& cfg);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

enum class PlotRecipe { Fig2, Fig3a, Fig3b };
PlotRecipe parse_recipe(const std::string& name);

/// Writes a JSON plot description (series, axes, labels) built from the CSV.
/// Missing columns raise SchemaError.
void emit_plotdata(const std::filesystem::path& csv_path, PlotRecipe recipe,
                   const std::filesystem::path& out_path);
std::string plotdata_json(const CsvTable& csv, PlotRecipe recipe);

}  // namespace wbs
