#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "wbslope/channel_model.hpp"

namespace wbs {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Strict full-string number parsing; SchemaError naming `what` otherwise.
double parse_double(const std::string& text, const std::string& what);
long long parse_int(const std::string& text, const std::string& what);
std::vector<double> parse_double_list(const std::string& text, const std::string& what);

/// Flat `key = value` text. Blank lines and lines starting with '#' are
/// skipped; a repeated key is a SchemaError.
using KeyValues = std::map<std::string, std::string>;
KeyValues parse_key_values(const std::string& text, const std::string& source);
KeyValues read_key_values(const std::filesystem::path& path);

/// Channel file: users, noise_density, powers (K values), delays (K*K, row
/// major), and either gain_re / gain_im (K*K each, gain_im optional) or
/// power_gains (K*K, zero phase).
ChannelInstance channel_from_key_values(const KeyValues& kv);
ChannelInstance read_channel(const std::filesystem::path& path);
void write_channel(const ChannelInstance& chan, const std::filesystem::path& path);
std::string channel_to_text(const ChannelInstance& chan);

/// Delay matrix alone: users and delays. Channel files are accepted too.
Eigen::MatrixXd read_delays(const std::filesystem::path& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_text() const;
  /// Column index by name; SchemaError when missing.
  std::size_t column(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace wbs
