#include "wbslope/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "wbslope/errors.hpp"

namespace wbs {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::string& require(const KeyValues& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw SchemaError("missing key '" + key + "'");
  return it->second;
}

Eigen::MatrixXd square_from(const KeyValues& kv, const std::string& key, int k) {
  const auto v = parse_double_list(require(kv, key), key);
  if (static_cast<int>(v.size()) != k * k)
    throw SchemaError("'" + key + "' needs " + std::to_string(k * k) + " values");
  Eigen::MatrixXd m(k, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i) m(j, i) = v[static_cast<std::size_t>(j * k + i)];
  return m;
}

int users_from(const KeyValues& kv) {
  const long long k = parse_int(require(kv, "users"), "users");
  if (k < 2 || k > 100000) throw SchemaError("'users' must be at least 2");
  return static_cast<int>(k);
}

std::string join(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index j = 0; j < m.rows(); ++j)
    for (Eigen::Index i = 0; i < m.cols(); ++i) {
      if (!out.empty()) out += ' ';
      out += format_double(m(j, i));
    }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw SchemaError("'" + what + "': not a number: '" + text + "'");
  return v;
}

long long parse_int(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  long long v = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw SchemaError("'" + what + "': not an integer: '" + text + "'");
  return v;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
  std::string s = text;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::replace(s.begin(), s.end(), ';', ' ');
  std::istringstream in(s);
  std::vector<double> out;
  for (std::string tok; in >> tok;) out.push_back(parse_double(tok, what));
  return out;
}

KeyValues parse_key_values(const std::string& text, const std::string& source) {
  KeyValues kv;
  std::istringstream in(text);
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    const std::string where = source + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw SchemaError(where + ": expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw SchemaError(where + ": empty key");
    if (!kv.emplace(key, trim(t.substr(eq + 1))).second)
      throw SchemaError(where + ": duplicate key '" + key + "'");
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  return parse_key_values(read_text(path), path.string());
}

ChannelInstance channel_from_key_values(const KeyValues& kv) {
  const int k = users_from(kv);
  ChannelInstance chan;
  chan.delays = square_from(kv, "delays", k);
  if (kv.count("power_gains")) {
    if (kv.count("gain_re") || kv.count("gain_im"))
      throw SchemaError("give either power_gains or gain_re/gain_im, not both");
    const Eigen::MatrixXd g = square_from(kv, "power_gains", k);
    if ((g.array() < 0.0).any()) throw SchemaError("power_gains must be nonnegative");
    chan.gains = g.cwiseSqrt().cast<std::complex<double>>();
  } else {
    const Eigen::MatrixXd re = square_from(kv, "gain_re", k);
    const Eigen::MatrixXd im = kv.count("gain_im") ? square_from(kv, "gain_im", k)
                                                   : Eigen::MatrixXd::Zero(k, k);
    chan.gains = re.cast<std::complex<double>>() + std::complex<double>(0.0, 1.0) * im.cast<std::complex<double>>();
  }
  chan.noise_density = kv.count("noise_density") ? parse_double(kv.at("noise_density"), "noise_density") : 1.0;
  if (kv.count("powers")) {
    const auto p = parse_double_list(kv.at("powers"), "powers");
    if (static_cast<int>(p.size()) != k) throw SchemaError("'powers' needs " + std::to_string(k) + " values");
    chan.powers = Eigen::Map<const Eigen::VectorXd>(p.data(), k);
  } else {
    chan.powers = Eigen::VectorXd::Ones(k);
  }
  try {
    chan.validate();
  } catch (const InvalidInput& e) {
    throw SchemaError(std::string("channel file: ") + e.what());
  }
  return chan;
}

ChannelInstance read_channel(const std::filesystem::path& path) {
  return channel_from_key_values(read_key_values(path));
}

std::string channel_to_text(const ChannelInstance& chan) {
  chan.validate();
  std::string out;
  out += "users = " + std::to_string(chan.users()) + "\n";
  out += "noise_density = " + format_double(chan.noise_density) + "\n";
  out += "powers = " + join(chan.powers.transpose()) + "\n";
  out += "delays = " + join(chan.delays) + "\n";
  out += "gain_re = " + join(chan.gains.real()) + "\n";
  out += "gain_im = " + join(chan.gains.imag()) + "\n";
  return out;
}

void write_channel(const ChannelInstance& chan, const std::filesystem::path& path) {
  write_text(path, channel_to_text(chan));
}

Eigen::MatrixXd read_delays(const std::filesystem::path& path) {
  const KeyValues kv = read_key_values(path);
  return square_from(kv, "delays", users_from(kv));
}

std::string CsvTable::to_text() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) {
    if (r.size() != header.size()) throw SchemaError("CSV row width differs from header");
    line(r);
  }
  return out;
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw SchemaError("CSV is missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw SchemaError("CSV has no header");
  t.header = split(trim(line));
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split(trim(line));
    if (cells.size() != t.header.size()) throw SchemaError("CSV row width differs from header");
    t.rows.push_back(std::move(cells));
  }
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path)); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace wbs
