#include "wbslope/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <set>

#include <openssl/evp.h>

#include "json.hpp"
#include "wbslope/delay_alignment.hpp"
#include "wbslope/errors.hpp"
#include "wbslope/kuser_bounds.hpp"
#include "wbslope/random.hpp"
#include "wbslope/two_user_bounds.hpp"

namespace wbs {

namespace {

std::string squash(std::string s) {
  std::string out;
  for (char c : s)
    if (c != '_' && c != '-' && c != ' ') out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

const std::set<std::string> kCommonKeys{"experiment", "seed", "output"};

std::set<std::string> known_keys(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::TwoUserSweep: return {"a_min", "a_max", "a_step", "constraint"};
    case ExperimentKind::AlignSearch: return {"delays", "channel", "delta", "b_start", "b_max", "leakage_tol"};
    case ExperimentKind::AlignSweep:
      return {"channel", "b_min", "b_max", "steps", "constraint", "leakage_tol"};
    case ExperimentKind::AlignPeaks:
      return {"channel", "delta", "count", "b_start", "b_max", "delta_decay", "constraint", "leakage_tol"};
    case ExperimentKind::KUserOuter: return {"channel", "epsilon", "constraint"};
    case ExperimentKind::PairingMC: return {"dist", "k_list", "epsilon", "trials", "threads"};
  }
  return {};
}

// Typed access to the parameter block; every failure is a SchemaError.
class Params {
 public:
  Params(const ExperimentConfig& cfg) : cfg_(cfg) {}

  bool has(const std::string& key) const { return cfg_.parameters.count(key) > 0; }
  double num(const std::string& key, double fallback) const {
    return has(key) ? parse_double(cfg_.parameters.at(key), key) : fallback;
  }
  long long integer(const std::string& key, long long fallback) const {
    return has(key) ? parse_int(cfg_.parameters.at(key), key) : fallback;
  }
  std::string text(const std::string& key, const std::string& fallback) const {
    return has(key) ? cfg_.parameters.at(key) : fallback;
  }
  std::filesystem::path path(const std::string& key) const {
    if (!has(key)) throw SchemaError("missing key '" + key + "'");
    std::filesystem::path p = cfg_.parameters.at(key);
    return p.is_relative() && !cfg_.base_dir.empty() ? cfg_.base_dir / p : p;
  }
  ConstraintKind constraint() const {
    try {
      return parse_constraint(text("constraint", "equal_power"));
    } catch (const InvalidInput& e) {
      throw SchemaError(e.what());
    }
  }
  ChannelInstance channel() const { return read_channel(path("channel")); }

 private:
  const ExperimentConfig& cfg_;
};

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

CsvTable two_user_sweep(const Params& p) {
  const double lo = p.num("a_min", 0.05);
  const double hi = p.num("a_max", 2.0);
  const double step = p.num("a_step", 0.05);
  if (!(lo > 0.0 && hi >= lo && step > 0.0)) throw SchemaError("need 0 < a_min <= a_max and a_step > 0");
  const long long n = std::llround(std::floor((hi - lo) / step + 1e-9));
  std::vector<double> grid;
  for (long long k = 0; k <= n; ++k) grid.push_back(std::round((lo + k * step) * 1e12) / 1e12);
  CsvTable t;
  t.header = {"a", "inner_s0", "inner_scheme", "kramer_s0", "outer_s0", "exact"};
  for (const auto& r : fig2_sweep(grid, p.constraint()))
    t.rows.push_back({format_double(r.a), format_double(r.inner_s0), to_string(r.inner_scheme),
                      opt(r.kramer_s0), opt(r.outer_s0), r.exact ? "1" : "0"});
  return t;
}

AlignmentConfig alignment_config(const Params& p) {
  AlignmentConfig cfg;
  cfg.delta = p.num("delta", cfg.delta);
  cfg.b_start = p.integer("b_start", cfg.b_start);
  cfg.b_max = p.integer("b_max", cfg.b_max);
  cfg.leakage_tol = p.num("leakage_tol", cfg.leakage_tol);
  cfg.delta_decay = p.num("delta_decay", cfg.delta_decay);
  try {
    cfg.validate();
  } catch (const InvalidInput& e) {
    throw SchemaError(e.what());
  }
  return cfg;
}

CsvTable align_search(const Params& p) {
  const AlignmentConfig cfg = alignment_config(p);
  const bool with_channel = p.has("channel");
  if (with_channel == p.has("delays")) throw SchemaError("give exactly one of 'channel' or 'delays'");
  const BandwidthCandidate c = with_channel ? search_bandwidth(p.channel(), cfg)
                                            : search_bandwidth(read_delays(p.path("delays")), cfg);
  CsvTable t;
  t.header = {"b", "residual_max"};
  std::vector<std::string> row{std::to_string(c.b), format_double(c.residual_max)};
  const auto k = c.k.rows();
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < k; ++i) {
      if (i == j) continue;
      const std::string tag = std::to_string(j + 1) + "_" + std::to_string(i + 1);
      t.header.push_back("k_" + tag);
      t.header.push_back("residual_" + tag);
      row.push_back(std::to_string(c.k(j, i)));
      row.push_back(format_double(c.residual(j, i)));
    }
  for (Eigen::Index j = 0; j < c.leakage.size(); ++j) {
    t.header.push_back("leakage_" + std::to_string(j + 1));
    row.push_back(format_double(c.leakage(j)));
  }
  t.rows.push_back(std::move(row));
  return t;
}

CsvTable align_sweep(const Params& p) {
  const ChannelInstance chan = p.channel();
  const double lo = p.num("b_min", 1.0);
  const double hi = p.num("b_max", 100.0);
  const long long steps = p.integer("steps", 200);
  if (!(lo > 0.0 && hi > lo && steps >= 2)) throw SchemaError("need 0 < b_min < b_max and steps >= 2");
  std::vector<double> grid;
  for (long long k = 0; k < steps; ++k)
    grid.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(steps - 1));
  CsvTable t;
  t.header = {"b", "ebno_db", "spectral_efficiency", "leakage_total"};
  for (const auto& s : sweep_bandwidth(chan, grid, p.constraint(), p.num("leakage_tol", 1e-9)))
    t.rows.push_back({format_double(s.b), format_double(s.ebno_db),
                      format_double(s.spectral_efficiency), format_double(s.leakage_total)});
  return t;
}

ExperimentResult align_peaks(const Params& p) {
  const ChannelInstance chan = p.channel();
  const AlignmentConfig cfg = alignment_config(p);
  const ConstraintKind kind = p.constraint();
  const long long count = p.integer("count", 5);
  if (count < 2) throw SchemaError("'count' must be at least 2");
  const PeakSequence seq = peak_sequence(chan, cfg, static_cast<int>(count));
  ExperimentResult out;
  if (seq.warning) out.warnings.push_back(*seq.warning);
  if (seq.peaks.empty()) throw Error("no aligned bandwidth found: " + seq.warning.value_or(""));
  const SequenceSlope slope = sequence_slope(chan, seq.peaks, kind, cfg.leakage_tol);
  const std::string ebno_min = format_double(to_db(ebnomin_closed_form(chan, kind)));

  CsvTable& t = out.table;
  t.header = {"row", "index", "b", "residual_max", "leakage_max", "ebno_db", "spectral_efficiency",
              "ebno_min_db", "s0", "delta_s0", "error_estimate"};
  for (std::size_t i = 0; i < seq.peaks.size(); ++i) {
    const auto& c = seq.peaks[i];
    const auto pt = sweep_bandwidth(chan, {static_cast<double>(c.b)}, kind, cfg.leakage_tol).front();
    const auto& s = slope.per_peak[i];
    t.rows.push_back({"peak", std::to_string(i + 1), std::to_string(c.b), format_double(c.residual_max),
                      format_double(c.leakage.maxCoeff()), format_double(pt.ebno_db),
                      format_double(pt.spectral_efficiency), ebno_min, format_double(s.s0),
                      opt(s.delta_s0), format_double(s.error_estimate)});
  }
  t.rows.push_back({"slope", "", "", "", "", "", "", ebno_min, format_double(slope.limsup.s0),
                    opt(slope.limsup.delta_s0), format_double(slope.limsup.error_estimate)});
  return out;
}

CsvTable kuser_outer(const Params& p) {
  const ChannelInstance chan = p.channel();
  const double eps = p.num("epsilon", 0.3);
  if (!(eps > 0.0 && eps < 1.0)) throw SchemaError("'epsilon' must lie in (0, 1)");
  const ConstraintKind kind = p.constraint();
  const PairGraph pairs = detect_pairs(chan, eps);
  const Eigen::MatrixXd g = chan.power_gains();
  const SlopeResult r = kind == ConstraintKind::EqualRate ? equal_rate_outer_sample(g, eps)
                                                          : equal_power_outer_sample(g, eps);
  CsvTable t;
  t.header = {"constraint", "epsilon", "users", "strong_pairs", "weak_pairs", "theta",
              "ebno_min_db", "s0", "delta_s0"};
  t.rows.push_back({to_string(kind), format_double(eps), std::to_string(pairs.k),
                    std::to_string(pairs.strong_pairs.size()), std::to_string(pairs.weak_pairs.size()),
                    format_double(unpaired_fraction(g, pairs)), format_double(r.ebno_min_db),
                    format_double(r.s0), opt(r.delta_s0)});
  return t;
}

CsvTable pairing_mc(const Params& p, std::uint64_t seed) {
  GainDistribution dist;
  try {
    dist = GainDistribution::parse(p.text("dist", "exp"));
  } catch (const InvalidInput& e) {
    throw SchemaError(e.what());
  }
  const auto ks = parse_double_list(p.text("k_list", "10,50,200"), "k_list");
  const double eps = p.num("epsilon", 0.3);
  const long long trials = p.integer("trials", 500);
  const long long threads = p.integer("threads", 0);
  if (ks.empty()) throw SchemaError("'k_list' is empty");
  if (!(eps > 0.0 && eps < 1.0)) throw SchemaError("'epsilon' must lie in (0, 1)");
  if (trials < 1) throw SchemaError("'trials' must be positive");
  if (threads < 0) throw SchemaError("'threads' must be >= 0");
  CsvTable t;
  t.header = {"K", "trials", "p_pair", "p_pair_ci_lo", "p_pair_ci_hi",
              "p_matching", "p_matching_ci_lo", "p_matching_ci_hi"};
  for (double kd : ks) {
    const int k = static_cast<int>(kd);
    if (kd != k || k < 2 || k % 2) throw SchemaError("'k_list' entries must be even integers >= 2");
    const auto est = monte_carlo_pairing(dist, k, eps, trials, mix_seed(seed, static_cast<std::uint64_t>(k)),
                                         static_cast<int>(threads));
    const auto& a = est.all_strong_paired;
    const auto& m = est.perfect_weak_matching;
    t.rows.push_back({std::to_string(k), std::to_string(trials), format_double(a.estimate),
                      format_double(a.ci_lo), format_double(a.ci_hi), format_double(m.estimate),
                      format_double(m.ci_lo), format_double(m.ci_hi)});
  }
  return t;
}

}  // namespace

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::TwoUserSweep: return "TwoUserSweep";
    case ExperimentKind::AlignSearch: return "AlignSearch";
    case ExperimentKind::AlignSweep: return "AlignSweep";
    case ExperimentKind::AlignPeaks: return "AlignPeaks";
    case ExperimentKind::KUserOuter: return "KUserOuter";
    case ExperimentKind::PairingMC: return "PairingMC";
  }
  return "?";
}

ExperimentKind parse_experiment(const std::string& name) {
  const std::string s = squash(name);
  for (auto k : {ExperimentKind::TwoUserSweep, ExperimentKind::AlignSearch, ExperimentKind::AlignSweep,
                 ExperimentKind::AlignPeaks, ExperimentKind::KUserOuter, ExperimentKind::PairingMC})
    if (squash(to_string(k)) == s) return k;
  throw SchemaError("unknown experiment '" + name + "'");
}

ExperimentConfig ExperimentConfig::from_key_values(const KeyValues& kv, const std::filesystem::path& base_dir) {
  auto need = [&](const char* key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw SchemaError(std::string("config is missing '") + key + "'");
    return it->second;
  };
  ExperimentConfig cfg;
  cfg.experiment = parse_experiment(need("experiment"));
  const long long seed = parse_int(need("seed"), "seed");
  if (seed < 0) throw SchemaError("'seed' must be nonnegative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.output_path = need("output");
  if (cfg.output_path.empty()) throw SchemaError("'output' is empty");
  cfg.base_dir = base_dir;
  const auto known = known_keys(cfg.experiment);
  for (const auto& [key, value] : kv) {
    if (kCommonKeys.count(key)) continue;
    if (!known.count(key))
      throw SchemaError("unknown key '" + key + "' for " + to_string(cfg.experiment));
    cfg.parameters.emplace(key, value);
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::read(const std::filesystem::path& path) {
  return from_key_values(read_key_values(path), path.parent_path());
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const Params p(cfg);
  switch (cfg.experiment) {
    case ExperimentKind::TwoUserSweep: return {two_user_sweep(p), {}};
    case ExperimentKind::AlignSearch: return {align_search(p), {}};
    case ExperimentKind::AlignSweep: return {align_sweep(p), {}};
    case ExperimentKind::AlignPeaks: return align_peaks(p);
    case ExperimentKind::KUserOuter: return {kuser_outer(p), {}};
    case ExperimentKind::PairingMC: return {pairing_mc(p, cfg.seed), {}};
  }
  throw SchemaError("unhandled experiment");
}

std::filesystem::path output_dir_override() {
  const char* v = std::getenv("WBSLOPE_OUTPUT_DIR");
  return v && *v ? std::filesystem::path(v) : std::filesystem::path();
}

std::filesystem::path resolve_output(const std::filesystem::path& p) {
  const auto dir = output_dir_override();
  return !dir.empty() && p.is_relative() ? dir / p : p;
}

std::string sha256_file(const std::filesystem::path& path) {
  const std::string bytes = read_text(path);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["tool_version"] = tool_version;
  j["config"] = config;
  j["wall_seconds"] = wall_seconds;
  j["outputs"] = nlohmann::ordered_json::array();
  for (const auto& o : outputs) j["outputs"].push_back({{"path", o.path.string()}, {"sha256", o.sha256}});
  j["warnings"] = warnings;
  return j.dump(2) + "\n";
}

RunManifest run(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentResult result = run_experiment(cfg);
  const auto csv = resolve_output(cfg.output_path);
  write_text(csv, result.table.to_text());

  RunManifest m;
  m.config = cfg.parameters;
  m.config["experiment"] = to_string(cfg.experiment);
  m.config["seed"] = std::to_string(cfg.seed);
  m.config["output"] = cfg.output_path.string();
  m.outputs.push_back({csv, sha256_file(csv)});
  m.warnings = result.warnings;
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_text(csv.string() + ".manifest.json", m.to_json());
  return m;
}

PlotRecipe parse_recipe(const std::string& name) {
  const std::string s = squash(name);
  if (s == "fig2") return PlotRecipe::Fig2;
  if (s == "fig3a") return PlotRecipe::Fig3a;
  if (s == "fig3b") return PlotRecipe::Fig3b;
  throw SchemaError("unknown plot recipe '" + name + "' (expected fig2, fig3a or fig3b)");
}

namespace {

using Json = nlohmann::ordered_json;

Json series(const std::string& name, const std::string& style, const std::vector<double>& x,
            const std::vector<double>& y) {
  return {{"name", name}, {"style", style}, {"x", x}, {"y", y}};
}

double cell(const CsvTable& t, std::size_t row, std::size_t col) {
  return parse_double(t.rows[row][col], t.header[col]);
}

}  // namespace

std::string plotdata_json(const CsvTable& csv, PlotRecipe recipe) {
  Json j;
  if (recipe == PlotRecipe::Fig2) {
    const auto a = csv.column("a"), in = csv.column("inner_s0"), out = csv.column("outer_s0"),
               ex = csv.column("exact");
    std::vector<double> xa, yi, xo, yo, xe, ye;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
      xa.push_back(cell(csv, r, a));
      yi.push_back(cell(csv, r, in));
      if (!csv.rows[r][out].empty()) {
        xo.push_back(xa.back());
        yo.push_back(cell(csv, r, out));
      }
      if (csv.rows[r][ex] == "1") {
        xe.push_back(xa.back());
        ye.push_back(yi.back());
      }
    }
    j["title"] = "Two-user sum slope bounds";
    j["x_label"] = "a (cross-to-direct power gain)";
    j["y_label"] = "S0 (bits/s/Hz/3dB)";
    j["series"] = {series("inner", "line", xa, yi), series("outer", "line", xo, yo),
                   series("exact region", "marker", xe, ye)};
  } else if (recipe == PlotRecipe::Fig3a) {
    const auto e = csv.column("ebno_db"), s = csv.column("spectral_efficiency");
    std::vector<double> x, y;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
      x.push_back(cell(csv, r, e));
      y.push_back(cell(csv, r, s));
    }
    j["title"] = "Even-slot scheme over a bandwidth sweep";
    j["x_label"] = "Eb/N0 (dB)";
    j["y_label"] = "spectral efficiency (bits/s/Hz)";
    j["series"] = {series("sweep", "scatter", x, y)};
  } else {
    const auto kind = csv.column("row"), e = csv.column("ebno_db"), s = csv.column("spectral_efficiency"),
               e0 = csv.column("ebno_min_db"), s0 = csv.column("s0");
    std::vector<double> x, y;
    std::optional<std::pair<double, double>> line;  // (Eb/N0 min dB, S0)
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
      if (csv.rows[r][kind] == "peak") {
        x.push_back(cell(csv, r, e));
        y.push_back(cell(csv, r, s));
      } else if (csv.rows[r][kind] == "slope") {
        line = {cell(csv, r, e0), cell(csv, r, s0)};
      }
    }
    if (!line) throw SchemaError("fig3b needs a 'slope' row");
    // First-order law: C = S0 (Eb/N0|dB - Eb/N0min|dB) / (10 log10 2).
    const double x0 = line->first;
    const double x1 = x.empty() ? x0 + 1.0 : std::max(x0 + 1e-3, *std::max_element(x.begin(), x.end()));
    const double gain = line->second / (10.0 * std::log10(2.0));
    j["title"] = "Peak bandwidths and first-order slope";
    j["x_label"] = "Eb/N0 (dB)";
    j["y_label"] = "spectral efficiency (bits/s/Hz)";
    j["series"] = {series("peaks", "marker", x, y),
                   series("first-order slope", "line", {x0, x1}, {0.0, gain * (x1 - x0)})};
  }
  return j.dump(2) + "\n";
}

void emit_plotdata(const std::filesystem::path& csv_path, PlotRecipe recipe,
                   const std::filesystem::path& out_path) {
  write_text(out_path, plotdata_json(read_csv(csv_path), recipe));
}

}  // namespace wbs
