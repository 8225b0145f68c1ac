// End-to-end acceptance checks. One PASS/FAIL line per criterion; the exit
// status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "wbslope/channel_model.hpp"
#include "wbslope/delay_alignment.hpp"
#include "wbslope/errors.hpp"
#include "wbslope/experiment.hpp"
#include "wbslope/kuser_bounds.hpp"
#include "wbslope/random.hpp"
#include "wbslope/slope_metrics.hpp"
#include "wbslope/two_user_bounds.hpp"

using namespace wbs;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failed conditions into the detail text.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      if (failures_++ < 4) notes_ << (notes_.tellp() > 0 ? "; " : "") << what;
    }
  }
  void note(const std::string& s) { info_ << (info_.tellp() > 0 ? ", " : "") << s; }
  Outcome done() const {
    std::string d = info_.str();
    if (!pass_) d += (d.empty() ? "" : " | ") + std::string("failed: ") + notes_.str();
    return {pass_, d};
  }

 private:
  bool pass_ = true;
  int failures_ = 0;
  std::ostringstream notes_;
  std::ostringstream info_;
};

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

Eigen::MatrixXd sqrt_prime_delays() {
  Eigen::MatrixXd tau(3, 3);
  tau << 0, std::sqrt(2.0), std::sqrt(3.0), std::sqrt(5.0), 0, std::sqrt(6.0), std::sqrt(7.0),
      std::sqrt(10.0), 0;
  return tau / 10.0;
}

double expected_inner(double a) {
  if (a > 1.0) return 4.0;
  if (a >= 0.5) return 2.0;
  return 4.0 / (1.0 + 2.0 * a);
}

Outcome fig2_reproduction() {
  Checker c;
  std::vector<double> grid;
  for (int k = 1; k <= 40; ++k) grid.push_back(0.05 * k);
  const auto rows = fig2_sweep(grid, ConstraintKind::EqualPower);
  c.expect(rows.size() == grid.size(), "row count");
  int exact_rows = 0;
  for (const auto& r : rows) {
    c.expect(std::abs(r.inner_s0 - expected_inner(r.a)) <= 1e-9, "inner at a=" + fmt(r.a));
    if (r.a < 1.0) {
      c.expect(r.kramer_s0 && std::abs(*r.kramer_s0 - 8.0 / (2.0 * r.a + 2.0)) <= 1e-9,
               "outer at a=" + fmt(r.a));
    }
    if (r.a <= 0.25 + 1e-12) {
      c.expect(r.outer_s0 && std::abs(*r.outer_s0 - r.inner_s0) <= 1e-9,
               "inner != outer at a=" + fmt(r.a));
      ++exact_rows;
    }
  }
  c.note(std::to_string(rows.size()) + " grid points, " + std::to_string(exact_rows) + " tight for a <= 1/4");
  return c.done();
}

Outcome awgn_sanity() {
  Checker c;
  RateCurve curve;
  for (int i = 0; i <= 30; ++i) {
    const double s = 1e-5 * std::pow(10.0, i / 10.0);
    curve.samples.emplace_back(s, std::log2(1.0 + s));
  }
  const auto r = numeric_slope_estimate(curve);
  c.expect(std::abs(r.s0 - 2.0) <= 1e-3, "s0=" + fmt(r.s0, 8));
  c.expect(std::abs(r.ebno_min_db - (-1.59)) <= 0.01, "Eb/N0 min=" + fmt(r.ebno_min_db, 6));
  c.note("s0=" + fmt(r.s0, 8) + ", Eb/N0 min=" + fmt(r.ebno_min_db, 6) + " dB");
  return c.done();
}

bool certificate_holds(const Eigen::MatrixXd& tau, const BandwidthCandidate& cand, double delta) {
  for (Eigen::Index j = 0; j < tau.rows(); ++j)
    for (Eigen::Index i = 0; i < tau.cols(); ++i) {
      if (i == j) continue;
      const double x = tau(j, i) * static_cast<double>(cand.b);
      if (!(std::abs(x - 2.0 * static_cast<double>(cand.k(j, i)) - 1.0) <= delta)) return false;
    }
  return true;
}

Outcome alignment_achievability() {
  Checker c;
  const Eigen::MatrixXd tau = sqrt_prime_delays();
  const auto chan = symmetric_channel(tau, 1.0, 0.8);
  AlignmentConfig cfg;
  cfg.delta = 0.2;
  const auto seq = peak_sequence(chan, cfg, 5);
  c.expect(seq.peaks.size() == 5, "found " + std::to_string(seq.peaks.size()) + " peaks");
  std::string bs;
  for (const auto& p : seq.peaks) {
    c.expect(certificate_holds(tau, p, 0.2), "certificate at b=" + std::to_string(p.b));
    bs += (bs.empty() ? "" : ",") + std::to_string(p.b);
  }
  if (seq.peaks.empty()) return c.done();
  const auto s = sequence_slope(chan, seq.peaks, ConstraintKind::EqualPower);
  const double d = *s.limsup.delta_s0;
  c.expect(d >= 0.45 && d <= 0.50, "delta S0=" + fmt(d, 6));
  c.note("peaks b=" + bs + ", delta S0 along sequence=" + fmt(d, 6));
  return c.done();
}

Outcome oscillation() {
  Checker c;
  const auto chan = symmetric_channel(sqrt_prime_delays(), 1.0, 0.8);
  const auto peak = search_bandwidth(chan, AlignmentConfig{});
  std::vector<double> grid;
  const int half = 1000;
  for (int k = -half; k <= half; ++k) grid.push_back(static_cast<double>(peak.b) + 0.1 * k);
  const auto pts = sweep_bandwidth(chan, grid, ConstraintKind::EqualPower);
  std::vector<double> leak;
  for (const auto& p : pts) leak.push_back(p.leakage_total);
  const double at_peak = leak[half];
  const double hi = *std::max_element(leak.begin(), leak.end());
  const auto below = std::count_if(leak.begin(), leak.end(), [&](double e) { return e < at_peak; });
  const double rank = static_cast<double>(below) / static_cast<double>(leak.size());
  c.expect(hi >= 5.0 * at_peak, "max/peak=" + fmt(hi / at_peak));
  c.expect(rank < 0.1, "peak leakage percentile=" + fmt(100 * rank));
  c.note("b=" + std::to_string(peak.b) + " +/-100, max/peak=" + fmt(hi / at_peak) +
         ", peak percentile=" + fmt(100 * rank, 3) + "%");
  return c.done();
}

Outcome leakage_oracle() {
  Checker c;
  std::mt19937_64 gen(2718);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const long long n = static_cast<long long>(uniform01(gen) * 41.0) - 20;
    const double d = uniform01(gen) - 0.5;
    const double p = 0.5 + uniform01(gen);
    const double cov = sinc_leakage_covariance(n, n, d, p, 1e-10);
    const int parity = static_cast<int>(((n % 2) + 2) % 2);
    const double mc = oracle::time_domain_variance(parity, d, p, 100000, 8000, 100 + t);
    const double rel = std::abs(mc - cov) / cov;
    worst = std::max(worst, rel);
    c.expect(rel <= 0.02, "n=" + std::to_string(n) + " delta=" + fmt(d) + " rel=" + fmt(rel));
  }
  c.note("10 cases, worst relative error " + fmt(100 * worst, 3) + "%");
  return c.done();
}

Outcome asymptotic_bound() {
  Checker c;
  const double constant = asymptotic_equal_power_bound(GainDistribution::parse("const").moments());
  // |C|^2 ~ Exp(1): E|C|^2 = 1, E|C|^4 = 2.
  MomentSummary exp_moments = MomentSummary::from_raw(std::sqrt(std::numbers::pi) / 2.0, 1.0,
                                                      3.0 * std::sqrt(std::numbers::pi) / 4.0, 2.0);
  const double expo = asymptotic_equal_power_bound(exp_moments);
  const double lib = asymptotic_equal_power_bound(GainDistribution::parse("exp").moments());
  c.expect(std::abs(constant - 0.5) <= 1e-12, "constant=" + fmt(constant, 15));
  c.expect(std::abs(expo - 2.0 / 3.0) <= 1e-12, "exponential=" + fmt(expo, 15));
  c.expect(std::abs(lib - 2.0 / 3.0) <= 1e-12, "exponential (library moments)=" + fmt(lib, 15));
  c.note("constant=" + fmt(constant, 15) + ", exponential=" + fmt(expo, 15));
  return c.done();
}

Outcome matching_correctness() {
  Checker c;
  std::mt19937_64 gen(8128);
  int negatives = 0;
  for (int t = 0; t < 50; ++t) {
    const double prob = 0.2 + 0.3 * uniform01(gen);
    BipartiteGraph g;
    g.m = 8;
    g.adj.resize(8);
    std::vector<std::vector<bool>> adj(8, std::vector<bool>(8, false));
    for (int l = 0; l < 8; ++l)
      for (int r = 0; r < 8; ++r)
        if (uniform01(gen) < prob) {
          g.adj[l].push_back(r);
          adj[l][r] = true;
        }
    const auto m = hall_perfect_matching(g);
    const bool brute = oracle::brute_force_perfect_matching(adj);
    c.expect(m.matched.has_value() == brute, "graph " + std::to_string(t) + " disagrees");
    if (!m.matched) {
      ++negatives;
      const auto n = neighbourhood(g, m.violating_set);
      c.expect(!m.violating_set.empty() && n.size() < m.violating_set.size(),
               "graph " + std::to_string(t) + " witness invalid");
    }
  }
  c.note("50 graphs, " + std::to_string(negatives) + " without a perfect matching");
  return c.done();
}

Outcome large_k_trends() {
  Checker c;
  const auto dist = GainDistribution::parse("exp");
  std::vector<PairingEstimate> est;
  for (int k : {10, 50, 200}) est.push_back(monte_carlo_pairing(dist, k, 0.3, 500, mix_seed(99, k)));
  auto check = [&](const char* name, auto pick) {
    std::string vals;
    for (std::size_t i = 0; i < est.size(); ++i) {
      const Proportion& p = pick(est[i]);
      vals += (vals.empty() ? "" : ", ") + std::string("K=") + std::to_string(est[i].k) + ":" +
              fmt(p.estimate, 3) + " [" + fmt(p.ci_lo, 3) + "," + fmt(p.ci_hi, 3) + "]";
      if (i > 0) c.expect(p.estimate >= pick(est[i - 1]).estimate, std::string(name) + " decreases");
    }
    c.expect(pick(est.front()).ci_hi < pick(est.back()).ci_lo,
             std::string(name) + " CIs overlap between K=10 and K=200");
    c.note(std::string(name) + " " + vals);
  };
  check("Pr(all strong-paired)", [](const PairingEstimate& e) -> const Proportion& { return e.all_strong_paired; });
  check("Pr(perfect weak matching)",
        [](const PairingEstimate& e) -> const Proportion& { return e.perfect_weak_matching; });
  return c.done();
}

Outcome sandwich() {
  Checker c;
  std::mt19937_64 gen(31337);
  for (int t = 0; t < 100; ++t) {
    const TwoUserGains g{exponential01(gen) + 1e-3, exponential01(gen), exponential01(gen),
                         exponential01(gen) + 1e-3};
    for (auto kind : {ConstraintKind::EqualPower, ConstraintKind::EqualRate}) {
      const auto in = inner_bound_slope(g, kind);
      const auto out = outer_bound_slope(g, kind);
      c.expect(in.valid && out.valid && *out.s0 >= *in.s0 - 1e-9, "2-user instance " + std::to_string(t));
    }
  }
  const double eps = 0.3;
  int compared = 0, exhausted = 0;
  double worst_gap = -1.0;
  for (int t = 0; t < 20; ++t) {
    const int k = t % 2 == 0 ? 4 : 6;
    Eigen::MatrixXd tau(k, k);
    for (int i = 0; i < k * k; ++i) tau(i) = 0.05 + 0.25 * uniform01(gen);
    const double a = 0.7 + 0.29 * uniform01(gen);
    const auto chan = symmetric_channel(tau, 1.0, a);
    AlignmentConfig cfg;
    cfg.b_max = 100000;
    long long b = 0;
    try {
      b = search_bandwidth(chan, cfg).b;
    } catch (const SearchExhausted& e) {
      b = e.best_b();
      ++exhausted;
    }
    for (auto kind : {ConstraintKind::EqualPower, ConstraintKind::EqualRate}) {
      const double got = *definition2_slope_numeric(chan, static_cast<double>(b), kind).delta_s0;
      std::vector<double> outer{1.0};
      outer.push_back(kind == ConstraintKind::EqualRate ? *equal_rate_outer_sample(chan, eps).delta_s0
                                                        : *equal_power_outer_sample(chan, eps).delta_s0);
      for (double o : outer) {
        c.expect(got <= o + 1e-6, "K=" + std::to_string(k) + " achieved " + fmt(got) + " > outer " + fmt(o));
        worst_gap = std::max(worst_gap, got - o);
        ++compared;
      }
    }
  }
  c.note("100 two-user instances, " + std::to_string(compared) + " K-user comparisons (" +
         std::to_string(exhausted) + " searches capped, best b used), max achieved-outer " + fmt(worst_gap));
  return c.done();
}

Outcome determinism() {
  Checker c;
  const fs::path dir = fs::temp_directory_path() / "wbslope_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_channel(symmetric_channel(sqrt_prime_delays(), 1.0, 0.8), dir / "three.chan");
  Eigen::MatrixXd tau4(4, 4);
  tau4 << 0, 0.11, 0.13, 0.17, 0.19, 0, 0.23, 0.29, 0.31, 0.37, 0, 0.41, 0.43, 0.47, 0.53, 0;
  write_channel(symmetric_channel(tau4, 1.0, 0.85), dir / "four.chan");

  const std::vector<KeyValues> configs{
      {{"experiment", "TwoUserSweep"}, {"constraint", "equal_rate"}},
      {{"experiment", "AlignSearch"}, {"channel", "three.chan"}},
      {{"experiment", "AlignSweep"}, {"channel", "three.chan"}, {"b_min", "100"}, {"b_max", "300"}},
      {{"experiment", "AlignPeaks"}, {"channel", "three.chan"}, {"count", "3"}},
      {{"experiment", "KUserOuter"}, {"channel", "four.chan"}},
      {{"experiment", "PairingMC"}, {"k_list", "10,50"}, {"trials", "200"}, {"threads", "1"}},
  };
  int runs = 0;
  for (const auto& base : configs) {
    std::vector<std::string> outputs;
    std::vector<std::string> thread_counts{""};
    if (base.at("experiment") == "PairingMC") thread_counts = {"1", "1", "4"};
    else thread_counts = {"", ""};
    for (const auto& th : thread_counts) {
      KeyValues kv = base;
      kv["seed"] = "424242";
      kv["output"] = (dir / (base.at("experiment") + std::to_string(runs++) + ".csv")).string();
      if (!th.empty()) kv["threads"] = th;
      const auto m = run(ExperimentConfig::from_key_values(kv, dir));
      outputs.push_back(read_text(m.outputs.at(0).path));
      c.expect(m.outputs[0].sha256 == sha256_file(m.outputs[0].path), "manifest digest");
    }
    for (const auto& o : outputs)
      c.expect(o == outputs.front(), base.at("experiment") + " output differs between runs");
  }
  c.note(std::to_string(configs.size()) + " experiments, " + std::to_string(runs) +
         " runs, PairingMC at 1 and 4 threads");
  return c.done();
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "two-user sum slope sweep", 1.0, fig2_reproduction},
      {2, "AWGN numeric slope", 1.0, awgn_sanity},
      {3, "alignment achievability along peaks", 60.0, alignment_achievability},
      {4, "leakage oscillation around a peak", 60.0, oscillation},
      {5, "leakage series vs time-domain simulation", 120.0, leakage_oracle},
      {6, "asymptotic equal-power bound", 1.0, asymptotic_bound},
      {7, "matching vs permutation brute force", 30.0, matching_correctness},
      {8, "large-K pairing trends", 600.0, large_k_trends},
      {9, "sandwich suite", 300.0, sandwich},
      {10, "determinism", 300.0, determinism},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = cr.body();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > cr.budget_seconds) {
      out.pass = false;
      out.detail += " | over time budget of " + fmt(cr.budget_seconds) + " s";
    }
    if (!out.pass) ++failed;
    std::printf("%s  criterion %2d: %s (%.2f s) %s\n", out.pass ? "PASS" : "FAIL", cr.id, cr.name, secs,
                out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
