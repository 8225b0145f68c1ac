#include "wbslope/kuser_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <thread>

#include "wbslope/errors.hpp"
#include "wbslope/random.hpp"
#include "wbslope/taylor.hpp"

namespace wbs {

namespace {

using Jet = Taylor2<double>;

void check_epsilon(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidInput("epsilon must lie in (0, 1)");
}

void check_gains(const Eigen::MatrixXd& g) {
  if (g.rows() < 2 || g.rows() != g.cols()) throw InvalidInput("gain table must be K x K, K >= 2");
  if (!g.allFinite() || (g.array() < 0.0).any()) throw InvalidInput("gains must be finite and >= 0");
  if ((g.diagonal().array() <= 0.0).any()) throw InvalidInput("direct gains must be positive");
}

bool in_band(double ratio, double eps) { return ratio >= 1.0 - eps && ratio < 1.0; }

}  // namespace

bool PairGraph::strongly_paired(int j) const {
  return std::any_of(strong_pairs.begin(), strong_pairs.end(),
                     [j](const auto& p) { return p.first == j || p.second == j; });
}

PairGraph detect_pairs(const Eigen::MatrixXd& g, double epsilon) {
  check_epsilon(epsilon);
  check_gains(g);
  PairGraph out;
  out.k = static_cast<int>(g.rows());
  out.epsilon = epsilon;
  for (int i = 0; i < out.k; ++i)
    for (int j = i + 1; j < out.k; ++j) {
      const bool at_j = in_band(g(j, i) / g(i, i), epsilon);
      const bool at_i = in_band(g(i, j) / g(j, j), epsilon);
      if (at_j || at_i) out.weak_pairs.emplace(i, j);
      if (at_j && at_i) out.strong_pairs.emplace(i, j);
    }
  return out;
}

PairGraph detect_pairs(const ChannelInstance& chan, double epsilon) {
  chan.validate();
  return detect_pairs(chan.power_gains(), epsilon);
}

MatchingResult hall_perfect_matching(const BipartiteGraph& graph) {
  const int m = graph.m;
  if (m < 0 || static_cast<int>(graph.adj.size()) != m)
    throw InvalidInput("adjacency must list every left vertex");
  for (const auto& row : graph.adj)
    for (int r : row)
      if (r < 0 || r >= m) throw InvalidInput("right vertex out of range");

  constexpr int kNone = -1;
  constexpr int kInf = std::numeric_limits<int>::max();
  std::vector<int> match_l(m, kNone), match_r(m, kNone), dist(m);

  auto bfs = [&] {
    std::queue<int> q;
    bool found = false;
    for (int l = 0; l < m; ++l) {
      dist[l] = match_l[l] == kNone ? 0 : kInf;
      if (dist[l] == 0) q.push(l);
    }
    while (!q.empty()) {
      const int l = q.front();
      q.pop();
      for (int r : graph.adj[l]) {
        const int next = match_r[r];
        if (next == kNone) {
          found = true;
        } else if (dist[next] == kInf) {
          dist[next] = dist[l] + 1;
          q.push(next);
        }
      }
    }
    return found;
  };
  auto dfs = [&](auto&& self, int l) -> bool {
    for (int r : graph.adj[l]) {
      const int next = match_r[r];
      if (next == kNone || (dist[next] == dist[l] + 1 && self(self, next))) {
        match_l[l] = r;
        match_r[r] = l;
        return true;
      }
    }
    dist[l] = kInf;
    return false;
  };
  while (bfs())
    for (int l = 0; l < m; ++l)
      if (match_l[l] == kNone) dfs(dfs, l);

  MatchingResult out;
  const auto free_l = std::find(match_l.begin(), match_l.end(), kNone);
  if (free_l == match_l.end()) {
    std::vector<std::pair<int, int>> pairs;
    for (int l = 0; l < m; ++l) pairs.emplace_back(l, match_l[l]);
    out.matched = std::move(pairs);
    return out;
  }
  // Alternating reachability from one exposed left vertex. In a maximum
  // matching every right vertex reached is matched, so |N(S)| = |S| - 1.
  std::vector<char> seen_l(m, 0), seen_r(m, 0);
  std::queue<int> q;
  const int root = static_cast<int>(free_l - match_l.begin());
  seen_l[root] = 1;
  q.push(root);
  while (!q.empty()) {
    const int l = q.front();
    q.pop();
    for (int r : graph.adj[l]) {
      if (seen_r[r]) continue;
      seen_r[r] = 1;
      const int next = match_r[r];
      if (next != kNone && !seen_l[next]) {
        seen_l[next] = 1;
        q.push(next);
      }
    }
  }
  for (int l = 0; l < m; ++l)
    if (seen_l[l]) out.violating_set.push_back(l);
  return out;
}

std::set<int> neighbourhood(const BipartiteGraph& graph, const std::vector<int>& left) {
  std::set<int> n;
  for (int l : left) n.insert(graph.adj.at(l).begin(), graph.adj.at(l).end());
  return n;
}

BipartiteGraph split_graph(const PairGraph& pairs) {
  if (pairs.k % 2 != 0) throw InvalidInput("the pairing split needs an even number of users");
  BipartiteGraph g;
  g.m = pairs.k / 2;
  g.adj.resize(g.m);
  for (const auto& [i, j] : pairs.weak_pairs)
    if (i < g.m && j >= g.m) g.adj[i].push_back(j - g.m);
  return g;
}

double equal_rate_outer_closed_form(double epsilon, double theta) {
  check_epsilon(epsilon);
  if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidInput("theta must lie in [0, 1]");
  return (2.0 - epsilon) / ((4.0 - 3.0 * epsilon) * (1.0 - theta) + (2.0 - epsilon) * theta);
}

double unpaired_fraction(const Eigen::MatrixXd& g, const PairGraph& pairs) {
  double all = 0.0, unpaired = 0.0;
  for (int j = 0; j < pairs.k; ++j) {
    all += 1.0 / g(j, j);
    if (!pairs.strongly_paired(j)) unpaired += 1.0 / g(j, j);
  }
  return unpaired / all;
}

SlopeResult equal_rate_outer_sample(const Eigen::MatrixXd& g, double epsilon) {
  const PairGraph pairs = detect_pairs(g, epsilon);
  const int k = pairs.k;
  double paired = 0.0, unpaired = 0.0;
  for (int j = 0; j < k; ++j) (pairs.strongly_paired(j) ? paired : unpaired) += 1.0 / g(j, j);
  // Minimum total snr for sum rate t bits: per-user rate t/K, x = 2^(t/K).
  const Jet x = exp(Jet::variable() * (std::numbers::ln2 / k));
  const Jet snr = (x * ((1.0 - epsilon) * x + epsilon) - 1.0) * (paired / (2.0 - epsilon)) +
                  (x - 1.0) * unpaired;
  return normalized(slope_from_power_taylor(snr), 2.0 * k);
}

SlopeResult equal_rate_outer_sample(const ChannelInstance& chan, double epsilon) {
  chan.validate();
  return equal_rate_outer_sample(chan.power_gains(), epsilon);
}

SlopeResult equal_power_outer_sample(const Eigen::MatrixXd& g, double epsilon) {
  const PairGraph pairs = detect_pairs(g, epsilon);
  const BipartiteGraph split = split_graph(pairs);
  const MatchingResult match = hall_perfect_matching(split);
  if (!match.matched)
    throw BoundUnavailable("no perfect matching of weak pairs across the user split",
                           match.violating_set);
  const int k = pairs.k;
  const Eigen::VectorXd d = g.diagonal();
  // -R'' per snr_j^2 summed over pairs; each pair keeps its tighter Kramer direction.
  double curvature = 0.0;
  for (const auto& [l, r0] : *match.matched) {
    const int a = l;
    const int b = r0 + split.m;
    double cross = 0.0;
    if (g(b, a) < g(a, a)) cross = std::max(cross, g(b, b) * g(b, a));
    if (g(a, b) < g(b, b)) cross = std::max(cross, g(a, a) * g(a, b));
    curvature += d(a) * d(a) + d(b) * d(b) + 2.0 * cross;
  }
  const double kk = static_cast<double>(k);
  const SlopeResult r = slope_from_rate_derivatives(d.sum() / kk, -curvature / (kk * kk));
  return normalized(r, interference_free_slope(d, ConstraintKind::EqualPower));
}

SlopeResult equal_power_outer_sample(const ChannelInstance& chan, double epsilon) {
  chan.validate();
  return equal_power_outer_sample(chan.power_gains(), epsilon);
}

MomentSummary MomentSummary::from_raw(double r1, double r2, double r3, double r4) {
  MomentSummary s;
  s.m2 = r2;
  s.m4 = r4;
  auto& c = s.central;
  c.mu = r1;
  c.variance = std::max(0.0, r2 - r1 * r1);
  if (c.variance > 0.0) {
    const double sd = std::sqrt(c.variance);
    c.skewness = (r3 - 3.0 * r1 * r2 + 2.0 * r1 * r1 * r1) / (sd * sd * sd);
    c.kurtosis =
        (r4 - 4.0 * r1 * r3 + 6.0 * r1 * r1 * r2 - 3.0 * r1 * r1 * r1 * r1) / (c.variance * c.variance);
  }
  s.validate();
  return s;
}

MomentSummary MomentSummary::from_samples(const std::vector<double>& x) {
  if (x.empty()) throw InvalidInput("no samples");
  double r[4] = {0, 0, 0, 0};
  for (double v : x) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidInput("|C| samples must be finite and >= 0");
    double p = v;
    for (double& acc : r) {
      acc += p;
      p *= v;
    }
  }
  const double n = static_cast<double>(x.size());
  return from_raw(r[0] / n, r[1] / n, r[2] / n, r[3] / n);
}

void MomentSummary::validate() const {
  if (!std::isfinite(m2) || !std::isfinite(m4) || !std::isfinite(central.mu) ||
      !std::isfinite(central.variance) || !std::isfinite(central.skewness) ||
      !std::isfinite(central.kurtosis))
    throw InvalidInput("moments must be finite");
  if (m2 < 0.0 || m4 < 0.0) throw InvalidInput("even moments must be nonnegative");
  if (m4 < m2 * m2 * (1.0 - 1e-12)) throw InvalidInput("moments violate m4 >= m2^2");
}

double asymptotic_equal_power_bound_central(const CentralMoments& c) {
  const double mu2 = c.mu * c.mu;
  const double s2 = c.variance;
  const double s = std::sqrt(s2);
  // (E X^2)^2 and E X^4 expanded about the mean of X = |C_jj|.
  const double num = mu2 * mu2 + 2.0 * s2 * mu2 + s2 * s2;
  const double den = mu2 * mu2 + 6.0 * mu2 * s2 + 4.0 * c.skewness * c.mu * s2 * s +
                     c.kurtosis * s2 * s2;
  if (!(den > 0.0)) throw DegenerateError("fourth moment is zero");
  return 1.0 / (num / den + 1.0);
}

double asymptotic_equal_power_bound(const MomentSummary& m) {
  m.validate();
  if (!(m.m4 > 0.0)) throw DegenerateError("fourth moment is zero");
  const double raw = 1.0 / (m.m2 * m.m2 / m.m4 + 1.0);
  const double central = asymptotic_equal_power_bound_central(m.central);
  if (std::abs(raw - central) > 1e-12 * std::max(1.0, raw))
    throw InvalidInput("raw and central moments disagree");
  return raw;
}

GainDistribution GainDistribution::parse(const std::string& name) {
  if (name == "exp" || name == "exponential") return {Kind::Exponential};
  if (name == "rayleigh") return {Kind::Rayleigh};
  if (name == "const" || name == "constant") return {Kind::Constant};
  throw InvalidInput("unknown gain distribution '" + name + "' (expected exp, rayleigh or const)");
}

std::string GainDistribution::name() const {
  switch (kind) {
    case Kind::Exponential: return "exp";
    case Kind::Rayleigh: return "rayleigh";
    case Kind::Constant: return "const";
  }
  return "?";
}

namespace {
// Rayleigh scale giving a unit mean.
const double kRayleighScale = std::sqrt(2.0 / std::numbers::pi);
}  // namespace

double GainDistribution::sample(std::mt19937_64& gen) const {
  switch (kind) {
    case Kind::Exponential: return exponential01(gen);
    case Kind::Rayleigh: return kRayleighScale * std::sqrt(2.0 * exponential01(gen));
    case Kind::Constant: return 1.0;
  }
  return 1.0;
}

MomentSummary GainDistribution::moments() const {
  // E|C|^n with |C|^2 distributed as `kind`.
  auto raw = [&](int n) {
    const double h = n / 2.0;
    switch (kind) {
      case Kind::Exponential: return std::tgamma(1.0 + h);
      case Kind::Rayleigh:
        return std::pow(kRayleighScale, h) * std::pow(2.0, h / 2.0) * std::tgamma(1.0 + h / 2.0);
      case Kind::Constant: return 1.0;
    }
    return 1.0;
  };
  return MomentSummary::from_raw(raw(1), raw(2), raw(3), raw(4));
}

Proportion wilson_interval(long long successes, long long trials, double z) {
  if (trials < 1 || successes < 0 || successes > trials) throw InvalidInput("bad proportion");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z / (1.0 + z2 / n) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  const double lo = successes == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, centre + half);
  return {successes, trials, p, lo, hi};
}

Eigen::MatrixXd sample_power_gains(const GainDistribution& dist, int k, std::mt19937_64& gen) {
  Eigen::MatrixXd g(k, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i) g(j, i) = dist.sample(gen);
  return g;
}

PairingEstimate monte_carlo_pairing(const GainDistribution& dist, int k, double epsilon,
                                    long long trials, std::uint64_t seed, int threads) {
  check_epsilon(epsilon);
  if (k < 2 || k % 2 != 0) throw InvalidInput("K must be even and at least 2");
  if (trials < 1) throw InvalidInput("trials must be positive");
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<long long>(threads, trials));

  std::vector<char> paired(trials), matched(trials);
  auto work = [&](int w) {
    for (long long t = w; t < trials; t += threads) {
      std::mt19937_64 gen(mix_seed(seed, static_cast<std::uint64_t>(t)));
      const Eigen::MatrixXd g = sample_power_gains(dist, k, gen);
      const PairGraph pairs = detect_pairs(g, epsilon);
      bool all = true;
      std::vector<char> hit(k, 0);
      for (const auto& [i, j] : pairs.strong_pairs) hit[i] = hit[j] = 1;
      for (char h : hit) all = all && h;
      paired[t] = all;
      matched[t] = hall_perfect_matching(split_graph(pairs)).matched.has_value();
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < threads; ++w) pool.emplace_back(work, w);
  work(0);
  for (auto& th : pool) th.join();

  const auto count = [](const std::vector<char>& v) {
    return static_cast<long long>(std::count(v.begin(), v.end(), 1));
  };
  return {k, epsilon, wilson_interval(count(paired), trials), wilson_interval(count(matched), trials)};
}

}  // namespace wbs
