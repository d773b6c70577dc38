#include "monotest/inference.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "monotest/error.hpp"
#include "monotest/parallel.hpp"

namespace monotest {

void TestConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 0.5)) throw UsageError("alpha must lie in (0, 0.5)");
  if (n_boot < 100) throw UsageError("n_boot must be at least 100");
  if (!(eta > 0.0)) throw UsageError("eta must be positive");
  if (!(epsilon > 0.0)) throw UsageError("epsilon must be positive");
  if (n_c < 1) throw UsageError("n_c must be at least 1");
  if (threads < 0) throw UsageError("threads must be non-negative");
}

GmsTuning gms_tuning(std::size_t observations) {
  if (observations < kMinObservations) {
    throw UsageError("at least " + std::to_string(kMinObservations) + " observations are required, got " +
                     std::to_string(observations));
  }
  const double log_s = std::log(static_cast<double>(observations));
  return {0.15 * log_s, 0.85 * log_s / std::log(log_s)};
}

double test_statistic(const MomentTable& table, const Grid& grid) {
  const double root_s = std::sqrt(static_cast<double>(table.observations));
  double total = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const double z = root_s * table.nu[p] / table.sigma_eps[p];
    if (z > 0.0) total += z * z * grid.weights[p];
  }
  return total;
}

std::vector<double> gms(const MomentTable& table, const GmsTuning& tuning) {
  const double root_s = std::sqrt(static_cast<double>(table.observations));
  std::vector<double> psi(table.nu.size(), 0.0);
  for (std::size_t p = 0; p < psi.size(); ++p) {
    if (root_s * table.nu[p] / table.sigma_eps[p] < -tuning.kappa) psi[p] = -tuning.beta;
  }
  return psi;
}

double bootstrap_statistic(std::span<const double> nu_star, const MomentTable& table, std::span<const double> psi,
                           const Grid& grid) {
  const double root_s = std::sqrt(static_cast<double>(table.observations));
  double total = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const double z = root_s * (nu_star[p] - table.nu[p]) / table.sigma_eps[p] + psi[p];
    if (z > 0.0) total += z * z * grid.weights[p];
  }
  return total;
}

std::vector<double> bootstrap_multiplicities(const ActionSample& sample, CounterRng& rng) {
  std::map<int, std::vector<std::size_t>> members;
  const auto& games = sample.games();
  for (std::size_t g = 0; g < games.size(); ++g) members[games[g].group].push_back(g);
  std::vector<double> weights(games.size(), 0.0);
  for (const auto& [tag, idx] : members) {
    for (std::size_t k = 0; k < idx.size(); ++k) weights[idx[rng.below(idx.size())]] += 1.0;
  }
  return weights;
}

ActionSample bootstrap_resample(const ActionSample& sample, CounterRng& rng) {
  std::map<int, std::vector<std::size_t>> members;
  const auto& games = sample.games();
  for (std::size_t g = 0; g < games.size(); ++g) members[games[g].group].push_back(g);
  std::vector<GameRecord> out;
  out.reserve(games.size());
  for (const auto& [tag, idx] : members) {
    for (std::size_t k = 0; k < idx.size(); ++k) out.push_back(games[idx[rng.below(idx.size())]]);
  }
  return ActionSample(std::move(out));
}

double critical_value(std::span<const double> boot_stats, double alpha, double eta) {
  if (boot_stats.empty()) throw UsageError("no bootstrap statistics");
  if (!(alpha > 0.0 && alpha < 0.5)) throw UsageError("alpha must lie in (0, 0.5)");
  std::vector<double> sorted(boot_stats.begin(), boot_stats.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  // The small offset keeps exact products such as 1000 * 0.9 on their integer.
  const double rank = std::ceil(n * (1.0 - alpha + eta) - 1e-9);
  const auto r = static_cast<std::size_t>(std::clamp(rank, 1.0, n));
  return sorted[r - 1] + eta;
}

double p_value(double statistic, std::span<const double> boot_stats) {
  if (boot_stats.empty()) throw UsageError("no bootstrap statistics");
  const auto exceed = std::count_if(boot_stats.begin(), boot_stats.end(), [&](double b) { return b >= statistic; });
  return (1.0 + static_cast<double>(exceed)) / (1.0 + static_cast<double>(boot_stats.size()));
}

namespace {

double empirical_quantile(const std::vector<double>& sorted, double level) {
  const double n = static_cast<double>(sorted.size());
  const auto r = static_cast<std::size_t>(std::clamp(std::ceil(n * level - 1e-9), 1.0, n));
  return sorted[r - 1];
}

}  // namespace

BootstrapSummary summarize(std::span<const double> boot_stats) {
  BootstrapSummary s;
  if (boot_stats.empty()) return s;
  std::vector<double> sorted(boot_stats.begin(), boot_stats.end());
  std::sort(sorted.begin(), sorted.end());
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  s.min = sorted.front();
  s.max = sorted.back();
  s.q50 = empirical_quantile(sorted, 0.50);
  s.q90 = empirical_quantile(sorted, 0.90);
  s.q95 = empirical_quantile(sorted, 0.95);
  s.q99 = empirical_quantile(sorted, 0.99);
  return s;
}

namespace detail {

Support pooled_support(const std::vector<ActionSample>& groups, const TestConfig& config) {
  if (config.support_override) return make_support(config.support_override->first, config.support_override->second);
  if (groups.empty()) throw UsageError("no groups");
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& g : groups) {
    if (g.empty()) throw UsageError("empty group");
    lo = std::min(lo, g.min_action());
    hi = std::max(hi, g.max_action());
  }
  if (!(lo < hi)) throw NumericError("degenerate support: all actions are equal");
  return Support{lo, hi};
}

void finalize(TestResult& result) {
  const auto& c = result.config;
  result.critical_value = critical_value(result.bootstrap_statistics, c.alpha, c.eta);
  result.p_value = p_value(result.statistic, result.bootstrap_statistics);
  result.reject = result.statistic > result.critical_value;
  result.bootstrap_summary = summarize(result.bootstrap_statistics);
}

TestResult run_grouped(const std::vector<ActionSample>& groups, const MomentKernel& kernel, const TestConfig& config,
                       const Support& support, int d_x) {
  config.validate();
  if (groups.empty()) throw UsageError("no groups to test");

  TestResult result;
  result.method = d_x == 1 ? "covariate" : "nonparametric";
  result.game_class = kernel.game_class();
  result.config = config;
  result.support = support;

  std::vector<MomentEngine> engines;
  engines.reserve(groups.size());
  for (const auto& sample : groups) {
    if (sample.game_count() < 2) throw UsageError("each group needs at least two games");
    GroupReport g;
    g.agents = sample.agents_per_game();
    g.games = sample.game_count();
    g.observations = sample.observation_count();
    g.tuning = gms_tuning(g.observations);
    g.grid = build_grid(support, choose_q1(g.observations, config.n_c, d_x), d_x);
    engines.emplace_back(sample, kernel, g.grid);
    g.table.observations = g.observations;
    engines.back().moments(g.table.M, g.table.W);
    fill_nu(g.grid, g.table);
    estimate_variance(sample, kernel, g.grid, g.table, config.epsilon);
    g.statistic = test_statistic(g.table, g.grid);
    g.psi = gms(g.table, g.tuning);
    result.statistic += g.statistic;
    result.groups.push_back(std::move(g));
  }

  result.bootstrap_statistics.assign(static_cast<std::size_t>(config.n_boot), 0.0);
  parallel_for(result.bootstrap_statistics.size(), resolve_threads(config.threads), [&](std::size_t r) {
    CounterRng rng(config.seed, r);
    std::vector<double> M, W;
    MomentTable star;
    double total = 0.0;
    for (std::size_t t = 0; t < groups.size(); ++t) {
      const auto& g = result.groups[t];
      const auto weights = bootstrap_multiplicities(groups[t], rng);
      engines[t].moments(weights, star.M, star.W);
      fill_nu(g.grid, star);
      total += bootstrap_statistic(star.nu, g.table, g.psi, g.grid);
    }
    result.bootstrap_statistics[r] = total;
  });

  finalize(result);
  return result;
}

}  // namespace detail

TestResult run_test(const ActionSample& sample, const MomentKernel& kernel, const TestConfig& config) {
  if (sample.group_tags().size() > 1) {
    throw UsageError("sample has several agent-count groups; use the joint test");
  }
  sample.agents_per_game();
  const std::vector<ActionSample> groups{sample};
  return detail::run_grouped(groups, kernel, config, detail::pooled_support(groups, config), 0);
}

TestResult run_test_joint(const std::vector<ActionSample>& groups, const MomentKernel& kernel,
                          const TestConfig& config) {
  return detail::run_grouped(groups, kernel, config, detail::pooled_support(groups, config), 0);
}

TestResult run_test_joint(const ActionSample& sample, const MomentKernel& kernel, const TestConfig& config) {
  return run_test_joint(sample.split_by_group(), kernel, config);
}

}  // namespace monotest
