#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "monotest/estimator.hpp"
#include "monotest/games.hpp"
#include "monotest/grid.hpp"
#include "monotest/rng.hpp"

namespace monotest {

struct TestConfig {
  double alpha = 0.10;
  int n_boot = 1000;
  double eta = 1e-6;
  double epsilon = 1e-6;
  int n_c = 20;
  std::uint64_t seed = 0;
  /// Worker threads for the bootstrap; 0 uses every hardware thread.
  int threads = 1;
  std::optional<std::pair<double, double>> support_override;

  void validate() const;
};

/// kappa_S = 0.15 ln S and beta_S = 0.85 ln S / ln ln S.
struct GmsTuning {
  double kappa = 0.0;
  double beta = 0.0;
};

/// Smallest observation count accepted by the test (ln ln S must be positive).
inline constexpr std::size_t kMinObservations = 16;

GmsTuning gms_tuning(std::size_t observations);

/// Per-group inputs and intermediate results of a test.
struct GroupReport {
  int agents = 0;
  std::size_t games = 0;
  std::size_t observations = 0;
  GmsTuning tuning;
  Grid grid;
  MomentTable table;
  std::vector<double> psi;
  double statistic = 0.0;
};

struct BootstrapSummary {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double q50 = 0.0;
  double q90 = 0.0;
  double q95 = 0.0;
  double q99 = 0.0;
};

struct TestResult {
  std::string method;  ///< "nonparametric", "covariate" or "semiparametric"
  GameClass game_class = GameClass::AuctionHigh;
  double statistic = 0.0;
  double critical_value = 0.0;
  double p_value = 1.0;
  bool reject = false;
  TestConfig config;
  Support support;
  std::vector<GroupReport> groups;
  /// Bootstrap statistics in replication order.
  std::vector<double> bootstrap_statistics;
  BootstrapSummary bootstrap_summary;
  /// Homogenization coefficients (semiparametric test only).
  std::vector<double> theta;
};

/// Sum over cells of max(sqrt(S) nu / sigma_eps, 0)^2 Q.
double test_statistic(const MomentTable& table, const Grid& grid);

/// psi = -beta_S 1(sqrt(S) nu / sigma_eps < -kappa_S).
std::vector<double> gms(const MomentTable& table, const GmsTuning& tuning);

/// Bootstrap statistic for one replication:
/// sum over cells of max(sqrt(S)(nu* - nu) / sigma_eps + psi, 0)^2 Q.
double bootstrap_statistic(std::span<const double> nu_star, const MomentTable& table, std::span<const double> psi,
                           const Grid& grid);

/// Game multiplicities of one nonparametric bootstrap draw: within each group
/// (in group-tag order) L_t games are drawn uniformly with replacement.
std::vector<double> bootstrap_multiplicities(const ActionSample& sample, CounterRng& rng);

/// The same draw materialized as a sample (games keep their covariates).
ActionSample bootstrap_resample(const ActionSample& sample, CounterRng& rng);

/// Order statistic at rank ceil(n (1 - alpha + eta)), clamped to [1, n], plus eta.
double critical_value(std::span<const double> boot_stats, double alpha, double eta);

/// (1 + #{boot >= statistic}) / (1 + n).
double p_value(double statistic, std::span<const double> boot_stats);

BootstrapSummary summarize(std::span<const double> boot_stats);

/// Nonparametric test on a sample with a single number of agents per game.
TestResult run_test(const ActionSample& sample, const MomentKernel& kernel, const TestConfig& config);

/// Joint test over groups with different numbers of agents. Each group gets
/// its own grid, variance, and GMS tuning; the bootstrap resamples within
/// groups and a single critical value is computed for the summed statistic.
TestResult run_test_joint(const std::vector<ActionSample>& groups, const MomentKernel& kernel,
                          const TestConfig& config);

/// Splits `sample` by group tag and runs the joint test.
TestResult run_test_joint(const ActionSample& sample, const MomentKernel& kernel, const TestConfig& config);

namespace detail {

/// Shared pipeline for run_test, run_test_joint and the covariate test.
/// `support` is common to all groups.
TestResult run_grouped(const std::vector<ActionSample>& groups, const MomentKernel& kernel, const TestConfig& config,
                       const Support& support, int d_x);

/// Support pooled across groups unless the config overrides it.
Support pooled_support(const std::vector<ActionSample>& groups, const TestConfig& config);

/// Decision, p-value and summary from the statistic and bootstrap draws.
void finalize(TestResult& result);

}  // namespace detail

}  // namespace monotest
