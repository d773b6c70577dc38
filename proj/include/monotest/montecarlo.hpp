#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "monotest/games.hpp"
#include "monotest/grid.hpp"
#include "monotest/inference.hpp"
#include "monotest/rng.hpp"

namespace monotest {

/// Bid = k u^5 / (1 + (k - 1) u^5) for one uniform u.
double quantile_bid(double k, double u);

/// G(b) = (b / (k - (k - 1) b))^(1/5) on [0, 1].
double bid_cdf(double k, double b);
/// g(b) = (1/5) (b / (k - (k - 1) b))^(-4/5) k / (k - (k - 1) b)^2 on (0, 1).
double bid_density(double k, double b);

std::vector<double> draw_bids_quantile(double k, std::size_t n, CounterRng& rng);

/// k(x) for covariate cases 1 to 5.
double k_of_case(int covariate_case, double x);

struct CovariateDraw {
  std::vector<double> bids;
  double x = 0.0;
};

/// One game: x ~ U(0, 1), then n bids from the quantile with k(x).
CovariateDraw draw_bids_covariate(int covariate_case, std::size_t n, CounterRng& rng);

/// xi(b) = b + G(b) / ((N - 1) g(b)) for the quantile design.
double xi_analytic(double k, int agents, double b);

struct XiPoint {
  double b = 0.0;
  double xi = 0.0;
};

/// xi on `points` evenly spaced bids from `lo` to `hi`.
std::vector<XiPoint> xi_curve(double k, int agents, std::size_t points = 512, double lo = 0.01, double hi = 0.99);

/// Central differences of xi over a curve (one-sided at the ends).
std::vector<double> xi_slopes(const std::vector<XiPoint>& curve);

/// E[log B^u] under the quantile design with parameter k.
double mean_log_bid(double k);

enum class Dgp {
  NoCovariate,  ///< i.i.d. quantile bids, one N
  Covariate,    ///< k depends on a uniform game covariate
  HeteroN,      ///< N_t = 2, 3, 4 with L_t = a (60, 40, 20)
  Semi,         ///< B = exp(theta0 + theta1 X) B^u with E[log B^u] = 0
};

std::string_view to_string(Dgp dgp);
Dgp parse_dgp(std::string_view name);

struct SimDesign {
  Dgp dgp = Dgp::NoCovariate;
  double k = 0.5;
  int covariate_case = 1;
  int a = 1;
  int agents = 2;
  std::size_t games = 500;
  double theta0 = 0.5;
  double theta1 = 0.8;
  GameClass game_class = GameClass::AuctionHigh;
  int n_mc = 200;
  /// Test settings; its seed is the master seed of the experiment.
  TestConfig test;
  /// Threads over repetitions. Each test runs single-threaded.
  int threads = 1;

  void validate() const;
};

/// Simulated panel for one repetition.
ActionSample simulate_sample(const SimDesign& design, CounterRng& rng);

/// Seed of repetition i under a master seed.
std::uint64_t repetition_seed(std::uint64_t master, std::size_t repetition);

struct RepetitionLog {
  std::size_t repetition = 0;
  std::uint64_t seed = 0;
  double statistic = 0.0;
  double critical_value = 0.0;
  double p_value = 1.0;
  bool reject = false;
  std::vector<double> theta;
};

struct RejectionReport {
  double rate = 0.0;
  std::size_t rejections = 0;
  std::vector<RepetitionLog> repetitions;
};

/// The test matching the design on one simulated sample.
TestResult run_design_test(const SimDesign& design, const ActionSample& sample, std::uint64_t test_seed);

/// Rejection frequency over n_mc repetitions.
RejectionReport rejection_rate(const SimDesign& design);

struct TableRow {
  std::string label;  ///< k or case
  std::string size;   ///< L or a
  std::vector<double> rates;
};

/// CSV with one row per design and one column per n_c value.
std::string results_table_csv(const std::vector<int>& n_c_values, const std::vector<TableRow>& rows);

/// Per-repetition audit log as CSV.
std::string repetition_log_csv(const RejectionReport& report);

}  // namespace monotest
