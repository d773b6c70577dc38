#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace monotest {

/// One observed game: the actions of its N agents plus game-level data.
struct GameRecord {
  std::string game_id;
  std::vector<double> actions;
  /// Scalar covariate for the nonparametric covariate test.
  std::optional<double> covariate;
  /// Regressors (without intercept) for the homogenization fit.
  std::vector<double> design;
  /// Group tag for designs with different numbers of agents per game.
  int group = 0;
};

/// A panel of games. Games are the unit of bootstrap resampling.
///
/// Construction checks that every action is finite, every game has at least
/// two agents and that all games sharing a group tag have the same size.
class ActionSample {
 public:
  ActionSample() = default;
  explicit ActionSample(std::vector<GameRecord> games);

  const std::vector<GameRecord>& games() const { return games_; }
  std::size_t game_count() const { return games_.size(); }
  std::size_t observation_count() const { return observations_; }
  bool empty() const { return games_.empty(); }

  /// Sorted distinct group tags.
  std::vector<int> group_tags() const;
  std::vector<ActionSample> split_by_group() const;

  /// Agents per game. Throws UsageError when the sample mixes group sizes.
  int agents_per_game() const;

  bool has_covariate() const;
  double min_action() const;
  double max_action() const;

 private:
  std::vector<GameRecord> games_;
  std::size_t observations_ = 0;
};

/// Concatenates samples (for instance the per-group pieces of a resample).
ActionSample concat(const std::vector<ActionSample>& parts);

struct Support {
  double lo = 0.0;
  double hi = 1.0;

  double width() const { return hi - lo; }
};

Support make_support(double lo, double hi);

/// Empirical [min, max] of the actions, or the override when given.
Support infer_support(const ActionSample& sample,
                      std::optional<std::pair<double, double>> override_range = std::nullopt);

/// Largest q such that the smallest cube holds about n_c observations.
int choose_q1(std::size_t total_obs, int n_c, int d_x);

/// Left edge of cell j out of q over the support; edge(q) is exactly hi.
double cell_edge(const Support& support, int q, int j);
/// Same for the covariate axis on [0, 1].
double covariate_edge(int q, int j);

/// Closed window [lo, hi] over actions, optionally crossed with a closed
/// covariate window [x_lo, x_hi].
struct Window {
  int q = 2;
  int j = 0;
  int jx = -1;  ///< covariate cell index, -1 when unrestricted
  double lo = 0.0;
  double hi = 0.0;
  double x_lo = 0.0;
  double x_hi = 1.0;

  bool has_covariate() const { return jx >= 0; }
  bool contains(double action) const { return lo <= action && action <= hi; }
  bool contains_covariate(double x) const { return x_lo <= x && x <= x_hi; }
};

Window make_window(const Support& support, int q, int j, int jx = -1);

struct GridPoint {
  double b1 = 0.0;
  double b2 = 0.0;
  int q = 2;
  std::optional<double> x;
  std::size_t w1 = 0;  ///< index of the b1 window in Grid::windows
  std::size_t w2 = 0;
};

/// The finite instrument set: every pair of cell edges b1 > b2 for
/// q = 2..q1 (crossed with covariate edges when d_x = 1), with weights
/// proportional to q^-2 split evenly within each q and summing to one.
struct Grid {
  Support support;
  int q1 = 2;
  int d_x = 0;
  std::vector<Window> windows;
  std::vector<GridPoint> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
  /// Index of window (q, j, jx) in `windows`.
  std::size_t window_index(int q, int j, int jx = -1) const;
};

Grid build_grid(const Support& support, int q1, int d_x);

}  // namespace monotest
