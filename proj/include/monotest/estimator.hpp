#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "monotest/games.hpp"
#include "monotest/grid.hpp"

namespace monotest {

/// Flattened observations in game order, then agent order. The contexts
/// point into `sample`, which must outlive them.
std::vector<ObservationContext> observations(const ActionSample& sample);

/// nu = M(b2) W(b1) - M(b1) W(b2). Differences within 256 ulps of the two
/// products are returned as exactly zero.
double nu_product(double m_b1, double w_b1, double m_b2, double w_b2);

/// Estimated moments over a grid. M and W are indexed by Grid::windows,
/// everything else by Grid::points.
struct MomentTable {
  std::size_t observations = 0;
  std::vector<double> M;
  std::vector<double> W;
  std::vector<double> nu;
  std::vector<double> sigma;      ///< sigma_nu from the influence functions
  std::vector<double> sigma_eps;  ///< sigma_nu floored by sqrt(epsilon) * anchor
  double anchor_variance = 0.0;
  bool anchor_fallback = false;   ///< anchor was zero, max cell variance used
  bool degenerate_variance = false;  ///< every variance was zero, floor set to one
};

/// Sorted prefix-sum evaluator of M and W for all windows of a grid.
///
/// Observations are sorted by action once; window edges become index
/// ranges, so one set of moments costs O(S + #windows) for arbitrary
/// per-game weights. Bootstrap resamples are expressed as integer
/// multiplicities per game, which avoids copying the data.
class MomentEngine {
 public:
  MomentEngine(const ActionSample& sample, const MomentKernel& kernel, const Grid& grid);

  std::size_t game_count() const { return game_count_; }
  std::size_t observation_count() const { return terms_.size(); }

  /// Moments with every game counted once.
  void moments(std::vector<double>& M, std::vector<double>& W) const;
  /// Moments with game g counted game_weights[g] times; S is the weighted
  /// observation count.
  void moments(std::span<const double> game_weights, std::vector<double>& M, std::vector<double>& W) const;

 private:
  struct Subset {
    std::vector<std::size_t> order;  // observation indices sorted by action
    std::vector<double> sorted_actions;
  };
  struct WindowRange {
    std::size_t subset = 0;
    std::size_t first_in = 0;   // first index with action >= lo
    std::size_t end_in = 0;     // one past last index with action <= hi
    std::size_t end_le_lo = 0;  // count with action <= lo
    double lo = 0.0;
    double hi = 0.0;
  };

  std::vector<ObservationTerms> terms_;
  std::vector<std::size_t> game_of_;
  std::size_t game_count_ = 0;
  std::vector<Subset> subsets_;
  std::vector<WindowRange> ranges_;
  std::vector<std::vector<std::size_t>> windows_of_;  // window indices per subset
};

/// M, W and nu for every grid cell (sigma left empty).
MomentTable estimate_moments(const ActionSample& sample, const MomentKernel& kernel, const Grid& grid);

/// Fills nu from M and W.
void fill_nu(const Grid& grid, MomentTable& table);

/// Centered influence values for every observation.
struct InfluenceRows {
  std::size_t observations = 0;
  std::vector<double> phi_m;   ///< [window][observation]
  std::vector<double> phi_w;   ///< [window][observation]
  std::vector<double> phi_nu;  ///< [point][observation]
};

/// Influence functions with estimated centers. Materializes S x #points
/// values, so meant for small problems and diagnostics; estimate_variance
/// streams the same quantities.
InfluenceRows influence_rows(const ActionSample& sample, const MomentKernel& kernel, const Grid& grid,
                             const MomentTable& table);

/// Influence-function variance of nu at the anchor cell (lo, (lo+hi)/2, 2),
/// computed without any covariate restriction.
double anchor_variance(const ActionSample& sample, const MomentKernel& kernel, const Support& support);

/// sigma_nu^2 = mean of phi_nu^2 per cell, then
/// sigma_eps^2 = max(sigma_nu^2, epsilon * anchor).
void estimate_variance(const ActionSample& sample, const MomentKernel& kernel, const Grid& grid,
                       MomentTable& table, double epsilon);

/// Applies the epsilon floor given per-cell variances and the anchor variance.
void apply_variance_floor(std::span<const double> variances, double anchor, double epsilon, MomentTable& table);

}  // namespace monotest
