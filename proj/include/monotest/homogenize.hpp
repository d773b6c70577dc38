#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "monotest/games.hpp"
#include "monotest/grid.hpp"
#include "monotest/inference.hpp"

namespace monotest {

/// log B = X theta + log B^u with an intercept as the first regressor.
struct HomogenizationFit {
  std::vector<double> theta;
  /// Same games with every action replaced by exp(-X theta) * B.
  ActionSample rescaled;
};

/// Regressors of one game: 1 followed by GameRecord::design, or by the scalar
/// covariate when no design columns are present.
std::vector<double> regressors(const GameRecord& game);

/// OLS of log actions on the game regressors over all observations.
HomogenizationFit ols_fit(const ActionSample& sample);

/// Divides every action of game g by exp(x_g' theta).
ActionSample homogenize(const ActionSample& sample, std::span<const double> theta);

/// Bootstrap standard errors from K stored replications of nu (row-major,
/// K rows of `cells` values): sqrt(K^-1 sum_k S (nu_k - mean)^2) per cell.
std::vector<double> bootstrap_standard_errors(std::span<const double> nu_star, std::size_t replications,
                                              std::size_t cells, std::size_t observations);

struct SemiOptions {
  /// Refit theta inside each bootstrap replication. Turning this off is an
  /// ablation that ignores the estimation error of theta.
  bool refit_in_bootstrap = true;
};

/// Test on homogenized actions with bootstrap standard errors. The same
/// n_boot replications give the standard errors and the critical value.
/// Only for game classes whose allocation is scale-free and whose payment
/// scales linearly (auctions and contests).
TestResult run_test_semi(const ActionSample& sample, const MomentKernel& kernel, const TestConfig& config,
                         SemiOptions options = {});

}  // namespace monotest
