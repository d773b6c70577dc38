#include "monotest/covariate.hpp"

#include <algorithm>
#include <cmath>

#include "monotest/error.hpp"

namespace monotest {

ActionSample rescale_covariate(const ActionSample& sample) {
  if (!sample.has_covariate()) throw UsageError("every game needs a covariate value");
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& g : sample.games()) {
    lo = std::min(lo, *g.covariate);
    hi = std::max(hi, *g.covariate);
  }
  if (!(lo < hi)) {
    throw NumericError("covariate is constant across games; run the test without a covariate instead");
  }
  std::vector<GameRecord> games = sample.games();
  for (auto& g : games) {
    const double x = (*g.covariate - lo) / (hi - lo);
    g.covariate = std::clamp(x, 0.0, 1.0);
  }
  return ActionSample(std::move(games));
}

TestResult run_test_x(const ActionSample& sample, const MomentKernel& kernel, const TestConfig& config) {
  const auto groups = rescale_covariate(sample).split_by_group();
  return detail::run_grouped(groups, kernel, config, detail::pooled_support(groups, config), 1);
}

}  // namespace monotest
