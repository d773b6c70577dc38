#pragma once

#include "monotest/games.hpp"
#include "monotest/grid.hpp"
#include "monotest/inference.hpp"

namespace monotest {

/// Min-max rescaling of the game covariate onto [0, 1].
ActionSample rescale_covariate(const ActionSample& sample);

/// Nonparametric test over (b1, b2, x, q) cells. The covariate is rescaled
/// first; samples with several agent-count groups are tested jointly.
TestResult run_test_x(const ActionSample& sample, const MomentKernel& kernel, const TestConfig& config);

}  // namespace monotest
