#include "monotest/homogenize.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "monotest/error.hpp"
#include "monotest/estimator.hpp"
#include "monotest/parallel.hpp"

namespace monotest {

std::vector<double> regressors(const GameRecord& game) {
  std::vector<double> x{1.0};
  if (!game.design.empty()) {
    x.insert(x.end(), game.design.begin(), game.design.end());
  } else if (game.covariate) {
    x.push_back(*game.covariate);
  }
  return x;
}

HomogenizationFit ols_fit(const ActionSample& sample) {
  if (sample.empty()) throw UsageError("empty sample");
  const std::size_t p = regressors(sample.games().front()).size();
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  Eigen::VectorXd xty = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  for (const auto& g : sample.games()) {
    const auto xs = regressors(g);
    if (xs.size() != p) throw SchemaError("games disagree on the number of regressors");
    const Eigen::Map<const Eigen::VectorXd> x(xs.data(), static_cast<Eigen::Index>(p));
    for (double b : g.actions) {
      if (!(b > 0.0)) throw NumericError("homogenization needs strictly positive actions");
      xtx.noalias() += x * x.transpose();
      xty += x * std::log(b);
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xtx);
  if (qr.rank() < static_cast<Eigen::Index>(p)) throw NumericError("design matrix is rank deficient");
  const Eigen::VectorXd theta = qr.solve(xty);
  HomogenizationFit fit;
  fit.theta.assign(theta.data(), theta.data() + theta.size());
  fit.rescaled = homogenize(sample, fit.theta);
  return fit;
}

ActionSample homogenize(const ActionSample& sample, std::span<const double> theta) {
  std::vector<GameRecord> games = sample.games();
  for (auto& g : games) {
    const auto xs = regressors(g);
    if (xs.size() != theta.size()) throw SchemaError("theta does not match the regressors");
    double index = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) index += xs[k] * theta[k];
    const double scale = std::exp(-index);
    for (double& b : g.actions) b *= scale;
  }
  return ActionSample(std::move(games));
}

std::vector<double> bootstrap_standard_errors(std::span<const double> nu_star, std::size_t replications,
                                              std::size_t cells, std::size_t observations) {
  if (replications == 0 || nu_star.size() != replications * cells) {
    throw UsageError("bootstrap table has the wrong shape");
  }
  std::vector<double> mean(cells, 0.0);
  for (std::size_t k = 0; k < replications; ++k) {
    for (std::size_t p = 0; p < cells; ++p) mean[p] += nu_star[k * cells + p];
  }
  for (double& m : mean) m /= static_cast<double>(replications);
  std::vector<double> se(cells, 0.0);
  for (std::size_t k = 0; k < replications; ++k) {
    for (std::size_t p = 0; p < cells; ++p) {
      const double d = nu_star[k * cells + p] - mean[p];
      se[p] += d * d;
    }
  }
  const double s = static_cast<double>(observations);
  for (double& v : se) v = std::sqrt(s * v / static_cast<double>(replications));
  return se;
}

TestResult run_test_semi(const ActionSample& sample, const MomentKernel& kernel, const TestConfig& config,
                         SemiOptions options) {
  config.validate();
  const GameClass cls = kernel.game_class();
  if (cls == GameClass::PublicGood || cls == GameClass::Cournot) {
    throw UsageError("homogenization only applies to auctions and contests");
  }
  if (sample.group_tags().size() > 1) throw UsageError("the semiparametric test needs one agent-count group");
  if (sample.game_count() < 2) throw UsageError("need at least two games");

  TestResult result;
  result.method = "semiparametric";
  result.game_class = cls;
  result.config = config;

  // Step 1: fit and rescale.
  const HomogenizationFit fit = ols_fit(sample);
  result.theta = fit.theta;
  result.support = infer_support(fit.rescaled, config.support_override);

  GroupReport g;
  g.agents = sample.agents_per_game();
  g.games = sample.game_count();
  g.observations = sample.observation_count();
  g.tuning = gms_tuning(g.observations);
  g.grid = build_grid(result.support, choose_q1(g.observations, config.n_c, 0), 0);

  // Step 2: moments on the rescaled actions.
  g.table.observations = g.observations;
  MomentEngine(fit.rescaled, kernel, g.grid).moments(g.table.M, g.table.W);
  fill_nu(g.grid, g.table);

  // Step 3: bootstrap replications, refitting theta each time. The last
  // column holds the anchor cell (lower edge, midpoint, q = 2).
  const std::size_t cells = g.grid.size();
  const std::size_t width = cells + 1;
  const std::size_t k_reps = static_cast<std::size_t>(config.n_boot);
  const std::size_t low = g.grid.window_index(2, 0);
  const std::size_t mid = g.grid.window_index(2, 1);
  std::vector<double> nu_star(k_reps * width, 0.0);
  parallel_for(k_reps, resolve_threads(config.threads), [&](std::size_t k) {
    CounterRng rng(config.seed, k);
    const ActionSample draw = bootstrap_resample(sample, rng);
    const std::vector<double> theta = options.refit_in_bootstrap ? ols_fit(draw).theta : fit.theta;
    const ActionSample rescaled = homogenize(draw, theta);
    MomentTable star;
    star.observations = g.observations;
    MomentEngine(rescaled, kernel, g.grid).moments(star.M, star.W);
    fill_nu(g.grid, star);
    std::copy(star.nu.begin(), star.nu.end(), nu_star.begin() + static_cast<std::ptrdiff_t>(k * width));
    nu_star[k * width + cells] = nu_product(star.M[low], star.W[low], star.M[mid], star.W[mid]);
  });

  // Step 4: bootstrap standard errors with the anchor floor.
  const auto se = bootstrap_standard_errors(nu_star, k_reps, width, g.observations);
  std::vector<double> variances(cells);
  for (std::size_t p = 0; p < cells; ++p) variances[p] = se[p] * se[p];
  apply_variance_floor(variances, se[cells] * se[cells], config.epsilon, g.table);

  // Steps 5-9: statistic, GMS, bootstrap distribution, decision.
  g.statistic = test_statistic(g.table, g.grid);
  g.psi = gms(g.table, g.tuning);
  result.statistic = g.statistic;
  result.bootstrap_statistics.resize(k_reps);
  for (std::size_t k = 0; k < k_reps; ++k) {
    const std::span<const double> row(nu_star.data() + k * width, cells);
    result.bootstrap_statistics[k] = bootstrap_statistic(row, g.table, g.psi, g.grid);
  }
  result.groups.push_back(std::move(g));
  detail::finalize(result);
  return result;
}

}  // namespace monotest
