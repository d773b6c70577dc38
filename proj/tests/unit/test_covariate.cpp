#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "monotest/covariate.hpp"
#include "monotest/error.hpp"
#include "monotest/estimator.hpp"
#include "monotest/montecarlo.hpp"

using namespace monotest;
using Catch::Approx;

namespace {

ActionSample covariate_sample(int covariate_case, std::size_t games, std::uint64_t seed) {
  SimDesign d;
  d.dgp = Dgp::Covariate;
  d.covariate_case = covariate_case;
  d.games = games;
  CounterRng rng(seed, kDataStream);
  return simulate_sample(d, rng);
}

}  // namespace

TEST_CASE("covariate rescaling") {
  std::vector<GameRecord> games(3);
  const double xs[] = {10.0, 30.0, 15.0};
  for (int i = 0; i < 3; ++i) {
    games[i].actions = {0.1, 0.2};
    games[i].covariate = xs[i];
  }
  const auto r = rescale_covariate(ActionSample(games));
  CHECK(*r.games()[0].covariate == 0.0);
  CHECK(*r.games()[1].covariate == 1.0);
  CHECK(*r.games()[2].covariate == 0.25);

  for (auto& g : games) g.covariate = 2.0;
  CHECK_THROWS_AS(rescale_covariate(ActionSample(games)), NumericError);
  games[0].covariate.reset();
  CHECK_THROWS_AS(rescale_covariate(ActionSample(games)), UsageError);
}

TEST_CASE("covariate cells partition the unrestricted moments") {
  const auto sample = rescale_covariate(covariate_sample(3, 200, 1));
  const Support s = infer_support(sample);
  const Grid gx = build_grid(s, 6, 1);
  const Grid g0 = build_grid(s, 6, 0);
  for (const auto& kernel : {MomentKernel::auction_high(), MomentKernel::auction_low(), MomentKernel::contest()}) {
    const auto tx = estimate_moments(sample, kernel, gx);
    const auto t0 = estimate_moments(sample, kernel, g0);
    for (int q = 2; q <= 6; ++q) {
      for (int j = 0; j < q; ++j) {
        double m = 0.0, w = 0.0;
        for (int jx = 0; jx < q; ++jx) {
          m += tx.M[gx.window_index(q, j, jx)];
          w += tx.W[gx.window_index(q, j, jx)];
        }
        CHECK(m == Approx(t0.M[g0.window_index(q, j)]).margin(1e-13));
        CHECK(w == Approx(t0.W[g0.window_index(q, j)]).margin(1e-13));
      }
    }
  }
}

TEST_CASE("covariate nu matches a brute-force evaluation") {
  const auto sample = rescale_covariate(covariate_sample(5, 15, 2));
  const Support s = infer_support(sample);
  const Grid grid = build_grid(s, 4, 1);
  const auto kernel = MomentKernel::auction_low();
  const auto table = estimate_moments(sample, kernel, grid);
  const testing::Oracle oracle{testing::Oracle::Low};
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const auto& w1 = grid.windows[grid.points[p].w1];
    const auto& w2 = grid.windows[grid.points[p].w2];
    auto moments = [&](const Window& w) {
      double m = 0.0, v = 0.0, n = 0.0;
      for (const auto& g : sample.games()) {
        const double x = *g.covariate;
        const bool inside = w.x_lo <= x && x <= w.x_hi;
        for (std::size_t i = 0; i < g.actions.size(); ++i) {
          double mi = 0.0, wi = 0.0;
          oracle.contributions(g.actions, i, w.lo, w.hi, mi, wi);
          if (inside) {
            m += mi;
            v += wi;
          }
          n += 1.0;
        }
      }
      return std::make_pair(m / n, v / n);
    };
    const auto [m1, v1] = moments(w1);
    const auto [m2, v2] = moments(w2);
    CHECK(table.nu[p] == Approx(m2 * v1 - m1 * v2).margin(1e-12));
  }
}

TEST_CASE("covariate test end to end") {
  TestConfig c;
  c.n_boot = 200;
  c.seed = 3;
  const auto r = run_test_x(covariate_sample(1, 300, 4), MomentKernel::auction_high(), c);
  CHECK(r.method == "covariate");
  REQUIRE(r.groups.size() == 1);
  CHECK(r.groups[0].grid.d_x == 1);
  CHECK(r.groups[0].grid.q1 == choose_q1(600, 20, 1));
  for (const auto& p : r.groups[0].grid.points) CHECK(p.x.has_value());
  CHECK(r.reject == (r.statistic > r.critical_value));

  const auto plain = testing::games_from({{0.1, 0.2}});
  CHECK_THROWS_AS(run_test_x(plain, MomentKernel::auction_high(), c), UsageError);
}
