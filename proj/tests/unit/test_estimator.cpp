#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "monotest/error.hpp"
#include "monotest/estimator.hpp"
#include "monotest/inference.hpp"

using namespace monotest;
using Catch::Approx;

namespace {

std::vector<std::vector<double>> random_games(std::uint64_t seed, std::size_t games, int agents, double lo,
                                              double hi) {
  CounterRng rng(seed, 5);
  std::vector<std::vector<double>> a(games, std::vector<double>(static_cast<std::size_t>(agents)));
  for (auto& g : a) {
    for (double& b : g) b = lo + (hi - lo) * rng.uniform();
  }
  return a;
}

struct Case {
  MomentKernel kernel;
  testing::Oracle oracle;
};

std::vector<Case> all_classes() {
  std::vector<Case> out;
  out.push_back({MomentKernel::auction_high(), {testing::Oracle::High}});
  out.push_back({MomentKernel::auction_low(), {testing::Oracle::Low}});
  out.push_back({MomentKernel::contest(), {testing::Oracle::Contest}});
  testing::Oracle pg{testing::Oracle::PublicGood};
  pg.omega_prime = [](double s) { return 1.3 * 0.4 * std::pow(s, 0.4 - 1.0); };
  out.push_back({MomentKernel::public_good(PowerBenefit{1.3, 0.4}), pg});
  testing::Oracle co{testing::Oracle::Cournot};
  co.demand = [](double s) { return 5.0 - 0.7 * s; };
  co.demand_slope = [](double) { return -0.7; };
  out.push_back({MomentKernel::cournot(LinearDemand{5.0, 0.7}), co});
  return out;
}

}  // namespace

TEST_CASE("hand-counted window means") {
  const auto sample = testing::games_from({{0.2, 0.5, 0.8}});
  const Grid grid = build_grid(infer_support(sample), 2, 0);
  const auto table = estimate_moments(sample, MomentKernel::auction_high(), grid);
  CHECK(table.W[grid.window_index(2, 0)] == Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(table.W[grid.window_index(2, 1)] == Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("nu matches a brute-force evaluation for every game class") {
  for (const auto& c : all_classes()) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto raw = random_games(seed, 5, 2, 0.2, 1.4);
      const auto sample = testing::games_from(raw);
      const Support s = infer_support(sample);
      const Grid grid = build_grid(s, 6, 0);
      const auto table = estimate_moments(sample, c.kernel, grid);
      for (std::size_t p = 0; p < grid.size(); ++p) {
        const auto& pt = grid.points[p];
        const int j1 = grid.windows[pt.w1].j;
        const int j2 = grid.windows[pt.w2].j;
        const double expected = c.oracle.nu(raw, s.lo, s.hi, pt.q, j1, j2);
        CHECK(table.nu[p] == Approx(expected).margin(1e-12));
      }
    }
  }
}

TEST_CASE("truncated-mean representation of the auction moment") {
  const auto raw = random_games(77, 30, 3, 0.0, 1.0);
  const auto sample = testing::games_from(raw);
  const Grid grid = build_grid(infer_support(sample), 5, 0);
  const auto table = estimate_moments(sample, MomentKernel::auction_high(), grid);
  for (std::size_t k = 0; k < grid.windows.size(); ++k) {
    const auto& w = grid.windows[k];
    double inside = 0.0, below_hi = 0.0, below_lo = 0.0, count = 0.0;
    for (const auto& g : raw) {
      for (double b : g) {
        if (w.lo <= b && b <= w.hi) inside += b;
        if (b <= w.hi) below_hi += w.hi - b;
        if (b <= w.lo) below_lo += w.lo - b;
        count += 1.0;
      }
    }
    const double m = inside / count + (below_hi / count - below_lo / count) / 2.0;
    CHECK(table.M[k] == Approx(m).margin(1e-12));
  }
}

TEST_CASE("influence functions and variance match a brute-force recomputation") {
  const std::vector<std::vector<double>> raw{{0.2, 0.5, 0.8}};
  const auto sample = testing::games_from(raw);
  const Support s = infer_support(sample);
  const Grid grid = build_grid(s, 2, 0);
  const auto kernel = MomentKernel::auction_high();
  auto table = estimate_moments(sample, kernel, grid);
  const auto rows = influence_rows(sample, kernel, grid, table);

  // Cell (b1 = 0.5, b2 = 0.2, q = 2), windows [0.5, 0.8] and [0.2, 0.5].
  const testing::Oracle oracle{testing::Oracle::High};
  const auto [m1, w1] = oracle.moments(raw, 0.5, 0.8);
  const auto [m2, w2] = oracle.moments(raw, 0.2, 0.5);
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    double mi1, wi1, mi2, wi2;
    oracle.contributions(raw[0], i, 0.5, 0.8, mi1, wi1);
    oracle.contributions(raw[0], i, 0.2, 0.5, mi2, wi2);
    const double phi = w1 * (mi2 - m2) + m2 * (wi1 - w1) - w2 * (mi1 - m1) - m1 * (wi2 - w2);
    CHECK(rows.phi_nu[i] == Approx(phi).margin(1e-14));
    sum_sq += phi * phi;
  }
  double mean = 0.0;
  for (double v : rows.phi_nu) mean += v;
  CHECK(mean == Approx(0.0).margin(1e-14));

  estimate_variance(sample, kernel, grid, table, 1e-6);
  CHECK(table.sigma[0] * table.sigma[0] == Approx(sum_sq / 3.0).epsilon(1e-12));
}

TEST_CASE("influence functions vanish for identical observations") {
  const auto sample = testing::games_from({{0.4, 0.4}, {0.9, 0.1}});
  const Grid grid = build_grid(make_support(0.0, 1.0), 3, 0);
  const auto equal = testing::games_from({{0.4, 0.4}});
  const auto table = estimate_moments(equal, MomentKernel::auction_high(), grid);
  const auto rows = influence_rows(equal, MomentKernel::auction_high(), grid, table);
  for (double v : rows.phi_nu) CHECK(v == 0.0);
  CHECK(sample.observation_count() == 4);
}

TEST_CASE("variance on random data matches the oracle for every class") {
  for (const auto& c : all_classes()) {
    const auto raw = random_games(11, 40, 2, 0.3, 1.1);
    const auto sample = testing::games_from(raw);
    const Support s = infer_support(sample);
    const Grid grid = build_grid(s, 4, 0);
    auto table = estimate_moments(sample, c.kernel, grid);
    estimate_variance(sample, c.kernel, grid, table, 1e-6);
    for (std::size_t p = 0; p < grid.size(); ++p) {
      const auto& w1 = grid.windows[grid.points[p].w1];
      const auto& w2 = grid.windows[grid.points[p].w2];
      const auto [m1, v1] = c.oracle.moments(raw, w1.lo, w1.hi);
      const auto [m2, v2] = c.oracle.moments(raw, w2.lo, w2.hi);
      double acc = 0.0, n = 0.0;
      for (const auto& g : raw) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          double a1, b1, a2, b2;
          c.oracle.contributions(g, i, w1.lo, w1.hi, a1, b1);
          c.oracle.contributions(g, i, w2.lo, w2.hi, a2, b2);
          const double phi = v1 * (a2 - m2) + m2 * (b1 - v1) - v2 * (a1 - m1) - m1 * (b2 - v2);
          acc += phi * phi;
          n += 1.0;
        }
      }
      CHECK(table.sigma[p] * table.sigma[p] == Approx(acc / n).epsilon(1e-10).margin(1e-15));
      CHECK(table.sigma_eps[p] > 0.0);
      CHECK(table.sigma_eps[p] * table.sigma_eps[p] >= 1e-6 * table.anchor_variance * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("anchor variance is the variance of the (lo, midpoint, 2) cell") {
  const auto raw = random_games(4, 25, 2, 0.0, 2.0);
  const auto sample = testing::games_from(raw);
  const Support s = infer_support(sample);
  const testing::Oracle oracle{testing::Oracle::High};
  const double mid = s.lo + s.width() / 2.0;
  const auto [ml, wl] = oracle.moments(raw, s.lo, mid);
  const auto [mm, wm] = oracle.moments(raw, mid, s.hi);
  double acc = 0.0, n = 0.0;
  for (const auto& g : raw) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      double al, bl, am, bm;
      oracle.contributions(g, i, s.lo, mid, al, bl);
      oracle.contributions(g, i, mid, s.hi, am, bm);
      const double phi = wl * (am - mm) + mm * (bl - wl) - wm * (al - ml) - ml * (bm - wm);
      acc += phi * phi;
      n += 1.0;
    }
  }
  CHECK(anchor_variance(sample, MomentKernel::auction_high(), s) == Approx(acc / n).epsilon(1e-12));
}

TEST_CASE("proportional kernels give nu identically zero") {
  const auto raw = random_games(8, 60, 2, 0.1, 0.9);
  const auto sample = testing::games_from(raw);
  const Grid grid = build_grid(infer_support(sample), 8, 0);
  const auto pg = MomentKernel::public_good([](double) { return 0.7; });
  const auto co = MomentKernel::cournot([](double) { return 2.5; }, [](double) { return 0.0; });
  for (const auto& k : {pg, co}) {
    auto table = estimate_moments(sample, k, grid);
    for (double v : table.nu) CHECK(v == 0.0);
    estimate_variance(sample, k, grid, table, 1e-6);
    for (double v : table.sigma_eps) CHECK((std::isfinite(v) && v > 0.0));
    CHECK(test_statistic(table, grid) == 0.0);
  }
}

TEST_CASE("variance floor") {
  MomentTable t;
  const std::vector<double> v{0.0, 4.0, 1e-12};
  apply_variance_floor(v, 2.0, 1e-6, t);
  CHECK(t.sigma_eps[0] == Approx(std::sqrt(2e-6)).epsilon(1e-15));
  CHECK(t.sigma_eps[1] == 2.0);
  CHECK_FALSE(t.anchor_fallback);
  apply_variance_floor(v, 0.0, 1e-6, t);
  CHECK(t.anchor_fallback);
  CHECK(t.anchor_variance == 4.0);
  const std::vector<double> zeros{0.0, 0.0};
  apply_variance_floor(zeros, 0.0, 1e-6, t);
  CHECK(t.degenerate_variance);
  CHECK(t.sigma_eps[0] == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("game order does not matter") {
  auto raw = random_games(21, 50, 2, 0.0, 1.0);
  const auto a = testing::games_from(raw);
  std::reverse(raw.begin(), raw.end());
  const auto b = testing::games_from(raw);
  const Grid grid = build_grid(infer_support(a), 10, 0);
  auto ta = estimate_moments(a, MomentKernel::auction_low(), grid);
  auto tb = estimate_moments(b, MomentKernel::auction_low(), grid);
  estimate_variance(a, MomentKernel::auction_low(), grid, ta, 1e-6);
  estimate_variance(b, MomentKernel::auction_low(), grid, tb, 1e-6);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    CHECK(ta.nu[p] == Approx(tb.nu[p]).margin(1e-15));
    CHECK(ta.sigma[p] == Approx(tb.sigma[p]).epsilon(1e-12).margin(1e-15));
  }
}

TEST_CASE("game weights reproduce a materialized resample") {
  const auto sample = testing::uniform_sample(40, 3, 12);
  const Grid grid = build_grid(infer_support(sample), 7, 0);
  const auto kernel = MomentKernel::contest();
  const MomentEngine engine(sample, kernel, grid);
  CounterRng r1(99, 3), r2(99, 3);
  const auto weights = bootstrap_multiplicities(sample, r1);
  const auto resample = bootstrap_resample(sample, r2);
  std::vector<double> M, W;
  engine.moments(weights, M, W);
  const MomentEngine direct(resample, kernel, grid);
  std::vector<double> M2, W2;
  direct.moments(M2, W2);
  for (std::size_t k = 0; k < M.size(); ++k) {
    CHECK(M[k] == Approx(M2[k]).margin(1e-13));
    CHECK(W[k] == Approx(W2[k]).margin(1e-13));
  }
  const std::vector<double> wrong(3, 1.0);
  CHECK_THROWS_AS(engine.moments(wrong, M, W), UsageError);
}
