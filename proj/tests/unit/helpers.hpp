#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "monotest/grid.hpp"
#include "monotest/rng.hpp"

namespace testing {

using monotest::ActionSample;
using monotest::GameRecord;

inline ActionSample games_from(const std::vector<std::vector<double>>& actions) {
  std::vector<GameRecord> games;
  for (std::size_t g = 0; g < actions.size(); ++g) {
    GameRecord r;
    r.game_id = "g" + std::to_string(g);
    r.actions = actions[g];
    games.push_back(r);
  }
  return ActionSample(std::move(games));
}

inline ActionSample uniform_sample(std::size_t games, int agents, std::uint64_t seed, double lo = 0.1,
                                   double hi = 1.0) {
  monotest::CounterRng rng(seed, 99);
  std::vector<std::vector<double>> a(games, std::vector<double>(static_cast<std::size_t>(agents)));
  for (auto& g : a) {
    for (double& b : g) b = lo + (hi - lo) * rng.uniform();
  }
  return games_from(a);
}

// Direct evaluation of the windowed expectations, observation by
// observation, with the window edges recomputed from (support, q, j).
struct Oracle {
  enum Kind { High, Low, Contest, PublicGood, Cournot };
  Kind kind = High;
  std::function<double(double)> omega_prime;
  std::function<double(double)> demand;
  std::function<double(double)> demand_slope;

  void contributions(const std::vector<double>& game, std::size_t i, double lo, double hi, double& m,
                     double& w) const {
    const double b = game[i];
    const double n = static_cast<double>(game.size());
    double total = 0.0;
    for (double v : game) total += v;
    const bool in = lo <= b && b <= hi;
    switch (kind) {
      case High:
      case Low: {
        // Length of {t in [lo, hi] : t >= b}.
        const double covered = std::max(0.0, hi - std::max(b, lo));
        m = (in ? b : 0.0) + covered / (n - 1.0);
        if (kind == Low) m -= (hi - lo) / (n - 1.0);
        w = in ? 1.0 : 0.0;
        break;
      }
      case Contest:
        m = in ? b : 0.0;
        w = in ? (b / total) * (1.0 - b / total) : 0.0;
        break;
      case PublicGood:
        m = in ? 1.0 : 0.0;
        w = in ? omega_prime(total) : 0.0;
        break;
      case Cournot:
        m = in ? 1.0 : 0.0;
        w = in ? demand(total) + demand_slope(total) * b : 0.0;
        break;
    }
  }

  // Sample means of m and w over window [lo, hi].
  std::pair<double, double> moments(const std::vector<std::vector<double>>& games, double lo, double hi) const {
    double sm = 0.0, sw = 0.0, count = 0.0;
    for (const auto& g : games) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        double m = 0.0, w = 0.0;
        contributions(g, i, lo, hi, m, w);
        sm += m;
        sw += w;
        count += 1.0;
      }
    }
    return {sm / count, sw / count};
  }

  double nu(const std::vector<std::vector<double>>& games, double lo, double hi, int q, int j1, int j2) const {
    const double a = hi - lo;
    auto edge = [&](int j) { return lo + a * j / q; };
    auto top = [&](int j) { return j + 1 == q ? hi : edge(j + 1); };
    const auto [m1, w1] = moments(games, edge(j1), top(j1));
    const auto [m2, w2] = moments(games, edge(j2), top(j2));
    return m2 * w1 - m1 * w2;
  }
};

}  // namespace testing
