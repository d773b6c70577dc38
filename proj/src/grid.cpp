#include "monotest/grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "monotest/error.hpp"

namespace monotest {

ActionSample::ActionSample(std::vector<GameRecord> games) : games_(std::move(games)) {
  std::map<int, std::size_t> size_by_group;
  for (const auto& g : games_) {
    if (g.actions.size() < 2) {
      throw UsageError("game '" + g.game_id + "' has fewer than two agents");
    }
    for (double b : g.actions) {
      if (!std::isfinite(b)) throw UsageError("game '" + g.game_id + "' has a non-finite action");
    }
    if (g.covariate && !std::isfinite(*g.covariate)) {
      throw UsageError("game '" + g.game_id + "' has a non-finite covariate");
    }
    auto [it, inserted] = size_by_group.emplace(g.group, g.actions.size());
    if (!inserted && it->second != g.actions.size()) {
      throw UsageError("group " + std::to_string(g.group) + " mixes games of different size");
    }
    observations_ += g.actions.size();
  }
}

std::vector<int> ActionSample::group_tags() const {
  std::set<int> tags;
  for (const auto& g : games_) tags.insert(g.group);
  return {tags.begin(), tags.end()};
}

std::vector<ActionSample> ActionSample::split_by_group() const {
  std::map<int, std::vector<GameRecord>> by_tag;
  for (const auto& g : games_) by_tag[g.group].push_back(g);
  std::vector<ActionSample> out;
  out.reserve(by_tag.size());
  for (auto& [tag, games] : by_tag) out.emplace_back(std::move(games));
  return out;
}

int ActionSample::agents_per_game() const {
  if (games_.empty()) throw UsageError("empty sample");
  const auto n = games_.front().actions.size();
  for (const auto& g : games_) {
    if (g.actions.size() != n) {
      throw UsageError("sample mixes games with different numbers of agents; use the joint test");
    }
  }
  return static_cast<int>(n);
}

bool ActionSample::has_covariate() const {
  return !games_.empty() &&
         std::all_of(games_.begin(), games_.end(), [](const GameRecord& g) { return g.covariate.has_value(); });
}

double ActionSample::min_action() const {
  double m = INFINITY;
  for (const auto& g : games_) {
    for (double b : g.actions) m = std::min(m, b);
  }
  return m;
}

double ActionSample::max_action() const {
  double m = -INFINITY;
  for (const auto& g : games_) {
    for (double b : g.actions) m = std::max(m, b);
  }
  return m;
}

ActionSample concat(const std::vector<ActionSample>& parts) {
  std::vector<GameRecord> games;
  for (const auto& p : parts) games.insert(games.end(), p.games().begin(), p.games().end());
  return ActionSample(std::move(games));
}

Support make_support(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw NumericError("degenerate support: need lo < hi");
  }
  return Support{lo, hi};
}

Support infer_support(const ActionSample& sample, std::optional<std::pair<double, double>> override_range) {
  if (override_range) return make_support(override_range->first, override_range->second);
  if (sample.empty()) throw UsageError("cannot infer the support of an empty sample");
  const double lo = sample.min_action();
  const double hi = sample.max_action();
  if (!(lo < hi)) throw NumericError("degenerate support: all actions are equal");
  return Support{lo, hi};
}

int choose_q1(std::size_t total_obs, int n_c, int d_x) {
  if (n_c < 1) throw UsageError("n_c must be at least 1");
  if (d_x != 0 && d_x != 1) throw UsageError("only d_x in {0, 1} is supported");
  const double ratio = static_cast<double>(total_obs) / n_c;
  const long q = std::lround(std::pow(ratio, 1.0 / (1.0 + d_x)));
  return static_cast<int>(std::max(2L, q));
}

double cell_edge(const Support& support, int q, int j) {
  if (j == 0) return support.lo;
  if (j == q) return support.hi;
  return support.lo + support.width() * j / q;
}

double covariate_edge(int q, int j) {
  if (j == q) return 1.0;
  return static_cast<double>(j) / q;
}

Window make_window(const Support& support, int q, int j, int jx) {
  Window w;
  w.q = q;
  w.j = j;
  w.jx = jx;
  w.lo = cell_edge(support, q, j);
  w.hi = cell_edge(support, q, j + 1);
  if (jx >= 0) {
    w.x_lo = covariate_edge(q, jx);
    w.x_hi = covariate_edge(q, jx + 1);
  }
  return w;
}

namespace {

// Windows are laid out q-major: q = 2 first, then covariate cell, then j.
std::size_t window_offset(int q, int d_x) {
  std::size_t off = 0;
  for (int r = 2; r < q; ++r) off += static_cast<std::size_t>(d_x == 1 ? r * r : r);
  return off;
}

}  // namespace

std::size_t Grid::window_index(int q, int j, int jx) const {
  const std::size_t base = window_offset(q, d_x);
  return base + static_cast<std::size_t>(d_x == 1 ? jx * q + j : j);
}

Grid build_grid(const Support& support, int q1, int d_x) {
  if (q1 < 2) throw UsageError("q1 must be at least 2");
  if (d_x != 0 && d_x != 1) throw UsageError("only d_x in {0, 1} is supported");
  Grid grid;
  grid.support = support;
  grid.q1 = q1;
  grid.d_x = d_x;

  for (int q = 2; q <= q1; ++q) {
    const int nx = d_x == 1 ? q : 1;
    for (int jx = 0; jx < nx; ++jx) {
      for (int j = 0; j < q; ++j) grid.windows.push_back(make_window(support, q, j, d_x == 1 ? jx : -1));
    }
  }

  double total = 0.0;
  for (int q = 2; q <= q1; ++q) {
    const int nx = d_x == 1 ? q : 1;
    const std::size_t first = grid.points.size();
    for (int jx = 0; jx < nx; ++jx) {
      const int tag = d_x == 1 ? jx : -1;
      for (int j1 = 1; j1 < q; ++j1) {
        for (int j2 = 0; j2 < j1; ++j2) {
          GridPoint p;
          p.q = q;
          p.b1 = cell_edge(support, q, j1);
          p.b2 = cell_edge(support, q, j2);
          if (d_x == 1) p.x = covariate_edge(q, jx);
          p.w1 = grid.window_index(q, j1, tag);
          p.w2 = grid.window_index(q, j2, tag);
          grid.points.push_back(p);
        }
      }
    }
    const std::size_t count = grid.points.size() - first;
    const double each = 1.0 / (static_cast<double>(q) * q) / static_cast<double>(count);
    grid.weights.insert(grid.weights.end(), count, each);
    total += 1.0 / (static_cast<double>(q) * q);
  }
  for (double& w : grid.weights) w /= total;
  return grid;
}

}  // namespace monotest
