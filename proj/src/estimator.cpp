#include "monotest/estimator.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <map>
#include <numeric>

#include "monotest/error.hpp"

namespace monotest {

std::vector<ObservationContext> observations(const ActionSample& sample) {
  std::vector<ObservationContext> out;
  out.reserve(sample.observation_count());
  for (const auto& g : sample.games()) {
    const std::span<const double> actions(g.actions);
    for (double b : g.actions) out.push_back({b, actions, g.covariate});
  }
  return out;
}

double nu_product(double m_b1, double w_b1, double m_b2, double w_b2) {
  const double left = m_b2 * w_b1;
  const double right = m_b1 * w_b2;
  const double nu = left - right;
  if (std::abs(nu) <= 256.0 * DBL_EPSILON * (std::abs(left) + std::abs(right))) return 0.0;
  return nu;
}

MomentEngine::MomentEngine(const ActionSample& sample, const MomentKernel& kernel, const Grid& grid) {
  if (sample.empty()) throw UsageError("empty sample");
  const auto obs = observations(sample);
  terms_.reserve(obs.size());
  game_of_.reserve(obs.size());
  game_count_ = sample.game_count();
  {
    std::size_t g = 0;
    std::size_t i = 0;
    for (const auto& game : sample.games()) {
      for (std::size_t k = 0; k < game.actions.size(); ++k, ++i) {
        terms_.push_back(kernel.terms(obs[i]));
        game_of_.push_back(g);
      }
      ++g;
    }
  }

  auto make_subset = [&](auto&& keep) {
    Subset s;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      if (keep(obs[i])) s.order.push_back(i);
    }
    std::stable_sort(s.order.begin(), s.order.end(),
                     [&](std::size_t a, std::size_t b) { return terms_[a].action < terms_[b].action; });
    s.sorted_actions.reserve(s.order.size());
    for (std::size_t i : s.order) s.sorted_actions.push_back(terms_[i].action);
    return s;
  };

  std::map<std::pair<int, int>, std::size_t> subset_of_cell;
  if (grid.d_x == 0) {
    subsets_.push_back(make_subset([](const ObservationContext&) { return true; }));
  } else if (!sample.has_covariate()) {
    throw UsageError("covariate grid needs a covariate for every game");
  }

  ranges_.reserve(grid.windows.size());
  for (const auto& w : grid.windows) {
    std::size_t idx = 0;
    if (w.has_covariate()) {
      const auto key = std::make_pair(w.q, w.jx);
      auto it = subset_of_cell.find(key);
      if (it == subset_of_cell.end()) {
        subsets_.push_back(make_subset([&](const ObservationContext& c) { return w.contains_covariate(*c.covariate); }));
        it = subset_of_cell.emplace(key, subsets_.size() - 1).first;
      }
      idx = it->second;
    }
    const auto& a = subsets_[idx].sorted_actions;
    WindowRange r;
    r.subset = idx;
    r.lo = w.lo;
    r.hi = w.hi;
    r.first_in = static_cast<std::size_t>(std::lower_bound(a.begin(), a.end(), w.lo) - a.begin());
    r.end_in = static_cast<std::size_t>(std::upper_bound(a.begin(), a.end(), w.hi) - a.begin());
    r.end_le_lo = static_cast<std::size_t>(std::upper_bound(a.begin(), a.end(), w.lo) - a.begin());
    ranges_.push_back(r);
  }
  windows_of_.resize(subsets_.size());
  for (std::size_t k = 0; k < ranges_.size(); ++k) windows_of_[ranges_[k].subset].push_back(k);
}

void MomentEngine::moments(std::vector<double>& M, std::vector<double>& W) const {
  const std::vector<double> ones(game_count_, 1.0);
  moments(ones, M, W);
}

void MomentEngine::moments(std::span<const double> game_weights, std::vector<double>& M,
                           std::vector<double>& W) const {
  if (game_weights.size() != game_count_) throw UsageError("one weight per game expected");
  double total = 0.0;
  for (std::size_t i = 0; i < terms_.size(); ++i) total += game_weights[game_of_[i]];
  if (!(total > 0.0)) throw UsageError("weights select no observations");

  M.assign(ranges_.size(), 0.0);
  W.assign(ranges_.size(), 0.0);

  std::vector<double> pm, pw, pt, ptb;
  for (std::size_t s = 0; s < subsets_.size(); ++s) {
    const auto& order = subsets_[s].order;
    const std::size_t n = order.size();
    pm.assign(n + 1, 0.0);
    pw.assign(n + 1, 0.0);
    pt.assign(n + 1, 0.0);
    ptb.assign(n + 1, 0.0);
    double width_total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const auto& t = terms_[order[k]];
      const double wt = game_weights[game_of_[order[k]]];
      pm[k + 1] = pm[k] + wt * t.in_window_m;
      pw[k + 1] = pw[k] + wt * t.in_window_w;
      pt[k + 1] = pt[k] + wt * t.truncation;
      ptb[k + 1] = ptb[k] + wt * t.truncation * t.action;
      width_total += wt * t.width_coef;
    }
    for (std::size_t k : windows_of_[s]) {
      const auto& r = ranges_[k];
      const double inside = pm[r.end_in] - pm[r.first_in];
      const double trunc_hi = r.hi * pt[r.end_in] - ptb[r.end_in];
      const double trunc_lo = r.lo * pt[r.end_le_lo] - ptb[r.end_le_lo];
      M[k] = (inside + (trunc_hi - trunc_lo) + (r.hi - r.lo) * width_total) / total;
      W[k] = (pw[r.end_in] - pw[r.first_in]) / total;
    }
  }
}

void fill_nu(const Grid& grid, MomentTable& table) {
  table.nu.resize(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const auto& pt = grid.points[p];
    table.nu[p] = nu_product(table.M[pt.w1], table.W[pt.w1], table.M[pt.w2], table.W[pt.w2]);
  }
}

MomentTable estimate_moments(const ActionSample& sample, const MomentKernel& kernel, const Grid& grid) {
  MomentEngine engine(sample, kernel, grid);
  MomentTable table;
  table.observations = sample.observation_count();
  engine.moments(table.M, table.W);
  fill_nu(grid, table);
  return table;
}

namespace {

// Centered kernel values per window, window-major.
void centered_values(const std::vector<ObservationContext>& obs, const MomentKernel& kernel, const Grid& grid,
                     const MomentTable& table, std::vector<double>& phi_m, std::vector<double>& phi_w) {
  const std::size_t s = obs.size();
  phi_m.resize(grid.windows.size() * s);
  phi_w.resize(grid.windows.size() * s);
  for (std::size_t k = 0; k < grid.windows.size(); ++k) {
    for (std::size_t i = 0; i < s; ++i) {
      const KernelValue v = kernel.evaluate(obs[i], grid.windows[k]);
      phi_m[k * s + i] = v.m - table.M[k];
      phi_w[k * s + i] = v.w - table.W[k];
    }
  }
}

double phi_nu(const GridPoint& pt, const MomentTable& t, const double* pm1, const double* pw1, const double* pm2,
              const double* pw2, std::size_t i) {
  return t.W[pt.w1] * pm2[i] + t.M[pt.w2] * pw1[i] - t.W[pt.w2] * pm1[i] - t.M[pt.w1] * pw2[i];
}

}  // namespace

InfluenceRows influence_rows(const ActionSample& sample, const MomentKernel& kernel, const Grid& grid,
                             const MomentTable& table) {
  const auto obs = observations(sample);
  const std::size_t s = obs.size();
  InfluenceRows rows;
  rows.observations = s;
  centered_values(obs, kernel, grid, table, rows.phi_m, rows.phi_w);
  rows.phi_nu.resize(grid.size() * s);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const auto& pt = grid.points[p];
    const double* pm1 = &rows.phi_m[pt.w1 * s];
    const double* pw1 = &rows.phi_w[pt.w1 * s];
    const double* pm2 = &rows.phi_m[pt.w2 * s];
    const double* pw2 = &rows.phi_w[pt.w2 * s];
    for (std::size_t i = 0; i < s; ++i) rows.phi_nu[p * s + i] = phi_nu(pt, table, pm1, pw1, pm2, pw2, i);
  }
  return rows;
}

double anchor_variance(const ActionSample& sample, const MomentKernel& kernel, const Support& support) {
  const auto obs = observations(sample);
  const double s = static_cast<double>(obs.size());
  // b1 = lower support edge, b2 = midpoint, q = 2.
  const Window low = make_window(support, 2, 0);
  const Window mid = make_window(support, 2, 1);
  std::vector<KernelValue> vl(obs.size()), vm(obs.size());
  double ml = 0.0, wl = 0.0, mm = 0.0, wm = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    vl[i] = kernel.evaluate(obs[i], low);
    vm[i] = kernel.evaluate(obs[i], mid);
    ml += vl[i].m;
    wl += vl[i].w;
    mm += vm[i].m;
    wm += vm[i].w;
  }
  ml /= s;
  wl /= s;
  mm /= s;
  wm /= s;
  double acc = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double f = wl * (vm[i].m - mm) + mm * (vl[i].w - wl) - wm * (vl[i].m - ml) - ml * (vm[i].w - wm);
    acc += f * f;
  }
  return acc / s;
}

void apply_variance_floor(std::span<const double> variances, double anchor, double epsilon, MomentTable& table) {
  table.anchor_fallback = false;
  table.degenerate_variance = false;
  if (!(anchor > 0.0)) {
    table.anchor_fallback = true;
    anchor = variances.empty() ? 0.0 : *std::max_element(variances.begin(), variances.end());
    if (!(anchor > 0.0)) {
      table.degenerate_variance = true;
      anchor = 1.0 / epsilon;
    }
  }
  table.anchor_variance = anchor;
  table.sigma.resize(variances.size());
  table.sigma_eps.resize(variances.size());
  for (std::size_t p = 0; p < variances.size(); ++p) {
    table.sigma[p] = std::sqrt(variances[p]);
    table.sigma_eps[p] = std::sqrt(std::max(variances[p], epsilon * anchor));
  }
}

void estimate_variance(const ActionSample& sample, const MomentKernel& kernel, const Grid& grid,
                       MomentTable& table, double epsilon) {
  if (!(epsilon > 0.0)) throw UsageError("epsilon must be positive");
  const auto obs = observations(sample);
  const std::size_t s = obs.size();
  std::vector<double> phi_m, phi_w;
  centered_values(obs, kernel, grid, table, phi_m, phi_w);
  std::vector<double> variances(grid.size(), 0.0);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const auto& pt = grid.points[p];
    const double* pm1 = &phi_m[pt.w1 * s];
    const double* pw1 = &phi_w[pt.w1 * s];
    const double* pm2 = &phi_m[pt.w2 * s];
    const double* pw2 = &phi_w[pt.w2 * s];
    double acc = 0.0;
    for (std::size_t i = 0; i < s; ++i) {
      const double f = phi_nu(pt, table, pm1, pw1, pm2, pw2, i);
      acc += f * f;
    }
    variances[p] = acc / static_cast<double>(s);
  }
  apply_variance_floor(variances, anchor_variance(sample, kernel, grid.support), epsilon, table);
}

}  // namespace monotest
