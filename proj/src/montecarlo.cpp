#include "monotest/montecarlo.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "monotest/covariate.hpp"
#include "monotest/error.hpp"
#include "monotest/homogenize.hpp"
#include "monotest/parallel.hpp"

namespace monotest {

namespace {

void check_k(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) throw UsageError("k must be positive");
}

std::string format_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double quantile_bid(double k, double u) {
  const double u5 = std::pow(u, 5);
  return k * u5 / (1.0 + (k - 1.0) * u5);
}

double bid_cdf(double k, double b) {
  check_k(k);
  if (b <= 0.0) return 0.0;
  if (b >= 1.0) return 1.0;
  return std::pow(b / (k - (k - 1.0) * b), 0.2);
}

double bid_density(double k, double b) {
  check_k(k);
  if (!(b > 0.0 && b < 1.0)) throw UsageError("density is evaluated on (0, 1) only");
  const double d = k - (k - 1.0) * b;
  return 0.2 * std::pow(b / d, -0.8) * k / (d * d);
}

std::vector<double> draw_bids_quantile(double k, std::size_t n, CounterRng& rng) {
  check_k(k);
  std::vector<double> bids(n);
  for (double& b : bids) b = quantile_bid(k, rng.uniform());
  return bids;
}

double k_of_case(int covariate_case, double x) {
  switch (covariate_case) {
    case 1: return 0.5 + 2.0 * x;
    case 2: return 5.0 + 5.0 * x;
    case 3: return 10.0 + 5.0 * x;
    case 4: return 15.0 + 5.0 * x;
    case 5: return 20.0 + 5.0 * x;
    default: throw UsageError("covariate case must be 1 to 5");
  }
}

CovariateDraw draw_bids_covariate(int covariate_case, std::size_t n, CounterRng& rng) {
  CovariateDraw d;
  d.x = rng.uniform();
  d.bids = draw_bids_quantile(k_of_case(covariate_case, d.x), n, rng);
  return d;
}

double xi_analytic(double k, int agents, double b) {
  check_k(k);
  if (agents < 2) throw UsageError("need at least two agents");
  if (!(b > 0.0 && b < 1.0)) throw NumericError("xi is undefined at the support boundary");
  return b + bid_cdf(k, b) / ((agents - 1) * bid_density(k, b));
}

std::vector<XiPoint> xi_curve(double k, int agents, std::size_t points, double lo, double hi) {
  if (points < 2) throw UsageError("need at least two points");
  if (!(lo > 0.0 && hi < 1.0 && lo < hi)) throw UsageError("curve range must lie inside (0, 1)");
  std::vector<XiPoint> curve(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double b = i + 1 == points ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    curve[i] = {b, xi_analytic(k, agents, b)};
  }
  return curve;
}

std::vector<double> xi_slopes(const std::vector<XiPoint>& curve) {
  const std::size_t n = curve.size();
  if (n < 2) throw UsageError("need at least two points");
  std::vector<double> slopes(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t l = i == 0 ? 0 : i - 1;
    const std::size_t r = i + 1 == n ? n - 1 : i + 1;
    slopes[i] = (curve[r].xi - curve[l].xi) / (curve[r].b - curve[l].b);
  }
  return slopes;
}

double mean_log_bid(double k) {
  check_k(k);
  auto f = [k](double t) { return std::log1p((k - 1.0) * std::pow(t, 5)); };
  const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 10, 1e-14);
  return std::log(k) - 5.0 - integral;
}

std::string_view to_string(Dgp dgp) {
  switch (dgp) {
    case Dgp::NoCovariate: return "table1";
    case Dgp::Covariate: return "table2";
    case Dgp::HeteroN: return "tableA";
    case Dgp::Semi: return "semi";
  }
  return "table1";
}

Dgp parse_dgp(std::string_view name) {
  if (name == "table1" || name == "no-covariate") return Dgp::NoCovariate;
  if (name == "table2" || name == "covariate") return Dgp::Covariate;
  if (name == "tableA" || name == "hetero-n") return Dgp::HeteroN;
  if (name == "semi") return Dgp::Semi;
  throw UsageError("unknown design '" + std::string(name) + "'");
}

void SimDesign::validate() const {
  check_k(k);
  if (dgp == Dgp::Covariate && (covariate_case < 1 || covariate_case > 5)) {
    throw UsageError("covariate case must be 1 to 5");
  }
  if (dgp == Dgp::HeteroN && (a < 1 || a > 3)) throw UsageError("a must be 1, 2 or 3");
  if (agents < 2) throw UsageError("need at least two agents");
  if (games < 2) throw UsageError("need at least two games");
  if (n_mc < 1) throw UsageError("n_mc must be positive");
  if (threads < 0) throw UsageError("threads must be non-negative");
  test.validate();
}

ActionSample simulate_sample(const SimDesign& design, CounterRng& rng) {
  std::vector<GameRecord> games;
  auto add = [&](std::vector<double> bids, int group) {
    GameRecord g;
    g.game_id = std::to_string(games.size());
    g.actions = std::move(bids);
    g.group = group;
    games.push_back(std::move(g));
    return &games.back();
  };
  const auto n = static_cast<std::size_t>(design.agents);
  switch (design.dgp) {
    case Dgp::NoCovariate:
      for (std::size_t l = 0; l < design.games; ++l) add(draw_bids_quantile(design.k, n, rng), design.agents);
      break;
    case Dgp::Covariate:
      for (std::size_t l = 0; l < design.games; ++l) {
        auto d = draw_bids_covariate(design.covariate_case, n, rng);
        add(std::move(d.bids), design.agents)->covariate = d.x;
      }
      break;
    case Dgp::HeteroN: {
      const int sizes[] = {2, 3, 4};
      const int counts[] = {60, 40, 20};
      for (int t = 0; t < 3; ++t) {
        for (int l = 0; l < design.a * counts[t]; ++l) {
          add(draw_bids_quantile(design.k, static_cast<std::size_t>(sizes[t]), rng), sizes[t]);
        }
      }
      break;
    }
    case Dgp::Semi: {
      const double shift = mean_log_bid(design.k);
      for (std::size_t l = 0; l < design.games; ++l) {
        const double x = rng.uniform();
        auto bids = draw_bids_quantile(design.k, n, rng);
        const double scale = std::exp(design.theta0 + design.theta1 * x - shift);
        for (double& b : bids) b *= scale;
        add(std::move(bids), design.agents)->design = {x};
      }
      break;
    }
  }
  return ActionSample(std::move(games));
}

std::uint64_t repetition_seed(std::uint64_t master, std::size_t repetition) {
  return derive_seed(master, kRepetitionTag, repetition);
}

TestResult run_design_test(const SimDesign& design, const ActionSample& sample, std::uint64_t test_seed) {
  TestConfig config = design.test;
  config.seed = test_seed;
  config.threads = 1;
  const auto kernel = MomentKernel::for_class(design.game_class);
  switch (design.dgp) {
    case Dgp::NoCovariate: return run_test(sample, kernel, config);
    case Dgp::Covariate: return run_test_x(sample, kernel, config);
    case Dgp::HeteroN: return run_test_joint(sample, kernel, config);
    case Dgp::Semi: return run_test_semi(sample, kernel, config);
  }
  throw UsageError("unknown design");
}

RejectionReport rejection_rate(const SimDesign& design) {
  design.validate();
  RejectionReport report;
  report.repetitions.resize(static_cast<std::size_t>(design.n_mc));
  parallel_for(report.repetitions.size(), resolve_threads(design.threads), [&](std::size_t i) {
    const std::uint64_t seed = repetition_seed(design.test.seed, i);
    CounterRng data_rng(seed, kDataStream);
    const ActionSample sample = simulate_sample(design, data_rng);
    const TestResult r = run_design_test(design, sample, derive_seed(seed, kTestTag, 0));
    auto& log = report.repetitions[i];
    log.repetition = i;
    log.seed = seed;
    log.statistic = r.statistic;
    log.critical_value = r.critical_value;
    log.p_value = r.p_value;
    log.reject = r.reject;
    log.theta = r.theta;
  });
  for (const auto& log : report.repetitions) report.rejections += log.reject ? 1 : 0;
  report.rate = static_cast<double>(report.rejections) / static_cast<double>(report.repetitions.size());
  return report;
}

std::string results_table_csv(const std::vector<int>& n_c_values, const std::vector<TableRow>& rows) {
  std::ostringstream out;
  out << "design,size";
  for (int n_c : n_c_values) out << ",n_c=" << n_c;
  out << '\n';
  for (const auto& row : rows) {
    if (row.rates.size() != n_c_values.size()) throw UsageError("table row has the wrong number of rates");
    out << row.label << ',' << row.size;
    for (double r : row.rates) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", r);
      out << ',' << buf;
    }
    out << '\n';
  }
  return out.str();
}

std::string repetition_log_csv(const RejectionReport& report) {
  std::ostringstream out;
  out << "repetition,seed,statistic,critical_value,p_value,reject\n";
  for (const auto& log : report.repetitions) {
    out << log.repetition << ',' << log.seed << ',' << format_g(log.statistic) << ',' << format_g(log.critical_value)
        << ',' << format_g(log.p_value) << ',' << (log.reject ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace monotest
