#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "monotest/covariate.hpp"
#include "monotest/error.hpp"
#include "monotest/homogenize.hpp"
#include "monotest/inference.hpp"
#include "monotest/io.hpp"
#include "monotest/montecarlo.hpp"

namespace py = pybind11;
using namespace monotest;

namespace {

ActionSample make_sample(const std::vector<std::vector<double>>& actions,
                         const std::optional<std::vector<double>>& covariate,
                         const std::optional<std::vector<std::vector<double>>>& design) {
  std::vector<GameRecord> games(actions.size());
  if (covariate && covariate->size() != actions.size()) throw UsageError("one covariate value per game expected");
  if (design && design->size() != actions.size()) throw UsageError("one design row per game expected");
  for (std::size_t g = 0; g < actions.size(); ++g) {
    games[g].game_id = std::to_string(g);
    games[g].actions = actions[g];
    games[g].group = static_cast<int>(actions[g].size());
    if (covariate) games[g].covariate = (*covariate)[g];
    if (design) games[g].design = (*design)[g];
  }
  return ActionSample(std::move(games));
}

TestConfig make_config(double alpha, int n_boot, int n_c, std::uint64_t seed, double eta, double epsilon,
                       int threads) {
  TestConfig c;
  c.alpha = alpha;
  c.n_boot = n_boot;
  c.n_c = n_c;
  c.seed = seed;
  c.eta = eta;
  c.epsilon = epsilon;
  c.threads = threads;
  return c;
}

MomentKernel make_kernel(const std::string& game, double gamma, double rho, double demand_alpha,
                         double demand_beta) {
  return MomentKernel::for_class(parse_game_class(game), PowerBenefit{gamma, rho},
                                 LinearDemand{demand_alpha, demand_beta});
}

#define MONOTEST_TEST_ARGS                                                                                    \
  py::arg("game") = "auction-high", py::arg("alpha") = 0.10, py::arg("n_boot") = 1000, py::arg("n_c") = 20, \
      py::arg("seed") = 0, py::arg("eta") = 1e-6, py::arg("epsilon") = 1e-6, py::arg("threads") = 1,        \
      py::arg("gamma") = 1.0, py::arg("rho") = 0.5, py::arg("demand_alpha") = 1.0, py::arg("demand_beta") = 1.0

}  // namespace

PYBIND11_MODULE(_monotest, m) {
  m.doc() = "Moment-inequality tests for monotone equilibrium strategies";

  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  py::class_<TestResult>(m, "TestResult")
      .def_readonly("method", &TestResult::method)
      .def_readonly("statistic", &TestResult::statistic)
      .def_readonly("critical_value", &TestResult::critical_value)
      .def_readonly("p_value", &TestResult::p_value)
      .def_readonly("reject", &TestResult::reject)
      .def_readonly("bootstrap_statistics", &TestResult::bootstrap_statistics)
      .def_readonly("theta", &TestResult::theta)
      .def_property_readonly("nu_hat",
                             [](const TestResult& r) {
                               std::vector<std::vector<double>> out;
                               for (const auto& g : r.groups) out.push_back(g.table.nu);
                               return out;
                             })
      .def("to_json", &result_to_json)
      .def("__repr__", [](const TestResult& r) {
        return "<TestResult statistic=" + format_double(r.statistic) + " critical_value=" +
               format_double(r.critical_value) + " reject=" + (r.reject ? "True" : "False") + ">";
      });

  m.def(
      "run_test",
      [](const std::vector<std::vector<double>>& actions, const std::string& game, double alpha, int n_boot, int n_c,
         std::uint64_t seed, double eta, double epsilon, int threads, double gamma, double rho, double da,
         double db) {
        const auto sample = make_sample(actions, std::nullopt, std::nullopt);
        const auto config = make_config(alpha, n_boot, n_c, seed, eta, epsilon, threads);
        const auto kernel = make_kernel(game, gamma, rho, da, db);
        py::gil_scoped_release release;
        return sample.group_tags().size() > 1 ? run_test_joint(sample, kernel, config)
                                              : run_test(sample, kernel, config);
      },
      py::arg("actions"), MONOTEST_TEST_ARGS,
      "Test on a list of games (one list of actions each). Mixed game sizes run the joint test.");

  m.def(
      "run_test_x",
      [](const std::vector<std::vector<double>>& actions, const std::vector<double>& covariate,
         const std::string& game, double alpha, int n_boot, int n_c, std::uint64_t seed, double eta, double epsilon,
         int threads, double gamma, double rho, double da, double db) {
        const auto sample = make_sample(actions, covariate, std::nullopt);
        const auto config = make_config(alpha, n_boot, n_c, seed, eta, epsilon, threads);
        const auto kernel = make_kernel(game, gamma, rho, da, db);
        py::gil_scoped_release release;
        return run_test_x(sample, kernel, config);
      },
      py::arg("actions"), py::arg("covariate"), MONOTEST_TEST_ARGS);

  m.def(
      "run_test_semi",
      [](const std::vector<std::vector<double>>& actions, const std::vector<std::vector<double>>& design,
         const std::string& game, double alpha, int n_boot, int n_c, std::uint64_t seed, double eta, double epsilon,
         int threads, double gamma, double rho, double da, double db) {
        const auto sample = make_sample(actions, std::nullopt, design);
        const auto config = make_config(alpha, n_boot, n_c, seed, eta, epsilon, threads);
        const auto kernel = make_kernel(game, gamma, rho, da, db);
        py::gil_scoped_release release;
        return run_test_semi(sample, kernel, config);
      },
      py::arg("actions"), py::arg("design"), MONOTEST_TEST_ARGS);

  m.def(
      "ols_fit",
      [](const std::vector<std::vector<double>>& actions, const std::vector<std::vector<double>>& design) {
        const auto fit = ols_fit(make_sample(actions, std::nullopt, design));
        std::vector<std::vector<double>> rescaled;
        for (const auto& g : fit.rescaled.games()) rescaled.push_back(g.actions);
        return py::make_tuple(fit.theta, rescaled);
      },
      py::arg("actions"), py::arg("design"), "Returns (theta, rescaled actions).");

  m.def(
      "estimate_nu",
      [](const std::vector<std::vector<double>>& actions, const std::string& game, int q1) {
        const auto sample = make_sample(actions, std::nullopt, std::nullopt);
        const auto grid = build_grid(infer_support(sample), q1, 0);
        const auto table = estimate_moments(sample, MomentKernel::for_class(parse_game_class(game)), grid);
        std::vector<py::tuple> cells;
        for (std::size_t p = 0; p < grid.size(); ++p) {
          cells.push_back(py::make_tuple(grid.points[p].b1, grid.points[p].b2, grid.points[p].q, table.nu[p]));
        }
        return cells;
      },
      py::arg("actions"), py::arg("game") = "auction-high", py::arg("q1") = 4,
      "List of (b1, b2, q, nu_hat) over the grid on the empirical support.");

  m.def("draw_bids_quantile",
        [](double k, std::size_t n, std::uint64_t seed) {
          CounterRng rng(seed);
          return draw_bids_quantile(k, n, rng);
        },
        py::arg("k"), py::arg("n"), py::arg("seed") = 0);

  m.def("xi_analytic", &xi_analytic, py::arg("k"), py::arg("N"), py::arg("b"));

  m.def(
      "xi_curve",
      [](double k, int agents, std::size_t points) {
        std::vector<std::pair<double, double>> out;
        for (const auto& p : xi_curve(k, agents, points)) out.emplace_back(p.b, p.xi);
        return out;
      },
      py::arg("k"), py::arg("N") = 2, py::arg("points") = 512);

  m.def(
      "rejection_rate",
      [](const std::string& dgp, double k, std::size_t games, int n_mc, int n_boot, int n_c, std::uint64_t seed,
         int covariate_case, int a, int threads) {
        SimDesign d;
        d.dgp = parse_dgp(dgp);
        d.k = k;
        d.games = games;
        d.n_mc = n_mc;
        d.covariate_case = covariate_case;
        d.a = a;
        d.threads = threads;
        d.test.n_boot = n_boot;
        d.test.n_c = n_c;
        d.test.seed = seed;
        py::gil_scoped_release release;
        return rejection_rate(d).rate;
      },
      py::arg("dgp"), py::arg("k") = 0.5, py::arg("L") = 500, py::arg("n_mc") = 200, py::arg("n_boot") = 500,
      py::arg("n_c") = 20, py::arg("seed") = 0, py::arg("case") = 1, py::arg("a") = 1, py::arg("threads") = 1);
}
