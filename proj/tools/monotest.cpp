// monotest: command-line front end for the monotonicity tests.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "monotest/covariate.hpp"
#include "monotest/error.hpp"
#include "monotest/homogenize.hpp"
#include "monotest/inference.hpp"
#include "monotest/io.hpp"
#include "monotest/montecarlo.hpp"

namespace {

using namespace monotest;
using Json = nlohmann::json;

constexpr int kExitNotRejected = 0;
constexpr int kExitRejected = 10;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct TestOptions {
  std::string game = "auction-high";
  std::string input;
  std::string action = "action";
  std::string game_id = "game_id";
  std::string covariate;
  std::string normalize_by;
  std::vector<std::string> design_cols;
  double alpha = 0.10;
  int n_boot = 1000;
  int n_c = 20;
  std::uint64_t seed = 0;
  double eta = 1e-6;
  double epsilon = 1e-6;
  int threads = 1;
  std::optional<double> support_lo;
  std::optional<double> support_hi;
  double gamma = 1.0;
  double rho = 0.5;
  double demand_alpha = 1.0;
  double demand_beta = 1.0;
  bool fixed_theta = false;
  std::string out = "-";
};

struct SimulateOptions {
  std::string dgp = "table1";
  std::vector<double> k{0.5};
  std::vector<int> cases{1};
  std::vector<std::size_t> games{500};
  std::vector<int> a{1};
  int agents = 2;
  int n_mc = 200;
  int n_boot = 500;
  std::vector<int> n_c{15, 20, 25, 30};
  double alpha = 0.10;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out = "-";
  std::string log;
};

struct XiOptions {
  double k = 5.0;
  int agents = 2;
  int points = 512;
  std::string out = "-";
};

template <class T>
void take(const Json& doc, const char* key, T& target) {
  if (doc.contains(key)) target = doc.at(key).get<T>();
}

template <class T>
void take(const Json& doc, const char* key, std::optional<T>& target) {
  if (doc.contains(key)) target = doc.at(key).get<T>();
}

// Values from --config become the starting point; command-line flags parsed
// afterwards overwrite them.
void apply_config(const Json& doc, TestOptions& o, SimulateOptions& s, XiOptions& x) {
  if (!doc.is_object()) throw SchemaError("config must be a JSON object");
  static const std::vector<std::string> known = {
      "game", "input", "action", "game_id", "covariate", "normalize_by", "design_cols", "alpha", "n_boot", "nc",
      "seed", "eta", "epsilon", "threads", "support_lo", "support_hi", "gamma", "rho", "demand_alpha",
      "demand_beta", "fixed_theta", "out", "dgp", "k", "case", "L", "a", "N", "n_mc", "log", "points"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw SchemaError("unknown config key '" + key + "'");
    }
  }
  try {
    take(doc, "game", o.game);
    take(doc, "input", o.input);
    take(doc, "action", o.action);
    take(doc, "game_id", o.game_id);
    take(doc, "covariate", o.covariate);
    take(doc, "normalize_by", o.normalize_by);
    take(doc, "design_cols", o.design_cols);
    take(doc, "alpha", o.alpha);
    take(doc, "alpha", s.alpha);
    take(doc, "n_boot", o.n_boot);
    take(doc, "n_boot", s.n_boot);
    take(doc, "seed", o.seed);
    take(doc, "seed", s.seed);
    take(doc, "eta", o.eta);
    take(doc, "epsilon", o.epsilon);
    take(doc, "threads", o.threads);
    take(doc, "threads", s.threads);
    take(doc, "support_lo", o.support_lo);
    take(doc, "support_hi", o.support_hi);
    take(doc, "gamma", o.gamma);
    take(doc, "rho", o.rho);
    take(doc, "demand_alpha", o.demand_alpha);
    take(doc, "demand_beta", o.demand_beta);
    take(doc, "fixed_theta", o.fixed_theta);
    take(doc, "out", o.out);
    take(doc, "out", s.out);
    take(doc, "out", x.out);
    take(doc, "dgp", s.dgp);
    take(doc, "case", s.cases);
    take(doc, "L", s.games);
    take(doc, "a", s.a);
    take(doc, "N", s.agents);
    take(doc, "N", x.agents);
    take(doc, "n_mc", s.n_mc);
    take(doc, "log", s.log);
    take(doc, "points", x.points);
    if (doc.contains("nc")) {
      if (doc["nc"].is_array()) {
        s.n_c = doc["nc"].get<std::vector<int>>();
      } else {
        o.n_c = doc["nc"].get<int>();
        s.n_c = {o.n_c};
      }
    }
    if (doc.contains("k")) {
      if (doc["k"].is_array()) {
        s.k = doc["k"].get<std::vector<double>>();
      } else {
        x.k = doc["k"].get<double>();
        s.k = {x.k};
      }
    }
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("bad config value: ") + e.what());
  }
}

std::optional<std::string> find_config_path(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return std::nullopt;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << text;
}

void add_test_options(CLI::App* cmd, TestOptions& o, bool covariate, bool design) {
  cmd->add_option("--game", o.game, "auction-high, auction-low, contest, public-good or cournot");
  cmd->add_option("--input", o.input, "CSV file with one row per agent");
  cmd->add_option("--action", o.action, "action column");
  cmd->add_option("--game-id", o.game_id, "game identifier column");
  cmd->add_option("--normalize-by", o.normalize_by, "column dividing every action");
  if (covariate) cmd->add_option("--covariate", o.covariate, "scalar covariate column");
  if (design) {
    cmd->add_option("--design-cols", o.design_cols, "regressors of the log-action fit")->expected(1, -1);
    cmd->add_flag("--fixed-theta", o.fixed_theta, "keep theta fixed inside the bootstrap (ablation only)");
  }
  cmd->add_option("--alpha", o.alpha, "significance level");
  cmd->add_option("--n-boot", o.n_boot, "bootstrap replications");
  cmd->add_option("--nc", o.n_c, "observations per smallest cell");
  cmd->add_option("--seed", o.seed, "bootstrap seed");
  cmd->add_option("--eta", o.eta, "uniformity factor");
  cmd->add_option("--epsilon", o.epsilon, "variance floor factor");
  cmd->add_option("--threads", o.threads, "worker threads, 0 for all");
  cmd->add_option("--support-lo", o.support_lo, "lower end of the action support");
  cmd->add_option("--support-hi", o.support_hi, "upper end of the action support");
  cmd->add_option("--gamma", o.gamma, "public good benefit scale");
  cmd->add_option("--rho", o.rho, "public good benefit exponent");
  cmd->add_option("--demand-alpha", o.demand_alpha, "inverse demand intercept");
  cmd->add_option("--demand-beta", o.demand_beta, "inverse demand slope");
  cmd->add_option("--out", o.out, "result JSON path, - for stdout");
  cmd->add_option("--config", "JSON file with option defaults");
}

int run_test_command(const std::string& command, const TestOptions& o) {
  if (o.input.empty()) throw UsageError("--input is required");
  ColumnMapping mapping;
  mapping.game_id = o.game_id;
  mapping.action = o.action;
  if (!o.normalize_by.empty()) mapping.normalize_by = o.normalize_by;
  if (command == "test-covariate") {
    if (o.covariate.empty()) throw UsageError("--covariate is required");
    mapping.covariate = o.covariate;
  }
  if (command == "test-semi") mapping.design = o.design_cols;

  LoadDiagnostics diag;
  const ActionSample sample = load_csv(o.input, mapping, &diag);
  for (const auto& w : diag.warnings) std::cerr << "warning: " << w << '\n';

  TestConfig config;
  config.alpha = o.alpha;
  config.n_boot = o.n_boot;
  config.n_c = o.n_c;
  config.seed = o.seed;
  config.eta = o.eta;
  config.epsilon = o.epsilon;
  config.threads = o.threads;
  if (o.support_lo || o.support_hi) {
    if (!(o.support_lo && o.support_hi)) throw UsageError("give both --support-lo and --support-hi");
    config.support_override = std::make_pair(*o.support_lo, *o.support_hi);
  }
  const auto cls = parse_game_class(o.game);
  const auto kernel = MomentKernel::for_class(cls, PowerBenefit{o.gamma, o.rho},
                                              LinearDemand{o.demand_alpha, o.demand_beta});

  TestResult result;
  if (command == "test") {
    result = run_test(sample, kernel, config);
  } else if (command == "test-joint") {
    result = run_test_joint(sample, kernel, config);
  } else if (command == "test-covariate") {
    result = run_test_x(sample, kernel, config);
  } else {
    if (o.n_boot < 100) std::cerr << "warning: fewer than 100 bootstrap replications\n";
    result = run_test_semi(sample, kernel, config, SemiOptions{!o.fixed_theta});
  }
  emit_result(result, o.out);
  return result.reject ? kExitRejected : kExitNotRejected;
}

int run_simulate(const SimulateOptions& s) {
  SimDesign base;
  base.dgp = parse_dgp(s.dgp);
  base.agents = s.agents;
  base.n_mc = s.n_mc;
  base.threads = s.threads;
  base.test.alpha = s.alpha;
  base.test.n_boot = s.n_boot;
  base.test.seed = s.seed;

  struct Cell {
    SimDesign design;
    std::string label;
    std::string size;
  };
  std::vector<Cell> rows;
  auto label = [](double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  };
  switch (base.dgp) {
    case Dgp::NoCovariate:
    case Dgp::Semi:
      for (double k : s.k) {
        for (std::size_t L : s.games) {
          SimDesign d = base;
          d.k = k;
          d.games = L;
          rows.push_back({d, label(k), std::to_string(L)});
        }
      }
      break;
    case Dgp::Covariate:
      for (int c : s.cases) {
        for (std::size_t L : s.games) {
          SimDesign d = base;
          d.covariate_case = c;
          d.games = L;
          rows.push_back({d, "case" + std::to_string(c), std::to_string(L)});
        }
      }
      break;
    case Dgp::HeteroN:
      for (double k : s.k) {
        for (int a : s.a) {
          SimDesign d = base;
          d.k = k;
          d.a = a;
          rows.push_back({d, label(k), "a=" + std::to_string(a)});
        }
      }
      break;
  }

  std::vector<TableRow> table;
  std::ostringstream log;
  log << "design,size,n_c,repetition,seed,statistic,critical_value,p_value,reject\n";
  for (const auto& row : rows) {
    TableRow out{row.label, row.size, {}};
    for (int n_c : s.n_c) {
      SimDesign d = row.design;
      d.test.n_c = n_c;
      const auto report = rejection_rate(d);
      std::cerr << to_string(d.dgp) << ' ' << row.label << ' ' << row.size << " n_c=" << n_c
                << " rate=" << report.rate << '\n';
      out.rates.push_back(report.rate);
      std::istringstream lines(repetition_log_csv(report));
      std::string line;
      std::getline(lines, line);
      while (std::getline(lines, line)) log << row.label << ',' << row.size << ',' << n_c << ',' << line << '\n';
    }
    table.push_back(std::move(out));
  }
  write_text(s.out, results_table_csv(s.n_c, table));
  if (!s.log.empty()) write_text(s.log, log.str());
  return 0;
}

int run_xi_curve(const XiOptions& x) {
  if (x.points < 2) throw UsageError("--points must be at least 2");
  std::ostringstream out;
  out << "b,xi\n";
  for (const auto& p : xi_curve(x.k, x.agents, static_cast<std::size_t>(x.points))) {
    out << format_double(p.b) << ',' << format_double(p.xi) << '\n';
  }
  write_text(x.out, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  TestOptions test_opts;
  SimulateOptions sim_opts;
  XiOptions xi_opts;

  CLI::App app{"Tests for monotone equilibrium strategies in games with private types"};
  app.require_subcommand(1);

  const std::vector<std::string> test_commands = {"test", "test-joint", "test-covariate", "test-semi"};
  std::vector<CLI::App*> test_apps;
  test_apps.push_back(app.add_subcommand("test", "test on games with a common number of agents"));
  test_apps.push_back(app.add_subcommand("test-joint", "joint test over games with different numbers of agents"));
  test_apps.push_back(app.add_subcommand("test-covariate", "test conditional on a scalar game covariate"));
  test_apps.push_back(app.add_subcommand("test-semi", "test on actions homogenized by a log-linear fit"));
  for (std::size_t i = 0; i < test_apps.size(); ++i) {
    add_test_options(test_apps[i], test_opts, test_commands[i] == "test-covariate", test_commands[i] == "test-semi");
  }

  auto* sim = app.add_subcommand("simulate", "rejection frequencies of a simulation design");
  sim->add_option("--dgp", sim_opts.dgp, "table1, table2, tableA or semi");
  sim->add_option("--k", sim_opts.k, "quantile parameter(s)")->expected(1, -1);
  sim->add_option("--case", sim_opts.cases, "covariate case(s) 1-5")->expected(1, -1);
  sim->add_option("--L", sim_opts.games, "number(s) of games")->expected(1, -1);
  sim->add_option("--a", sim_opts.a, "sample size multiplier(s) for tableA")->expected(1, -1);
  sim->add_option("--N", sim_opts.agents, "agents per game");
  sim->add_option("--n-mc", sim_opts.n_mc, "Monte Carlo repetitions");
  sim->add_option("--n-boot", sim_opts.n_boot, "bootstrap replications");
  sim->add_option("--nc", sim_opts.n_c, "n_c value(s), one column each")->expected(1, -1);
  sim->add_option("--alpha", sim_opts.alpha, "significance level");
  sim->add_option("--seed", sim_opts.seed, "master seed");
  sim->add_option("--threads", sim_opts.threads, "worker threads over repetitions, 0 for all");
  sim->add_option("--out", sim_opts.out, "table CSV path, - for stdout");
  sim->add_option("--log", sim_opts.log, "per-repetition CSV path");
  sim->add_option("--config", "JSON file with option defaults");

  auto* xi = app.add_subcommand("xi-curve", "closed-form quasi-inverse strategy of the simulation design");
  xi->add_option("--k", xi_opts.k, "quantile parameter");
  xi->add_option("--N", xi_opts.agents, "agents per game");
  xi->add_option("--points", xi_opts.points, "grid points on [0.01, 0.99]");
  xi->add_option("--out", xi_opts.out, "CSV path, - for stdout");
  xi->add_option("--config", "JSON file with option defaults");

  try {
    if (const auto path = find_config_path(argc, argv)) {
      std::ifstream in(*path);
      if (!in) throw UsageError("cannot open config '" + *path + "'");
      Json doc;
      try {
        doc = Json::parse(in);
      } catch (const Json::exception& e) {
        throw SchemaError(std::string("config is not valid JSON: ") + e.what());
      }
      apply_config(doc, test_opts, sim_opts, xi_opts);
    }
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return code == 0 ? 0 : kExitUsage;
    }
    for (std::size_t i = 0; i < test_apps.size(); ++i) {
      if (test_apps[i]->parsed()) return run_test_command(test_commands[i], test_opts);
    }
    if (sim->parsed()) return run_simulate(sim_opts);
    if (xi->parsed()) return run_xi_curve(xi_opts);
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  }
}
