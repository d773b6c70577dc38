#include "monotest/io.hpp"

#include <boost/tokenizer.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "monotest/error.hpp"

namespace monotest {

namespace {

using Json = nlohmann::ordered_json;

std::vector<std::string> split_row(const std::string& line) {
  using Separator = boost::escaped_list_separator<char>;
  boost::tokenizer<Separator> tok(line, Separator('\\', ',', '"'));
  std::vector<std::string> cells;
  for (const auto& t : tok) cells.push_back(t);
  return cells;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& text, const std::string& column, std::size_t line) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size() || !std::isfinite(v)) {
    throw SchemaError("line " + std::to_string(line) + ": column '" + column + "' is not a number: '" + t + "'");
  }
  return v;
}

void write_json(std::string& out, const Json& j) {
  switch (j.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ',';
        first = false;
        out += Json(key).dump();
        out += ':';
        write_json(out, value);
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& value : j) {
        if (!first) out += ',';
        first = false;
        write_json(out, value);
      }
      out += ']';
      break;
    }
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      break;
    default:
      out += j.dump();
  }
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

std::string format_double(double value) {
  if (!std::isfinite(value)) return "null";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  std::string s = buf;
  // Keep integral values recognizable as floating point.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

ActionSample read_csv(std::istream& in, const ColumnMapping& mapping, LoadDiagnostics* diagnostics) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) header = split_row(line);
  }
  if (header.empty()) throw SchemaError("input is empty");
  for (auto& h : header) h = trim(h);

  auto column = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw SchemaError("missing column '" + name + "'");
  };
  const std::size_t id_col = column(mapping.game_id);
  const std::size_t action_col = column(mapping.action);
  const std::optional<std::size_t> cov_col =
      mapping.covariate ? std::optional<std::size_t>(column(*mapping.covariate)) : std::nullopt;
  const std::optional<std::size_t> norm_col =
      mapping.normalize_by ? std::optional<std::size_t>(column(*mapping.normalize_by)) : std::nullopt;
  std::vector<std::size_t> design_cols;
  for (const auto& d : mapping.design) design_cols.push_back(column(d));

  LoadDiagnostics diag;
  std::vector<GameRecord> games;
  std::map<std::string, std::size_t> index;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_row(line);
    if (cells.size() != header.size()) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                        " fields, found " + std::to_string(cells.size()));
    }
    ++diag.rows;
    const std::string id = trim(cells[id_col]);
    double action = parse_number(cells[action_col], mapping.action, line_no);
    if (norm_col) {
      const double scale = parse_number(cells[*norm_col], *mapping.normalize_by, line_no);
      if (!(scale > 0.0)) {
        throw NumericError("line " + std::to_string(line_no) + ": normalize_by value must be positive");
      }
      action /= scale;
    }
    auto [it, inserted] = index.emplace(id, games.size());
    if (inserted) {
      GameRecord g;
      g.game_id = id;
      if (cov_col) g.covariate = parse_number(cells[*cov_col], *mapping.covariate, line_no);
      for (std::size_t k = 0; k < design_cols.size(); ++k) {
        g.design.push_back(parse_number(cells[design_cols[k]], mapping.design[k], line_no));
      }
      games.push_back(std::move(g));
    }
    games[it->second].actions.push_back(action);
  }
  if (games.empty()) throw SchemaError("input has a header but no rows");

  std::vector<GameRecord> kept;
  kept.reserve(games.size());
  for (auto& g : games) {
    if (g.actions.size() < 2) {
      ++diag.dropped_games;
      diag.warnings.push_back("game '" + g.game_id + "' has a single row and was dropped");
      continue;
    }
    g.group = static_cast<int>(g.actions.size());
    kept.push_back(std::move(g));
  }
  diag.games = kept.size();
  if (kept.empty()) throw SchemaError("no game has two or more rows");
  if (diagnostics) *diagnostics = std::move(diag);
  return ActionSample(std::move(kept));
}

ActionSample load_csv(const std::string& path, const ColumnMapping& mapping, LoadDiagnostics* diagnostics) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  return read_csv(in, mapping, diagnostics);
}

void write_csv(std::ostream& out, const ActionSample& sample, const ColumnMapping& mapping) {
  out << mapping.game_id << ',' << mapping.action;
  if (mapping.covariate) out << ',' << *mapping.covariate;
  for (const auto& d : mapping.design) out << ',' << d;
  out << '\n';
  for (const auto& g : sample.games()) {
    if (g.game_id.find_first_of(",\"\\\n") != std::string::npos) {
      throw UsageError("game id '" + g.game_id + "' cannot be written unquoted");
    }
    if (mapping.design.size() != g.design.size()) throw UsageError("design columns do not match the sample");
    for (double b : g.actions) {
      out << g.game_id << ',' << format_double(b);
      if (mapping.covariate) {
        if (!g.covariate) throw UsageError("sample has no covariate to write");
        out << ',' << format_double(*g.covariate);
      }
      for (double d : g.design) out << ',' << format_double(d);
      out << '\n';
    }
  }
}

std::string result_to_json(const TestResult& result) {
  const auto& c = result.config;
  Json doc;
  doc["method"] = result.method;
  doc["game_class"] = std::string(to_string(result.game_class));
  doc["statistic"] = result.statistic;
  doc["critical_value"] = result.critical_value;
  doc["p_value"] = result.p_value;
  doc["reject"] = result.reject;
  doc["alpha"] = c.alpha;
  doc["n_boot"] = c.n_boot;
  doc["seed"] = c.seed;
  Json tuning;
  tuning["epsilon"] = c.epsilon;
  tuning["eta"] = c.eta;
  tuning["n_c"] = c.n_c;
  if (!result.groups.empty()) {
    tuning["kappa"] = result.groups.front().tuning.kappa;
    tuning["beta"] = result.groups.front().tuning.beta;
    tuning["q1"] = result.groups.front().grid.q1;
  }
  doc["tuning"] = tuning;
  doc["support"] = {{"lo", result.support.lo}, {"hi", result.support.hi}};
  if (!result.theta.empty()) doc["theta"] = result.theta;

  Json groups = Json::array();
  Json cells = Json::array();
  for (std::size_t t = 0; t < result.groups.size(); ++t) {
    const auto& g = result.groups[t];
    groups.push_back({{"agents", g.agents},
                      {"games", g.games},
                      {"S", g.observations},
                      {"q1", g.grid.q1},
                      {"kappa", g.tuning.kappa},
                      {"beta", g.tuning.beta},
                      {"statistic", g.statistic},
                      {"anchor_variance", g.table.anchor_variance},
                      {"anchor_fallback", g.table.anchor_fallback},
                      {"degenerate_variance", g.table.degenerate_variance}});
    for (std::size_t p = 0; p < g.grid.size(); ++p) {
      const auto& pt = g.grid.points[p];
      Json cell;
      if (result.groups.size() > 1) cell["group"] = t;
      cell["b1"] = pt.b1;
      cell["b2"] = pt.b2;
      if (pt.x) cell["x"] = *pt.x;
      cell["q"] = pt.q;
      cell["nu_hat"] = g.table.nu[p];
      cell["sigma_hat"] = g.table.sigma_eps[p];
      cell["psi"] = g.psi[p];
      cell["weight"] = g.grid.weights[p];
      cells.push_back(std::move(cell));
    }
  }
  doc["groups"] = std::move(groups);
  const auto& s = result.bootstrap_summary;
  doc["bootstrap"] = {{"mean", number_or_null(s.mean)}, {"min", s.min}, {"max", s.max}, {"q50", s.q50},
                      {"q90", s.q90},   {"q95", s.q95},   {"q99", s.q99}};
  doc["cells"] = std::move(cells);

  std::string out;
  write_json(out, doc);
  out += '\n';
  return out;
}

void emit_result(const TestResult& result, const std::string& path) {
  const std::string text = result_to_json(result);
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << text;
  if (!out) throw UsageError("failed writing '" + path + "'");
}

}  // namespace monotest
