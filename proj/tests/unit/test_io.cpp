#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "json.hpp"
#include "monotest/error.hpp"
#include "monotest/io.hpp"
#include "monotest/montecarlo.hpp"

using namespace monotest;

namespace {

ActionSample read(const std::string& text, const ColumnMapping& m, LoadDiagnostics* d = nullptr) {
  std::istringstream in(text);
  return read_csv(in, m, d);
}

}  // namespace

TEST_CASE("actions are normalized") {
  ColumnMapping m;
  m.game_id = "tender";
  m.action = "bid";
  m.normalize_by = "engineer_estimate";
  const auto s = read("tender,bid,engineer_estimate\nA,10,20\nA,12,20\n", m);
  REQUIRE(s.game_count() == 1);
  CHECK(s.games()[0].actions == std::vector<double>{0.5, 0.6});
}

TEST_CASE("games of different sizes form groups") {
  const auto s = read("game_id,action\na,1\nb,2\na,3\nb,4\nb,5\nc,6\nc,7\n", ColumnMapping{});
  CHECK(s.group_tags() == std::vector<int>{2, 3});
  CHECK(s.split_by_group()[0].game_count() == 2);
  CHECK(s.games()[1].game_id == "b");
  CHECK(s.games()[1].actions == std::vector<double>{2, 4, 5});
}

TEST_CASE("schema problems") {
  CHECK_THROWS_AS(read("game_id,bid\na,1\na,2\n", ColumnMapping{}), SchemaError);
  CHECK_THROWS_AS(read("game_id,action\na,1\na,x\n", ColumnMapping{}), SchemaError);
  CHECK_THROWS_AS(read("game_id,action\na,1\na,2,3\n", ColumnMapping{}), SchemaError);
  CHECK_THROWS_AS(read("", ColumnMapping{}), SchemaError);
  CHECK_THROWS_AS(read("game_id,action\n", ColumnMapping{}), SchemaError);
  ColumnMapping m;
  m.covariate = "area";
  CHECK_THROWS_AS(read("game_id,action\na,1\na,2\n", m), SchemaError);
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", ColumnMapping{}), UsageError);
}

TEST_CASE("single-row games are dropped with a warning") {
  LoadDiagnostics d;
  const auto s = read("game_id,action\na,1\nb,2\na,3\n", ColumnMapping{}, &d);
  CHECK(s.game_count() == 1);
  CHECK(d.dropped_games == 1);
  CHECK(d.rows == 3);
  REQUIRE(d.warnings.size() == 1);
  CHECK(d.warnings[0].find("'b'") != std::string::npos);
}

TEST_CASE("quoted fields") {
  const auto s = read("game_id,action\n\"x,1\",0.5\n\"x,1\",0.25\n", ColumnMapping{});
  CHECK(s.games()[0].game_id == "x,1");
}

TEST_CASE("write then read reproduces the sample") {
  SimDesign d;
  d.dgp = Dgp::Covariate;
  d.games = 50;
  CounterRng rng(3, kDataStream);
  std::vector<GameRecord> games = simulate_sample(d, rng).games();
  for (auto& g : games) g.design = {g.actions[0] * 3.0};
  const ActionSample original(games);
  ColumnMapping m;
  m.covariate = "x";
  m.design = {"z"};
  std::ostringstream out;
  write_csv(out, original, m);
  const auto back = read(out.str(), m);
  REQUIRE(back.game_count() == original.game_count());
  for (std::size_t g = 0; g < back.game_count(); ++g) {
    CHECK(back.games()[g].game_id == original.games()[g].game_id);
    CHECK(back.games()[g].actions == original.games()[g].actions);
    CHECK(back.games()[g].covariate == original.games()[g].covariate);
    CHECK(back.games()[g].design == original.games()[g].design);
  }
}

TEST_CASE("number formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(0.0) == "0.0");
  CHECK(format_double(2.0) == "2.0");
  CHECK(format_double(1e300) == "1.0000000000000001e+300");
}

TEST_CASE("result document") {
  SimDesign d;
  d.games = 100;
  CounterRng rng(1, kDataStream);
  const auto sample = simulate_sample(d, rng);
  TestConfig c;
  c.n_boot = 100;
  c.seed = 5;
  const auto r = run_test(sample, MomentKernel::public_good([](double) { return 1.0; }), c);
  const std::string text = result_to_json(r);
  CHECK(text.find("\"statistic\":0.0,") != std::string::npos);
  const auto doc = nlohmann::json::parse(text);
  CHECK(doc["reject"] == false);
  CHECK(doc["alpha"] == 0.1);
  CHECK(doc["n_boot"] == 100);
  CHECK(doc["seed"] == 5);
  CHECK(doc["tuning"]["q1"] == r.groups[0].grid.q1);
  CHECK(doc["tuning"]["kappa"].get<double>() == r.groups[0].tuning.kappa);
  CHECK(doc["groups"][0]["S"] == 200);
  REQUIRE(doc["cells"].size() == r.groups[0].grid.size());
  const auto& cell = doc["cells"][0];
  for (const char* key : {"b1", "b2", "q", "nu_hat", "sigma_hat", "psi", "weight"}) CHECK(cell.contains(key));
  CHECK_FALSE(cell.contains("x"));
  CHECK(cell["b1"].get<double>() == r.groups[0].grid.points[0].b1);
  CHECK_THROWS_AS(emit_result(r, "/nonexistent/dir/out.json"), UsageError);
}
