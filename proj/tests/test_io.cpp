#include <doctest.h>

#include "chaosloop/bench.hpp"
#include "chaosloop/error.hpp"
#include "chaosloop/io.hpp"

using namespace chaosloop;

TEST_CASE("density JSON round trip") {
  for (const Density& d : {Density::normal(1, 0.5), Density::uniform(1, 2), Density::truncated_normal(2, 0.1, 1, 3),
                           Density::truncated_gamma(3, 1, 0.5, 1)}) {
    CHECK(density_from_json(density_to_json(d)) == d);
  }
  CHECK(density_from_json(Json::parse(R"({"family":"Normal","mu":0,"var":0.01})")) == Density::normal(0, 0.1));
  CHECK_THROWS_AS(density_from_json(Json::parse(R"({"family":"Cauchy"})")), DomainError);
  CHECK_THROWS_AS(density_from_json(Json::parse(R"({"family":"Normal","mu":0})")), DomainError);
}

TEST_CASE("germ files and inline JSON") {
  const auto g = germs_from_json(load_json_arg(CHAOSLOOP_SOURCE_DIR "/benchmarks/worked_example_germs.json"));
  REQUIRE(g.size() == 2);
  CHECK(g[0].name == "x");
  CHECK(g[0].density == Density::truncated_normal_var(2, 0.01, 1, 3));
  CHECK(germs_from_json(load_json_arg(R"([{"name":"z","family":"Uniform","a":0,"b":1}])"))[0].name == "z");
}

TEST_CASE("polynomial JSON round trip") {
  const auto x = MultiPoly::variable(2, 0), y = MultiPoly::variable(2, 1);
  const MultiPoly p = x.pow(2) * y.scaled(-0.25) + MultiPoly::constant(2, 3.0);
  CHECK(poly_from_json(poly_to_json(p)) == p);
}

TEST_CASE("CSV quoting and fixed column order") {
  Table t;
  t.columns = {"a", "b"};
  t.rows = {{"1", "x, y"}, {"2", "say \"hi\""}};
  CHECK(t.to_csv() == "a,b\n1,\"x, y\"\n2,\"say \"\"hi\"\"\"\n");
}

TEST_CASE("digest is stable and input sensitive") {
  CHECK(digest({"a", "b"}) == digest({"a", "b"}));
  CHECK(digest({"a", "b"}) != digest({"ab"}));
  CHECK(digest({}).size() == 16);
}

TEST_CASE("reports are byte-identical across runs") {
  BenchOptions o;
  o.samples = 5000;
  const RunReport a = run_bench({"appendix-b", "turning-vehicle"}, o);
  const RunReport b = run_bench({"appendix-b", "turning-vehicle"}, o);
  CHECK(a.table.to_csv() == b.table.to_csv());
  CHECK(a.to_json().dump() == b.to_json().dump());
  CHECK(a.to_json().contains("timings") == false);
  CHECK(a.exit_code == 0);
}

TEST_CASE("bench suites: empty, skipped and unknown") {
  const RunReport e = run_bench({}, {});
  CHECK(e.exit_code == 0);
  CHECK(e.table.rows.empty());
  const RunReport s = run_bench({"robotic-arm"}, {});
  CHECK(s.exit_code == 3);
  CHECK(s.table.rows.at(0).back() == "SKIPPED(transcription-needed)");
  CHECK_THROWS_AS(run_bench({"no-such-suite"}, {}), DomainError);
}

TEST_CASE("turning-vehicle template reproduces the shipped program at tau = 0.1") {
  const LoopProgram shipped = parse_program(read_file(CHAOSLOOP_SOURCE_DIR "/benchmarks/turning_vehicle.ppl"));
  CHECK(same_program(parse_program(turning_vehicle_source(0.1)), shipped));
  CHECK_FALSE(same_program(parse_program(turning_vehicle_source(0.05)), shipped));
}

TEST_CASE("every emitted bench number carries its reference and deviation") {
  BenchOptions o;
  o.samples = 2000;
  const RunReport r = run_bench({"appendix-b"}, o);
  const auto& cols = r.table.columns;
  const auto col = [&](const std::string& n) { return std::find(cols.begin(), cols.end(), n) - cols.begin(); };
  for (const auto& row : r.table.rows) {
    CHECK_FALSE(row[col("result")].empty());
    CHECK_FALSE(row[col("result_ref")].empty());
    CHECK_FALSE(row[col("result_rel_dev")].empty());
  }
}
