// Reproduction suites: two-germ worked example, loop benchmarks and the
// non-linear function error table, with published reference values.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chaosloop/io.hpp"

namespace chaosloop {

struct BenchOptions {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 42;
  double tau = 0.1;
  int quad_nodes = 64;
  bool timings = false;
};

struct RunReport {
  std::string command;
  std::string inputs_digest;
  Json config = Json::object();
  Json results = Json::object();
  Table table;
  // Only filled when timings were requested, so default reports stay byte-identical.
  Json timings;
  int exit_code = 0;

  Json to_json() const;
};

std::vector<std::string> known_suites();
bool suite_skipped(const std::string& suite);

// Turning-vehicle program for time step tau (K = -0.5, v0 = 10).
std::string turning_vehicle_source(double tau);

struct Table2Case {
  std::string function;
  std::string variables;
  std::vector<int> degrees;  // per row of the table
  std::vector<double> reference;
  double tolerance;          // relative
};
std::vector<Table2Case> table2_cases();

struct Table2Cell {
  std::size_t row;
  int degree;
  std::size_t L;
  double error;
  double reference;
  double tolerance;
};
std::vector<Table2Cell> compute_table2(int quad_nodes = 64);

struct WorkedExample {
  PceExpansion expansion;
  std::vector<double> ref_coeffs;
  double ref_se;
};
WorkedExample run_worked_example(int quad_nodes = 64);

RunReport run_bench(const std::vector<std::string>& suites, const BenchOptions& opts);
RunReport run_table2(const BenchOptions& opts);

}  // namespace chaosloop
