#pragma once

#include <string>
#include <vector>

#include "unav/sim.hpp"

namespace unav {

struct BenchSpec {
  std::vector<std::string> maps;
  std::vector<int> agent_counts{10, 20, 30, 40, 50};
  int instances = 150;
  std::uint32_t seed = 1;
  std::vector<Algorithm> algorithms;
  RunConfig base_config;
};

// Bench spec document: {"maps": [...], "algorithms": [...], "agent_counts":
// [...], "instances": k, "seed": s, "config": {...}}. Throws when maps or
// algorithms are missing or empty. Relative map paths resolve against the
// spec file's directory.
BenchSpec load_bench_spec(const std::string& path);

struct BenchRow {
  std::string map_name;
  Algorithm algorithm = Algorithm::kDecUnav;
  int n = 0;
  int instance = 0;
  RunResult result;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::string rows_csv;
  std::string summary_csv;
  int total_runs = 0;
};

// Executes the full sweep with `jobs` worker threads. Rows and both CSV
// documents come out in a fixed order (map, algorithm, n, instance), so the
// output does not depend on scheduling.
BenchReport run_bench(const BenchSpec& spec, int jobs);

}  // namespace unav
