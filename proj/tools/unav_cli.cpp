#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "unav/bench.hpp"
#include "unav/io.hpp"
#include "unav/sim.hpp"

namespace {

int cmd_gen(const std::string& map_path, int count, int pairs, std::uint32_t seed,
            const std::string& out_dir) {
  unav::GridMap map = unav::load_map_file(map_path);
  std::string stored_path = std::filesystem::weakly_canonical(map_path).string();
  auto instances = unav::generate_instances(map, stored_path, count, pairs, seed);
  std::filesystem::create_directories(out_dir);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "instance_%03d.json", static_cast<int>(i));
    unav::save_instance(instances[i], (std::filesystem::path(out_dir) / name).string());
  }
  std::cerr << "wrote " << instances.size() << " instance files to " << out_dir << "\n";
  return 0;
}

int cmd_run(const std::string& scen_path, const std::string& algo, int n,
            const std::string& config_path, const std::string& out_path,
            const std::string& trace_path, bool seed_given, std::uint32_t seed) {
  unav::ScenarioInstance inst = unav::load_instance(scen_path);
  if (seed_given) inst.seed = seed;
  if (n > 0) {
    if (n > static_cast<int>(inst.starts.size())) {
      throw std::runtime_error("--n exceeds the instance's start/goal pair count");
    }
    inst.starts.resize(n);
    inst.goals.resize(n);
  }
  unav::RunConfig cfg;
  if (!config_path.empty()) cfg = unav::load_config(config_path, cfg);
  if (!unav::parse_algorithm(algo, cfg.algorithm)) {
    throw std::runtime_error("unknown algorithm: " + algo);
  }
  cfg.record_trace = !trace_path.empty();
  unav::GridMap map = unav::load_map_file(inst.map_path);
  unav::RunResult result = unav::run(map, inst, cfg);
  if (!trace_path.empty()) unav::save_trace_csv(result.trace, trace_path);
  if (out_path.empty()) {
    std::cout << unav::result_to_json(result);
  } else {
    unav::save_result(result, out_path);
  }
  return result.outcome == unav::Outcome::kSuccess ? 0 : 2;
}

int cmd_bench(const std::string& spec_path, const std::string& out_path,
              const std::string& summary_path, int jobs) {
  unav::BenchSpec spec = unav::load_bench_spec(spec_path);
  auto t0 = std::chrono::steady_clock::now();
  unav::BenchReport report = unav::run_bench(spec, jobs);
  auto t1 = std::chrono::steady_clock::now();
  {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << report.rows_csv;
  }
  if (!summary_path.empty()) {
    std::ofstream out(summary_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + summary_path);
    out << report.summary_csv;
  }
  double secs = std::chrono::duration<double>(t1 - t0).count();
  std::fprintf(stderr, "completed %d runs in %.1f s (jobs=%d)\n", report.total_runs, secs, jobs);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-space unlabeled multi-agent navigation toolkit"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "Generate scenario instance files for a map");
  std::string gen_map, gen_out = ".";
  int gen_count = 1, gen_pairs = 50;
  std::uint32_t gen_seed = 1;
  gen->add_option("--map", gen_map, "Map file (MovingAI format)")->required();
  gen->add_option("--count", gen_count, "Number of instances");
  gen->add_option("--pairs", gen_pairs, "Start/goal pairs per instance");
  gen->add_option("--seed", gen_seed, "Sampling seed");
  gen->add_option("--out", gen_out, "Output directory");

  auto* runc = app.add_subcommand("run", "Simulate one instance with one algorithm");
  std::string run_scen, run_algo, run_config, run_out, run_trace;
  int run_n = 0;
  std::uint32_t run_seed = 0;
  bool run_seed_given = false;
  runc->add_option("--scen", run_scen, "Instance file")->required();
  runc->add_option("--algo", run_algo, "Algorithm: dec-unav | c-unav | orca | tswap")
      ->required();
  runc->add_option("--n", run_n, "Use only the first n start/goal pairs");
  runc->add_option("--config", run_config, "Config file with parameter overrides");
  runc->add_option("--out", run_out, "Result file (default: stdout)");
  runc->add_option("--trace", run_trace, "Write a per-step trace CSV here");
  runc->add_option("--seed", run_seed, "Override the instance seed")
      ->each([&](const std::string&) { run_seed_given = true; });

  auto* bench = app.add_subcommand("bench", "Run a benchmark sweep from a spec file");
  std::string bench_spec, bench_out, bench_summary;
  int bench_jobs = static_cast<int>(std::thread::hardware_concurrency());
  bench->add_option("--spec", bench_spec, "Bench spec file")->required();
  bench->add_option("--out", bench_out, "Per-run rows CSV")->required();
  bench->add_option("--summary", bench_summary, "Aggregated summary CSV");
  bench->add_option("--jobs", bench_jobs, "Worker threads");

  try {
    app.parse(argc, argv);
    if (gen->parsed()) return cmd_gen(gen_map, gen_count, gen_pairs, gen_seed, gen_out);
    if (runc->parsed()) {
      return cmd_run(run_scen, run_algo, run_n, run_config, run_out, run_trace, run_seed_given,
                     run_seed);
    }
    return cmd_bench(bench_spec, bench_out, bench_summary, bench_jobs < 1 ? 1 : bench_jobs);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // faults exit 1; --help exits 0
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
