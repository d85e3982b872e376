#include "unav/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "unav/io.hpp"

namespace unav {

BenchSpec load_bench_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::ordered_json j;
  in >> j;

  BenchSpec spec;
  if (!j.contains("maps") || !j["maps"].is_array() || j["maps"].empty()) {
    throw std::runtime_error("bench spec needs a non-empty maps list");
  }
  for (const auto& m : j["maps"]) {
    spec.maps.push_back(resolve_relative(m.get<std::string>(), path));
  }
  if (!j.contains("algorithms") || !j["algorithms"].is_array() || j["algorithms"].empty()) {
    throw std::runtime_error("bench spec needs a non-empty algorithms list");
  }
  for (const auto& a : j["algorithms"]) {
    Algorithm algo;
    if (!parse_algorithm(a.get<std::string>(), algo)) {
      throw std::runtime_error("unknown algorithm in bench spec: " + a.get<std::string>());
    }
    spec.algorithms.push_back(algo);
  }
  if (j.contains("agent_counts")) {
    spec.agent_counts.clear();
    for (const auto& n : j["agent_counts"]) spec.agent_counts.push_back(n.get<int>());
    if (spec.agent_counts.empty()) {
      throw std::runtime_error("bench spec agent_counts must be non-empty");
    }
  }
  spec.instances = j.value("instances", spec.instances);
  spec.seed = j.value("seed", spec.seed);
  if (j.contains("config")) {
    spec.base_config = config_from_json_text(j["config"].dump(), spec.base_config);
  }
  return spec;
}

namespace {

struct Task {
  int map_idx;
  int algo_idx;
  int n;
  int instance;
};

std::string map_label(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

void append_metric(std::string& csv, double v, bool present) {
  char buf[64];
  if (present) {
    std::snprintf(buf, sizeof(buf), ",%.6f", v);
    csv += buf;
  } else {
    csv += ",";
  }
}

}  // namespace

BenchReport run_bench(const BenchSpec& spec, int jobs) {
  const int max_n = *std::max_element(spec.agent_counts.begin(), spec.agent_counts.end());

  std::vector<GridMap> maps;
  std::vector<std::vector<ScenarioInstance>> instances;
  maps.reserve(spec.maps.size());
  for (std::size_t m = 0; m < spec.maps.size(); ++m) {
    maps.push_back(load_map_file(spec.maps[m]));
    instances.push_back(generate_instances(maps.back(), spec.maps[m], spec.instances, max_n,
                                           spec.seed + 1000u * static_cast<std::uint32_t>(m)));
  }

  std::vector<Task> tasks;
  for (int m = 0; m < static_cast<int>(spec.maps.size()); ++m) {
    for (int a = 0; a < static_cast<int>(spec.algorithms.size()); ++a) {
      for (int n : spec.agent_counts) {
        for (int k = 0; k < spec.instances; ++k) {
          tasks.push_back(Task{m, a, n, k});
        }
      }
    }
  }

  std::vector<RunResult> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&]() {
    for (;;) {
      std::size_t idx = next.fetch_add(1);
      if (idx >= tasks.size()) return;
      const Task& task = tasks[idx];
      try {
        ScenarioInstance inst = instances[task.map_idx][task.instance];
        inst.starts.resize(task.n);
        inst.goals.resize(task.n);
        RunConfig cfg = spec.base_config;
        cfg.algorithm = spec.algorithms[task.algo_idx];
        cfg.record_trace = false;
        results[idx] = run(maps[task.map_idx], inst, cfg);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  BenchReport report;
  report.total_runs = static_cast<int>(tasks.size());
  report.rows.reserve(tasks.size());
  std::string& csv = report.rows_csv;
  csv = "map,algorithm,n,instance,outcome,steps,makespan,flowtime,maxdist,sumdist\n";
  char buf[256];
  for (std::size_t idx = 0; idx < tasks.size(); ++idx) {
    const Task& task = tasks[idx];
    const RunResult& r = results[idx];
    BenchRow row;
    row.map_name = map_label(spec.maps[task.map_idx]);
    row.algorithm = spec.algorithms[task.algo_idx];
    row.n = task.n;
    row.instance = task.instance;
    row.result = r;
    std::snprintf(buf, sizeof(buf), "%s,%s,%d,%d,%s,%d", row.map_name.c_str(),
                  algorithm_name(row.algorithm), row.n, row.instance, outcome_name(r.outcome),
                  r.steps);
    csv += buf;
    bool ok = r.outcome == Outcome::kSuccess;
    append_metric(csv, r.makespan, ok);
    append_metric(csv, r.flowtime, ok);
    append_metric(csv, r.maxdist, ok);
    append_metric(csv, r.sumdist, ok);
    csv += "\n";
    report.rows.push_back(std::move(row));
  }

  // Per (map, n): instances solved by every algorithm in the spec; quality
  // sums are restricted to that common set so algorithms stay comparable.
  std::string& summary = report.summary_csv;
  summary =
      "map,algorithm,n,success_rate,solved,common_solved,makespan_sum,flowtime_sum,"
      "maxdist_sum,sumdist_sum\n";
  auto result_of = [&](int m, int a, int n, int k) -> const RunResult& {
    // Matches the task construction order above.
    std::size_t per_algo = spec.agent_counts.size() * static_cast<std::size_t>(spec.instances);
    std::size_t per_map = spec.algorithms.size() * per_algo;
    std::size_t n_pos = 0;
    while (spec.agent_counts[n_pos] != n) ++n_pos;
    return results[m * per_map + a * per_algo + n_pos * spec.instances + k];
  };
  for (int m = 0; m < static_cast<int>(spec.maps.size()); ++m) {
    for (int a = 0; a < static_cast<int>(spec.algorithms.size()); ++a) {
      for (int n : spec.agent_counts) {
        int solved = 0;
        std::vector<int> common;
        for (int k = 0; k < spec.instances; ++k) {
          bool all_ok = true;
          for (int a2 = 0; a2 < static_cast<int>(spec.algorithms.size()); ++a2) {
            if (result_of(m, a2, n, k).outcome != Outcome::kSuccess) {
              all_ok = false;
              break;
            }
          }
          if (all_ok) common.push_back(k);
          if (result_of(m, a, n, k).outcome == Outcome::kSuccess) ++solved;
        }
        double makespan = 0.0, flowtime = 0.0, maxdist = 0.0, sumdist = 0.0;
        for (int k : common) {
          const RunResult& r = result_of(m, a, n, k);
          makespan += r.makespan;
          flowtime += r.flowtime;
          maxdist += r.maxdist;
          sumdist += r.sumdist;
        }
        std::snprintf(buf, sizeof(buf), "%s,%s,%d,%.3f,%d,%d,%.6f,%.6f,%.6f,%.6f\n",
                      map_label(spec.maps[m]).c_str(), algorithm_name(spec.algorithms[a]), n,
                      static_cast<double>(solved) / spec.instances, solved,
                      static_cast<int>(common.size()), makespan, flowtime, maxdist, sumdist);
        summary += buf;
      }
    }
  }
  return report;
}

}  // namespace unav
