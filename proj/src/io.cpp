#include "unav/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "json.hpp"

namespace unav {

namespace {

using json = nlohmann::ordered_json;

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::vector<Vec2> read_points(const json& arr, const char* what) {
  std::vector<Vec2> out;
  if (!arr.is_array()) throw std::runtime_error(std::string("expected array for ") + what);
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() != 2) {
      throw std::runtime_error(std::string("expected [x,y] pairs in ") + what);
    }
    out.push_back(Vec2{p[0].get<double>(), p[1].get<double>()});
  }
  return out;
}

}  // namespace

std::string resolve_relative(const std::string& path, const std::string& reference_file) {
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(reference_file).parent_path() / p).string();
}

ScenarioInstance load_instance(const std::string& path) {
  json j = parse_file(path);
  ScenarioInstance inst;
  inst.map_path = resolve_relative(j.at("map").get<std::string>(), path);
  inst.seed = j.value("seed", 0u);
  inst.starts = read_points(j.at("starts"), "starts");
  inst.goals = read_points(j.at("goals"), "goals");
  return inst;
}

void save_instance(const ScenarioInstance& instance, const std::string& path) {
  json j;
  j["map"] = instance.map_path;
  j["seed"] = instance.seed;
  json starts = json::array();
  for (const Vec2& p : instance.starts) starts.push_back({p.x, p.y});
  json goals = json::array();
  for (const Vec2& p : instance.goals) goals.push_back({p.x, p.y});
  j["starts"] = std::move(starts);
  j["goals"] = std::move(goals);
  write_file(path, j.dump(2) + "\n");
}

RunConfig load_config(const std::string& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return config_from_json_text(text, base);
}

RunConfig config_from_json_text(const std::string& text, const RunConfig& base) {
  json j = json::parse(text);
  RunConfig cfg = base;
  if (j.contains("algorithm")) {
    if (!parse_algorithm(j["algorithm"].get<std::string>(), cfg.algorithm)) {
      throw std::runtime_error("unknown algorithm in config: " +
                               j["algorithm"].get<std::string>());
    }
  }
  if (j.contains("goal_select")) {
    std::string mode = j["goal_select"].get<std::string>();
    if (mode == "closest") {
      cfg.goal_select = GoalSelectMode::kClosest;
    } else if (mode == "random") {
      cfg.goal_select = GoalSelectMode::kRandom;
    } else {
      throw std::runtime_error("unknown goal_select mode: " + mode);
    }
  }
  cfg.u_max = j.value("u_max", cfg.u_max);
  cfg.r_phys = j.value("r_phys", cfg.r_phys);
  cfg.r_safe = j.value("r_safe", cfg.r_safe);
  cfg.k_exch = j.value("k_exch", cfg.k_exch);
  cfg.r_comm = j.value("r_comm", cfg.r_comm);
  cfg.step_limit = j.value("step_limit", cfg.step_limit);
  cfg.discrete_step_limit = j.value("discrete_step_limit", cfg.discrete_step_limit);
  cfg.deadlock_window = j.value("deadlock_window", cfg.deadlock_window);
  cfg.deadlock_speed = j.value("deadlock_speed", cfg.deadlock_speed);
  cfg.tau_goal = j.value("tau_goal", cfg.tau_goal);
  cfg.delta_wp = j.value("delta_wp", cfg.delta_wp);
  cfg.delta_dev = j.value("delta_dev", cfg.delta_dev);
  cfg.delta_block = j.value("delta_block", cfg.delta_block);
  cfg.tau_agent = j.value("tau_agent", cfg.tau_agent);
  cfg.tau_obst = j.value("tau_obst", cfg.tau_obst);
  return cfg;
}

std::string result_to_json(const RunResult& result) {
  json j;
  j["outcome"] = outcome_name(result.outcome);
  j["steps"] = result.steps;
  if (result.outcome == Outcome::kSuccess) {
    json metrics;
    metrics["makespan"] = result.makespan;
    metrics["flowtime"] = result.flowtime;
    metrics["maxdist"] = result.maxdist;
    metrics["sumdist"] = result.sumdist;
    j["metrics"] = std::move(metrics);
  }
  json diag;
  diag["min_pair_dist"] = result.min_pair_dist;
  diag["min_obstacle_clearance"] = result.min_obstacle_clearance;
  diag["max_step_displacement"] = result.max_step_displacement;
  diag["assignment_consistent_at_end"] = result.assignment_consistent_at_end;
  diag["last_inconsistent_step"] = result.last_inconsistent_step;
  diag["gr_monotone"] = result.gr_monotone;
  diag["goal_update_swaps"] = result.goal_update_swaps;
  diag["swap_violations"] = result.swap_violations;
  diag["deadlock_swaps"] = result.deadlock_swaps;
  diag["exchange_events"] = result.exchange_events;
  diag["exchange_sums"] = result.exchange_sums;
  j["diagnostics"] = std::move(diag);
  return j.dump(2) + "\n";
}

void save_result(const RunResult& result, const std::string& path) {
  write_file(path, result_to_json(result));
}

void save_trace_csv(const std::vector<TraceRow>& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t,agent,x,y,goal,status\n";
  char buf[128];
  for (const TraceRow& row : trace) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%d,%d\n", row.t, row.agent, row.x, row.y,
                  row.goal, row.status);
    out << buf;
  }
}

}  // namespace unav
