#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unav/grid_map.hpp"
#include "unav/protocol.hpp"
#include "unav/vec2.hpp"

namespace unav {

enum class Algorithm { kDecUnav, kCUnav, kOrca, kTswap };

enum class Outcome {
  kSuccess,
  kFailTimeout,
  kFailCollision,
  kFailDeadlock,
  kFailNoGoal,
};

const char* algorithm_name(Algorithm a);
const char* outcome_name(Outcome o);
bool parse_algorithm(const std::string& s, Algorithm& out);

struct RunConfig {
  Algorithm algorithm = Algorithm::kDecUnav;
  GoalSelectMode goal_select = GoalSelectMode::kClosest;
  double u_max = 0.1;
  double r_phys = 0.3;
  double r_safe = 0.49;
  int k_exch = 20;
  double r_comm = 5.0;
  int step_limit = 20000;
  int discrete_step_limit = 2000;
  int deadlock_window = 1000;
  double deadlock_speed = 0.0001;
  double tau_goal = 0.3;
  double delta_wp = 0.3;
  double delta_dev = 1.0;
  // A parked goal counts as blocking a route only when the route passes
  // within this distance of it; wider misses can be steered around.
  double delta_block = 0.5;
  double tau_agent = 10.0;
  double tau_obst = 10.0;
  bool record_trace = false;
};

struct ScenarioInstance {
  std::string map_path;
  std::vector<Vec2> starts;
  std::vector<Vec2> goals;
  std::uint32_t seed = 0;
};

struct TraceRow {
  int t = 0;
  int agent = 0;
  double x = 0.0;
  double y = 0.0;
  int goal = -1;
  int status = 0;  // 0 = moving, 1 = reached
};

struct RunResult {
  Outcome outcome = Outcome::kFailTimeout;
  int steps = 0;  // committed steps; discrete steps for the cell-based solver
  // Solution quality; meaningful only when outcome == kSuccess.
  double makespan = 0.0;
  double flowtime = 0.0;
  double maxdist = 0.0;
  double sumdist = 0.0;
  // Diagnostics, valid for every outcome.
  double min_pair_dist = kInf;
  double min_obstacle_clearance = kInf;
  double max_step_displacement = 0.0;
  bool assignment_consistent_at_end = false;
  int last_inconsistent_step = -1;
  bool gr_monotone = true;
  int goal_update_swaps = 0;
  int swap_violations = 0;
  int deadlock_swaps = 0;
  int exchange_events = 0;
  // Total remaining path length sampled immediately before and after each
  // centralized exchange event, flattened as before_0, after_0, before_1, ...
  std::vector<double> exchange_sums;
  std::vector<TraceRow> trace;
};

// Simulates one instance to completion or failure. Deterministic: identical
// (map, instance, config) inputs produce identical results.
RunResult run(const GridMap& map, const ScenarioInstance& instance, const RunConfig& config);

// True iff some agent pair sits closer than 2*r_phys - 1e-9 or some agent
// disk of radius r_phys overlaps a blocked cell.
bool detect_collision(const std::vector<Vec2>& positions, const GridMap& map, double r_phys);

// True iff the trailing `window` entries of the per-step mean displacement
// history average below `threshold`. Requires at least `window` entries.
bool detect_deadlock(const std::vector<double>& mean_speed_history, int window,
                     double threshold);

// Samples `count` scenarios of `pairs` start/goal locations each: distinct
// free cells for starts, independently distinct free cells for goals, centers
// as coordinates. Throws when the map has fewer free cells than `pairs`.
std::vector<ScenarioInstance> generate_instances(const GridMap& map, const std::string& map_path,
                                                 int count, int pairs, std::uint32_t seed);

}  // namespace unav
