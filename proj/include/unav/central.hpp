#pragma once

#include <optional>
#include <vector>

#include "unav/grid_map.hpp"
#include "unav/pathfinding.hpp"
#include "unav/protocol.hpp"

namespace unav {

// assignment[agent] = goal id; consistent means a bijection onto the goal set.
bool assignment_consistent(const std::vector<GoalId>& assignment, int goal_count);

// Greedy global assignment: agents in descending priority (descending id)
// each take the nearest unclaimed goal with a finite path, ties broken by the
// smaller goal id. Returns nullopt when some agent finds no reachable
// unclaimed goal.
std::optional<std::vector<GoalId>> initial_consistent_assignment(
    const std::vector<Vec2>& starts, const FieldCache& fields);

struct ExchangeStats {
  int swaps = 0;
  int sweeps = 0;
  double sum_before = 0.0;  // over the active subset
  double sum_after = 0.0;
};

// All-pairs improvement: sweeps the unordered pairs of `active` agents in
// ascending id order, swapping two assignments whenever that strictly lowers
// the summed path length, until a full sweep changes nothing. Only entries of
// `active` agents are modified; the assignment stays a bijection throughout.
ExchangeStats c_unav_exchange(const std::vector<Vec2>& positions,
                              std::vector<GoalId>& assignment, const FieldCache& fields,
                              const std::vector<int>& active);

// Cell-grid schedule: cells[t][agent] is the flat cell index (row*W+col) after
// t steps; step 0 holds the starts. Per step cells are pairwise distinct and
// consecutive cells identical or 4-adjacent.
struct DiscreteSchedule {
  std::vector<std::vector<int>> cells;
  std::vector<GoalId> final_targets;
  int steps() const { return static_cast<int>(cells.size()) - 1; }
};

// Discrete target-swapping baseline. Each step, agents in descending priority
// follow 4-connected shortest paths toward their current target; an agent
// blocked by one that has finished or is waiting trades targets with it, and
// mutual cyclic blocking rotates targets around the cycle. Succeeds when
// every agent sits on its target; returns nullopt when step_limit is reached
// first or some agent has no 4-connected route.
std::optional<DiscreteSchedule> tswap_solve(const GridMap& map,
                                            const std::vector<int>& start_cells,
                                            const std::vector<int>& goal_cells,
                                            std::vector<GoalId> assignment, int step_limit);

}  // namespace unav
