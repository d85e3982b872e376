#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "unav/pathfinding.hpp"
#include "unav/vec2.hpp"

namespace unav {

using AgentId = int;
using GoalId = int;

enum class AgentStatus : std::uint8_t { kMoveToGoal = 0, kReached = 1 };

enum class GoalSelectMode { kClosest, kRandom };

// Full per-agent state carried by the simulation. `gr` is the agent's own
// reached-goals table (one flag per goal); assignments and statuses of other
// agents are always taken fresh from the current communication group, so they
// are not duplicated here.
struct AgentState {
  AgentId id = 0;
  Vec2 position;
  Vec2 velocity;
  GoalId goal = -1;
  AgentStatus status = AgentStatus::kMoveToGoal;
  std::vector<std::uint8_t> gr;
  Path path;
  std::size_t waypoint_index = 0;
};

// Picks the agent's first goal among those with a finite shortest-path
// distance from `position`. kClosest: minimal distance, ties broken by the
// smaller goal id. kRandom: uniform draw seeded per agent. Returns nullopt if
// no goal is reachable.
std::optional<GoalId> select_initial_goal(const Vec2& position, const FieldCache& fields,
                                          GoalSelectMode mode, std::uint32_t seed);

// Connected components of the proximity graph with edges between agents at
// distance <= r_comm (inclusive). Each group lists member ids in descending
// order (descending priority); groups are ordered by their highest id,
// descending. Input positions are indexed by agent id.
std::vector<std::vector<AgentId>> communication_groups(const std::vector<Vec2>& positions,
                                                       double r_comm);

// Element-wise OR of the group's reached tables into `own`.
void merge_reached_tables(std::vector<std::uint8_t>& own,
                          const std::vector<const std::vector<std::uint8_t>*>& others);

// True when trading goals strictly helps the higher-priority agent and
// strictly lowers the combined cost. d_jj = dist(agent j, its goal),
// d_jk = dist(agent j, agent k's goal), etc. Infinite distances participate
// in the comparisons via IEEE rules.
bool swappable(double d_jj, double d_jk, double d_kj, double d_kk);

// One communication group, read by goal_update. members[i] holds the id,
// positions/goals/statuses are parallel arrays, priority decreases with i.
// `gr` is the merged reached table (size = total number of goals).
struct GroupView {
  std::vector<AgentId> members;
  std::vector<Vec2> positions;
  std::vector<GoalId> goals;
  std::vector<AgentStatus> statuses;
  std::vector<std::uint8_t> gr;
};

struct GoalUpdateResult {
  std::vector<GoalId> goals;
  std::vector<AgentStatus> statuses;
  std::vector<std::uint8_t> gr;
  // changed[i] is true when member i's assignment differs from the input.
  std::vector<std::uint8_t> changed;
  int swaps = 0;            // trades triggered by the swappable criterion
  int swap_violations = 0;  // trades that failed to strictly lower the pair's summed distance
};

// Runs one round of intra-group goal reconciliation: higher-priority agents
// resolve conflicts first, abandoning goals already reached elsewhere,
// claiming goals they stand on, splitting duplicate assignments, and trading
// goals when `swappable` holds. Returns nullopt when an agent needs a new
// goal but no unreached goal is reachable (the instance is infeasible for
// this group).
std::optional<GoalUpdateResult> goal_update(const GroupView& group, const FieldCache& fields,
                                            double tau_goal);

// Anti-deadlock trade: if `a` has arrived at its goal (within tau_goal) while
// `b`'s remaining route passes within delta_block of that goal, the two swap
// assignments and both resume moving. Returns true when the swap happened.
// Callers pair each (a, b) at most once per event and skip pairs whose goals
// coincide or where b already reached its goal.
bool deadlock_goal_exchange(AgentState& a, AgentState& b, const FieldCache& fields,
                            double tau_goal, double delta_block);

// Steers along the path: waypoints already within delta_wp are skipped (never
// skipping the last one), and the returned velocity points at the active
// waypoint with speed min(u_max, remaining distance). Advances
// `waypoint_index` in place.
Vec2 preferred_velocity(const Path& path, std::size_t& waypoint_index, const Vec2& position,
                        double delta_wp, double u_max);

// Distance from `position` to the untravelled part of the path (the polyline
// from the segment feeding the active waypoint onward). Used to decide when
// drift away from the plan forces a replan.
double path_deviation(const Path& path, std::size_t waypoint_index, const Vec2& position);

}  // namespace unav
