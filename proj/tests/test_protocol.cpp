#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "unav/grid_map.hpp"
#include "unav/pathfinding.hpp"
#include "unav/protocol.hpp"
#include "unav/rng.hpp"
#include "unav/vec2.hpp"

namespace {

using namespace unav;

constexpr double kTauGoal = 0.3;
constexpr double kRadius = 0.49;

GridMap map_from_rows(const std::vector<std::string>& rows) {
  std::string text = "type octile\nheight " + std::to_string(rows.size()) + "\nwidth " +
                     std::to_string(rows.front().size()) + "\nmap\n";
  for (const auto& r : rows) text += r + "\n";
  return load_map(text);
}

struct RefTables {
  std::vector<GoalId> ga;
  std::vector<AgentStatus> as;
  std::vector<std::uint8_t> gr;
};

// Reference interpreter for one reconciliation round, written as a direct
// line-by-line transliteration of the procedure: members are visited in
// priority order over a working goal set that shrinks as each member locks in
// its claim. Kept deliberately naive and separate from the production code so
// the two can be compared on random states.
std::optional<RefTables> reference_reconcile(const GroupView& group, const FieldCache& fields,
                                             double tau_goal) {
  const std::size_t m = group.members.size();
  std::vector<GoalId> GA = group.goals;
  std::vector<AgentStatus> AS = group.statuses;
  std::vector<std::uint8_t> GR = group.gr;
  std::vector<char> in_working_set(GR.size(), 1);

  // Closest open goal by shortest-path length; ties to the smaller id; -1 when
  // no candidate has a finite path.
  auto closest = [&](const Vec2& p, GoalId exclude) {
    GoalId best = -1;
    double best_len = kInf;
    for (GoalId g = 0; g < static_cast<GoalId>(GR.size()); ++g) {
      if (!in_working_set[g] || GR[g] || g == exclude) continue;
      double len = fields.path_len_to(g, p);
      if (len < best_len) {
        best_len = len;
        best = g;
      }
    }
    return best;
  };

  for (std::size_t j = 0; j < m; ++j) {
    if (AS[j] == AgentStatus::kMoveToGoal && GR[GA[j]]) {
      GoalId g = closest(group.positions[j], -1);
      if (g < 0) return std::nullopt;
      GA[j] = g;
    }
    if (AS[j] != AgentStatus::kReached &&
        dist(group.positions[j], fields.goal_point(GA[j])) <= tau_goal) {
      AS[j] = AgentStatus::kReached;
      GR[GA[j]] = 1;
    }
    for (std::size_t k = j + 1; k < m; ++k) {
      if (GA[j] == GA[k]) {
        GoalId g_prime = closest(group.positions[j], -1);
        if (AS[j] != AgentStatus::kReached && g_prime >= 0 && GA[j] != g_prime) {
          GA[j] = g_prime;
        } else {
          GoalId g_k = closest(group.positions[k], GA[j]);
          if (g_k < 0) return std::nullopt;
          GA[k] = g_k;
          AS[k] = AgentStatus::kMoveToGoal;
        }
      } else if (AS[j] != AgentStatus::kReached && AS[k] != AgentStatus::kReached &&
                 !GR[GA[k]]) {
        double d_jj = fields.path_len_to(GA[j], group.positions[j]);
        double d_jk = fields.path_len_to(GA[k], group.positions[j]);
        double d_kj = fields.path_len_to(GA[j], group.positions[k]);
        double d_kk = fields.path_len_to(GA[k], group.positions[k]);
        // Trade only if the higher-priority agent gets strictly closer and the
        // pair's combined distance strictly drops.
        if (d_jj > d_jk && d_jj + d_kk > d_jk + d_kj) {
          std::swap(GA[j], GA[k]);
        }
      }
    }
    in_working_set[GA[j]] = 0;
  }
  return RefTables{GA, AS, GR};
}

std::vector<int> free_cell_indices(const GridMap& map) {
  std::vector<int> cells;
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) {
      if (!map.blocked(c, r)) cells.push_back(map.cell_index(c, r));
    }
  }
  return cells;
}

}  // namespace

TEST_CASE("goal reconciliation matches the reference interpreter on random states") {
  GridMap empty = map_from_rows(std::vector<std::string>(8, "........"));
  GridMap walls = map_from_rows({
      "........",
      ".@@.....",
      ".@......",
      "....@@@.",
      "....@...",
      "....@.@@",
      "......@.",
      "........",
  });

  std::mt19937 gen(1123581321u);
  int ran = 0, with_change = 0, failed = 0;
  for (int state = 0; state < 1000; ++state) {
    const GridMap& map = (state % 2 == 0) ? empty : walls;
    std::vector<int> cells = free_cell_indices(map);

    int n_agents = 1 + static_cast<int>(bounded_draw(gen, 6));
    int n_goals = 1 + static_cast<int>(bounded_draw(gen, 8));

    // Distinct free cells for goals; agents may sit anywhere free.
    std::vector<int> pool = cells;
    std::vector<Vec2> goal_points;
    for (int g = 0; g < n_goals; ++g) {
      std::uint32_t pick = bounded_draw(gen, static_cast<std::uint32_t>(pool.size()));
      int cell = pool[pick];
      pool.erase(pool.begin() + pick);
      goal_points.push_back(map.cell_center(cell % map.width(), cell / map.width()));
    }
    FieldCache fields(map, goal_points, kRadius);

    GroupView group;
    for (int i = 0; i < n_agents; ++i) group.members.push_back(n_agents - 1 - i);
    group.gr.assign(n_goals, 0);
    for (int g = 0; g < n_goals; ++g) group.gr[g] = bounded_draw(gen, 5) == 0 ? 1 : 0;
    for (int i = 0; i < n_agents; ++i) {
      GoalId goal = static_cast<GoalId>(bounded_draw(gen, static_cast<std::uint32_t>(n_goals)));
      group.goals.push_back(goal);
      bool park_on_goal = bounded_draw(gen, 4) == 0;
      if (park_on_goal) {
        group.positions.push_back(goal_points[goal] + Vec2{0.05, -0.05});
      } else {
        int cell = cells[bounded_draw(gen, static_cast<std::uint32_t>(cells.size()))];
        group.positions.push_back(map.cell_center(cell % map.width(), cell / map.width()));
      }
      bool reached = bounded_draw(gen, 3) == 0;
      group.statuses.push_back(reached ? AgentStatus::kReached : AgentStatus::kMoveToGoal);
      if (reached) group.gr[goal] = 1;  // a reached agent has marked its goal
    }

    auto got = goal_update(group, fields, kTauGoal);
    auto want = reference_reconcile(group, fields, kTauGoal);
    REQUIRE(got.has_value() == want.has_value());
    ++ran;
    if (!got) {
      ++failed;
      continue;
    }
    CHECK(got->goals == want->ga);
    CHECK(got->statuses == want->as);
    CHECK(got->gr == want->gr);
    bool any_change = false;
    for (std::size_t i = 0; i < got->goals.size(); ++i) {
      CHECK(got->changed[i] == (got->goals[i] != group.goals[i] ? 1 : 0));
      any_change = any_change || got->changed[i];
    }
    if (any_change) ++with_change;
  }
  CHECK(ran == 1000);
  // The state generator must actually exercise the interesting branches.
  CHECK(with_change >= 100);
  CHECK(failed >= 10);
  CHECK(failed <= 900);
}

TEST_CASE("goal trade criterion requires both strict improvements") {
  // Higher-priority agent 10 units from its goal, 6 from the other's.
  CHECK(swappable(10.0, 6.0, 8.0, 9.0));       // 10 > 6 and 19 > 14
  CHECK_FALSE(swappable(6.0, 10.0, 9.0, 8.0));  // no gain for the higher-priority agent
  CHECK_FALSE(swappable(10.0, 6.0, 13.0, 9.0)); // combined distance would not drop (19 = 19)
  CHECK_FALSE(swappable(10.0, 10.0, 1.0, 1.0)); // equal first legs: not strictly better

  // Infinite distances flow through the comparisons.
  CHECK(swappable(kInf, 5.0, 3.0, kInf));
  CHECK_FALSE(swappable(kInf, kInf, 3.0, 5.0));
  CHECK_FALSE(swappable(5.0, kInf, 3.0, 2.0));
}

TEST_CASE("reconciliation hand traces") {
  GridMap map = map_from_rows(std::vector<std::string>(8, "........"));

  SUBCASE("singleton mid-route keeps its tables") {
    FieldCache fields(map, {{6.5, 3.5}, {1.5, 3.5}}, kRadius);
    GroupView group{{0}, {{3.5, 0.5}}, {0}, {AgentStatus::kMoveToGoal}, {0, 0}};
    auto out = goal_update(group, fields, kTauGoal);
    REQUIRE(out);
    CHECK(out->goals == std::vector<GoalId>{0});
    CHECK(out->statuses == std::vector<AgentStatus>{AgentStatus::kMoveToGoal});
    CHECK(out->gr == std::vector<std::uint8_t>{0, 0});
    CHECK(out->swaps == 0);
  }

  SUBCASE("duplicate assignment: higher priority moves to the closer vacant goal") {
    // Goal 0 claimed by both; goal 1 is vacant and strictly closer to the
    // higher-priority agent, so it steps aside and the other keeps goal 0.
    FieldCache fields(map, {{6.5, 3.5}, {1.5, 3.5}}, kRadius);
    GroupView group{{1, 0},
                    {{2.5, 3.5}, {5.5, 3.5}},
                    {0, 0},
                    {AgentStatus::kMoveToGoal, AgentStatus::kMoveToGoal},
                    {0, 0}};
    auto out = goal_update(group, fields, kTauGoal);
    REQUIRE(out);
    CHECK(out->goals == std::vector<GoalId>{1, 0});
    CHECK(out->statuses[0] == AgentStatus::kMoveToGoal);
    CHECK(out->statuses[1] == AgentStatus::kMoveToGoal);
    CHECK(out->changed == std::vector<std::uint8_t>{1, 0});
  }

  SUBCASE("both believe they reached the same goal: lower priority is displaced") {
    FieldCache fields(map, {{3.5, 3.5}, {6.5, 6.5}}, kRadius);
    GroupView group{{1, 0},
                    {{3.5, 3.5}, {3.45, 3.55}},
                    {0, 0},
                    {AgentStatus::kReached, AgentStatus::kReached},
                    {1, 0}};
    auto out = goal_update(group, fields, kTauGoal);
    REQUIRE(out);
    CHECK(out->goals == std::vector<GoalId>{0, 1});
    CHECK(out->statuses[0] == AgentStatus::kReached);
    CHECK(out->statuses[1] == AgentStatus::kMoveToGoal);
    CHECK(out->gr == std::vector<std::uint8_t>{1, 0});
  }

  SUBCASE("beneficial trade between crossed assignments") {
    // Agent 1 (higher priority) is far from its goal but close to the other's;
    // trading strictly shortens both legs.
    FieldCache fields(map, {{6.5, 3.5}, {0.5, 3.5}}, kRadius);
    GroupView group{{1, 0},
                    {{1.5, 3.5}, {5.5, 3.5}},
                    {0, 1},
                    {AgentStatus::kMoveToGoal, AgentStatus::kMoveToGoal},
                    {0, 0}};
    auto out = goal_update(group, fields, kTauGoal);
    REQUIRE(out);
    CHECK(out->goals == std::vector<GoalId>{1, 0});
    CHECK(out->swaps == 1);
    CHECK(out->swap_violations == 0);
  }

  SUBCASE("no unreached goal in reach fails the round") {
    FieldCache fields(map, {{3.5, 3.5}}, kRadius);
    GroupView group{{0}, {{1.5, 1.5}}, {0}, {AgentStatus::kMoveToGoal}, {1}};
    CHECK_FALSE(goal_update(group, fields, kTauGoal).has_value());
  }
}

TEST_CASE("communication groups form at the range boundary and by transitivity") {
  const double r_comm = 5.0;

  SUBCASE("exactly at range joins, just beyond splits") {
    std::vector<Vec2> at{{0.0, 0.0}, {5.0, 0.0}};
    CHECK(communication_groups(at, r_comm).size() == 1);
    std::vector<Vec2> beyond{{0.0, 0.0}, {5.0 + 1e-9, 0.0}};
    CHECK(communication_groups(beyond, r_comm).size() == 2);
  }

  SUBCASE("chains connect transitively") {
    std::vector<Vec2> chain{{0.0, 0.0}, {4.0, 0.0}, {8.0, 0.0}};
    auto groups = communication_groups(chain, r_comm);
    REQUIRE(groups.size() == 1);
    CHECK(groups[0] == std::vector<AgentId>{2, 1, 0});
  }

  SUBCASE("separate clusters are reported highest-id first, members descending") {
    std::vector<Vec2> two{{0.0, 0.0}, {1.0, 0.0}, {20.0, 0.0}, {21.0, 0.0}};
    auto groups = communication_groups(two, r_comm);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0] == std::vector<AgentId>{3, 2});
    CHECK(groups[1] == std::vector<AgentId>{1, 0});
  }
}

TEST_CASE("reached tables merge by element-wise OR") {
  std::vector<std::uint8_t> own{0, 0, 1, 0};
  std::vector<std::uint8_t> a{0, 1, 0, 0};
  std::vector<std::uint8_t> b{0, 0, 0, 0};
  merge_reached_tables(own, {&a, &b});
  CHECK(own == std::vector<std::uint8_t>{0, 1, 1, 0});
  // Merging again changes nothing.
  merge_reached_tables(own, {&a, &b});
  CHECK(own == std::vector<std::uint8_t>{0, 1, 1, 0});
}

TEST_CASE("parked agent trades goals with a blocked passer-by") {
  GridMap map = map_from_rows(std::vector<std::string>(8, "........"));
  FieldCache fields(map, {{3.5, 0.5}, {6.5, 0.5}}, kRadius);

  AgentState a;
  a.id = 0;
  a.goal = 0;
  a.position = {3.4, 0.5};  // within tau_goal of goal 0
  a.status = AgentStatus::kReached;

  AgentState b;
  b.id = 1;
  b.goal = 1;
  b.position = {1.0, 0.5};
  b.path.waypoints = {{0.5, 0.5}, {6.5, 0.5}};
  b.waypoint_index = 1;

  SUBCASE("route through the parked goal forces a swap") {
    CHECK(deadlock_goal_exchange(a, b, fields, kTauGoal, 0.98));
    CHECK(a.goal == 1);
    CHECK(b.goal == 0);
    CHECK(a.status == AgentStatus::kMoveToGoal);
    CHECK(b.status == AgentStatus::kMoveToGoal);
  }

  SUBCASE("route passing wide of the goal does not swap") {
    b.path.waypoints = {{0.5, 2.5}, {6.5, 2.5}};  // 2.0 units from goal 0
    b.position = {1.0, 2.5};
    CHECK_FALSE(deadlock_goal_exchange(a, b, fields, kTauGoal, 0.98));
    CHECK(a.goal == 0);
    CHECK(b.goal == 1);
  }

  SUBCASE("an agent still travelling cannot give its goal away") {
    a.position = {2.0, 0.5};  // 1.5 from goal 0
    CHECK_FALSE(deadlock_goal_exchange(a, b, fields, kTauGoal, 0.98));
    CHECK(a.goal == 0);
  }
}

TEST_CASE("initial goal selection") {
  SUBCASE("closest is measured by path length, not straight-line distance") {
    GridMap map = map_from_rows({
        "........",
        "........",
        "........",
        "@@@@@@@.",
        "........",
        "........",
        "........",
        "........",
    });
    // Goal 0 sits just across the wall (straight-line near, path far); goal 1
    // is on the agent's side of the wall.
    FieldCache fields(map, {{1.5, 4.5}, {6.5, 1.5}}, kRadius);
    auto got = select_initial_goal({1.5, 1.5}, fields, GoalSelectMode::kClosest, 0);
    REQUIRE(got);
    CHECK(*got == 1);
  }

  SUBCASE("exact distance ties go to the smaller goal id") {
    GridMap map = map_from_rows(std::vector<std::string>(8, "........"));
    FieldCache fields(map, {{4.5, 1.5}, {4.5, 5.5}}, kRadius);
    auto got = select_initial_goal({4.5, 3.5}, fields, GoalSelectMode::kClosest, 0);
    REQUIRE(got);
    CHECK(*got == 0);
  }

  SUBCASE("random mode is deterministic for a fixed seed and stays reachable") {
    GridMap map = map_from_rows(std::vector<std::string>(8, "........"));
    FieldCache fields(map, {{1.5, 1.5}, {6.5, 1.5}, {1.5, 6.5}}, kRadius);
    auto first = select_initial_goal({4.5, 4.5}, fields, GoalSelectMode::kRandom, 777u);
    auto second = select_initial_goal({4.5, 4.5}, fields, GoalSelectMode::kRandom, 777u);
    REQUIRE(first);
    REQUIRE(second);
    CHECK(*first == *second);
    CHECK(*first >= 0);
    CHECK(*first < 3);
  }

  SUBCASE("no reachable goal yields no selection") {
    GridMap map = map_from_rows({
        "........",
        ".@@@....",
        ".@.@....",
        ".@@@....",
        "........",
        "........",
        "........",
        "........",
    });
    FieldCache fields(map, {{2.5, 2.5}}, kRadius);  // sealed inside the ring
    CHECK_FALSE(select_initial_goal({6.5, 6.5}, fields, GoalSelectMode::kClosest, 0).has_value());
    CHECK_FALSE(select_initial_goal({6.5, 6.5}, fields, GoalSelectMode::kRandom, 1u).has_value());
  }
}

TEST_CASE("steering follows waypoints and reports route deviation") {
  SUBCASE("velocity points at the active waypoint at capped speed") {
    Path path{{{1.0, 1.0}, {6.0, 1.0}}};
    std::size_t idx = 1;
    Vec2 v = preferred_velocity(path, idx, {1.0, 1.0}, 0.3, 0.1);
    CHECK(idx == 1);
    CHECK(dist(v, Vec2{0.1, 0.0}) <= 1e-15);
  }

  SUBCASE("close waypoints are skipped, but never the last one") {
    Path path{{{1.0, 1.0}, {1.2, 1.0}, {4.0, 1.0}}};
    std::size_t idx = 0;
    Vec2 v = preferred_velocity(path, idx, {1.0, 1.0}, 0.3, 0.1);
    CHECK(idx == 2);  // both of the first two waypoints are within 0.3
    CHECK(dist(v, Vec2{0.1, 0.0}) <= 1e-15);

    std::size_t last = 0;
    Path lone{{{1.0, 1.0}}};
    Vec2 stop = preferred_velocity(lone, last, {1.0, 1.0}, 0.3, 0.1);
    CHECK(stop.x == 0.0);
    CHECK(stop.y == 0.0);
  }

  SUBCASE("the final approach slows to land exactly on the goal") {
    Path path{{{1.0, 1.0}, {2.0, 1.0}}};
    std::size_t idx = 1;
    Vec2 v = preferred_velocity(path, idx, {1.96, 1.0}, 0.3, 0.1);
    CHECK(dist(v, Vec2{0.04, 0.0}) <= 1e-12);
  }

  SUBCASE("deviation measures distance to the untravelled route only") {
    Path path{{{0.0, 0.0}, {4.0, 0.0}, {4.0, 4.0}}};
    CHECK(path_deviation(path, 1, {2.0, 0.0}) == doctest::Approx(0.0));
    CHECK(path_deviation(path, 1, {2.0, 0.5}) == doctest::Approx(0.5));
    // With the first leg already travelled, closeness to it no longer counts;
    // only the segment feeding the active waypoint remains (the vertical leg).
    CHECK(path_deviation(path, 2, {2.0, 0.5}) == doctest::Approx(2.0));
  }
}
