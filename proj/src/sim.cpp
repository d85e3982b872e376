#include "unav/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "unav/central.hpp"
#include "unav/orca.hpp"
#include "unav/pathfinding.hpp"
#include "unav/rng.hpp"

namespace unav {

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kDecUnav:
      return "dec-unav";
    case Algorithm::kCUnav:
      return "c-unav";
    case Algorithm::kOrca:
      return "orca";
    case Algorithm::kTswap:
      return "tswap";
  }
  return "unknown";
}

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::kSuccess:
      return "success";
    case Outcome::kFailTimeout:
      return "fail_timeout";
    case Outcome::kFailCollision:
      return "fail_collision";
    case Outcome::kFailDeadlock:
      return "fail_deadlock";
    case Outcome::kFailNoGoal:
      return "fail_no_goal";
  }
  return "unknown";
}

bool parse_algorithm(const std::string& s, Algorithm& out) {
  if (s == "dec-unav") {
    out = Algorithm::kDecUnav;
  } else if (s == "c-unav") {
    out = Algorithm::kCUnav;
  } else if (s == "orca") {
    out = Algorithm::kOrca;
  } else if (s == "tswap") {
    out = Algorithm::kTswap;
  } else {
    return false;
  }
  return true;
}

bool detect_collision(const std::vector<Vec2>& positions, const GridMap& map, double r_phys) {
  const double limit = 2.0 * r_phys - 1e-9;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = i + 1; j < positions.size(); ++j) {
      if (dist(positions[i], positions[j]) < limit) return true;
    }
  }
  for (const Vec2& p : positions) {
    if (point_obstacle_clearance(map, p, r_phys) < r_phys - 1e-9) return true;
  }
  return false;
}

bool detect_deadlock(const std::vector<double>& mean_speed_history, int window,
                     double threshold) {
  if (static_cast<int>(mean_speed_history.size()) < window) return false;
  double sum = 0.0;
  for (std::size_t i = mean_speed_history.size() - window; i < mean_speed_history.size(); ++i) {
    sum += mean_speed_history[i];
  }
  return sum / window < threshold;
}

namespace {

void validate_instance(const GridMap& map, const ScenarioInstance& inst, const RunConfig& cfg) {
  const std::size_t n = inst.starts.size();
  if (n == 0 || inst.goals.size() != n) {
    throw std::invalid_argument("instance needs equal, nonzero start and goal counts");
  }
  for (const Vec2& p : inst.starts) {
    if (!disk_in_free_space(map, p, cfg.r_safe)) {
      throw std::invalid_argument("start location not in free space at the safety radius");
    }
  }
  for (const Vec2& g : inst.goals) {
    if (!disk_in_free_space(map, g, cfg.r_safe)) {
      throw std::invalid_argument("goal location not in free space at the safety radius");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dist(inst.starts[i], inst.starts[j]) < 2.0 * cfg.r_safe - 1e-12) {
        throw std::invalid_argument("start locations closer than twice the safety radius");
      }
      if (inst.goals[i] == inst.goals[j]) {
        throw std::invalid_argument("duplicate goal locations");
      }
    }
  }
}

bool goals_bijective(const std::vector<AgentState>& agents, int goal_count) {
  std::vector<std::uint8_t> seen(goal_count, 0);
  for (const AgentState& a : agents) {
    if (a.goal < 0 || a.goal >= goal_count || seen[a.goal]) return false;
    seen[a.goal] = 1;
  }
  return static_cast<int>(agents.size()) == goal_count;
}

class ContinuousSim {
 public:
  ContinuousSim(const GridMap& map, const ScenarioInstance& inst, const RunConfig& cfg)
      : map_(map),
        inst_(inst),
        cfg_(cfg),
        fields_(map, inst.goals, cfg.r_safe),
        obstacles_(map),
        n_(static_cast<int>(inst.starts.size())) {}

  RunResult run() {
    if (!init_goals()) {
      res_.outcome = Outcome::kFailNoGoal;
      res_.steps = 0;
      finalize();
      return res_;
    }
    if (!build_initial_paths()) {
      res_.outcome = Outcome::kFailNoGoal;
      res_.steps = 0;
      finalize();
      return res_;
    }
    lengths_.assign(n_, 0.0);
    last_move_.assign(n_, 0);
    update_min_stats();

    for (int t = 0;; ++t) {
      if (!communication_phase(t)) {
        res_.outcome = Outcome::kFailNoGoal;
        res_.steps = t;
        finalize();
        return res_;
      }
      if (!goals_bijective(agents_, fields_.goal_count())) res_.last_inconsistent_step = t;
      emit_trace(t);
      if (success_now()) {
        res_.outcome = Outcome::kSuccess;
        res_.steps = t;
        compute_metrics();
        finalize();
        return res_;
      }
      if (t >= cfg_.step_limit) {
        res_.outcome = Outcome::kFailTimeout;
        res_.steps = t;
        finalize();
        return res_;
      }
      if (!motion_phase(t)) {
        res_.outcome = Outcome::kFailNoGoal;
        res_.steps = t;
        finalize();
        return res_;
      }
      update_min_stats();
      if (collision_now()) {
        res_.outcome = Outcome::kFailCollision;
        res_.steps = t + 1;
        emit_trace(t + 1);
        finalize();
        return res_;
      }
      if (detect_deadlock(speed_hist_, cfg_.deadlock_window, cfg_.deadlock_speed)) {
        res_.outcome = Outcome::kFailDeadlock;
        res_.steps = t + 1;
        emit_trace(t + 1);
        finalize();
        return res_;
      }
    }
  }

 private:
  bool init_goals() {
    agents_.resize(n_);
    for (int i = 0; i < n_; ++i) {
      agents_[i].id = i;
      agents_[i].position = inst_.starts[i];
      agents_[i].velocity = Vec2{0.0, 0.0};
      agents_[i].status = AgentStatus::kMoveToGoal;
      agents_[i].gr.assign(fields_.goal_count(), 0);
    }
    need_replan_.assign(n_, 0);
    if (cfg_.algorithm == Algorithm::kDecUnav) {
      for (int i = 0; i < n_; ++i) {
        std::uint32_t seed = inst_.seed + 0x9e3779b9u * static_cast<std::uint32_t>(i);
        auto g = select_initial_goal(agents_[i].position, fields_, cfg_.goal_select, seed);
        if (!g) return false;
        agents_[i].goal = *g;
      }
    } else {
      auto assignment = initial_consistent_assignment(inst_.starts, fields_);
      if (!assignment) return false;
      assignment_ = *assignment;
      for (int i = 0; i < n_; ++i) agents_[i].goal = assignment_[i];
    }
    return true;
  }

  bool build_initial_paths() {
    for (int i = 0; i < n_; ++i) {
      auto p = construct_path(map_, agents_[i].position, fields_.goal_point(agents_[i].goal),
                              cfg_.r_safe);
      if (!p) return false;
      agents_[i].path = std::move(*p);
      agents_[i].waypoint_index = 0;
    }
    return true;
  }

  // Goal/status/table updates for the current step. Returns false when an
  // agent cannot find any reachable unreached goal.
  bool communication_phase(int t) {
    switch (cfg_.algorithm) {
      case Algorithm::kDecUnav:
        return dec_unav_phase(t);
      case Algorithm::kCUnav:
        c_unav_phase(t);
        return true;
      case Algorithm::kOrca:
        mark_reached_all();
        return true;
      default:
        return true;
    }
  }

  bool dec_unav_phase(int t) {
    std::vector<Vec2> positions(n_);
    for (int i = 0; i < n_; ++i) positions[i] = agents_[i].position;
    auto groups = communication_groups(positions, cfg_.r_comm);

    // Reached tables are shared within each group every step.
    const int m = fields_.goal_count();
    for (const auto& group : groups) {
      std::vector<std::uint8_t> merged(m, 0);
      for (AgentId id : group) {
        for (int g = 0; g < m; ++g) {
          merged[g] = static_cast<std::uint8_t>(merged[g] | agents_[id].gr[g]);
        }
      }
      for (AgentId id : group) write_gr(agents_[id], merged);
    }

    if (t % cfg_.k_exch != 0) return true;
    ++res_.exchange_events;

    std::vector<char> reassigned(n_, 0);
    for (const auto& group : groups) {
      GroupView view;
      view.members = group;
      for (AgentId id : group) {
        view.positions.push_back(agents_[id].position);
        view.goals.push_back(agents_[id].goal);
        view.statuses.push_back(agents_[id].status);
      }
      view.gr = agents_[group.front()].gr;
      auto out = goal_update(view, fields_, cfg_.tau_goal);
      if (!out) return false;
      res_.goal_update_swaps += out->swaps;
      res_.swap_violations += out->swap_violations;
      for (std::size_t idx = 0; idx < group.size(); ++idx) {
        AgentId id = group[idx];
        if (agents_[id].goal != out->goals[idx]) {
          agents_[id].goal = out->goals[idx];
          need_replan_[id] = 1;
          reassigned[id] = 1;
        }
        agents_[id].status = out->statuses[idx];
        write_gr(agents_[id], out->gr);
      }
    }

    // Parked agents blocking someone's route hand their goal over: each
    // ordered pair is considered once, skipping pairs with equal goals or an
    // already-finished second agent.  An agent takes part in at most one
    // exchange per event; evaluating it again against its fresh goal in the
    // same pass would only churn the pair straight back.  An agent whose goal
    // was reassigned above still follows a route to its old goal, so judging
    // it blocked on that stale route would undo the reassignment.
    std::vector<char> exchanged(n_, 0);
    for (const auto& group : groups) {
      std::vector<AgentId> asc(group.rbegin(), group.rend());
      for (AgentId a : asc) {
        for (AgentId b : asc) {
          if (a == b) continue;
          if (exchanged[a] || exchanged[b]) continue;
          if (reassigned[b]) continue;
          AgentState& sa = agents_[a];
          AgentState& sb = agents_[b];
          if (sa.goal == sb.goal) continue;
          if (sb.status == AgentStatus::kReached) continue;
          if (deadlock_goal_exchange(sa, sb, fields_, cfg_.tau_goal, cfg_.delta_block)) {
            ++res_.deadlock_swaps;
            exchanged[a] = 1;
            exchanged[b] = 1;
            need_replan_[a] = 1;
            need_replan_[b] = 1;
            // The claim on an already-reached goal travels with it, so the
            // reached table stays monotone and the goal keeps its owner.
            if (sb.gr[sb.goal]) sb.status = AgentStatus::kReached;
          }
        }
      }
    }
    return true;
  }

  void c_unav_phase(int t) {
    if (t % cfg_.k_exch != 0) return;
    ++res_.exchange_events;
    mark_reached_all();
    std::vector<Vec2> positions(n_);
    for (int i = 0; i < n_; ++i) positions[i] = agents_[i].position;
    std::vector<int> active;
    for (int i = 0; i < n_; ++i) {
      if (agents_[i].status != AgentStatus::kReached) active.push_back(i);
    }
    double before = 0.0;
    for (int i = 0; i < n_; ++i) {
      before += fields_.path_len_to(agents_[i].goal, agents_[i].position);
    }
    ExchangeStats stats = c_unav_exchange(positions, assignment_, fields_, active);
    res_.goal_update_swaps += stats.swaps;
    for (int i : active) {
      if (agents_[i].goal != assignment_[i]) {
        agents_[i].goal = assignment_[i];
        need_replan_[i] = 1;
      }
    }
    double total = 0.0;
    for (int i = 0; i < n_; ++i) {
      total += fields_.path_len_to(agents_[i].goal, agents_[i].position);
    }
    res_.exchange_sums.push_back(before);
    res_.exchange_sums.push_back(total);
  }

  void mark_reached_all() {
    for (AgentState& a : agents_) {
      if (a.status != AgentStatus::kReached &&
          dist(a.position, fields_.goal_point(a.goal)) <= cfg_.tau_goal) {
        a.status = AgentStatus::kReached;
      }
    }
  }

  void write_gr(AgentState& agent, const std::vector<std::uint8_t>& table) {
    for (std::size_t g = 0; g < table.size(); ++g) {
      if (agent.gr[g] && !table[g]) res_.gr_monotone = false;
    }
    agent.gr = table;
  }

  bool success_now() const {
    for (const AgentState& a : agents_) {
      if (a.status != AgentStatus::kReached) return false;
      if (dist(a.position, fields_.goal_point(a.goal)) > cfg_.tau_goal) return false;
    }
    return goals_bijective(agents_, fields_.goal_count());
  }

  bool motion_phase(int t) {
    for (int i = 0; i < n_; ++i) {
      AgentState& a = agents_[i];
      if (need_replan_[i] ||
          path_deviation(a.path, a.waypoint_index, a.position) > cfg_.delta_dev) {
        auto p = construct_path(map_, a.position, fields_.goal_point(a.goal), cfg_.r_safe);
        if (!p) return false;
        a.path = std::move(*p);
        a.waypoint_index = 0;
        need_replan_[i] = 0;
      }
    }
    std::vector<Vec2> v_pref(n_);
    for (int i = 0; i < n_; ++i) {
      AgentState& a = agents_[i];
      v_pref[i] =
          preferred_velocity(a.path, a.waypoint_index, a.position, cfg_.delta_wp, cfg_.u_max);
    }
    // Agents beyond this range provably cannot constrain a velocity of
    // magnitude <= u_max within the time horizon.
    const double reach = 2.0 * cfg_.r_safe + 6.0 * cfg_.tau_agent * cfg_.u_max;
    const double reach_sq = reach * reach;
    std::vector<Vec2> actions(n_);
    std::vector<NeighborView> neighbors;
    for (int i = 0; i < n_; ++i) {
      neighbors.clear();
      for (int j = 0; j < n_; ++j) {
        if (j == i) continue;
        if (dist_sq(agents_[i].position, agents_[j].position) > reach_sq) continue;
        neighbors.push_back(NeighborView{j, agents_[j].position, agents_[j].velocity});
      }
      BodyState self{i, agents_[i].position, agents_[i].velocity};
      actions[i] = compute_action(self, neighbors, obstacles_, v_pref[i], cfg_.r_safe,
                                  cfg_.u_max, cfg_.tau_agent, cfg_.tau_obst);
    }
    double total_disp = 0.0;
    for (int i = 0; i < n_; ++i) {
      double disp = norm(actions[i]);
      res_.max_step_displacement = std::max(res_.max_step_displacement, disp);
      agents_[i].position += actions[i];
      agents_[i].velocity = actions[i];
      lengths_[i] += disp;
      if (disp >= 1e-9) last_move_[i] = t + 1;
      total_disp += disp;
    }
    speed_hist_.push_back(total_disp / n_);
    return true;
  }

  bool collision_now() const {
    std::vector<Vec2> positions(n_);
    for (int i = 0; i < n_; ++i) positions[i] = agents_[i].position;
    return detect_collision(positions, map_, cfg_.r_phys);
  }

  void update_min_stats() {
    for (int i = 0; i < n_; ++i) {
      for (int j = i + 1; j < n_; ++j) {
        res_.min_pair_dist =
            std::min(res_.min_pair_dist, dist(agents_[i].position, agents_[j].position));
      }
      res_.min_obstacle_clearance = std::min(
          res_.min_obstacle_clearance, point_obstacle_clearance(map_, agents_[i].position, 1.0));
    }
  }

  void compute_metrics() {
    double makespan = 0.0, flowtime = 0.0, maxdist = 0.0, sumdist = 0.0;
    for (int i = 0; i < n_; ++i) {
      makespan = std::max(makespan, static_cast<double>(last_move_[i]));
      flowtime += last_move_[i];
      maxdist = std::max(maxdist, lengths_[i]);
      sumdist += lengths_[i];
    }
    res_.makespan = makespan;
    res_.flowtime = flowtime;
    res_.maxdist = maxdist;
    res_.sumdist = sumdist;
  }

  void emit_trace(int t) {
    if (!cfg_.record_trace || t <= last_trace_t_) return;
    last_trace_t_ = t;
    for (int i = 0; i < n_; ++i) {
      const AgentState& a = agents_[i];
      res_.trace.push_back(TraceRow{t, i, a.position.x, a.position.y, a.goal,
                                    a.status == AgentStatus::kReached ? 1 : 0});
    }
  }

  void finalize() {
    res_.assignment_consistent_at_end = goals_bijective(agents_, fields_.goal_count());
    if (cfg_.record_trace) emit_trace(res_.steps);
  }

  const GridMap& map_;
  const ScenarioInstance& inst_;
  const RunConfig& cfg_;
  FieldCache fields_;
  ObstacleIndex obstacles_;
  RunResult res_;
  int n_;
  std::vector<AgentState> agents_;
  std::vector<GoalId> assignment_;
  std::vector<std::uint8_t> need_replan_;
  std::vector<double> lengths_;
  std::vector<int> last_move_;
  std::vector<double> speed_hist_;
  int last_trace_t_ = -1;
};

RunResult run_discrete(const GridMap& map, const ScenarioInstance& inst,
                       const RunConfig& cfg) {
  RunResult res;
  const int n = static_cast<int>(inst.starts.size());
  const int w = map.width();
  FieldCache fields(map, inst.goals, cfg.r_safe);
  auto assignment = initial_consistent_assignment(inst.starts, fields);
  if (!assignment) {
    res.outcome = Outcome::kFailNoGoal;
    return res;
  }
  std::vector<int> start_cells(n), goal_cells(n);
  for (int i = 0; i < n; ++i) {
    int sc = 0, sr = 0, gc = 0, gr = 0;
    map.cell_of(inst.starts[i], sc, sr);
    map.cell_of(inst.goals[i], gc, gr);
    start_cells[i] = sr * w + sc;
    goal_cells[i] = gr * w + gc;
  }
  auto sched = tswap_solve(map, start_cells, goal_cells, *assignment, cfg.discrete_step_limit);
  auto center = [&](int cell) { return Vec2{cell % w + 0.5, cell / w + 0.5}; };
  if (!sched) {
    res.outcome = Outcome::kFailTimeout;
    res.steps = cfg.discrete_step_limit;
    return res;
  }

  res.outcome = Outcome::kSuccess;
  res.steps = sched->steps();
  res.assignment_consistent_at_end =
      assignment_consistent(sched->final_targets, static_cast<int>(inst.goals.size()));

  std::vector<int> moves(n, 0), last_move(n, 0);
  for (std::size_t t = 1; t < sched->cells.size(); ++t) {
    for (int i = 0; i < n; ++i) {
      if (sched->cells[t][i] != sched->cells[t - 1][i]) {
        ++moves[i];
        last_move[i] = static_cast<int>(t);
      }
    }
  }
  double makespan = 0.0, flowtime = 0.0, maxdist = 0.0, sumdist = 0.0;
  for (int i = 0; i < n; ++i) {
    double duration = 10.0 * last_move[i];  // one grid step stands for 10 time steps
    makespan = std::max(makespan, duration);
    flowtime += duration;
    maxdist = std::max(maxdist, static_cast<double>(moves[i]));
    sumdist += moves[i];
  }
  res.makespan = makespan;
  res.flowtime = flowtime;
  res.maxdist = maxdist;
  res.sumdist = sumdist;

  for (const auto& row : sched->cells) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        res.min_pair_dist = std::min(res.min_pair_dist, dist(center(row[i]), center(row[j])));
      }
      res.min_obstacle_clearance =
          std::min(res.min_obstacle_clearance, point_obstacle_clearance(map, center(row[i]), 1.0));
    }
  }
  for (std::size_t t = 1; t < sched->cells.size(); ++t) {
    for (int i = 0; i < n; ++i) {
      res.max_step_displacement =
          std::max(res.max_step_displacement,
                   dist(center(sched->cells[t][i]), center(sched->cells[t - 1][i])));
    }
  }
  if (cfg.record_trace) {
    for (std::size_t t = 0; t < sched->cells.size(); ++t) {
      for (int i = 0; i < n; ++i) {
        Vec2 p = center(sched->cells[t][i]);
        int settled = last_move[i] <= static_cast<int>(t) ? 1 : 0;
        res.trace.push_back(TraceRow{static_cast<int>(t) * 10, i, p.x, p.y,
                                     sched->final_targets[i], settled});
      }
    }
  }
  return res;
}

}  // namespace

RunResult run(const GridMap& map, const ScenarioInstance& instance, const RunConfig& config) {
  validate_instance(map, instance, config);
  if (config.algorithm == Algorithm::kTswap) {
    return run_discrete(map, instance, config);
  }
  ContinuousSim sim(map, instance, config);
  return sim.run();
}

std::vector<ScenarioInstance> generate_instances(const GridMap& map, const std::string& map_path,
                                                 int count, int pairs, std::uint32_t seed) {
  std::vector<int> free_cells;
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) {
      if (!map.blocked(c, r)) free_cells.push_back(r * map.width() + c);
    }
  }
  if (pairs > static_cast<int>(free_cells.size())) {
    throw std::runtime_error("map has fewer free cells than requested locations");
  }
  std::mt19937 gen(seed);
  auto sample_cells = [&](int k) {
    std::vector<std::uint8_t> used(free_cells.size(), 0);
    std::vector<Vec2> points;
    points.reserve(k);
    while (static_cast<int>(points.size()) < k) {
      std::uint32_t idx = bounded_draw(gen, static_cast<std::uint32_t>(free_cells.size()));
      if (used[idx]) continue;
      used[idx] = 1;
      int cell = free_cells[idx];
      points.push_back(Vec2{cell % map.width() + 0.5, cell / map.width() + 0.5});
    }
    return points;
  };
  std::vector<ScenarioInstance> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    ScenarioInstance inst;
    inst.map_path = map_path;
    inst.starts = sample_cells(pairs);
    inst.goals = sample_cells(pairs);
    inst.seed = seed + 7919u * static_cast<std::uint32_t>(k);
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace unav
