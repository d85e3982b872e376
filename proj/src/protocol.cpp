#include "unav/protocol.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "unav/rng.hpp"

namespace unav {

std::optional<GoalId> select_initial_goal(const Vec2& position, const FieldCache& fields,
                                          GoalSelectMode mode, std::uint32_t seed) {
  const int m = fields.goal_count();
  if (mode == GoalSelectMode::kClosest) {
    GoalId best = -1;
    double best_len = kInf;
    for (GoalId g = 0; g < m; ++g) {
      double len = fields.path_len_to(g, position);
      if (len < best_len) {
        best_len = len;
        best = g;
      }
    }
    if (best < 0) return std::nullopt;
    return best;
  }
  std::vector<GoalId> reachable;
  for (GoalId g = 0; g < m; ++g) {
    if (fields.path_len_to(g, position) < kInf) reachable.push_back(g);
  }
  if (reachable.empty()) return std::nullopt;
  std::mt19937 gen(seed);
  return reachable[bounded_draw(gen, static_cast<std::uint32_t>(reachable.size()))];
}

std::vector<std::vector<AgentId>> communication_groups(const std::vector<Vec2>& positions,
                                                       double r_comm) {
  const int n = static_cast<int>(positions.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  const double r2 = r_comm * r_comm;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (dist_sq(positions[i], positions[j]) <= r2) {
        parent[find(i)] = find(j);
      }
    }
  }
  std::vector<std::vector<AgentId>> by_root(n);
  for (int i = 0; i < n; ++i) by_root[find(i)].push_back(i);
  std::vector<std::vector<AgentId>> groups;
  for (auto& g : by_root) {
    if (g.empty()) continue;
    std::sort(g.begin(), g.end(), std::greater<AgentId>());
    groups.push_back(std::move(g));
  }
  std::sort(groups.begin(), groups.end(),
            [](const std::vector<AgentId>& a, const std::vector<AgentId>& b) {
              return a.front() > b.front();
            });
  return groups;
}

void merge_reached_tables(std::vector<std::uint8_t>& own,
                          const std::vector<const std::vector<std::uint8_t>*>& others) {
  for (const auto* other : others) {
    for (std::size_t g = 0; g < own.size(); ++g) {
      own[g] = static_cast<std::uint8_t>(own[g] | (*other)[g]);
    }
  }
}

bool swappable(double d_jj, double d_jk, double d_kj, double d_kk) {
  return d_jj > d_jk && d_jj + d_kk > d_jk + d_kj;
}

namespace {

struct Pick {
  GoalId goal;
  double len;
};

// Closest goal with a finite path that is neither reached nor removed from the
// working set (nor `exclude`). Ties go to the smaller goal id.
std::optional<Pick> closest_open_goal(const Vec2& p, const FieldCache& fields,
                                      const std::vector<std::uint8_t>& gr,
                                      const std::vector<std::uint8_t>& removed,
                                      GoalId exclude = -1) {
  GoalId best = -1;
  double best_len = kInf;
  for (GoalId g = 0; g < fields.goal_count(); ++g) {
    if (gr[g] || removed[g] || g == exclude) continue;
    double len = fields.path_len_to(g, p);
    if (len < best_len) {
      best_len = len;
      best = g;
    }
  }
  if (best < 0) return std::nullopt;
  return Pick{best, best_len};
}

}  // namespace

std::optional<GoalUpdateResult> goal_update(const GroupView& group, const FieldCache& fields,
                                            double tau_goal) {
  const std::size_t m = group.members.size();
  GoalUpdateResult out;
  out.goals = group.goals;
  out.statuses = group.statuses;
  out.gr = group.gr;
  std::vector<std::uint8_t> removed(out.gr.size(), 0);

  auto& ga = out.goals;
  auto& as = out.statuses;
  auto& gr = out.gr;

  for (std::size_t j = 0; j < m; ++j) {
    // A moving agent whose target was reached by someone else picks the
    // closest still-open goal instead.
    if (as[j] == AgentStatus::kMoveToGoal && gr[ga[j]]) {
      auto pick = closest_open_goal(group.positions[j], fields, gr, removed);
      if (!pick) return std::nullopt;
      ga[j] = pick->goal;
    }
    // Standing on the assigned goal claims it.
    if (as[j] != AgentStatus::kReached &&
        dist(group.positions[j], fields.goal_point(ga[j])) <= tau_goal) {
      as[j] = AgentStatus::kReached;
      gr[ga[j]] = 1;
    }
    for (std::size_t k = j + 1; k < m; ++k) {
      if (ga[k] == ga[j]) {
        // Duplicate assignment: the higher-priority agent moves aside if it
        // can, otherwise the lower-priority one is sent elsewhere.
        auto alt = closest_open_goal(group.positions[j], fields, gr, removed);
        if (as[j] != AgentStatus::kReached && alt && ga[j] != alt->goal) {
          ga[j] = alt->goal;
        } else {
          auto pick = closest_open_goal(group.positions[k], fields, gr, removed, ga[j]);
          if (!pick) return std::nullopt;
          ga[k] = pick->goal;
          as[k] = AgentStatus::kMoveToGoal;
        }
      } else if (as[j] != AgentStatus::kReached && as[k] != AgentStatus::kReached &&
                 !gr[ga[k]]) {
        double d_jj = fields.path_len_to(ga[j], group.positions[j]);
        double d_jk = fields.path_len_to(ga[k], group.positions[j]);
        double d_kj = fields.path_len_to(ga[j], group.positions[k]);
        double d_kk = fields.path_len_to(ga[k], group.positions[k]);
        if (swappable(d_jj, d_jk, d_kj, d_kk)) {
          std::swap(ga[j], ga[k]);
          ++out.swaps;
          if (!(d_jk + d_kj < d_jj + d_kk)) ++out.swap_violations;
        }
      }
    }
    removed[ga[j]] = 1;
  }

  out.changed.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    out.changed[i] = static_cast<std::uint8_t>(ga[i] != group.goals[i]);
  }
  // Two agents may leave with the same goal only when one of them was
  // reassigned in this very round (the follow-up round then separates them).
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = i + 1; k < m; ++k) {
      if (ga[i] == ga[k] && !out.changed[i] && !out.changed[k]) {
        throw std::logic_error("goal_update produced a stale duplicate assignment");
      }
    }
  }
  return out;
}

bool deadlock_goal_exchange(AgentState& a, AgentState& b, const FieldCache& fields,
                            double tau_goal, double delta_block) {
  const Vec2& goal_a = fields.goal_point(a.goal);
  if (dist(a.position, goal_a) > tau_goal) return false;

  // Distance from a's goal to b's untravelled route, counting only approaches
  // that lie ahead of b: a goal strictly behind the first leg's start does not
  // block b, and treating it as blocking would swap a freshly exchanged pair
  // straight back while b walks away.
  double min_d = kInf;
  Vec2 prev = b.position;
  bool first_leg = true;
  for (std::size_t i = b.waypoint_index; i < b.path.waypoints.size(); ++i) {
    const Vec2& next = b.path.waypoints[i];
    Vec2 leg = next - prev;
    double len_sq = norm_sq(leg);
    double t = len_sq > 0.0 ? dot(goal_a - prev, leg) / len_sq : 0.0;
    if (!(first_leg && t <= 0.0)) {
      double tc = std::min(1.0, std::max(0.0, t));
      min_d = std::min(min_d, dist(goal_a, prev + leg * tc));
    }
    first_leg = false;
    prev = next;
  }
  if (min_d > delta_block) return false;

  std::swap(a.goal, b.goal);
  a.status = AgentStatus::kMoveToGoal;
  b.status = AgentStatus::kMoveToGoal;
  return true;
}

Vec2 preferred_velocity(const Path& path, std::size_t& waypoint_index, const Vec2& position,
                        double delta_wp, double u_max) {
  const auto& wp = path.waypoints;
  if (wp.empty()) return Vec2{0.0, 0.0};
  if (waypoint_index >= wp.size()) waypoint_index = wp.size() - 1;
  while (waypoint_index + 1 < wp.size() && dist(position, wp[waypoint_index]) <= delta_wp) {
    ++waypoint_index;
  }
  Vec2 offset = wp[waypoint_index] - position;
  double d = norm(offset);
  if (d <= 0.0) return Vec2{0.0, 0.0};
  double speed = std::min(u_max, d);
  return offset * (speed / d);
}

double path_deviation(const Path& path, std::size_t waypoint_index, const Vec2& position) {
  const auto& wp = path.waypoints;
  if (wp.empty()) return 0.0;
  if (wp.size() == 1) return dist(position, wp[0]);
  std::size_t first_seg = waypoint_index == 0 ? 0 : waypoint_index - 1;
  double best = kInf;
  for (std::size_t i = first_seg; i + 1 < wp.size(); ++i) {
    best = std::min(best, dist_point_segment(position, wp[i], wp[i + 1]));
  }
  if (best == kInf) best = dist(position, wp.back());
  return best;
}

}  // namespace unav
