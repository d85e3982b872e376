#include "unav/central.hpp"

#include <algorithm>
#include <climits>
#include <deque>
#include <stdexcept>

namespace unav {

bool assignment_consistent(const std::vector<GoalId>& assignment, int goal_count) {
  if (static_cast<int>(assignment.size()) != goal_count) return false;
  std::vector<std::uint8_t> seen(goal_count, 0);
  for (GoalId g : assignment) {
    if (g < 0 || g >= goal_count || seen[g]) return false;
    seen[g] = 1;
  }
  return true;
}

std::optional<std::vector<GoalId>> initial_consistent_assignment(
    const std::vector<Vec2>& starts, const FieldCache& fields) {
  const int n = static_cast<int>(starts.size());
  std::vector<GoalId> assignment(n, -1);
  std::vector<std::uint8_t> claimed(fields.goal_count(), 0);
  for (int id = n - 1; id >= 0; --id) {
    GoalId best = -1;
    double best_len = kInf;
    for (GoalId g = 0; g < fields.goal_count(); ++g) {
      if (claimed[g]) continue;
      double len = fields.path_len_to(g, starts[id]);
      if (len < best_len) {
        best_len = len;
        best = g;
      }
    }
    if (best < 0) return std::nullopt;
    assignment[id] = best;
    claimed[best] = 1;
  }
  return assignment;
}

ExchangeStats c_unav_exchange(const std::vector<Vec2>& positions,
                              std::vector<GoalId>& assignment, const FieldCache& fields,
                              const std::vector<int>& active) {
  auto check = [&]() {
    if (!assignment_consistent(assignment, fields.goal_count())) {
      throw std::logic_error("pairwise exchange broke assignment consistency");
    }
  };
  auto subset_sum = [&]() {
    double s = 0.0;
    for (int i : active) s += fields.path_len_to(assignment[i], positions[i]);
    return s;
  };
  check();
  ExchangeStats stats;
  stats.sum_before = subset_sum();
  bool changed = true;
  while (changed) {
    changed = false;
    ++stats.sweeps;
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        int i = active[a];
        int j = active[b];
        double d_ii = fields.path_len_to(assignment[i], positions[i]);
        double d_jj = fields.path_len_to(assignment[j], positions[j]);
        double d_ij = fields.path_len_to(assignment[j], positions[i]);
        double d_ji = fields.path_len_to(assignment[i], positions[j]);
        if (d_ii + d_jj > d_ij + d_ji) {
          std::swap(assignment[i], assignment[j]);
          ++stats.swaps;
          changed = true;
        }
      }
    }
    check();
    if (stats.sweeps > 100000) {
      throw std::logic_error("pairwise exchange failed to converge");
    }
  }
  stats.sum_after = subset_sum();
  return stats;
}

namespace {

constexpr int kUnreachable = INT_MAX;

// 4-connected BFS distances from `source` over free cells.
std::vector<int> bfs_field(const GridMap& map, int source) {
  const int w = map.width();
  const int h = map.height();
  std::vector<int> dist(static_cast<std::size_t>(w) * h, kUnreachable);
  std::deque<int> queue;
  dist[source] = 0;
  queue.push_back(source);
  const int dr[4] = {-1, 1, 0, 0};
  const int dc[4] = {0, 0, -1, 1};
  while (!queue.empty()) {
    int cell = queue.front();
    queue.pop_front();
    int r = cell / w;
    int c = cell % w;
    for (int k = 0; k < 4; ++k) {
      int nr = r + dr[k];
      int nc = c + dc[k];
      if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
      if (map.blocked(nc, nr)) continue;
      int ncell = nr * w + nc;
      if (dist[ncell] != kUnreachable) continue;
      dist[ncell] = dist[cell] + 1;
      queue.push_back(ncell);
    }
  }
  return dist;
}

}  // namespace

std::optional<DiscreteSchedule> tswap_solve(const GridMap& map,
                                            const std::vector<int>& start_cells,
                                            const std::vector<int>& goal_cells,
                                            std::vector<GoalId> assignment, int step_limit) {
  const int n = static_cast<int>(start_cells.size());
  const int w = map.width();
  if (!assignment_consistent(assignment, static_cast<int>(goal_cells.size()))) {
    throw std::invalid_argument("tswap requires a consistent assignment");
  }
  {
    std::vector<int> sorted = start_cells;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("tswap requires distinct start cells");
    }
    for (int cell : start_cells) {
      if (map.blocked(cell % w, cell / w)) {
        throw std::invalid_argument("tswap start on a blocked cell");
      }
    }
  }

  std::vector<std::vector<int>> dist(goal_cells.size());
  auto field = [&](GoalId g) -> const std::vector<int>& {
    if (dist[g].empty()) dist[g] = bfs_field(map, goal_cells[g]);
    return dist[g];
  };

  DiscreteSchedule sched;
  std::vector<int> cur = start_cells;
  std::vector<GoalId>& target = assignment;
  sched.cells.push_back(cur);

  // Next cell on a shortest 4-connected path; ties to the smallest flat index.
  auto next_cell = [&](int a) -> int {
    const std::vector<int>& d = field(target[a]);
    int here = cur[a];
    if (d[here] == kUnreachable) return -1;
    int r = here / w;
    int c = here % w;
    const int dr[4] = {-1, 1, 0, 0};
    const int dc[4] = {0, 0, -1, 1};
    int best = -1;
    for (int k = 0; k < 4; ++k) {
      int nr = r + dr[k];
      int nc = c + dc[k];
      if (nr < 0 || nr >= map.height() || nc < 0 || nc >= w) continue;
      if (map.blocked(nc, nr)) continue;
      int ncell = nr * w + nc;
      if (d[ncell] != d[here] - 1) continue;
      if (best < 0 || ncell < best) best = ncell;
    }
    return best;
  };

  std::vector<int> occupant(static_cast<std::size_t>(w) * map.height(), -1);
  for (int i = 0; i < n; ++i) occupant[cur[i]] = i;

  std::vector<std::uint8_t> decided(n), moves(n), on_stack(n);
  std::vector<std::uint8_t> reserved(occupant.size());
  std::vector<int> new_cell(n);

  for (int step = 0;; ++step) {
    bool all_home = true;
    for (int i = 0; i < n && all_home; ++i) {
      all_home = cur[i] == goal_cells[target[i]];
    }
    if (all_home) {
      sched.final_targets = target;
      return sched;
    }
    if (step >= step_limit) return std::nullopt;

    std::fill(decided.begin(), decided.end(), 0);
    std::fill(moves.begin(), moves.end(), 0);
    std::fill(on_stack.begin(), on_stack.end(), 0);
    std::fill(reserved.begin(), reserved.end(), 0);

    std::vector<int> stack;
    auto commit_stay = [&](int a) {
      decided[a] = 1;
      moves[a] = 0;
      new_cell[a] = cur[a];
      on_stack[a] = 0;
    };
    auto commit_move = [&](int a, int v) {
      decided[a] = 1;
      moves[a] = 1;
      new_cell[a] = v;
      reserved[v] = 1;
      on_stack[a] = 0;
    };

    for (int start = n - 1; start >= 0; --start) {
      if (decided[start]) continue;
      stack.clear();
      stack.push_back(start);
      on_stack[start] = 1;
      while (!stack.empty()) {
        int a = stack.back();
        if (decided[a]) {
          stack.pop_back();
          continue;
        }
        if (cur[a] == goal_cells[target[a]]) {
          commit_stay(a);
          stack.pop_back();
          continue;
        }
        int v = next_cell(a);
        if (v < 0 || reserved[v]) {
          // No route, or the cell is claimed by a committed move: wait.
          commit_stay(a);
          stack.pop_back();
          continue;
        }
        int q = occupant[v];
        if (q >= 0 && decided[q] && moves[q]) q = -1;  // being vacated
        if (q < 0) {
          commit_move(a, v);
          stack.pop_back();
          continue;
        }
        if (cur[q] == goal_cells[target[q]] || decided[q]) {
          // Blocked by a finished or waiting agent: trade targets, stay put.
          std::swap(target[a], target[q]);
          commit_stay(a);
          stack.pop_back();
          continue;
        }
        if (on_stack[q]) {
          // Mutual blocking cycle: each member takes the target of the member
          // that wants its cell, and everyone holds position this step.
          std::size_t idx = stack.size();
          while (idx > 0 && stack[idx - 1] != q) --idx;
          --idx;
          GoalId saved = target[stack.back()];
          for (std::size_t i = stack.size() - 1; i > idx; --i) {
            target[stack[i]] = target[stack[i - 1]];
          }
          target[stack[idx]] = saved;
          while (stack.size() > idx) {
            commit_stay(stack.back());
            stack.pop_back();
          }
          continue;
        }
        stack.push_back(q);
        on_stack[q] = 1;
      }
    }

    for (int i = 0; i < n; ++i) {
      if (moves[i]) occupant[cur[i]] = -1;
    }
    for (int i = 0; i < n; ++i) {
      if (moves[i]) {
        cur[i] = new_cell[i];
        occupant[cur[i]] = i;
      }
    }
    sched.cells.push_back(cur);
  }
}

}  // namespace unav
