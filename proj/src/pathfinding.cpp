#include "unav/pathfinding.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace unav {

namespace {

const double kSqrt2 = std::sqrt(2.0);

// Cells usable by a radius-r disk: free and with center clearance >= r.
std::vector<char> passable_cells(const GridMap& map, double r) {
  std::vector<char> pass(map.cell_count(), 0);
  for (int rr = 0; rr < map.height(); ++rr) {
    for (int cc = 0; cc < map.width(); ++cc) {
      if (map.free_cell(cc, rr) && disk_in_free_space(map, map.cell_center(cc, rr), r)) {
        pass[map.cell_index(cc, rr)] = 1;
      }
    }
  }
  return pass;
}

struct Move {
  int dc, dr;
  bool diagonal;
};

constexpr Move kMoves[8] = {{1, 0, false},  {-1, 0, false}, {0, 1, false},  {0, -1, false},
                            {1, 1, true},   {1, -1, true},  {-1, 1, true},  {-1, -1, true}};

bool move_allowed(const GridMap& map, const std::vector<char>& pass, int c, int r,
                  const Move& m) {
  int nc = c + m.dc, nr = r + m.dr;
  if (nc < 0 || nr < 0 || nc >= map.width() || nr >= map.height()) return false;
  if (!pass[map.cell_index(nc, nr)]) return false;
  if (m.diagonal) {
    if (!pass[map.cell_index(c + m.dc, r)] || !pass[map.cell_index(c, r + m.dr)]) return false;
  }
  return true;
}

// Tautens a found polyline: cell-center elbows cannot hug obstacle corners,
// leaving up to a few percent of slack, so each interior waypoint is pulled
// toward diagonal offset points of nearby blocked-cell corners whenever that
// strictly shortens the path and every touched segment stays traversable.
void refine_path(const GridMap& map, double r, std::vector<Vec2>& wp) {
  if (wp.size() < 3) return;
  const double off = r + 1e-3;
  for (int pass = 0; pass < 5; ++pass) {
    bool improved = false;
    for (std::size_t i = 1; i + 1 < wp.size(); ++i) {
      int wc, wr;
      map.cell_of(wp[i], wc, wr);
      Vec2 best = wp[i];
      double best_len = dist(wp[i - 1], wp[i]) + dist(wp[i], wp[i + 1]);
      // The binding corner can sit a couple of cells from the elbow when the
      // legs graze it at a shallow angle, so scan a 5x5 block of cells.
      for (int dc = -2; dc <= 2; ++dc) {
        for (int dr = -2; dr <= 2; ++dr) {
          // Out-of-range cells count as blocked; their corners are the map rim.
          if (!map.blocked(wc + dc, wr + dr)) continue;
          for (int ix = 0; ix <= 1; ++ix) {
            for (int iy = 0; iy <= 1; ++iy) {
              Vec2 corner{double(wc + dc + ix), double(wr + dr + iy)};
              for (int sx = -1; sx <= 1; sx += 2) {
                for (int sy = -1; sy <= 1; sy += 2) {
                  Vec2 cand{corner.x + sx * off, corner.y + sy * off};
                  double len = dist(wp[i - 1], cand) + dist(cand, wp[i + 1]);
                  if (len >= best_len - 1e-12) continue;
                  if (!disk_in_free_space(map, cand, r)) continue;
                  if (!segment_traversable(map, wp[i - 1], cand, r) ||
                      !segment_traversable(map, cand, wp[i + 1], r)) {
                    continue;
                  }
                  best_len = len;
                  best = cand;
                  improved = true;
                }
              }
            }
          }
        }
      }
      wp[i] = best;
    }
    if (!improved) break;
  }
}

}  // namespace

DistanceField build_distance_field(const GridMap& map, const Vec2& goal, double r) {
  DistanceField field;
  field.goal = goal;
  field.width = map.width();
  field.height = map.height();
  field.dist.assign(map.cell_count(), kInf);

  std::vector<char> pass = passable_cells(map, r);
  int gc, gr;
  map.cell_of(goal, gc, gr);
  if (!pass[map.cell_index(gc, gr)]) return field;

  // Step counts per cell; the distance is always recomputed as s + d*sqrt(2)
  // so equal-length routes give bit-identical values.
  std::vector<int> straight(map.cell_count(), 0), diagonal(map.cell_count(), 0);

  struct Entry {
    double d;
    int cell;
    bool operator>(const Entry& o) const {
      if (d != o.d) return d > o.d;
      return cell > o.cell;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
  field.dist[map.cell_index(gc, gr)] = 0.0;
  open.push({0.0, map.cell_index(gc, gr)});

  while (!open.empty()) {
    Entry e = open.top();
    open.pop();
    if (e.d > field.dist[e.cell]) continue;
    int c = e.cell % map.width(), rr = e.cell / map.width();
    for (const Move& m : kMoves) {
      if (!move_allowed(map, pass, c, rr, m)) continue;
      int ncell = map.cell_index(c + m.dc, rr + m.dr);
      int ns = straight[e.cell] + (m.diagonal ? 0 : 1);
      int nd = diagonal[e.cell] + (m.diagonal ? 1 : 0);
      double cand = ns + nd * kSqrt2;
      if (cand < field.dist[ncell]) {
        field.dist[ncell] = cand;
        straight[ncell] = ns;
        diagonal[ncell] = nd;
        open.push({cand, ncell});
      }
    }
  }
  return field;
}

double path_len(const DistanceField& field, const Vec2& p) {
  int c = std::clamp(static_cast<int>(std::floor(p.x)), 0, field.width - 1);
  int r = std::clamp(static_cast<int>(std::floor(p.y)), 0, field.height - 1);
  double d = field.at_cell(c, r);
  if (d == kInf) return kInf;
  return d + dist(p, Vec2{c + 0.5, r + 0.5});
}

std::optional<Path> construct_path(const GridMap& map, const Vec2& start, const Vec2& goal,
                                   double r) {
  if (!disk_in_free_space(map, start, r) || !disk_in_free_space(map, goal, r)) {
    return std::nullopt;
  }
  if (start == goal) return Path{{start}};
  if (segment_traversable(map, start, goal, r)) return Path{{start, goal}};

  int sc, sr, gc, gr;
  map.cell_of(start, sc, sr);
  map.cell_of(goal, gc, gr);

  // Search nodes: every cell center plus two virtual endpoint nodes for the
  // exact start and goal points. Keeping the cell centers as routing anchors
  // matters in tight corridors: the straight segment from an off-center
  // endpoint into a one-cell doorway can clip a wall corner even though the
  // route through the endpoint's own cell center is clear.
  const int ncells = map.cell_count();
  const int start_node = ncells;
  const int goal_node = ncells + 1;
  auto pos = [&](int node) -> Vec2 {
    if (node == start_node) return start;
    if (node == goal_node) return goal;
    return map.cell_center(node % map.width(), node / map.width());
  };

  std::vector<char> pass = passable_cells(map, r);

  constexpr int kNone = -1;
  std::vector<double> g(ncells + 2, kInf);
  std::vector<int> parent(ncells + 2, kNone);
  std::vector<char> closed(ncells + 2, 0);
  std::vector<char> goal_adjacent(ncells, 0);
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      int c = gc + dc, rr = gr + dr;
      if (c < 0 || rr < 0 || c >= map.width() || rr >= map.height()) continue;
      goal_adjacent[map.cell_index(c, rr)] = 1;
    }
  }

  struct Entry {
    double f, g;
    int node;
  };
  // Pop smallest f; ties prefer larger g, then smaller node index.
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g < b.g;
    return a.node > b.node;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> open(worse);

  auto relax = [&](int from_node, double from_g, int to_node) {
    Vec2 to = pos(to_node);
    if (!segment_traversable(map, pos(from_node), to, r)) return;
    double cand_g;
    int cand_parent;
    if (parent[from_node] != kNone && segment_traversable(map, pos(parent[from_node]), to, r)) {
      cand_parent = parent[from_node];
      cand_g = g[cand_parent] + dist(pos(cand_parent), to);
    } else {
      cand_parent = from_node;
      cand_g = from_g + dist(pos(from_node), to);
    }
    if (cand_g < g[to_node]) {
      g[to_node] = cand_g;
      parent[to_node] = cand_parent;
      open.push({cand_g + dist(to, goal), cand_g, to_node});
    }
  };

  g[start_node] = 0.0;
  closed[start_node] = 1;
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      int c = sc + dc, rr = sr + dr;
      if (c < 0 || rr < 0 || c >= map.width() || rr >= map.height()) continue;
      int cell = map.cell_index(c, rr);
      if (!pass[cell]) continue;
      relax(start_node, 0.0, cell);
    }
  }

  while (!open.empty()) {
    Entry e = open.top();
    open.pop();
    if (e.g != g[e.node] || closed[e.node]) continue;
    closed[e.node] = 1;
    if (e.node == goal_node) break;

    int c = e.node % map.width(), rr = e.node / map.width();
    for (const Move& m : kMoves) {
      if (!move_allowed(map, pass, c, rr, m)) continue;
      int ncell = map.cell_index(c + m.dc, rr + m.dr);
      if (closed[ncell]) continue;
      relax(e.node, e.g, ncell);
    }
    if (goal_adjacent[e.node] && !closed[goal_node]) relax(e.node, e.g, goal_node);
  }

  if (g[goal_node] == kInf) return std::nullopt;
  std::vector<Vec2> rev;
  for (int node = goal_node; node != kNone; node = parent[node]) rev.push_back(pos(node));
  Path path;
  path.waypoints.assign(rev.rbegin(), rev.rend());
  refine_path(map, r, path.waypoints);
  return path;
}

FieldCache::FieldCache(const GridMap& map, std::vector<Vec2> goals, double r)
    : map_(&map), goals_(std::move(goals)), radius_(r), fields_(goals_.size()) {}

const DistanceField& FieldCache::field(int g) const {
  auto& slot = fields_[g];
  if (!slot) {
    slot = std::make_unique<DistanceField>(build_distance_field(*map_, goals_[g], radius_));
  }
  return *slot;
}

double FieldCache::path_len_to(int g, const Vec2& p) const { return path_len(field(g), p); }

}  // namespace unav
