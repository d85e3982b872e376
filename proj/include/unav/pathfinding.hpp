#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "unav/grid_map.hpp"
#include "unav/vec2.hpp"

namespace unav {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Path {
  std::vector<Vec2> waypoints;  // first = query start, last = query goal

  double length() const {
    double len = 0.0;
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
      len += dist(waypoints[i - 1], waypoints[i]);
    }
    return len;
  }
};

// Per-goal 8-connected shortest-path distances over cells whose centers keep
// clearance >= r; diagonal steps additionally require both orthogonal
// neighbors passable. Straight cost 1, diagonal sqrt(2), 0 at the goal cell.
struct DistanceField {
  Vec2 goal;
  int width = 0;
  int height = 0;
  std::vector<double> dist;  // kInf where blocked/unreachable

  double at_cell(int c, int r) const {
    if (c < 0 || r < 0 || c >= width || r >= height) return kInf;
    return dist[static_cast<std::size_t>(r) * width + c];
  }
};

DistanceField build_distance_field(const GridMap& map, const Vec2& goal, double r);

// Field value of p's cell plus the offset from p to that cell's center.
double path_len(const DistanceField& field, const Vec2& p);

// Any-angle (Theta*) path for a radius-r disk. Returns nullopt when no path
// exists; that mirrors path_len(...) == inf on the same map and radius.
std::optional<Path> construct_path(const GridMap& map, const Vec2& start, const Vec2& goal,
                                   double r);

// Lazily built distance fields, one per goal, shared by all agents of a run.
class FieldCache {
 public:
  FieldCache(const GridMap& map, std::vector<Vec2> goals, double r);

  int goal_count() const { return static_cast<int>(goals_.size()); }
  const Vec2& goal_point(int g) const { return goals_[g]; }
  const std::vector<Vec2>& goals() const { return goals_; }
  double radius() const { return radius_; }
  const GridMap& map() const { return *map_; }

  const DistanceField& field(int g) const;
  double path_len_to(int g, const Vec2& p) const;

 private:
  const GridMap* map_;
  std::vector<Vec2> goals_;
  double radius_;
  mutable std::vector<std::unique_ptr<DistanceField>> fields_;
};

}  // namespace unav
