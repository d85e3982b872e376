#pragma once

#include <cstdint>
#include <vector>

#include "unav/grid_map.hpp"
#include "unav/vec2.hpp"

namespace unav {

// Reciprocal-velocity-obstacle half-plane constraint in velocity space.
// The internal line form permits velocities to the LEFT of `direction`.
struct OrcaLine {
  Vec2 point;
  Vec2 direction;
};

// Public constraint form: permitted velocities satisfy (v - point) . normal >= 0.
struct HalfPlane {
  Vec2 point;
  Vec2 normal;
  bool permits(const Vec2& v) const { return dot(v - point, normal) >= 0.0; }
};

inline HalfPlane to_half_plane(const OrcaLine& line) {
  return {line.point, perp_ccw(line.direction)};
}

// Minimal dynamic state the velocity solver needs.
struct BodyState {
  int id = 0;
  Vec2 position;
  Vec2 velocity;
};

struct NeighborView {
  int id = 0;
  Vec2 position;
  Vec2 velocity;
};

// Static obstacle boundary as linked vertex chains (from extract_obstacle_loops)
// with a per-cell bucket index for range queries.
class ObstacleIndex {
 public:
  struct Vertex {
    Vec2 point;
    Vec2 direction;  // unit direction toward the next vertex
    bool convex = false;
    int next = -1;
    int prev = -1;
  };

  ObstacleIndex() = default;
  explicit ObstacleIndex(const GridMap& map);

  bool empty() const { return vertices_.empty(); }
  const std::vector<Vertex>& vertices() const { return vertices_; }

  // Edge ids (edge i runs vertices[i] -> vertices[vertices[i].next]) within
  // `range` of p, sorted by (squared distance, id).
  void edges_near(const Vec2& p, double range, std::vector<int>& out) const;

 private:
  std::vector<Vertex> vertices_;
  int width_ = 0;
  int height_ = 0;
  double bucket_slack_ = 2.0;
  std::vector<std::vector<int>> buckets_;
};

// Agent-agent constraint with the reciprocity factor 1/2. Coincident positions
// fall back to a deterministic id-derived separation direction.
OrcaLine agent_orca_line(const BodyState& self, const BodyState& other, double r_safe,
                         double tau);
HalfPlane orca_halfplane(const BodyState& self, const BodyState& other, double r_safe,
                         double tau);

// Constraints induced by obstacle edges near the agent (never relaxed later).
std::vector<OrcaLine> obstacle_orca_lines(const ObstacleIndex& obstacles, const BodyState& self,
                                          double r_safe, double tau_obst, double u_max);

// Velocity closest to v_pref inside all half-planes and the u_max disk.
// When the agent constraints are infeasible, minimizes the maximum violation
// while keeping the first num_obstacle_lines constraints hard.
Vec2 solve_velocity(const std::vector<OrcaLine>& lines, std::size_t num_obstacle_lines,
                    double u_max, const Vec2& v_pref);

Vec2 compute_action(const BodyState& self, const std::vector<NeighborView>& neighbors,
                    const ObstacleIndex& obstacles, const Vec2& v_pref, double r_safe,
                    double u_max, double tau_agent, double tau_obst);

}  // namespace unav
