#include "unav/orca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace unav {

namespace {

constexpr double kEps = 1e-10;

double sqr(double v) { return v * v; }

}  // namespace

ObstacleIndex::ObstacleIndex(const GridMap& map) : width_(map.width()), height_(map.height()) {
  for (const auto& loop : extract_obstacle_loops(map)) {
    int base = static_cast<int>(vertices_.size());
    int n = static_cast<int>(loop.size());
    for (int i = 0; i < n; ++i) {
      Vertex v;
      v.point = loop[i];
      v.next = base + (i + 1) % n;
      v.prev = base + (i + n - 1) % n;
      vertices_.push_back(v);
    }
    for (int i = 0; i < n; ++i) {
      Vertex& v = vertices_[base + i];
      v.direction = normalized(vertices_[v.next].point - v.point);
    }
    // Directions must all exist before turn angles can be classified.
    for (int i = 0; i < n; ++i) {
      Vertex& v = vertices_[base + i];
      // Obstacle interior lies left of the walk, so a left turn is a convex
      // corner of the obstacle.
      v.convex = det(vertices_[v.prev].direction, v.direction) > 0.0;
    }
  }

  buckets_.assign(static_cast<std::size_t>(width_) * height_, {});
  for (int e = 0; e < static_cast<int>(vertices_.size()); ++e) {
    const Vec2& a = vertices_[e].point;
    const Vec2& b = vertices_[vertices_[e].next].point;
    int c0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - bucket_slack_)));
    int c1 = std::min(width_ - 1, static_cast<int>(std::floor(std::max(a.x, b.x) + bucket_slack_)));
    int r0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - bucket_slack_)));
    int r1 = std::min(height_ - 1, static_cast<int>(std::floor(std::max(a.y, b.y) + bucket_slack_)));
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        if (dist_segment_rect(a, b, c, r, c + 1, r + 1) <= bucket_slack_) {
          buckets_[static_cast<std::size_t>(r) * width_ + c].push_back(e);
        }
      }
    }
  }
}

void ObstacleIndex::edges_near(const Vec2& p, double range, std::vector<int>& out) const {
  out.clear();
  if (vertices_.empty()) return;
  double range_sq = range * range;
  std::vector<std::pair<double, int>> found;
  auto consider = [&](int e) {
    const Vec2& a = vertices_[e].point;
    const Vec2& b = vertices_[vertices_[e].next].point;
    double d = dist_point_segment(p, a, b);
    if (d * d <= range_sq) found.emplace_back(d * d, e);
  };
  if (range <= bucket_slack_ && width_ > 0) {
    int c = std::clamp(static_cast<int>(std::floor(p.x)), 0, width_ - 1);
    int r = std::clamp(static_cast<int>(std::floor(p.y)), 0, height_ - 1);
    for (int e : buckets_[static_cast<std::size_t>(r) * width_ + c]) consider(e);
  } else {
    for (int e = 0; e < static_cast<int>(vertices_.size()); ++e) consider(e);
  }
  std::sort(found.begin(), found.end());
  for (auto& [d, e] : found) out.push_back(e);
}

namespace {

// Deterministic separation direction for exactly coincident agents.
Vec2 id_derived_direction(int a, int b) {
  std::uint64_t h = static_cast<std::uint64_t>(a) * 0x9E3779B97F4A7C15ull +
                    static_cast<std::uint64_t>(b) * 0xBF58476D1CE4E5B9ull;
  h ^= h >> 31;
  h *= 0x94D049BB133111EBull;
  h ^= h >> 29;
  double angle = static_cast<double>(h >> 11) * (6.283185307179586 / 9007199254740992.0);
  return {std::cos(angle), std::sin(angle)};
}

}  // namespace

OrcaLine agent_orca_line(const BodyState& self, const BodyState& other, double r_safe,
                         double tau) {
  Vec2 relative_position = other.position - self.position;
  if (relative_position.x == 0.0 && relative_position.y == 0.0) {
    Vec2 dir = id_derived_direction(std::min(self.id, other.id), std::max(self.id, other.id));
    double sign = self.id == std::min(self.id, other.id) ? 1.0 : -1.0;
    relative_position = dir * (1e-6 * sign);
  }
  Vec2 relative_velocity = self.velocity - other.velocity;
  double dist_sq = norm_sq(relative_position);
  double combined_radius = 2.0 * r_safe;
  double combined_radius_sq = sqr(combined_radius);

  OrcaLine line;
  Vec2 u;
  if (dist_sq > combined_radius_sq) {
    // No current overlap: constrain against the VO truncated at horizon tau.
    Vec2 w = relative_velocity - relative_position / tau;
    double w_length_sq = norm_sq(w);
    double dot_product = dot(w, relative_position);
    if (dot_product < 0.0 && sqr(dot_product) > combined_radius_sq * w_length_sq) {
      // Project on the cutoff circle.
      double w_length = std::sqrt(w_length_sq);
      Vec2 unit_w = w / w_length;
      line.direction = {unit_w.y, -unit_w.x};
      u = unit_w * (combined_radius / tau - w_length);
    } else {
      // Project on a leg of the cone.
      double leg = std::sqrt(dist_sq - combined_radius_sq);
      if (det(relative_position, w) > 0.0) {
        line.direction = Vec2{relative_position.x * leg - relative_position.y * combined_radius,
                              relative_position.x * combined_radius + relative_position.y * leg} /
                         dist_sq;
      } else {
        line.direction = -Vec2{relative_position.x * leg + relative_position.y * combined_radius,
                               -relative_position.x * combined_radius + relative_position.y * leg} /
                         dist_sq;
      }
      u = line.direction * dot(relative_velocity, line.direction) - relative_velocity;
    }
  } else {
    // Already overlapping: push apart within a single unit time step.
    double inv_time_step = 1.0;
    Vec2 w = relative_velocity - relative_position * inv_time_step;
    double w_length = norm(w);
    Vec2 unit_w = w / w_length;
    line.direction = {unit_w.y, -unit_w.x};
    u = unit_w * (combined_radius * inv_time_step - w_length);
  }
  line.point = self.velocity + u * 0.5;
  return line;
}

HalfPlane orca_halfplane(const BodyState& self, const BodyState& other, double r_safe,
                         double tau) {
  return to_half_plane(agent_orca_line(self, other, r_safe, tau));
}

std::vector<OrcaLine> obstacle_orca_lines(const ObstacleIndex& obstacles, const BodyState& self,
                                          double r_safe, double tau_obst, double u_max) {
  std::vector<OrcaLine> lines;
  if (obstacles.empty()) return lines;

  const auto& verts = obstacles.vertices();
  double inv_tau = 1.0 / tau_obst;
  double radius = r_safe;
  double radius_sq = sqr(radius);
  const Vec2 position = self.position;
  const Vec2 velocity = self.velocity;

  std::vector<int> near;
  obstacles.edges_near(position, tau_obst * u_max + r_safe, near);

  for (int edge : near) {
    int i1 = edge;
    int i2 = verts[edge].next;

    Vec2 relative_position1 = verts[i1].point - position;
    Vec2 relative_position2 = verts[i2].point - position;

    bool already_covered = false;
    for (const OrcaLine& line : lines) {
      if (det(relative_position1 * inv_tau - line.point, line.direction) -
                  inv_tau * radius >= -kEps &&
          det(relative_position2 * inv_tau - line.point, line.direction) -
                  inv_tau * radius >= -kEps) {
        already_covered = true;
        break;
      }
    }
    if (already_covered) continue;

    double dist_sq1 = norm_sq(relative_position1);
    double dist_sq2 = norm_sq(relative_position2);
    Vec2 obstacle_vector = verts[i2].point - verts[i1].point;
    double s = dot(-relative_position1, obstacle_vector) / norm_sq(obstacle_vector);
    double dist_sq_line = norm_sq(-relative_position1 - obstacle_vector * s);

    OrcaLine line;
    if (s < 0.0 && dist_sq1 <= radius_sq) {
      // Collision with the left vertex; ignore if concave.
      if (verts[i1].convex) {
        line.point = {0.0, 0.0};
        line.direction = normalized(Vec2{-relative_position1.y, relative_position1.x});
        lines.push_back(line);
      }
      continue;
    }
    if (s > 1.0 && dist_sq2 <= radius_sq) {
      // Collision with the right vertex; handled by the neighboring edge
      // unless the vertex faces this way.
      if (verts[i2].convex && det(relative_position2, verts[i2].direction) >= 0.0) {
        line.point = {0.0, 0.0};
        line.direction = normalized(Vec2{-relative_position2.y, relative_position2.x});
        lines.push_back(line);
      }
      continue;
    }
    if (s >= 0.0 && s <= 1.0 && dist_sq_line <= radius_sq) {
      // Collision with the segment itself.
      line.point = {0.0, 0.0};
      line.direction = -verts[i1].direction;
      lines.push_back(line);
      continue;
    }

    Vec2 left_leg_direction, right_leg_direction;
    if (s < 0.0 && dist_sq_line <= radius_sq) {
      // Obliquely viewed so the left vertex defines the whole velocity obstacle.
      if (!verts[i1].convex) continue;
      i2 = i1;
      double leg1 = std::sqrt(dist_sq1 - radius_sq);
      left_leg_direction = Vec2{relative_position1.x * leg1 - relative_position1.y * radius,
                                relative_position1.x * radius + relative_position1.y * leg1} /
                           dist_sq1;
      right_leg_direction = Vec2{relative_position1.x * leg1 + relative_position1.y * radius,
                                 -relative_position1.x * radius + relative_position1.y * leg1} /
                            dist_sq1;
    } else if (s > 1.0 && dist_sq_line <= radius_sq) {
      if (!verts[i2].convex) continue;
      i1 = i2;
      double leg2 = std::sqrt(dist_sq2 - radius_sq);
      left_leg_direction = Vec2{relative_position2.x * leg2 - relative_position2.y * radius,
                                relative_position2.x * radius + relative_position2.y * leg2} /
                           dist_sq2;
      right_leg_direction = Vec2{relative_position2.x * leg2 + relative_position2.y * radius,
                                 -relative_position2.x * radius + relative_position2.y * leg2} /
                            dist_sq2;
    } else {
      if (verts[i1].convex) {
        double leg1 = std::sqrt(dist_sq1 - radius_sq);
        left_leg_direction = Vec2{relative_position1.x * leg1 - relative_position1.y * radius,
                                  relative_position1.x * radius + relative_position1.y * leg1} /
                             dist_sq1;
      } else {
        left_leg_direction = -verts[i1].direction;
      }
      if (verts[i2].convex) {
        double leg2 = std::sqrt(dist_sq2 - radius_sq);
        right_leg_direction = Vec2{relative_position2.x * leg2 + relative_position2.y * radius,
                                   -relative_position2.x * radius + relative_position2.y * leg2} /
                              dist_sq2;
      } else {
        right_leg_direction = verts[i1].direction;
      }
    }

    // Legs can never point into neighboring edges; replace them with the
    // neighbor's leg in that case and never base constraints on foreign legs.
    bool left_leg_foreign = false, right_leg_foreign = false;
    if (verts[i1].convex &&
        det(left_leg_direction, -verts[verts[i1].prev].direction) >= 0.0) {
      left_leg_direction = -verts[verts[i1].prev].direction;
      left_leg_foreign = true;
    }
    if (verts[i2].convex && det(right_leg_direction, verts[i2].direction) <= 0.0) {
      right_leg_direction = verts[i2].direction;
      right_leg_foreign = true;
    }

    Vec2 left_cutoff = (verts[i1].point - position) * inv_tau;
    Vec2 right_cutoff = (verts[i2].point - position) * inv_tau;
    Vec2 cutoff_vec = right_cutoff - left_cutoff;

    double t = (i1 == i2) ? 0.5 : dot(velocity - left_cutoff, cutoff_vec) / norm_sq(cutoff_vec);
    double t_left = dot(velocity - left_cutoff, left_leg_direction);
    double t_right = dot(velocity - right_cutoff, right_leg_direction);

    if ((t < 0.0 && t_left < 0.0) || (i1 == i2 && t_left < 0.0 && t_right < 0.0)) {
      Vec2 unit_w = normalized(velocity - left_cutoff);
      lines.push_back({left_cutoff + unit_w * (radius * inv_tau), {unit_w.y, -unit_w.x}});
      continue;
    }
    if (t > 1.0 && t_right < 0.0) {
      Vec2 unit_w = normalized(velocity - right_cutoff);
      lines.push_back({right_cutoff + unit_w * (radius * inv_tau), {unit_w.y, -unit_w.x}});
      continue;
    }

    double inf = std::numeric_limits<double>::infinity();
    double dist_sq_cutoff = (t < 0.0 || t > 1.0 || i1 == i2)
                                ? inf
                                : norm_sq(velocity - (left_cutoff + cutoff_vec * t));
    double dist_sq_left =
        t_left < 0.0 ? inf : norm_sq(velocity - (left_cutoff + left_leg_direction * t_left));
    double dist_sq_right =
        t_right < 0.0 ? inf : norm_sq(velocity - (right_cutoff + right_leg_direction * t_right));

    if (dist_sq_cutoff <= dist_sq_left && dist_sq_cutoff <= dist_sq_right) {
      line.direction = -verts[i1].direction;
      line.point = left_cutoff + perp_ccw(line.direction) * (radius * inv_tau);
      lines.push_back(line);
      continue;
    }
    if (dist_sq_left <= dist_sq_right) {
      if (left_leg_foreign) continue;
      line.direction = left_leg_direction;
      line.point = left_cutoff + perp_ccw(line.direction) * (radius * inv_tau);
      lines.push_back(line);
      continue;
    }
    if (right_leg_foreign) continue;
    line.direction = -right_leg_direction;
    line.point = right_cutoff + perp_ccw(line.direction) * (radius * inv_tau);
    lines.push_back(line);
  }
  return lines;
}

namespace {

bool linear_program1(const std::vector<OrcaLine>& lines, std::size_t line_no, double radius,
                     const Vec2& opt_velocity, bool direction_opt, Vec2& result) {
  double dot_product = dot(lines[line_no].point, lines[line_no].direction);
  double discriminant = sqr(dot_product) + sqr(radius) - norm_sq(lines[line_no].point);
  if (discriminant < 0.0) return false;  // max-speed circle misses this line

  double sqrt_discriminant = std::sqrt(discriminant);
  double t_left = -dot_product - sqrt_discriminant;
  double t_right = -dot_product + sqrt_discriminant;

  for (std::size_t i = 0; i < line_no; ++i) {
    double denominator = det(lines[line_no].direction, lines[i].direction);
    double numerator = det(lines[i].direction, lines[line_no].point - lines[i].point);
    if (std::fabs(denominator) <= kEps) {
      if (numerator < 0.0) return false;  // parallel and fully excluded
      continue;
    }
    double t = numerator / denominator;
    if (denominator >= 0.0) {
      t_right = std::min(t_right, t);
    } else {
      t_left = std::max(t_left, t);
    }
    if (t_left > t_right) return false;
  }

  if (direction_opt) {
    if (dot(opt_velocity, lines[line_no].direction) > 0.0) {
      result = lines[line_no].point + lines[line_no].direction * t_right;
    } else {
      result = lines[line_no].point + lines[line_no].direction * t_left;
    }
  } else {
    double t = dot(lines[line_no].direction, opt_velocity - lines[line_no].point);
    if (t < t_left) {
      result = lines[line_no].point + lines[line_no].direction * t_left;
    } else if (t > t_right) {
      result = lines[line_no].point + lines[line_no].direction * t_right;
    } else {
      result = lines[line_no].point + lines[line_no].direction * t;
    }
  }
  return true;
}

std::size_t linear_program2(const std::vector<OrcaLine>& lines, double radius,
                            const Vec2& opt_velocity, bool direction_opt, Vec2& result) {
  if (direction_opt) {
    result = opt_velocity * radius;  // opt_velocity is a unit direction here
  } else if (norm_sq(opt_velocity) > sqr(radius)) {
    result = normalized(opt_velocity) * radius;
  } else {
    result = opt_velocity;
  }

  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (det(lines[i].direction, lines[i].point - result) > 0.0) {
      Vec2 temp_result = result;
      if (!linear_program1(lines, i, radius, opt_velocity, direction_opt, result)) {
        result = temp_result;
        return i;
      }
    }
  }
  return lines.size();
}

void linear_program3(const std::vector<OrcaLine>& lines, std::size_t num_obst_lines,
                     std::size_t begin_line, double radius, Vec2& result) {
  double distance = 0.0;
  for (std::size_t i = begin_line; i < lines.size(); ++i) {
    if (det(lines[i].direction, lines[i].point - result) <= distance) continue;

    // Keep obstacle constraints hard; project agent constraints.
    std::vector<OrcaLine> proj_lines(lines.begin(),
                                     lines.begin() + static_cast<long>(num_obst_lines));
    for (std::size_t j = num_obst_lines; j < i; ++j) {
      OrcaLine line;
      double determinant = det(lines[i].direction, lines[j].direction);
      if (std::fabs(determinant) <= kEps) {
        if (dot(lines[i].direction, lines[j].direction) > 0.0) continue;
        line.point = (lines[i].point + lines[j].point) * 0.5;
      } else {
        line.point = lines[i].point +
                     lines[i].direction *
                         (det(lines[j].direction, lines[i].point - lines[j].point) / determinant);
      }
      line.direction = normalized(lines[j].direction - lines[i].direction);
      proj_lines.push_back(line);
    }

    Vec2 temp_result = result;
    if (linear_program2(proj_lines, radius,
                        Vec2{-lines[i].direction.y, lines[i].direction.x}, true,
                        result) < proj_lines.size()) {
      result = temp_result;
    }
    distance = det(lines[i].direction, lines[i].point - result);
  }
}

}  // namespace

Vec2 solve_velocity(const std::vector<OrcaLine>& lines, std::size_t num_obstacle_lines,
                    double u_max, const Vec2& v_pref) {
  Vec2 result;
  std::size_t line_fail = linear_program2(lines, u_max, v_pref, false, result);
  if (line_fail < lines.size()) {
    linear_program3(lines, num_obstacle_lines, line_fail, u_max, result);
  }
  return result;
}

Vec2 compute_action(const BodyState& self, const std::vector<NeighborView>& neighbors,
                    const ObstacleIndex& obstacles, const Vec2& v_pref, double r_safe,
                    double u_max, double tau_agent, double tau_obst) {
  std::vector<OrcaLine> lines = obstacle_orca_lines(obstacles, self, r_safe, tau_obst, u_max);
  std::size_t num_obstacle_lines = lines.size();

  std::vector<NeighborView> ordered = neighbors;
  std::sort(ordered.begin(), ordered.end(), [&](const NeighborView& a, const NeighborView& b) {
    double da = dist_sq(a.position, self.position), db = dist_sq(b.position, self.position);
    if (da != db) return da < db;
    return a.id < b.id;
  });

  // Exactly collinear mutual approach leaves the sequential program with a
  // symmetric tie and both agents stall; nudge the preferred velocity toward
  // the agent's own left so mirrored peers break to opposite world sides.
  Vec2 v_pref_adj = v_pref;
  double reach = 2.0 * r_safe + 2.0 * tau_agent * u_max;
  for (const NeighborView& nb : ordered) {
    Vec2 rel_pos = nb.position - self.position;
    double scale = norm(rel_pos) * norm(v_pref);
    if (scale == 0.0 || norm(rel_pos) > reach) continue;
    if (std::fabs(det(rel_pos, v_pref)) > 1e-12 * scale) continue;
    if (dot(rel_pos, v_pref) <= 0.0) continue;
    if (dot(self.velocity - nb.velocity, rel_pos) < 0.0) continue;
    v_pref_adj = rotated(v_pref, 0.01);
    break;
  }

  for (const NeighborView& nb : ordered) {
    BodyState other{nb.id, nb.position, nb.velocity};
    lines.push_back(agent_orca_line(self, other, r_safe, tau_agent));
  }
  return solve_velocity(lines, num_obstacle_lines, u_max, v_pref_adj);
}

}  // namespace unav
