#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "unav/vec2.hpp"

namespace unav {

// Axis-aligned unit-cell grid workspace. Cell (c, r) covers the square
// [c, c+1] x [r, r+1]; everything outside [0, width] x [0, height] is obstacle.
class GridMap {
 public:
  GridMap() = default;
  GridMap(int width, int height, std::vector<std::uint8_t> blocked);

  int width() const { return width_; }
  int height() const { return height_; }
  int cell_count() const { return width_ * height_; }

  // Cells outside the map count as blocked.
  bool blocked(int c, int r) const {
    if (c < 0 || r < 0 || c >= width_ || r >= height_) return true;
    return blocked_[static_cast<std::size_t>(r) * width_ + c] != 0;
  }
  bool free_cell(int c, int r) const { return !blocked(c, r); }

  int blocked_count() const;

  int cell_index(int c, int r) const { return r * width_ + c; }

  // Cell containing p; points on the far map edge map to the last row/column.
  void cell_of(const Vec2& p, int& c, int& r) const;
  Vec2 cell_center(int c, int r) const { return {c + 0.5, r + 0.5}; }

  bool in_bounds_point(const Vec2& p) const {
    return p.x >= 0.0 && p.y >= 0.0 && p.x <= width_ && p.y <= height_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> blocked_;
};

// Parse MovingAI .map text. '.'/'G' passable, '@'/'O'/'T'/'W' blocked.
// Throws std::runtime_error on malformed header, size mismatch or unknown char.
GridMap load_map(std::string_view text);

// Reads and parses a map file.
GridMap load_map_file(const std::string& path);

// True iff the closed disk of radius r at p lies inside free space
// (distance >= r to the map boundary and to every blocked cell).
bool disk_in_free_space(const GridMap& map, const Vec2& p, double r);

// True iff the capsule swept by a radius-r disk moving from a to b stays in
// free space.
bool segment_traversable(const GridMap& map, const Vec2& a, const Vec2& b, double r);

// Smallest distance from p to any obstacle (blocked cell or map boundary),
// capped at `cap` (cells farther than that are not scanned).
double point_obstacle_clearance(const GridMap& map, const Vec2& p, double cap);

// Closed boundary loops between free space and obstacles, collinear edges
// merged. Each loop is a corner sequence; walking consecutive corners keeps
// the obstacle region on the left and free space on the right.
std::vector<std::vector<Vec2>> extract_obstacle_loops(const GridMap& map);

// The loops flattened into directed segments (free space on the right).
std::vector<Segment> extract_obstacle_segments(const GridMap& map);

// Distance from segment [a,b] to the rectangle [x0,x1] x [y0,y1].
double dist_segment_rect(const Vec2& a, const Vec2& b, double x0, double y0, double x1, double y1);

}  // namespace unav
