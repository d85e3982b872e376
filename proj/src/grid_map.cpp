#include "unav/grid_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <stdexcept>

namespace unav {

GridMap::GridMap(int width, int height, std::vector<std::uint8_t> blocked)
    : width_(width), height_(height), blocked_(std::move(blocked)) {
  if (width_ <= 0 || height_ <= 0 ||
      blocked_.size() != static_cast<std::size_t>(width_) * height_) {
    throw std::runtime_error("GridMap: bad dimensions");
  }
}

int GridMap::blocked_count() const {
  int n = 0;
  for (auto b : blocked_) n += b != 0;
  return n;
}

void GridMap::cell_of(const Vec2& p, int& c, int& r) const {
  c = static_cast<int>(std::floor(p.x));
  r = static_cast<int>(std::floor(p.y));
  c = std::clamp(c, 0, width_ - 1);
  r = std::clamp(r, 0, height_ - 1);
}

namespace {

std::string next_line(std::istringstream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_map: unexpected end of file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

GridMap load_map(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line = next_line(in);
  if (line.rfind("type", 0) != 0) throw std::runtime_error("load_map: missing 'type' header");

  int width = -1, height = -1;
  for (int i = 0; i < 2; ++i) {
    line = next_line(in);
    std::istringstream ls(line);
    std::string key;
    int value = -1;
    ls >> key >> value;
    if (key == "height") height = value;
    else if (key == "width") width = value;
    else throw std::runtime_error("load_map: expected height/width, got '" + line + "'");
    if (value <= 0) throw std::runtime_error("load_map: non-positive " + key);
  }
  if (width <= 0 || height <= 0) throw std::runtime_error("load_map: missing height or width");

  line = next_line(in);
  if (line != "map") throw std::runtime_error("load_map: missing 'map' marker");

  std::vector<std::uint8_t> blocked(static_cast<std::size_t>(width) * height, 0);
  for (int r = 0; r < height; ++r) {
    line = next_line(in);
    if (static_cast<int>(line.size()) != width) {
      throw std::runtime_error("load_map: row " + std::to_string(r) + " has wrong length");
    }
    for (int c = 0; c < width; ++c) {
      char ch = line[c];
      bool b;
      switch (ch) {
        case '.': case 'G': b = false; break;
        case '@': case 'O': case 'T': case 'W': b = true; break;
        default:
          throw std::runtime_error(std::string("load_map: unknown cell character '") + ch + "'");
      }
      blocked[static_cast<std::size_t>(r) * width + c] = b ? 1 : 0;
    }
  }
  // Extra non-empty trailing rows indicate a row-count mismatch.
  std::string extra;
  while (std::getline(in, extra)) {
    if (!extra.empty() && extra.back() == '\r') extra.pop_back();
    if (!extra.empty()) throw std::runtime_error("load_map: more rows than 'height'");
  }
  return GridMap(width, height, std::move(blocked));
}

GridMap load_map_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open map file " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_map(text);
}

namespace {

double dist_point_rect(const Vec2& p, double x0, double y0, double x1, double y1) {
  double dx = std::max({x0 - p.x, 0.0, p.x - x1});
  double dy = std::max({y0 - p.y, 0.0, p.y - y1});
  return std::hypot(dx, dy);
}

}  // namespace

double dist_segment_rect(const Vec2& a, const Vec2& b, double x0, double y0, double x1,
                         double y1) {
  auto inside = [&](const Vec2& p) {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  };
  if (inside(a) || inside(b)) return 0.0;
  Vec2 c00{x0, y0}, c10{x1, y0}, c11{x1, y1}, c01{x0, y1};
  double m = dist_segment_segment(a, b, c00, c10);
  m = std::min(m, dist_segment_segment(a, b, c10, c11));
  m = std::min(m, dist_segment_segment(a, b, c11, c01));
  m = std::min(m, dist_segment_segment(a, b, c01, c00));
  return m;
}

bool disk_in_free_space(const GridMap& map, const Vec2& p, double r) {
  if (p.x - r < 0.0 || p.y - r < 0.0 || p.x + r > map.width() || p.y + r > map.height()) {
    return false;
  }
  int c0 = static_cast<int>(std::floor(p.x - r));
  int c1 = static_cast<int>(std::floor(p.x + r));
  int r0 = static_cast<int>(std::floor(p.y - r));
  int r1 = static_cast<int>(std::floor(p.y + r));
  for (int rr = r0; rr <= r1; ++rr) {
    for (int cc = c0; cc <= c1; ++cc) {
      if (cc < 0 || rr < 0 || cc >= map.width() || rr >= map.height()) continue;
      if (!map.blocked(cc, rr)) continue;
      if (dist_point_rect(p, cc, rr, cc + 1, rr + 1) < r) return false;
    }
  }
  return true;
}

double point_obstacle_clearance(const GridMap& map, const Vec2& p, double cap) {
  double best = cap;
  best = std::min(best, p.x);
  best = std::min(best, p.y);
  best = std::min(best, map.width() - p.x);
  best = std::min(best, map.height() - p.y);
  if (best < 0.0) return 0.0;
  int reach = static_cast<int>(std::ceil(cap)) + 1;
  int pc, pr;
  map.cell_of(p, pc, pr);
  for (int rr = pr - reach; rr <= pr + reach; ++rr) {
    for (int cc = pc - reach; cc <= pc + reach; ++cc) {
      if (cc < 0 || rr < 0 || cc >= map.width() || rr >= map.height()) continue;
      if (!map.blocked(cc, rr)) continue;
      best = std::min(best, dist_point_rect(p, cc, rr, cc + 1, rr + 1));
    }
  }
  return best;
}

bool segment_traversable(const GridMap& map, const Vec2& a, const Vec2& b, double r) {
  // A capsule is the convex hull of its end disks, so staying inside the
  // (convex) map rectangle reduces to the two end disks.
  auto disk_in_rect = [&](const Vec2& p) {
    return p.x - r >= 0.0 && p.y - r >= 0.0 && p.x + r <= map.width() &&
           p.y + r <= map.height();
  };
  if (!disk_in_rect(a) || !disk_in_rect(b)) return false;
  int c0 = static_cast<int>(std::floor(std::min(a.x, b.x) - r));
  int c1 = static_cast<int>(std::floor(std::max(a.x, b.x) + r));
  int r0 = static_cast<int>(std::floor(std::min(a.y, b.y) - r));
  int r1 = static_cast<int>(std::floor(std::max(a.y, b.y) + r));
  c0 = std::max(c0, 0);
  r0 = std::max(r0, 0);
  c1 = std::min(c1, map.width() - 1);
  r1 = std::min(r1, map.height() - 1);
  for (int rr = r0; rr <= r1; ++rr) {
    for (int cc = c0; cc <= c1; ++cc) {
      if (!map.blocked(cc, rr)) continue;
      if (dist_segment_rect(a, b, cc, rr, cc + 1, rr + 1) < r) return false;
    }
  }
  return true;
}

namespace {

// Directed boundary edge on the unit lattice, obstacle on its left.
struct BoundaryEdge {
  Vec2 from, to;
  Vec2 dir;  // unit axis direction
};

}  // namespace

std::vector<std::vector<Vec2>> extract_obstacle_loops(const GridMap& map) {
  int w = map.width(), h = map.height();
  std::vector<BoundaryEdge> edges;
  // Vertical lattice edges x = c between cells (c-1, r) and (c, r).
  for (int c = 0; c <= w; ++c) {
    for (int r = 0; r < h; ++r) {
      bool left = map.blocked(c - 1, r);
      bool right = map.blocked(c, r);
      if (left == right) continue;
      if (left) {
        edges.push_back({{double(c), double(r)}, {double(c), double(r + 1)}, {0, 1}});
      } else {
        edges.push_back({{double(c), double(r + 1)}, {double(c), double(r)}, {0, -1}});
      }
    }
  }
  // Horizontal lattice edges y = r between cells (c, r-1) and (c, r).
  for (int r = 0; r <= h; ++r) {
    for (int c = 0; c < w; ++c) {
      bool below = map.blocked(c, r - 1);
      bool above = map.blocked(c, r);
      if (below == above) continue;
      if (below) {
        edges.push_back({{double(c + 1), double(r)}, {double(c), double(r)}, {-1, 0}});
      } else {
        edges.push_back({{double(c), double(r)}, {double(c + 1), double(r)}, {1, 0}});
      }
    }
  }

  // Chain edges into loops. Key lattice points to index outgoing edges.
  auto key = [&](const Vec2& p) {
    return static_cast<long long>(std::llround(p.y)) * (w + 1) +
           static_cast<long long>(std::llround(p.x));
  };
  std::map<long long, std::vector<int>> outgoing;
  for (int i = 0; i < static_cast<int>(edges.size()); ++i) {
    outgoing[key(edges[i].from)].push_back(i);
  }
  std::vector<char> used(edges.size(), 0);

  auto pick_next = [&](int cur) {
    auto it = outgoing.find(key(edges[cur].to));
    if (it == outgoing.end()) return -1;
    int best = -1;
    double best_turn = -2.0;
    for (int cand : it->second) {
      if (used[cand]) continue;
      // Prefer the sharpest left turn so each loop hugs a single obstacle
      // component at checkerboard pinch points.
      double turn = det(edges[cur].dir, edges[cand].dir);
      if (turn > best_turn) {
        best_turn = turn;
        best = cand;
      }
    }
    return best;
  };

  std::vector<std::vector<Vec2>> loops;
  for (int start = 0; start < static_cast<int>(edges.size()); ++start) {
    if (used[start]) continue;
    std::vector<int> loop_edges;
    int cur = start;
    while (cur >= 0 && !used[cur]) {
      used[cur] = 1;
      loop_edges.push_back(cur);
      cur = pick_next(cur);
    }
    // Merge collinear runs into corner points.
    std::vector<Vec2> corners;
    int n = static_cast<int>(loop_edges.size());
    for (int i = 0; i < n; ++i) {
      const BoundaryEdge& prev = edges[loop_edges[(i + n - 1) % n]];
      const BoundaryEdge& e = edges[loop_edges[i]];
      if (prev.dir.x != e.dir.x || prev.dir.y != e.dir.y) corners.push_back(e.from);
    }
    loops.push_back(std::move(corners));
  }
  return loops;
}

std::vector<Segment> extract_obstacle_segments(const GridMap& map) {
  std::vector<Segment> out;
  for (const auto& loop : extract_obstacle_loops(map)) {
    std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back({loop[i], loop[(i + 1) % n]});
    }
  }
  return out;
}

}  // namespace unav
