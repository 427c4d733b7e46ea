#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowco/error.hpp"
#include "flowco/flowgraph.hpp"
#include "flowco/image.hpp"
#include "flowco/render.hpp"

namespace flowco {

struct VisionOptions {
  int threshold = 128;
  double snap_radius = 10;   // pixels, arrow endpoint to shape boundary
  double label_radius = 30;  // pixels, branch label to arrow tail
};

struct ShapeDetection {
  BlockKind kind = BlockKind::Process;
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  std::vector<Point> polygon;  // pixel coordinates
};

struct ArrowDetection {
  Point tail;
  Point head;
  EdgeLabel label = EdgeLabel::Unlabeled;
  std::size_t src = 0;  // indices into the shape list
  std::size_t dst = 0;
  std::optional<std::size_t> label_box;  // index into the OCR boxes
};

namespace detail {

struct Component {
  std::vector<std::size_t> pixels;  // y * width + x
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive bbox

  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
};

inline std::vector<std::uint8_t> binarize(const GrayImage& img, int threshold) {
  std::vector<std::uint8_t> ink(img.pixels.size());
  for (std::size_t i = 0; i < ink.size(); ++i) ink[i] = img.pixels[i] < threshold ? 1 : 0;
  return ink;
}

// 8-connected components of the mask; `labels` receives the component index
// or -1.
inline std::vector<Component> components(const std::vector<std::uint8_t>& mask, int width, int height,
                                         std::vector<int>& labels) {
  labels.assign(mask.size(), -1);
  std::vector<Component> out;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (!mask[start] || labels[start] >= 0) continue;
    Component c;
    const int id = static_cast<int>(out.size());
    c.x0 = c.x1 = static_cast<int>(start % width);
    c.y0 = c.y1 = static_cast<int>(start / width);
    labels[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      c.pixels.push_back(p);
      const int x = static_cast<int>(p % width), y = static_cast<int>(p / width);
      c.x0 = std::min(c.x0, x), c.x1 = std::max(c.x1, x), c.y0 = std::min(c.y0, y), c.y1 = std::max(c.y1, y);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
          const std::size_t q = static_cast<std::size_t>(ny) * width + nx;
          if (mask[q] && labels[q] < 0) {
            labels[q] = id;
            stack.push_back(q);
          }
        }
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

// Local mask of one component with a one-pixel border.
struct Patch {
  int x0 = 0, y0 = 0, w = 0, h = 0;
  std::vector<std::uint8_t> on;

  bool at(int x, int y) const {
    x -= x0, y -= y0;
    return x >= 0 && y >= 0 && x < w && y < h && on[static_cast<std::size_t>(y) * w + x];
  }
};

inline Patch patch_of(const Component& c, int width) {
  Patch p{c.x0 - 1, c.y0 - 1, c.width() + 2, c.height() + 2, {}};
  p.on.assign(static_cast<std::size_t>(p.w) * p.h, 0);
  for (auto px : c.pixels) {
    const int x = static_cast<int>(px % width) - p.x0, y = static_cast<int>(px / width) - p.y0;
    p.on[static_cast<std::size_t>(y) * p.w + x] = 1;
  }
  return p;
}

// Upper bound on enclosed_fraction: an enclosed pixel has ink on both sides
// in its row and in its column.
inline double enclosed_bound(const Patch& p) {
  std::vector<int> row_lo(static_cast<std::size_t>(p.h), p.w), row_hi(static_cast<std::size_t>(p.h), -1);
  std::vector<int> col_lo(static_cast<std::size_t>(p.w), p.h), col_hi(static_cast<std::size_t>(p.w), -1);
  for (int y = 0; y < p.h; ++y) {
    for (int x = 0; x < p.w; ++x) {
      if (!p.on[static_cast<std::size_t>(y) * p.w + x]) continue;
      row_lo[y] = std::min(row_lo[y], x), row_hi[y] = std::max(row_hi[y], x);
      col_lo[x] = std::min(col_lo[x], y), col_hi[x] = std::max(col_hi[x], y);
    }
  }
  std::size_t count = 0;
  for (int y = 0; y < p.h; ++y) {
    for (int x = row_lo[y] + 1; x < row_hi[y]; ++x) count += y > col_lo[x] && y < col_hi[x];
  }
  return static_cast<double>(count) / (static_cast<double>(p.w - 2) * (p.h - 2));
}

// Fraction of the bbox enclosed by the component (not reachable from outside).
inline double enclosed_fraction(const Patch& p) {
  std::vector<std::uint8_t> outside(p.on.size(), 0);
  std::vector<std::size_t> stack{0};
  outside[0] = 1;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const int x = static_cast<int>(i % p.w), y = static_cast<int>(i / p.w);
    const int nbr[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto& d : nbr) {
      const int nx = x + d[0], ny = y + d[1];
      if (nx < 0 || ny < 0 || nx >= p.w || ny >= p.h) continue;
      const std::size_t q = static_cast<std::size_t>(ny) * p.w + nx;
      if (!p.on[q] && !outside[q]) {
        outside[q] = 1;
        stack.push_back(q);
      }
    }
  }
  std::size_t interior = 0;
  for (std::size_t i = 0; i < p.on.size(); ++i) interior += !p.on[i] && !outside[i];
  return static_cast<double>(interior) / (static_cast<double>(p.w - 2) * (p.h - 2));
}

inline std::vector<int> horizontal_runs(const Patch& p) {
  std::vector<int> runs;
  for (int y = 0; y < p.h; ++y) {
    int run = 0;
    for (int x = 0; x < p.w; ++x) {
      if (p.on[static_cast<std::size_t>(y) * p.w + x]) {
        ++run;
      } else if (run) {
        runs.push_back(run);
        run = 0;
      }
    }
  }
  return runs;
}

// Moore-neighbour tracing of the outer boundary, clockwise from the first
// pixel in raster order.
inline std::vector<Point> outer_contour(const Patch& p) {
  static constexpr int kDx[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
  static constexpr int kDy[8] = {0, -1, -1, -1, 0, 1, 1, 1};
  int sx = -1, sy = -1;
  for (int y = 0; y < p.h && sx < 0; ++y) {
    for (int x = 0; x < p.w; ++x) {
      if (p.on[static_cast<std::size_t>(y) * p.w + x]) {
        sx = x, sy = y;
        break;
      }
    }
  }
  std::vector<Point> out;
  if (sx < 0) return out;
  auto on = [&](int x, int y) { return x >= 0 && y >= 0 && x < p.w && y < p.h && p.on[static_cast<std::size_t>(y) * p.w + x]; };
  int x = sx, y = sy, back = 0;  // backtrack direction index (west of start is empty)
  const std::size_t guard = p.on.size() * 4 + 16;
  int first_dir = -1;
  for (std::size_t step = 0; step < guard; ++step) {
    out.push_back({static_cast<double>(x + p.x0), static_cast<double>(y + p.y0)});
    int found = -1;
    for (int i = 1; i <= 8; ++i) {
      const int d = (back + i) % 8;
      if (on(x + kDx[d], y + kDy[d])) {
        found = d;
        break;
      }
    }
    if (found < 0) break;  // isolated pixel
    if (x == sx && y == sy) {
      if (first_dir < 0) {
        first_dir = found;
      } else if (found == first_dir) {
        out.pop_back();
        break;
      }
    }
    // The empty neighbour checked just before `found` becomes the backtrack.
    const int bx = x + kDx[(found + 7) % 8], by = y + kDy[(found + 7) % 8];
    x += kDx[found], y += kDy[found];
    for (int d = 0; d < 8; ++d) {
      if (x + kDx[d] == bx && y + kDy[d] == by) {
        back = d;
        break;
      }
    }
  }
  return out;
}

inline double point_line_distance(Point p, Point a, Point b) {
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  if (len == 0) return std::hypot(p.x - a.x, p.y - a.y);
  return std::abs((b.x - a.x) * (a.y - p.y) - (a.x - p.x) * (b.y - a.y)) / len;
}

// Recursive farthest-point splitting of pts[first..last]; appends interior
// vertices in order.
inline void split_chain(const std::vector<Point>& pts, std::size_t first, std::size_t last, double eps,
                        std::vector<Point>& out) {
  if (last <= first + 1) return;
  double best = -1;
  std::size_t at = first;
  for (std::size_t i = first + 1; i < last; ++i) {
    const double d = point_line_distance(pts[i], pts[first], pts[last]);
    if (d > best) best = d, at = i;
  }
  if (best <= eps) return;
  split_chain(pts, first, at, eps, out);
  out.push_back(pts[at]);
  split_chain(pts, at, last, eps, out);
}

inline std::vector<Point> simplify_closed(const std::vector<Point>& contour, double eps) {
  const std::size_t n = contour.size();
  if (n < 4) return contour;
  Point c{0, 0};
  for (const auto& p : contour) c.x += p.x, c.y += p.y;
  c.x /= static_cast<double>(n), c.y /= static_cast<double>(n);
  auto farthest = [&](Point from) {
    std::size_t best = 0;
    double d = -1;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = std::hypot(contour[i].x - from.x, contour[i].y - from.y);
      if (e > d) d = e, best = i;
    }
    return best;
  };
  const std::size_t a = farthest(c);
  const std::size_t b = farthest(contour[a]);
  // Rotate so that a is first; b lands at index m.
  std::vector<Point> ring(contour.begin() + static_cast<std::ptrdiff_t>(a), contour.end());
  ring.insert(ring.end(), contour.begin(), contour.begin() + static_cast<std::ptrdiff_t>(a));
  const std::size_t m = (b + n - a) % n;
  ring.push_back(ring.front());
  std::vector<Point> out{ring[0]};
  split_chain(ring, 0, m, eps, out);
  out.push_back(ring[m]);
  split_chain(ring, m, n, eps, out);
  return out;
}

inline double axis_deviation_deg(Point a, Point b) {
  const double ang = std::atan2(std::abs(b.y - a.y), std::abs(b.x - a.x)) * 180.0 / M_PI;
  return std::min(ang, 90.0 - ang);
}

inline double line_angle_diff_deg(Point a0, Point a1, Point b0, Point b1) {
  double d = std::abs(std::atan2(a1.y - a0.y, a1.x - a0.x) - std::atan2(b1.y - b0.y, b1.x - b0.x)) * 180.0 / M_PI;
  d = std::fmod(d, 180.0);
  return std::min(d, 180.0 - d);
}

inline std::optional<BlockKind> classify_quad(const std::vector<Point>& v) {
  constexpr double kTol = 3.0;
  bool sides_axis = true;
  for (std::size_t i = 0; i < 4; ++i) sides_axis = sides_axis && axis_deviation_deg(v[i], v[(i + 1) % 4]) <= kTol;
  if (sides_axis) return BlockKind::Process;
  if (axis_deviation_deg(v[0], v[2]) <= kTol && axis_deviation_deg(v[1], v[3]) <= kTol) return BlockKind::Decision;
  if (line_angle_diff_deg(v[0], v[1], v[2], v[3]) <= kTol && line_angle_diff_deg(v[1], v[2], v[3], v[0]) <= kTol) {
    return BlockKind::InputOutput;
  }
  return std::nullopt;
}

inline double distance_to_boundary(Point p, const std::vector<Point>& poly) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    best = std::min(best, segment_distance(p, poly[i], poly[(i + 1) % poly.size()]));
  }
  return best;
}

struct ShapeAnalysis {
  std::vector<ShapeDetection> shapes;
  std::vector<int> component_of_shape;
  std::vector<Component> comps;
  std::vector<int> labels;
  std::vector<std::uint8_t> ink;
  int stroke = 2;
  std::vector<std::string> warnings;
};

inline std::string bbox_string(int x, int y, int w, int h) {
  return "(" + std::to_string(x) + ", " + std::to_string(y) + ", " + std::to_string(w) + ", " + std::to_string(h) + ")";
}

inline ShapeAnalysis analyse_shapes(const GrayImage& img, const VisionOptions& opts) {
  ShapeAnalysis a;
  a.ink = binarize(img, opts.threshold);
  a.comps = components(a.ink, img.width, img.height, a.labels);

  struct Candidate {
    std::size_t comp;
    Patch patch;
  };
  std::vector<Candidate> holey;
  int largest = 0;
  for (std::size_t i = 0; i < a.comps.size(); ++i) {
    const auto& c = a.comps[i];
    if (std::min(c.width(), c.height()) < 8) continue;
    Patch p = patch_of(c, img.width);
    if (enclosed_bound(p) < 0.4 || enclosed_fraction(p) < 0.4) continue;
    largest = std::max(largest, std::min(c.width(), c.height()));
    holey.push_back({i, std::move(p)});
  }
  // Glyphs with counters (o, 0, B...) are far smaller than any block.
  std::erase_if(holey, [&](const Candidate& c) {
    return 4 * std::min(a.comps[c.comp].width(), a.comps[c.comp].height()) < largest;
  });

  int stroke = 0;
  for (const auto& c : holey) {
    auto runs = horizontal_runs(c.patch);
    if (runs.empty()) continue;
    std::nth_element(runs.begin(), runs.begin() + static_cast<std::ptrdiff_t>(runs.size() / 4), runs.end());
    const int q = runs[runs.size() / 4];
    stroke = stroke == 0 ? q : std::min(stroke, q);
  }
  a.stroke = std::max(1, stroke == 0 ? 2 : stroke);

  for (const auto& cand : holey) {
    const auto& c = a.comps[cand.comp];
    const auto contour = outer_contour(cand.patch);
    if (contour.size() < 8) continue;
    ShapeDetection s;
    s.x = c.x0, s.y = c.y0, s.w = c.width(), s.h = c.height();

    // Axis-aligned ellipse fitted to the contour's extent.
    const double cx = (c.x0 + c.x1) / 2.0, cy = (c.y0 + c.y1) / 2.0;
    const double rx = (c.x1 - c.x0) / 2.0, ry = (c.y1 - c.y0) / 2.0;
    double residual = 0;
    for (const auto& p : contour) residual += std::abs(std::hypot((p.x - cx) / rx, (p.y - cy) / ry) - 1);
    residual /= static_cast<double>(contour.size());
    if (residual < 0.02) {
      s.kind = BlockKind::Terminal;
      for (int k = 0; k < 64; ++k) {
        const double t = 2 * M_PI * k / 64;
        s.polygon.push_back({cx + (rx + 0.5) * std::cos(t), cy + (ry + 0.5) * std::sin(t)});
      }
    } else {
      double perimeter = 0;
      for (std::size_t i = 0; i < contour.size(); ++i) {
        const auto& p = contour[i];
        const auto& q = contour[(i + 1) % contour.size()];
        perimeter += std::hypot(q.x - p.x, q.y - p.y);
      }
      auto poly = simplify_closed(contour, 0.02 * perimeter);
      std::optional<BlockKind> kind;
      if (poly.size() == 4) kind = classify_quad(poly);
      if (!kind) {
        a.warnings.push_back("UnclassifiableComponent " + bbox_string(s.x, s.y, s.w, s.h) + " with " +
                             std::to_string(poly.size()) + " vertices");
        continue;
      }
      s.kind = *kind;
      s.polygon = std::move(poly);
    }
    a.shapes.push_back(std::move(s));
    a.component_of_shape.push_back(static_cast<int>(cand.comp));
  }

  // Top to bottom, then left to right.
  std::vector<std::size_t> order(a.shapes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return std::pair(a.shapes[l].y, a.shapes[l].x) < std::pair(a.shapes[r].y, a.shapes[r].x);
  });
  std::vector<ShapeDetection> shapes;
  std::vector<int> comp_of;
  for (auto i : order) {
    shapes.push_back(std::move(a.shapes[i]));
    comp_of.push_back(a.component_of_shape[i]);
  }
  a.shapes = std::move(shapes);
  a.component_of_shape = std::move(comp_of);
  return a;
}

}  // namespace detail

/// Finds and classifies block outlines. Components that look like blocks
/// but fit no shape class are reported through `warnings`.
inline std::vector<ShapeDetection> detect_shapes(const GrayImage& img, const VisionOptions& opts = {},
                                                 std::vector<std::string>* warnings = nullptr) {
  auto a = detail::analyse_shapes(img, opts);
  if (warnings) warnings->insert(warnings->end(), a.warnings.begin(), a.warnings.end());
  return std::move(a.shapes);
}

namespace detail {

inline std::optional<EdgeLabel> branch_label(std::string text) {
  std::string t;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (t == "yes") return EdgeLabel::Yes;
  if (t == "no") return EdgeLabel::No;
  return std::nullopt;
}

inline double box_distance(Point p, const OcrBox& b) {
  const double dx = std::max({b.x - p.x, 0.0, p.x - (b.x + b.w)});
  const double dy = std::max({b.y - p.y, 0.0, p.y - (b.y + b.h)});
  return std::hypot(dx, dy);
}

}  // namespace detail

namespace detail {

inline std::vector<ArrowDetection> arrows_from(const GrayImage& img, const ShapeAnalysis& a,
                                               const std::vector<ShapeDetection>& shapes, const std::vector<OcrBox>& ocr,
                                               const VisionOptions& opts) {
  const int W = img.width, H = img.height;
  std::vector<std::uint8_t> residual = a.ink;
  for (const auto& c : a.comps) {
    const bool is_shape = std::any_of(shapes.begin(), shapes.end(), [&](const ShapeDetection& s) {
      return s.x == c.x0 && s.y == c.y0 && s.w == c.width() && s.h == c.height();
    });
    if (is_shape) {
      for (auto p : c.pixels) residual[p] = 0;
    }
  }
  for (const auto& s : shapes) {
    for (int y = std::max(0, s.y); y < std::min(H, s.y + s.h); ++y) {
      for (int x = std::max(0, s.x); x < std::min(W, s.x + s.w); ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * W + x;
        if (residual[i] && detail::point_in_polygon({double(x), double(y)}, s.polygon)) residual[i] = 0;
      }
    }
  }
  auto ink = [&](int x, int y) { return x >= 0 && y >= 0 && x < W && y < H && residual[static_cast<std::size_t>(y) * W + x]; };
  auto run = [&](int x, int y, int dx, int dy) {
    int n = 0;
    while (ink(x + dx * (n + 1), y + dy * (n + 1))) ++n;
    return n;
  };

  // Erosion by a square one pixel wider on each side than a line.
  const int k = a.stroke + 2, lo = k / 2;
  std::vector<long> integral(static_cast<std::size_t>(W + 1) * (H + 1), 0);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      integral[static_cast<std::size_t>(y + 1) * (W + 1) + x + 1] = residual[static_cast<std::size_t>(y) * W + x] +
                                                                    integral[static_cast<std::size_t>(y) * (W + 1) + x + 1] +
                                                                    integral[static_cast<std::size_t>(y + 1) * (W + 1) + x] -
                                                                    integral[static_cast<std::size_t>(y) * (W + 1) + x];
    }
  }
  std::vector<std::uint8_t> eroded(residual.size(), 0);
  for (int y = lo; y + k - lo <= H; ++y) {
    for (int x = lo; x + k - lo <= W; ++x) {
      const int x0 = x - lo, y0 = y - lo, x1 = x0 + k, y1 = y0 + k;
      const long sum = integral[static_cast<std::size_t>(y1) * (W + 1) + x1] - integral[static_cast<std::size_t>(y0) * (W + 1) + x1] -
                       integral[static_cast<std::size_t>(y1) * (W + 1) + x0] + integral[static_cast<std::size_t>(y0) * (W + 1) + x0];
      eroded[static_cast<std::size_t>(y) * W + x] = sum == static_cast<long>(k) * k;
    }
  }
  std::vector<int> head_labels;
  const auto heads = detail::components(eroded, W, H, head_labels);

  auto snap = [&](Point p, const char* what) {
    std::size_t best = 0;
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      const double d = detail::distance_to_boundary(p, shapes[i].polygon);
      if (d < dist) dist = d, best = i;
    }
    if (dist > opts.snap_radius) {
      throw Error(ErrorKind::DanglingArrow, std::string("arrow ") + what + " at (" + detail::num(p.x) + ", " +
                                                detail::num(p.y) + ") is not within " +
                                                detail::num(opts.snap_radius) + "px of any block");
    }
    return best;
  };

  static constexpr int kDirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  const int half = (a.stroke + 1) / 2;
  std::vector<ArrowDetection> out;
  for (const auto& blob : heads) {
    double sx = 0, sy = 0;
    for (auto p : blob.pixels) sx += static_cast<double>(p % W), sy += static_cast<double>(p / W);
    int cx = static_cast<int>(std::lround(sx / static_cast<double>(blob.pixels.size())));
    int cy = static_cast<int>(std::lround(sy / static_cast<double>(blob.pixels.size())));

    int back = 0, longest = -1;
    for (int d = 0; d < 4; ++d) {
      const int r = run(cx, cy, kDirs[d][0], kDirs[d][1]);
      if (r > longest) longest = r, back = d;
    }
    int dx = kDirs[back][0], dy = kDirs[back][1];
    const int tip_run = run(cx, cy, -dx, -dy);
    const Point tip{double(cx - dx * tip_run), double(cy - dy * tip_run)};

    int x = cx, y = cy;
    Point tail;
    const std::size_t guard = static_cast<std::size_t>(W) * H;
    for (std::size_t step = 0;; ++step) {
      if (step > guard) throw Error(ErrorKind::DanglingArrow, "arrow trace did not terminate");
      while (ink(x + dx, y + dy)) x += dx, y += dy;
      x -= dx * half, y -= dy * half;
      int turn_dx = 0, turn_dy = 0, turn_run = a.stroke + 2;
      for (int sign : {1, -1}) {
        const int qx = dy * sign, qy = dx * sign;
        const int r = run(x, y, qx, qy);
        if (r > turn_run) turn_run = r, turn_dx = qx, turn_dy = qy;
      }
      if (turn_dx == 0 && turn_dy == 0) {
        tail = {double(x), double(y)};
        break;
      }
      dx = turn_dx, dy = turn_dy;
    }

    ArrowDetection arrow;
    arrow.tail = tail;
    arrow.head = tip;
    arrow.src = snap(tail, "tail");
    arrow.dst = snap(tip, "head");
    double nearest = opts.label_radius;
    for (std::size_t b = 0; b < ocr.size(); ++b) {
      const auto label = detail::branch_label(ocr[b].text);
      if (!label) continue;
      const double d = detail::box_distance({tail.x + 0.5, tail.y + 0.5}, ocr[b]);
      if (d <= nearest) nearest = d, arrow.label = *label, arrow.label_box = b;
    }
    out.push_back(std::move(arrow));
  }
  std::stable_sort(out.begin(), out.end(), [](const ArrowDetection& l, const ArrowDetection& r) {
    return std::tuple(l.src, l.dst, static_cast<int>(l.label)) < std::tuple(r.src, r.dst, static_cast<int>(r.label));
  });
  return out;
}

}  // namespace detail

/// Traces arrows in the ink left after removing blocks and their text.
/// Heads are the blobs that survive an erosion wider than a line; each arrow
/// is followed back from its head along the orthogonal centreline, going
/// straight through crossings. Endpoints snap to the nearest block.
inline std::vector<ArrowDetection> detect_arrows(const GrayImage& img, const std::vector<ShapeDetection>& shapes,
                                                 const std::vector<OcrBox>& ocr = {},
                                                 const VisionOptions& opts = {}) {
  return detail::arrows_from(img, detail::analyse_shapes(img, opts), shapes, ocr, opts);
}

/// Parses the OCR adapter's JSON array of boxes.
inline std::vector<OcrBox> parse_ocr_boxes(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_array()) throw Error(ErrorKind::AdapterFailure, "OCR output is not a JSON array");
    std::vector<OcrBox> out;
    for (const auto& e : j) {
      OcrBox b;
      b.text = e.at("text").get<std::string>();
      b.x = e.at("x").get<int>();
      b.y = e.at("y").get<int>();
      b.w = e.at("w").get<int>();
      b.h = e.at("h").get<int>();
      b.confidence = e.contains("conf") ? e.at("conf").get<double>() : 1.0;
      if (b.w <= 0 || b.h <= 0) throw Error(ErrorKind::AdapterFailure, "OCR box with non-positive size");
      out.push_back(std::move(b));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::AdapterFailure, std::string("malformed OCR output: ") + e.what());
  }
}

inline std::string sidecar_path(const std::string& image_path) { return image_path + ".gt.json"; }

inline std::string ocr_boxes_json(const std::vector<OcrBox>& boxes) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& b : boxes) j.push_back(to_json(b));
  return j.dump();
}

struct OcrAdapter {
  enum class Mode { Sidecar, Command };
  Mode mode = Mode::Sidecar;
  std::string command;
};

/// Text boxes for an image file, from its ground-truth sidecar or by running
/// `<command> '<image>'` and reading a JSON array from its stdout.
inline std::vector<OcrBox> read_text(const std::string& image_path, const OcrAdapter& adapter) {
  if (adapter.mode == OcrAdapter::Mode::Sidecar) {
    std::ifstream in(sidecar_path(image_path), std::ios::binary);
    if (!in) throw Error(ErrorKind::AdapterFailure, "missing sidecar " + sidecar_path(image_path));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_ocr_boxes(ss.str());
  }
  std::string quoted = "'";
  for (char c : image_path) quoted += c == '\'' ? std::string("'\\''") : std::string(1, c);
  quoted += "'";
  const std::string cmd = adapter.command + " " + quoted;
  std::FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw Error(ErrorKind::AdapterFailure, "cannot run OCR command: " + adapter.command);
  std::string output;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, got);
  const int status = pclose(pipe);
  if (status != 0) throw Error(ErrorKind::AdapterFailure, "OCR command exited with status " + std::to_string(status));
  return parse_ocr_boxes(output);
}

struct AssemblyResult {
  FlowGraph graph;
  std::vector<std::string> warnings;
};

/// Builds the graph: shape i becomes node "n<i>", text boxes join the shape
/// containing their centre, arrows become edges.
inline AssemblyResult assemble(const std::vector<ShapeDetection>& shapes, const std::vector<ArrowDetection>& arrows,
                               const std::vector<OcrBox>& ocr) {
  AssemblyResult r;
  std::vector<std::vector<std::size_t>> texts(shapes.size());
  std::vector<bool> used_as_label(ocr.size(), false);
  for (const auto& a : arrows) {
    if (a.label_box) used_as_label[*a.label_box] = true;
  }
  for (std::size_t b = 0; b < ocr.size(); ++b) {
    const Point centre{ocr[b].x + ocr[b].w / 2.0 - 0.5, ocr[b].y + ocr[b].h / 2.0 - 0.5};
    bool placed = false;
    for (std::size_t s = 0; s < shapes.size() && !placed; ++s) {
      if (detail::point_in_polygon(centre, shapes[s].polygon)) {
        texts[s].push_back(b);
        placed = true;
      }
    }
    if (!placed && !used_as_label[b]) {
      r.warnings.push_back("UnassignedText " + detail::bbox_string(ocr[b].x, ocr[b].y, ocr[b].w, ocr[b].h) + " '" +
                           ocr[b].text + "'");
    }
  }
  for (std::size_t s = 0; s < shapes.size(); ++s) {
    auto& list = texts[s];
    std::stable_sort(list.begin(), list.end(), [&](std::size_t l, std::size_t rr) {
      return std::pair(ocr[l].y, ocr[l].x) < std::pair(ocr[rr].y, ocr[rr].x);
    });
    std::string text;
    for (auto b : list) text += (text.empty() ? "" : " ") + ocr[b].text;
    r.graph.nodes.push_back({"n" + std::to_string(s), shapes[s].kind, std::move(text)});
  }
  for (const auto& a : arrows) {
    EdgeLabel label = EdgeLabel::Unlabeled;
    if (shapes[a.src].kind == BlockKind::Decision) {
      if (a.label == EdgeLabel::Unlabeled) {
        throw Error(ErrorKind::MissingBranchLabel, "decision n" + std::to_string(a.src) + " has an unlabeled branch");
      }
      label = a.label;
    }
    r.graph.edges.push_back({"n" + std::to_string(a.src), "n" + std::to_string(a.dst), label});
  }
  if (auto v = validate(r.graph); !v.ok()) throw Error(ErrorKind::InvalidAssembly, v.describe());
  return r;
}

/// detect_shapes, detect_arrows and assemble in sequence.
inline AssemblyResult recover_graph(const GrayImage& img, const std::vector<OcrBox>& ocr,
                                    const VisionOptions& opts = {}) {
  const auto analysis = detail::analyse_shapes(img, opts);
  const auto arrows = detail::arrows_from(img, analysis, analysis.shapes, ocr, opts);
  auto result = assemble(analysis.shapes, arrows, ocr);
  result.warnings.insert(result.warnings.begin(), analysis.warnings.begin(), analysis.warnings.end());
  return result;
}

}  // namespace flowco
