#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowco/error.hpp"
#include "flowco/flowgraph.hpp"
#include "flowco/font.hpp"
#include "flowco/image.hpp"

namespace flowco {

struct Point {
  double x = 0;
  double y = 0;

  bool operator==(const Point&) const = default;
};

/// Text extent in pixels, origin top-left. Shared by the renderer's
/// ground-truth sidecar and the OCR adapter.
struct OcrBox {
  std::string text;
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  double confidence = 1.0;

  bool operator==(const OcrBox&) const = default;
};

inline nlohmann::ordered_json to_json(const OcrBox& b) {
  nlohmann::ordered_json j;
  j["text"] = b.text;
  j["x"] = b.x;
  j["y"] = b.y;
  j["w"] = b.w;
  j["h"] = b.h;
  j["conf"] = b.confidence;
  return j;
}

namespace style {

inline constexpr double kMargin = 40;
inline constexpr double kColumnX = 150;
inline constexpr double kRowGap = 60;
inline constexpr double kStroke = 1.5;
inline constexpr double kArrowGap = 3;
inline constexpr double kHeadLength = 10;
inline constexpr double kHeadHalfWidth = 4;
inline constexpr double kFirstLane = 150;  // from the column centre
inline constexpr double kLaneStep = 16;
inline constexpr double kStubDrop = 30;
inline constexpr double kSkew = 20;
inline constexpr double kSlotStep = 10;
inline constexpr double kMaxFont = 16;
inline constexpr double kMinFont = 6;
inline constexpr double kLabelFont = 12;
inline constexpr double kTextMargin = 4;
inline constexpr double kGrowStep = 20;
inline constexpr double kMaxDecisionWidth = 260;
inline constexpr double kMaxBlockHeight = 400;

}  // namespace style

inline std::pair<double, double> block_size(BlockKind kind) {
  switch (kind) {
    case BlockKind::Process:
    case BlockKind::InputOutput: return {220, 60};
    case BlockKind::Terminal: return {180, 50};
    case BlockKind::Decision: return {160, 160};
  }
  return {220, 60};
}

struct PlacedBlock {
  std::string id;
  BlockKind kind = BlockKind::Process;
  std::string text;
  double cx = 0;
  double cy = 0;
  double width = 0;
  double height = 0;
  double font_size = style::kMaxFont;
  double text_left = 0;
  double text_baseline = 0;

  double top() const { return cy - height / 2; }
  double bottom() const { return cy + height / 2; }
};

struct PlacedArrow {
  std::string src;
  std::string dst;
  EdgeLabel label = EdgeLabel::Unlabeled;
  std::vector<Point> path;  // tail first, ends at the arrowhead base
  std::array<Point, 3> head;  // tip first
};

struct PlacedLabel {
  std::string text;
  double left = 0;
  double baseline = 0;
  double size = style::kLabelFont;
};

struct Layout {
  double width = 0;
  double height = 0;
  std::vector<PlacedBlock> blocks;  // in row order
  std::vector<PlacedArrow> arrows;  // in edge order
  std::vector<PlacedLabel> labels;
};

namespace detail {

// Right-hand boundary x of a block at height y, and the x component of the
// outward unit normal there.
inline std::pair<double, double> right_boundary(const PlacedBlock& b, double y) {
  const double dy = y - b.cy;
  switch (b.kind) {
    case BlockKind::Process: return {b.cx + b.width / 2, 1.0};
    case BlockKind::InputOutput: {
      const double t = (y - b.top()) / b.height;
      const double nx = b.height / std::hypot(b.height, style::kSkew);
      return {b.cx + b.width / 2 - style::kSkew * t, nx};
    }
    case BlockKind::Terminal: {
      const double a = b.width / 2, r = b.height / 2;
      const double dx = a * std::sqrt(std::max(0.0, 1 - (dy / r) * (dy / r)));
      const double gx = dx / (a * a), gy = dy / (r * r);
      return {b.cx + dx, gx / std::hypot(gx, gy)};
    }
    case BlockKind::Decision: return {b.cx + b.width / 2 - std::abs(dy), 1 / std::sqrt(2.0)};
  }
  return {b.cx, 1.0};
}

inline double gap_point_x(const PlacedBlock& b, double y) {
  const auto [x, nx] = right_boundary(b, y);
  return x + style::kArrowGap / nx;
}

inline bool text_fits(BlockKind kind, double w, double h, double tw, double th) {
  const double m = style::kTextMargin;
  const double hw = tw / 2, hh = th / 2;
  switch (kind) {
    case BlockKind::Process: return hw <= w / 2 - m && hh <= h / 2 - m;
    case BlockKind::InputOutput: {
      // Slanted sides: inset grows by skew * (distance from the middle row) / height.
      const double inset = style::kSkew / 2 + style::kSkew * hh / h;
      return hh <= h / 2 - m && hw <= w / 2 - inset - m;
    }
    case BlockKind::Terminal: {
      const double a = w / 2 - m, b = h / 2 - m;
      return a > 0 && b > 0 && (hw / a) * (hw / a) + (hh / b) * (hh / b) <= 1;
    }
    case BlockKind::Decision: return hw + hh <= w / 2 - m * std::sqrt(2.0);
  }
  return false;
}

// Candidate entry heights on the right side, top to bottom.
inline std::vector<double> entry_slots(const PlacedBlock& b, bool exits_right) {
  std::vector<double> out;
  if (b.kind == BlockKind::Terminal) {
    for (double dy = -(b.height / 2 - 15); dy <= b.height / 2 - 15 + 1e-9; dy += style::kSlotStep) {
      if (!exits_right || std::abs(dy) >= 8) out.push_back(b.cy + dy);
    }
    return out;
  }
  if (b.kind == BlockKind::Decision) {
    for (double y = b.top() + 30; y <= b.bottom() - 30 + 1e-9; y += style::kSlotStep) {
      if (y < b.cy - 22 || y > b.cy + 12) out.push_back(y);
    }
    return out;
  }
  for (double y = b.top() + 6; y <= b.bottom() - 6 + 1e-9; y += style::kSlotStep) {
    if (!exits_right || std::abs(y - b.cy) >= 8) out.push_back(y);
  }
  return out;
}

inline std::array<Point, 3> arrowhead(Point tip, Point dir) {
  const Point base{tip.x - dir.x * style::kHeadLength, tip.y - dir.y * style::kHeadLength};
  const Point normal{-dir.y, dir.x};
  return {tip, Point{base.x + normal.x * style::kHeadHalfWidth, base.y + normal.y * style::kHeadHalfWidth},
          Point{base.x - normal.x * style::kHeadHalfWidth, base.y - normal.y * style::kHeadHalfWidth}};
}

}  // namespace detail

/// Single-column layout: one row per block in linearized order. Straight
/// edges to the next row drop vertically; every other edge leaves to the
/// right, runs in its own lane, and enters its target from the right.
inline Layout layout(const FlowGraph& g) {
  const auto order = linearize_indices(g);
  const std::size_t n = g.nodes.size();
  std::vector<std::size_t> row(n);
  for (std::size_t r = 0; r < order.size(); ++r) row[order[r]] = r;

  Layout out;
  struct LaneEdge {
    std::size_t edge;
    std::size_t span;
    bool forward;
    std::size_t lane = 0;
    double slot = 0;
  };
  std::vector<LaneEdge> lane_edges;
  std::vector<bool> exits_right(n, false);
  std::vector<std::size_t> routed_in(n, 0);
  std::vector<bool> straight(g.edges.size(), false);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const FlowEdge& edge = g.edges[e];
    const std::size_t u = *g.index_of(edge.src), v = *g.index_of(edge.dst);
    const bool decision = g.nodes[u].kind == BlockKind::Decision;
    if (row[v] == row[u] + 1 && (!decision || edge.label == EdgeLabel::Yes)) {
      straight[e] = true;
      continue;
    }
    const std::size_t span = row[u] > row[v] ? row[u] - row[v] : row[v] - row[u];
    lane_edges.push_back({e, span, row[v] > row[u]});
    ++routed_in[v];
    if (!decision) exits_right[u] = true;
  }

  double y = style::kMargin;
  for (auto idx : order) {
    const FlowNode& node = g.nodes[idx];
    auto [w, h] = block_size(node.kind);
    // Blocks entered by many routed edges grow until every edge has a slot.
    while (true) {
      PlacedBlock probe{node.id, node.kind, node.text, 0, 0, w, h};
      if (detail::entry_slots(probe, exits_right[idx]).size() >= routed_in[idx]) break;
      if (node.kind == BlockKind::Decision) w += style::kGrowStep;
      h += style::kGrowStep;
      if (w > style::kMaxDecisionWidth || h > style::kMaxBlockHeight) {
        throw Error(ErrorKind::LayoutError, std::to_string(routed_in[idx]) + " routed edges enter " + node.id +
                                                ", more than its largest size has entry slots for");
      }
    }
    PlacedBlock b{node.id, node.kind, node.text, style::kColumnX, y + h / 2, w, h};
    double size = style::kMaxFont;
    while (!detail::text_fits(node.kind, w, h, font::text_width(node.text.size(), size), font::text_height(size))) {
      size -= 1;
      if (size < style::kMinFont) {
        throw Error(ErrorKind::TextTooWide, "text of " + node.id + " does not fit its block: '" + node.text + "'");
      }
    }
    b.font_size = size;
    b.text_left = b.cx - font::text_width(node.text.size(), size) / 2;
    b.text_baseline = b.cy + font::text_height(size) / 2;
    out.blocks.push_back(std::move(b));
    y += h + style::kRowGap;
  }
  out.height = y - style::kRowGap + style::kMargin;

  auto block_of = [&](const std::string& id) -> const PlacedBlock& { return out.blocks[row[*g.index_of(id)]]; };

  out.arrows.resize(g.edges.size());
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const FlowEdge& edge = g.edges[e];
    out.arrows[e].src = edge.src;
    out.arrows[e].dst = edge.dst;
    out.arrows[e].label = edge.label;
    if (!straight[e]) continue;
    const PlacedBlock& a = block_of(edge.src);
    const PlacedBlock& b = block_of(edge.dst);
    const Point tip{b.cx, b.top() - style::kArrowGap};
    out.arrows[e].path = {{a.cx, a.bottom() + style::kArrowGap}, {tip.x, tip.y - style::kHeadLength}};
    out.arrows[e].head = detail::arrowhead(tip, {0, 1});
  }

  std::stable_sort(lane_edges.begin(), lane_edges.end(),
                   [](const LaneEdge& a, const LaneEdge& b) { return a.span < b.span; });
  for (std::size_t k = 0; k < lane_edges.size(); ++k) lane_edges[k].lane = k;

  // Entry slots: forward edges fill from the top, back edges from the
  // bottom, inner lanes first, so entries into one block never cross.
  std::map<std::string, std::vector<LaneEdge*>> entries;
  for (auto& le : lane_edges) entries[g.edges[le.edge].dst].push_back(&le);
  for (auto& [dst, list] : entries) {
    const PlacedBlock& b = block_of(dst);
    const auto slots = detail::entry_slots(b, exits_right[*g.index_of(dst)]);
    if (list.size() > slots.size()) {
      throw Error(ErrorKind::LayoutError, std::to_string(list.size()) + " routed edges enter " + dst +
                                              " but only " + std::to_string(slots.size()) + " entry slots exist");
    }
    std::size_t top = 0, bottom = slots.size();
    for (auto* le : list) {
      if (le->forward) le->slot = slots[top++];
    }
    for (auto* le : list) {
      if (!le->forward) le->slot = slots[--bottom];
    }
  }

  double max_lane_x = 0;
  for (const auto& le : lane_edges) {
    const FlowEdge& edge = g.edges[le.edge];
    const PlacedBlock& a = block_of(edge.src);
    const PlacedBlock& b = block_of(edge.dst);
    const double lane_x = a.cx + style::kFirstLane + style::kLaneStep * static_cast<double>(le.lane);
    max_lane_x = std::max(max_lane_x, lane_x);
    std::vector<Point> path;
    double exit_y = a.cy;
    if (a.kind == BlockKind::Decision && edge.label == EdgeLabel::Yes) {
      exit_y = a.bottom() + style::kStubDrop;
      path.push_back({a.cx, a.bottom() + style::kArrowGap});
      path.push_back({a.cx, exit_y});
    } else if (a.kind == BlockKind::Decision) {
      path.push_back({a.cx + a.width / 2 + style::kArrowGap, a.cy});
    } else {
      path.push_back({detail::gap_point_x(a, a.cy), a.cy});
    }
    const Point tip{detail::gap_point_x(b, le.slot), le.slot};
    path.push_back({lane_x, exit_y});
    path.push_back({lane_x, le.slot});
    path.push_back({tip.x + style::kHeadLength, tip.y});
    out.arrows[le.edge].path = std::move(path);
    out.arrows[le.edge].head = detail::arrowhead(tip, {-1, 0});
  }
  out.width = std::max(style::kColumnX + 110 + style::kMargin, max_lane_x + style::kMargin);

  for (const auto& b : out.blocks) {
    if (b.kind != BlockKind::Decision) continue;
    out.labels.push_back({"yes", b.cx + 6, b.bottom() + 16, style::kLabelFont});
    out.labels.push_back({"no", b.cx + b.width / 2 + 6, b.cy - 5, style::kLabelFont});
  }
  return out;
}

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s = buf;
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string points_attr(const std::vector<Point>& pts) {
  std::string s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s += ' ';
    s += num(pts[i].x) + "," + num(pts[i].y);
  }
  return s;
}

inline std::string text_element(std::string_view cls, double x, double y, double size, std::string_view text) {
  return "<text class=\"" + std::string(cls) + "\" x=\"" + num(x) + "\" y=\"" + num(y) +
         "\" font-family=\"monospace\" font-size=\"" + num(size) + "\" xml:space=\"preserve\">" + xml_escape(text) +
         "</text>\n";
}

}  // namespace detail

inline std::string to_svg(const Layout& l) {
  using detail::num;
  const std::string stroke = "fill=\"none\" stroke=\"black\" stroke-width=\"" + num(style::kStroke) + "\"";
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(l.width) +
                  "\" height=\"" + num(l.height) + "\" viewBox=\"0 0 " + num(l.width) + " " + num(l.height) + "\">\n";
  for (const auto& b : l.blocks) {
    const double x0 = b.cx - b.width / 2, y0 = b.top();
    switch (b.kind) {
      case BlockKind::Process:
        s += "<rect class=\"block\" x=\"" + num(x0) + "\" y=\"" + num(y0) + "\" width=\"" + num(b.width) +
             "\" height=\"" + num(b.height) + "\" " + stroke + "/>\n";
        break;
      case BlockKind::InputOutput:
        s += "<polygon class=\"block\" points=\"" +
             detail::points_attr({{x0 + style::kSkew, y0},
                                  {x0 + b.width, y0},
                                  {x0 + b.width - style::kSkew, y0 + b.height},
                                  {x0, y0 + b.height}}) +
             "\" " + stroke + "/>\n";
        break;
      case BlockKind::Terminal:
        s += "<ellipse class=\"block\" cx=\"" + num(b.cx) + "\" cy=\"" + num(b.cy) + "\" rx=\"" + num(b.width / 2) +
             "\" ry=\"" + num(b.height / 2) + "\" " + stroke + "/>\n";
        break;
      case BlockKind::Decision:
        s += "<polygon class=\"block\" points=\"" +
             detail::points_attr(
                 {{b.cx, y0}, {x0 + b.width, b.cy}, {b.cx, y0 + b.height}, {x0, b.cy}}) +
             "\" " + stroke + "/>\n";
        break;
    }
    s += detail::text_element("text", b.text_left, b.text_baseline, b.font_size, b.text);
  }
  for (const auto& a : l.arrows) {
    s += "<path class=\"arrow\" d=\"";
    for (std::size_t i = 0; i < a.path.size(); ++i) {
      s += (i ? " L " : "M ") + num(a.path[i].x) + " " + num(a.path[i].y);
    }
    s += "\" " + stroke + "/>\n";
    s += "<polygon class=\"arrowhead\" points=\"" + detail::points_attr({a.head.begin(), a.head.end()}) +
         "\" fill=\"black\"/>\n";
  }
  for (const auto& lb : l.labels) s += detail::text_element("label", lb.left, lb.baseline, lb.size, lb.text);
  s += "</svg>\n";
  return s;
}

inline std::string to_svg(const FlowGraph& g) { return to_svg(layout(g)); }

/// Pixel boxes of every text run (block texts, then branch labels).
inline std::vector<OcrBox> text_boxes(const Layout& l, double scale) {
  std::vector<OcrBox> out;
  auto add = [&](const std::string& text, double left, double baseline, double size) {
    const double top = baseline - font::text_height(size);
    const double right = left + font::text_width(text.size(), size);
    OcrBox b;
    b.text = text;
    b.x = static_cast<int>(std::floor(left * scale));
    b.y = static_cast<int>(std::floor(top * scale));
    b.w = std::max(1, static_cast<int>(std::ceil(right * scale)) - b.x);
    b.h = std::max(1, static_cast<int>(std::ceil(baseline * scale)) - b.y);
    out.push_back(std::move(b));
  };
  for (const auto& b : l.blocks) add(b.text, b.text_left, b.text_baseline, b.font_size);
  for (const auto& lb : l.labels) add(lb.text, lb.left, lb.baseline, lb.size);
  return out;
}

namespace detail {

struct SvgElement {
  std::string tag;
  std::map<std::string, std::string> attrs;
  std::string content;

  double number(const std::string& key, double fallback = 0) const {
    auto it = attrs.find(key);
    return it == attrs.end() ? fallback : std::stod(it->second);
  }
  std::string attr(const std::string& key) const {
    auto it = attrs.find(key);
    return it == attrs.end() ? std::string() : it->second;
  }
};

inline std::string xml_unescape(std::string_view s) {
  static const std::pair<std::string_view, char> kEntities[] = {
      {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&apos;", '\''}};
  std::string out;
  for (std::size_t i = 0; i < s.size();) {
    bool matched = false;
    if (s[i] == '&') {
      for (const auto& [entity, c] : kEntities) {
        if (s.substr(i, entity.size()) == entity) {
          out += c;
          i += entity.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) out += s[i++];
  }
  return out;
}

// Reads the flat element subset written by to_svg.
inline std::vector<SvgElement> parse_svg(std::string_view svg) {
  std::vector<SvgElement> out;
  std::size_t pos = 0;
  while ((pos = svg.find('<', pos)) != std::string_view::npos) {
    ++pos;
    if (pos < svg.size() && (svg[pos] == '/' || svg[pos] == '?' || svg[pos] == '!')) continue;
    SvgElement e;
    while (pos < svg.size() && (std::isalnum(static_cast<unsigned char>(svg[pos])) || svg[pos] == ':')) {
      e.tag += svg[pos++];
    }
    bool self_closing = false;
    while (pos < svg.size()) {
      while (pos < svg.size() && std::isspace(static_cast<unsigned char>(svg[pos]))) ++pos;
      if (svg.substr(pos, 2) == "/>") {
        self_closing = true;
        pos += 2;
        break;
      }
      if (pos < svg.size() && svg[pos] == '>') {
        ++pos;
        break;
      }
      const std::size_t eq = svg.find('=', pos);
      if (eq == std::string_view::npos) throw Error(ErrorKind::ParseError, "malformed SVG attribute");
      std::string key(svg.substr(pos, eq - pos));
      const char quote = svg[eq + 1];
      const std::size_t close = svg.find(quote, eq + 2);
      if (close == std::string_view::npos) throw Error(ErrorKind::ParseError, "unterminated SVG attribute");
      e.attrs[key] = xml_unescape(svg.substr(eq + 2, close - eq - 2));
      pos = close + 1;
    }
    if (!self_closing && e.tag == "text") {
      const std::size_t end = svg.find("</text>", pos);
      if (end == std::string_view::npos) throw Error(ErrorKind::ParseError, "unterminated <text>");
      e.content = xml_unescape(svg.substr(pos, end - pos));
      pos = end + 7;
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<Point> parse_points(std::string_view s) {
  std::vector<double> nums;
  std::string cur;
  for (char c : s) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c)) || std::isalpha(static_cast<unsigned char>(c))) {
      if (!cur.empty()) nums.push_back(std::stod(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) nums.push_back(std::stod(cur));
  std::vector<Point> pts;
  for (std::size_t i = 0; i + 1 < nums.size(); i += 2) pts.push_back({nums[i], nums[i + 1]});
  return pts;
}

inline double segment_distance(Point p, Point a, Point b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

inline bool point_in_polygon(Point p, const std::vector<Point>& poly) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point& a = poly[i];
    const Point& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) inside = !inside;
  }
  return inside;
}

class Canvas {
 public:
  Canvas(GrayImage& img, double scale) : img_(img), scale_(scale) {}

  // Visits pixels whose centres fall in the unit-space box.
  template <class Fn>
  void each(double x0, double y0, double x1, double y1, Fn&& fn) {
    const int px0 = std::max(0, static_cast<int>(std::floor(x0 * scale_)) - 1);
    const int py0 = std::max(0, static_cast<int>(std::floor(y0 * scale_)) - 1);
    const int px1 = std::min(img_.width - 1, static_cast<int>(std::ceil(x1 * scale_)) + 1);
    const int py1 = std::min(img_.height - 1, static_cast<int>(std::ceil(y1 * scale_)) + 1);
    for (int py = py0; py <= py1; ++py) {
      for (int px = px0; px <= px1; ++px) {
        if (fn(Point{(px + 0.5) / scale_, (py + 0.5) / scale_})) img_.at(px, py) = 0;
      }
    }
  }

  void segment(Point a, Point b, double width) {
    const double r = width / 2;
    each(std::min(a.x, b.x) - r, std::min(a.y, b.y) - r, std::max(a.x, b.x) + r, std::max(a.y, b.y) + r,
         [&](Point p) { return segment_distance(p, a, b) <= r + 1e-9; });
  }

  void polyline(const std::vector<Point>& pts, double width, bool closed) {
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) segment(pts[i], pts[i + 1], width);
    if (closed && pts.size() > 2) segment(pts.back(), pts.front(), width);
  }

  void fill_polygon(const std::vector<Point>& pts) {
    double x0 = pts[0].x, x1 = x0, y0 = pts[0].y, y1 = y0;
    for (const auto& p : pts) {
      x0 = std::min(x0, p.x), x1 = std::max(x1, p.x), y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
    }
    each(x0, y0, x1, y1, [&](Point p) { return point_in_polygon(p, pts); });
  }

  void ellipse(double cx, double cy, double rx, double ry, double width) {
    const double r = width / 2;
    each(cx - rx - r, cy - ry - r, cx + rx + r, cy + ry + r, [&](Point p) {
      const double dx = p.x - cx, dy = p.y - cy;
      const double g = std::hypot(dx / rx, dy / ry);
      if (g < 0.5) return false;
      const double grad = std::hypot(dx / (rx * rx), dy / (ry * ry)) / g;
      return std::abs(g - 1) / grad <= r + 1e-9;
    });
  }

  void text(double left, double baseline, double size, std::string_view s) {
    const double cell = size / font::kCellRows;
    const double top = baseline - font::kGlyphRows * cell;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto c = static_cast<unsigned char>(s[i]);
      for (int col = 0; col < font::kGlyphColumns; ++col) {
        for (int row = 0; row < font::kGlyphRows; ++row) {
          if (!font::pixel(c, col, row)) continue;
          const double x0 = left + (static_cast<double>(i) * font::kCellColumns + col) * cell;
          const double y0 = top + row * cell;
          each(x0, y0, x0 + cell, y0 + cell,
               [&](Point p) { return p.x >= x0 && p.x < x0 + cell && p.y >= y0 && p.y < y0 + cell; });
        }
      }
    }
  }

 private:
  GrayImage& img_;
  double scale_;
};

}  // namespace detail

/// Rasterizes the SVG subset produced by to_svg. Image size is the SVG
/// size times scale, rounded up.
inline GrayImage rasterize(std::string_view svg, double scale) {
  if (!(scale > 0)) throw Error(ErrorKind::InvalidArgument, "scale must be positive");
  const auto elements = detail::parse_svg(svg);
  auto root = std::find_if(elements.begin(), elements.end(), [](const auto& e) { return e.tag == "svg"; });
  if (root == elements.end()) throw Error(ErrorKind::ParseError, "no <svg> element");
  GrayImage img(static_cast<int>(std::ceil(root->number("width") * scale - 1e-9)),
                static_cast<int>(std::ceil(root->number("height") * scale - 1e-9)));
  detail::Canvas canvas(img, scale);
  for (const auto& e : elements) {
    const double width = e.number("stroke-width", 1);
    const bool filled = !e.attr("fill").empty() && e.attr("fill") != "none";
    if (e.tag == "rect") {
      const double x = e.number("x"), y = e.number("y"), w = e.number("width"), h = e.number("height");
      const std::vector<Point> pts{{x, y}, {x + w, y}, {x + w, y + h}, {x, y + h}};
      filled ? canvas.fill_polygon(pts) : canvas.polyline(pts, width, true);
    } else if (e.tag == "polygon") {
      const auto pts = detail::parse_points(e.attr("points"));
      if (pts.size() < 3) continue;
      filled ? canvas.fill_polygon(pts) : canvas.polyline(pts, width, true);
    } else if (e.tag == "ellipse") {
      canvas.ellipse(e.number("cx"), e.number("cy"), e.number("rx"), e.number("ry"), width);
    } else if (e.tag == "path") {
      canvas.polyline(detail::parse_points(e.attr("d")), width, false);
    } else if (e.tag == "text") {
      canvas.text(e.number("x"), e.number("y"), e.number("font-size", style::kMaxFont), e.content);
    }
  }
  return img;
}

inline GrayImage render_png(const FlowGraph& g, double scale) { return rasterize(to_svg(g), scale); }

}  // namespace flowco
