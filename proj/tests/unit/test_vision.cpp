#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "flowco/code2flow.hpp"
#include "flowco/image.hpp"
#include "flowco/pymini/parser.hpp"
#include "flowco/render.hpp"
#include "flowco/vision.hpp"
#include "support/fixtures.hpp"
#include "support/program_gen.hpp"

using namespace flowco;

namespace {

const std::string kStroke = R"(fill="none" stroke="black" stroke-width="1.5")";

std::string svg_doc(int w, int h, const std::string& body) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" + std::to_string(h) +
         "\" viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) + "\">\n" + body + "</svg>\n";
}

std::string rect(int x, int y, int w, int h) {
  return "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) + "\" width=\"" + std::to_string(w) +
         "\" height=\"" + std::to_string(h) + "\" " + kStroke + "/>\n";
}

std::vector<ShapeDetection> by_row(std::vector<ShapeDetection> shapes) {
  std::stable_sort(shapes.begin(), shapes.end(), [](const auto& a, const auto& b) { return a.y < b.y; });
  return shapes;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::path(::testing::TempDir()) / ("flowco_" + name)).string();
}

FlowGraph fun1_graph() { return lower(pymini::parse(fixtures::kFun1Source)); }

}  // namespace

TEST(DetectShapes, BlankImage) {
  GrayImage img(300, 200);
  EXPECT_TRUE(detect_shapes(img).empty());
  EXPECT_TRUE(detect_arrows(img, {}).empty());
}

TEST(DetectShapes, SingleRectangle) {
  const auto img = rasterize(svg_doc(400, 300, rect(50, 40, 200, 100)), 1);
  const auto shapes = detect_shapes(img);
  ASSERT_EQ(shapes.size(), 1u);
  EXPECT_EQ(shapes[0].kind, BlockKind::Process);
  EXPECT_NEAR(shapes[0].x, 50, 2);
  EXPECT_NEAR(shapes[0].y, 40, 2);
  EXPECT_NEAR(shapes[0].w, 200, 2);
  EXPECT_NEAR(shapes[0].h, 100, 2);
}

TEST(DetectShapes, EachKind) {
  const std::string body = rect(20, 20, 220, 60) +
                           "<polygon points=\"320,20 520,20 500,80 300,80\" " + kStroke + "/>\n" +
                           "<ellipse cx=\"130\" cy=\"200\" rx=\"90\" ry=\"25\" " + kStroke + "/>\n" +
                           "<polygon points=\"410,130 490,210 410,290 330,210\" " + kStroke + "/>\n";
  const auto shapes = detect_shapes(rasterize(svg_doc(560, 320, body), 2));
  ASSERT_EQ(shapes.size(), 4u);
  std::vector<BlockKind> kinds;
  for (const auto& s : shapes) kinds.push_back(s.kind);
  std::sort(kinds.begin(), kinds.end());
  std::vector<BlockKind> expected{BlockKind::Terminal, BlockKind::Process, BlockKind::InputOutput, BlockKind::Decision};
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(kinds, expected);
}

TEST(DetectShapes, Fun1Render) {
  const auto shapes = by_row(detect_shapes(render_png(fun1_graph(), 2)));
  ASSERT_EQ(shapes.size(), 5u);
  EXPECT_EQ(shapes[0].kind, BlockKind::Terminal);
  EXPECT_EQ(shapes[1].kind, BlockKind::InputOutput);
  EXPECT_EQ(shapes[2].kind, BlockKind::Process);
  EXPECT_EQ(shapes[3].kind, BlockKind::InputOutput);
  EXPECT_EQ(shapes[4].kind, BlockKind::Terminal);
}

TEST(DetectArrows, Fun1Render) {
  const auto img = render_png(fun1_graph(), 2);
  const auto shapes = detect_shapes(img);
  const auto arrows = detect_arrows(img, shapes);
  ASSERT_EQ(arrows.size(), 4u);
  std::vector<std::size_t> rank(shapes.size());
  const auto sorted = by_row(shapes);
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    rank[i] = static_cast<std::size_t>(
        std::find_if(sorted.begin(), sorted.end(), [&](const auto& s) { return s.y == shapes[i].y; }) - sorted.begin());
  }
  std::vector<std::size_t> sources;
  for (const auto& a : arrows) {
    EXPECT_EQ(rank[a.dst], rank[a.src] + 1);
    EXPECT_LT(a.tail.y, a.head.y);
    sources.push_back(rank[a.src]);
  }
  std::sort(sources.begin(), sources.end());
  EXPECT_EQ(sources, (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(DetectArrows, ShapesWithoutConnectingInk) {
  const auto img = rasterize(svg_doc(300, 400, rect(40, 40, 200, 80) + rect(40, 240, 200, 80)), 1);
  const auto shapes = detect_shapes(img);
  ASSERT_EQ(shapes.size(), 2u);
  EXPECT_TRUE(detect_arrows(img, shapes).empty());
}

TEST(DetectArrows, Dangling) {
  const std::string body = rect(40, 40, 200, 80) + "<path d=\"M 140 123 L 140 190\" " + kStroke + "/>\n" +
                           "<polygon points=\"140,200 136,190 144,190\" fill=\"black\"/>\n";
  const auto img = rasterize(svg_doc(300, 320, body), 1);
  const auto shapes = detect_shapes(img);
  ASSERT_EQ(shapes.size(), 1u);
  try {
    detect_arrows(img, shapes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DanglingArrow);
  }
}

TEST(ReadText, Sidecar) {
  const auto l = layout(fun1_graph());
  const auto path = temp_path("sidecar.png");
  write_png(path, rasterize(to_svg(l), 2));
  std::ofstream(sidecar_path(path)) << ocr_boxes_json(text_boxes(l, 2));
  const auto boxes = read_text(path, {});
  ASSERT_EQ(boxes.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(boxes[i].text, l.blocks[i].text);
}

TEST(ReadText, AdapterFailures) {
  const auto path = temp_path("adapter.png");
  write_png(path, GrayImage(10, 10));
  auto kind = [&](const std::string& cmd) {
    try {
      read_text(path, {OcrAdapter::Mode::Command, cmd});
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::IoError;
  };
  EXPECT_EQ(kind("echo '[{\"text\": 1' #"), ErrorKind::AdapterFailure);
  EXPECT_EQ(kind("false"), ErrorKind::AdapterFailure);
  EXPECT_EQ(kind("echo '{}' #"), ErrorKind::AdapterFailure);
  EXPECT_TRUE(read_text(path, {OcrAdapter::Mode::Command, "echo '[]' #"}).empty());
}

TEST(ReadText, MissingSidecar) {
  try {
    read_text(temp_path("no_sidecar.png"), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::AdapterFailure);
  }
}

TEST(Assemble, Fun1EndToEnd) {
  const auto g = fun1_graph();
  const auto l = layout(g);
  const auto r = recover_graph(rasterize(to_svg(l), 2), text_boxes(l, 2));
  EXPECT_TRUE(r.warnings.empty());
  EXPECT_TRUE(isomorphic(r.graph, g));
}

TEST(Assemble, BranchingEndToEnd) {
  for (const auto* src : {"def f(a):\n    if a > 0:\n        a = 1\n    else:\n        a = 2\n    return a\n",
                          "def fact(n):\n    r = 1\n    while n > 1:\n        r = r * n\n        n -= 1\n    return r\n"}) {
    const auto g = lower(pymini::parse(src));
    const auto l = layout(g);
    const auto r = recover_graph(rasterize(to_svg(l), 2), text_boxes(l, 2));
    EXPECT_TRUE(isomorphic(r.graph, g)) << src;
  }
}

TEST(Assemble, UnassignedText) {
  const auto g = fun1_graph();
  const auto l = layout(g);
  auto boxes = text_boxes(l, 2);
  boxes.push_back({"stray", 2, 2, 30, 12, 1.0});
  const auto r = recover_graph(rasterize(to_svg(l), 2), boxes);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_EQ(r.warnings[0].rfind("UnassignedText", 0), 0u);
  EXPECT_TRUE(isomorphic(r.graph, g));
}

TEST(Assemble, MissingBranchLabel) {
  const auto l = layout(fixtures::diamond_graph());
  auto boxes = text_boxes(l, 2);
  boxes.resize(l.blocks.size());  // drop the yes/no labels
  try {
    recover_graph(rasterize(to_svg(l), 2), boxes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingBranchLabel);
  }
}

TEST(Assemble, InvalidAssembly) {
  // Two disconnected rectangles cannot form a flowchart.
  const auto img = rasterize(svg_doc(300, 400, rect(40, 40, 200, 80) + rect(40, 240, 200, 80)), 1);
  try {
    recover_graph(img, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidAssembly);
  }
}

TEST(Assemble, GeneratedGraphs) {
  int ok = 0;
  for (unsigned seed = 0; seed < 40; ++seed) {
    const auto g = lower(pymini::parse(testgen::ProgramGen(seed).program()));
    const auto l = layout(g);
    const auto r = recover_graph(rasterize(to_svg(l), 2), text_boxes(l, 2));
    ok += isomorphic(r.graph, g);
  }
  EXPECT_EQ(ok, 40);
}
