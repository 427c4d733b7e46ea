#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "flowco/augment.hpp"
#include "flowco/code2flow.hpp"
#include "flowco/corpus.hpp"
#include "flowco/encode.hpp"
#include "flowco/flow2code.hpp"
#include "flowco/image.hpp"
#include "flowco/maskgen.hpp"
#include "flowco/metrics.hpp"
#include "flowco/pymini/parser.hpp"
#include "flowco/pymini/printer.hpp"
#include "flowco/render.hpp"
#include "flowco/vision.hpp"

namespace fs = std::filesystem;
using namespace flowco;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Error(ErrorKind::IoError, "cannot write " + path);
}

// A graph from a flowgraph JSON file, or lowered from a .py source.
FlowGraph load_graph(const std::string& path) {
  const std::string text = read_file(path);
  if (fs::path(path).extension() == ".py") return lower(pymini::parse(text));
  try {
    return graph_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, path + ": " + e.what());
  }
}

std::vector<fs::path> source_files(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::recursive_directory_iterator(in)) {
        if (e.is_regular_file() && e.path().extension() == ".py") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.emplace_back(in);
    }
  }
  return out;
}

void render_one(const FlowGraph& g, const std::string& format, double scale, const std::string& out) {
  if (format == "svg") {
    write_output(out, to_svg(g));
    return;
  }
  if (out.empty() || out == "-") throw Error(ErrorKind::InvalidArgument, "png output needs -o <file>");
  const auto l = layout(g);
  write_png(out, rasterize(to_svg(l), scale));
  write_output(sidecar_path(out), ocr_boxes_json(text_boxes(l, scale)));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowco: flowchart and code dataset tools"};
  app.require_subcommand(1);

  std::string out;
  std::string in;
  std::uint64_t seed = 0;

  auto* build_cmd = app.add_subcommand("build", "Parse source files into a corpus JSONL");
  std::vector<std::string> build_inputs;
  build_cmd->add_option("inputs", build_inputs, "Source files or directories of .py files")->required();
  build_cmd->add_option("-o,--out", out, "Corpus JSONL")->required();

  auto* split_cmd = app.add_subcommand("split", "Assign train/test/val splits");
  std::string ratio = "85:10:5";
  split_cmd->add_option("-i,--in", in, "Corpus JSONL")->required();
  split_cmd->add_option("-o,--out", out, "Corpus JSONL")->required();
  split_cmd->add_option("--ratio", ratio, "train:test:val percentages")->capture_default_str();
  split_cmd->add_option("--seed", seed)->capture_default_str();

  auto* augment_cmd = app.add_subcommand("augment", "Append renamed variants of every train record");
  augment_cmd->add_option("-i,--in", in, "Corpus JSONL")->required();
  augment_cmd->add_option("-o,--out", out, "Corpus JSONL")->required();
  augment_cmd->add_option("--seed", seed)->capture_default_str();

  auto* maskgen_cmd = app.add_subcommand("maskgen", "Write the masked pretraining corpus from train records");
  double p = kDefaultMaskProbability;
  maskgen_cmd->add_option("-i,--in", in, "Corpus JSONL")->required();
  maskgen_cmd->add_option("-o,--out", out, "Pretraining JSONL")->required();
  maskgen_cmd->add_option("--p", p, "Mask probability")->capture_default_str();
  maskgen_cmd->add_option("--seed", seed)->capture_default_str();

  auto* render_cmd = app.add_subcommand("render", "Draw a flowchart as SVG or PNG");
  std::string format = "svg";
  double scale = 2.0;
  render_cmd->add_option("input", in, "Graph JSON, .py source, or corpus JSONL")->required();
  render_cmd->add_option("-o,--out", out, "Output file, or directory for a corpus");
  render_cmd->add_option("--format", format)->check(CLI::IsMember({"svg", "png"}))->capture_default_str();
  render_cmd->add_option("--scale", scale, "Pixels per layout unit (png)")->capture_default_str();

  auto* detect_cmd = app.add_subcommand("detect", "Recover a graph from a flowchart PNG");
  std::string ocr_cmd;
  detect_cmd->add_option("image", in, "PNG file")->required();
  detect_cmd->add_option("-o,--out", out, "Graph JSON");
  detect_cmd->add_option("--ocr-cmd", ocr_cmd, "Command printing OCR boxes as JSON (default: <image>.gt.json)");

  auto* encode_cmd = app.add_subcommand("encode", "Print a flowchart encoding");
  std::string variant = "modified";
  encode_cmd->add_option("input", in, "Graph JSON or .py source")->required();
  encode_cmd->add_option("-o,--out", out);
  encode_cmd->add_option("--variant", variant)
      ->check(CLI::IsMember({"tuple", "string", "modified"}))
      ->capture_default_str();

  auto* c2f_cmd = app.add_subcommand("code2flow", "Lower a source file to graph JSON");
  c2f_cmd->add_option("input", in, ".py source")->required();
  c2f_cmd->add_option("-o,--out", out);

  auto* f2c_cmd = app.add_subcommand("flow2code", "Structure graph JSON back into source");
  f2c_cmd->add_option("input", in, "Graph JSON")->required();
  f2c_cmd->add_option("-o,--out", out);

  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against a corpus split");
  std::string pred, ref, split_name = "test";
  eval_cmd->add_option("--pred", pred, "Predictions JSONL")->required();
  eval_cmd->add_option("--ref", ref, "Corpus JSONL")->required();
  eval_cmd->add_option("--split", split_name)->check(CLI::IsMember({"train", "test", "val", "all"}))->capture_default_str();
  eval_cmd->add_option("-o,--out", out, "Report JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (build_cmd->parsed()) {
      std::vector<std::string> sources, names;
      for (const auto& f : source_files(build_inputs)) {
        sources.push_back(read_file(f.string()));
        names.push_back(f.string());
      }
      const auto result = build(sources, names);
      for (const auto& s : result.skipped) std::cerr << "skipped " << names[s.index] << ": " << s.reason << "\n";
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
      write_jsonl(out, result.records);
      std::cerr << result.records.size() << " records, " << result.skipped.size() << " skipped\n";
    } else if (split_cmd->parsed()) {
      auto records = split(read_jsonl(in), parse_split_ratio(ratio), seed);
      write_jsonl(out, records);
    } else if (augment_cmd->parsed()) {
      const auto records = read_jsonl(in);
      std::vector<DatasetRecord> train;
      for (const auto& r : records) {
        if (r.split == Split::Train && !r.provenance.aug_mode) train.push_back(r);
      }
      auto augmented = augment_corpus(train, seed);
      std::vector<DatasetRecord> all = records;
      all.insert(all.end(), augmented.begin() + static_cast<std::ptrdiff_t>(train.size()), augmented.end());
      write_jsonl(out, all);
      std::cerr << augmented.size() - train.size() << " augmented records\n";
    } else if (maskgen_cmd->parsed()) {
      std::vector<DatasetRecord> originals, augmented;
      for (auto& r : read_jsonl(in)) {
        if (r.split != Split::Train) continue;
        (r.provenance.aug_mode ? augmented : originals).push_back(std::move(r));
      }
      const auto samples = build_pretrain_corpus(originals, augmented, p, seed);
      std::vector<nlohmann::ordered_json> lines;
      for (const auto& s : samples) lines.push_back(to_json(s));
      write_json_lines(out, lines);
    } else if (render_cmd->parsed()) {
      if (fs::path(in).extension() == ".jsonl") {
        if (out.empty()) throw Error(ErrorKind::InvalidArgument, "corpus rendering needs -o <directory>");
        fs::create_directories(out);
        for (const auto& r : read_jsonl(in)) {
          render_one(r.graph, format, scale, (fs::path(out) / (r.id + "." + format)).string());
        }
      } else {
        render_one(load_graph(in), format, scale, out);
      }
    } else if (detect_cmd->parsed()) {
      OcrAdapter adapter;
      if (!ocr_cmd.empty()) adapter = {OcrAdapter::Mode::Command, ocr_cmd};
      const auto boxes = read_text(in, adapter);
      const auto result = recover_graph(read_png(in), boxes);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
      write_output(out, to_json(result.graph).dump(2) + "\n");
    } else if (encode_cmd->parsed()) {
      write_output(out, encode(load_graph(in), *variant_from_name(variant)) + "\n");
    } else if (c2f_cmd->parsed()) {
      write_output(out, to_json(lower(pymini::parse(read_file(in)))).dump(2) + "\n");
    } else if (f2c_cmd->parsed()) {
      write_output(out, pymini::print_canonical(structure(load_graph(in))));
    } else if (eval_cmd->parsed()) {
      std::optional<Split> s;
      if (split_name != "all") s = split_from_string(split_name);
      const auto rep = report(read_predictions(pred), read_jsonl(ref), s);
      write_output(out, to_json(rep).dump(2) + "\n");
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::InvalidArgument ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
