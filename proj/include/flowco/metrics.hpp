#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowco/error.hpp"
#include "flowco/jsonl.hpp"
#include "flowco/pymini/ast.hpp"
#include "flowco/pymini/lexer.hpp"
#include "flowco/pymini/parser.hpp"
#include "flowco/record.hpp"

namespace flowco {

inline constexpr std::string_view kCodeKeywords[] = {"def", "return", "if",  "elif",  "else",  "while", "for",
                                                     "in",  "and",    "or",  "not",   "True",  "False", "None"};

inline bool is_code_keyword(std::string_view t) {
  return std::find(std::begin(kCodeKeywords), std::end(kCodeKeywords), t) != std::end(kCodeKeywords);
}

/// PyMini lexer tokens without layout tokens; text that does not lex falls
/// back to identifier/number runs and single punctuation characters.
inline std::vector<std::string> code_tokens(std::string_view text) {
  std::vector<std::string> out;
  try {
    for (auto& t : pymini::tokenize(text)) {
      if (t.kind == pymini::TokenKind::Name || t.kind == pymini::TokenKind::Int ||
          t.kind == pymini::TokenKind::String || t.kind == pymini::TokenKind::Op) {
        out.push_back(std::move(t.text));
      }
    }
    return out;
  } catch (const Error&) {
    out.clear();
  }
  std::size_t i = 0;
  auto word = [](unsigned char c) { return std::isalnum(c) || c == '_'; };
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
    } else if (word(c)) {
      std::size_t j = i;
      while (j < text.size() && word(static_cast<unsigned char>(text[j]))) ++j;
      out.emplace_back(text.substr(i, j - i));
      i = j;
    } else {
      out.emplace_back(1, text[i++]);
    }
  }
  return out;
}

namespace detail {

inline void check_corpus(std::size_t candidates, std::size_t references) {
  if (candidates != references) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(candidates) + " candidates for " +
                                               std::to_string(references) + " references");
  }
  if (candidates == 0) throw Error(ErrorKind::EmptyCorpus, "no candidate/reference pairs");
}

struct NgramStats {
  std::array<double, 4> matched{};
  std::array<double, 4> total{};
  double candidate_length = 0;
  double reference_length = 0;
};

// Pools clipped n-gram matches; each n-gram counts with the mean weight of
// its tokens (all 1 for plain BLEU).
inline void add_ngrams(NgramStats& s, const std::vector<std::string>& cand, const std::vector<std::string>& ref,
                       double keyword_weight) {
  auto weight = [&](const std::vector<std::string>& toks, std::size_t i, std::size_t n) {
    double w = 0;
    for (std::size_t k = i; k < i + n; ++k) w += is_code_keyword(toks[k]) ? keyword_weight : 1.0;
    return w / static_cast<double>(n);
  };
  for (std::size_t n = 1; n <= 4; ++n) {
    std::map<std::vector<std::string>, std::pair<std::size_t, double>> cand_counts;  // count, weight
    std::map<std::vector<std::string>, std::size_t> ref_counts;
    for (std::size_t i = 0; i + n <= cand.size(); ++i) {
      auto& e = cand_counts[{cand.begin() + static_cast<std::ptrdiff_t>(i), cand.begin() + static_cast<std::ptrdiff_t>(i + n)}];
      ++e.first;
      e.second = weight(cand, i, n);
    }
    for (std::size_t i = 0; i + n <= ref.size(); ++i) {
      ++ref_counts[{ref.begin() + static_cast<std::ptrdiff_t>(i), ref.begin() + static_cast<std::ptrdiff_t>(i + n)}];
    }
    for (const auto& [gram, cw] : cand_counts) {
      const auto it = ref_counts.find(gram);
      const std::size_t clipped = it == ref_counts.end() ? 0 : std::min(cw.first, it->second);
      s.matched[n - 1] += cw.second * static_cast<double>(clipped);
      s.total[n - 1] += cw.second * static_cast<double>(cw.first);
    }
  }
  s.candidate_length += static_cast<double>(cand.size());
  s.reference_length += static_cast<double>(ref.size());
}

// Geometric mean of the precisions times the brevity penalty, in [0, 1].
inline double ngram_score(const NgramStats& s) {
  if (s.candidate_length == 0 || s.matched[0] == 0) return 0.0;
  double log_sum = 0;
  for (std::size_t n = 0; n < 4; ++n) {
    const double p = n > 0 && s.matched[n] == 0 ? (s.matched[n] + 1) / (s.total[n] + 1) : s.matched[n] / s.total[n];
    log_sum += std::log(p);
  }
  const double bp = s.candidate_length < s.reference_length ? std::exp(1 - s.reference_length / s.candidate_length) : 1.0;
  return bp * std::exp(log_sum / 4);
}

inline double ngram_corpus(const std::vector<std::string>& candidates, const std::vector<std::string>& references,
                           double keyword_weight) {
  NgramStats s;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    add_ngrams(s, code_tokens(candidates[i]), code_tokens(references[i]), keyword_weight);
  }
  return ngram_score(s);
}

}  // namespace detail

/// Corpus BLEU over code tokens, 0..100.
inline double bleu(const std::vector<std::string>& candidates, const std::vector<std::string>& references) {
  detail::check_corpus(candidates.size(), references.size());
  return 100.0 * detail::ngram_corpus(candidates, references, 1.0);
}

/// Trailing whitespace stripped from every line, exactly one final newline.
inline std::string normalize_for_match(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string line(text.substr(pos, nl - pos));
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    lines.push_back(std::move(line));
    pos = nl + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out.empty() ? "\n" : out;
}

inline double exact_match(const std::vector<std::string>& candidates, const std::vector<std::string>& references) {
  detail::check_corpus(candidates.size(), references.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    hits += normalize_for_match(candidates[i]) == normalize_for_match(references[i]);
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(candidates.size());
}

namespace detail {

// Generic labelled tree; identifiers become "<id>", literals keep values.
struct LabelTree {
  std::string label;
  std::vector<LabelTree> children;
};

inline LabelTree expr_tree(const pymini::Expr& e) {
  using pymini::ExprKind;
  LabelTree t;
  switch (e.kind) {
    case ExprKind::IntLit: t.label = "Int:" + std::to_string(e.value); break;
    case ExprKind::BoolLit: t.label = e.value ? "Bool:True" : "Bool:False"; break;
    case ExprKind::StrLit: t.label = "Str:" + e.text; break;
    case ExprKind::NoneLit: t.label = "None"; break;
    case ExprKind::Name: t.label = "<id>"; break;
    case ExprKind::Unary: t.label = "Unary:" + e.text; break;
    case ExprKind::Binary: t.label = "BinOp:" + e.text; break;
    case ExprKind::Compare: t.label = "Compare:" + e.text; break;
    case ExprKind::BoolOp: t.label = "BoolOp:" + e.text; break;
    case ExprKind::Call: t.label = pymini::is_builtin(e.text) ? "Call:" + e.text : "Call:<id>"; break;
  }
  for (const auto& a : e.args) t.children.push_back(expr_tree(a));
  return t;
}

inline LabelTree block_tree(const pymini::Block& b);

inline LabelTree stmt_tree(const pymini::Stmt& s) {
  using pymini::StmtKind;
  LabelTree t;
  switch (s.kind) {
    case StmtKind::Assign: t.label = "Assign"; break;
    case StmtKind::AugAssign: t.label = "AugAssign:" + s.op; break;
    case StmtKind::ExprStmt: t.label = "Expr"; break;
    case StmtKind::Return: t.label = "Return"; break;
    case StmtKind::Print: t.label = "Print"; break;
    case StmtKind::If: t.label = s.has_else ? "If+else" : "If"; break;
    case StmtKind::While: t.label = "While"; break;
    case StmtKind::ForRange: t.label = "For"; break;
  }
  if (!s.target.empty()) t.children.push_back({"<id>", {}});
  if (s.kind == StmtKind::If) {
    for (std::size_t i = 0; i < s.exprs.size(); ++i) {
      t.children.push_back(expr_tree(s.exprs[i]));
      t.children.push_back(block_tree(s.bodies[i]));
    }
    if (s.has_else) t.children.push_back(block_tree(s.bodies.back()));
    return t;
  }
  for (const auto& e : s.exprs) t.children.push_back(expr_tree(e));
  for (const auto& b : s.bodies) t.children.push_back(block_tree(b));
  return t;
}

inline LabelTree block_tree(const pymini::Block& b) {
  LabelTree t{"Block", {}};
  for (const auto& s : b) t.children.push_back(stmt_tree(s));
  return t;
}

inline LabelTree program_tree(const pymini::Program& p) {
  LabelTree params{"Params", {}};
  for (std::size_t i = 0; i < p.params.size(); ++i) params.children.push_back({"<id>", {}});
  return {"FunctionDef", {std::move(params), block_tree(p.body)}};
}

// Serializes every subtree; those with children (height >= 2) are counted.
inline std::string collect_subtrees(const LabelTree& t, std::map<std::string, std::size_t>& out) {
  std::string s = "(" + t.label;
  for (const auto& c : t.children) s += " " + collect_subtrees(c, out);
  s += ")";
  if (!t.children.empty()) ++out[s];
  return s;
}

inline std::map<std::string, std::size_t> subtree_counts(const pymini::Program& p) {
  std::map<std::string, std::size_t> out;
  collect_subtrees(program_tree(p), out);
  return out;
}

using DefUseEdge = std::tuple<std::string, int, int>;  // variable, defining stmt, using stmt

// Reaching definitions over the structured program. Statement 0 is the
// function header (defines the parameters); others are numbered in preorder.
class Dataflow {
 public:
  explicit Dataflow(const pymini::Program& p) {
    name_of(p.params);
    number(p.body);
    Defs in;
    for (const auto& param : p.params) in[param] = {0};
    block(p.body, in);
  }

  std::set<DefUseEdge> normalized_edges() const {
    std::set<DefUseEdge> out;
    for (const auto& [var, def, use] : edges_) out.insert({names_.at(var), def, use});
    return out;
  }

 private:
  using Defs = std::map<std::string, std::set<int>>;

  void see(const std::string& var) {
    if (!names_.count(var)) names_.emplace(var, "v" + std::to_string(names_.size()));
  }
  void name_of(const std::vector<std::string>& params) {
    for (const auto& p : params) see(p);
  }
  void see_expr(const pymini::Expr& e) {
    if (e.kind == pymini::ExprKind::Name) see(e.text);
    for (const auto& a : e.args) see_expr(a);
  }
  void number(const pymini::Block& b) {
    for (const auto& s : b) {
      index_[&s] = static_cast<int>(index_.size()) + 1;
      if (!s.target.empty()) see(s.target);
      for (std::size_t i = 0; i < s.exprs.size(); ++i) {
        see_expr(s.exprs[i]);
        if (s.kind == pymini::StmtKind::If && i < s.bodies.size()) number(s.bodies[i]);
      }
      if (s.kind == pymini::StmtKind::If) {
        if (s.has_else) number(s.bodies.back());
      } else {
        for (const auto& body : s.bodies) number(body);
      }
    }
  }

  static void merge(Defs& into, const Defs& from) {
    for (const auto& [v, defs] : from) into[v].insert(defs.begin(), defs.end());
  }

  void use(const pymini::Expr& e, const Defs& state, int at) {
    if (e.kind == pymini::ExprKind::Name) {
      if (auto it = state.find(e.text); it != state.end()) {
        for (int d : it->second) edges_.insert({e.text, d, at});
      }
    }
    for (const auto& a : e.args) use(a, state, at);
  }

  // Returns the state after the block, or nullopt when no path falls through.
  std::optional<Defs> block(const pymini::Block& b, Defs state) {
    for (const auto& s : b) {
      auto next = stmt(s, std::move(state));
      if (!next) return std::nullopt;
      state = std::move(*next);
    }
    return state;
  }

  std::optional<Defs> stmt(const pymini::Stmt& s, Defs state) {
    using pymini::StmtKind;
    const int at = index_.at(&s);
    switch (s.kind) {
      case StmtKind::Assign:
      case StmtKind::AugAssign:
        if (s.kind == StmtKind::AugAssign) use(pymini::Expr::name(s.target), state, at);
        use(s.exprs[0], state, at);
        state[s.target] = {at};
        return state;
      case StmtKind::ExprStmt:
      case StmtKind::Print:
        for (const auto& e : s.exprs) use(e, state, at);
        return state;
      case StmtKind::Return:
        for (const auto& e : s.exprs) use(e, state, at);
        return std::nullopt;
      case StmtKind::If: {
        std::optional<Defs> out;
        for (std::size_t i = 0; i < s.exprs.size(); ++i) {
          use(s.exprs[i], state, at);
          if (auto branch = block(s.bodies[i], state)) {
            if (!out) out = Defs{};
            merge(*out, *branch);
          }
        }
        auto rest = s.has_else ? block(s.bodies.back(), state) : std::optional<Defs>(state);
        if (rest) {
          if (!out) out = Defs{};
          merge(*out, *rest);
        }
        return out;
      }
      case StmtKind::While: {
        Defs head = state;
        while (true) {
          use(s.exprs[0], head, at);
          Defs next = state;
          if (auto body = block(s.bodies[0], head)) merge(next, *body);
          if (next == head) break;
          head = std::move(next);
        }
        return head;
      }
      case StmtKind::ForRange: {
        for (const auto& e : s.exprs) use(e, state, at);
        Defs head = state;
        while (true) {
          Defs body_in = head;
          body_in[s.target] = {at};
          Defs next = state;
          if (auto body = block(s.bodies[0], body_in)) merge(next, *body);
          if (next == head) break;
          head = std::move(next);
        }
        return head;
      }
    }
    return state;
  }

  std::map<const pymini::Stmt*, int> index_;
  std::map<std::string, std::string> names_;
  std::set<DefUseEdge> edges_;
};

}  // namespace detail

struct CodeBleuOptions {
  std::array<double, 4> weights{0.25, 0.25, 0.25, 0.25};  // ngram, weighted ngram, ast, dataflow
  double keyword_weight = 4.0;
};

struct CodeBleu {
  double score = 0;  // 0..100
  double ngram = 0;
  double weighted_ngram = 0;
  double ast_match = 0;
  double dataflow_match = 0;
};

inline CodeBleu codebleu(const std::vector<std::string>& candidates, const std::vector<std::string>& references,
                         const CodeBleuOptions& opts = {}) {
  detail::check_corpus(candidates.size(), references.size());
  CodeBleu r;
  r.ngram = detail::ngram_corpus(candidates, references, 1.0);
  r.weighted_ngram = detail::ngram_corpus(candidates, references, opts.keyword_weight);

  double ast_hit = 0, ast_total = 0, df_hit = 0, df_total = 0;
  for (std::size_t i = 0; i < references.size(); ++i) {
    pymini::Program ref;
    try {
      ref = pymini::parse(references[i]);
    } catch (const Error& e) {
      throw Error(ErrorKind::ReferenceUnparseable, "reference " + std::to_string(i) + ": " + e.what());
    }
    std::optional<pymini::Program> cand;
    try {
      cand = pymini::parse(candidates[i]);
    } catch (const Error&) {
    }
    const auto ref_trees = detail::subtree_counts(ref);
    const auto cand_trees = cand ? detail::subtree_counts(*cand) : std::map<std::string, std::size_t>{};
    for (const auto& [tree, count] : ref_trees) {
      ast_total += static_cast<double>(count);
      if (auto it = cand_trees.find(tree); it != cand_trees.end()) {
        ast_hit += static_cast<double>(std::min(count, it->second));
      }
    }
    const auto ref_edges = detail::Dataflow(ref).normalized_edges();
    if (ref_edges.empty()) {
      df_total += 1;
      df_hit += cand ? 1 : 0;
      continue;
    }
    df_total += static_cast<double>(ref_edges.size());
    if (!cand) continue;
    const auto cand_edges = detail::Dataflow(*cand).normalized_edges();
    for (const auto& e : ref_edges) df_hit += cand_edges.count(e) ? 1 : 0;
  }
  r.ast_match = ast_total > 0 ? ast_hit / ast_total : 0;
  r.dataflow_match = df_total > 0 ? df_hit / df_total : 0;
  r.score = 100.0 * (opts.weights[0] * r.ngram + opts.weights[1] * r.weighted_ngram + opts.weights[2] * r.ast_match +
                     opts.weights[3] * r.dataflow_match);
  return r;
}

struct Prediction {
  std::string id;
  std::string code;
};

inline std::vector<Prediction> read_predictions(const std::string& path) {
  std::vector<Prediction> out;
  std::size_t n = 0;
  for (const auto& j : read_json_lines(path)) {
    ++n;
    try {
      out.push_back({j.at("id").get<std::string>(), j.at("code").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ParseError, path + ": prediction " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

struct MetricScores {
  std::size_t count = 0;
  double bleu = 0;
  CodeBleu codebleu;
  double em = 0;
};

struct LengthBin {
  std::size_t min_lines = 0;
  std::size_t max_lines = 0;  // 0 = unbounded
  std::size_t count = 0;
  std::optional<MetricScores> scores;
};

struct MetricReport {
  MetricScores overall;
  std::vector<LengthBin> by_length;
};

inline std::size_t code_lines(std::string_view code) {
  std::size_t n = 0;
  std::size_t pos = 0;
  while (pos < code.size()) {
    std::size_t nl = code.find('\n', pos);
    if (nl == std::string_view::npos) nl = code.size();
    const auto line = code.substr(pos, nl - pos);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) ++n;
    pos = nl + 1;
  }
  return n;
}

inline MetricScores score_all(const std::vector<std::string>& candidates, const std::vector<std::string>& references,
                              const CodeBleuOptions& opts = {}) {
  return {candidates.size(), bleu(candidates, references), codebleu(candidates, references, opts),
          exact_match(candidates, references)};
}

/// Scores predictions against the references of one split, overall and by
/// reference length (non-empty lines).
inline MetricReport report(const std::vector<Prediction>& predictions, const std::vector<DatasetRecord>& records,
                           std::optional<Split> split = Split::Test, const CodeBleuOptions& opts = {}) {
  std::map<std::string, const DatasetRecord*> refs;
  for (const auto& r : records) {
    if (!split || r.split == *split) refs.emplace(r.id, &r);
  }
  std::map<std::string, const Prediction*> preds;
  for (const auto& p : predictions) {
    if (!preds.emplace(p.id, &p).second) throw Error(ErrorKind::IdMismatch, "duplicate prediction id " + p.id);
  }
  std::size_t missing = 0, extra = 0;
  for (const auto& [id, r] : refs) missing += !preds.count(id);
  for (const auto& [id, p] : preds) extra += !refs.count(id);
  if (missing || extra || refs.empty()) {
    throw Error(ErrorKind::IdMismatch, std::to_string(missing) + " reference ids without prediction, " +
                                           std::to_string(extra) + " predictions without reference");
  }

  MetricReport out;
  for (auto [lo, hi] : {std::pair<std::size_t, std::size_t>{1, 3}, {4, 6}, {7, 9}, {10, 12}, {13, 0}}) {
    out.by_length.push_back({lo, hi, 0, std::nullopt});
  }
  std::vector<std::string> cands, refs_text;
  std::vector<std::vector<std::string>> bin_c(out.by_length.size()), bin_r(out.by_length.size());
  for (const auto& [id, r] : refs) {
    cands.push_back(preds.at(id)->code);
    refs_text.push_back(r->code);
    const std::size_t lines = code_lines(r->code);
    for (std::size_t b = 0; b < out.by_length.size(); ++b) {
      const auto& bin = out.by_length[b];
      if (lines >= bin.min_lines && (bin.max_lines == 0 || lines <= bin.max_lines)) {
        bin_c[b].push_back(cands.back());
        bin_r[b].push_back(refs_text.back());
        break;
      }
    }
  }
  out.overall = score_all(cands, refs_text, opts);
  for (std::size_t b = 0; b < out.by_length.size(); ++b) {
    out.by_length[b].count = bin_c[b].size();
    if (!bin_c[b].empty()) out.by_length[b].scores = score_all(bin_c[b], bin_r[b], opts);
  }
  return out;
}

inline nlohmann::ordered_json to_json(const MetricScores& s) {
  nlohmann::ordered_json j;
  j["count"] = s.count;
  j["bleu"] = s.bleu;
  j["codebleu"] = s.codebleu.score;
  j["components"] = {{"ngram", s.codebleu.ngram},
                     {"weighted_ngram", s.codebleu.weighted_ngram},
                     {"ast_match", s.codebleu.ast_match},
                     {"dataflow_match", s.codebleu.dataflow_match}};
  j["em"] = s.em;
  return j;
}

inline nlohmann::ordered_json to_json(const MetricReport& r) {
  nlohmann::ordered_json j = to_json(r.overall);
  j["by_length"] = nlohmann::ordered_json::array();
  for (const auto& bin : r.by_length) {
    nlohmann::ordered_json b;
    b["lines"] = bin.max_lines ? std::to_string(bin.min_lines) + "-" + std::to_string(bin.max_lines)
                               : std::to_string(bin.min_lines) + "+";
    if (bin.scores) {
      auto s = to_json(*bin.scores);
      for (auto it = s.begin(); it != s.end(); ++it) b[it.key()] = it.value();
    } else {
      b["count"] = 0;
      for (const char* key : {"bleu", "codebleu", "components", "em"}) b[key] = nullptr;
    }
    j["by_length"].push_back(std::move(b));
  }
  return j;
}

}  // namespace flowco
