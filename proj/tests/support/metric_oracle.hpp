#pragma once

// Straightforward reference implementations used as test oracles. They
// favour obviousness over speed and share no code with flowco::metrics.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using Tokens = std::vector<std::string>;

inline bool keyword(const std::string& t) {
  static const std::set<std::string> kw = {"def", "return", "if",   "elif", "else",  "while", "for",
                                           "in",  "and",    "or",   "not",  "True",  "False", "None"};
  return kw.count(t) > 0;
}

inline std::vector<Tokens> grams(const Tokens& t, std::size_t n) {
  std::vector<Tokens> out;
  for (std::size_t i = 0; i + n <= t.size(); ++i) out.emplace_back(t.begin() + i, t.begin() + i + n);
  return out;
}

inline std::size_t count_of(const std::vector<Tokens>& list, const Tokens& g) {
  return static_cast<std::size_t>(std::count(list.begin(), list.end(), g));
}

inline double gram_weight(const Tokens& g, double kw_weight) {
  double sum = 0;
  for (const auto& t : g) sum += keyword(t) ? kw_weight : 1.0;
  return sum / static_cast<double>(g.size());
}

/// Corpus BLEU in [0, 1] with add-one smoothing on empty higher orders.
inline double bleu(const std::vector<Tokens>& cands, const std::vector<Tokens>& refs, double kw_weight = 1.0) {
  double c_len = 0, r_len = 0;
  double log_p = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    double m = 0, t = 0;
    for (std::size_t k = 0; k < cands.size(); ++k) {
      const auto cg = grams(cands[k], n);
      const auto rg = grams(refs[k], n);
      std::vector<Tokens> distinct;
      for (const auto& g : cg) {
        if (std::find(distinct.begin(), distinct.end(), g) == distinct.end()) distinct.push_back(g);
      }
      for (const auto& g : distinct) {
        const double w = gram_weight(g, kw_weight);
        const auto c = count_of(cg, g);
        m += w * static_cast<double>(std::min(c, count_of(rg, g)));
        t += w * static_cast<double>(c);
      }
    }
    if (n == 1 && m == 0) return 0;
    log_p += std::log(n > 1 && m == 0 ? 1.0 / (t + 1) : m / t);
  }
  for (std::size_t k = 0; k < cands.size(); ++k) {
    c_len += static_cast<double>(cands[k].size());
    r_len += static_cast<double>(refs[k].size());
  }
  if (c_len == 0) return 0;
  const double bp = c_len < r_len ? std::exp(1 - r_len / c_len) : 1.0;
  return bp * std::exp(log_p / 4);
}

struct Tree {
  std::string label;
  std::vector<Tree> kids;
};

inline std::string show(const Tree& t) {
  std::string s = "(" + t.label;
  for (const auto& k : t.kids) s += " " + show(k);
  return s + ")";
}

inline void all_subtrees(const Tree& t, std::vector<std::string>& out) {
  if (!t.kids.empty()) out.push_back(show(t));
  for (const auto& k : t.kids) all_subtrees(k, out);
}

/// Fraction of reference subtrees (height >= 2) found in the candidate,
/// each candidate subtree usable once.
inline double subtree_match(const Tree& ref, const Tree& cand) {
  std::vector<std::string> r, c;
  all_subtrees(ref, r);
  all_subtrees(cand, c);
  std::size_t hit = 0;
  for (const auto& s : r) {
    auto it = std::find(c.begin(), c.end(), s);
    if (it != c.end()) {
      ++hit;
      c.erase(it);
    }
  }
  return r.empty() ? 0 : static_cast<double>(hit) / static_cast<double>(r.size());
}

}  // namespace oracle
