#pragma once

#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowco/error.hpp"
#include "flowco/record.hpp"
#include "flowco/rng.hpp"

namespace flowco {

inline constexpr std::string_view kMaskToken = "[MASK]";
inline constexpr double kDefaultMaskProbability = 0.15;

/// A word-level token and its byte span in the source text.
struct WordToken {
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
};

namespace detail {

inline bool is_word_byte(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

}  // namespace detail

/// Whitespace-separated words with punctuation split off. "[SEP]" and
/// "[MASK]" stay whole, as does each quoted string.
inline std::vector<WordToken> word_tokenize_spans(std::string_view t) {
  std::vector<WordToken> out;
  std::size_t i = 0;
  while (i < t.size()) {
    const auto c = static_cast<unsigned char>(t[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    if (t.substr(i, kSepToken.size()) == kSepToken) {
      j = i + kSepToken.size();
    } else if (t.substr(i, kMaskToken.size()) == kMaskToken) {
      j = i + kMaskToken.size();
    } else if (c == '\'' || c == '"') {
      while (j < t.size() && t[j] != t[i]) j += t[j] == '\\' ? 2 : 1;
      j = std::min(j + 1, t.size());
    } else if (detail::is_word_byte(c)) {
      while (j < t.size() && detail::is_word_byte(static_cast<unsigned char>(t[j]))) ++j;
    }
    out.push_back({std::string(t.substr(i, j - i)), i, j});
    i = j;
  }
  return out;
}

inline std::vector<std::string> word_tokenize(std::string_view t) {
  std::vector<std::string> out;
  for (auto& tok : word_tokenize_spans(t)) out.push_back(std::move(tok.text));
  return out;
}

struct MaskedSample {
  std::vector<std::string> original;
  std::vector<std::string> masked;
  std::vector<std::size_t> mask_positions;
};

/// Replaces each token other than "[SEP]" by "[MASK]" independently with
/// probability p.
inline MaskedSample mask(const std::vector<std::string>& tokens, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidArgument, "mask probability must lie in [0, 1]");
  Rng rng(seed);
  MaskedSample s{tokens, tokens, {}};
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == kSepToken) continue;
    if (rng.real() < p) {
      s.masked[i] = kMaskToken;
      s.mask_positions.push_back(i);
    }
  }
  return s;
}

/// Undoes a mask using the original tokens.
inline std::vector<std::string> reconstruct(const MaskedSample& s) {
  auto out = s.masked;
  for (auto i : s.mask_positions) out[i] = s.original[i];
  return out;
}

enum class SampleSource { Code, Encoding };

inline std::string_view to_string(SampleSource s) { return s == SampleSource::Code ? "code" : "encoding"; }

struct PretrainSample {
  SampleSource source = SampleSource::Code;
  std::string original;
  std::string masked;
  std::vector<std::pair<std::size_t, std::size_t>> mask_spans;  // code point offsets into original
  MaskedSample tokens;
};

namespace detail {

inline std::size_t codepoints_before(std::string_view s, std::size_t byte) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < byte && i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) ++n;
  }
  return n;
}

}  // namespace detail

inline PretrainSample make_pretrain_sample(SampleSource source, const std::string& text, double p,
                                           std::uint64_t seed) {
  const auto spans = word_tokenize_spans(text);
  std::vector<std::string> words;
  words.reserve(spans.size());
  for (const auto& t : spans) words.push_back(t.text);

  PretrainSample s;
  s.source = source;
  s.original = text;
  s.tokens = mask(words, p, seed);
  std::size_t copied = 0;
  for (auto i : s.tokens.mask_positions) {
    s.masked.append(text, copied, spans[i].begin - copied);
    s.masked += kMaskToken;
    copied = spans[i].end;
    s.mask_spans.emplace_back(detail::codepoints_before(text, spans[i].begin),
                              detail::codepoints_before(text, spans[i].end));
  }
  s.masked.append(text, copied);
  return s;
}

/// One sample per code text (originals, then augmented) and one per
/// original's modified-string encoding.
inline std::vector<PretrainSample> build_pretrain_corpus(const std::vector<DatasetRecord>& originals,
                                                         const std::vector<DatasetRecord>& augmented, double p,
                                                         std::uint64_t seed) {
  for (const auto* group : {&originals, &augmented}) {
    for (const auto& r : *group) {
      if (r.split != Split::Train) {
        throw Error(ErrorKind::SplitLeakage,
                    "record " + r.id + " is in the " + std::string(to_string(r.split)) + " split");
      }
    }
  }
  std::vector<PretrainSample> out;
  out.reserve(originals.size() * 2 + augmented.size());
  std::uint64_t index = 0;
  for (const auto& r : originals) {
    out.push_back(make_pretrain_sample(SampleSource::Code, r.code, p, derive_seed(seed, {index++})));
    out.push_back(make_pretrain_sample(SampleSource::Encoding, r.enc_modified, p, derive_seed(seed, {index++})));
  }
  for (const auto& r : augmented) {
    out.push_back(make_pretrain_sample(SampleSource::Code, r.code, p, derive_seed(seed, {index++})));
  }
  return out;
}

inline nlohmann::ordered_json to_json(const PretrainSample& s) {
  nlohmann::ordered_json j;
  j["source"] = to_string(s.source);
  j["original"] = s.original;
  j["masked"] = s.masked;
  j["mask_spans"] = nlohmann::ordered_json::array();
  for (const auto& [b, e] : s.mask_spans) j["mask_spans"].push_back({b, e});
  return j;
}

}  // namespace flowco
