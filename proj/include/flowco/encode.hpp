#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flowco/error.hpp"
#include "flowco/flowgraph.hpp"

namespace flowco {

enum class EncodingVariant { Tuple, String, ModifiedString };

inline constexpr std::string_view kSepToken = "[SEP]";
inline constexpr std::string_view kBlockSeparator = " [SEP] ";

inline std::optional<EncodingVariant> variant_from_name(std::string_view name) {
  if (name == "tuple") return EncodingVariant::Tuple;
  if (name == "string") return EncodingVariant::String;
  if (name == "modified") return EncodingVariant::ModifiedString;
  return std::nullopt;
}

/// Serializes the blocks of a graph, in linearized order, as text/shape
/// pairs. Branch labels are not part of any variant.
inline std::string encode(const FlowGraph& g, EncodingVariant variant) {
  const auto blocks = linearize(g);
  std::string out;
  switch (variant) {
    case EncodingVariant::Tuple:
      out = "[";
      for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (i) out += ", ";
        out += "('" + blocks[i].text + "', '" + std::string(shape_token(blocks[i].kind)) + "')";
      }
      out += "]";
      break;
    case EncodingVariant::String:
      for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (i) out += ",";
        out += "{" + blocks[i].text + "," + std::string(shape_token(blocks[i].kind)) + "}";
      }
      break;
    case EncodingVariant::ModifiedString:
      for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (i) out += kBlockSeparator;
        out += blocks[i].text + ", " + std::string(shape_token(blocks[i].kind));
      }
      break;
  }
  return out;
}

using TextShape = std::pair<std::string, std::string>;

/// Inverse of the modified-string encoding.
inline std::vector<TextShape> decode_modified(std::string_view text) {
  std::vector<TextShape> out;
  if (text.empty()) return out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t sep = text.find(kBlockSeparator, pos);
    std::string_view segment = text.substr(pos, sep == std::string_view::npos ? std::string_view::npos : sep - pos);
    const std::size_t comma = segment.rfind(", ");
    if (comma == std::string_view::npos || !kind_from_token(segment.substr(comma + 2))) {
      throw Error(ErrorKind::MalformedEncoding, "segment lacks a trailing shape token: '" + std::string(segment) + "'");
    }
    out.emplace_back(std::string(segment.substr(0, comma)), std::string(segment.substr(comma + 2)));
    if (sep == std::string_view::npos) break;
    pos = sep + kBlockSeparator.size();
  }
  return out;
}

}  // namespace flowco
