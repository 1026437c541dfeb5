#pragma once

#include "lao/prompt.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lao {

// One parsed answer unit. Deviations from the prompt's contract are
// recorded in `warnings` rather than failing the parse.
struct Triplet {
  std::string marked_sentence;
  std::optional<int> confidence; // 1..5 when present
  std::optional<std::string> explanation;
  std::vector<std::string> questions;
  std::vector<std::string> warnings;
};

struct ParsedResponse {
  std::vector<Triplet> triplets;
  std::string unparsed_remainder;
};

// First standalone digit in 1..5 ("5", "5/5", "Confidence: 4"); a digit
// with another digit adjacent does not count.
std::optional<int> extract_confidence(std::string_view text);

// Scans for SENTENCE/CONFIDENCE/EXPLANATION/QUESTIONS blocks
// (case-insensitive, tolerant of list markers and markdown wrappers).
// Each SENTENCE opens a new triplet; unmatched text accumulates in
// unparsed_remainder. A response with no labels at all becomes a single
// triplet whose marked_sentence is the whole response. Values that
// violate the variant's contract (confidence under NoConf, explanation
// or questions under ConfOnly/ConventionalConf) are moved to the
// remainder with a warning. Empty input raises ParseError.
ParsedResponse parse_response(std::string_view raw, Variant variant);

} // namespace lao
