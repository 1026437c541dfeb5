#pragma once

#include "lao/corpus.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lao {

enum class EditOp : std::uint8_t { Match, Substitute, Delete, Insert };

// Minimum-cost global alignment of a onto b under unit costs (match 0,
// everything else 1). Delete consumes a character of a, Insert consumes
// a character of b. The traceback is deterministic: at equal cost the
// preference is match > substitute > delete > insert.
struct Alignment {
  std::vector<EditOp> path;
  std::size_t cost = 0;
};

Alignment align_chars(std::u32string_view a, std::u32string_view b);

struct AlignmentResult {
  std::vector<std::size_t> token_indices; // sorted, distinct; empty when unusable
  double normalized_distance = 0.0;       // edit cost / max(|a|, |b|)
  bool usable = true;
  std::vector<std::string> warnings;
};

// Recovers the token indices marked by "|" pipes in an imperfect copy of
// the original sentence: strip the pipes, align the stripped copy to the
// original, map each pipe through the alignment to an original character
// and snap it to the containing token (or the next token when it lands
// in whitespace). Copies beyond the distance threshold are unusable and
// contribute no indices.
AlignmentResult recover_pipe_positions(const Sentence& original,
                                       std::string_view marked_copy,
                                       double threshold = 0.5);

} // namespace lao
