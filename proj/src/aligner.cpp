#include "lao/aligner.hpp"

#include <algorithm>
#include <limits>

namespace lao {

Alignment align_chars(std::u32string_view a, std::u32string_view b) {
  const std::size_t m = a.size(), n = b.size();
  // Full DP matrix; inputs are sentences, not documents.
  std::vector<std::size_t> dp((m + 1) * (n + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& {
    return dp[i * (n + 1) + j];
  };
  for (std::size_t i = 0; i <= m; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= n; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      const std::size_t sub = at(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0 : 1);
      const std::size_t del = at(i - 1, j) + 1;
      const std::size_t ins = at(i, j - 1) + 1;
      at(i, j) = std::min({sub, del, ins});
    }
  }

  Alignment out;
  out.cost = at(m, n);
  out.path.reserve(m + n);
  // Traceback with the fixed tie order match > substitute > delete >
  // insert so recovered positions are bit-stable.
  std::size_t i = m, j = n;
  while (i > 0 || j > 0) {
    const std::size_t cur = at(i, j);
    if (i > 0 && j > 0 && a[i - 1] == b[j - 1] && cur == at(i - 1, j - 1)) {
      out.path.push_back(EditOp::Match);
      --i; --j;
    } else if (i > 0 && j > 0 && cur == at(i - 1, j - 1) + 1) {
      out.path.push_back(EditOp::Substitute);
      --i; --j;
    } else if (i > 0 && cur == at(i - 1, j) + 1) {
      out.path.push_back(EditOp::Delete);
      --i;
    } else {
      out.path.push_back(EditOp::Insert);
      --j;
    }
  }
  std::reverse(out.path.begin(), out.path.end());
  return out;
}

AlignmentResult recover_pipe_positions(const Sentence& original,
                                       std::string_view marked_copy,
                                       double threshold) {
  AlignmentResult result;

  const std::u32string copy_chars = decode_utf8(marked_copy);
  std::u32string stripped;
  stripped.reserve(copy_chars.size());
  // A pipe is represented by the stripped-copy index of the character
  // that immediately follows it.
  std::vector<std::size_t> pipe_positions;
  for (char32_t c : copy_chars) {
    if (c == U'|') {
      pipe_positions.push_back(stripped.size());
    } else {
      stripped.push_back(c);
    }
  }

  const Alignment alignment = align_chars(original.chars, stripped);
  const std::size_t longest = std::max(original.chars.size(), stripped.size());
  result.normalized_distance =
      longest == 0 ? 0.0
                   : static_cast<double>(alignment.cost) /
                         static_cast<double>(longest);
  result.usable = result.normalized_distance <= threshold;
  if (!result.usable) {
    result.warnings.push_back("copy too distant from original (distance " +
                              std::to_string(result.normalized_distance) + ")");
    return result;
  }

  // copy index -> original index for aligned characters.
  constexpr std::size_t kUnaligned = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> copy_to_orig(stripped.size(), kUnaligned);
  {
    std::size_t oi = 0, ci = 0;
    for (EditOp op : alignment.path) {
      switch (op) {
        case EditOp::Match:
        case EditOp::Substitute:
          copy_to_orig[ci++] = oi++;
          break;
        case EditOp::Delete:
          ++oi;
          break;
        case EditOp::Insert:
          ++ci;
          break;
      }
    }
  }

  auto snap_to_token = [&](std::size_t orig_char) -> std::optional<std::size_t> {
    for (std::size_t t = 0; t < original.tokens.size(); ++t) {
      if (orig_char < original.tokens[t].begin) return t; // whitespace gap
      if (orig_char < original.tokens[t].end) return t;
    }
    return std::nullopt; // trailing whitespace
  };

  std::vector<std::size_t> indices;
  for (std::size_t p : pipe_positions) {
    // Walk forward past inserted copy characters to the next aligned one.
    std::size_t ci = p;
    while (ci < stripped.size() && copy_to_orig[ci] == kUnaligned) ++ci;
    if (ci >= stripped.size()) {
      result.warnings.push_back(
          "pipe with no aligned character after it; dropped");
      continue;
    }
    auto tok = snap_to_token(copy_to_orig[ci]);
    if (!tok) {
      result.warnings.push_back("pipe beyond the last token; dropped");
      continue;
    }
    indices.push_back(*tok);
  }
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  result.token_indices = std::move(indices);
  return result;
}

} // namespace lao
