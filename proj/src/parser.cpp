#include "lao/parser.hpp"

#include "lao/errors.hpp"
#include "lao/text.hpp"

#include <cctype>
#include <regex>

namespace lao {

std::optional<int> extract_confidence(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) continue;
    const bool prev_digit =
        i > 0 && std::isdigit(static_cast<unsigned char>(text[i - 1]));
    const bool next_digit =
        i + 1 < text.size() &&
        std::isdigit(static_cast<unsigned char>(text[i + 1]));
    if (prev_digit || next_digit) continue;
    const int v = text[i] - '0';
    if (v >= 1 && v <= 5) return v;
  }
  return std::nullopt;
}

namespace {

enum class Label { Sentence, Confidence, Explanation, Questions };

// Accepts "SENTENCE: x", "- **confidence**: 4", "2) QUESTIONS:" and the
// like: optional list markers, optional markdown emphasis, then the
// label and a colon.
const std::regex kLabelRe(
    R"(^\s*(?:[-*+>]\s*|\d+[.)]\s*|\(\d+\)\s*)*(?:\*\*|__|[*_]|#+\s*)?\s*)"
    R"((sentence|confidence|explanation|questions)(?:\s*#?\d+)?\s*(?:\*\*|__|[*_])?\s*:\s*(.*)$)",
    std::regex::icase);

const std::regex kBulletRe(R"(^\s*(?:[-*+>]|\d+[.)]|\(\d+\))\s+(.*)$)");

std::optional<std::pair<Label, std::string>> match_label(const std::string& line) {
  std::smatch m;
  if (!std::regex_match(line, m, kLabelRe)) return std::nullopt;
  std::string word = to_lower_ascii(m[1].str());
  Label label = Label::Sentence;
  if (word == "confidence") label = Label::Confidence;
  else if (word == "explanation") label = Label::Explanation;
  else if (word == "questions") label = Label::Questions;
  return std::make_pair(label, m[2].str());
}

std::string clean_body(std::string_view body) {
  std::string_view s = trim(body);
  while (!s.empty() && (s.front() == '*' || s.front() == '_')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == '*' || s.back() == '_')) s.remove_suffix(1);
  return std::string(trim(s));
}

} // namespace

ParsedResponse parse_response(std::string_view raw, Variant variant) {
  if (trim(raw).empty()) throw ParseError("empty model response");

  ParsedResponse out;
  bool saw_any_label = false;
  bool in_questions = false;
  Triplet* cur = nullptr;

  auto to_remainder = [&](std::string_view text) {
    if (trim(text).empty()) return;
    out.unparsed_remainder += std::string(trim(text));
    out.unparsed_remainder += "\n";
  };

  std::size_t pos = 0;
  while (pos <= raw.size()) {
    std::size_t nl = raw.find('\n', pos);
    if (nl == std::string_view::npos) nl = raw.size();
    const std::string line(raw.substr(pos, nl - pos));
    pos = nl + 1;

    if (trim(line).empty()) continue;

    if (auto labeled = match_label(line)) {
      saw_any_label = true;
      const auto& [label, raw_body] = *labeled;
      std::string body = clean_body(raw_body);
      switch (label) {
        case Label::Sentence:
          out.triplets.emplace_back();
          cur = &out.triplets.back();
          cur->marked_sentence = body;
          in_questions = false;
          break;
        case Label::Confidence: {
          if (!cur) {
            out.triplets.emplace_back();
            cur = &out.triplets.back();
            cur->warnings.push_back("confidence block before any sentence block");
          }
          in_questions = false;
          if (cur->confidence) {
            cur->warnings.push_back("duplicate confidence block");
            to_remainder(body);
            break;
          }
          auto conf = extract_confidence(body);
          if (conf) {
            cur->confidence = conf;
          } else {
            cur->warnings.push_back("confidence not in 1-5: \"" + body + "\"");
            to_remainder(body);
          }
          break;
        }
        case Label::Explanation:
          if (!cur) {
            out.triplets.emplace_back();
            cur = &out.triplets.back();
            cur->warnings.push_back("explanation block before any sentence block");
          }
          in_questions = false;
          if (cur->explanation) {
            cur->warnings.push_back("duplicate explanation block");
            to_remainder(body);
          } else {
            cur->explanation = body;
          }
          break;
        case Label::Questions:
          if (!cur) {
            out.triplets.emplace_back();
            cur = &out.triplets.back();
            cur->warnings.push_back("questions block before any sentence block");
          }
          in_questions = true;
          if (!body.empty()) cur->questions.push_back(body);
          break;
      }
      continue;
    }

    std::smatch m;
    if (in_questions && cur && std::regex_match(line, m, kBulletRe)) {
      std::string q = clean_body(m[1].str());
      if (!q.empty()) cur->questions.push_back(q);
      continue;
    }

    // "SENTENCE:" with the copy on the following line.
    if (cur && cur->marked_sentence.empty() && !in_questions) {
      cur->marked_sentence = std::string(trim(line));
      continue;
    }
    in_questions = false;
    to_remainder(line);
  }

  // A bare answer with no labels at all is a single unaltered-or-marked
  // sentence copy.
  if (!saw_any_label) {
    out.triplets.clear();
    out.unparsed_remainder.clear();
    Triplet t;
    t.marked_sentence = std::string(trim(raw));
    out.triplets.push_back(std::move(t));
    return out;
  }

  // Variant contract: violations are downgraded to warnings and the
  // offending text is preserved in the remainder.
  for (auto& t : out.triplets) {
    if (variant == Variant::NoConf && t.confidence) {
      t.warnings.push_back("confidence reported under the no_conf contract");
      to_remainder(std::to_string(*t.confidence));
      t.confidence.reset();
    }
    if (variant == Variant::ConfOnly || variant == Variant::ConventionalConf) {
      if (t.explanation) {
        t.warnings.push_back("explanation reported under a confidence-only contract");
        to_remainder(*t.explanation);
        t.explanation.reset();
      }
      if (!t.questions.empty()) {
        t.warnings.push_back("questions reported under a confidence-only contract");
        for (const auto& q : t.questions) to_remainder(q);
        t.questions.clear();
      }
    }
  }
  return out;
}

} // namespace lao
