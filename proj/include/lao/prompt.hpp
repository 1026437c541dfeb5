#pragma once

#include "lao/corpus.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lao {

enum class Variant { Full, ConfOnly, ConventionalConf, NoConf, NoGuess };

constexpr Variant kAllVariants[] = {Variant::Full, Variant::ConfOnly,
                                    Variant::ConventionalConf, Variant::NoConf,
                                    Variant::NoGuess};

std::string_view variant_name(Variant v);
std::optional<Variant> variant_from_name(std::string_view name);

// Sentence text with "|" inserted immediately before the first character
// of each annotated first token. Duplicate first tokens collapse to one
// pipe; no annotations returns the text unchanged.
std::string mark_sentence(const Sentence& sentence,
                          std::span<const EventAnnotation> annotations);

struct PromptSpec {
  std::string topic;
  std::string event_type;
  std::vector<std::string> sibling_types;
  Variant variant = Variant::Full;
  std::vector<std::string> marked_examples; // pipe-marked exemplar sentences
  std::string query_sentence;
};

// One template file per variant, UTF-8 with {{slot}} placeholders. The
// recognized slots are {{topic}}, {{event_type}}, {{sibling_types}},
// {{examples}} and {{query_sentence}}.
class TemplateSet {
public:
  static TemplateSet builtin();
  static TemplateSet load_dir(const std::filesystem::path& dir);

  const std::string& text(Variant v) const { return texts_.at(v); }
  std::string render(const PromptSpec& spec) const;

private:
  std::map<Variant, std::string> texts_;
};

} // namespace lao
