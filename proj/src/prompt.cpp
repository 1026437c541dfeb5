#include "lao/prompt.hpp"

#include "lao/errors.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace lao {

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::ConfOnly: return "conf_only";
    case Variant::ConventionalConf: return "conventional_conf";
    case Variant::NoConf: return "no_conf";
    case Variant::NoGuess: return "no_guess";
  }
  return "full";
}

std::optional<Variant> variant_from_name(std::string_view name) {
  for (Variant v : kAllVariants)
    if (variant_name(v) == name) return v;
  return std::nullopt;
}

std::string mark_sentence(const Sentence& sentence,
                          std::span<const EventAnnotation> annotations) {
  std::set<std::size_t> firsts;
  for (const auto& ann : annotations) {
    if (ann.first_token >= sentence.tokens.size())
      throw ValidationError("annotation first_token " +
                            std::to_string(ann.first_token) +
                            " out of range for sent " + sentence.sent_id);
    firsts.insert(ann.first_token);
  }
  std::u32string out;
  out.reserve(sentence.chars.size() + firsts.size());
  std::size_t next = 0;
  std::vector<std::size_t> starts;
  for (std::size_t t : firsts) starts.push_back(sentence.tokens[t].begin);
  for (std::size_t i = 0; i < sentence.chars.size(); ++i) {
    if (next < starts.size() && starts[next] == i) {
      out.push_back(U'|');
      ++next;
    }
    out.push_back(sentence.chars[i]);
  }
  return encode_utf8(out);
}

namespace {

// Shared prompt sections. Each variant template is the concatenation of
// the task header, the exemplar block, the variant's answer-format and
// instruction block, and the query line.

const char* kHeader =
    "You are labeling sentences from news stories for \"{{event_type}}\" events, "
    "one of the event types in the \"{{topic}}\" topic.\n"
    "\n"
    "The other event types in this topic are: {{sibling_types}}.\n"
    "Event type labels are mutually exclusive: no word can bear more than one "
    "event type label. Mark only \"{{event_type}}\" events here.\n"
    "\n"
    "Each example below marks every \"{{event_type}}\" event phrase with a "
    "vertical pipe (|) immediately before its first word:\n"
    "\n"
    "{{examples}}\n"
    "\n"
    "Now label the sentence given after \"Sentence:\" below.\n"
    "Copy the sentence, inserting a vertical pipe (|) immediately before the "
    "first word of each \"{{event_type}}\" event phrase. If the sentence "
    "contains no such event, repeat the whole sentence unaltered.\n"
    "\n";

const char* kQuery = "Sentence: {{query_sentence}}\n";

const char* kPresenceScale =
    "The CONFIDENCE number expresses your confidence that a \"{{event_type}}\" "
    "event is present in the sentence: 5 means the highest confidence in the "
    "presence of such an event, and 1 means the greatest confidence in its "
    "absence.";

const char* kGuessPlea =
    "Please make a guess even when you are unsure: tentative guesses with low "
    "confidence are much more useful than no answer.\n";

std::string full_template() {
  std::ostringstream t;
  t << kHeader
    << "Answer with one block per marked event phrase (a single block if you "
       "mark nothing), formatted exactly as:\n"
       "SENTENCE: <your copy of the sentence, with pipes>\n"
       "CONFIDENCE: <a number from 1 to 5>\n"
       "EXPLANATION: <why you did or did not mark an event phrase>\n"
       "QUESTIONS:\n"
       "- <a yes/no question>\n"
       "\n"
    << kPresenceScale
    << " Use 1 when you predict no event instance, and for very unlikely "
       "guesses.\n"
       "Use the EXPLANATION line to account for your decision and your "
       "confidence.\n"
       "Under QUESTIONS, list yes/no questions you would ask a (fictional) "
       "expert about \"{{event_type}}\" annotation conventions.\n"
    << kGuessPlea << "\n"
    << kQuery;
  return t.str();
}

std::string conf_only_template() {
  std::ostringstream t;
  t << kHeader
    << "Answer with one block per marked event phrase (a single block if you "
       "mark nothing), formatted exactly as:\n"
       "SENTENCE: <your copy of the sentence, with pipes>\n"
       "CONFIDENCE: <a number from 1 to 5>\n"
       "\n"
    << kPresenceScale
    << " Use 1 when you predict no event instance, and for very unlikely "
       "guesses.\n"
       "Do not provide an explanation or ask any questions; answer with the "
       "two lines above only.\n"
    << kGuessPlea << "\n"
    << kQuery;
  return t.str();
}

std::string conventional_conf_template() {
  std::ostringstream t;
  t << kHeader
    << "Answer with one block per marked event phrase (a single block if you "
       "mark nothing), formatted exactly as:\n"
       "SENTENCE: <your copy of the sentence, with pipes>\n"
       "CONFIDENCE: <a number from 1 to 5>\n"
       "\n"
       "The CONFIDENCE number expresses how certain you are of your answer, "
       "regardless of the content of the answer: 5 means you are highly "
       "confident in your answer, and 1 means you are quite uncertain. A 5 is "
       "appropriate when you are highly confident that no event is present, "
       "just as when you are highly confident in a marked event phrase.\n"
       "Do not provide an explanation or ask any questions; answer with the "
       "two lines above only.\n"
    << kGuessPlea << "\n"
    << kQuery;
  return t.str();
}

std::string no_conf_template() {
  std::ostringstream t;
  t << kHeader
    << "Answer with one block per marked event phrase (a single block if you "
       "mark nothing), formatted exactly as:\n"
       "SENTENCE: <your copy of the sentence, with pipes>\n"
       "EXPLANATION: <why you did or did not mark an event phrase>\n"
       "QUESTIONS:\n"
       "- <a yes/no question>\n"
       "\n"
       "Use the EXPLANATION line to account for your decision.\n"
       "Under QUESTIONS, list yes/no questions you would ask a (fictional) "
       "expert about \"{{event_type}}\" annotation conventions.\n"
       "Please make a guess even when you are unsure: a tentative guess is "
       "much more useful than no answer.\n"
       "\n"
    << kQuery;
  return t.str();
}

// Full minus the pleas for guessing.
std::string no_guess_template() {
  std::ostringstream t;
  t << kHeader
    << "Answer with one block per marked event phrase (a single block if you "
       "mark nothing), formatted exactly as:\n"
       "SENTENCE: <your copy of the sentence, with pipes>\n"
       "CONFIDENCE: <a number from 1 to 5>\n"
       "EXPLANATION: <why you did or did not mark an event phrase>\n"
       "QUESTIONS:\n"
       "- <a yes/no question>\n"
       "\n"
    << kPresenceScale
    << " Use 1 when you predict no event instance.\n"
       "Use the EXPLANATION line to account for your decision and your "
       "confidence.\n"
       "Under QUESTIONS, list yes/no questions you would ask a (fictional) "
       "expert about \"{{event_type}}\" annotation conventions.\n"
       "\n"
    << kQuery;
  return t.str();
}

std::string substitute(const std::string& tmpl,
                       const std::map<std::string, std::string>& slots) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    std::size_t open = tmpl.find("{{", pos);
    if (open == std::string::npos) {
      out.append(tmpl, pos, std::string::npos);
      break;
    }
    out.append(tmpl, pos, open - pos);
    std::size_t close = tmpl.find("}}", open + 2);
    if (close == std::string::npos)
      throw ConfigError("unterminated {{slot}} in template");
    std::string name = tmpl.substr(open + 2, close - open - 2);
    auto it = slots.find(name);
    if (it == slots.end())
      throw ConfigError("unknown template slot: {{" + name + "}}");
    out += it->second;
    pos = close + 2;
  }
  return out;
}

} // namespace

TemplateSet TemplateSet::builtin() {
  TemplateSet set;
  set.texts_[Variant::Full] = full_template();
  set.texts_[Variant::ConfOnly] = conf_only_template();
  set.texts_[Variant::ConventionalConf] = conventional_conf_template();
  set.texts_[Variant::NoConf] = no_conf_template();
  set.texts_[Variant::NoGuess] = no_guess_template();
  return set;
}

TemplateSet TemplateSet::load_dir(const std::filesystem::path& dir) {
  TemplateSet set;
  for (Variant v : kAllVariants) {
    std::filesystem::path file = dir / (std::string(variant_name(v)) + ".txt");
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("missing template file " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    set.texts_[v] = buf.str();
  }
  return set;
}

std::string TemplateSet::render(const PromptSpec& spec) const {
  if (spec.marked_examples.empty())
    throw ValidationError("prompt for " + spec.event_type +
                          " has no few-shot examples");
  for (const auto& sib : spec.sibling_types)
    if (sib == spec.event_type)
      throw ValidationError("event type " + spec.event_type +
                            " listed among its own siblings");

  std::string siblings;
  if (spec.sibling_types.empty()) {
    siblings = "(none)";
  } else {
    for (std::size_t i = 0; i < spec.sibling_types.size(); ++i) {
      if (i) siblings += ", ";
      siblings += spec.sibling_types[i];
    }
  }

  std::string examples;
  for (std::size_t i = 0; i < spec.marked_examples.size(); ++i) {
    if (i) examples += "\n";
    examples += "Example " + std::to_string(i + 1) + ": " + spec.marked_examples[i];
  }

  return substitute(text(spec.variant),
                    {{"topic", spec.topic},
                     {"event_type", spec.event_type},
                     {"sibling_types", siblings},
                     {"examples", examples},
                     {"query_sentence", spec.query_sentence}});
}

} // namespace lao
