#include "cmix/core.hpp"

#include <algorithm>
#include <cctype>

namespace cmix {

std::string to_string(const LanguageTag& tag) {
  return tag.is_universal() ? std::string("univ") : tag.code();
}

namespace {

bool blank_surface(const std::string& s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

void validate(const TaggedUtterance& utterance) {
  if (utterance.tokens.empty())
    throw std::invalid_argument("utterance '" + utterance.id + "' has no tokens");
  for (std::size_t i = 0; i < utterance.tokens.size(); ++i) {
    const Token& t = utterance.tokens[i];
    if (!t.tag)
      throw std::invalid_argument("utterance '" + utterance.id + "' token " +
                                  std::to_string(i) + " is untagged");
    if (t.surface.empty() || blank_surface(t.surface))
      throw std::invalid_argument("utterance '" + utterance.id + "' token " +
                                  std::to_string(i) + " has a blank surface");
  }
}

std::int64_t TagHistogram::max_language_count() const {
  std::int64_t m = 0;
  for (const auto& [code, count] : per_language) m = std::max(m, count);
  return m;
}

TagHistogram tag_histogram(const TaggedUtterance& utterance) {
  TagHistogram h;
  h.total = static_cast<std::int64_t>(utterance.tokens.size());
  for (const Token& t : utterance.tokens) {
    const LanguageTag& tag = *t.tag;
    if (tag.is_universal())
      ++h.universal_count;
    else
      ++h.per_language[tag.code()];
  }
  return h;
}

SpanProfile extract_spans(const TaggedUtterance& utterance, UniversalMode mode) {
  SpanProfile profile;
  bool open = false;  // trailing span may still be extended
  for (const Token& t : utterance.tokens) {
    const LanguageTag& tag = *t.tag;
    if (tag.is_universal()) {
      // Literal mode: a Universal run closes the current span.
      if (mode == UniversalMode::literal) open = false;
      continue;
    }
    ++profile.language_bearing_count;
    if (open && profile.spans.back().language == tag.code()) {
      ++profile.spans.back().length;
    } else {
      profile.spans.push_back(Span{tag.code(), 1});
      open = true;
    }
  }
  return profile;
}

std::int64_t count_switch_points(const TaggedUtterance& utterance, UniversalMode mode) {
  std::int64_t switches = 0;
  if (mode == UniversalMode::literal) {
    for (std::size_t i = 1; i < utterance.tokens.size(); ++i)
      if (*utterance.tokens[i].tag != *utterance.tokens[i - 1].tag) ++switches;
    return switches;
  }
  const LanguageTag* prev_language = nullptr;
  for (const Token& t : utterance.tokens) {
    const LanguageTag& tag = *t.tag;
    if (tag.is_universal()) continue;
    if (prev_language && *prev_language != tag) ++switches;
    prev_language = &tag;
  }
  return switches;
}

}  // namespace cmix
