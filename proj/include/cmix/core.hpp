#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmix {

/// Per-token language label: either a concrete language code ("hi", "en", ...)
/// or Universal for language-independent tokens (mentions, hashtags, URLs,
/// numbers, punctuation, named entities). Universal is a distinct kind and
/// never compares equal to any language.
class LanguageTag {
 public:
  LanguageTag() = default;  // Universal

  static LanguageTag universal() { return LanguageTag(); }

  static LanguageTag language(std::string code) {
    if (code.empty()) throw std::invalid_argument("language code must be non-empty");
    return LanguageTag(std::move(code));
  }

  bool is_universal() const { return code_.empty(); }
  bool is_language() const { return !code_.empty(); }

  /// Language code; empty string when Universal.
  const std::string& code() const { return code_; }

  friend auto operator<=>(const LanguageTag&, const LanguageTag&) = default;

 private:
  explicit LanguageTag(std::string code) : code_(std::move(code)) {}
  std::string code_;
};

/// Serialized form: the code, or "univ" for Universal.
std::string to_string(const LanguageTag& tag);

struct Token {
  std::string surface;
  std::optional<LanguageTag> tag;
};

struct TaggedUtterance {
  std::string id;
  std::vector<Token> tokens;
};

/// Throws std::invalid_argument when an utterance invariant is broken:
/// no tokens, a missing tag, or a surface that is empty after trimming.
void validate(const TaggedUtterance& utterance);

/// Token counts per language plus the Universal count. The per-language
/// counts and universal_count always partition total.
struct TagHistogram {
  std::map<std::string, std::int64_t> per_language;  // w_i, keyed by code
  std::int64_t universal_count = 0;                  // u
  std::int64_t total = 0;                            // n

  std::int64_t language_bearing() const { return total - universal_count; }
  std::int64_t max_language_count() const;
  int distinct_languages() const { return static_cast<int>(per_language.size()); }

  friend bool operator==(const TagHistogram&, const TagHistogram&) = default;
};

struct Span {
  std::string language;
  std::int64_t length = 0;

  friend bool operator==(const Span&, const Span&) = default;
};

/// Run-length encoding of language spans. In the default transparent
/// extraction adjacent spans carry different codes and span lengths sum to
/// language_bearing_count; switch_points() = spans - 1 holds there as well.
struct SpanProfile {
  std::vector<Span> spans;
  std::int64_t language_bearing_count = 0;  // n - u

  std::int64_t switch_points() const {
    return spans.empty() ? 0 : static_cast<std::int64_t>(spans.size()) - 1;
  }

  friend bool operator==(const SpanProfile&, const SpanProfile&) = default;
};

/// How Universal tokens interact with token adjacency.
///   transparent: Universal tokens are invisible; spans and switch points are
///                computed on the Universal-stripped subsequence.
///   literal:     Universal is an ordinary distinct tag value; it breaks spans
///                and entering/leaving a Universal run counts as a switch.
enum class UniversalMode { transparent, literal };

TagHistogram tag_histogram(const TaggedUtterance& utterance);

SpanProfile extract_spans(const TaggedUtterance& utterance,
                          UniversalMode mode = UniversalMode::transparent);

std::int64_t count_switch_points(const TaggedUtterance& utterance,
                                 UniversalMode mode = UniversalMode::transparent);

}  // namespace cmix
