#pragma once

#include <filesystem>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "cmix/core.hpp"
#include "cmix/metrics.hpp"

namespace cmix {

/// ASCII-only case fold; bytes outside ASCII pass through untouched.
std::string fold_case(std::string_view s);

/// Wordlist for one language. Weights are relative frequencies, > 0;
/// surfaces are stored case-folded.
struct Lexicon {
  std::string language;
  std::unordered_map<std::string, double> entries;
};

/// File format: a `#lang: <code>` header line, then one `surface<TAB>weight`
/// entry per line. Blank lines and later `#` lines are ignored.
Lexicon load_lexicon(const std::filesystem::path& path);

/// One named entity per line, stored case-folded.
std::unordered_set<std::string> load_gazetteer(const std::filesystem::path& path);

enum class TokenShape { mention, hashtag, url, numeric, punctuation, emoji, named_entity };

struct TagRule {
  TokenShape shape;
  LanguageTag tag = LanguageTag::universal();
};

/// Ordered shape rules; first match wins, unmatched tokens fall through to
/// lexicon lookup. named_entity matches against the gazetteer set.
struct TagRuleSet {
  std::vector<TagRule> rules;
  std::unordered_set<std::string> gazetteer;

  /// All seven shapes, in order, each mapping to Universal.
  static TagRuleSet standard();

  std::optional<LanguageTag> match(const std::string& surface) const;
};

bool matches_shape(TokenShape shape, const std::string& surface,
                   const std::unordered_set<std::string>* gazetteer = nullptr);

struct TaggerOptions {
  LanguageTag fallback = LanguageTag::universal();  // tag for OOV tokens
  std::vector<std::string> priority;  // language tie-break order for equal weights
  bool edit_distance_one = false;     // fuzzy lexicon lookup for spelling variants
};

/// Tags every token: shape rules first, then best-weight lexicon hit, then
/// the fallback. Deterministic for fixed inputs and options. Requires at
/// least one lexicon and a non-empty token sequence.
TaggedUtterance tag_tokens(const std::vector<std::string>& tokens,
                           const std::vector<Lexicon>& lexicons,
                           const TagRuleSet& rules,
                           const TaggerOptions& opts = {},
                           std::string id = "");

using TagSequences = std::vector<std::pair<std::string, std::vector<LanguageTag>>>;

/// Pairwise token-level agreement between tag sources over one token
/// sequence. agreement counts every position; agreement_language_bearing
/// counts only positions where at least one of the two sources assigns a
/// language (and is 1.0 when no such position exists).
struct AgreementMatrix {
  std::vector<std::string> sources;
  std::vector<std::vector<LanguageTag>> tags;  // [source][token]
  std::vector<std::vector<double>> agreement;
  std::vector<std::vector<double>> agreement_language_bearing;
  std::optional<std::string> gold;
  std::map<std::string, double> accuracy_vs_gold;  // token-level, vs the gold row
};

AgreementMatrix compare_taggers(const std::vector<std::string>& tokens,
                                const TagSequences& sequences,
                                const std::optional<std::string>& gold = std::nullopt);

/// One MetricReport per tag source over identical tokens.
std::vector<std::pair<std::string, MetricReport>> metric_divergence(
    const std::vector<std::string>& tokens, const TagSequences& sequences,
    const MetricConfig& cfg);

nlohmann::ordered_json to_json(const AgreementMatrix& matrix);

}  // namespace cmix
