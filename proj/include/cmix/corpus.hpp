#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <set>
#include <span>

#include "cmix/lid.hpp"
#include "cmix/metrics.hpp"

namespace cmix {

/// Malformed input; the message carries file/line context where available.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Corpus {
  std::vector<TaggedUtterance> utterances;
  std::set<std::string> registry;  // language codes in use
  std::string provenance;
  std::map<std::string, std::int64_t> alias_counts;  // Universal aliases seen in input
};

enum class CorpusFormat { tsv_tagged, jsonl, raw_text };

struct LoadOptions {
  CorpusFormat format = CorpusFormat::tsv_tagged;
  /// Tag strings (case-folded) mapped onto Universal instead of a language.
  std::vector<std::string> universal_aliases{"univ", "universal", "u", "o", "other"};
  /// raw_text only: tagging configuration.
  const std::vector<Lexicon>* lexicons = nullptr;
  const TagRuleSet* rules = nullptr;
  TaggerOptions tagger;
};

/// Whitespace split, then leading/trailing punctuation runs peeled off as
/// separate tokens. Mentions, hashtags, and URLs are kept whole.
std::vector<std::string> tokenize_raw(const std::string& line);

/// Streaming reader: one utterance at a time, bounded memory. Parse problems
/// raise ParseError with the offending line number.
class CorpusReader {
 public:
  CorpusReader(std::istream& in, LoadOptions options, std::string source_name);
  ~CorpusReader();

  /// Next utterance in file order, or nullopt at end of input.
  std::optional<TaggedUtterance> next();

  const std::set<std::string>& registry() const;
  const std::string& provenance() const;
  const std::map<std::string, std::int64_t>& alias_counts() const;
  std::int64_t utterances_read() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Corpus load_corpus(std::istream& in, const LoadOptions& options = {},
                   std::string source_name = "");
Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& options = {});

/// Canonical tsv-tagged form: `# registry:` and `# source:` headers, one
/// token<TAB>tag line per token, one blank line between utterances.
/// save(load(x)) is byte-identical for input already in this form.
void save_corpus_tsv(std::ostream& out, const Corpus& corpus);
std::string corpus_to_tsv(const Corpus& corpus);

/// Scores utterances in order; with workers > 1 the index space is split into
/// contiguous chunks, so results are identical to a single-threaded pass.
std::vector<MetricReport> score_utterances(std::span<const TaggedUtterance> utterances,
                                           const MetricConfig& cfg, int workers = 1);

struct MetricSummary {
  std::int64_t count = 0;  // utterances where the metric is defined
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;  // population
};

struct StatsOptions {
  double bin_width = 10.0;  // cmi_new histogram bin width, over [0, 100]
  int workers = 1;
};

struct CorpusStats {
  std::int64_t utterance_count = 0;
  std::int64_t token_count = 0;
  std::map<std::string, MetricSummary> metrics;
  double bin_width = 10.0;
  std::vector<std::int64_t> cmi_histogram;
  std::int64_t monolingual_count = 0;  // cmi_new == 0
  double fraction_monolingual = 0.0;
};

CorpusStats corpus_stats(const Corpus& corpus, const MetricConfig& cfg,
                         const StatsOptions& options = {});

struct FilterPolicy {
  double min_cmi_new = 0.0;
  double min_language_bearing_fraction = 0.0;
  double max_oov_fraction = 1.0;

  enum class Bucket { code_mixed, monolingual, noisy };
  /// Where utterances with 0 < cmi_new < min_cmi_new land.
  Bucket low_mix_bucket = Bucket::monolingual;
};

void validate(const FilterPolicy& policy);

std::string to_string(FilterPolicy::Bucket bucket);

/// Noise proxy inputs: a token is out-of-vocabulary when it matches no shape
/// rule and no lexicon holds its folded surface. Without a model the OOV
/// fraction is 0 for every utterance.
struct NoiseModel {
  const std::vector<Lexicon>* lexicons = nullptr;
  const TagRuleSet* rules = nullptr;
};

struct FilterDecision {
  FilterPolicy::Bucket bucket = FilterPolicy::Bucket::monolingual;
  double cmi_new = 0.0;
  double oov_fraction = 0.0;
  double language_bearing_fraction = 0.0;
};

struct FilterResult {
  std::vector<std::size_t> code_mixed;
  std::vector<std::size_t> monolingual;
  std::vector<std::size_t> noisy;
  std::vector<FilterDecision> decisions;  // per utterance, input order
};

/// Exhaustive, disjoint partition. Tests run in order: noisy (OOV proxy and
/// language-bearing fraction), then monolingual (cmi_new == 0), then the
/// min_cmi_new threshold.
FilterResult filter_corpus(const Corpus& corpus, const FilterPolicy& policy,
                           const MetricConfig& cfg, const NoiseModel* noise = nullptr);

nlohmann::ordered_json to_json(const CorpusStats& stats);
nlohmann::ordered_json filter_summary_json(const FilterResult& result,
                                           const FilterPolicy& policy, bool has_noise_model);

}  // namespace cmix
