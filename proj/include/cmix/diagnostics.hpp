#pragma once

#include "cmix/corpus.hpp"

namespace cmix {

/// One human judgment of one utterance: degree of code-mixing and
/// readability, both on a 0..10 scale.
struct AnnotationRecord {
  std::string utterance_id;
  std::string annotator_id;
  int dcm = 0;
  int ra = 0;
};

/// CSV with exact header `utterance_id,annotator_id,dcm,ra`. Duplicate
/// (utterance, annotator) pairs and out-of-range scores are rejected with
/// line numbers.
std::vector<AnnotationRecord> load_annotations(std::istream& in, std::string source_name = "");
std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path);

/// Observed behaviour of one metric across the evaluated permutations.
/// min/max are empty when the metric was undefined for every permutation;
/// spread is then 0. Witnesses are the permuted tag sequences at the
/// extremes.
struct MetricSpread {
  bool invariant = true;
  std::optional<double> min;
  std::optional<double> max;
  double spread = 0.0;
  std::int64_t defined_count = 0;
  std::vector<std::string> witness_min;
  std::vector<std::string> witness_max;
};

struct ProbeReport {
  std::string utterance_id;
  std::uint64_t seed = 0;
  std::int64_t permutations = 0;  // random permutations requested
  std::int64_t evaluations = 0;   // permutations + 1, the identity included
  std::map<std::string, MetricSpread> metrics;
  std::string largest_spread_metric;
};

/// Evaluates the identity ordering plus `permutations` seeded uniform random
/// shuffles of the token sequence. cmi_old and m_index are functions of the
/// tag histogram alone, so their spread is always exactly 0; the order-aware
/// metrics report whatever spread the shuffles expose.
ProbeReport shuffle_probe(const TaggedUtterance& utterance, std::int64_t permutations,
                          std::uint64_t seed, const MetricConfig& cfg);

nlohmann::ordered_json to_json(const ProbeReport& report);
ProbeReport probe_from_json(const nlohmann::json& j);

/// 1-based ranks, ties averaged.
std::vector<double> average_ranks(const std::vector<double>& values);

/// Spearman rank correlation with average-rank ties. Empty when either side
/// has zero rank variance or fewer than 2 samples.
std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y);

struct CorrelationCell {
  std::int64_t n = 0;  // samples where the metric is defined
  std::optional<double> rho;
};

struct CorrelationTable {
  std::int64_t utterances = 0;  // distinct annotated utterances
  /// metric name -> dimension ("dcm" | "ra") -> cell
  std::map<std::string, std::map<std::string, CorrelationCell>> cells;
};

/// Rank correlation between each metric and the per-utterance mean DCM/RA.
/// Every record's utterance id must resolve against the corpus; at least 3
/// distinct utterances must carry annotations.
CorrelationTable correlate_annotations(const std::vector<AnnotationRecord>& records,
                                       const Corpus& corpus, const MetricConfig& cfg);

struct AgreementPair {
  std::string a;
  std::string b;
  std::int64_t shared = 0;  // utterances rated by both
  bool sufficient = false;  // shared >= 2
  double mad_dcm = 0.0;     // mean absolute difference
  double mad_ra = 0.0;
  std::optional<double> rho_dcm;
  std::optional<double> rho_ra;
};

/// Pairwise agreement over shared utterances, pairs ordered by annotator
/// name. Requires at least one pair with 2 or more shared utterances.
std::vector<AgreementPair> annotator_agreement(const std::vector<AnnotationRecord>& records);

nlohmann::ordered_json to_json(const CorrelationTable& table);
nlohmann::ordered_json to_json(const std::vector<AgreementPair>& pairs);

}  // namespace cmix
