#pragma once

#include "cmix/core.hpp"
#include "json.hpp"

namespace cmix {

/// cmi_new composition. literal keeps cmi_old on its 0..100 scale while f_p
/// stays a fraction (the formula as usually printed); normalized puts both
/// terms on 0..1 and rescales the sum by 100.
enum class CmiMode { literal, normalized };

/// Token sequence the I-index runs over: the language-bearing subsequence,
/// or every token.
enum class IIndexMode { language_bearing, all_token };

struct MetricConfig {
  double a = 0.5;  // weight on cmi_old
  double b = 0.5;  // weight on f_p; a + b must equal 1
  CmiMode cmi_mode = CmiMode::literal;
  UniversalMode universal_mode = UniversalMode::transparent;
  IIndexMode i_index_mode = IIndexMode::language_bearing;
};

void validate(const MetricConfig& cfg);

/// Full metric vector plus the counts that produced it. burstiness is absent
/// when there are fewer than 2 spans; memory when there are fewer than 3
/// spans or either window has zero variance.
struct MetricReport {
  double cmi_old = 0.0;   // 0..100
  double f_p = 0.0;       // P / n
  double cmi_new = 0.0;
  double m_index = 0.0;   // 0..1
  double i_index = 0.0;   // 0..1
  std::optional<double> burstiness;  // -1..1
  std::optional<double> memory;      // -1..1
  TagHistogram histogram;
  SpanProfile spans;
  std::int64_t switch_points = 0;  // P
};

/// 100 * (1 - max(w_i)/(n-u)); 0 when every token is Universal.
double cmi_old(const TagHistogram& hist);

/// a*cmi_old + b*f_p (literal) or 100*(a*cmi_old/100 + b*f_p) (normalized).
/// Exactly 0 for monolingual input in both modes.
double cmi_new(const TaggedUtterance& utterance, const MetricConfig& cfg);

/// (1 - sum p_j^2) / ((k-1) * sum p_j^2) over the language-bearing token
/// distribution; 0 when fewer than two languages occur.
double m_index(const TagHistogram& hist);

/// Fraction of adjacent token pairs that switch language; 0 when the chosen
/// sequence has fewer than two tokens.
double i_index(const TaggedUtterance& utterance, const MetricConfig& cfg);

/// (sigma - mean) / (sigma + mean) over span lengths, population sigma.
/// Exactly -1 for equal-length spans. Absent with fewer than 2 spans.
std::optional<double> burstiness(const SpanProfile& spans);

/// Lag-1 correlation of consecutive span lengths, population moments per
/// window. Absent with fewer than 3 spans or when either window variance
/// is zero.
std::optional<double> memory(const SpanProfile& spans);

MetricReport metric_report(const TaggedUtterance& utterance, const MetricConfig& cfg);

/// Affine map of [range_lo, range_hi] onto [0, 10]. Rejects a degenerate
/// interval and scores outside it.
double scale_to_ten(double score, double range_lo, double range_hi);

nlohmann::ordered_json to_json(const MetricReport& report);

}  // namespace cmix
