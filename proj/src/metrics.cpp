#include "cmix/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace cmix {

void validate(const MetricConfig& cfg) {
  if (cfg.a < 0.0 || cfg.a > 1.0 || cfg.b < 0.0 || cfg.b > 1.0)
    throw std::invalid_argument("metric weights must lie in [0,1]");
  if (std::fabs(cfg.a + cfg.b - 1.0) > 1e-12)
    throw std::invalid_argument("metric weights must satisfy a + b = 1");
}

namespace {

double population_mean(const std::vector<Span>& spans, std::size_t begin, std::size_t end) {
  double sum = 0.0;
  for (std::size_t i = begin; i < end; ++i) sum += static_cast<double>(spans[i].length);
  return sum / static_cast<double>(end - begin);
}

double population_stddev(const std::vector<Span>& spans, std::size_t begin, std::size_t end,
                         double mean) {
  double ss = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const double d = static_cast<double>(spans[i].length) - mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(end - begin));
}

std::int64_t switch_points_for(const TaggedUtterance& utterance, const MetricConfig& cfg) {
  return count_switch_points(utterance, cfg.universal_mode);
}

}  // namespace

double cmi_old(const TagHistogram& hist) {
  const std::int64_t language_bearing = hist.language_bearing();
  if (language_bearing <= 0) return 0.0;
  return 100.0 * (1.0 - static_cast<double>(hist.max_language_count()) /
                            static_cast<double>(language_bearing));
}

double cmi_new(const TaggedUtterance& utterance, const MetricConfig& cfg) {
  validate(cfg);
  const double old_score = cmi_old(tag_histogram(utterance));
  const double f_p = static_cast<double>(switch_points_for(utterance, cfg)) /
                     static_cast<double>(utterance.tokens.size());
  if (cfg.cmi_mode == CmiMode::literal) return cfg.a * old_score + cfg.b * f_p;
  return 100.0 * (cfg.a * (old_score / 100.0) + cfg.b * f_p);
}

double m_index(const TagHistogram& hist) {
  const std::int64_t language_bearing = hist.language_bearing();
  const int k = hist.distinct_languages();
  if (language_bearing <= 0 || k <= 1) return 0.0;
  // With p_j = count_j / lb, (1 - sum p^2) / ((k-1) sum p^2) reduces to a
  // ratio of exact integer sums; balanced splits then land on 1 exactly.
  std::int64_t sum_count_sq = 0;
  for (const auto& [code, count] : hist.per_language) sum_count_sq += count * count;
  const std::int64_t total_sq = language_bearing * language_bearing;
  return static_cast<double>(total_sq - sum_count_sq) /
         (static_cast<double>(k - 1) * static_cast<double>(sum_count_sq));
}

double i_index(const TaggedUtterance& utterance, const MetricConfig& cfg) {
  validate(cfg);
  std::int64_t sequence_length;
  std::int64_t switches;
  if (cfg.i_index_mode == IIndexMode::language_bearing) {
    // The stripped sequence contains no Universal tokens, so the two
    // universal modes coincide on it.
    sequence_length = tag_histogram(utterance).language_bearing();
    switches = count_switch_points(utterance, UniversalMode::transparent);
  } else {
    sequence_length = static_cast<std::int64_t>(utterance.tokens.size());
    switches = count_switch_points(utterance, cfg.universal_mode);
  }
  if (sequence_length <= 1) return 0.0;
  return static_cast<double>(switches) / static_cast<double>(sequence_length - 1);
}

std::optional<double> burstiness(const SpanProfile& profile) {
  const std::size_t n_r = profile.spans.size();
  if (n_r < 2) return std::nullopt;
  const double mean = population_mean(profile.spans, 0, n_r);
  const double sigma = population_stddev(profile.spans, 0, n_r, mean);
  return std::clamp((sigma - mean) / (sigma + mean), -1.0, 1.0);
}

std::optional<double> memory(const SpanProfile& profile) {
  const std::size_t n_r = profile.spans.size();
  if (n_r < 3) return std::nullopt;
  // Window 1: all spans but the last. Window 2: all spans but the first.
  const double mu1 = population_mean(profile.spans, 0, n_r - 1);
  const double mu2 = population_mean(profile.spans, 1, n_r);
  const double sigma1 = population_stddev(profile.spans, 0, n_r - 1, mu1);
  const double sigma2 = population_stddev(profile.spans, 1, n_r, mu2);
  if (sigma1 == 0.0 || sigma2 == 0.0) return std::nullopt;
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < n_r; ++i) {
    sum += (static_cast<double>(profile.spans[i].length) - mu1) *
           (static_cast<double>(profile.spans[i + 1].length) - mu2);
  }
  const double value = sum / (static_cast<double>(n_r - 1) * sigma1 * sigma2);
  return std::clamp(value, -1.0, 1.0);
}

MetricReport metric_report(const TaggedUtterance& utterance, const MetricConfig& cfg) {
  validate(cfg);
  validate(utterance);
  MetricReport report;
  report.histogram = tag_histogram(utterance);
  report.spans = extract_spans(utterance, cfg.universal_mode);
  report.switch_points = switch_points_for(utterance, cfg);
  report.cmi_old = cmi_old(report.histogram);
  report.f_p = static_cast<double>(report.switch_points) /
               static_cast<double>(utterance.tokens.size());
  report.cmi_new = cfg.cmi_mode == CmiMode::literal
                       ? cfg.a * report.cmi_old + cfg.b * report.f_p
                       : 100.0 * (cfg.a * (report.cmi_old / 100.0) + cfg.b * report.f_p);
  report.m_index = m_index(report.histogram);
  report.i_index = i_index(utterance, cfg);
  report.burstiness = burstiness(report.spans);
  report.memory = memory(report.spans);
  return report;
}

double scale_to_ten(double score, double range_lo, double range_hi) {
  if (!(range_hi > range_lo))
    throw std::invalid_argument("scale_to_ten needs an interval of positive width");
  if (score < range_lo || score > range_hi)
    throw std::out_of_range("score outside its declared natural range");
  return 10.0 * (score - range_lo) / (range_hi - range_lo);
}

nlohmann::ordered_json to_json(const MetricReport& report) {
  nlohmann::ordered_json j;
  j["cmi_old"] = report.cmi_old;
  j["f_p"] = report.f_p;
  j["cmi_new"] = report.cmi_new;
  j["m_index"] = report.m_index;
  j["i_index"] = report.i_index;
  j["burstiness"] = report.burstiness ? nlohmann::ordered_json(*report.burstiness)
                                      : nlohmann::ordered_json(nullptr);
  j["memory"] = report.memory ? nlohmann::ordered_json(*report.memory)
                              : nlohmann::ordered_json(nullptr);
  j["n"] = report.histogram.total;
  j["u"] = report.histogram.universal_count;
  j["switch_points"] = report.switch_points;
  nlohmann::ordered_json langs = nlohmann::ordered_json::object();
  for (const auto& [code, count] : report.histogram.per_language) langs[code] = count;
  j["languages"] = std::move(langs);
  nlohmann::ordered_json spans = nlohmann::ordered_json::array();
  for (const Span& s : report.spans.spans)
    spans.push_back(nlohmann::ordered_json::array({s.language, s.length}));
  j["spans"] = std::move(spans);
  return j;
}

}  // namespace cmix
