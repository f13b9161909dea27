#include "cmix/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace cmix {

namespace {

constexpr std::array<const char*, 6> kMetricOrder = {"cmi_old",    "cmi_new", "m_index",
                                                     "i_index",    "burstiness", "memory"};

[[noreturn]] void fail(const std::string& source, std::int64_t line_no,
                       const std::string& message) {
  const std::string where = source.empty() ? std::string("input") : source;
  throw ParseError(where + ":" + std::to_string(line_no) + ": " + message);
}

int parse_score(const std::string& field, const std::string& source, std::int64_t line_no,
                const char* column) {
  int value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    fail(source, line_no, std::string(column) + " value '" + field + "' is not an integer");
  if (value < 0 || value > 10)
    fail(source, line_no, std::string(column) + " value " + field + " outside 0..10");
  return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(current);
  return fields;
}

// Uniform draw from [0, n) by rejection, so the stream is identical on every
// platform for a given generator state.
std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t rem = (max % n + 1) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t x = rng();
    if (rem == 0 || x < max - rem + 1) return x % n;
  }
}

void fisher_yates(std::vector<std::size_t>& order, std::mt19937_64& rng) {
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(bounded_draw(rng, i));
    std::swap(order[i - 1], order[j]);
  }
}

std::optional<double> metric_value(const MetricReport& r, std::size_t metric_index) {
  switch (metric_index) {
    case 0: return r.cmi_old;
    case 1: return r.cmi_new;
    case 2: return r.m_index;
    case 3: return r.i_index;
    case 4: return r.burstiness;
    case 5: return r.memory;
  }
  return std::nullopt;
}

}  // namespace

std::vector<AnnotationRecord> load_annotations(std::istream& in, std::string source_name) {
  const std::string expected_header = "utterance_id,annotator_id,dcm,ra";
  std::vector<AnnotationRecord> records;
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  std::int64_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!have_header) {
      if (line != expected_header)
        fail(source_name, line_no,
             "expected header '" + expected_header + "', got '" + line + "'");
      have_header = true;
      continue;
    }
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 4)
      fail(source_name, line_no,
           "expected 4 comma-separated fields, got " + std::to_string(fields.size()));
    if (fields[0].empty()) fail(source_name, line_no, "empty utterance_id");
    if (fields[1].empty()) fail(source_name, line_no, "empty annotator_id");
    AnnotationRecord rec;
    rec.utterance_id = fields[0];
    rec.annotator_id = fields[1];
    rec.dcm = parse_score(fields[2], source_name, line_no, "dcm");
    rec.ra = parse_score(fields[3], source_name, line_no, "ra");
    if (!seen.emplace(rec.utterance_id, rec.annotator_id).second)
      fail(source_name, line_no,
           "duplicate record for utterance '" + rec.utterance_id + "' by annotator '" +
               rec.annotator_id + "'");
    records.push_back(std::move(rec));
  }
  if (!have_header)
    throw ParseError((source_name.empty() ? std::string("input") : source_name) +
                     ": empty annotation file");
  if (records.empty())
    throw ParseError((source_name.empty() ? std::string("input") : source_name) +
                     ": no annotation records");
  return records;
}

std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  return load_annotations(in, path.string());
}

ProbeReport shuffle_probe(const TaggedUtterance& utterance, std::int64_t permutations,
                          std::uint64_t seed, const MetricConfig& cfg) {
  if (permutations < 1) throw std::invalid_argument("permutation count must be at least 1");
  validate(cfg);
  validate(utterance);

  ProbeReport report;
  report.utterance_id = utterance.id;
  report.seed = seed;
  report.permutations = permutations;
  report.evaluations = permutations + 1;

  struct Extremes {
    std::optional<double> min;
    std::optional<double> max;
    std::vector<std::string> witness_min;
    std::vector<std::string> witness_max;
    std::int64_t defined = 0;
  };
  std::array<Extremes, 6> extremes;

  const auto evaluate = [&](const TaggedUtterance& u) {
    const MetricReport r = metric_report(u, cfg);
    std::vector<std::string> tags;
    tags.reserve(u.tokens.size());
    for (const Token& t : u.tokens) tags.push_back(to_string(*t.tag));
    for (std::size_t m = 0; m < extremes.size(); ++m) {
      const std::optional<double> v = metric_value(r, m);
      if (!v) continue;
      Extremes& e = extremes[m];
      ++e.defined;
      if (!e.min || *v < *e.min) {
        e.min = *v;
        e.witness_min = tags;
      }
      if (!e.max || *v > *e.max) {
        e.max = *v;
        e.witness_max = tags;
      }
    }
  };

  evaluate(utterance);  // identity ordering first

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(utterance.tokens.size());
  TaggedUtterance shuffled;
  shuffled.id = utterance.id;
  for (std::int64_t p = 0; p < permutations; ++p) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    fisher_yates(order, rng);
    shuffled.tokens.clear();
    for (std::size_t idx : order) shuffled.tokens.push_back(utterance.tokens[idx]);
    evaluate(shuffled);
  }

  double largest = -1.0;
  for (std::size_t m = 0; m < extremes.size(); ++m) {
    Extremes& e = extremes[m];
    MetricSpread s;
    s.defined_count = e.defined;
    s.min = e.min;
    s.max = e.max;
    s.spread = e.defined > 0 ? *e.max - *e.min : 0.0;
    const bool exact = m == 0 || m == 2;  // histogram functions
    s.invariant = exact ? s.spread == 0.0 : s.spread <= 1e-12;
    s.witness_min = std::move(e.witness_min);
    s.witness_max = std::move(e.witness_max);
    if (s.spread > largest) {
      largest = s.spread;
      report.largest_spread_metric = kMetricOrder[m];
    }
    report.metrics[kMetricOrder[m]] = std::move(s);
  }
  return report;
}

nlohmann::ordered_json to_json(const ProbeReport& report) {
  nlohmann::ordered_json j;
  j["utterance"] = report.utterance_id;
  j["seed"] = report.seed;
  j["permutations"] = report.permutations;
  j["evaluations"] = report.evaluations;
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  for (const char* name : kMetricOrder) {
    const auto it = report.metrics.find(name);
    if (it == report.metrics.end()) continue;
    const MetricSpread& s = it->second;
    nlohmann::ordered_json m;
    m["invariant"] = s.invariant;
    m["defined"] = s.defined_count;
    m["min"] = s.min ? nlohmann::ordered_json(*s.min) : nlohmann::ordered_json(nullptr);
    m["max"] = s.max ? nlohmann::ordered_json(*s.max) : nlohmann::ordered_json(nullptr);
    m["spread"] = s.spread;
    m["witness_min"] = s.witness_min;
    m["witness_max"] = s.witness_max;
    metrics[name] = std::move(m);
  }
  j["metrics"] = std::move(metrics);
  j["largest_spread_metric"] = report.largest_spread_metric;
  return j;
}

ProbeReport probe_from_json(const nlohmann::json& j) {
  ProbeReport report;
  report.utterance_id = j.at("utterance").get<std::string>();
  report.seed = j.at("seed").get<std::uint64_t>();
  report.permutations = j.at("permutations").get<std::int64_t>();
  report.evaluations = j.at("evaluations").get<std::int64_t>();
  for (const auto& [name, m] : j.at("metrics").items()) {
    MetricSpread s;
    s.invariant = m.at("invariant").get<bool>();
    s.defined_count = m.at("defined").get<std::int64_t>();
    if (!m.at("min").is_null()) s.min = m.at("min").get<double>();
    if (!m.at("max").is_null()) s.max = m.at("max").get<double>();
    s.spread = m.at("spread").get<double>();
    s.witness_min = m.at("witness_min").get<std::vector<std::string>>();
    s.witness_max = m.at("witness_max").get<std::vector<std::string>>();
    report.metrics[name] = std::move(s);
  }
  report.largest_spread_metric = j.at("largest_spread_metric").get<std::string>();
  return report;
}

std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&values](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[idx[j + 1]] == values[idx[i]]) ++j;
    const double rank = static_cast<double>(i + j + 2) / 2.0;  // 1-based, ties averaged
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("rank correlation needs equal-length samples");
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double mean = static_cast<double>(n + 1) / 2.0;  // both rank means
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationTable correlate_annotations(const std::vector<AnnotationRecord>& records,
                                       const Corpus& corpus, const MetricConfig& cfg) {
  validate(cfg);
  if (records.empty()) throw std::invalid_argument("no annotation records");

  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < corpus.utterances.size(); ++i) {
    if (!index_of.emplace(corpus.utterances[i].id, i).second)
      throw std::invalid_argument("duplicate utterance id '" + corpus.utterances[i].id +
                                  "' in corpus");
  }

  struct Sums {
    std::int64_t dcm = 0;
    std::int64_t ra = 0;
    std::int64_t count = 0;
  };
  std::map<std::size_t, Sums> by_index;  // keyed by corpus position
  std::set<std::string> unresolved;
  for (const AnnotationRecord& rec : records) {
    const auto it = index_of.find(rec.utterance_id);
    if (it == index_of.end()) {
      unresolved.insert(rec.utterance_id);
      continue;
    }
    Sums& s = by_index[it->second];
    s.dcm += rec.dcm;
    s.ra += rec.ra;
    ++s.count;
  }
  if (!unresolved.empty()) {
    std::string message = "annotation records reference unknown utterance ids:";
    for (const std::string& id : unresolved) message += " " + id;
    throw std::invalid_argument(message);
  }
  if (by_index.size() < 3)
    throw std::invalid_argument("need annotations on at least 3 distinct utterances, got " +
                                std::to_string(by_index.size()));

  std::vector<MetricReport> reports;
  std::vector<double> mean_dcm, mean_ra;
  reports.reserve(by_index.size());
  for (const auto& [idx, sums] : by_index) {  // ascending corpus position
    reports.push_back(metric_report(corpus.utterances[idx], cfg));
    mean_dcm.push_back(static_cast<double>(sums.dcm) / static_cast<double>(sums.count));
    mean_ra.push_back(static_cast<double>(sums.ra) / static_cast<double>(sums.count));
  }

  CorrelationTable table;
  table.utterances = static_cast<std::int64_t>(by_index.size());
  for (std::size_t m = 0; m < kMetricOrder.size(); ++m) {
    std::vector<double> values, dcm_subset, ra_subset;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const std::optional<double> v = metric_value(reports[i], m);
      if (!v) continue;
      values.push_back(*v);
      dcm_subset.push_back(mean_dcm[i]);
      ra_subset.push_back(mean_ra[i]);
    }
    CorrelationCell dcm_cell{static_cast<std::int64_t>(values.size()),
                             spearman(values, dcm_subset)};
    CorrelationCell ra_cell{static_cast<std::int64_t>(values.size()),
                            spearman(values, ra_subset)};
    table.cells[kMetricOrder[m]]["dcm"] = dcm_cell;
    table.cells[kMetricOrder[m]]["ra"] = ra_cell;
  }
  return table;
}

std::vector<AgreementPair> annotator_agreement(const std::vector<AnnotationRecord>& records) {
  if (records.empty()) throw std::invalid_argument("no annotation records");

  // annotator -> utterance -> (dcm, ra); maps keep pair and utterance order stable
  std::map<std::string, std::map<std::string, std::pair<int, int>>> by_annotator;
  for (const AnnotationRecord& rec : records) {
    if (!by_annotator[rec.annotator_id].emplace(rec.utterance_id, std::pair{rec.dcm, rec.ra})
             .second)
      throw std::invalid_argument("duplicate record for utterance '" + rec.utterance_id +
                                  "' by annotator '" + rec.annotator_id + "'");
  }
  if (by_annotator.size() < 2) throw std::invalid_argument("need at least 2 annotators");

  std::vector<AgreementPair> pairs;
  bool any_sufficient = false;
  for (auto a = by_annotator.begin(); a != by_annotator.end(); ++a) {
    for (auto b = std::next(a); b != by_annotator.end(); ++b) {
      AgreementPair p;
      p.a = a->first;
      p.b = b->first;
      std::int64_t abs_dcm = 0, abs_ra = 0;
      std::vector<double> dcm_a, dcm_b, ra_a, ra_b;
      for (const auto& [utt_id, scores] : a->second) {
        const auto it = b->second.find(utt_id);
        if (it == b->second.end()) continue;
        ++p.shared;
        abs_dcm += std::abs(scores.first - it->second.first);
        abs_ra += std::abs(scores.second - it->second.second);
        dcm_a.push_back(scores.first);
        dcm_b.push_back(it->second.first);
        ra_a.push_back(scores.second);
        ra_b.push_back(it->second.second);
      }
      p.sufficient = p.shared >= 2;
      if (p.shared > 0) {
        p.mad_dcm = static_cast<double>(abs_dcm) / static_cast<double>(p.shared);
        p.mad_ra = static_cast<double>(abs_ra) / static_cast<double>(p.shared);
      }
      if (p.sufficient) {
        p.rho_dcm = spearman(dcm_a, dcm_b);
        p.rho_ra = spearman(ra_a, ra_b);
        any_sufficient = true;
      }
      pairs.push_back(std::move(p));
    }
  }
  if (!any_sufficient)
    throw std::invalid_argument("no annotator pair shares at least 2 utterances");
  return pairs;
}

namespace {

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

nlohmann::ordered_json to_json(const CorrelationTable& table) {
  nlohmann::ordered_json j;
  j["utterances"] = table.utterances;
  j["method"] = "spearman_average_ranks";
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  for (const char* name : kMetricOrder) {
    const auto it = table.cells.find(name);
    if (it == table.cells.end()) continue;
    nlohmann::ordered_json row = nlohmann::ordered_json::object();
    for (const char* dim : {"dcm", "ra"}) {
      const auto cell_it = it->second.find(dim);
      if (cell_it == it->second.end()) continue;
      nlohmann::ordered_json cell;
      cell["n"] = cell_it->second.n;
      cell["rho"] = optional_json(cell_it->second.rho);
      row[dim] = std::move(cell);
    }
    metrics[name] = std::move(row);
  }
  j["metrics"] = std::move(metrics);
  return j;
}

nlohmann::ordered_json to_json(const std::vector<AgreementPair>& pairs) {
  nlohmann::ordered_json j;
  j["method"] = "spearman_average_ranks";
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const AgreementPair& p : pairs) {
    nlohmann::ordered_json row;
    row["a"] = p.a;
    row["b"] = p.b;
    row["shared"] = p.shared;
    row["sufficient"] = p.sufficient;
    row["mad_dcm"] = p.mad_dcm;
    row["mad_ra"] = p.mad_ra;
    row["rho_dcm"] = optional_json(p.rho_dcm);
    row["rho_ra"] = optional_json(p.rho_ra);
    rows.push_back(std::move(row));
  }
  j["pairs"] = std::move(rows);
  return j;
}

}  // namespace cmix
