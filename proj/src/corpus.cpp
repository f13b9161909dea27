#include "cmix/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

namespace cmix {

namespace {

[[noreturn]] void fail(const std::string& source, std::int64_t line_no,
                       const std::string& message) {
  const std::string where = source.empty() ? std::string("input") : source;
  throw ParseError(where + ":" + std::to_string(line_no) + ": " + message);
}

bool valid_language_code(const std::string& code) {
  if (code.empty()) return false;
  if (code == "univ") return false;  // reserved spelling
  if (!std::islower(static_cast<unsigned char>(code[0]))) return false;
  for (char c : code) {
    const unsigned char uc = static_cast<unsigned char>(c);
    if (!std::islower(uc) && !std::isdigit(uc) && c != '_' && c != '-') return false;
  }
  return true;
}

std::string lower_copy(const std::string& s) {
  std::string out = s;
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void strip_carriage_return(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

std::vector<std::string> tokenize_raw(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream chunks(line);
  std::string w;
  while (chunks >> w) {
    if (w[0] == '@' || w[0] == '#' || matches_shape(TokenShape::url, w)) {
      out.push_back(w);
      continue;
    }
    const auto punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
    std::size_t b = 0;
    std::size_t e = w.size();
    while (b < e && punct(w[b])) ++b;
    while (e > b && punct(w[e - 1])) --e;
    if (b == e || (b == 0 && e == w.size())) {
      out.push_back(w);  // all punctuation, or nothing to peel
      continue;
    }
    if (b > 0) out.push_back(w.substr(0, b));
    out.push_back(w.substr(b, e - b));
    if (e < w.size()) out.push_back(w.substr(e));
  }
  return out;
}

struct CorpusReader::Impl {
  std::istream& in;
  LoadOptions options;
  std::string source;

  std::set<std::string> registry;
  std::set<std::string> declared;
  bool have_declared = false;
  std::string provenance;
  std::map<std::string, std::int64_t> alias_counts;
  std::set<std::string> alias_set;  // folded

  TagRuleSet default_rules;
  const TagRuleSet* rules = nullptr;

  std::int64_t line_no = 0;
  std::int64_t read_count = 0;
  bool done = false;

  Impl(std::istream& stream, LoadOptions opts, std::string name)
      : in(stream), options(std::move(opts)), source(std::move(name)) {
    for (const std::string& alias : options.universal_aliases)
      alias_set.insert(lower_copy(alias));
    if (options.format == CorpusFormat::raw_text) {
      if (options.lexicons == nullptr || options.lexicons->empty())
        throw ParseError((source.empty() ? std::string("input") : source) +
                         ": raw-text input needs at least one lexicon");
      if (options.rules == nullptr) {
        default_rules = TagRuleSet::standard();
        rules = &default_rules;
      } else {
        rules = options.rules;
      }
    }
  }

  bool next_line(std::string& line) {
    if (!std::getline(in, line)) return false;
    ++line_no;
    strip_carriage_return(line);
    return true;
  }

  // Folds the raw tag, maps Universal aliases, checks the declared registry.
  LanguageTag resolve_tag(const std::string& raw) {
    const std::string folded = lower_copy(raw);
    if (alias_set.count(folded) > 0) {
      if (folded != "univ") ++alias_counts[folded];
      return LanguageTag::universal();
    }
    if (!valid_language_code(folded))
      fail(source, line_no, "invalid language tag '" + raw + "'");
    if (have_declared && declared.count(folded) == 0)
      fail(source, line_no,
           "unknown tag '" + raw + "': not in the declared registry and not a Universal alias");
    registry.insert(folded);
    return LanguageTag::language(folded);
  }

  void parse_header(const std::string& line) {
    const std::string registry_prefix = "# registry:";
    const std::string source_prefix = "# source:";
    if (line.rfind(registry_prefix, 0) == 0) {
      std::istringstream codes(line.substr(registry_prefix.size()));
      std::string code;
      have_declared = true;
      while (codes >> code) {
        if (!valid_language_code(code))
          fail(source, line_no, "invalid language code '" + code + "' in registry header");
        declared.insert(code);
        registry.insert(code);
      }
      return;
    }
    if (line.rfind(source_prefix, 0) == 0) {
      std::string rest = line.substr(source_prefix.size());
      if (!rest.empty() && rest.front() == ' ') rest.erase(rest.begin());
      provenance = rest;
      return;
    }
    // Other '#' lines without a tab are comments.
  }

  std::optional<TaggedUtterance> next_tsv() {
    TaggedUtterance utt;
    std::string line;
    while (next_line(line)) {
      if (line.empty()) {
        if (!utt.tokens.empty()) break;
        continue;
      }
      if (line[0] == '#' && line.find('\t') == std::string::npos) {
        parse_header(line);
        continue;
      }
      const std::size_t tab = line.find('\t');
      if (tab == std::string::npos)
        fail(source, line_no, "expected token<TAB>tag, got '" + line + "'");
      if (line.find('\t', tab + 1) != std::string::npos)
        fail(source, line_no, "more than one tab in token line");
      std::string surface = line.substr(0, tab);
      std::string raw_tag = line.substr(tab + 1);
      if (surface.empty()) fail(source, line_no, "empty token surface");
      if (raw_tag.empty()) fail(source, line_no, "empty tag");
      utt.tokens.push_back(Token{std::move(surface), resolve_tag(raw_tag)});
    }
    if (utt.tokens.empty()) return std::nullopt;
    utt.id = std::to_string(read_count + 1);
    return utt;
  }

  std::optional<TaggedUtterance> next_jsonl() {
    std::string line;
    while (next_line(line)) {
      if (line.empty()) continue;
      const nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
      if (record.is_discarded()) fail(source, line_no, "invalid JSON record");
      // Tagging output starts with a configuration line; skip it.
      if (record.is_object() && record.contains("config") && !record.contains("tokens"))
        continue;
      if (!record.is_object() || !record.contains("tokens") || !record.contains("tags"))
        fail(source, line_no, "record needs 'tokens' and 'tags' arrays");
      const auto& tokens = record["tokens"];
      const auto& tags = record["tags"];
      if (!tokens.is_array() || !tags.is_array())
        fail(source, line_no, "'tokens' and 'tags' must be arrays");
      if (tokens.size() != tags.size())
        fail(source, line_no, "ragged record: " + std::to_string(tokens.size()) +
                                  " tokens vs " + std::to_string(tags.size()) + " tags");
      if (tokens.empty()) fail(source, line_no, "empty utterance");
      TaggedUtterance utt;
      if (record.contains("id")) {
        const auto& id = record["id"];
        if (id.is_string())
          utt.id = id.get<std::string>();
        else if (id.is_number_integer())
          utt.id = std::to_string(id.get<std::int64_t>());
        else
          fail(source, line_no, "'id' must be a string or integer");
      } else {
        utt.id = std::to_string(read_count + 1);
      }
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (!tokens[i].is_string() || !tags[i].is_string())
          fail(source, line_no, "token and tag entries must be strings");
        std::string surface = tokens[i].get<std::string>();
        if (surface.empty())
          fail(source, line_no, "empty token surface at position " + std::to_string(i));
        utt.tokens.push_back(Token{std::move(surface), resolve_tag(tags[i].get<std::string>())});
      }
      return utt;
    }
    return std::nullopt;
  }

  std::optional<TaggedUtterance> next_raw() {
    std::string line;
    while (next_line(line)) {
      std::vector<std::string> surfaces = tokenize_raw(line);
      if (surfaces.empty()) continue;
      TaggedUtterance utt = tag_tokens(surfaces, *options.lexicons, *rules, options.tagger,
                                       std::to_string(read_count + 1));
      for (const Token& t : utt.tokens)
        if (t.tag->is_language()) registry.insert(t.tag->code());
      return utt;
    }
    return std::nullopt;
  }

  std::optional<TaggedUtterance> next() {
    if (done) return std::nullopt;
    std::optional<TaggedUtterance> utt;
    switch (options.format) {
      case CorpusFormat::tsv_tagged: utt = next_tsv(); break;
      case CorpusFormat::jsonl: utt = next_jsonl(); break;
      case CorpusFormat::raw_text: utt = next_raw(); break;
    }
    if (!utt) {
      done = true;
      if (read_count == 0)
        throw ParseError((source.empty() ? std::string("input") : source) +
                         ": no utterances found");
      return std::nullopt;
    }
    ++read_count;
    return utt;
  }
};

CorpusReader::CorpusReader(std::istream& in, LoadOptions options, std::string source_name)
    : impl_(std::make_unique<Impl>(in, std::move(options), std::move(source_name))) {}

CorpusReader::~CorpusReader() = default;

std::optional<TaggedUtterance> CorpusReader::next() { return impl_->next(); }

const std::set<std::string>& CorpusReader::registry() const { return impl_->registry; }

const std::string& CorpusReader::provenance() const { return impl_->provenance; }

const std::map<std::string, std::int64_t>& CorpusReader::alias_counts() const {
  return impl_->alias_counts;
}

std::int64_t CorpusReader::utterances_read() const { return impl_->read_count; }

Corpus load_corpus(std::istream& in, const LoadOptions& options, std::string source_name) {
  CorpusReader reader(in, options, std::move(source_name));
  Corpus corpus;
  while (auto utt = reader.next()) corpus.utterances.push_back(std::move(*utt));
  corpus.registry = reader.registry();
  corpus.provenance = reader.provenance();
  corpus.alias_counts = reader.alias_counts();
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  return load_corpus(in, options, path.string());
}

void save_corpus_tsv(std::ostream& out, const Corpus& corpus) {
  out << "# registry:";
  for (const std::string& code : corpus.registry) out << ' ' << code;
  out << '\n';
  if (!corpus.provenance.empty()) out << "# source: " << corpus.provenance << '\n';
  bool first = true;
  for (const TaggedUtterance& utt : corpus.utterances) {
    if (!first) out << '\n';
    first = false;
    for (const Token& t : utt.tokens) out << t.surface << '\t' << to_string(*t.tag) << '\n';
  }
}

std::string corpus_to_tsv(const Corpus& corpus) {
  std::ostringstream out;
  save_corpus_tsv(out, corpus);
  return out.str();
}

std::vector<MetricReport> score_utterances(std::span<const TaggedUtterance> utterances,
                                           const MetricConfig& cfg, int workers) {
  validate(cfg);
  if (workers < 1) throw std::invalid_argument("worker count must be at least 1");
  std::vector<MetricReport> reports(utterances.size());
  if (utterances.empty()) return reports;

  const std::size_t n = utterances.size();
  const std::size_t pool_size = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  if (pool_size <= 1) {
    for (std::size_t i = 0; i < n; ++i) reports[i] = metric_report(utterances[i], cfg);
    return reports;
  }

  // Contiguous index chunks; every thread writes only its own slots, so the
  // result is identical to the single-threaded pass.
  std::vector<std::exception_ptr> errors(pool_size);
  std::vector<std::thread> pool;
  pool.reserve(pool_size);
  for (std::size_t w = 0; w < pool_size; ++w) {
    const std::size_t begin = n * w / pool_size;
    const std::size_t end = n * (w + 1) / pool_size;
    pool.emplace_back([&, w, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) reports[i] = metric_report(utterances[i], cfg);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
  return reports;
}

namespace {

MetricSummary summarize(std::vector<double> values) {
  MetricSummary s;
  s.count = static_cast<std::int64_t>(values.size());
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  s.median = values.size() % 2 == 1 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
  return s;
}

}  // namespace

CorpusStats corpus_stats(const Corpus& corpus, const MetricConfig& cfg,
                         const StatsOptions& options) {
  if (corpus.utterances.empty())
    throw std::invalid_argument("corpus_stats needs a non-empty corpus");
  if (!(options.bin_width > 0.0) || options.bin_width > 100.0)
    throw std::invalid_argument("bin width must be in (0, 100]");

  const std::vector<MetricReport> reports =
      score_utterances(corpus.utterances, cfg, options.workers);

  CorpusStats stats;
  stats.utterance_count = static_cast<std::int64_t>(corpus.utterances.size());
  for (const TaggedUtterance& utt : corpus.utterances)
    stats.token_count += static_cast<std::int64_t>(utt.tokens.size());
  stats.bin_width = options.bin_width;
  const int bins = static_cast<int>(std::ceil(100.0 / options.bin_width));
  stats.cmi_histogram.assign(static_cast<std::size_t>(bins), 0);

  std::vector<double> cmi_old_values, cmi_new_values, m_values, i_values, b_values, mem_values;
  cmi_old_values.reserve(reports.size());
  cmi_new_values.reserve(reports.size());
  m_values.reserve(reports.size());
  i_values.reserve(reports.size());
  for (const MetricReport& r : reports) {
    cmi_old_values.push_back(r.cmi_old);
    cmi_new_values.push_back(r.cmi_new);
    m_values.push_back(r.m_index);
    i_values.push_back(r.i_index);
    if (r.burstiness) b_values.push_back(*r.burstiness);
    if (r.memory) mem_values.push_back(*r.memory);
    if (r.cmi_new == 0.0) ++stats.monolingual_count;

    // cmi_new in normalized mode tops out at 100; the literal default stays
    // under 100 as well, but clamp the bin index so any future mode is safe.
    int bin = static_cast<int>(std::floor(r.cmi_new / options.bin_width));
    bin = std::clamp(bin, 0, bins - 1);
    ++stats.cmi_histogram[static_cast<std::size_t>(bin)];
  }

  stats.metrics["cmi_old"] = summarize(std::move(cmi_old_values));
  stats.metrics["cmi_new"] = summarize(std::move(cmi_new_values));
  stats.metrics["m_index"] = summarize(std::move(m_values));
  stats.metrics["i_index"] = summarize(std::move(i_values));
  stats.metrics["burstiness"] = summarize(std::move(b_values));
  stats.metrics["memory"] = summarize(std::move(mem_values));
  stats.fraction_monolingual =
      static_cast<double>(stats.monolingual_count) / static_cast<double>(stats.utterance_count);
  return stats;
}

void validate(const FilterPolicy& policy) {
  if (policy.min_cmi_new < 0.0 || std::isnan(policy.min_cmi_new))
    throw std::invalid_argument("min_cmi_new must be non-negative");
  if (policy.min_language_bearing_fraction < 0.0 || policy.min_language_bearing_fraction > 1.0)
    throw std::invalid_argument("min_language_bearing_fraction must be in [0, 1]");
  if (policy.max_oov_fraction < 0.0 || policy.max_oov_fraction > 1.0)
    throw std::invalid_argument("max_oov_fraction must be in [0, 1]");
}

std::string to_string(FilterPolicy::Bucket bucket) {
  switch (bucket) {
    case FilterPolicy::Bucket::code_mixed: return "code_mixed";
    case FilterPolicy::Bucket::monolingual: return "monolingual";
    case FilterPolicy::Bucket::noisy: return "noisy";
  }
  return "monolingual";
}

namespace {

double oov_fraction(const TaggedUtterance& utt, const NoiseModel& noise,
                    const TagRuleSet& fallback_rules) {
  const TagRuleSet* rules = noise.rules != nullptr ? noise.rules : &fallback_rules;
  std::int64_t oov = 0;
  for (const Token& t : utt.tokens) {
    if (rules->match(t.surface)) continue;
    const std::string folded = fold_case(t.surface);
    bool known = false;
    if (noise.lexicons != nullptr) {
      for (const Lexicon& lex : *noise.lexicons) {
        if (lex.entries.count(folded) > 0) {
          known = true;
          break;
        }
      }
    }
    if (!known) ++oov;
  }
  return static_cast<double>(oov) / static_cast<double>(utt.tokens.size());
}

}  // namespace

FilterResult filter_corpus(const Corpus& corpus, const FilterPolicy& policy,
                           const MetricConfig& cfg, const NoiseModel* noise) {
  validate(policy);
  validate(cfg);
  const TagRuleSet standard_rules = TagRuleSet::standard();

  FilterResult result;
  result.decisions.reserve(corpus.utterances.size());
  for (std::size_t i = 0; i < corpus.utterances.size(); ++i) {
    const TaggedUtterance& utt = corpus.utterances[i];
    const MetricReport report = metric_report(utt, cfg);

    FilterDecision d;
    d.cmi_new = report.cmi_new;
    d.language_bearing_fraction = static_cast<double>(report.histogram.language_bearing()) /
                                  static_cast<double>(report.histogram.total);
    d.oov_fraction = noise != nullptr ? oov_fraction(utt, *noise, standard_rules) : 0.0;

    if (d.oov_fraction > policy.max_oov_fraction ||
        d.language_bearing_fraction < policy.min_language_bearing_fraction) {
      d.bucket = FilterPolicy::Bucket::noisy;
    } else if (d.cmi_new == 0.0) {
      d.bucket = FilterPolicy::Bucket::monolingual;
    } else if (d.cmi_new >= policy.min_cmi_new) {
      d.bucket = FilterPolicy::Bucket::code_mixed;
    } else {
      d.bucket = policy.low_mix_bucket;
    }

    switch (d.bucket) {
      case FilterPolicy::Bucket::code_mixed: result.code_mixed.push_back(i); break;
      case FilterPolicy::Bucket::monolingual: result.monolingual.push_back(i); break;
      case FilterPolicy::Bucket::noisy: result.noisy.push_back(i); break;
    }
    result.decisions.push_back(d);
  }
  return result;
}

nlohmann::ordered_json to_json(const CorpusStats& stats) {
  nlohmann::ordered_json j;
  j["utterances"] = stats.utterance_count;
  j["tokens"] = stats.token_count;
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  for (const auto& [name, summary] : stats.metrics) {
    nlohmann::ordered_json m;
    m["count"] = summary.count;
    if (summary.count > 0) {
      m["mean"] = summary.mean;
      m["median"] = summary.median;
      m["stddev"] = summary.stddev;
    } else {
      m["mean"] = nullptr;
      m["median"] = nullptr;
      m["stddev"] = nullptr;
    }
    metrics[name] = std::move(m);
  }
  j["metrics"] = std::move(metrics);
  nlohmann::ordered_json histogram;
  histogram["bin_width"] = stats.bin_width;
  histogram["counts"] = stats.cmi_histogram;
  j["cmi_histogram"] = std::move(histogram);
  nlohmann::ordered_json mono;
  mono["count"] = stats.monolingual_count;
  mono["fraction"] = stats.fraction_monolingual;
  j["monolingual"] = std::move(mono);
  return j;
}

nlohmann::ordered_json filter_summary_json(const FilterResult& result,
                                           const FilterPolicy& policy, bool has_noise_model) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json p;
  p["min_cmi_new"] = policy.min_cmi_new;
  p["min_language_bearing_fraction"] = policy.min_language_bearing_fraction;
  p["max_oov_fraction"] = policy.max_oov_fraction;
  p["low_mix_bucket"] = to_string(policy.low_mix_bucket);
  p["oov_proxy"] = has_noise_model ? "lexicon+rules" : "disabled";
  j["policy"] = std::move(p);
  nlohmann::ordered_json counts;
  counts["code_mixed"] = result.code_mixed.size();
  counts["monolingual"] = result.monolingual.size();
  counts["noisy"] = result.noisy.size();
  counts["total"] = result.decisions.size();
  j["counts"] = std::move(counts);
  return j;
}

}  // namespace cmix
