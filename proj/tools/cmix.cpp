#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "cmix/diagnostics.hpp"

namespace {

constexpr std::size_t kScoreChunk = 8192;  // utterances scored per batch

struct MetricFlags {
  double a = 0.5;
  double b = 0.5;
  std::string cmi_mode = "literal";
  std::string universal_mode = "transparent";
  std::string i_index_mode = "language-bearing";
};

void add_metric_flags(CLI::App* cmd, MetricFlags& f) {
  cmd->add_option("--a", f.a, "weight on the token-share term of cmi_new");
  cmd->add_option("--b", f.b, "weight on the switch-point term of cmi_new");
  cmd->add_option("--cmi-mode", f.cmi_mode, "cmi_new composition")
      ->check(CLI::IsMember({"literal", "normalized"}));
  cmd->add_option("--universal-mode", f.universal_mode,
                  "how Universal tokens interact with spans and switches")
      ->check(CLI::IsMember({"transparent", "literal"}));
  cmd->add_option("--i-index-mode", f.i_index_mode, "token sequence the i_index runs over")
      ->check(CLI::IsMember({"language-bearing", "all-token"}));
}

cmix::MetricConfig to_config(const MetricFlags& f) {
  cmix::MetricConfig cfg;
  cfg.a = f.a;
  cfg.b = f.b;
  cfg.cmi_mode = f.cmi_mode == "literal" ? cmix::CmiMode::literal : cmix::CmiMode::normalized;
  cfg.universal_mode = f.universal_mode == "transparent" ? cmix::UniversalMode::transparent
                                                         : cmix::UniversalMode::literal;
  cfg.i_index_mode = f.i_index_mode == "language-bearing" ? cmix::IIndexMode::language_bearing
                                                          : cmix::IIndexMode::all_token;
  cmix::validate(cfg);
  return cfg;
}

cmix::CorpusFormat to_format(const std::string& s) {
  if (s == "tsv-tagged") return cmix::CorpusFormat::tsv_tagged;
  if (s == "jsonl") return cmix::CorpusFormat::jsonl;
  return cmix::CorpusFormat::raw_text;
}

struct TagResources {
  std::vector<cmix::Lexicon> lexicons;
  cmix::TagRuleSet rules;
};

TagResources load_resources(const std::vector<std::string>& lexicon_paths,
                            const std::string& gazetteer_path) {
  TagResources r;
  for (const std::string& p : lexicon_paths) r.lexicons.push_back(cmix::load_lexicon(p));
  r.rules = cmix::TagRuleSet::standard();
  if (!gazetteer_path.empty()) r.rules.gazetteer = cmix::load_gazetteer(gazetteer_path);
  return r;
}

cmix::LoadOptions make_load_options(const std::string& format, const TagResources& res,
                                    const cmix::TaggerOptions* tagger = nullptr) {
  cmix::LoadOptions o;
  o.format = to_format(format);
  if (!res.lexicons.empty()) {
    o.lexicons = &res.lexicons;
    o.rules = &res.rules;
  }
  if (tagger != nullptr) o.tagger = *tagger;
  return o;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fmt6(const std::optional<double>& v) { return v ? fmt6(*v) : std::string("NA"); }

std::string fmtg(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

nlohmann::ordered_json alias_json(const std::map<std::string, std::int64_t>& counts) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [alias, count] : counts) j[alias] = count;
  return j;
}

// Universal-alias normalizations applied during loading are disclosed in the
// config echo instead of being applied silently.
void add_alias_counts(nlohmann::ordered_json& cj, const cmix::Corpus& corpus) {
  if (!corpus.alias_counts.empty())
    cj["universal_aliases"] = alias_json(corpus.alias_counts);
}

nlohmann::ordered_json config_json(const char* command, const MetricFlags& mf) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["a"] = mf.a;
  j["b"] = mf.b;
  j["cmi_mode"] = mf.cmi_mode;
  j["universal_mode"] = mf.universal_mode;
  j["i_index_mode"] = mf.i_index_mode;
  return j;
}

void emit_config(const nlohmann::ordered_json& cfg, const std::string& output) {
  if (output == "table") {
    std::cout << "# config: " << cfg.dump() << '\n';
  } else {
    nlohmann::ordered_json line;
    line["config"] = cfg;
    std::cout << line.dump() << '\n';
  }
}

void apply_scale_ten(cmix::MetricReport& r) {
  r.cmi_old = cmix::scale_to_ten(r.cmi_old, 0.0, 100.0);
  r.cmi_new = cmix::scale_to_ten(r.cmi_new, 0.0, 100.0);
  r.m_index = cmix::scale_to_ten(r.m_index, 0.0, 1.0);
  r.i_index = cmix::scale_to_ten(r.i_index, 0.0, 1.0);
}

constexpr const char* kMetricColumns[6] = {"cmi_old", "cmi_new",    "m_index",
                                           "i_index", "burstiness", "memory"};

// ---------------------------------------------------------------- score ----

struct ScoreArgs {
  std::string input;
  std::string format = "tsv-tagged";
  std::string output = "table";
  std::vector<std::string> lexicons;
  std::string gazetteer;
  MetricFlags metric;
  bool scale_ten = false;
  int workers = 1;
};

int run_score(const ScoreArgs& args) {
  const cmix::MetricConfig cfg = to_config(args.metric);
  const TagResources res = load_resources(args.lexicons, args.gazetteer);
  std::ifstream in(args.input);
  if (!in) throw cmix::ParseError(args.input + ": cannot open file");
  const cmix::LoadOptions lo = make_load_options(args.format, res);
  cmix::CorpusReader reader(in, lo, args.input);

  nlohmann::ordered_json cj = config_json("score", args.metric);
  cj["input"] = args.input;
  cj["format"] = args.format;
  cj["output"] = args.output;
  cj["scale_ten"] = args.scale_ten;
  cj["workers"] = args.workers;
  emit_config(cj, args.output);
  if (args.output == "table")
    std::cout << "# id\tcmi_old\tf_p\tcmi_new\tm_index\ti_index\tburstiness\tmemory\tn\tu\t"
                 "switch_points\n";

  std::vector<cmix::TaggedUtterance> chunk;
  for (;;) {
    chunk.clear();
    while (chunk.size() < kScoreChunk) {
      auto utt = reader.next();
      if (!utt) break;
      chunk.push_back(std::move(*utt));
    }
    if (chunk.empty()) break;
    std::vector<cmix::MetricReport> reports = cmix::score_utterances(chunk, cfg, args.workers);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      cmix::MetricReport& r = reports[i];
      if (args.scale_ten) apply_scale_ten(r);
      if (args.output == "table") {
        std::cout << chunk[i].id << '\t' << fmt6(r.cmi_old) << '\t' << fmt6(r.f_p) << '\t'
                  << fmt6(r.cmi_new) << '\t' << fmt6(r.m_index) << '\t' << fmt6(r.i_index)
                  << '\t' << fmt6(r.burstiness) << '\t' << fmt6(r.memory) << '\t'
                  << r.histogram.total << '\t' << r.histogram.universal_count << '\t'
                  << r.switch_points << '\n';
      } else {
        nlohmann::ordered_json line;
        line["id"] = chunk[i].id;
        nlohmann::ordered_json fields = cmix::to_json(r);
        for (auto& [key, value] : fields.items()) line[key] = std::move(value);
        std::cout << line.dump() << '\n';
      }
    }
    if (chunk.size() < kScoreChunk) break;
  }
  if (!reader.alias_counts().empty()) {
    if (args.output == "table") {
      std::cout << "# universal_aliases: " << alias_json(reader.alias_counts()).dump() << '\n';
    } else {
      nlohmann::ordered_json line;
      line["universal_aliases"] = alias_json(reader.alias_counts());
      std::cout << line.dump() << '\n';
    }
  }
  return 0;
}

// ------------------------------------------------------------------ tag ----

struct TagArgs {
  std::string input;
  std::string output = "table";
  std::vector<std::string> lexicons;
  std::string gazetteer;
  std::string fallback = "univ";
  std::vector<std::string> priority;
  bool edit_distance = false;
};

void reject_tagged_input(const std::string& path) {
  std::ifstream probe(path);
  if (!probe) throw cmix::ParseError(path + ": cannot open file");
  std::string line;
  std::int64_t line_no = 0;
  int seen = 0;
  while (seen < 20 && std::getline(probe, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++seen;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) continue;
    if (line.find('\t', tab + 1) != std::string::npos) continue;
    if (line.find(' ') != std::string::npos) continue;
    throw cmix::ParseError(path + ":" + std::to_string(line_no) +
                           ": input already looks tsv-tagged (token<TAB>tag); score it "
                           "directly with --format tsv-tagged instead of re-tagging");
  }
}

int run_tag(const TagArgs& args) {
  if (args.lexicons.empty())
    throw cmix::ParseError("tag needs at least one --lexicon");
  reject_tagged_input(args.input);

  const TagResources res = load_resources(args.lexicons, args.gazetteer);
  cmix::TaggerOptions tagger;
  tagger.fallback = args.fallback == "univ" ? cmix::LanguageTag::universal()
                                            : cmix::LanguageTag::language(args.fallback);
  tagger.priority = args.priority;
  tagger.edit_distance_one = args.edit_distance;

  cmix::LoadOptions lo = make_load_options("raw-text", res, &tagger);
  const cmix::Corpus corpus = cmix::load_corpus(std::filesystem::path(args.input), lo);

  nlohmann::ordered_json cj;
  cj["command"] = "tag";
  cj["input"] = args.input;
  cj["output"] = args.output;
  cj["lexicons"] = args.lexicons;
  cj["gazetteer"] = args.gazetteer.empty() ? nlohmann::ordered_json(nullptr)
                                           : nlohmann::ordered_json(args.gazetteer);
  cj["fallback"] = args.fallback;
  cj["priority"] = args.priority;
  cj["edit_distance"] = args.edit_distance;
  add_alias_counts(cj, corpus);
  emit_config(cj, args.output);

  if (args.output == "table") {
    cmix::save_corpus_tsv(std::cout, corpus);
  } else {
    for (std::size_t i = 0; i < corpus.utterances.size(); ++i) {
      const cmix::TaggedUtterance& utt = corpus.utterances[i];
      nlohmann::ordered_json line;
      line["id"] = utt.id;
      nlohmann::ordered_json tokens = nlohmann::ordered_json::array();
      nlohmann::ordered_json tags = nlohmann::ordered_json::array();
      for (const cmix::Token& t : utt.tokens) {
        tokens.push_back(t.surface);
        tags.push_back(cmix::to_string(*t.tag));
      }
      line["tokens"] = std::move(tokens);
      line["tags"] = std::move(tags);
      std::cout << line.dump() << '\n';
    }
  }
  return 0;
}

// ---------------------------------------------------------------- stats ----

struct StatsArgs {
  std::string input;
  std::string format = "tsv-tagged";
  std::string output = "table";
  std::vector<std::string> lexicons;
  std::string gazetteer;
  MetricFlags metric;
  double bin_width = 10.0;
  int workers = 1;
};

int run_stats(const StatsArgs& args) {
  const cmix::MetricConfig cfg = to_config(args.metric);
  const TagResources res = load_resources(args.lexicons, args.gazetteer);
  const cmix::LoadOptions lo = make_load_options(args.format, res);
  const cmix::Corpus corpus = cmix::load_corpus(std::filesystem::path(args.input), lo);

  cmix::StatsOptions so;
  so.bin_width = args.bin_width;
  so.workers = args.workers;
  const cmix::CorpusStats stats = cmix::corpus_stats(corpus, cfg, so);

  nlohmann::ordered_json cj = config_json("stats", args.metric);
  cj["input"] = args.input;
  cj["format"] = args.format;
  cj["output"] = args.output;
  cj["bin_width"] = args.bin_width;
  cj["workers"] = args.workers;
  add_alias_counts(cj, corpus);

  if (args.output == "json") {
    nlohmann::ordered_json out;
    out["config"] = std::move(cj);
    out["stats"] = cmix::to_json(stats);
    std::cout << out.dump() << '\n';
    return 0;
  }

  emit_config(cj, "table");
  std::cout << "utterances\t" << stats.utterance_count << '\n';
  std::cout << "tokens\t" << stats.token_count << '\n';
  std::cout << "# metric\tcount\tmean\tmedian\tstddev\n";
  for (const char* name : kMetricColumns) {
    const cmix::MetricSummary& s = stats.metrics.at(name);
    std::cout << name << '\t' << s.count;
    if (s.count > 0) {
      std::cout << '\t' << fmt6(s.mean) << '\t' << fmt6(s.median) << '\t' << fmt6(s.stddev);
    } else {
      std::cout << "\tNA\tNA\tNA";
    }
    std::cout << '\n';
  }
  std::cout << "# cmi_new_histogram\tbin_width=" << fmtg(stats.bin_width) << '\n';
  for (std::size_t i = 0; i < stats.cmi_histogram.size(); ++i) {
    const double lo_edge = static_cast<double>(i) * stats.bin_width;
    const double hi_edge = std::min(lo_edge + stats.bin_width, 100.0);
    const bool last = i + 1 == stats.cmi_histogram.size();
    std::cout << '[' << fmtg(lo_edge) << ',' << fmtg(hi_edge) << (last ? "]" : ")") << '\t'
              << stats.cmi_histogram[i] << '\n';
  }
  std::cout << "monolingual_count\t" << stats.monolingual_count << '\n';
  std::cout << "monolingual_fraction\t" << fmt6(stats.fraction_monolingual) << '\n';
  return 0;
}

// --------------------------------------------------------------- filter ----

struct FilterArgs {
  std::string input;
  std::string format = "tsv-tagged";
  std::string output = "table";
  std::vector<std::string> lexicons;
  std::string gazetteer;
  MetricFlags metric;
  double min_cmi = 0.0;
  double min_lang_fraction = 0.0;
  double max_oov_fraction = 1.0;
  std::string low_mix_bucket = "monolingual";
  std::string out_prefix;
};

int run_filter(const FilterArgs& args) {
  const cmix::MetricConfig cfg = to_config(args.metric);
  const TagResources res = load_resources(args.lexicons, args.gazetteer);
  const cmix::LoadOptions lo = make_load_options(args.format, res);
  const cmix::Corpus corpus = cmix::load_corpus(std::filesystem::path(args.input), lo);

  cmix::FilterPolicy policy;
  policy.min_cmi_new = args.min_cmi;
  policy.min_language_bearing_fraction = args.min_lang_fraction;
  policy.max_oov_fraction = args.max_oov_fraction;
  policy.low_mix_bucket = args.low_mix_bucket == "noisy" ? cmix::FilterPolicy::Bucket::noisy
                                                         : cmix::FilterPolicy::Bucket::monolingual;

  const bool has_noise = !res.lexicons.empty();
  cmix::NoiseModel noise;
  noise.lexicons = &res.lexicons;
  noise.rules = &res.rules;
  const cmix::FilterResult result =
      cmix::filter_corpus(corpus, policy, cfg, has_noise ? &noise : nullptr);

  if (!args.out_prefix.empty()) {
    const auto write_bucket = [&](const std::vector<std::size_t>& indices,
                                  const std::string& suffix) {
      cmix::Corpus bucket;
      bucket.registry = corpus.registry;
      bucket.provenance = corpus.provenance;
      for (std::size_t idx : indices) bucket.utterances.push_back(corpus.utterances[idx]);
      const std::string path = args.out_prefix + "." + suffix + ".tsv";
      std::ofstream out(path);
      if (!out) throw cmix::ParseError(path + ": cannot open for writing");
      cmix::save_corpus_tsv(out, bucket);
    };
    write_bucket(result.code_mixed, "code_mixed");
    write_bucket(result.monolingual, "monolingual");
    write_bucket(result.noisy, "noisy");
  }

  nlohmann::ordered_json cj = config_json("filter", args.metric);
  cj["input"] = args.input;
  cj["format"] = args.format;
  cj["output"] = args.output;
  cj["min_cmi"] = args.min_cmi;
  cj["min_lang_fraction"] = args.min_lang_fraction;
  cj["max_oov_fraction"] = args.max_oov_fraction;
  cj["low_mix_bucket"] = args.low_mix_bucket;
  cj["oov_proxy"] = has_noise ? "lexicon+rules" : "disabled";
  cj["out_prefix"] = args.out_prefix.empty() ? nlohmann::ordered_json(nullptr)
                                             : nlohmann::ordered_json(args.out_prefix);
  add_alias_counts(cj, corpus);

  if (args.output == "json") {
    nlohmann::ordered_json out;
    out["config"] = std::move(cj);
    out["summary"] = cmix::filter_summary_json(result, policy, has_noise);
    std::cout << out.dump() << '\n';
  } else {
    emit_config(cj, "table");
    std::cout << "# bucket\tcount\n";
    std::cout << "code_mixed\t" << result.code_mixed.size() << '\n';
    std::cout << "monolingual\t" << result.monolingual.size() << '\n';
    std::cout << "noisy\t" << result.noisy.size() << '\n';
    std::cout << "total\t" << result.decisions.size() << '\n';
  }

  if (result.code_mixed.empty()) {
    std::cerr << "warning: the code-mixed partition is empty under this policy\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------- probe ----

struct ProbeArgs {
  std::string input;
  std::string format = "tsv-tagged";
  std::string output = "table";
  std::vector<std::string> lexicons;
  std::string gazetteer;
  MetricFlags metric;
  std::int64_t permutations = 100;
  std::uint64_t seed = 0;
};

int run_probe(const ProbeArgs& args) {
  const cmix::MetricConfig cfg = to_config(args.metric);
  const TagResources res = load_resources(args.lexicons, args.gazetteer);
  const cmix::LoadOptions lo = make_load_options(args.format, res);
  const cmix::Corpus corpus = cmix::load_corpus(std::filesystem::path(args.input), lo);

  nlohmann::ordered_json cj = config_json("probe", args.metric);
  cj["input"] = args.input;
  cj["format"] = args.format;
  cj["output"] = args.output;
  cj["permutations"] = args.permutations;
  cj["seed"] = args.seed;
  add_alias_counts(cj, corpus);
  emit_config(cj, args.output);
  if (args.output == "table")
    std::cout << "# id\tseed\tevaluations\tcmi_old_spread\tcmi_new_spread\tm_index_spread\t"
                 "i_index_spread\tburstiness_spread\tmemory_spread\tlargest_spread_metric\n";

  for (std::size_t i = 0; i < corpus.utterances.size(); ++i) {
    // Per-utterance seed offset keeps reports stable under corpus slicing.
    const cmix::ProbeReport report =
        cmix::shuffle_probe(corpus.utterances[i], args.permutations, args.seed + i, cfg);
    if (args.output == "table") {
      std::cout << report.utterance_id << '\t' << report.seed << '\t' << report.evaluations;
      for (const char* name : kMetricColumns) {
        const cmix::MetricSpread& s = report.metrics.at(name);
        std::cout << '\t' << (s.defined_count > 0 ? fmt6(s.spread) : std::string("NA"));
      }
      std::cout << '\t' << report.largest_spread_metric << '\n';
    } else {
      std::cout << cmix::to_json(report).dump() << '\n';
    }
  }
  return 0;
}

// ----------------------------------------------------------- compare-lid ----

struct CompareArgs {
  std::vector<std::string> inputs;
  std::string output = "table";
  MetricFlags metric;
  std::string gold;
};

int run_compare_lid(const CompareArgs& args) {
  const cmix::MetricConfig cfg = to_config(args.metric);

  std::vector<cmix::Corpus> corpora;
  std::vector<std::string> names;
  for (const std::string& p : args.inputs) {
    corpora.push_back(cmix::load_corpus(std::filesystem::path(p)));
    if (corpora.back().provenance.empty())
      throw cmix::ParseError(p + ": needs a '# source:' header naming the tag source");
    names.push_back(corpora.back().provenance);
  }
  {
    const std::set<std::string> unique(names.begin(), names.end());
    if (unique.size() != names.size())
      throw cmix::ParseError("duplicate '# source:' names across the input files");
  }
  for (std::size_t c = 1; c < corpora.size(); ++c) {
    if (corpora[c].utterances.size() != corpora[0].utterances.size())
      throw cmix::ParseError(args.inputs[c] + ": has " +
                             std::to_string(corpora[c].utterances.size()) +
                             " utterances but " + args.inputs[0] + " has " +
                             std::to_string(corpora[0].utterances.size()));
  }
  std::optional<std::string> gold;
  if (!args.gold.empty()) {
    if (std::find(names.begin(), names.end(), args.gold) == names.end())
      throw cmix::ParseError("gold source '" + args.gold + "' is not among the inputs");
    gold = args.gold;
  }

  nlohmann::ordered_json cj = config_json("compare-lid", args.metric);
  cj["inputs"] = args.inputs;
  cj["sources"] = names;
  cj["gold"] = gold ? nlohmann::ordered_json(*gold) : nlohmann::ordered_json(nullptr);
  cj["output"] = args.output;
  {
    nlohmann::ordered_json aliases = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < corpora.size(); ++c)
      if (!corpora[c].alias_counts.empty())
        aliases[names[c]] = alias_json(corpora[c].alias_counts);
    if (!aliases.empty()) cj["universal_aliases"] = std::move(aliases);
  }

  nlohmann::ordered_json utterances_json = nlohmann::ordered_json::array();
  if (args.output == "table") emit_config(cj, "table");

  for (std::size_t u = 0; u < corpora[0].utterances.size(); ++u) {
    std::vector<std::string> tokens;
    for (const cmix::Token& t : corpora[0].utterances[u].tokens) tokens.push_back(t.surface);
    cmix::TagSequences sequences;
    for (std::size_t c = 0; c < corpora.size(); ++c) {
      const cmix::TaggedUtterance& utt = corpora[c].utterances[u];
      if (utt.tokens.size() != tokens.size())
        throw cmix::ParseError(args.inputs[c] + ": utterance " + std::to_string(u + 1) +
                               " has " + std::to_string(utt.tokens.size()) + " tokens, expected " +
                               std::to_string(tokens.size()));
      std::vector<cmix::LanguageTag> tags;
      for (std::size_t i = 0; i < utt.tokens.size(); ++i) {
        if (utt.tokens[i].surface != tokens[i])
          throw cmix::ParseError(args.inputs[c] + ": utterance " + std::to_string(u + 1) +
                                 " token " + std::to_string(i + 1) + " is '" +
                                 utt.tokens[i].surface + "' but " + args.inputs[0] + " has '" +
                                 tokens[i] + "'");
        tags.push_back(*utt.tokens[i].tag);
      }
      sequences.emplace_back(names[c], std::move(tags));
    }

    const cmix::AgreementMatrix matrix = cmix::compare_taggers(tokens, sequences, gold);
    const auto reports = cmix::metric_divergence(tokens, sequences, cfg);

    if (args.output == "table") {
      std::cout << "# utterance " << u + 1 << '\n';
      std::cout << "# pair\tagreement\tagreement_language_bearing\n";
      for (std::size_t i = 0; i < names.size(); ++i)
        for (std::size_t j = i + 1; j < names.size(); ++j)
          std::cout << names[i] << '/' << names[j] << '\t' << fmt6(matrix.agreement[i][j])
                    << '\t' << fmt6(matrix.agreement_language_bearing[i][j]) << '\n';
      std::cout << "# source\tcmi_old\tf_p\tcmi_new\tm_index\ti_index\tburstiness\tmemory\t"
                   "switch_points\n";
      for (const auto& [source, r] : reports)
        std::cout << source << '\t' << fmt6(r.cmi_old) << '\t' << fmt6(r.f_p) << '\t'
                  << fmt6(r.cmi_new) << '\t' << fmt6(r.m_index) << '\t' << fmt6(r.i_index)
                  << '\t' << fmt6(r.burstiness) << '\t' << fmt6(r.memory) << '\t'
                  << r.switch_points << '\n';
      if (gold) {
        std::cout << "# accuracy_vs_gold\n";
        for (const auto& [source, accuracy] : matrix.accuracy_vs_gold)
          std::cout << source << '\t' << fmt6(accuracy) << '\n';
      }
    } else {
      nlohmann::ordered_json item;
      item["index"] = u + 1;
      item["tokens"] = tokens;
      item["agreement"] = cmix::to_json(matrix);
      nlohmann::ordered_json report_rows = nlohmann::ordered_json::array();
      for (const auto& [source, r] : reports) {
        nlohmann::ordered_json row;
        row["source"] = source;
        row["metrics"] = cmix::to_json(r);
        report_rows.push_back(std::move(row));
      }
      item["reports"] = std::move(report_rows);
      utterances_json.push_back(std::move(item));
    }
  }

  if (args.output == "json") {
    nlohmann::ordered_json out;
    out["config"] = std::move(cj);
    out["utterances"] = std::move(utterances_json);
    std::cout << out.dump() << '\n';
  }
  return 0;
}

// ------------------------------------------------------------- correlate ----

struct CorrelateArgs {
  std::string input;
  std::string format = "tsv-tagged";
  std::string output = "table";
  std::vector<std::string> lexicons;
  std::string gazetteer;
  MetricFlags metric;
  std::string annotations;
};

int run_correlate(const CorrelateArgs& args) {
  const cmix::MetricConfig cfg = to_config(args.metric);
  const TagResources res = load_resources(args.lexicons, args.gazetteer);
  const cmix::LoadOptions lo = make_load_options(args.format, res);
  const cmix::Corpus corpus = cmix::load_corpus(std::filesystem::path(args.input), lo);
  const std::vector<cmix::AnnotationRecord> records =
      cmix::load_annotations(std::filesystem::path(args.annotations));

  const cmix::CorrelationTable table = cmix::correlate_annotations(records, corpus, cfg);
  const std::vector<cmix::AgreementPair> pairs = cmix::annotator_agreement(records);

  nlohmann::ordered_json cj = config_json("correlate", args.metric);
  cj["input"] = args.input;
  cj["format"] = args.format;
  cj["annotations"] = args.annotations;
  cj["output"] = args.output;
  add_alias_counts(cj, corpus);

  if (args.output == "json") {
    nlohmann::ordered_json out;
    out["config"] = std::move(cj);
    out["correlation"] = cmix::to_json(table);
    out["agreement"] = cmix::to_json(pairs);
    std::cout << out.dump() << '\n';
    return 0;
  }

  emit_config(cj, "table");
  std::cout << "# rank_correlation\tspearman_average_ranks\n";
  std::cout << "# utterances\t" << table.utterances << '\n';
  std::cout << "# metric\tn\trho_dcm\trho_ra\n";
  for (const char* name : kMetricColumns) {
    const auto& row = table.cells.at(name);
    const cmix::CorrelationCell& dcm = row.at("dcm");
    const cmix::CorrelationCell& ra = row.at("ra");
    std::cout << name << '\t' << dcm.n << '\t' << fmt6(dcm.rho) << '\t' << fmt6(ra.rho) << '\n';
  }
  std::cout << "# agreement\tpairs\n";
  std::cout << "# a\tb\tshared\tsufficient\tmad_dcm\tmad_ra\trho_dcm\trho_ra\n";
  for (const cmix::AgreementPair& p : pairs) {
    std::cout << p.a << '\t' << p.b << '\t' << p.shared << '\t' << (p.sufficient ? "yes" : "no");
    if (p.shared > 0) {
      std::cout << '\t' << fmt6(p.mad_dcm) << '\t' << fmt6(p.mad_ra);
    } else {
      std::cout << "\tNA\tNA";
    }
    std::cout << '\t' << fmt6(p.rho_dcm) << '\t' << fmt6(p.rho_ra) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);

  CLI::App app{"code-mixing metrics over token-level language-tagged text"};
  app.require_subcommand(1);

  const auto add_input = [](CLI::App* cmd, std::string& path) {
    cmd->add_option("input", path, "input file")->required()->check(CLI::ExistingFile);
  };
  const auto add_format = [](CLI::App* cmd, std::string& format) {
    cmd->add_option("--format", format, "input format")
        ->check(CLI::IsMember({"tsv-tagged", "jsonl", "raw-text"}));
  };
  const auto add_output = [](CLI::App* cmd, std::string& output) {
    cmd->add_option("--output", output, "output form")->check(CLI::IsMember({"table", "json"}));
  };
  const auto add_lexicons = [](CLI::App* cmd, std::vector<std::string>& lex, std::string& gaz) {
    cmd->add_option("--lexicon", lex, "lexicon file, repeatable")->check(CLI::ExistingFile);
    cmd->add_option("--gazetteer", gaz, "named-entity list, one per line")
        ->check(CLI::ExistingFile);
  };

  ScoreArgs score_args;
  auto* score_cmd = app.add_subcommand("score", "per-utterance metric reports");
  add_input(score_cmd, score_args.input);
  add_format(score_cmd, score_args.format);
  add_output(score_cmd, score_args.output);
  add_lexicons(score_cmd, score_args.lexicons, score_args.gazetteer);
  add_metric_flags(score_cmd, score_args.metric);
  score_cmd->add_flag("--scale-ten", score_args.scale_ten,
                      "map cmi_old, cmi_new, m_index, i_index onto 0..10");
  score_cmd->add_option("--workers", score_args.workers, "parallel scoring threads")
      ->check(CLI::Range(1, 256));

  TagArgs tag_args;
  auto* tag_cmd = app.add_subcommand("tag", "tag raw text into tsv-tagged form");
  add_input(tag_cmd, tag_args.input);
  add_output(tag_cmd, tag_args.output);
  add_lexicons(tag_cmd, tag_args.lexicons, tag_args.gazetteer);
  tag_cmd->add_option("--fallback", tag_args.fallback,
                      "tag for tokens no rule or lexicon covers (language code or 'univ')");
  tag_cmd->add_option("--priority", tag_args.priority,
                      "language preference order for equal-weight lexicon ties, repeatable");
  tag_cmd->add_flag("--edit-distance", tag_args.edit_distance,
                    "also accept lexicon entries one edit away");

  StatsArgs stats_args;
  auto* stats_cmd = app.add_subcommand("stats", "corpus-level aggregates");
  add_input(stats_cmd, stats_args.input);
  add_format(stats_cmd, stats_args.format);
  add_output(stats_cmd, stats_args.output);
  add_lexicons(stats_cmd, stats_args.lexicons, stats_args.gazetteer);
  add_metric_flags(stats_cmd, stats_args.metric);
  stats_cmd->add_option("--bin-width", stats_args.bin_width, "cmi_new histogram bin width");
  stats_cmd->add_option("--workers", stats_args.workers, "parallel scoring threads")
      ->check(CLI::Range(1, 256));

  FilterArgs filter_args;
  auto* filter_cmd = app.add_subcommand("filter", "partition a corpus into code-mixed, "
                                                  "monolingual, and noisy buckets");
  add_input(filter_cmd, filter_args.input);
  add_format(filter_cmd, filter_args.format);
  add_output(filter_cmd, filter_args.output);
  add_lexicons(filter_cmd, filter_args.lexicons, filter_args.gazetteer);
  add_metric_flags(filter_cmd, filter_args.metric);
  filter_cmd->add_option("--min-cmi", filter_args.min_cmi,
                         "cmi_new threshold for the code-mixed bucket");
  filter_cmd->add_option("--min-lang-fraction", filter_args.min_lang_fraction,
                         "minimum language-bearing token fraction before an utterance "
                         "counts as noisy");
  filter_cmd->add_option("--max-oov-fraction", filter_args.max_oov_fraction,
                         "maximum out-of-vocabulary fraction before an utterance counts "
                         "as noisy (needs --lexicon)");
  filter_cmd->add_option("--low-mix-bucket", filter_args.low_mix_bucket,
                         "bucket for utterances with 0 < cmi_new < --min-cmi")
      ->check(CLI::IsMember({"monolingual", "noisy"}));
  filter_cmd->add_option("--out-prefix", filter_args.out_prefix,
                         "write <prefix>.<bucket>.tsv files");

  ProbeArgs probe_args;
  auto* probe_cmd = app.add_subcommand("probe", "shuffle probe: metric spread under random "
                                                "token permutations");
  add_input(probe_cmd, probe_args.input);
  add_format(probe_cmd, probe_args.format);
  add_output(probe_cmd, probe_args.output);
  add_lexicons(probe_cmd, probe_args.lexicons, probe_args.gazetteer);
  add_metric_flags(probe_cmd, probe_args.metric);
  probe_cmd->add_option("--permutations", probe_args.permutations, "random shuffles per utterance")
      ->check(CLI::Range(std::int64_t{1}, std::int64_t{1000000}));
  probe_cmd->add_option("--seed", probe_args.seed, "base seed; utterance i uses seed+i");

  CompareArgs compare_args;
  auto* compare_cmd = app.add_subcommand("compare-lid", "agreement and metric divergence "
                                                        "across tag sources");
  compare_cmd->add_option("inputs", compare_args.inputs,
                          "tsv-tagged files, one per tag source, each with a '# source:' header")
      ->required()
      ->expected(2, -1)
      ->check(CLI::ExistingFile);
  add_output(compare_cmd, compare_args.output);
  add_metric_flags(compare_cmd, compare_args.metric);
  compare_cmd->add_option("--gold", compare_args.gold, "source name to grade the others against");

  CorrelateArgs correlate_args;
  auto* correlate_cmd = app.add_subcommand("correlate", "rank-correlate metrics with human "
                                                        "annotations");
  add_input(correlate_cmd, correlate_args.input);
  add_format(correlate_cmd, correlate_args.format);
  add_output(correlate_cmd, correlate_args.output);
  add_lexicons(correlate_cmd, correlate_args.lexicons, correlate_args.gazetteer);
  add_metric_flags(correlate_cmd, correlate_args.metric);
  correlate_cmd
      ->add_option("--annotations", correlate_args.annotations,
                   "CSV with header utterance_id,annotator_id,dcm,ra")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (score_cmd->parsed()) return run_score(score_args);
    if (tag_cmd->parsed()) return run_tag(tag_args);
    if (stats_cmd->parsed()) return run_stats(stats_args);
    if (filter_cmd->parsed()) return run_filter(filter_args);
    if (probe_cmd->parsed()) return run_probe(probe_args);
    if (compare_cmd->parsed()) return run_compare_lid(compare_args);
    if (correlate_cmd->parsed()) return run_correlate(correlate_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
