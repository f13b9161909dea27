// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion is self-contained and prints a short detail string
// so a failing run points at the offending case directly.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cmix/diagnostics.hpp"
#include "oracles.hpp"

using namespace cmix;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kFixtures{CMIX_FIXTURE_DIR};
constexpr double kTol = 1e-9;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt_seconds(double s) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << s;
  return out.str();
}

const fs::path& temp_root() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / ("cmix_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string q(const fs::path& path) { return "'" + path.string() + "'"; }

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path out_path = temp_root() / ("run" + std::to_string(counter) + ".out");
  const fs::path err_path = temp_root() / ("run" + std::to_string(counter) + ".err");
  ++counter;
  const std::string cmd =
      q(fs::path{CMIX_CLI_PATH}) + " " + args + " > " + q(out_path) + " 2> " + q(err_path);
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

bool near(double a, double b) { return std::fabs(a - b) <= kTol; }

bool near_opt(const std::optional<double>& got, const std::optional<double>& want) {
  if (got.has_value() != want.has_value()) return false;
  return !got || near(*got, *want);
}

std::string join_tags(const std::vector<std::string>& tags) {
  std::string out;
  for (const std::string& t : tags) {
    if (!out.empty()) out += ',';
    out += t;
  }
  return out;
}

TaggedUtterance random_utterance(std::mt19937_64& rng, int min_len, int max_len, int max_langs,
                                 int univ_percent, std::string id) {
  const int len = min_len + static_cast<int>(rng() % static_cast<std::uint64_t>(
                                                 max_len - min_len + 1));
  const int langs = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_langs));
  std::vector<std::string> tags;
  tags.reserve(static_cast<std::size_t>(len));
  for (int t = 0; t < len; ++t) {
    if (rng() % 100 < static_cast<std::uint64_t>(univ_percent))
      tags.push_back("univ");
    else
      tags.push_back("l" + std::to_string(rng() % static_cast<std::uint64_t>(langs)));
  }
  return oracle::utterance_from_tags(tags, std::move(id));
}

Corpus make_big_corpus() {
  std::mt19937_64 rng(20260817);
  Corpus corpus;
  corpus.provenance = "synthetic-100k";
  corpus.utterances.reserve(100000);
  for (int i = 0; i < 100000; ++i) {
    // Lengths uniform on 1..39: mean 20.
    corpus.utterances.push_back(
        random_utterance(rng, 1, 39, 4, 10, std::to_string(i + 1)));
  }
  for (int l = 0; l < 4; ++l) corpus.registry.insert("l" + std::to_string(l));
  return corpus;
}

const Corpus& big_corpus() {
  static const Corpus corpus = make_big_corpus();
  return corpus;
}

// --------------------------------------------------------------------------
// Criterion 1: closed-form metrics match brute-force reference computations
// on every tag sequence of length 1..6 over {hi, en, univ}.

bool closed_form_vs_oracle(std::string& detail) {
  const auto start = Clock::now();
  const MetricConfig literal_cfg;
  MetricConfig normalized_cfg;
  normalized_cfg.cmi_mode = CmiMode::normalized;

  const auto sequences = oracle::all_sequences({"hi", "en", "univ"}, 6);
  double worst = 0.0;
  const auto close = [&worst](double got, double want) {
    worst = std::max(worst, std::fabs(got - want));
    return std::fabs(got - want) <= kTol;
  };

  for (const auto& tags : sequences) {
    const TaggedUtterance utt = oracle::utterance_from_tags(tags);
    const MetricReport rep = metric_report(utt, literal_cfg);
    bool ok = close(rep.cmi_old, oracle::cmi_old(tags)) && close(rep.f_p, oracle::f_p(tags)) &&
              close(rep.cmi_new, oracle::cmi_new_literal(tags, 0.5, 0.5)) &&
              close(rep.m_index, oracle::m_index(tags)) &&
              close(rep.i_index, oracle::i_index(tags));
    const std::optional<double> want_b = oracle::burstiness(tags);
    const std::optional<double> want_m = oracle::memory(tags);
    ok = ok && rep.burstiness.has_value() == want_b.has_value() &&
         rep.memory.has_value() == want_m.has_value();
    if (ok && want_b) ok = close(*rep.burstiness, *want_b);
    if (ok && want_m) ok = close(*rep.memory, *want_m);
    if (ok) {
      const MetricReport norm = metric_report(utt, normalized_cfg);
      ok = close(norm.cmi_new, oracle::cmi_new_normalized(tags, 0.5, 0.5));
    }
    if (!ok) {
      detail = "mismatch on tags [" + join_tags(tags) + "]";
      return false;
    }
  }

  const double elapsed = seconds_since(start);
  if (elapsed >= 5.0) {
    detail = "took " + fmt_seconds(elapsed) + "s, budget 5s";
    return false;
  }
  std::ostringstream d;
  d << sequences.size() << " tag sequences, worst deviation " << worst << ", "
    << fmt_seconds(elapsed) << "s";
  detail = d.str();
  return true;
}

// --------------------------------------------------------------------------
// Criterion 2: degenerate inputs hit their boundary values exactly, not
// within a tolerance.

bool degenerate_exactness(std::string& detail) {
  const MetricConfig cfg;
  MetricConfig norm;
  norm.cmi_mode = CmiMode::normalized;

  const std::vector<std::string> mono_tags{"hi", "hi", "hi", "hi", "hi"};
  const MetricReport mono = metric_report(oracle::utterance_from_tags(mono_tags), cfg);
  if (mono.cmi_old != 0.0 || mono.cmi_new != 0.0 || mono.m_index != 0.0 ||
      mono.i_index != 0.0) {
    detail = "monolingual utterance does not score exactly zero";
    return false;
  }
  if (metric_report(oracle::utterance_from_tags(mono_tags), norm).cmi_new != 0.0) {
    detail = "monolingual utterance is nonzero under normalized composition";
    return false;
  }
  if (metric_report(oracle::utterance_from_tags({"hi", "univ", "hi", "univ"}), cfg).cmi_new !=
      0.0) {
    detail = "universal padding breaks the monolingual zero";
    return false;
  }
  if (metric_report(oracle::utterance_from_tags({"hi", "en", "hi", "en"}), cfg).m_index != 1.0) {
    detail = "balanced two-language split does not give m_index exactly 1";
    return false;
  }
  if (metric_report(oracle::utterance_from_tags({"hi", "en", "hi", "en", "hi", "en"}), cfg)
          .i_index != 1.0) {
    detail = "perfect alternation does not give i_index exactly 1";
    return false;
  }
  const MetricReport two = metric_report(oracle::utterance_from_tags({"hi", "hi", "en", "en"}), cfg);
  const MetricReport three =
      metric_report(oracle::utterance_from_tags({"hi", "hi", "hi", "en", "en", "en"}), cfg);
  if (!two.burstiness || *two.burstiness != -1.0 || !three.burstiness ||
      *three.burstiness != -1.0) {
    detail = "equal-length spans do not give burstiness exactly -1";
    return false;
  }
  detail = "monolingual zeros, m_index 1, i_index 1, burstiness -1 all exact";
  return true;
}

// --------------------------------------------------------------------------
// Criterion 3: under token shuffling, histogram-derived metrics never move
// while the order-aware i_index visibly does.

bool permutation_invariance(std::string& detail) {
  const auto start = Clock::now();
  const MetricConfig cfg;
  std::mt19937_64 rng(424242);

  std::vector<TaggedUtterance> utterances;
  std::vector<std::string> blocky;
  blocky.insert(blocky.end(), 10, "hi");
  blocky.insert(blocky.end(), 10, "en");
  utterances.push_back(oracle::utterance_from_tags(blocky, "blocky"));
  for (int i = 1; i < 1000; ++i)
    utterances.push_back(random_utterance(rng, 2, 40, 3, 15, "r" + std::to_string(i)));

  double max_i_spread = 0.0;
  for (std::size_t i = 0; i < utterances.size(); ++i) {
    const ProbeReport pr = shuffle_probe(utterances[i], 50, 1000 + i, cfg);
    for (const char* name : {"cmi_old", "m_index"}) {
      const MetricSpread& s = pr.metrics.at(name);
      if (s.spread != 0.0 || !s.invariant) {
        detail = std::string(name) + " moved under shuffling on utterance " + utterances[i].id;
        return false;
      }
    }
    max_i_spread = std::max(max_i_spread, pr.metrics.at("i_index").spread);
  }

  const double elapsed = seconds_since(start);
  if (max_i_spread <= 0.5) {
    std::ostringstream d;
    d << "largest i_index spread only " << max_i_spread;
    detail = d.str();
    return false;
  }
  if (elapsed >= 30.0) {
    detail = "took " + fmt_seconds(elapsed) + "s, budget 30s";
    return false;
  }
  std::ostringstream d;
  d << "1000 utterances x 51 evaluations, largest i_index spread " << std::setprecision(3)
    << max_i_spread << ", " << fmt_seconds(elapsed) << "s";
  detail = d.str();
  return true;
}

// --------------------------------------------------------------------------
// Criterion 4: random utterances across every mode combination stay within
// documented ranges, produce no NaN, and report undefined values as such.

bool range_fuzz(std::string& detail) {
  std::mt19937_64 rng(99991);
  std::vector<MetricConfig> configs(5);
  configs[1].cmi_mode = CmiMode::normalized;
  configs[2].universal_mode = UniversalMode::literal;
  configs[3].i_index_mode = IIndexMode::all_token;
  configs[4].universal_mode = UniversalMode::literal;
  configs[4].i_index_mode = IIndexMode::all_token;

  const auto in_range = [](double v, double lo, double hi) {
    return !std::isnan(v) && v >= lo && v <= hi;
  };

  std::int64_t undefined_burstiness = 0;
  std::int64_t undefined_memory = 0;
  for (int i = 0; i < 10000; ++i) {
    const TaggedUtterance utt = random_utterance(rng, 1, 200, 4, 20, "f" + std::to_string(i));
    for (const MetricConfig& cfg : configs) {
      const MetricReport r = metric_report(utt, cfg);
      if (!in_range(r.cmi_old, 0.0, 100.0) || !in_range(r.f_p, 0.0, 1.0) ||
          !in_range(r.cmi_new, 0.0, 100.0) || !in_range(r.m_index, 0.0, 1.0) ||
          !in_range(r.i_index, 0.0, 1.0)) {
        detail = "scalar metric out of range on utterance " + utt.id;
        return false;
      }
      if (r.burstiness) {
        if (!in_range(*r.burstiness, -1.0, 1.0)) {
          detail = "burstiness out of range on utterance " + utt.id;
          return false;
        }
      } else {
        ++undefined_burstiness;
      }
      if (r.memory) {
        if (!in_range(*r.memory, -1.0, 1.0)) {
          detail = "memory out of range on utterance " + utt.id;
          return false;
        }
      } else {
        ++undefined_memory;
      }
    }
  }
  std::ostringstream d;
  d << "10000 utterances x 5 mode combinations in range; undefined burstiness/memory "
    << "reported as such in " << undefined_burstiness << "/" << undefined_memory << " cases";
  detail = d.str();
  return true;
}

// --------------------------------------------------------------------------
// Criterion 5: canonical files round-trip byte-identically, repeated CLI
// runs are byte-identical, and worker counts never change aggregates.

bool determinism(std::string& detail) {
  const std::vector<fs::path> canonical = {
      kFixtures / "sample.tsv",
      kFixtures / "synthetic50.tsv",
      kFixtures / "annotations_corpus.tsv",
      kFixtures / "compare_lid" / "gold.tsv",
  };
  for (const fs::path& path : canonical) {
    if (corpus_to_tsv(load_corpus(path)) != slurp(path)) {
      detail = path.filename().string() + " did not round-trip byte-identically";
      return false;
    }
  }

  const std::vector<std::string> commands = {
      "score " + q(kFixtures / "sample.tsv"),
      "score " + q(kFixtures / "synthetic50.tsv") + " --output json --workers 4",
      "tag " + q(kFixtures / "sample_raw.txt") + " --lexicon " + q(kFixtures / "lex_en.lex"),
      "stats " + q(kFixtures / "synthetic50.tsv"),
      "filter " + q(kFixtures / "filter.tsv") + " --min-cmi 12 --min-lang-fraction 0.3" +
          " --max-oov-fraction 0.4 --lexicon " + q(kFixtures / "lex_en.lex") + " --lexicon " +
          q(kFixtures / "lex_hi.lex"),
      "probe " + q(kFixtures / "sample.tsv") + " --permutations 40 --seed 17 --output json",
      "compare-lid " + q(kFixtures / "compare_lid" / "gold.tsv") + " " +
          q(kFixtures / "compare_lid" / "sysa.tsv") + " --output json",
      "correlate " + q(kFixtures / "annotations_corpus.tsv") + " --annotations " +
          q(kFixtures / "annotations.csv"),
  };
  for (const std::string& cmd : commands) {
    const RunResult first = run_cli(cmd);
    const RunResult second = run_cli(cmd);
    if (first.code != 0) {
      detail = "command exited with " + std::to_string(first.code) + ": " + cmd;
      return false;
    }
    if (first.code != second.code || first.out != second.out || first.err != second.err) {
      detail = "output differs between identical runs: " + cmd;
      return false;
    }
  }

  const MetricConfig cfg;
  StatsOptions one;
  one.workers = 1;
  StatsOptions four;
  four.workers = 4;
  const std::string stats_one = to_json(corpus_stats(big_corpus(), cfg, one)).dump();
  const std::string stats_four = to_json(corpus_stats(big_corpus(), cfg, four)).dump();
  if (stats_one != stats_four) {
    detail = "100000-utterance aggregates differ between 1 and 4 workers";
    return false;
  }

  detail = "4 byte round-trips, 8 commands run twice byte-identically, worker counts agree "
           "on 100000 utterances";
  return true;
}

// --------------------------------------------------------------------------
// Criterion 6: the batch CLI scores 100000 utterances of mean length 20 in
// under 10 seconds, end to end.

bool throughput(std::string& detail) {
  const fs::path big_path = temp_root() / "big_corpus.tsv";
  {
    std::ofstream out(big_path, std::ios::binary);
    save_corpus_tsv(out, big_corpus());
  }
  const fs::path scores_path = temp_root() / "big_scores.txt";
  const fs::path err_path = temp_root() / "big_scores.err";
  const std::string cmd = q(fs::path{CMIX_CLI_PATH}) + " score " + q(big_path) + " > " +
                          q(scores_path) + " 2> " + q(err_path);

  const auto start = Clock::now();
  const int status = std::system(cmd.c_str());
  const double elapsed = seconds_since(start);

  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (code != 0) {
    detail = "scoring run exited with " + std::to_string(code);
    return false;
  }
  std::int64_t lines = 0;
  {
    std::ifstream in(scores_path, std::ios::binary);
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
      for (std::streamsize i = 0; i < in.gcount(); ++i)
        if (buf[i] == '\n') ++lines;
    }
  }
  if (lines != 100002) {
    detail = "expected 100002 output lines, got " + std::to_string(lines);
    return false;
  }
  if (elapsed >= 10.0) {
    detail = "scored 100000 utterances in " + fmt_seconds(elapsed) + "s, budget 10s";
    return false;
  }
  detail = "scored 100000 utterances (mean length 20) in " + fmt_seconds(elapsed) + "s";
  return true;
}

// --------------------------------------------------------------------------
// Criterion 7: whenever two tag sources disagree on language-bearing tokens,
// their metric reports diverge in at least one field.

bool lid_divergence(std::string& detail) {
  const std::vector<std::string> files = {"gold", "sysa", "sysb", "sysc", "sysd", "syse"};
  std::vector<Corpus> corpora;
  for (const std::string& f : files)
    corpora.push_back(load_corpus(kFixtures / "compare_lid" / (f + ".tsv")));

  std::vector<std::string> tokens;
  for (const Token& t : corpora[0].utterances[0].tokens) tokens.push_back(t.surface);
  TagSequences sequences;
  for (const Corpus& c : corpora) {
    std::vector<LanguageTag> tags;
    for (const Token& t : c.utterances[0].tokens) tags.push_back(*t.tag);
    sequences.emplace_back(c.provenance, std::move(tags));
  }

  const MetricConfig cfg;
  const AgreementMatrix matrix = compare_taggers(tokens, sequences);
  const auto reports = metric_divergence(tokens, sequences, cfg);

  const auto differs = [](const MetricReport& x, const MetricReport& y) {
    const auto off = [](double p, double q) { return std::fabs(p - q) > 1e-12; };
    if (off(x.cmi_old, y.cmi_old) || off(x.f_p, y.f_p) || off(x.cmi_new, y.cmi_new) ||
        off(x.m_index, y.m_index) || off(x.i_index, y.i_index))
      return true;
    if (x.burstiness.has_value() != y.burstiness.has_value()) return true;
    if (x.burstiness && off(*x.burstiness, *y.burstiness)) return true;
    if (x.memory.has_value() != y.memory.has_value()) return true;
    if (x.memory && off(*x.memory, *y.memory)) return true;
    return x.switch_points != y.switch_points;
  };

  int disagreeing_pairs = 0;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    for (std::size_t j = i + 1; j < sequences.size(); ++j) {
      if (matrix.agreement_language_bearing[i][j] >= 1.0) continue;
      ++disagreeing_pairs;
      if (!differs(reports[i].second, reports[j].second)) {
        detail = "sources " + sequences[i].first + " and " + sequences[j].first +
                 " disagree on language-bearing tokens but report identical metrics";
        return false;
      }
    }
  }
  if (disagreeing_pairs == 0) {
    detail = "no source pair disagrees, so the harness exercises nothing";
    return false;
  }
  detail = std::to_string(disagreeing_pairs) +
           " source pairs disagree on language-bearing tokens; every pair diverges in at "
           "least one metric";
  return true;
}

// --------------------------------------------------------------------------
// Criterion 8: annotation correlations and annotator agreement match a
// from-scratch recomputation and hand-derived values.

bool annotation_oracle(std::string& detail) {
  const Corpus corpus = load_corpus(kFixtures / "annotations_corpus.tsv");
  const std::vector<AnnotationRecord> records =
      load_annotations(kFixtures / "annotations.csv");
  const MetricConfig cfg;
  const CorrelationTable table = correlate_annotations(records, corpus, cfg);
  const std::vector<AgreementPair> pairs = annotator_agreement(records);

  std::map<std::string, std::vector<const AnnotationRecord*>> by_utterance;
  for (const AnnotationRecord& r : records) by_utterance[r.utterance_id].push_back(&r);

  std::vector<double> dcm_means;
  std::vector<double> ra_means;
  std::vector<MetricReport> reports;
  for (const TaggedUtterance& utt : corpus.utterances) {
    const auto it = by_utterance.find(utt.id);
    if (it == by_utterance.end()) continue;
    double dcm_sum = 0.0;
    double ra_sum = 0.0;
    for (const AnnotationRecord* r : it->second) {
      dcm_sum += r->dcm;
      ra_sum += r->ra;
    }
    dcm_means.push_back(dcm_sum / static_cast<double>(it->second.size()));
    ra_means.push_back(ra_sum / static_cast<double>(it->second.size()));
    reports.push_back(metric_report(utt, cfg));
  }
  if (reports.size() != 10 || table.utterances != 10) {
    detail = "expected 10 annotated utterances";
    return false;
  }

  using Extractor = std::optional<double> (*)(const MetricReport&);
  const std::vector<std::pair<std::string, Extractor>> extract = {
      {"cmi_old", [](const MetricReport& r) { return std::optional<double>(r.cmi_old); }},
      {"cmi_new", [](const MetricReport& r) { return std::optional<double>(r.cmi_new); }},
      {"m_index", [](const MetricReport& r) { return std::optional<double>(r.m_index); }},
      {"i_index", [](const MetricReport& r) { return std::optional<double>(r.i_index); }},
      {"burstiness", [](const MetricReport& r) { return r.burstiness; }},
      {"memory", [](const MetricReport& r) { return r.memory; }},
  };

  for (const auto& [name, get] : extract) {
    std::vector<double> xs;
    std::vector<double> dcm_side;
    std::vector<double> ra_side;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const std::optional<double> v = get(reports[i]);
      if (!v) continue;
      xs.push_back(*v);
      dcm_side.push_back(dcm_means[i]);
      ra_side.push_back(ra_means[i]);
    }
    const CorrelationCell& dcm_cell = table.cells.at(name).at("dcm");
    const CorrelationCell& ra_cell = table.cells.at(name).at("ra");
    if (dcm_cell.n != static_cast<std::int64_t>(xs.size()) ||
        ra_cell.n != static_cast<std::int64_t>(xs.size())) {
      detail = name + ": defined-sample count deviates from the recomputation";
      return false;
    }
    if (!near_opt(dcm_cell.rho, oracle::spearman(xs, dcm_side)) ||
        !near_opt(ra_cell.rho, oracle::spearman(xs, ra_side))) {
      detail = name + ": correlation deviates from the recomputation";
      return false;
    }
  }

  const CorrelationCell& cmi_dcm = table.cells.at("cmi_new").at("dcm");
  const CorrelationCell& cmi_ra = table.cells.at("cmi_new").at("ra");
  const CorrelationCell& i_dcm = table.cells.at("i_index").at("dcm");
  const bool spot_ok = cmi_dcm.n == 10 && cmi_dcm.rho && near(*cmi_dcm.rho, 1.0) &&
                       cmi_ra.rho && near(*cmi_ra.rho, -0.2) && i_dcm.rho &&
                       near(*i_dcm.rho, 1.0) &&
                       table.cells.at("burstiness").at("dcm").n == 9 &&
                       table.cells.at("memory").at("dcm").n == 7;
  if (!spot_ok) {
    detail = "correlation table deviates from the hand-derived values";
    return false;
  }

  if (pairs.size() != 3) {
    detail = "expected 3 annotator pairs, got " + std::to_string(pairs.size());
    return false;
  }
  const AgreementPair& identical = pairs[0];
  bool pair_ok = identical.a == "a1" && identical.b == "a2" && identical.shared == 10 &&
                 identical.mad_dcm == 0.0 && identical.mad_ra == 0.0 && identical.rho_dcm &&
                 near(*identical.rho_dcm, 1.0) && identical.rho_ra &&
                 near(*identical.rho_ra, 1.0);
  for (std::size_t p = 1; p < 3 && pair_ok; ++p) {
    const AgreementPair& reversed = pairs[p];
    pair_ok = reversed.b == "a3" && reversed.shared == 10 && near(reversed.mad_dcm, 5.0) &&
              near(reversed.mad_ra, 2.7) && reversed.rho_dcm &&
              near(*reversed.rho_dcm, -1.0) && !reversed.rho_ra;
  }
  if (!pair_ok) {
    detail = "annotator agreement deviates from the hand-derived values";
    return false;
  }

  detail = "12 correlation cells match the recomputation; agreement pairs match "
           "hand-derived values";
  return true;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    bool (*fn)(std::string&);
  };
  const Criterion criteria[] = {
      {"criterion-1-closed-form-vs-oracle", closed_form_vs_oracle},
      {"criterion-2-degenerate-exactness", degenerate_exactness},
      {"criterion-3-permutation-invariance", permutation_invariance},
      {"criterion-4-range-fuzz", range_fuzz},
      {"criterion-5-determinism", determinism},
      {"criterion-6-throughput", throughput},
      {"criterion-7-lid-divergence", lid_divergence},
      {"criterion-8-annotation-oracle", annotation_oracle},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    std::string detail;
    bool ok = false;
    try {
      ok = c.fn(detail);
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("unexpected exception: ") + e.what();
    }
    std::cout << (ok ? "PASS " : "FAIL ") << c.name;
    if (!detail.empty()) std::cout << " - " << detail;
    std::cout << '\n';
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
