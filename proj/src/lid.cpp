#include "cmix/lid.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>

namespace cmix {

std::string fold_case(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s)
    out.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
  return out;
}

namespace {

// Decodes the UTF-8 sequence starting at byte i; malformed bytes decode as
// themselves with length 1.
std::pair<char32_t, std::size_t> decode_utf8(std::string_view s, std::size_t i) {
  const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  const unsigned char b0 = byte(i);
  if (b0 < 0x80) return {b0, 1};
  auto cont = [&](std::size_t k) { return k < s.size() && (byte(k) & 0xC0) == 0x80; };
  if ((b0 & 0xE0) == 0xC0 && cont(i + 1))
    return {static_cast<char32_t>(((b0 & 0x1F) << 6) | (byte(i + 1) & 0x3F)), 2};
  if ((b0 & 0xF0) == 0xE0 && cont(i + 1) && cont(i + 2))
    return {static_cast<char32_t>(((b0 & 0x0F) << 12) | ((byte(i + 1) & 0x3F) << 6) |
                                  (byte(i + 2) & 0x3F)),
            3};
  if ((b0 & 0xF8) == 0xF0 && cont(i + 1) && cont(i + 2) && cont(i + 3))
    return {static_cast<char32_t>(((b0 & 0x07) << 18) | ((byte(i + 1) & 0x3F) << 12) |
                                  ((byte(i + 2) & 0x3F) << 6) | (byte(i + 3) & 0x3F)),
            4};
  return {b0, 1};
}

template <typename Pred>
bool all_codepoints(const std::string& s, Pred pred) {
  if (s.empty()) return false;
  std::size_t i = 0;
  while (i < s.size()) {
    auto [cp, len] = decode_utf8(s, i);
    if (!pred(cp)) return false;
    i += len;
  }
  return true;
}

template <typename Pred>
bool any_codepoint(const std::string& s, Pred pred) {
  std::size_t i = 0;
  while (i < s.size()) {
    auto [cp, len] = decode_utf8(s, i);
    if (pred(cp)) return true;
    i += len;
  }
  return false;
}

bool is_punct_codepoint(char32_t cp) {
  if (cp < 0x80) return std::ispunct(static_cast<int>(cp)) != 0;
  // General punctuation block plus the Latin-1 punctuation range.
  return (cp >= 0x2000 && cp <= 0x206F) || (cp >= 0x00A1 && cp <= 0x00BF);
}

bool is_emoji_codepoint(char32_t cp) {
  return (cp >= 0x1F000 && cp <= 0x1FAFF) || (cp >= 0x2600 && cp <= 0x27BF) ||
         cp == 0xFE0F || cp == 0x200D;
}

bool has_prefix_nocase(const std::string& s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
  return true;
}

bool is_url(const std::string& s) {
  return has_prefix_nocase(s, "http://") || has_prefix_nocase(s, "https://") ||
         has_prefix_nocase(s, "www.") || s.find("://") != std::string::npos;
}

bool is_numeric(const std::string& s) {
  bool saw_digit = false;
  for (unsigned char c : s) {
    if (std::isdigit(c)) {
      saw_digit = true;
    } else if (c != '.' && c != ',' && c != ':' && c != '/' && c != '%' && c != '+' &&
               c != '-') {
      return false;
    }
  }
  return saw_digit;
}

// Edit distance <= 1, two-pointer scan.
bool within_one_edit(const std::string& a, const std::string& b) {
  const std::size_t la = a.size(), lb = b.size();
  if (la > lb) return within_one_edit(b, a);
  if (lb - la > 1) return false;
  std::size_t i = 0, j = 0;
  bool edited = false;
  while (i < la && j < lb) {
    if (a[i] == b[j]) {
      ++i;
      ++j;
      continue;
    }
    if (edited) return false;
    edited = true;
    if (la == lb)
      ++i, ++j;  // substitution
    else
      ++j;  // insertion into a
  }
  return true;  // any leftover tail is the single edit
}

}  // namespace

bool matches_shape(TokenShape shape, const std::string& surface,
                   const std::unordered_set<std::string>* gazetteer) {
  switch (shape) {
    case TokenShape::mention:
      return surface.size() > 1 && surface[0] == '@';
    case TokenShape::hashtag:
      return surface.size() > 1 && surface[0] == '#';
    case TokenShape::url:
      return is_url(surface);
    case TokenShape::numeric:
      return is_numeric(surface);
    case TokenShape::punctuation:
      return all_codepoints(surface, is_punct_codepoint);
    case TokenShape::emoji:
      return any_codepoint(surface, is_emoji_codepoint);
    case TokenShape::named_entity:
      return gazetteer != nullptr && gazetteer->count(fold_case(surface)) > 0;
  }
  return false;
}

TagRuleSet TagRuleSet::standard() {
  TagRuleSet set;
  set.rules = {
      {TokenShape::mention},   {TokenShape::hashtag}, {TokenShape::url},
      {TokenShape::numeric},   {TokenShape::punctuation},
      {TokenShape::emoji},     {TokenShape::named_entity},
  };
  return set;
}

std::optional<LanguageTag> TagRuleSet::match(const std::string& surface) const {
  for (const TagRule& rule : rules)
    if (matches_shape(rule.shape, surface, &gazetteer)) return rule.tag;
  return std::nullopt;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon file: " + path.string());
  Lexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string folded = fold_case(line);
      if (folded.rfind("#lang:", 0) == 0) {
        std::string code = folded.substr(6);
        code.erase(0, code.find_first_not_of(" \t"));
        code.erase(code.find_last_not_of(" \t") + 1);
        if (code.empty())
          throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                   ": empty language code in #lang header");
        lex.language = code;
      }
      continue;
    }
    if (lex.language.empty())
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": lexicon entries before the #lang header");
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected surface<TAB>weight");
    const std::string surface = fold_case(std::string_view(line).substr(0, tab));
    double weight = 0.0;
    try {
      weight = std::stod(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": weight is not a number");
    }
    if (!(weight > 0.0))
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": weight must be > 0");
    lex.entries[surface] = weight;
  }
  if (lex.language.empty())
    throw std::runtime_error(path.string() + ": missing #lang header");
  return lex;
}

std::unordered_set<std::string> load_gazetteer(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open gazetteer file: " + path.string());
  std::unordered_set<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    entries.insert(fold_case(line));
  }
  return entries;
}

namespace {

struct Candidate {
  double weight = -1.0;
  std::string language;
};

// Lower rank wins ties: configured priority order, then code order.
std::size_t priority_rank(const std::string& code, const std::vector<std::string>& priority) {
  for (std::size_t i = 0; i < priority.size(); ++i)
    if (priority[i] == code) return i;
  return priority.size();
}

bool better(const Candidate& challenger, const Candidate& incumbent,
            const std::vector<std::string>& priority) {
  if (incumbent.weight < 0.0) return true;
  if (challenger.weight != incumbent.weight) return challenger.weight > incumbent.weight;
  const std::size_t pc = priority_rank(challenger.language, priority);
  const std::size_t pi = priority_rank(incumbent.language, priority);
  if (pc != pi) return pc < pi;
  return challenger.language < incumbent.language;
}

std::optional<LanguageTag> lexicon_lookup(const std::string& folded,
                                          const std::vector<Lexicon>& lexicons,
                                          const TaggerOptions& opts) {
  Candidate best;
  for (const Lexicon& lex : lexicons) {
    auto it = lex.entries.find(folded);
    if (it == lex.entries.end()) continue;
    Candidate c{it->second, lex.language};
    if (better(c, best, opts.priority)) best = c;
  }
  if (best.weight >= 0.0) return LanguageTag::language(best.language);
  if (!opts.edit_distance_one) return std::nullopt;
  for (const Lexicon& lex : lexicons) {
    for (const auto& [surface, weight] : lex.entries) {
      if (!within_one_edit(folded, surface)) continue;
      Candidate c{weight, lex.language};
      if (better(c, best, opts.priority)) best = c;
    }
  }
  if (best.weight >= 0.0) return LanguageTag::language(best.language);
  return std::nullopt;
}

}  // namespace

TaggedUtterance tag_tokens(const std::vector<std::string>& tokens,
                           const std::vector<Lexicon>& lexicons, const TagRuleSet& rules,
                           const TaggerOptions& opts, std::string id) {
  if (tokens.empty()) throw std::invalid_argument("cannot tag an empty token sequence");
  if (lexicons.empty()) throw std::invalid_argument("at least one lexicon is required");
  TaggedUtterance utterance;
  utterance.id = std::move(id);
  utterance.tokens.reserve(tokens.size());
  for (const std::string& surface : tokens) {
    LanguageTag tag = opts.fallback;
    if (auto rule_tag = rules.match(surface)) {
      tag = *rule_tag;
    } else if (auto lex_tag = lexicon_lookup(fold_case(surface), lexicons, opts)) {
      tag = *lex_tag;
    }
    utterance.tokens.push_back(Token{surface, tag});
  }
  return utterance;
}

namespace {

void check_sequences(const std::vector<std::string>& tokens, const TagSequences& sequences) {
  if (sequences.empty()) throw std::invalid_argument("no tag sequences given");
  for (const auto& [name, tags] : sequences) {
    if (tags.size() != tokens.size())
      throw std::invalid_argument("tag source '" + name + "' has " +
                                  std::to_string(tags.size()) + " tags for " +
                                  std::to_string(tokens.size()) + " tokens");
  }
  for (std::size_t i = 0; i < sequences.size(); ++i)
    for (std::size_t j = i + 1; j < sequences.size(); ++j)
      if (sequences[i].first == sequences[j].first)
        throw std::invalid_argument("duplicate tag source '" + sequences[i].first + "'");
}

}  // namespace

AgreementMatrix compare_taggers(const std::vector<std::string>& tokens,
                                const TagSequences& sequences,
                                const std::optional<std::string>& gold) {
  check_sequences(tokens, sequences);
  AgreementMatrix m;
  for (const auto& [name, tags] : sequences) {
    m.sources.push_back(name);
    m.tags.push_back(tags);
  }
  const std::size_t k = m.sources.size();
  const std::size_t n = tokens.size();
  m.agreement.assign(k, std::vector<double>(k, 1.0));
  m.agreement_language_bearing.assign(k, std::vector<double>(k, 1.0));
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      std::size_t equal = 0, lb_positions = 0, lb_equal = 0;
      for (std::size_t t = 0; t < n; ++t) {
        const bool same = m.tags[a][t] == m.tags[b][t];
        if (same) ++equal;
        if (m.tags[a][t].is_language() || m.tags[b][t].is_language()) {
          ++lb_positions;
          if (same) ++lb_equal;
        }
      }
      const double all = n == 0 ? 1.0 : static_cast<double>(equal) / static_cast<double>(n);
      const double lb = lb_positions == 0
                            ? 1.0
                            : static_cast<double>(lb_equal) / static_cast<double>(lb_positions);
      m.agreement[a][b] = m.agreement[b][a] = all;
      m.agreement_language_bearing[a][b] = m.agreement_language_bearing[b][a] = lb;
    }
  }
  if (gold) {
    const auto it = std::find(m.sources.begin(), m.sources.end(), *gold);
    if (it == m.sources.end())
      throw std::invalid_argument("gold source '" + *gold + "' is not among the tag sources");
    const std::size_t g = static_cast<std::size_t>(it - m.sources.begin());
    m.gold = *gold;
    for (std::size_t a = 0; a < k; ++a) m.accuracy_vs_gold[m.sources[a]] = m.agreement[a][g];
  }
  return m;
}

std::vector<std::pair<std::string, MetricReport>> metric_divergence(
    const std::vector<std::string>& tokens, const TagSequences& sequences,
    const MetricConfig& cfg) {
  check_sequences(tokens, sequences);
  validate(cfg);
  std::vector<std::pair<std::string, MetricReport>> table;
  table.reserve(sequences.size());
  for (const auto& [name, tags] : sequences) {
    TaggedUtterance utterance;
    utterance.id = name;
    utterance.tokens.reserve(tokens.size());
    for (std::size_t t = 0; t < tokens.size(); ++t)
      utterance.tokens.push_back(Token{tokens[t], tags[t]});
    table.emplace_back(name, metric_report(utterance, cfg));
  }
  return table;
}

nlohmann::ordered_json to_json(const AgreementMatrix& m) {
  nlohmann::ordered_json j;
  j["sources"] = m.sources;
  nlohmann::ordered_json tags = nlohmann::ordered_json::array();
  for (const auto& row : m.tags) {
    nlohmann::ordered_json r = nlohmann::ordered_json::array();
    for (const LanguageTag& t : row) r.push_back(to_string(t));
    tags.push_back(std::move(r));
  }
  j["tags"] = std::move(tags);
  j["agreement"] = m.agreement;
  j["agreement_language_bearing"] = m.agreement_language_bearing;
  if (m.gold) {
    j["gold"] = *m.gold;
    j["accuracy_vs_gold"] = m.accuracy_vs_gold;
  }
  return j;
}

}  // namespace cmix
