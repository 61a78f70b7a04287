#include "reldet/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "reldet/errors.hpp"
#include "reldet/util.hpp"

namespace reldet {

using nlohmann::json;

const KeywordPattern* KeywordSpec::find(const std::string& canonical) const {
  for (const auto& e : entries)
    if (e.name == canonical) return &e;
  return nullptr;
}

std::vector<std::string> KeywordSpec::names() const {
  std::vector<std::string> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.name);
  return out;
}

std::uint64_t KeywordSpec::fingerprint() const {
  Fnv64 h;
  h.u64(entries.size());
  for (const auto& e : entries) {
    h.str(e.name);
    h.u64(static_cast<std::uint64_t>(e.kind));
    h.str(e.group);
  }
  return h.value();
}

std::vector<Document> parse_corpus(std::istream& in) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("corpus line " + std::to_string(lineno) +
                      ": invalid record: " + e.what());
    }
    if (!rec.is_object() || !rec.contains("id") || !rec["id"].is_string() ||
        !rec.contains("title") || !rec["title"].is_string() ||
        !rec.contains("body") || !rec["body"].is_string())
      throw DataError("corpus line " + std::to_string(lineno) +
                      ": record needs string fields id/title/body");
    Document d;
    d.id = rec["id"].get<std::string>();
    d.title = rec["title"].get<std::string>();
    d.body = rec["body"].get<std::string>();
    if (d.id.empty())
      throw DataError("corpus line " + std::to_string(lineno) + ": empty id");
    if (rec.contains("label") && !rec["label"].is_null()) {
      if (!rec["label"].is_number_integer())
        throw DataError("corpus line " + std::to_string(lineno) +
                        ": label must be 0 or 1");
      int v = rec["label"].get<int>();
      if (v != 0 && v != 1)
        throw DataError("corpus line " + std::to_string(lineno) +
                        ": label must be 0 or 1");
      d.label = v;
    }
    if (!seen.insert(d.id).second)
      throw DataError("corpus line " + std::to_string(lineno) +
                      ": duplicate id \"" + d.id + "\"");
    docs.push_back(std::move(d));
  }
  return docs;
}

void write_corpus(std::ostream& out, const std::vector<Document>& docs) {
  for (const auto& d : docs) {
    json rec{{"id", d.id}, {"title", d.title}, {"body", d.body}};
    if (d.label) rec["label"] = *d.label;
    out << rec.dump() << "\n";
  }
}

namespace {

bool is_word_byte(unsigned char c) {
  if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
      (c >= '0' && c <= '9'))
    return true;
  return c >= 0x80;  // keep non-ASCII bytes (OCR noise, accented letters)
}

// The pound sign in UTF-8.
constexpr unsigned char kPound0 = 0xC2, kPound1 = 0xA3;

bool word_starts_at(const std::string& s, std::size_t i) {
  if (i >= s.size()) return false;
  unsigned char c = s[i];
  if (!is_word_byte(c)) return false;
  // '£' is a standalone currency token, never the tail of a word.
  if (c == kPound0 && i + 1 < s.size() &&
      static_cast<unsigned char>(s[i + 1]) == kPound1)
    return false;
  return true;
}

void tokenize_into(const std::string& text, std::vector<std::string>& out) {
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  };
  std::size_t i = 0;
  while (i < text.size()) {
    unsigned char c = text[i];
    if (c == '$') {
      flush();
      out.emplace_back("$");
      ++i;
    } else if (c == kPound0 && i + 1 < text.size() &&
               static_cast<unsigned char>(text[i + 1]) == kPound1) {
      flush();
      out.emplace_back("\xC2\xA3");
      i += 2;
    } else if (c == '/' && i + 1 < text.size() && text[i + 1] == '-') {
      // "/-" shilling mark
      flush();
      out.emplace_back("/-");
      i += 2;
    } else if (is_word_byte(c) &&
               !(c == kPound0 && i + 1 < text.size() &&
                 static_cast<unsigned char>(text[i + 1]) == kPound1)) {
      if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
      cur.push_back(static_cast<char>(c));
      ++i;
    } else if ((c == '-' || c == '\'') && !cur.empty() &&
               word_starts_at(text, i + 1)) {
      // intra-word hyphen/apostrophe
      cur.push_back(static_cast<char>(c));
      ++i;
    } else {
      flush();
      ++i;
    }
  }
  flush();
}

}  // namespace

TokenSeq tokenize(const std::string& title, const std::string& body) {
  TokenSeq seq;
  tokenize_into(title, seq.tokens);
  tokenize_into(body, seq.tokens);
  return seq;
}

namespace {

// Strips decoration Table-1-style lists carry: surrounding brackets or
// parentheses and a trailing period.
std::string clean_pattern(std::string p) {
  p = trim(p);
  while (!p.empty() && (p.front() == '[' || p.front() == '(')) p.erase(0, 1);
  while (!p.empty() && (p.back() == ']' || p.back() == ')')) p.pop_back();
  while (!p.empty() && p.back() == '.') p.pop_back();
  return trim(p);
}

std::vector<std::string> split_patterns(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',' || c == ';') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

KeywordSpec parse_keyword_spec(std::istream& in) {
  KeywordSpec spec;
  std::unordered_set<std::string> seen;
  std::string group;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']' &&
        line.find(',') == std::string::npos) {
      group = trim(line.substr(1, line.size() - 2));
      if (group.empty())
        throw DataError("keyword spec line " + std::to_string(lineno) +
                        ": empty group name");
      continue;
    }
    for (const std::string& raw : split_patterns(line)) {
      std::string p = to_lower_ascii(clean_pattern(raw));
      if (p.empty()) continue;
      if (group.empty())
        throw DataError("keyword spec line " + std::to_string(lineno) +
                        ": pattern \"" + p + "\" appears before any [group]");
      KeywordPattern kp;
      kp.group = group;
      if (p.find_first_of(" \t") != std::string::npos) {
        kp.kind = PatternKind::Phrase;
        for (const std::string& t : split(p, ' '))
          if (!trim(t).empty()) kp.phrase.push_back(trim(t));
        std::string joined;
        for (std::size_t i = 0; i < kp.phrase.size(); ++i)
          joined += (i ? " " : "") + kp.phrase[i];
        kp.name = joined;
      } else if (p.size() > 1 && p.back() == '*') {
        kp.kind = PatternKind::Prefix;
        kp.stem = p.substr(0, p.size() - 1);
        kp.name = p;
      } else {
        kp.kind = PatternKind::Exact;
        kp.name = p;
      }
      if (!seen.insert(kp.name).second)
        throw DataError("keyword spec line " + std::to_string(lineno) +
                        ": duplicate keyword \"" + kp.name + "\"");
      spec.entries.push_back(std::move(kp));
    }
  }
  if (spec.entries.empty()) throw DataError("keyword spec has no patterns");
  return spec;
}

namespace {

// Number of tokens the pattern consumes at position i, or 0 for no match.
// Every pattern also matches its own canonical name so that a second pass
// over already-rewritten tokens reproduces the same result.
std::size_t match_len(const KeywordPattern& e,
                      const std::vector<std::string>& tokens, std::size_t i) {
  const std::string& tok = tokens[i];
  switch (e.kind) {
    case PatternKind::Exact:
      return tok == e.name ? 1 : 0;
    case PatternKind::Prefix:
      return tok.size() >= e.stem.size() &&
                     tok.compare(0, e.stem.size(), e.stem) == 0
                 ? 1
                 : 0;
    case PatternKind::Phrase: {
      if (tok == e.name) return 1;  // already collapsed
      if (i + e.phrase.size() > tokens.size()) return 0;
      for (std::size_t k = 0; k < e.phrase.size(); ++k)
        if (tokens[i + k] != e.phrase[k]) return 0;
      return e.phrase.size();
    }
  }
  return 0;
}

}  // namespace

TokenSeq match_keywords(const TokenSeq& seq, const KeywordSpec& spec) {
  TokenSeq out;
  out.tokens.reserve(seq.tokens.size());
  std::size_t i = 0;
  while (i < seq.tokens.size()) {
    const KeywordPattern* best = nullptr;
    std::size_t best_len = 0;
    for (const auto& e : spec.entries) {
      std::size_t len = match_len(e, seq.tokens, i);
      if (len > best_len) {  // strict: earlier entry wins ties
        best_len = len;
        best = &e;
      }
    }
    if (best) {
      out.tokens.push_back(best->name);
      out.keyword_occurrences[best->name].push_back(out.tokens.size() - 1);
      i += best_len;
    } else {
      out.tokens.push_back(seq.tokens[i]);
      ++i;
    }
  }
  return out;
}

std::pair<std::vector<Document>, std::vector<Document>> split_dataset(
    const std::vector<Document>& docs, const SplitConfig& cfg) {
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction <= 1.0))
    throw ConfigError("train_fraction must be in (0, 1]");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!docs[i].label)
      throw DataError("split_dataset: document \"" + docs[i].id +
                      "\" is unlabeled");
    (*docs[i].label == 1 ? pos : neg).push_back(i);
  }
  std::mt19937_64 rng(cfg.seed);
  std::vector<bool> in_train(docs.size(), false);
  for (auto* cls : {&pos, &neg}) {
    std::shuffle(cls->begin(), cls->end(), rng);
    auto n_train = static_cast<std::size_t>(
        std::llround(cfg.train_fraction * static_cast<double>(cls->size())));
    n_train = std::min(n_train, cls->size());
    for (std::size_t k = 0; k < n_train; ++k) in_train[(*cls)[k]] = true;
  }
  std::vector<Document> train, test;
  for (std::size_t i = 0; i < docs.size(); ++i)
    (in_train[i] ? train : test).push_back(docs[i]);
  return {std::move(train), std::move(test)};
}

bool synth_rule_holds(const TokenSeq& canonical, const KeywordSpec& spec,
                      const SynthConfig& cfg) {
  switch (cfg.rule) {
    case SynthRule::Proximity: {
      // Some window of rule_window consecutive tokens holds >= 2 distinct
      // keywords, i.e. two occurrences of different keywords at positional
      // distance <= rule_window - 1.
      std::vector<std::pair<std::size_t, const std::string*>> occ;
      for (const auto& [name, positions] : canonical.keyword_occurrences)
        for (std::size_t p : positions) occ.emplace_back(p, &name);
      std::sort(occ.begin(), occ.end());
      for (std::size_t a = 0; a < occ.size(); ++a)
        for (std::size_t b = a + 1; b < occ.size(); ++b) {
          if (occ[b].first - occ[a].first > cfg.rule_window - 1) break;
          if (*occ[a].second != *occ[b].second) return true;
        }
      return false;
    }
    case SynthRule::CrossGroup: {
      std::set<std::string> groups;
      for (const auto& [name, positions] : canonical.keyword_occurrences) {
        if (positions.empty()) continue;
        const KeywordPattern* e = spec.find(name);
        if (e) groups.insert(e->group);
      }
      return groups.size() >= 2;
    }
    case SynthRule::Frequency: {
      for (const auto& [name, positions] : canonical.keyword_occurrences)
        if (positions.size() >= cfg.freq_threshold) return true;
      return false;
    }
  }
  return false;
}

namespace {

// Surface tokens that canonicalize back to the pattern.
std::vector<std::string> surface_form(const KeywordPattern& e) {
  switch (e.kind) {
    case PatternKind::Exact:
      return {e.name};
    case PatternKind::Prefix:
      return {e.stem};
    case PatternKind::Phrase:
      return e.phrase;
  }
  return {e.name};
}

struct SynthWriter {
  const SynthConfig& cfg;
  const KeywordSpec& spec;
  std::vector<std::string> background;
  std::mt19937_64 rng;

  explicit SynthWriter(const SynthConfig& c, const KeywordSpec& s)
      : cfg(c), spec(s), rng(c.seed) {
    for (std::size_t i = 0; background.size() < cfg.vocab_size; ++i) {
      char buf[24];
      std::snprintf(buf, sizeof buf, "w%05zu", i);
      TokenSeq probe;
      probe.tokens = {buf};
      // keep the background free of accidental keyword matches
      bool clash = false;
      for (const auto& e : spec.entries)
        if (match_len(e, probe.tokens, 0) > 0) clash = true;
      if (!clash) background.emplace_back(buf);
    }
  }

  std::size_t rand_index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  }

  std::vector<std::size_t> pick_distinct_entries(std::size_t k) {
    std::vector<std::size_t> all(spec.entries.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(std::min(k, all.size()));
    return all;
  }

  // Overwrites tokens[at..] with the surface form; returns tokens consumed.
  std::size_t inject(std::vector<std::string>& tokens, std::size_t at,
                     const KeywordPattern& e) {
    auto sf = surface_form(e);
    for (std::size_t k = 0; k < sf.size() && at + k < tokens.size(); ++k)
      tokens[at + k] = sf[k];
    return sf.size();
  }

  std::vector<std::string> draw_background(std::size_t len) {
    std::vector<std::string> tokens(len);
    for (auto& t : tokens) t = background[rand_index(background.size())];
    return tokens;
  }

  // Places entries side by side so the canonicalized occurrences land
  // within one rule window.
  void place_cluster(std::vector<std::string>& tokens,
                     const std::vector<std::size_t>& entries) {
    std::size_t span = 0;
    for (std::size_t idx : entries)
      span += surface_form(spec.entries[idx]).size();
    std::size_t start =
        span >= tokens.size() ? 0 : rand_index(tokens.size() - span + 1);
    for (std::size_t idx : entries)
      start += inject(tokens, start, spec.entries[idx]);
  }

  // Places entries pairwise far apart (gap in canonical positions stays
  // >= rule_window even after phrase collapse elsewhere).
  void place_spread(std::vector<std::string>& tokens,
                    const std::vector<std::size_t>& entries) {
    std::size_t phrase_slack = 0;
    for (const auto& e : spec.entries)
      if (e.kind == PatternKind::Phrase) phrase_slack += e.phrase.size();
    std::size_t gap = cfg.rule_window + phrase_slack + 4;
    std::size_t at = rand_index(std::max<std::size_t>(gap / 2, 1));
    for (std::size_t idx : entries) {
      if (at >= tokens.size()) break;
      at += inject(tokens, at, spec.entries[idx]);
      at += gap;
    }
  }

  std::vector<std::string> construct(int intended) {
    std::size_t len =
        cfg.len_min + rand_index(cfg.len_max - cfg.len_min + 1);
    auto tokens = draw_background(len);
    switch (cfg.rule) {
      case SynthRule::Proximity: {
        if (cfg.matched_counts) {
          auto pair = pick_distinct_entries(2);
          if (intended)
            place_cluster(tokens, pair);
          else
            place_spread(tokens, pair);
        } else if (intended) {
          place_cluster(tokens, pick_distinct_entries(2 + rand_index(2)));
        } else {
          std::size_t style = rand_index(4);
          if (style == 0) {
          } else if (style == 1) {
            place_spread(tokens, pick_distinct_entries(1));
          } else {
            place_spread(tokens, pick_distinct_entries(2 + rand_index(2)));
          }
        }
        break;
      }
      case SynthRule::CrossGroup: {
        std::map<std::string, std::vector<std::size_t>> by_group;
        for (std::size_t i = 0; i < spec.entries.size(); ++i)
          by_group[spec.entries[i].group].push_back(i);
        std::vector<std::string> groups;
        for (const auto& [g, v] : by_group) groups.push_back(g);
        if (intended) {
          std::shuffle(groups.begin(), groups.end(), rng);
          std::vector<std::size_t> chosen;
          for (std::size_t gi = 0; gi < 2 && gi < groups.size(); ++gi) {
            const auto& pool = by_group[groups[gi]];
            chosen.push_back(pool[rand_index(pool.size())]);
          }
          place_spread(tokens, chosen);
        } else if (rand_index(4) != 0) {
          const auto& pool = by_group[groups[rand_index(groups.size())]];
          std::vector<std::size_t> chosen;
          for (std::size_t k = 0; k < 1 + rand_index(3); ++k)
            chosen.push_back(pool[rand_index(pool.size())]);
          std::sort(chosen.begin(), chosen.end());
          chosen.erase(std::unique(chosen.begin(), chosen.end()),
                       chosen.end());
          place_spread(tokens, chosen);
        }
        break;
      }
      case SynthRule::Frequency: {
        if (intended) {
          std::size_t idx = rand_index(spec.entries.size());
          std::size_t copies = cfg.freq_threshold + rand_index(2);
          std::vector<std::size_t> repeated(copies, idx);
          place_spread(tokens, repeated);
        } else if (rand_index(3) != 0 && cfg.freq_threshold > 1) {
          std::size_t idx = rand_index(spec.entries.size());
          std::size_t copies = rand_index(cfg.freq_threshold);  // < t
          std::vector<std::size_t> repeated(copies, idx);
          place_spread(tokens, repeated);
        }
        break;
      }
    }
    return tokens;
  }
};

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string s;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    s += (i ? " " : "") + tokens[i];
  return s;
}

}  // namespace

std::vector<Document> generate_synthetic(const SynthConfig& cfg,
                                         const KeywordSpec& spec) {
  if (cfg.n_docs == 0) throw ConfigError("synthetic: n_docs must be >= 1");
  if (cfg.vocab_size < spec.entries.size())
    throw ConfigError("synthetic: vocab_size smaller than the keyword count");
  if (cfg.len_min < 10 || cfg.len_min > cfg.len_max)
    throw ConfigError("synthetic: need 10 <= len_min <= len_max");
  if (cfg.rule == SynthRule::Proximity && cfg.rule_window < 2)
    throw ConfigError("synthetic: proximity rule_window must be >= 2");
  if (cfg.rule == SynthRule::Frequency && cfg.freq_threshold < 1)
    throw ConfigError("synthetic: freq_threshold must be >= 1");
  if (cfg.rule == SynthRule::CrossGroup) {
    std::set<std::string> groups;
    for (const auto& e : spec.entries) groups.insert(e.group);
    if (groups.size() < 2)
      throw ConfigError("synthetic: cross-group rule needs >= 2 groups");
  }
  if (cfg.matched_counts && spec.entries.size() < 2)
    throw ConfigError("synthetic: matched_counts needs >= 2 keywords");

  SynthWriter writer(cfg, spec);
  if (writer.background.empty())
    throw ConfigError("synthetic: background vocabulary is empty");

  auto n_pos = static_cast<std::size_t>(
      std::llround(cfg.positive_fraction * static_cast<double>(cfg.n_docs)));
  std::vector<int> intended(cfg.n_docs, 0);
  for (std::size_t i = 0; i < n_pos && i < cfg.n_docs; ++i) intended[i] = 1;
  std::shuffle(intended.begin(), intended.end(), writer.rng);

  std::vector<Document> docs;
  docs.reserve(cfg.n_docs);
  std::size_t got_pos = 0;
  for (std::size_t i = 0; i < cfg.n_docs; ++i) {
    int label = -1;
    std::vector<std::string> tokens;
    for (int attempt = 0; attempt < 50; ++attempt) {
      tokens = writer.construct(intended[i]);
      TokenSeq canon = match_keywords(tokenize("", join_tokens(tokens)), spec);
      int actual = synth_rule_holds(canon, spec, cfg) ? 1 : 0;
      if (actual == intended[i]) {
        label = actual;
        break;
      }
    }
    if (label < 0)
      throw DataError("synthetic: could not realize the rule for doc " +
                      std::to_string(i) + "; configuration too constrained");
    got_pos += static_cast<std::size_t>(label);
    Document d;
    char buf[24];
    std::snprintf(buf, sizeof buf, "s%05zu", i);
    d.id = buf;
    d.body = join_tokens(tokens);
    d.label = label;
    docs.push_back(std::move(d));
  }
  double frac = static_cast<double>(got_pos) / static_cast<double>(cfg.n_docs);
  if (frac < cfg.positive_fraction - cfg.balance_tolerance ||
      frac > cfg.positive_fraction + cfg.balance_tolerance)
    throw DataError("synthetic: class balance " + fmt_double(frac) +
                    " outside tolerance");
  return docs;
}

}  // namespace reldet
