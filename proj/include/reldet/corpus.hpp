#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace reldet {

// One text unit (title + body) with an optional binary relevance label.
struct Document {
  std::string id;
  std::string title;
  std::string body;
  std::optional<int> label;  // 1 = relevant, 0 = non-relevant
};

// Token stream of a document plus the positions of canonicalized keywords.
struct TokenSeq {
  std::vector<std::string> tokens;
  // canonical keyword name -> positions in `tokens` (post-rewrite indices)
  std::map<std::string, std::vector<std::size_t>> keyword_occurrences;
};

enum class PatternKind { Exact, Prefix, Phrase };

struct KeywordPattern {
  std::string name;   // canonical name, e.g. "aborig*" or "torres strait"
  PatternKind kind = PatternKind::Exact;
  std::string stem;                  // prefix patterns: name without the '*'
  std::vector<std::string> phrase;   // phrase patterns: component tokens
  std::string group;
};

// Ordered expert keyword patterns; order defines the EIK row order.
struct KeywordSpec {
  std::vector<KeywordPattern> entries;

  const KeywordPattern* find(const std::string& canonical) const;
  std::vector<std::string> names() const;
  std::uint64_t fingerprint() const;
};

struct SplitConfig {
  double train_fraction = 0.9;  // in (0, 1]
  std::uint64_t seed = 0;
};

// Reads line-delimited JSON records {id, title, body, label?}.
std::vector<Document> parse_corpus(std::istream& in);
void write_corpus(std::ostream& out, const std::vector<Document>& docs);

// Lowercases and splits on punctuation, keeping intra-word hyphen/apostrophe,
// numbers, and the currency marks "$", "£" and "/-" as standalone tokens.
// Title tokens come first. The keyword map is left empty.
TokenSeq tokenize(const std::string& title, const std::string& body);

// Plain-text spec: "[Group]" headers, comma/semicolon-separated patterns,
// '#' comments. Trailing '*' = prefix wildcard, internal whitespace = phrase.
KeywordSpec parse_keyword_spec(std::istream& in);

// Rewrites matching tokens to their canonical names, collapsing phrase
// matches into one token. Longest match wins; earlier spec entry breaks
// ties. Fills keyword_occurrences with post-rewrite positions. Idempotent.
TokenSeq match_keywords(const TokenSeq& seq, const KeywordSpec& spec);

// Stratified split, deterministic per seed; class fractions within +-1 doc.
// Both halves keep corpus order. Every document must be labeled.
std::pair<std::vector<Document>, std::vector<Document>> split_dataset(
    const std::vector<Document>& docs, const SplitConfig& cfg);

enum class SynthRule { Proximity, CrossGroup, Frequency };

struct SynthConfig {
  std::size_t n_docs = 400;
  std::size_t vocab_size = 5000;  // background vocabulary size
  SynthRule rule = SynthRule::Proximity;
  std::uint64_t seed = 1;
  std::size_t rule_window = 5;     // proximity: >= 2 distinct keywords within w
  std::size_t freq_threshold = 3;  // frequency: any keyword count >= t
  double positive_fraction = 0.5;
  double balance_tolerance = 0.1;
  std::size_t len_min = 50;
  std::size_t len_max = 500;
  // When set, every document carries exactly two distinct keywords once
  // each, so only keyword placement separates the classes.
  bool matched_counts = false;
};

// True iff the configured rule holds on a canonicalized token stream.
bool synth_rule_holds(const TokenSeq& canonical, const KeywordSpec& spec,
                      const SynthConfig& cfg);

// Labeled corpus with keywords injected into background text; the label is
// computed by evaluating the rule on the emitted token stream.
std::vector<Document> generate_synthetic(const SynthConfig& cfg,
                                         const KeywordSpec& spec);

}  // namespace reldet
