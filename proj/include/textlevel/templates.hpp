#ifndef TEXTLEVEL_TEMPLATES_HPP_
#define TEXTLEVEL_TEMPLATES_HPP_

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "textlevel/corpus.hpp"
#include "textlevel/level.hpp"

namespace textlevel {

class TemplateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ElementKind { kLiteral, kLemma, kSlot, kGap };

// One element of a template pattern. Exactly one interpretation is active,
// selected by `kind`:
//   kLiteral  matches one token whose surface equals `surface`
//   kLemma    matches one token whose base equals `base`
//   kSlot     matches one token subject to the non-empty constraint sets
//             and, when given, a full match of `surface_pattern` against
//             the token surface
//   kGap      consumes between gap_min and gap_max arbitrary tokens
struct Element {
  ElementKind kind = ElementKind::kLiteral;
  std::string surface;
  std::string base;
  std::vector<std::string> pos_any;          // sorted, unique
  std::vector<std::string> pos_detail_any;   // sorted, unique
  std::vector<std::string> inflection_any;   // sorted, unique
  std::optional<std::string> surface_pattern;
  int gap_min = 0;
  int gap_max = 0;

  static Element literal(std::string s);
  static Element lemma(std::string b);
  static Element slot(std::vector<std::string> pos,
                      std::vector<std::string> pos_detail = {},
                      std::vector<std::string> inflection = {},
                      std::optional<std::string> pattern = std::nullopt);
  static Element gap(int min_tokens, int max_tokens);

  bool operator==(const Element&) const = default;
};

struct TemplateSpec {
  std::string template_id;
  Level level = Level::N5;
  std::vector<Element> elements;
  std::string gloss;

  bool operator==(const TemplateSpec&) const = default;
};

// Half-open token index range.
struct MatchSpan {
  int start = 0;
  int end = 0;

  bool operator==(const MatchSpan&) const = default;
  auto operator<=>(const MatchSpan&) const = default;
};

// A template compiled for matching against annotated token sequences.
// Compilation is deterministic: equal specs behave identically.
class CompiledTemplate {
 public:
  const std::string& id() const { return id_; }
  Level level() const { return level_; }

  // All spans where the element sequence matches contiguously. Spans are
  // reported in ascending start order; per start position only the
  // shortest match is kept.
  std::vector<MatchSpan> match(std::span<const Token> phrase) const;

 private:
  friend CompiledTemplate compile(const TemplateSpec& spec);

  struct TokenStep {
    std::optional<std::string> surface_eq;
    std::optional<std::string> base_eq;
    std::vector<std::string> pos_any;
    std::vector<std::string> pos_detail_any;
    std::vector<std::string> inflection_any;
    std::shared_ptr<const std::regex> surface_re;

    bool matches(const Token& t) const;
  };
  struct GapStep {
    int min = 0;
    int max = 0;
  };
  using Step = std::variant<TokenStep, GapStep>;

  std::string id_;
  Level level_ = Level::N5;
  std::vector<Step> steps_;
};

// Validates the spec invariants and builds the matcher. Throws
// TemplateError on invalid elements or a bad embedded pattern.
CompiledTemplate compile(const TemplateSpec& spec);

std::vector<MatchSpan> match_phrase(const CompiledTemplate& t,
                                    std::span<const Token> phrase);

struct LibraryEntry {
  TemplateSpec spec;
  CompiledTemplate compiled;
};

// A leveled set of compiled templates with globally unique ids. Every
// level is always representable (possibly with an empty list).
class TemplateLibrary {
 public:
  void add(const TemplateSpec& spec);  // throws on duplicate id

  const std::vector<LibraryEntry>& entries() const { return entries_; }
  const LibraryEntry* find(const std::string& template_id) const;
  std::vector<const LibraryEntry*> at_level(Level l) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<LibraryEntry> entries_;
  std::unordered_map<std::string, int> by_id_;
};

// Library text format: one `template <id> <level>` ... `end` block per
// entry; see README for the element line syntax. save_library emits the
// canonical form; loading and re-saving a canonical file is byte-identical.
TemplateLibrary load_library(std::istream& in);
void save_library(std::ostream& out, const TemplateLibrary& lib);

struct ConsensusResult {
  TemplateLibrary library;
  std::vector<std::string> excluded;  // ids with no two-source agreement
};

// Merges per-source template catalogs: a template enters the library at
// level L iff at least two sources assign it level L. Sources must agree
// on the element structure of a shared id.
ConsensusResult consensus_merge(
    const std::vector<std::map<std::string, TemplateSpec>>& sources);

}  // namespace textlevel

#endif  // TEXTLEVEL_TEMPLATES_HPP_
