#ifndef TEXTLEVEL_CORPUS_HPP_
#define TEXTLEVEL_CORPUS_HPP_

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "textlevel/level.hpp"

namespace textlevel {

// Malformed input text (reports a line number where possible).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structurally well-formed input that violates a data invariant.
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// U+001E / U+001F are reserved as token-field separators by the matcher
// serialization and may not appear in any token field.
inline constexpr char kRecordSeparator = '\x1e';
inline constexpr char kFieldSeparator = '\x1f';

struct Token {
  std::string surface;          // original text form, non-empty
  std::string base;             // dictionary (lemma) form
  std::string pos;              // coarse part of speech
  std::string pos_detail;       // fine POS subtype, may be empty
  std::string inflection_form;  // conjugation form label, may be empty
  std::string reading;          // pronunciation, may be empty

  bool operator==(const Token&) const = default;
};

// A bunsetsu chunk: the node unit of the dependency tree.
struct Chunk {
  int id = 0;          // index within the sentence, equals position
  int head_chunk = -1; // index of governing chunk, -1 for the root
  std::vector<Token> tokens;

  bool operator==(const Chunk&) const = default;
};

struct SentenceTree {
  std::vector<Chunk> chunks;  // surface order

  int root() const;  // id of the single chunk with head_chunk == -1
  std::vector<std::vector<int>> children() const;  // adjacency, index by id
  int token_count() const;

  bool operator==(const SentenceTree&) const = default;
};

struct Document {
  std::string doc_id;
  std::optional<Level> level;  // absent for unlabeled documents
  std::string source;          // exam / textbook / other
  std::vector<SentenceTree> sentences;

  bool operator==(const Document&) const = default;
};

struct Corpus {
  std::vector<Document> documents;

  bool operator==(const Corpus&) const = default;
};

// Empty result iff every SentenceTree invariant holds. Violations are data:
// each entry names the offending chunk and the broken rule.
std::vector<std::string> validate(const SentenceTree& tree);

// Line-delimited corpus format: one JSON document object per line (see
// README for the schema). Throws FormatError on malformed records and
// InvariantError on duplicate doc ids or tree violations.
Corpus load_corpus(std::istream& in);
void save_corpus(std::ostream& out, const Corpus& corpus);

// Same parse, but invariant violations are collected instead of thrown
// (malformed JSON still throws FormatError). Backs the `validate`
// subcommand so a report can cover more than the first problem.
Corpus load_corpus_permissive(std::istream& in,
                              std::vector<std::string>* violations);

// Supported external-parser output layouts.
enum class ParserDialect { kCabochaLattice };

// Converts analyzer output (chunk header lines "* id headD ...", token
// lines "surface<TAB>f0,f1,...", "EOS" terminators) into sentence trees.
// Column mapping for the CaboCha/MeCab lattice: pos=f0, pos_detail=f1,
// inflection_form=f5, base=f6 (surface when the analyzer leaves it blank),
// reading=f7.
std::vector<SentenceTree> convert_external(std::istream& in,
                                           ParserDialect dialect);

}  // namespace textlevel

#endif  // TEXTLEVEL_CORPUS_HPP_
