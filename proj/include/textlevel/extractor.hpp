#ifndef TEXTLEVEL_EXTRACTOR_HPP_
#define TEXTLEVEL_EXTRACTOR_HPP_

#include <set>
#include <string>
#include <vector>

#include "textlevel/corpus.hpp"
#include "textlevel/templates.hpp"

namespace textlevel {

// One template match observed while walking the tree. The span is given
// in sentence-absolute token indices (tokens numbered across chunks in
// surface order). When a node's phrase skips intervening chunks the span
// covers the range from the first to the last matched token.
struct Occurrence {
  std::string template_id;
  Level level = Level::N5;
  int node_chunk = 0;  // the node whose phrase produced the match
  MatchSpan span;
};

struct ExtractionResult {
  int sentence_index = 0;
  std::set<std::string> identified;  // template ids found anywhere in the tree
  std::vector<Occurrence> occurrences;
};

// Tokens of `node` and of each of its immediate children (descendants of
// children excluded), concatenated in surface order.
std::vector<Token> phrase_of(const SentenceTree& tree, int node);

// Identified templates in the subtree rooted at `node`: a leaf yields the
// empty set; an inner node yields the union of its children's sets with
// every template matching the node's phrase.
std::set<std::string> extract_node(const SentenceTree& tree, int node,
                                   const TemplateLibrary& lib);

ExtractionResult extract_sentence(const SentenceTree& tree,
                                  const TemplateLibrary& lib,
                                  int sentence_index = 0);

std::vector<ExtractionResult> extract_document(const Document& doc,
                                               const TemplateLibrary& lib);

}  // namespace textlevel

#endif  // TEXTLEVEL_EXTRACTOR_HPP_
