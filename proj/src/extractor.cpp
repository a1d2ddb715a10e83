#include "textlevel/extractor.hpp"

#include <algorithm>

namespace textlevel {

namespace {

void require_chunk(const SentenceTree& tree, int node) {
  if (node < 0 || node >= static_cast<int>(tree.chunks.size()))
    throw InvariantError("unknown chunk id " + std::to_string(node));
}

// Chunk ids participating in the phrase of `node`, in surface order.
std::vector<int> phrase_chunks(const std::vector<std::vector<int>>& children,
                               int node) {
  std::vector<int> ids = children[node];
  ids.push_back(node);
  std::sort(ids.begin(), ids.end());
  return ids;
}

// Post-order listing of the subtree rooted at `node`, via an explicit
// stack so pathological trees cannot overflow the call stack.
std::vector<int> post_order(const std::vector<std::vector<int>>& children,
                            int node) {
  std::vector<int> order;
  std::vector<std::pair<int, bool>> stack{{node, false}};
  while (!stack.empty()) {
    auto [id, expanded] = stack.back();
    stack.pop_back();
    if (expanded) {
      order.push_back(id);
      continue;
    }
    stack.emplace_back(id, true);
    for (auto it = children[id].rbegin(); it != children[id].rend(); ++it)
      stack.emplace_back(*it, false);
  }
  return order;
}

}  // namespace

std::vector<Token> phrase_of(const SentenceTree& tree, int node) {
  require_chunk(tree, node);
  const auto children = tree.children();
  std::vector<Token> phrase;
  for (int id : phrase_chunks(children, node)) {
    const auto& tokens = tree.chunks[id].tokens;
    phrase.insert(phrase.end(), tokens.begin(), tokens.end());
  }
  return phrase;
}

std::set<std::string> extract_node(const SentenceTree& tree, int node,
                                   const TemplateLibrary& lib) {
  require_chunk(tree, node);
  const auto children = tree.children();
  std::set<std::string> identified;
  for (int id : post_order(children, node)) {
    if (children[id].empty()) continue;  // leaf contributes nothing
    std::vector<Token> phrase;
    for (int cid : phrase_chunks(children, id)) {
      const auto& tokens = tree.chunks[cid].tokens;
      phrase.insert(phrase.end(), tokens.begin(), tokens.end());
    }
    for (const LibraryEntry& entry : lib.entries())
      if (!entry.compiled.match(phrase).empty())
        identified.insert(entry.spec.template_id);
  }
  return identified;
}

ExtractionResult extract_sentence(const SentenceTree& tree,
                                  const TemplateLibrary& lib,
                                  int sentence_index) {
  ExtractionResult result;
  result.sentence_index = sentence_index;

  const auto children = tree.children();
  const int root = tree.root();
  if (root < 0) throw InvariantError("no root chunk");

  // Absolute index of each chunk's first token.
  std::vector<int> offset(tree.chunks.size(), 0);
  for (size_t i = 1; i < tree.chunks.size(); ++i)
    offset[i] = offset[i - 1] + static_cast<int>(tree.chunks[i - 1].tokens.size());

  for (int id : post_order(children, root)) {
    if (children[id].empty()) continue;
    std::vector<Token> phrase;
    std::vector<int> abs_index;  // phrase position -> sentence token index
    for (int cid : phrase_chunks(children, id)) {
      const auto& tokens = tree.chunks[cid].tokens;
      for (size_t t = 0; t < tokens.size(); ++t) {
        phrase.push_back(tokens[t]);
        abs_index.push_back(offset[cid] + static_cast<int>(t));
      }
    }
    for (const LibraryEntry& entry : lib.entries()) {
      for (const MatchSpan& span : entry.compiled.match(phrase)) {
        result.occurrences.push_back(
            Occurrence{entry.spec.template_id, entry.spec.level, id,
                       MatchSpan{abs_index[span.start],
                                 abs_index[span.end - 1] + 1}});
        result.identified.insert(entry.spec.template_id);
      }
    }
  }
  return result;
}

std::vector<ExtractionResult> extract_document(const Document& doc,
                                               const TemplateLibrary& lib) {
  std::vector<ExtractionResult> results;
  results.reserve(doc.sentences.size());
  for (size_t i = 0; i < doc.sentences.size(); ++i)
    results.push_back(
        extract_sentence(doc.sentences[i], lib, static_cast<int>(i)));
  return results;
}

}  // namespace textlevel
