// Shared test helpers: an independent brute-force matching oracle and
// randomized data generators. The oracle recurses over the element list
// directly and never touches the compiled matcher, so agreement between
// the two is meaningful.
#ifndef TEXTLEVEL_TESTS_TEST_UTIL_HPP_
#define TEXTLEVEL_TESTS_TEST_UTIL_HPP_

#include <algorithm>
#include <random>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "textlevel/corpus.hpp"
#include "textlevel/templates.hpp"

namespace testutil {

using namespace textlevel;

inline Token tok(std::string surface, std::string pos = "noun",
                 std::string detail = "", std::string infl = "",
                 std::string base = "", std::string reading = "") {
  Token t;
  t.surface = surface;
  t.base = base.empty() ? surface : base;
  t.pos = std::move(pos);
  t.pos_detail = std::move(detail);
  t.inflection_form = std::move(infl);
  t.reading = std::move(reading);
  return t;
}

// ---------------------------------------------------------------------
// Brute-force matching oracle.

inline bool oracle_token_match(const Element& e, const Token& t) {
  switch (e.kind) {
    case ElementKind::kLiteral:
      return t.surface == e.surface;
    case ElementKind::kLemma:
      return t.base == e.base;
    case ElementKind::kSlot: {
      auto in = [](const std::vector<std::string>& set, const std::string& v) {
        return set.empty() ||
               std::find(set.begin(), set.end(), v) != set.end();
      };
      if (!in(e.pos_any, t.pos)) return false;
      if (!in(e.pos_detail_any, t.pos_detail)) return false;
      if (!in(e.inflection_any, t.inflection_form)) return false;
      if (e.surface_pattern &&
          !std::regex_match(t.surface, std::regex(*e.surface_pattern)))
        return false;
      return true;
    }
    case ElementKind::kGap:
      return false;  // handled by the recursion
  }
  return false;
}

// Do elements [ei..] consume tokens [pos..end) exactly?
inline bool oracle_cover(const std::vector<Element>& elements, size_t ei,
                         const std::vector<Token>& tokens, size_t pos,
                         size_t end) {
  if (ei == elements.size()) return pos == end;
  const Element& e = elements[ei];
  if (e.kind == ElementKind::kGap) {
    for (int w = e.gap_min; w <= e.gap_max; ++w) {
      if (pos + static_cast<size_t>(w) > end) break;
      if (oracle_cover(elements, ei + 1, tokens, pos + w, end)) return true;
    }
    return false;
  }
  if (pos >= end || !oracle_token_match(e, tokens[pos])) return false;
  return oracle_cover(elements, ei + 1, tokens, pos + 1, end);
}

// Every subspan is tested; per start only the shortest covered span is
// kept, matching the published semantics.
inline std::vector<MatchSpan> oracle_match(const TemplateSpec& spec,
                                           const std::vector<Token>& phrase) {
  std::vector<MatchSpan> spans;
  const size_t n = phrase.size();
  for (size_t s = 0; s < n; ++s) {
    for (size_t e = s + 1; e <= n; ++e) {
      if (oracle_cover(spec.elements, 0, phrase, s, e)) {
        spans.push_back({static_cast<int>(s), static_cast<int>(e)});
        break;
      }
    }
  }
  return spans;
}

// Independent re-derivation of the extraction set: enumerate every node
// with children, rebuild its phrase from scratch, brute-force match.
inline std::set<std::string> oracle_extract(
    const SentenceTree& tree, const std::vector<TemplateSpec>& specs) {
  std::set<std::string> out;
  const int n = static_cast<int>(tree.chunks.size());
  for (int node = 0; node < n; ++node) {
    std::vector<int> members;
    for (int c = 0; c < n; ++c)
      if (tree.chunks[c].head_chunk == node) members.push_back(c);
    if (members.empty()) continue;
    members.push_back(node);
    std::sort(members.begin(), members.end());
    std::vector<Token> phrase;
    for (int c : members)
      for (const Token& t : tree.chunks[c].tokens) phrase.push_back(t);
    for (const TemplateSpec& spec : specs)
      if (!oracle_match(spec, phrase).empty()) out.insert(spec.template_id);
  }
  return out;
}

// ---------------------------------------------------------------------
// Random data generators (small closed vocabularies so matches happen).

inline const std::vector<std::string>& surface_pool() {
  static const std::vector<std::string> pool = {"a", "b", "c", "d",
                                                "ha", "no", "wo", "ni"};
  return pool;
}

inline Token random_token(std::mt19937_64& gen) {
  static const std::vector<std::string> pos_pool = {"noun", "verb", "particle",
                                                    "adverb"};
  static const std::vector<std::string> detail_pool = {"", "pronoun", "common"};
  static const std::vector<std::string> infl_pool = {"", "base", "i-form"};
  Token t;
  t.surface = surface_pool()[gen() % surface_pool().size()];
  t.base = surface_pool()[gen() % surface_pool().size()];
  t.pos = pos_pool[gen() % pos_pool.size()];
  t.pos_detail = detail_pool[gen() % detail_pool.size()];
  t.inflection_form = infl_pool[gen() % infl_pool.size()];
  t.reading = "r" + std::to_string(gen() % 4);
  return t;
}

inline Element random_element(std::mt19937_64& gen, bool allow_gap) {
  switch (gen() % (allow_gap ? 4 : 3)) {
    case 0:
      return Element::literal(surface_pool()[gen() % surface_pool().size()]);
    case 1:
      return Element::lemma(surface_pool()[gen() % surface_pool().size()]);
    case 2: {
      std::vector<std::string> pos;
      std::vector<std::string> infl;
      if (gen() % 2) pos.push_back(gen() % 2 ? "noun" : "verb");
      if (gen() % 3 == 0) infl.push_back(gen() % 2 ? "base" : "i-form");
      if (pos.empty() && infl.empty()) pos.push_back("particle");
      return Element::slot(pos, {}, infl);
    }
    default: {
      const int lo = static_cast<int>(gen() % 2);
      return Element::gap(lo, lo + static_cast<int>(gen() % 2));
    }
  }
}

inline TemplateSpec random_template(std::mt19937_64& gen,
                                    const std::string& id,
                                    int max_elements = 4) {
  TemplateSpec spec;
  spec.template_id = id;
  spec.level = kLevelsEasyFirst[gen() % kLevelCount];
  const int n = 1 + static_cast<int>(gen() % max_elements);
  bool prev_gap = false;  // leading gaps are legal, adjacent ones are not
  for (int i = 0; i < n; ++i) {
    Element e = random_element(gen, !prev_gap);
    prev_gap = e.kind == ElementKind::kGap;
    spec.elements.push_back(std::move(e));
  }
  if (std::all_of(spec.elements.begin(), spec.elements.end(),
                  [](const Element& e) { return e.kind == ElementKind::kGap; }))
    spec.elements.push_back(Element::literal("a"));
  return spec;
}

inline SentenceTree random_tree(std::mt19937_64& gen, int max_chunks = 10,
                                int max_tokens_per_chunk = 3) {
  SentenceTree tree;
  const int n = 1 + static_cast<int>(gen() % max_chunks);
  const bool japanese_style = gen() % 2 == 0;  // heads point right vs left
  for (int i = 0; i < n; ++i) {
    Chunk c;
    c.id = i;
    if (japanese_style)
      c.head_chunk = i == n - 1 ? -1 : i + 1 + static_cast<int>(gen() % (n - 1 - i));
    else
      c.head_chunk = i == 0 ? -1 : static_cast<int>(gen() % i);
    const int tokens = 1 + static_cast<int>(gen() % max_tokens_per_chunk);
    for (int t = 0; t < tokens; ++t) c.tokens.push_back(random_token(gen));
    tree.chunks.push_back(std::move(c));
  }
  return tree;
}

inline std::vector<TemplateSpec> random_specs(std::mt19937_64& gen,
                                              int max_templates = 20,
                                              int max_elements = 4) {
  std::vector<TemplateSpec> specs;
  const int n = 1 + static_cast<int>(gen() % max_templates);
  for (int i = 0; i < n; ++i)
    specs.push_back(random_template(gen, "t" + std::to_string(i), max_elements));
  return specs;
}

inline TemplateLibrary library_of(const std::vector<TemplateSpec>& specs) {
  TemplateLibrary lib;
  for (const TemplateSpec& spec : specs) lib.add(spec);
  return lib;
}

inline Document random_document(std::mt19937_64& gen, const std::string& id,
                                int max_sentences = 5) {
  Document doc;
  doc.doc_id = id;
  doc.level = kLevelsEasyFirst[gen() % kLevelCount];
  doc.source = "synthetic";
  const int n = 1 + static_cast<int>(gen() % max_sentences);
  for (int i = 0; i < n; ++i) doc.sentences.push_back(random_tree(gen, 6));
  return doc;
}

inline Corpus random_corpus(std::mt19937_64& gen, int max_docs = 8) {
  Corpus corpus;
  const int n = 1 + static_cast<int>(gen() % max_docs);
  for (int i = 0; i < n; ++i)
    corpus.documents.push_back(random_document(gen, "doc" + std::to_string(i)));
  return corpus;
}

}  // namespace testutil

#endif  // TEXTLEVEL_TESTS_TEST_UTIL_HPP_
