#include "textlevel/synth.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "textlevel/classifiers.hpp"
#include "textlevel/features.hpp"

namespace textlevel {

namespace {

constexpr int kTemplatesPerLevel = 8;

std::string marker_a(int i) { return "ga" + std::to_string(i); }
std::string marker_b(int i) { return "gb" + std::to_string(i); }

Token make_token(std::string surface, std::string pos,
                 std::string pos_detail = "", std::string inflection = "") {
  Token t;
  t.surface = surface;
  t.base = std::move(surface);
  t.pos = std::move(pos);
  t.pos_detail = std::move(pos_detail);
  t.inflection_form = std::move(inflection);
  return t;
}

}  // namespace

TemplateLibrary synthetic_library() {
  TemplateLibrary lib;
  for (Level l : kLevelsEasyFirst) {
    const int li = level_index(l);
    for (int t = 0; t < kTemplatesPerLevel; ++t) {
      TemplateSpec spec;
      spec.template_id = "T" + to_string(l) + "_" + std::to_string(t);
      spec.level = l;
      spec.gloss = "synthetic marker pair";
      // The a/b parts recur across levels; only the pairing is
      // level-specific, which keeps unigram statistics uninformative.
      spec.elements.push_back(
          Element::literal(marker_a(t)));
      spec.elements.push_back(
          Element::literal(marker_b((t + li) % kTemplatesPerLevel)));
      lib.add(spec);
    }
  }
  return lib;
}

SynthProfile load_profile(std::istream& in) {
  SynthProfile profile;
  profile.per100 = load_level_matrix_csv(in);
  return profile;
}

namespace {

struct SentenceSlot {
  int doc = 0;
  int sentence = 0;
};

// Draw an insertion point that does not split a previously inserted
// marker pair.
int safe_position(const std::vector<Token>& tokens, std::uint64_t draw) {
  const int len = static_cast<int>(tokens.size());
  int p = static_cast<int>(draw % static_cast<std::uint64_t>(len + 1));
  for (int tries = 0; tries <= len; ++tries) {
    const bool splits =
        p > 0 && p < len && tokens[p - 1].surface.rfind("ga", 0) == 0 &&
        tokens[p].surface.rfind("gb", 0) == 0;
    if (!splits) return p;
    p = (p + 1) % (len + 1);
  }
  return len;
}

}  // namespace

Corpus generate_synthetic(const SynthProfile& profile, int docs_per_level,
                          int sentences_per_doc, std::uint64_t seed) {
  if (docs_per_level < 1 || sentences_per_doc < 1)
    throw InvariantError("synthetic corpus needs at least one document and "
                         "one sentence per document");
  for (int tpl = 0; tpl < kLevelCount; ++tpl)
    for (int text = 0; text < kLevelCount; ++text) {
      const double v = profile.per100(tpl, text);
      if (v < 0)
        throw InvariantError("infeasible profile: negative target");
      if (v > 100.0 * kTemplatesPerLevel)
        throw InvariantError(
            "infeasible profile: more distinct templates per sentence than "
            "the synthetic library holds");
    }

  std::mt19937_64 gen(seed);
  const int total_sentences = docs_per_level * sentences_per_doc;
  Corpus corpus;

  for (Level text_level : kLevelsEasyFirst) {
    const int li = level_index(text_level);
    const int first_doc = static_cast<int>(corpus.documents.size());

    // Sentence skeletons: small right-branching trees of filler tokens.
    for (int d = 0; d < docs_per_level; ++d) {
      Document doc;
      char id[32];
      std::snprintf(id, sizeof(id), "synth_%s_%03d",
                    to_string(text_level).c_str(), d);
      doc.doc_id = id;
      doc.level = text_level;
      doc.source = "synthetic";
      for (int s = 0; s < sentences_per_doc; ++s) {
        SentenceTree tree;
        const int n_chunks =
            2 + static_cast<int>(gen() % (li >= 2 ? 3 : 2));
        for (int c = 0; c < n_chunks; ++c) {
          Chunk chunk;
          chunk.id = c;
          chunk.head_chunk =
              c == n_chunks - 1
                  ? -1
                  : c + 1 + static_cast<int>(gen() % (n_chunks - 1 - c));
          const int n_tokens = 1 + static_cast<int>(gen() % 3);
          for (int t = 0; t < n_tokens; ++t) {
            const int word = static_cast<int>((gen() % 160 + 20 * li) % 200);
            char surface[8];
            std::snprintf(surface, sizeof(surface), "w%03d", word);
            const std::uint64_t kind = gen() % 10;
            if (kind < 4)
              chunk.tokens.push_back(make_token(surface, "noun"));
            else if (kind < 6)
              chunk.tokens.push_back(
                  make_token(surface, "verb", "", kind == 4 ? "base" : "i-form"));
            else if (kind < 8)
              chunk.tokens.push_back(make_token(surface, "particle"));
            else if (kind == 8)
              chunk.tokens.push_back(make_token(surface, "noun", "pronoun"));
            else
              chunk.tokens.push_back(make_token(surface, "adverb"));
          }
          tree.chunks.push_back(std::move(chunk));
        }
        doc.sentences.push_back(std::move(tree));
      }
      corpus.documents.push_back(std::move(doc));
    }

    // Quota insertion per template level: every document receives its
    // share (difference of at most one insertion), every sentence holds
    // distinct templates of a level.
    for (Level tpl_level : kLevelsEasyFirst) {
      const double target = profile.per100(level_index(tpl_level), li);
      const long quota = std::lround(target * total_sentences / 100.0);
      if (quota == 0) continue;
      const long base = quota / docs_per_level;
      const long remainder = quota % docs_per_level;

      std::vector<int> doc_order(docs_per_level);
      for (int d = 0; d < docs_per_level; ++d) doc_order[d] = d;
      detail::fisher_yates(doc_order, gen);

      for (int rank = 0; rank < docs_per_level; ++rank) {
        const int d = doc_order[rank];
        const long doc_quota = base + (rank < remainder ? 1 : 0);
        if (doc_quota == 0) continue;
        Document& doc = corpus.documents[first_doc + d];

        std::vector<int> sentence_order(sentences_per_doc);
        for (int s = 0; s < sentences_per_doc; ++s) sentence_order[s] = s;
        detail::fisher_yates(sentence_order, gen);

        std::vector<int> used(sentences_per_doc, 0);
        for (long j = 0; j < doc_quota; ++j) {
          const int s = sentence_order[j % sentences_per_doc];
          const int round = used[s]++;
          if (round >= kTemplatesPerLevel)
            throw InvariantError(
                "infeasible profile: sentence template capacity exceeded");
          // Template index varies by sentence so each one appears
          // across many sentences.
          const int t = (d * sentences_per_doc + s + round) %
                        kTemplatesPerLevel;
          SentenceTree& tree = doc.sentences[s];
          Chunk& chunk =
              tree.chunks[gen() % tree.chunks.size()];
          const int p = safe_position(chunk.tokens, gen());
          const int bi = (t + level_index(tpl_level)) % kTemplatesPerLevel;
          chunk.tokens.insert(chunk.tokens.begin() + p,
                              {make_token(marker_a(t), "noun"),
                               make_token(marker_b(bi), "noun")});
        }
      }
    }
  }
  return corpus;
}

}  // namespace textlevel
