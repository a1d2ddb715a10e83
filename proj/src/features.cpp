#include "textlevel/features.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

namespace textlevel {

namespace {

// Tag inventories accepted for the POS-dependent baseline features; both
// English coarse labels and the IPA dictionary labels are recognized.
bool is_noun_pos(const std::string& pos) {
  return pos == "noun" || pos == "名詞";
}
bool is_verb_pos(const std::string& pos) {
  return pos == "verb" || pos == "動詞";
}
bool is_particle_pos(const std::string& pos) {
  return pos == "particle" || pos == "助詞";
}
bool is_pronoun(const Token& t) {
  return t.pos_detail == "pronoun" || t.pos_detail == "代名詞" ||
         t.pos == "pronoun" || t.pos == "代名詞";
}

void require_non_empty(const Document& doc) {
  if (doc.sentences.empty())
    throw InvariantError("empty document \"" + doc.doc_id + "\"");
}

// Per-sentence count of identified templates at each level.
std::array<double, kLevelCount> sentence_level_counts(
    const ExtractionResult& result, const TemplateLibrary& lib,
    CountMode mode) {
  std::array<double, kLevelCount> counts{};
  if (mode == CountMode::kSet) {
    for (const std::string& id : result.identified)
      counts[level_index(lib.find(id)->spec.level)] += 1.0;
  } else {
    // Distinct (template, span) pairs; the same match seen from two
    // nodes counts once.
    std::set<std::tuple<std::string, int, int>> seen;
    for (const Occurrence& occ : result.occurrences)
      if (seen.emplace(occ.template_id, occ.span.start, occ.span.end).second)
        counts[level_index(occ.level)] += 1.0;
  }
  return counts;
}

}  // namespace

DocTemplateCounts doc_template_counts(const Document& doc,
                                      const TemplateLibrary& lib,
                                      CountMode mode) {
  require_non_empty(doc);
  DocTemplateCounts out;
  out.sentence_count = static_cast<int>(doc.sentences.size());
  for (const ExtractionResult& result : extract_document(doc, lib)) {
    const auto counts = sentence_level_counts(result, lib, mode);
    for (int i = 0; i < kLevelCount; ++i) out.totals[i] += counts[i];
  }
  return out;
}

const std::vector<std::string>& template_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (Level l : kLevelsHardFirst)
      v.push_back("templates_" + to_string(l) + "_per_sentence");
    return v;
  }();
  return names;
}

FeatureVector template_features(const Document& doc, const TemplateLibrary& lib,
                                CountMode mode) {
  const DocTemplateCounts counts = doc_template_counts(doc, lib, mode);
  FeatureVector fv;
  fv.doc_id = doc.doc_id;
  fv.names = template_feature_names();
  fv.values.resize(kLevelCount);
  for (int i = 0; i < kLevelCount; ++i) {
    const Level l = kLevelsHardFirst[i];
    fv.values(i) = counts.totals[level_index(l)] / counts.sentence_count;
  }
  return fv;
}

StatTables corpus_stats(const Corpus& corpus, const TemplateLibrary& lib,
                        CountMode mode) {
  Eigen::Matrix<double, 5, 5> counts = Eigen::Matrix<double, 5, 5>::Zero();
  std::array<long, kLevelCount> sentences{};
  for (const Document& doc : corpus.documents) {
    if (!doc.level)
      throw InvariantError("unlabeled document \"" + doc.doc_id + "\"");
    const DocTemplateCounts dc = doc_template_counts(doc, lib, mode);
    const int text = level_index(*doc.level);
    for (int tpl = 0; tpl < kLevelCount; ++tpl)
      counts(tpl, text) += dc.totals[tpl];
    sentences[text] += dc.sentence_count;
  }

  StatTables tables;
  tables.distribution.setZero();
  tables.per100.setZero();
  for (int text = 0; text < kLevelCount; ++text) {
    const double column_total = counts.col(text).sum();
    for (int tpl = 0; tpl < kLevelCount; ++tpl) {
      if (sentences[text] > 0)
        tables.per100(tpl, text) =
            100.0 * counts(tpl, text) / static_cast<double>(sentences[text]);
      if (column_total > 0)
        tables.distribution(tpl, text) =
            100.0 * counts(tpl, text) / column_total;
    }
  }
  return tables;
}

void save_level_matrix_csv(std::ostream& out,
                           const Eigen::Matrix<double, 5, 5>& matrix) {
  out << "template_level";
  for (Level text : kLevelsHardFirst) out << "," << to_string(text);
  out << "\n";
  char buf[64];
  for (Level tpl : kLevelsHardFirst) {
    out << to_string(tpl);
    for (Level text : kLevelsHardFirst) {
      std::snprintf(buf, sizeof(buf), "%.6f",
                    matrix(level_index(tpl), level_index(text)));
      out << "," << buf;
    }
    out << "\n";
  }
}

Eigen::Matrix<double, 5, 5> load_level_matrix_csv(std::istream& in) {
  Eigen::Matrix<double, 5, 5> matrix;
  std::string line;
  if (!std::getline(in, line))
    throw FormatError("level matrix: missing header");
  int rows = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (rows >= kLevelCount)
      throw FormatError("level matrix: too many rows");
    std::istringstream cells(line);
    std::string cell;
    if (!std::getline(cells, cell, ','))
      throw FormatError("line " + std::to_string(line_no) + ": empty row");
    const auto tpl = level_from_string(cell);
    if (!tpl)
      throw FormatError("line " + std::to_string(line_no) +
                        ": unknown level tag \"" + cell + "\"");
    for (Level text : kLevelsHardFirst) {
      if (!std::getline(cells, cell, ','))
        throw FormatError("line " + std::to_string(line_no) +
                          ": missing value for " + to_string(text));
      try {
        matrix(level_index(*tpl), level_index(text)) = std::stod(cell);
      } catch (const std::exception&) {
        throw FormatError("line " + std::to_string(line_no) +
                          ": bad number \"" + cell + "\"");
      }
    }
    ++rows;
  }
  if (rows != kLevelCount) throw FormatError("level matrix: expected 5 rows");
  return matrix;
}

BoundaryFeatures boundary_features(const DocTemplateCounts& counts,
                                   Level boundary) {
  BoundaryFeatures bf;
  for (int i = 0; i < kLevelCount; ++i) {
    const Level l = level_at(i);
    if (l == boundary)
      bf.on_boundary += counts.totals[i];
    else if (harder_than(l, boundary))
      bf.outside_boundary += counts.totals[i];
  }
  bf.on_boundary *= 100.0 / counts.sentence_count;
  bf.outside_boundary *= 100.0 / counts.sentence_count;
  return bf;
}

BoundaryFeatures boundary_features(const Document& doc,
                                   const TemplateLibrary& lib, Level boundary,
                                   CountMode mode) {
  return boundary_features(doc_template_counts(doc, lib, mode), boundary);
}

BigramLM::BigramLM(std::map<std::string, int> vocab,
                   std::vector<std::map<int, long>> bigram,
                   std::vector<long> context_totals, double alpha)
    : vocab_(std::move(vocab)),
      bigram_(std::move(bigram)),
      context_totals_(std::move(context_totals)),
      alpha_(alpha) {}

int BigramLM::event_id(const Token& t) const {
  auto it = vocab_.find(term_of(t));
  return it == vocab_.end() ? unknown_event_id() : it->second;
}

int BigramLM::context_of_event(int event_id) const {
  // Unknown or end-marker events act as the unknown context, which has no
  // observed counts.
  if (event_id >= static_cast<int>(vocab_.size()))
    return static_cast<int>(bigram_.size()) - 1;
  return 1 + event_id;
}

double BigramLM::log2_prob(int context_id, int event_id) const {
  const double event_space = static_cast<double>(vocab_.size()) + 2;
  double count = 0;
  double total = 0;
  if (context_id >= 0 && context_id < static_cast<int>(bigram_.size())) {
    const auto& row = bigram_[context_id];
    auto it = row.find(event_id);
    if (it != row.end()) count = static_cast<double>(it->second);
    total = static_cast<double>(context_totals_[context_id]);
  }
  return std::log2((count + alpha_) / (total + alpha_ * event_space));
}

BigramLM train_lm(const Corpus& corpus, double alpha) {
  if (corpus.documents.empty())
    throw InvariantError("cannot train a language model on an empty corpus");

  std::map<std::string, int> vocab;
  for (const Document& doc : corpus.documents)
    for (const SentenceTree& tree : doc.sentences)
      for (const Chunk& c : tree.chunks)
        for (const Token& t : c.tokens) vocab.emplace(term_of(t), 0);
  int next_id = 0;
  for (auto& [term, id] : vocab) id = next_id++;

  const int end_id = next_id;
  // Contexts: 0 = sentence start, 1..V = vocab terms, V+1 = unknown.
  std::vector<std::map<int, long>> bigram(vocab.size() + 2);
  std::vector<long> totals(vocab.size() + 2, 0);
  for (const Document& doc : corpus.documents) {
    for (const SentenceTree& tree : doc.sentences) {
      int context = 0;
      for (const Chunk& c : tree.chunks) {
        for (const Token& t : c.tokens) {
          const int ev = vocab.at(term_of(t));
          ++bigram[context][ev];
          ++totals[context];
          context = 1 + ev;
        }
      }
      ++bigram[context][end_id];
      ++totals[context];
    }
  }
  return BigramLM(std::move(vocab), std::move(bigram), std::move(totals),
                  alpha);
}

double lm_score(const BigramLM& lm, const Document& doc) {
  require_non_empty(doc);
  double total = 0;
  long terms = 0;
  for (const SentenceTree& tree : doc.sentences) {
    int context = 0;
    for (const Chunk& c : tree.chunks) {
      for (const Token& t : c.tokens) {
        const int ev = lm.event_id(t);
        total += lm.log2_prob(context, ev);
        ++terms;
        context = lm.context_of_event(ev);
      }
    }
    total += lm.log2_prob(context, lm.end_event_id());
    ++terms;
  }
  return total / static_cast<double>(terms);
}

namespace {

int tree_depth(const SentenceTree& tree) {
  const auto children = tree.children();
  const int root = tree.root();
  if (root < 0) return 0;
  int deepest = 1;
  std::vector<std::pair<int, int>> stack{{root, 1}};
  while (!stack.empty()) {
    auto [id, depth] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, depth);
    for (int child : children[id]) stack.emplace_back(child, depth + 1);
  }
  return deepest;
}

std::map<std::string, int> term_counts(const SentenceTree& tree,
                                       bool nouns_and_pronouns_only) {
  std::map<std::string, int> counts;
  for (const Chunk& c : tree.chunks)
    for (const Token& t : c.tokens) {
      if (nouns_and_pronouns_only && !is_noun_pos(t.pos) && !is_pronoun(t))
        continue;
      ++counts[term_of(t)];
    }
  return counts;
}

double cosine(const std::map<std::string, int>& a,
              const std::map<std::string, int>& b) {
  double dot = 0, na = 0, nb = 0;
  for (const auto& [term, count] : a) {
    na += static_cast<double>(count) * count;
    auto it = b.find(term);
    if (it != b.end()) dot += static_cast<double>(count) * it->second;
  }
  for (const auto& [term, count] : b) nb += static_cast<double>(count) * count;
  if (na == 0 || nb == 0) return 0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double overlap(const std::map<std::string, int>& a,
               const std::map<std::string, int>& b) {
  double shared = 0;
  for (const auto& [term, count] : a)
    if (b.count(term)) shared += 1;
  return shared;
}

}  // namespace

const std::vector<std::string>& baseline_feature_names() {
  static const std::vector<std::string> names = {
      "word_count",
      "sentence_count",
      "words_per_sentence",
      "parse_tree_depth",
      "noun_phrases_per_sentence",
      "verb_phrases_per_sentence",
      "pronouns_per_sentence",
      "clauses_per_sentence",
      "adjacent_cosine",
      "adjacent_word_overlap",
      "adjacent_noun_pronoun_overlap",
      "lm_log2_likelihood",
  };
  return names;
}

FeatureVector baseline_features(const Document& doc, const BigramLM& lm) {
  require_non_empty(doc);
  const double n_sentences = static_cast<double>(doc.sentences.size());

  double words = 0;
  double depth_sum = 0;
  double noun_phrases = 0;
  double verb_phrases = 0;
  double pronouns = 0;
  double clauses = 0;
  for (const SentenceTree& tree : doc.sentences) {
    words += tree.token_count();
    depth_sum += tree_depth(tree);
    const auto children = tree.children();
    const int last_chunk = static_cast<int>(tree.chunks.size()) - 1;
    double clause_chunks = 0;
    for (const Chunk& c : tree.chunks) {
      // Noun phrase proxy: the last non-particle token heads the chunk.
      for (auto it = c.tokens.rbegin(); it != c.tokens.rend(); ++it) {
        if (is_particle_pos(it->pos)) continue;
        if (is_noun_pos(it->pos)) noun_phrases += 1;
        break;
      }
      bool has_verb = false;
      for (const Token& t : c.tokens) {
        if (is_verb_pos(t.pos)) has_verb = true;
        if (is_pronoun(t)) pronouns += 1;
      }
      if (has_verb) {
        verb_phrases += 1;
        // Clause proxy: a non-final predicate chunk with dependents.
        if (c.id != last_chunk && !children[c.id].empty()) clause_chunks += 1;
      }
    }
    clauses += 1 + clause_chunks;
  }

  double cosine_sum = 0;
  double overlap_sum = 0;
  double np_overlap_sum = 0;
  const int pairs = static_cast<int>(doc.sentences.size()) - 1;
  for (int i = 0; i < pairs; ++i) {
    const auto a = term_counts(doc.sentences[i], false);
    const auto b = term_counts(doc.sentences[i + 1], false);
    cosine_sum += cosine(a, b);
    overlap_sum += overlap(a, b);
    np_overlap_sum += overlap(term_counts(doc.sentences[i], true),
                              term_counts(doc.sentences[i + 1], true));
  }

  FeatureVector fv;
  fv.doc_id = doc.doc_id;
  fv.names = baseline_feature_names();
  fv.values.resize(12);
  fv.values(0) = words;
  fv.values(1) = n_sentences;
  fv.values(2) = words / n_sentences;
  fv.values(3) = depth_sum / n_sentences;
  fv.values(4) = noun_phrases / n_sentences;
  fv.values(5) = verb_phrases / n_sentences;
  fv.values(6) = pronouns / n_sentences;
  fv.values(7) = clauses / n_sentences;
  fv.values(8) = pairs > 0 ? cosine_sum / pairs : 0.0;
  fv.values(9) = pairs > 0 ? overlap_sum / pairs : 0.0;
  fv.values(10) = pairs > 0 ? np_overlap_sum / pairs : 0.0;
  fv.values(11) = lm_score(lm, doc);
  return fv;
}

const std::string& term_of(const Token& t) {
  return t.base.empty() ? t.surface : t.base;
}

TfidfModel fit_tfidf(std::span<const Document> train_docs) {
  if (train_docs.empty())
    throw InvariantError("tf-idf needs a non-empty training set");

  std::map<std::string, int> doc_frequency;
  for (const Document& doc : train_docs) {
    std::set<std::string> seen;
    for (const SentenceTree& tree : doc.sentences)
      for (const Chunk& c : tree.chunks)
        for (const Token& t : c.tokens) seen.insert(term_of(t));
    for (const std::string& term : seen) ++doc_frequency[term];
  }

  TfidfModel model;
  model.train_doc_count = static_cast<int>(train_docs.size());
  model.terms.reserve(doc_frequency.size());
  for (const auto& [term, df] : doc_frequency) model.terms.push_back(term);
  model.idf.resize(static_cast<Eigen::Index>(model.terms.size()));
  for (size_t i = 0; i < model.terms.size(); ++i) {
    model.index.emplace(model.terms[i], static_cast<int>(i));
    const double df = doc_frequency[model.terms[i]];
    model.idf(static_cast<Eigen::Index>(i)) =
        std::max(0.0, std::log(model.train_doc_count / (1.0 + df)));
  }
  return model;
}

Eigen::VectorXd tfidf_vector(const TfidfModel& model, const Document& doc) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(model.idf.size());
  for (const SentenceTree& tree : doc.sentences)
    for (const Chunk& c : tree.chunks)
      for (const Token& t : c.tokens) {
        auto it = model.index.find(term_of(t));
        if (it != model.index.end()) v(it->second) += 1.0;
      }
  v = v.cwiseProduct(model.idf);
  const double norm = v.norm();
  if (norm > 0) v /= norm;
  return v;
}

std::vector<FeatureVector> tfidf_features(std::span<const Document> train_docs,
                                          std::span<const Document> all_docs) {
  std::unordered_set<std::string> all_ids;
  for (const Document& doc : all_docs) all_ids.insert(doc.doc_id);
  for (const Document& doc : train_docs)
    if (!all_ids.count(doc.doc_id))
      throw InvariantError("training document \"" + doc.doc_id +
                           "\" is not part of the full document set");

  const TfidfModel model = fit_tfidf(train_docs);
  std::vector<FeatureVector> out;
  out.reserve(all_docs.size());
  for (const Document& doc : all_docs) {
    FeatureVector fv;
    fv.doc_id = doc.doc_id;
    fv.names = model.terms;
    fv.values = tfidf_vector(model, doc);
    out.push_back(std::move(fv));
  }
  return out;
}

}  // namespace textlevel
