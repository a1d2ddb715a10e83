#ifndef TEXTLEVEL_FEATURES_HPP_
#define TEXTLEVEL_FEATURES_HPP_

#include <Eigen/Core>
#include <array>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "textlevel/corpus.hpp"
#include "textlevel/extractor.hpp"
#include "textlevel/level.hpp"
#include "textlevel/templates.hpp"

namespace textlevel {

// Set: a template counts at most once per sentence (the extraction sets).
// Occurrence: each distinct (template, span) match counts.
enum class CountMode { kSet, kOccurrence };

struct FeatureVector {
  std::string doc_id;
  std::vector<std::string> names;
  Eigen::VectorXd values;
};

// Per-document sums of identified templates by level, the base quantity
// behind the template features, the boundary features and the corpus
// statistics. totals[level_index(l)] accumulates over all sentences.
struct DocTemplateCounts {
  std::array<double, kLevelCount> totals{};
  int sentence_count = 0;
};

DocTemplateCounts doc_template_counts(const Document& doc,
                                      const TemplateLibrary& lib,
                                      CountMode mode = CountMode::kSet);

// The five-feature set: average number of templates per sentence at each
// level, ordered N1 first.
FeatureVector template_features(const Document& doc, const TemplateLibrary& lib,
                                CountMode mode = CountMode::kSet);

const std::vector<std::string>& template_feature_names();

// 5x5 matrices indexed (template level, text level) via level_index.
struct StatTables {
  Eigen::Matrix<double, 5, 5> distribution;  // percent, columns sum to 100
  Eigen::Matrix<double, 5, 5> per100;        // matches per 100 sentences

  double distribution_at(Level tpl, Level text) const {
    return distribution(level_index(tpl), level_index(text));
  }
  double per100_at(Level tpl, Level text) const {
    return per100(level_index(tpl), level_index(text));
  }
};

// Requires every document labeled.
StatTables corpus_stats(const Corpus& corpus, const TemplateLibrary& lib,
                        CountMode mode = CountMode::kSet);

// CSV form of one stat matrix: rows are template levels, columns text
// levels, both hardest-first (the profile loader reads the same shape).
void save_level_matrix_csv(std::ostream& out,
                           const Eigen::Matrix<double, 5, 5>& matrix);
Eigen::Matrix<double, 5, 5> load_level_matrix_csv(std::istream& in);

struct BoundaryFeatures {
  double on_boundary = 0;       // templates exactly at the boundary level
  double outside_boundary = 0;  // templates strictly harder
};

// Both counts scaled to matches per 100 sentences.
BoundaryFeatures boundary_features(const Document& doc,
                                   const TemplateLibrary& lib, Level boundary,
                                   CountMode mode = CountMode::kSet);
BoundaryFeatures boundary_features(const DocTemplateCounts& counts,
                                   Level boundary);

// Add-alpha smoothed bigram language model over base forms with sentence
// boundary markers. Event space per context: vocabulary + end marker +
// unknown, so conditional probabilities sum to one.
class BigramLM {
 public:
  BigramLM() = default;
  BigramLM(std::map<std::string, int> vocab,
           std::vector<std::map<int, long>> bigram,
           std::vector<long> context_totals, double alpha);

  double log2_prob(int context_id, int event_id) const;
  int event_id(const Token& t) const;

  // Context ids: 0 = sentence start, then vocab ids shifted by one.
  // Event ids: vocab ids, then end marker, then unknown.
  int context_of_event(int event_id) const;
  int end_event_id() const { return static_cast<int>(vocab_.size()); }
  int unknown_event_id() const { return static_cast<int>(vocab_.size()) + 1; }

  const std::map<std::string, int>& vocab() const { return vocab_; }
  const std::vector<std::map<int, long>>& bigram() const { return bigram_; }
  const std::vector<long>& context_totals() const { return context_totals_; }
  double alpha() const { return alpha_; }

 private:
  std::map<std::string, int> vocab_;  // base form -> id, ids in sorted order
  std::vector<std::map<int, long>> bigram_;  // [context][event] -> count
  std::vector<long> context_totals_;
  double alpha_ = 1.0;
};

BigramLM train_lm(const Corpus& corpus, double alpha = 1.0);

// Mean per-token log2 probability of the document; the sentence-end
// marker counts as a token.
double lm_score(const BigramLM& lm, const Document& doc);

// The 12 baseline readability features (see README for the definitions).
FeatureVector baseline_features(const Document& doc, const BigramLM& lm);

const std::vector<std::string>& baseline_feature_names();

struct TfidfModel {
  std::vector<std::string> terms;  // sorted base forms from the training set
  std::unordered_map<std::string, int> index;
  Eigen::VectorXd idf;  // floored at zero
  int train_doc_count = 0;
};

TfidfModel fit_tfidf(std::span<const Document> train_docs);

// L2-normalized tf-idf vector; out-of-vocabulary terms are ignored.
Eigen::VectorXd tfidf_vector(const TfidfModel& model, const Document& doc);

// Vocabulary and idf come from train_docs; one vector per entry of
// all_docs. train_docs must be a subset of all_docs (by doc_id).
std::vector<FeatureVector> tfidf_features(std::span<const Document> train_docs,
                                          std::span<const Document> all_docs);

// Term used by the language model and tf-idf: the base form, falling back
// to the surface when the analyzer left it empty.
const std::string& term_of(const Token& t);

}  // namespace textlevel

#endif  // TEXTLEVEL_FEATURES_HPP_
