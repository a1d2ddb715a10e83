#ifndef TEXTLEVEL_MODEL_IO_HPP_
#define TEXTLEVEL_MODEL_IO_HPP_

#include <iosfwd>
#include <optional>

#include "textlevel/classifiers.hpp"
#include "textlevel/features.hpp"

namespace textlevel {

// A trained classifier plus every feature artifact needed to score new
// documents (the template library stays external and is passed at
// prediction time).
struct TrainedModel {
  AlgorithmId algorithm = AlgorithmId::kMlc;
  FeatureSetId feature_set = FeatureSetId::kTemplate;
  CountMode mode = CountMode::kSet;

  std::optional<MLCModel> mlc;
  std::optional<KnnModel> knn;
  std::optional<SvmModel> svm;

  std::optional<BigramLM> lm;        // baseline / hybrid feature sets
  std::optional<TfidfModel> tfidf;   // tfidf feature set
};

// Versioned JSON container; loading rejects unknown formats and versions.
void save_model(std::ostream& out, const TrainedModel& model);
TrainedModel load_model(std::istream& in);

// Deterministic JSON rendering of an evaluation report: identical reports
// serialize to identical bytes.
void save_report(std::ostream& out, const EvalReport& report);

// Confusion matrix as CSV, hardest level first on both axes.
void save_confusion_csv(std::ostream& out, const EvalReport& report);

}  // namespace textlevel

#endif  // TEXTLEVEL_MODEL_IO_HPP_
