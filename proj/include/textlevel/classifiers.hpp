#ifndef TEXTLEVEL_CLASSIFIERS_HPP_
#define TEXTLEVEL_CLASSIFIERS_HPP_

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "textlevel/corpus.hpp"
#include "textlevel/features.hpp"
#include "textlevel/level.hpp"
#include "textlevel/templates.hpp"

namespace textlevel {

// Two-feature linear classifier for one level boundary. A positive
// decision value means "harder than the boundary".
struct LinearBoundaryModel {
  Level boundary = Level::N5;
  double w_on = 0;
  double w_out = 0;
  double bias = 0;

  // Training diagnostics.
  bool non_separable = false;
  int iterations = 0;
  double final_grad_norm = 0;
  double train_accuracy = 0;

  double decision_value(const BoundaryFeatures& f) const {
    return w_on * f.on_boundary + w_out * f.outside_boundary + bias;
  }
  bool harder(const BoundaryFeatures& f) const {
    return decision_value(f) > 0;
  }
};

struct BoundaryTrainOptions {
  double lambda = 1e-4;     // L2 penalty on the weights (bias excluded)
  double grad_tol = 1e-8;   // stop when the gradient inf-norm drops below
  int max_iterations = 10000;
  CountMode mode = CountMode::kSet;
  // Restrict the positive class to the next harder level instead of all
  // strictly harder documents (the cascade default).
  bool adjacent_only = false;
};

// Labeled docs at `boundary` form the negative class, all strictly harder
// docs the positive class; docs easier than the boundary are not used.
// Deterministic batch gradient descent with backtracking line search from
// zero initialization.
LinearBoundaryModel train_boundary(std::span<const Document> docs,
                                   Level boundary, const TemplateLibrary& lib,
                                   const BoundaryTrainOptions& opts = {});

// Same fit over precomputed per-document counts (labels parallel to counts).
LinearBoundaryModel train_boundary_counts(
    std::span<const DocTemplateCounts> counts, std::span<const Level> labels,
    Level boundary, const BoundaryTrainOptions& opts = {});

// The four boundary classifiers in cascade order N5, N4, N3, N2.
struct MLCModel {
  std::array<LinearBoundaryModel, 4> boundaries;
};

MLCModel train_mlc(std::span<const Document> docs, const TemplateLibrary& lib,
                   const BoundaryTrainOptions& opts = {});

// Cascade evaluation: the first "not harder" verdict assigns that
// boundary's level; surviving all four yields N1.
Level predict_mlc(const MLCModel& model, const Document& doc,
                  const TemplateLibrary& lib, CountMode mode = CountMode::kSet);
Level predict_mlc_counts(const MLCModel& model, const DocTemplateCounts& counts,
                         std::array<bool, 4>* verdicts = nullptr);

struct KnnModel {
  int k = 5;  // odd, >= 1
  Eigen::MatrixXd train;  // z-normalized rows, inactive columns zeroed
  std::vector<Level> labels;
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
  std::vector<bool> active;  // zero-variance features are dropped
};

KnnModel train_knn(const Eigen::MatrixXd& features,
                   const std::vector<Level>& labels, int k = 5);

// z-normalized Euclidean majority vote; a vote tie falls back to the
// single nearest neighbor's label.
Level predict_knn(const KnnModel& model, const Eigen::VectorXd& x);

struct SvmBinaryMachine {
  Level positive = Level::N1;  // the harder class of the pair
  Level negative = Level::N5;
  Eigen::MatrixXd support_vectors;  // rows in normalized feature space
  Eigen::VectorXd coef;             // alpha_i * y_i per stored vector
  double bias = 0;
  double kkt_gap = 0;        // m(alpha) - M(alpha) at termination
  double dual_objective = 0;
  int iterations = 0;
};

struct SvmModel {
  double C = 1.0;
  double gamma = 0;  // RBF width (resolved value, > 0)
  double tau = 1e-3;
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
  std::vector<bool> active;
  std::vector<Level> classes;  // easy-first
  std::vector<SvmBinaryMachine> machines;
};

// One-vs-one RBF SVMs trained by sequential minimal optimization with
// maximal-violating-pair selection, run until the KKT gap drops to tau.
// gamma <= 0 selects the 1/feature_count default.
SvmModel train_svm(const Eigen::MatrixXd& features,
                   const std::vector<Level>& labels, double C = 1.0,
                   double gamma = -1.0, double tau = 1e-3);

double svm_machine_decision(const SvmBinaryMachine& machine, double gamma,
                            const Eigen::VectorXd& x_normalized);

// One-vs-one vote; ties resolve toward the easier level.
Level predict_svm(const SvmModel& model, const Eigen::VectorXd& x);

enum class FeatureSetId { kTemplate, kBaseline, kTfidf, kHybrid };
enum class AlgorithmId { kMlc, kKnn, kSvm };

std::string to_string(FeatureSetId id);
std::string to_string(AlgorithmId id);
std::optional<FeatureSetId> feature_set_from_string(const std::string& s);
std::optional<AlgorithmId> algorithm_from_string(const std::string& s);

struct EvalReport {
  std::string algorithm;
  std::string feature_set;
  int folds = 0;
  std::uint64_t seed = 0;
  int n_documents = 0;
  double accuracy = 0;
  std::vector<double> per_fold_accuracy;
  // confusion(i, j): documents of true level index i predicted as index j.
  Eigen::Matrix<int, 5, 5> confusion = Eigen::Matrix<int, 5, 5>::Zero();
};

struct CvOptions {
  int knn_k = 5;
  double svm_c = 1.0;
  double svm_gamma = -1.0;  // <= 0: 1/feature_count
  double svm_tau = 1e-3;
  bool svm_grid = false;  // coarse power-of-4 grid search for (C, gamma)
  CountMode mode = CountMode::kSet;
};

// Deterministic stratified k-fold cross validation. All fold-dependent
// artifacts (language model, tf-idf vocabulary, normalization statistics,
// models) are fit on the training folds only.
EvalReport cross_validate(const Corpus& corpus, const TemplateLibrary& lib,
                          FeatureSetId feature_set, AlgorithmId algorithm,
                          int k = 5, std::uint64_t seed = 0,
                          const CvOptions& opts = {});

// Fold index per document, stratified by level: documents of each level
// are shuffled by a Fisher-Yates pass over one seeded generator (levels
// visited easy-first) and dealt round-robin.
std::vector<int> stratified_folds(const Corpus& corpus, int k,
                                  std::uint64_t seed);

namespace detail {

// Pinned shuffle so fold assignment does not depend on the standard
// library's std::shuffle: swaps v[i] with v[gen() % (i + 1)] for i from
// n-1 down to 1.
template <typename T, typename Rng>
void fisher_yates(std::vector<T>& v, Rng& gen) {
  for (size_t i = v.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(gen() % i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace detail

}  // namespace textlevel

#endif  // TEXTLEVEL_CLASSIFIERS_HPP_
