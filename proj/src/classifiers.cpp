#include "textlevel/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>

namespace textlevel {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// log(1 + exp(-z)) without overflow for large |z|.
double log1p_exp_neg(double z) {
  if (z >= 0) return std::log1p(std::exp(-z));
  return -z + std::log1p(std::exp(z));
}

struct LogisticProblem {
  Eigen::MatrixXd x;  // n x 2
  Eigen::VectorXd y;  // 0/1
  double lambda = 0;

  double objective(const Eigen::Vector2d& w, double b) const {
    double loss = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double z = x.row(i).dot(w) + b;
      // -log p(y_i | x_i): log(1+e^-z) for y=1, log(1+e^z) for y=0.
      loss += y(i) > 0.5 ? log1p_exp_neg(z) : log1p_exp_neg(-z);
    }
    return loss / static_cast<double>(x.rows()) +
           0.5 * lambda * w.squaredNorm();
  }

  void gradient(const Eigen::Vector2d& w, double b, Eigen::Vector2d* gw,
                double* gb) const {
    gw->setZero();
    *gb = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double residual = sigmoid(x.row(i).dot(w) + b) - y(i);
      *gw += residual * x.row(i).transpose();
      *gb += residual;
    }
    *gw /= static_cast<double>(x.rows());
    *gb /= static_cast<double>(x.rows());
    *gw += lambda * w;
  }
};

}  // namespace

LinearBoundaryModel train_boundary_counts(
    std::span<const DocTemplateCounts> counts, std::span<const Level> labels,
    Level boundary, const BoundaryTrainOptions& opts) {
  std::vector<Eigen::Vector2d> rows;
  std::vector<double> targets;
  for (size_t i = 0; i < counts.size(); ++i) {
    const Level l = labels[i];
    if (l == boundary) {
      const BoundaryFeatures f = boundary_features(counts[i], boundary);
      rows.push_back({f.on_boundary, f.outside_boundary});
      targets.push_back(0.0);
    } else if (harder_than(l, boundary)) {
      const BoundaryFeatures f = boundary_features(counts[i], boundary);
      rows.push_back({f.on_boundary, f.outside_boundary});
      targets.push_back(1.0);
    }
  }
  const bool has_pos = std::count(targets.begin(), targets.end(), 1.0) > 0;
  const bool has_neg = std::count(targets.begin(), targets.end(), 0.0) > 0;
  if (!has_pos || !has_neg)
    throw InvariantError("one-class training set for boundary " +
                         to_string(boundary));

  LogisticProblem problem;
  problem.x.resize(static_cast<Eigen::Index>(rows.size()), 2);
  problem.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    problem.x.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    problem.y(static_cast<Eigen::Index>(i)) = targets[i];
  }
  problem.lambda = opts.lambda;

  // The descent runs on standardized columns (plain gradient descent
  // crawls when the two counts sit on very different scales); the fitted
  // weights are mapped back to raw feature space below.
  Eigen::Vector2d mu, sigma;
  for (int j = 0; j < 2; ++j) {
    mu(j) = problem.x.col(j).mean();
    sigma(j) = std::sqrt(
        (problem.x.col(j).array() - mu(j)).square().sum() / problem.x.rows());
    if (sigma(j) > 0)
      problem.x.col(j) = (problem.x.col(j).array() - mu(j)) / sigma(j);
    else
      problem.x.col(j).setZero();
  }

  Eigen::Vector2d w = Eigen::Vector2d::Zero();
  double b = 0;
  Eigen::Vector2d gw;
  double gb = 0;
  double step = 1.0;
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    problem.gradient(w, b, &gw, &gb);
    const double inf_norm = std::max(gw.cwiseAbs().maxCoeff(), std::fabs(gb));
    if (inf_norm < opts.grad_tol) break;

    // Backtracking (Armijo) line search, warm-started from the last
    // accepted step.
    const double f0 = problem.objective(w, b);
    const double g2 = gw.squaredNorm() + gb * gb;
    double t = std::min(step * 2.0, 1e8);
    while (t > 1e-18 &&
           problem.objective(w - t * gw, b - t * gb) > f0 - 1e-4 * t * g2)
      t *= 0.5;
    w -= t * gw;
    b -= t * gb;
    step = t;
  }

  LinearBoundaryModel model;
  model.boundary = boundary;
  model.iterations = iter;
  problem.gradient(w, b, &gw, &gb);
  model.final_grad_norm = std::max(gw.cwiseAbs().maxCoeff(), std::fabs(gb));

  // Back to raw feature space: w_raw = w/sigma, bias absorbs the means.
  model.w_on = sigma(0) > 0 ? w(0) / sigma(0) : 0.0;
  model.w_out = sigma(1) > 0 ? w(1) / sigma(1) : 0.0;
  model.bias = b - model.w_on * mu(0) - model.w_out * mu(1);

  int correct = 0;
  int positive_predictions = 0;
  for (Eigen::Index i = 0; i < problem.x.rows(); ++i) {
    const bool predicted_harder = problem.x.row(i).dot(w) + b > 0;
    if (predicted_harder) ++positive_predictions;
    if (predicted_harder == (problem.y(i) > 0.5)) ++correct;
  }
  model.train_accuracy = static_cast<double>(correct) /
                         static_cast<double>(problem.x.rows());
  // Both classes present but every prediction identical: the two feature
  // clouds were not separated at all.
  model.non_separable = positive_predictions == 0 ||
                        positive_predictions == problem.x.rows();
  return model;
}

LinearBoundaryModel train_boundary(std::span<const Document> docs,
                                   Level boundary, const TemplateLibrary& lib,
                                   const BoundaryTrainOptions& opts) {
  std::vector<DocTemplateCounts> counts;
  std::vector<Level> labels;
  for (const Document& doc : docs) {
    if (!doc.level)
      throw InvariantError("unlabeled document \"" + doc.doc_id + "\"");
    counts.push_back(doc_template_counts(doc, lib, opts.mode));
    labels.push_back(*doc.level);
  }
  return train_boundary_counts(counts, labels, boundary, opts);
}

MLCModel train_mlc(std::span<const Document> docs, const TemplateLibrary& lib,
                   const BoundaryTrainOptions& opts) {
  std::vector<DocTemplateCounts> counts;
  std::vector<Level> labels;
  for (const Document& doc : docs) {
    if (!doc.level)
      throw InvariantError("unlabeled document \"" + doc.doc_id + "\"");
    counts.push_back(doc_template_counts(doc, lib, opts.mode));
    labels.push_back(*doc.level);
  }
  MLCModel model;
  const std::array<Level, 4> order = {Level::N5, Level::N4, Level::N3,
                                      Level::N2};
  for (size_t i = 0; i < order.size(); ++i)
    model.boundaries[i] =
        train_boundary_counts(counts, labels, order[i], opts);
  return model;
}

Level predict_mlc_counts(const MLCModel& model, const DocTemplateCounts& counts,
                         std::array<bool, 4>* verdicts) {
  for (size_t i = 0; i < model.boundaries.size(); ++i) {
    const LinearBoundaryModel& boundary = model.boundaries[i];
    const BoundaryFeatures f = boundary_features(counts, boundary.boundary);
    const bool harder = boundary.harder(f);
    if (verdicts) (*verdicts)[i] = harder;
    if (!harder) {
      if (verdicts)
        for (size_t j = i + 1; j < model.boundaries.size(); ++j)
          (*verdicts)[j] = false;
      return boundary.boundary;
    }
  }
  return Level::N1;
}

Level predict_mlc(const MLCModel& model, const Document& doc,
                  const TemplateLibrary& lib, CountMode mode) {
  return predict_mlc_counts(model, doc_template_counts(doc, lib, mode));
}

namespace {

struct Scaler {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
  std::vector<bool> active;

  static Scaler fit(const Eigen::MatrixXd& x) {
    Scaler s;
    s.mean = x.colwise().mean();
    s.stddev.resize(x.cols());
    s.active.resize(static_cast<size_t>(x.cols()));
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double var =
          (x.col(j).array() - s.mean(j)).square().sum() / x.rows();
      s.stddev(j) = std::sqrt(var);
      s.active[static_cast<size_t>(j)] = s.stddev(j) > 0;
    }
    return s;
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j)
      if (active[static_cast<size_t>(j)])
        out(j) = (x(j) - mean(j)) / stddev(j);
    return out;
  }

  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      out.row(i) = apply(x.row(i).transpose()).transpose();
    return out;
  }
};

}  // namespace

KnnModel train_knn(const Eigen::MatrixXd& features,
                   const std::vector<Level>& labels, int k) {
  if (features.rows() == 0) throw InvariantError("empty kNN training set");
  if (features.rows() != static_cast<Eigen::Index>(labels.size()))
    throw InvariantError("feature and label counts differ");
  if (k < 1 || k % 2 == 0)
    throw InvariantError("kNN requires an odd k >= 1");
  if (k > features.rows())
    throw InvariantError("k exceeds the training set size");

  const Scaler scaler = Scaler::fit(features);
  KnnModel model;
  model.k = k;
  model.labels = labels;
  model.mean = scaler.mean;
  model.stddev = scaler.stddev;
  model.active = scaler.active;
  model.train = scaler.apply_rows(features);
  return model;
}

Level predict_knn(const KnnModel& model, const Eigen::VectorXd& x) {
  Scaler scaler{model.mean, model.stddev, model.active};
  const Eigen::VectorXd q = scaler.apply(x);

  std::vector<std::pair<double, int>> by_distance;
  by_distance.reserve(static_cast<size_t>(model.train.rows()));
  for (Eigen::Index i = 0; i < model.train.rows(); ++i)
    by_distance.emplace_back((model.train.row(i).transpose() - q).norm(),
                             static_cast<int>(i));
  std::sort(by_distance.begin(), by_distance.end());

  std::array<int, kLevelCount> votes{};
  for (int i = 0; i < model.k; ++i)
    ++votes[level_index(model.labels[by_distance[static_cast<size_t>(i)].second])];
  int best = 0;
  for (int i = 1; i < kLevelCount; ++i)
    if (votes[i] > votes[best]) best = i;
  const bool tie =
      std::count(votes.begin(), votes.end(), votes[best]) > 1;
  if (tie) return model.labels[by_distance.front().second];
  return level_at(best);
}

namespace {

Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& x, double gamma) {
  const Eigen::VectorXd sq = x.rowwise().squaredNorm();
  Eigen::MatrixXd k = -2.0 * (x * x.transpose());
  k.colwise() += sq;
  k.rowwise() += sq.transpose();
  return (-gamma * k.array()).exp();
}

struct SmoResult {
  Eigen::VectorXd alpha;
  double bias = 0;
  double kkt_gap = 0;
  double dual_objective = 0;
  int iterations = 0;
};

// Sequential minimal optimization for the C-SVC dual with the
// maximal-violating-pair working set (ties resolve to the lowest index).
SmoResult smo_solve(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& y,
                    double C, double tau) {
  const Eigen::Index n = kernel.rows();
  SmoResult result;
  result.alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);

  const long max_iterations = std::max<long>(100000L, 200L * n);
  long iter = 0;
  double m = 0, M = 0;
  for (; iter < max_iterations; ++iter) {
    int i = -1, j = -1;
    m = -std::numeric_limits<double>::infinity();
    M = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      const double v = -y(t) * grad(t);
      const bool in_up = (y(t) > 0 && result.alpha(t) < C) ||
                         (y(t) < 0 && result.alpha(t) > 0);
      const bool in_low = (y(t) > 0 && result.alpha(t) > 0) ||
                          (y(t) < 0 && result.alpha(t) < C);
      if (in_up && v > m) {
        m = v;
        i = static_cast<int>(t);
      }
      if (in_low && v < M) {
        M = v;
        j = static_cast<int>(t);
      }
    }
    if (i < 0 || j < 0 || m - M <= tau) break;

    // Two-variable update along alpha_i += y_i*d, alpha_j -= y_j*d.
    double quad = kernel(i, i) + kernel(j, j) - 2.0 * kernel(i, j);
    if (quad <= 1e-12) quad = 1e-12;
    double d = (m - M) / quad;
    d = std::min(d, y(i) > 0 ? C - result.alpha(i) : result.alpha(i));
    d = std::min(d, y(j) > 0 ? result.alpha(j) : C - result.alpha(j));
    result.alpha(i) += y(i) * d;
    result.alpha(j) -= y(j) * d;
    // Gradient of the dual: delta_k = d * y_k * (K_ki - K_kj).
    grad += d * (kernel.col(i) - kernel.col(j)).cwiseProduct(y);
  }

  result.iterations = static_cast<int>(std::min<long>(
      iter, std::numeric_limits<int>::max()));
  result.kkt_gap = (std::isfinite(m) && std::isfinite(M)) ? m - M : 0.0;
  result.bias = (std::isfinite(m) && std::isfinite(M)) ? (m + M) / 2.0 : 0.0;
  // D(alpha) = sum(alpha) - 0.5 * alpha' Q alpha, with Q alpha = grad + e.
  result.dual_objective =
      result.alpha.sum() -
      0.5 * result.alpha.dot((grad.array() + 1.0).matrix());
  return result;
}

}  // namespace

SvmModel train_svm(const Eigen::MatrixXd& features,
                   const std::vector<Level>& labels, double C, double gamma,
                   double tau) {
  if (features.rows() == 0) throw InvariantError("empty SVM training set");
  if (features.rows() != static_cast<Eigen::Index>(labels.size()))
    throw InvariantError("feature and label counts differ");
  if (!features.allFinite())
    throw InvariantError("non-finite feature values");
  if (C <= 0 || tau <= 0) throw InvariantError("C and tau must be positive");

  std::set<Level> class_set(labels.begin(), labels.end());
  if (class_set.size() < 2)
    throw InvariantError("SVM training needs at least two classes");

  SvmModel model;
  model.C = C;
  model.gamma = gamma > 0 ? gamma : 1.0 / static_cast<double>(features.cols());
  model.tau = tau;
  model.classes.assign(class_set.begin(), class_set.end());

  const Scaler scaler = Scaler::fit(features);
  model.mean = scaler.mean;
  model.stddev = scaler.stddev;
  model.active = scaler.active;
  const Eigen::MatrixXd x = scaler.apply_rows(features);

  for (size_t a = 0; a < model.classes.size(); ++a) {
    for (size_t b = a + 1; b < model.classes.size(); ++b) {
      const Level easier = model.classes[a];
      const Level harder = model.classes[b];
      std::vector<int> rows;
      for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == easier || labels[i] == harder)
          rows.push_back(static_cast<int>(i));

      Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows.size()), x.cols());
      Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
      for (size_t i = 0; i < rows.size(); ++i) {
        sub.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
        y(static_cast<Eigen::Index>(i)) =
            labels[static_cast<size_t>(rows[i])] == harder ? 1.0 : -1.0;
      }

      const SmoResult solved =
          smo_solve(rbf_kernel(sub, model.gamma), y, C, tau);

      SvmBinaryMachine machine;
      machine.positive = harder;
      machine.negative = easier;
      machine.support_vectors = sub;
      machine.coef = solved.alpha.cwiseProduct(y);
      machine.bias = solved.bias;
      machine.kkt_gap = solved.kkt_gap;
      machine.dual_objective = solved.dual_objective;
      machine.iterations = solved.iterations;
      model.machines.push_back(std::move(machine));
    }
  }
  return model;
}

double svm_machine_decision(const SvmBinaryMachine& machine, double gamma,
                            const Eigen::VectorXd& x_normalized) {
  double value = machine.bias;
  for (Eigen::Index i = 0; i < machine.support_vectors.rows(); ++i) {
    const double sq =
        (machine.support_vectors.row(i).transpose() - x_normalized)
            .squaredNorm();
    value += machine.coef(i) * std::exp(-gamma * sq);
  }
  return value;
}

Level predict_svm(const SvmModel& model, const Eigen::VectorXd& x) {
  Scaler scaler{model.mean, model.stddev, model.active};
  const Eigen::VectorXd q = scaler.apply(x);

  std::array<int, kLevelCount> votes{};
  for (const SvmBinaryMachine& machine : model.machines) {
    const double value = svm_machine_decision(machine, model.gamma, q);
    ++votes[level_index(value > 0 ? machine.positive : machine.negative)];
  }
  // Easier level wins a tie.
  int best = -1;
  for (Level l : kLevelsEasyFirst) {
    const int i = level_index(l);
    if (votes[i] == 0) continue;
    if (best < 0 || votes[i] > votes[best]) best = i;
  }
  return best < 0 ? Level::N5 : level_at(best);
}

std::string to_string(FeatureSetId id) {
  switch (id) {
    case FeatureSetId::kTemplate: return "template";
    case FeatureSetId::kBaseline: return "baseline";
    case FeatureSetId::kTfidf: return "tfidf";
    case FeatureSetId::kHybrid: return "hybrid";
  }
  return "?";
}

std::string to_string(AlgorithmId id) {
  switch (id) {
    case AlgorithmId::kMlc: return "mlc";
    case AlgorithmId::kKnn: return "knn";
    case AlgorithmId::kSvm: return "svm";
  }
  return "?";
}

std::optional<FeatureSetId> feature_set_from_string(const std::string& s) {
  if (s == "template") return FeatureSetId::kTemplate;
  if (s == "baseline") return FeatureSetId::kBaseline;
  if (s == "tfidf") return FeatureSetId::kTfidf;
  if (s == "hybrid") return FeatureSetId::kHybrid;
  return std::nullopt;
}

std::optional<AlgorithmId> algorithm_from_string(const std::string& s) {
  if (s == "mlc") return AlgorithmId::kMlc;
  if (s == "knn") return AlgorithmId::kKnn;
  if (s == "svm") return AlgorithmId::kSvm;
  return std::nullopt;
}

std::vector<int> stratified_folds(const Corpus& corpus, int k,
                                  std::uint64_t seed) {
  std::vector<int> fold(corpus.documents.size(), -1);
  std::mt19937_64 gen(seed);
  for (Level l : kLevelsEasyFirst) {
    std::vector<int> indices;
    for (size_t i = 0; i < corpus.documents.size(); ++i)
      if (corpus.documents[i].level == l) indices.push_back(static_cast<int>(i));
    detail::fisher_yates(indices, gen);
    for (size_t j = 0; j < indices.size(); ++j)
      fold[static_cast<size_t>(indices[j])] = static_cast<int>(j % k);
  }
  return fold;
}

namespace {

// Coarse (C, gamma) grid selection by deterministic inner 3-fold accuracy
// on the training split.
void grid_select_svm(const Eigen::MatrixXd& x, const std::vector<Level>& y,
                     double tau, double* c_out, double* gamma_out) {
  const double gamma_base = 1.0 / static_cast<double>(x.cols());
  std::vector<double> c_grid, gamma_grid;
  for (int p = -2; p <= 3; ++p) c_grid.push_back(std::pow(4.0, p));
  for (int p = -2; p <= 2; ++p)
    gamma_grid.push_back(gamma_base * std::pow(4.0, p));

  // Stratified thirds over label order.
  const int inner_k = 3;
  std::map<Level, int> seen;
  std::vector<int> fold(y.size());
  for (size_t i = 0; i < y.size(); ++i) fold[i] = seen[y[i]]++ % inner_k;

  double best_acc = -1;
  for (double c : c_grid) {
    for (double g : gamma_grid) {
      int correct = 0, total = 0;
      for (int f = 0; f < inner_k; ++f) {
        std::vector<int> train_rows, test_rows;
        for (size_t i = 0; i < y.size(); ++i)
          (fold[i] == f ? test_rows : train_rows).push_back(static_cast<int>(i));
        std::set<Level> train_classes;
        for (int i : train_rows) train_classes.insert(y[static_cast<size_t>(i)]);
        if (train_classes.size() < 2 || test_rows.empty()) continue;
        Eigen::MatrixXd xt(static_cast<Eigen::Index>(train_rows.size()),
                           x.cols());
        std::vector<Level> yt;
        for (size_t i = 0; i < train_rows.size(); ++i) {
          xt.row(static_cast<Eigen::Index>(i)) = x.row(train_rows[i]);
          yt.push_back(y[static_cast<size_t>(train_rows[i])]);
        }
        const SvmModel model = train_svm(xt, yt, c, g, tau);
        for (int i : test_rows) {
          if (predict_svm(model, x.row(i).transpose()) ==
              y[static_cast<size_t>(i)])
            ++correct;
          ++total;
        }
      }
      const double acc = total > 0 ? static_cast<double>(correct) / total : 0;
      if (acc > best_acc) {
        best_acc = acc;
        *c_out = c;
        *gamma_out = g;
      }
    }
  }
}

Eigen::MatrixXd stack_rows(const std::vector<Eigen::VectorXd>& rows) {
  if (rows.empty()) return Eigen::MatrixXd(0, 0);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return out;
}

}  // namespace

EvalReport cross_validate(const Corpus& corpus, const TemplateLibrary& lib,
                          FeatureSetId feature_set, AlgorithmId algorithm,
                          int k, std::uint64_t seed, const CvOptions& opts) {
  if (k < 2) throw InvariantError("cross validation needs k >= 2");
  if (algorithm == AlgorithmId::kMlc && feature_set != FeatureSetId::kTemplate)
    throw InvariantError("mlc runs on the template feature set");

  std::array<int, kLevelCount> level_counts{};
  for (const Document& doc : corpus.documents) {
    if (!doc.level)
      throw InvariantError("unlabeled document \"" + doc.doc_id + "\"");
    ++level_counts[level_index(*doc.level)];
  }
  for (Level l : kLevelsEasyFirst) {
    const int count = level_counts[level_index(l)];
    if (count > 0 && count < k)
      throw InvariantError("level " + to_string(l) + " has fewer than " +
                           std::to_string(k) + " documents");
  }

  const std::vector<int> fold = stratified_folds(corpus, k, seed);
  const size_t n = corpus.documents.size();

  // Template counts do not depend on the split; compute them once.
  std::vector<DocTemplateCounts> counts;
  if (feature_set == FeatureSetId::kTemplate ||
      feature_set == FeatureSetId::kHybrid) {
    counts.reserve(n);
    for (const Document& doc : corpus.documents)
      counts.push_back(doc_template_counts(doc, lib, opts.mode));
  }

  EvalReport report;
  report.algorithm = to_string(algorithm);
  report.feature_set = to_string(feature_set);
  report.folds = k;
  report.seed = seed;
  report.n_documents = static_cast<int>(n);

  int total_correct = 0;
  for (int f = 0; f < k; ++f) {
    std::vector<int> train_rows, test_rows;
    for (size_t i = 0; i < n; ++i)
      (fold[i] == f ? test_rows : train_rows).push_back(static_cast<int>(i));

    std::vector<Level> predictions(test_rows.size(), Level::N5);
    if (algorithm == AlgorithmId::kMlc) {
      std::vector<DocTemplateCounts> train_counts;
      std::vector<Level> train_labels;
      for (int i : train_rows) {
        train_counts.push_back(counts[static_cast<size_t>(i)]);
        train_labels.push_back(*corpus.documents[static_cast<size_t>(i)].level);
      }
      BoundaryTrainOptions bopts;
      bopts.mode = opts.mode;
      MLCModel model;
      const std::array<Level, 4> order = {Level::N5, Level::N4, Level::N3,
                                          Level::N2};
      for (size_t bi = 0; bi < order.size(); ++bi)
        model.boundaries[bi] =
            train_boundary_counts(train_counts, train_labels, order[bi], bopts);
      for (size_t t = 0; t < test_rows.size(); ++t)
        predictions[t] = predict_mlc_counts(
            model, counts[static_cast<size_t>(test_rows[t])]);
    } else {
      // Assemble the fold's feature matrix; fold-dependent artifacts are
      // fit on the training rows only.
      std::vector<Eigen::VectorXd> all_features(n);
      switch (feature_set) {
        case FeatureSetId::kTemplate: {
          for (size_t i = 0; i < n; ++i)
            all_features[i] =
                template_features(corpus.documents[i], lib, opts.mode).values;
          break;
        }
        case FeatureSetId::kBaseline: {
          Corpus train_corpus;
          for (int i : train_rows)
            train_corpus.documents.push_back(
                corpus.documents[static_cast<size_t>(i)]);
          const BigramLM lm = train_lm(train_corpus);
          for (size_t i = 0; i < n; ++i)
            all_features[i] = baseline_features(corpus.documents[i], lm).values;
          break;
        }
        case FeatureSetId::kTfidf: {
          std::vector<Document> train_docs;
          for (int i : train_rows)
            train_docs.push_back(corpus.documents[static_cast<size_t>(i)]);
          const TfidfModel model = fit_tfidf(train_docs);
          for (size_t i = 0; i < n; ++i)
            all_features[i] = tfidf_vector(model, corpus.documents[i]);
          break;
        }
        case FeatureSetId::kHybrid: {
          Corpus train_corpus;
          for (int i : train_rows)
            train_corpus.documents.push_back(
                corpus.documents[static_cast<size_t>(i)]);
          const BigramLM lm = train_lm(train_corpus);
          for (size_t i = 0; i < n; ++i) {
            const Eigen::VectorXd tpl =
                template_features(corpus.documents[i], lib, opts.mode).values;
            const Eigen::VectorXd base =
                baseline_features(corpus.documents[i], lm).values;
            Eigen::VectorXd joined(tpl.size() + base.size());
            joined << tpl, base;
            all_features[i] = joined;
          }
          break;
        }
      }

      std::vector<Eigen::VectorXd> train_features;
      std::vector<Level> train_labels;
      for (int i : train_rows) {
        train_features.push_back(all_features[static_cast<size_t>(i)]);
        train_labels.push_back(*corpus.documents[static_cast<size_t>(i)].level);
      }
      const Eigen::MatrixXd xt = stack_rows(train_features);

      if (algorithm == AlgorithmId::kKnn) {
        const KnnModel model = train_knn(xt, train_labels, opts.knn_k);
        for (size_t t = 0; t < test_rows.size(); ++t)
          predictions[t] = predict_knn(
              model, all_features[static_cast<size_t>(test_rows[t])]);
      } else {
        double c = opts.svm_c;
        double gamma = opts.svm_gamma;
        if (opts.svm_grid) grid_select_svm(xt, train_labels, opts.svm_tau,
                                           &c, &gamma);
        const SvmModel model = train_svm(xt, train_labels, c, gamma,
                                         opts.svm_tau);
        for (size_t t = 0; t < test_rows.size(); ++t)
          predictions[t] = predict_svm(
              model, all_features[static_cast<size_t>(test_rows[t])]);
      }
    }

    int fold_correct = 0;
    for (size_t t = 0; t < test_rows.size(); ++t) {
      const Level truth =
          *corpus.documents[static_cast<size_t>(test_rows[t])].level;
      ++report.confusion(level_index(truth), level_index(predictions[t]));
      if (predictions[t] == truth) ++fold_correct;
    }
    total_correct += fold_correct;
    report.per_fold_accuracy.push_back(
        test_rows.empty() ? 0.0
                          : static_cast<double>(fold_correct) /
                                static_cast<double>(test_rows.size()));
  }

  report.accuracy = n > 0 ? static_cast<double>(total_correct) /
                                static_cast<double>(n)
                          : 0.0;
  return report;
}

}  // namespace textlevel
