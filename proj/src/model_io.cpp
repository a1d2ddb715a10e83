#include "textlevel/model_io.hpp"

#include <istream>
#include <ostream>

#include "json.hpp"

namespace textlevel {

namespace {

using nlohmann::ordered_json;

constexpr const char* kFormatTag = "textlevel-model";
constexpr int kFormatVersion = 1;

ordered_json vector_to_json(const Eigen::VectorXd& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const ordered_json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    rows.push_back(vector_to_json(m.row(i).transpose()));
  return rows;
}

Eigen::MatrixXd matrix_from_json(const ordered_json& j) {
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Eigen::MatrixXd(0, 0);
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    m.row(i) = vector_from_json(j[static_cast<size_t>(i)]).transpose();
  return m;
}

ordered_json levels_to_json(const std::vector<Level>& levels) {
  ordered_json out = ordered_json::array();
  for (Level l : levels) out.push_back(to_string(l));
  return out;
}

std::vector<Level> levels_from_json(const ordered_json& j) {
  std::vector<Level> out;
  for (const auto& tag : j) {
    const auto l = level_from_string(tag.get<std::string>());
    if (!l) throw FormatError("model: unknown level tag");
    out.push_back(*l);
  }
  return out;
}

ordered_json active_to_json(const std::vector<bool>& active) {
  ordered_json out = ordered_json::array();
  for (bool b : active) out.push_back(b ? 1 : 0);
  return out;
}

std::vector<bool> active_from_json(const ordered_json& j) {
  std::vector<bool> out;
  for (const auto& v : j) out.push_back(v.get<int>() != 0);
  return out;
}

Level level_from_tag(const ordered_json& j) {
  const auto l = level_from_string(j.get<std::string>());
  if (!l) throw FormatError("model: unknown level tag");
  return *l;
}

ordered_json boundary_to_json(const LinearBoundaryModel& m) {
  return ordered_json{{"boundary", to_string(m.boundary)},
                      {"w_on", m.w_on},
                      {"w_out", m.w_out},
                      {"bias", m.bias},
                      {"non_separable", m.non_separable},
                      {"iterations", m.iterations},
                      {"final_grad_norm", m.final_grad_norm},
                      {"train_accuracy", m.train_accuracy}};
}

LinearBoundaryModel boundary_from_json(const ordered_json& j) {
  LinearBoundaryModel m;
  m.boundary = level_from_tag(j.at("boundary"));
  m.w_on = j.at("w_on").get<double>();
  m.w_out = j.at("w_out").get<double>();
  m.bias = j.at("bias").get<double>();
  m.non_separable = j.value("non_separable", false);
  m.iterations = j.value("iterations", 0);
  m.final_grad_norm = j.value("final_grad_norm", 0.0);
  m.train_accuracy = j.value("train_accuracy", 0.0);
  return m;
}

ordered_json lm_to_json(const BigramLM& lm) {
  ordered_json vocab = ordered_json::array();
  for (const auto& [term, id] : lm.vocab()) vocab.push_back(term);
  ordered_json counts = ordered_json::array();
  for (size_t ctx = 0; ctx < lm.bigram().size(); ++ctx)
    for (const auto& [event, count] : lm.bigram()[ctx])
      counts.push_back(ordered_json::array(
          {static_cast<long>(ctx), event, count}));
  return ordered_json{{"alpha", lm.alpha()},
                      {"vocab", vocab},
                      {"counts", counts}};
}

BigramLM lm_from_json(const ordered_json& j) {
  std::map<std::string, int> vocab;
  int next_id = 0;
  for (const auto& term : j.at("vocab"))
    vocab.emplace(term.get<std::string>(), next_id++);
  std::vector<std::map<int, long>> bigram(vocab.size() + 2);
  std::vector<long> totals(vocab.size() + 2, 0);
  for (const auto& entry : j.at("counts")) {
    const size_t ctx = entry[0].get<size_t>();
    const int event = entry[1].get<int>();
    const long count = entry[2].get<long>();
    if (ctx >= bigram.size()) throw FormatError("model: bad LM context id");
    bigram[ctx][event] = count;
    totals[ctx] += count;
  }
  return BigramLM(std::move(vocab), std::move(bigram), std::move(totals),
                  j.at("alpha").get<double>());
}

ordered_json tfidf_to_json(const TfidfModel& m) {
  ordered_json terms = ordered_json::array();
  for (const std::string& t : m.terms) terms.push_back(t);
  return ordered_json{{"train_doc_count", m.train_doc_count},
                      {"terms", terms},
                      {"idf", vector_to_json(m.idf)}};
}

TfidfModel tfidf_from_json(const ordered_json& j) {
  TfidfModel m;
  m.train_doc_count = j.at("train_doc_count").get<int>();
  for (const auto& t : j.at("terms")) m.terms.push_back(t.get<std::string>());
  m.idf = vector_from_json(j.at("idf"));
  for (size_t i = 0; i < m.terms.size(); ++i)
    m.index.emplace(m.terms[i], static_cast<int>(i));
  return m;
}

}  // namespace

void save_model(std::ostream& out, const TrainedModel& model) {
  ordered_json j;
  j["format"] = kFormatTag;
  j["version"] = kFormatVersion;
  j["algorithm"] = to_string(model.algorithm);
  j["feature_set"] = to_string(model.feature_set);
  j["count_mode"] = model.mode == CountMode::kSet ? "set" : "occurrence";

  if (model.mlc) {
    ordered_json boundaries = ordered_json::array();
    for (const LinearBoundaryModel& b : model.mlc->boundaries)
      boundaries.push_back(boundary_to_json(b));
    j["mlc"] = ordered_json{{"boundaries", boundaries}};
  }
  if (model.knn) {
    const KnnModel& m = *model.knn;
    j["knn"] = ordered_json{{"k", m.k},
                            {"train", matrix_to_json(m.train)},
                            {"labels", levels_to_json(m.labels)},
                            {"mean", vector_to_json(m.mean)},
                            {"stddev", vector_to_json(m.stddev)},
                            {"active", active_to_json(m.active)}};
  }
  if (model.svm) {
    const SvmModel& m = *model.svm;
    ordered_json machines = ordered_json::array();
    for (const SvmBinaryMachine& machine : m.machines) {
      machines.push_back(
          ordered_json{{"positive", to_string(machine.positive)},
                       {"negative", to_string(machine.negative)},
                       {"support_vectors",
                        matrix_to_json(machine.support_vectors)},
                       {"coef", vector_to_json(machine.coef)},
                       {"bias", machine.bias},
                       {"kkt_gap", machine.kkt_gap},
                       {"dual_objective", machine.dual_objective},
                       {"iterations", machine.iterations}});
    }
    j["svm"] = ordered_json{{"C", m.C},
                            {"gamma", m.gamma},
                            {"tau", m.tau},
                            {"mean", vector_to_json(m.mean)},
                            {"stddev", vector_to_json(m.stddev)},
                            {"active", active_to_json(m.active)},
                            {"classes", levels_to_json(m.classes)},
                            {"machines", machines}};
  }
  if (model.lm) j["lm"] = lm_to_json(*model.lm);
  if (model.tfidf) j["tfidf"] = tfidf_to_json(*model.tfidf);

  out << j.dump(2) << "\n";
}

TrainedModel load_model(std::istream& in) {
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model: malformed JSON: ") + e.what());
  }
  if (j.value("format", std::string()) != kFormatTag)
    throw FormatError("model: unrecognized format tag");
  if (j.value("version", 0) != kFormatVersion)
    throw FormatError("model: unsupported version");

  TrainedModel model;
  const auto algo = algorithm_from_string(j.at("algorithm").get<std::string>());
  const auto fs = feature_set_from_string(j.at("feature_set").get<std::string>());
  if (!algo || !fs) throw FormatError("model: unknown algorithm or feature set");
  model.algorithm = *algo;
  model.feature_set = *fs;
  model.mode = j.value("count_mode", std::string("set")) == "occurrence"
                   ? CountMode::kOccurrence
                   : CountMode::kSet;

  if (j.contains("mlc")) {
    MLCModel m;
    const auto& boundaries = j["mlc"].at("boundaries");
    if (boundaries.size() != 4)
      throw FormatError("model: mlc needs exactly four boundaries");
    for (size_t i = 0; i < 4; ++i)
      m.boundaries[i] = boundary_from_json(boundaries[i]);
    model.mlc = std::move(m);
  }
  if (j.contains("knn")) {
    KnnModel m;
    const auto& jk = j["knn"];
    m.k = jk.at("k").get<int>();
    m.train = matrix_from_json(jk.at("train"));
    m.labels = levels_from_json(jk.at("labels"));
    m.mean = vector_from_json(jk.at("mean"));
    m.stddev = vector_from_json(jk.at("stddev"));
    m.active = active_from_json(jk.at("active"));
    model.knn = std::move(m);
  }
  if (j.contains("svm")) {
    SvmModel m;
    const auto& js = j["svm"];
    m.C = js.at("C").get<double>();
    m.gamma = js.at("gamma").get<double>();
    m.tau = js.at("tau").get<double>();
    m.mean = vector_from_json(js.at("mean"));
    m.stddev = vector_from_json(js.at("stddev"));
    m.active = active_from_json(js.at("active"));
    m.classes = levels_from_json(js.at("classes"));
    for (const auto& jm : js.at("machines")) {
      SvmBinaryMachine machine;
      machine.positive = level_from_tag(jm.at("positive"));
      machine.negative = level_from_tag(jm.at("negative"));
      machine.support_vectors = matrix_from_json(jm.at("support_vectors"));
      machine.coef = vector_from_json(jm.at("coef"));
      machine.bias = jm.at("bias").get<double>();
      machine.kkt_gap = jm.value("kkt_gap", 0.0);
      machine.dual_objective = jm.value("dual_objective", 0.0);
      machine.iterations = jm.value("iterations", 0);
      m.machines.push_back(std::move(machine));
    }
    model.svm = std::move(m);
  }
  if (j.contains("lm")) model.lm = lm_from_json(j["lm"]);
  if (j.contains("tfidf")) model.tfidf = tfidf_from_json(j["tfidf"]);
  return model;
}

void save_report(std::ostream& out, const EvalReport& report) {
  ordered_json j;
  j["algorithm"] = report.algorithm;
  j["feature_set"] = report.feature_set;
  j["folds"] = report.folds;
  j["seed"] = report.seed;
  j["n_documents"] = report.n_documents;
  j["accuracy"] = report.accuracy;
  ordered_json per_fold = ordered_json::array();
  for (double a : report.per_fold_accuracy) per_fold.push_back(a);
  j["per_fold_accuracy"] = per_fold;
  ordered_json labels = ordered_json::array();
  for (Level l : kLevelsHardFirst) labels.push_back(to_string(l));
  ordered_json rows = ordered_json::array();
  for (Level truth : kLevelsHardFirst) {
    ordered_json row = ordered_json::array();
    for (Level predicted : kLevelsHardFirst)
      row.push_back(
          report.confusion(level_index(truth), level_index(predicted)));
    rows.push_back(row);
  }
  j["confusion"] = ordered_json{{"labels", labels}, {"matrix", rows}};
  out << j.dump(2) << "\n";
}

void save_confusion_csv(std::ostream& out, const EvalReport& report) {
  out << "true_level";
  for (Level predicted : kLevelsHardFirst)
    out << ",predicted_" << to_string(predicted);
  out << "\n";
  for (Level truth : kLevelsHardFirst) {
    out << to_string(truth);
    for (Level predicted : kLevelsHardFirst)
      out << ","
          << report.confusion(level_index(truth), level_index(predicted));
    out << "\n";
  }
}

}  // namespace textlevel
