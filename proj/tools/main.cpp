// Command-line front end: corpus ingestion, template extraction, corpus
// statistics, feature dumps, model training/prediction, cross-validated
// evaluation and synthetic corpus generation.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "textlevel/classifiers.hpp"
#include "textlevel/corpus.hpp"
#include "textlevel/extractor.hpp"
#include "textlevel/features.hpp"
#include "textlevel/level.hpp"
#include "textlevel/model_io.hpp"
#include "textlevel/synth.hpp"
#include "textlevel/templates.hpp"

namespace {

using namespace textlevel;

// Exit codes: 0 success, 2 usage error, 3 input format error,
// 4 data invariant violation, 1 anything else.
constexpr int kExitUsage = 2;
constexpr int kExitFormat = 3;
constexpr int kExitInvariant = 4;

struct InputStream {
  std::istream& get() { return file.is_open() ? file : std::cin; }
  std::ifstream file;
};

struct OutputStream {
  std::ostream& get() { return file.is_open() ? file : std::cout; }
  std::ofstream file;
};

std::unique_ptr<InputStream> open_input(const std::string& path) {
  auto in = std::make_unique<InputStream>();
  if (path != "-") {
    in->file.open(path);
    if (!in->file) throw FormatError("cannot open input file \"" + path + "\"");
  }
  return in;
}

std::unique_ptr<OutputStream> open_output(const std::string& path) {
  auto out = std::make_unique<OutputStream>();
  if (path != "-") {
    out->file.open(path);
    if (!out->file)
      throw FormatError("cannot open output file \"" + path + "\"");
  }
  return out;
}

Corpus read_corpus(const std::string& path) {
  auto in = open_input(path);
  return load_corpus(in->get());
}

TemplateLibrary read_library(const std::string& path) {
  auto in = open_input(path);
  return load_library(in->get());
}

Level parse_level_flag(const std::string& tag) {
  const auto l = level_from_string(tag);
  if (!l) throw FormatError("unknown level tag \"" + tag + "\"");
  return *l;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// ---------------------------------------------------------------------
// Shared option bundles.

struct CorpusLibraryArgs {
  std::string corpus_path;
  std::string library_path;

  void attach(CLI::App* cmd, bool library_required = true) {
    cmd->add_option("--corpus", corpus_path, "corpus file (JSONL)")
        ->required();
    auto* lib = cmd->add_option("--library", library_path,
                                "template library file");
    if (library_required) lib->required();
  }
};

struct ModelArgs {
  std::string algo = "mlc";
  std::string features = "template";
  std::string count_mode = "set";
  int knn_k = 5;
  double svm_c = 1.0;
  double svm_gamma = -1.0;
  double svm_tau = 1e-3;
  bool svm_grid = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--algo", algo, "mlc | knn | svm")
        ->check(CLI::IsMember({"mlc", "knn", "svm"}));
    cmd->add_option("--features", features,
                    "template | baseline | tfidf | hybrid")
        ->check(CLI::IsMember({"template", "baseline", "tfidf", "hybrid"}));
    cmd->add_option("--count-mode", count_mode,
                    "set (once per sentence) | occurrence")
        ->check(CLI::IsMember({"set", "occurrence"}));
    cmd->add_option("--knn-k", knn_k, "kNN neighbor count (odd)");
    cmd->add_option("--svm-c", svm_c, "SVM penalty C");
    cmd->add_option("--svm-gamma", svm_gamma,
                    "RBF width (<=0: 1/feature_count)");
    cmd->add_option("--svm-tau", svm_tau, "SMO KKT stopping tolerance");
    cmd->add_flag("--svm-grid", svm_grid,
                  "coarse power-of-4 grid search for C and gamma");
  }

  CountMode mode() const {
    return count_mode == "occurrence" ? CountMode::kOccurrence
                                      : CountMode::kSet;
  }
  CvOptions cv_options() const {
    CvOptions opts;
    opts.knn_k = knn_k;
    opts.svm_c = svm_c;
    opts.svm_gamma = svm_gamma;
    opts.svm_tau = svm_tau;
    opts.svm_grid = svm_grid;
    opts.mode = mode();
    return opts;
  }
};

// Feature assembly shared by featurize / train / predict. The library is
// needed for template features; lm and tfidf are the artifacts fit on
// whatever corpus the caller chose.
std::vector<FeatureVector> assemble_features(const Corpus& corpus,
                                             FeatureSetId set,
                                             const TemplateLibrary* lib,
                                             const BigramLM* lm,
                                             const TfidfModel* tfidf,
                                             CountMode mode) {
  std::vector<FeatureVector> out;
  out.reserve(corpus.documents.size());
  for (const Document& doc : corpus.documents) {
    switch (set) {
      case FeatureSetId::kTemplate:
        out.push_back(template_features(doc, *lib, mode));
        break;
      case FeatureSetId::kBaseline:
        out.push_back(baseline_features(doc, *lm));
        break;
      case FeatureSetId::kTfidf: {
        FeatureVector fv;
        fv.doc_id = doc.doc_id;
        fv.names = tfidf->terms;
        fv.values = tfidf_vector(*tfidf, doc);
        out.push_back(std::move(fv));
        break;
      }
      case FeatureSetId::kHybrid: {
        FeatureVector tpl = template_features(doc, *lib, mode);
        const FeatureVector base = baseline_features(doc, *lm);
        FeatureVector fv;
        fv.doc_id = doc.doc_id;
        fv.names = tpl.names;
        fv.names.insert(fv.names.end(), base.names.begin(), base.names.end());
        fv.values.resize(tpl.values.size() + base.values.size());
        fv.values << tpl.values, base.values;
        out.push_back(std::move(fv));
        break;
      }
    }
  }
  return out;
}

void write_feature_csv(std::ostream& out,
                       const std::vector<FeatureVector>& rows) {
  if (rows.empty()) return;
  out << "doc_id";
  for (const std::string& name : rows.front().names) out << "," << name;
  out << "\n";
  for (const FeatureVector& fv : rows) {
    out << fv.doc_id;
    for (Eigen::Index i = 0; i < fv.values.size(); ++i)
      out << "," << format_double(fv.values(i));
    out << "\n";
  }
}

// ---------------------------------------------------------------------
// Subcommand bodies.

int run_convert(const std::string& input, const std::string& dialect,
                const std::string& doc_id, const std::string& level_tag,
                const std::string& source, const std::string& output) {
  if (dialect != "cabocha") throw FormatError("unknown dialect \"" + dialect +
                                              "\"");
  auto in = open_input(input);
  Document doc;
  doc.doc_id = doc_id;
  doc.source = source;
  if (!level_tag.empty()) doc.level = parse_level_flag(level_tag);
  doc.sentences = convert_external(in->get(), ParserDialect::kCabochaLattice);
  if (doc.sentences.empty())
    throw InvariantError("converted document has no sentences");
  Corpus corpus;
  corpus.documents.push_back(std::move(doc));
  auto out = open_output(output);
  save_corpus(out->get(), corpus);
  return 0;
}

int run_validate(const std::string& corpus_path) {
  auto in = open_input(corpus_path);
  std::vector<std::string> violations;
  load_corpus_permissive(in->get(), &violations);
  for (const std::string& v : violations) std::cout << v << "\n";
  if (violations.empty()) {
    std::cout << "ok\n";
    return 0;
  }
  return kExitInvariant;
}

int run_extract(const CorpusLibraryArgs& args, const std::string& output) {
  const Corpus corpus = read_corpus(args.corpus_path);
  const TemplateLibrary lib = read_library(args.library_path);
  auto out = open_output(output);
  out->get() << "doc_id,sentence_index,template_id,level,start,end\n";
  for (const Document& doc : corpus.documents) {
    for (const ExtractionResult& result : extract_document(doc, lib)) {
      std::set<std::tuple<int, int, std::string>> rows;
      for (const Occurrence& occ : result.occurrences)
        rows.emplace(occ.span.start, occ.span.end, occ.template_id);
      for (const auto& [start, end, id] : rows) {
        out->get() << doc.doc_id << "," << result.sentence_index << "," << id
                   << "," << to_string(lib.find(id)->spec.level) << ","
                   << start << "," << end << "\n";
      }
    }
  }
  return 0;
}

int run_stats(const CorpusLibraryArgs& args, const std::string& distribution,
              const std::string& per100, CountMode mode) {
  const Corpus corpus = read_corpus(args.corpus_path);
  const TemplateLibrary lib = read_library(args.library_path);
  const StatTables tables = corpus_stats(corpus, lib, mode);
  auto dist_out = open_output(distribution);
  save_level_matrix_csv(dist_out->get(), tables.distribution);
  if (distribution == "-" && per100 == "-") dist_out->get() << "\n";
  auto per100_out = open_output(per100);
  save_level_matrix_csv(per100_out->get(), tables.per100);
  return 0;
}

int run_featurize(const CorpusLibraryArgs& args, const ModelArgs& margs,
                  const std::string& output) {
  const auto set = feature_set_from_string(margs.features);
  const Corpus corpus = read_corpus(args.corpus_path);
  std::optional<TemplateLibrary> lib;
  if (set == FeatureSetId::kTemplate || set == FeatureSetId::kHybrid) {
    if (args.library_path.empty())
      throw FormatError("--library is required for template features");
    lib = read_library(args.library_path);
  }
  // Standalone dumps fit the language model and tf-idf vocabulary on the
  // input corpus itself; fold-aware fitting happens inside `evaluate`.
  std::optional<BigramLM> lm;
  if (set == FeatureSetId::kBaseline || set == FeatureSetId::kHybrid)
    lm = train_lm(corpus);
  std::optional<TfidfModel> tfidf;
  if (set == FeatureSetId::kTfidf) tfidf = fit_tfidf(corpus.documents);

  const auto rows = assemble_features(
      corpus, *set, lib ? &*lib : nullptr, lm ? &*lm : nullptr,
      tfidf ? &*tfidf : nullptr, margs.mode());
  auto out = open_output(output);
  write_feature_csv(out->get(), rows);
  return 0;
}

int run_train(const CorpusLibraryArgs& args, const ModelArgs& margs,
              const std::string& output) {
  const auto algo = algorithm_from_string(margs.algo);
  const auto set = feature_set_from_string(margs.features);
  if (algo == AlgorithmId::kMlc && set != FeatureSetId::kTemplate)
    throw InvariantError("mlc runs on the template feature set");

  const Corpus corpus = read_corpus(args.corpus_path);
  std::optional<TemplateLibrary> lib;
  if (set == FeatureSetId::kTemplate || set == FeatureSetId::kHybrid) {
    if (args.library_path.empty())
      throw FormatError("--library is required for template features");
    lib = read_library(args.library_path);
  }

  TrainedModel model;
  model.algorithm = *algo;
  model.feature_set = *set;
  model.mode = margs.mode();

  if (set == FeatureSetId::kBaseline || set == FeatureSetId::kHybrid)
    model.lm = train_lm(corpus);
  if (set == FeatureSetId::kTfidf) model.tfidf = fit_tfidf(corpus.documents);

  if (algo == AlgorithmId::kMlc) {
    BoundaryTrainOptions opts;
    opts.mode = margs.mode();
    model.mlc = train_mlc(corpus.documents, *lib, opts);
    for (const LinearBoundaryModel& b : model.mlc->boundaries)
      if (b.non_separable)
        std::cerr << "warning: boundary " << to_string(b.boundary)
                  << " is non-separable on the training data\n";
  } else {
    const auto rows = assemble_features(
        corpus, *set, lib ? &*lib : nullptr,
        model.lm ? &*model.lm : nullptr,
        model.tfidf ? &*model.tfidf : nullptr, margs.mode());
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()),
                      rows.empty() ? 0 : rows.front().values.size());
    std::vector<Level> y;
    for (size_t i = 0; i < rows.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = rows[i].values.transpose();
      const auto& doc = corpus.documents[i];
      if (!doc.level)
        throw InvariantError("unlabeled document \"" + doc.doc_id + "\"");
      y.push_back(*doc.level);
    }
    if (algo == AlgorithmId::kKnn) {
      model.knn = train_knn(x, y, margs.knn_k);
    } else {
      model.svm = train_svm(x, y, margs.svm_c, margs.svm_gamma, margs.svm_tau);
    }
  }

  auto out = open_output(output);
  save_model(out->get(), model);
  return 0;
}

int run_predict(const std::string& model_path, const std::string& corpus_path,
                const std::string& library_path, const std::string& output) {
  auto model_in = open_input(model_path);
  const TrainedModel model = load_model(model_in->get());
  const Corpus corpus = read_corpus(corpus_path);

  std::optional<TemplateLibrary> lib;
  if (model.feature_set == FeatureSetId::kTemplate ||
      model.feature_set == FeatureSetId::kHybrid) {
    if (library_path.empty())
      throw FormatError("--library is required by this model");
    lib = read_library(library_path);
  }

  auto out = open_output(output);
  if (model.algorithm == AlgorithmId::kMlc) {
    out->get() << "doc_id,predicted_level,harder_than_N5,harder_than_N4,"
                  "harder_than_N3,harder_than_N2\n";
    for (const Document& doc : corpus.documents) {
      const DocTemplateCounts counts =
          doc_template_counts(doc, *lib, model.mode);
      std::array<bool, 4> verdicts{};
      const Level predicted =
          predict_mlc_counts(*model.mlc, counts, &verdicts);
      out->get() << doc.doc_id << "," << to_string(predicted);
      for (bool v : verdicts) out->get() << "," << (v ? "yes" : "no");
      out->get() << "\n";
    }
    return 0;
  }

  const auto rows = assemble_features(
      corpus, model.feature_set, lib ? &*lib : nullptr,
      model.lm ? &*model.lm : nullptr,
      model.tfidf ? &*model.tfidf : nullptr, model.mode);
  out->get() << "doc_id,predicted_level\n";
  for (const FeatureVector& fv : rows) {
    const Level predicted = model.algorithm == AlgorithmId::kKnn
                                ? predict_knn(*model.knn, fv.values)
                                : predict_svm(*model.svm, fv.values);
    out->get() << fv.doc_id << "," << to_string(predicted) << "\n";
  }
  return 0;
}

int run_evaluate(const CorpusLibraryArgs& args, const ModelArgs& margs, int k,
                 std::uint64_t seed, const std::string& report_path,
                 const std::string& confusion_path) {
  const Corpus corpus = read_corpus(args.corpus_path);
  const TemplateLibrary lib = read_library(args.library_path);
  const EvalReport report = cross_validate(
      corpus, lib, *feature_set_from_string(margs.features),
      *algorithm_from_string(margs.algo), k, seed, margs.cv_options());
  auto out = open_output(report_path);
  save_report(out->get(), report);
  if (!confusion_path.empty()) {
    auto confusion = open_output(confusion_path);
    save_confusion_csv(confusion->get(), report);
  }
  return 0;
}

int run_plot_data(const CorpusLibraryArgs& args, const std::string& boundary,
                  CountMode mode, const std::string& output) {
  const Corpus corpus = read_corpus(args.corpus_path);
  const TemplateLibrary lib = read_library(args.library_path);
  const Level level = parse_level_flag(boundary);
  auto out = open_output(output);
  out->get() << "doc_id,on_boundary,outside_boundary,level\n";
  for (const Document& doc : corpus.documents) {
    const BoundaryFeatures f = boundary_features(doc, lib, level, mode);
    out->get() << doc.doc_id << "," << format_double(f.on_boundary) << ","
               << format_double(f.outside_boundary) << ","
               << (doc.level ? to_string(*doc.level) : std::string()) << "\n";
  }
  return 0;
}

int run_synth(const std::string& profile_path, int docs_per_level,
              int sentences_per_doc, std::uint64_t seed,
              const std::string& corpus_out, const std::string& library_out) {
  auto in = open_input(profile_path);
  const SynthProfile profile = load_profile(in->get());
  const Corpus corpus =
      generate_synthetic(profile, docs_per_level, sentences_per_doc, seed);
  auto out = open_output(corpus_out);
  save_corpus(out->get(), corpus);
  if (!library_out.empty()) {
    auto lib_out = open_output(library_out);
    save_library(lib_out->get(), synthetic_library());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Text difficulty evaluation over dependency-parsed corpora"};
  app.require_subcommand(1);

  // convert
  auto* convert = app.add_subcommand(
      "convert", "Convert external parser output to the corpus format");
  std::string convert_input = "-";
  std::string convert_dialect = "cabocha";
  std::string convert_doc_id;
  std::string convert_level;
  std::string convert_source = "other";
  std::string convert_output = "-";
  convert->add_option("--input", convert_input, "parser output file or -");
  convert->add_option("--dialect", convert_dialect, "parser dialect")
      ->check(CLI::IsMember({"cabocha"}));
  convert->add_option("--doc-id", convert_doc_id, "document id")->required();
  convert->add_option("--level", convert_level, "level tag N1..N5 (optional)");
  convert->add_option("--source", convert_source, "source tag");
  convert->add_option("--out", convert_output, "output corpus file or -");

  // validate
  auto* validate_cmd =
      app.add_subcommand("validate", "Check corpus invariants");
  std::string validate_corpus;
  validate_cmd->add_option("--corpus", validate_corpus, "corpus file")
      ->required();

  // extract
  auto* extract_cmd = app.add_subcommand(
      "extract", "Emit identified templates per sentence as CSV");
  CorpusLibraryArgs extract_args;
  extract_args.attach(extract_cmd);
  std::string extract_output = "-";
  extract_cmd->add_option("--out", extract_output, "output file or -");

  // stats
  auto* stats_cmd = app.add_subcommand(
      "stats", "Distribution and per-100-sentence template tables");
  CorpusLibraryArgs stats_args;
  stats_args.attach(stats_cmd);
  std::string stats_distribution = "-";
  std::string stats_per100 = "-";
  ModelArgs stats_margs;
  stats_cmd->add_option("--distribution", stats_distribution,
                        "distribution CSV output");
  stats_cmd->add_option("--per100", stats_per100, "per-100 CSV output");
  stats_cmd->add_option("--count-mode", stats_margs.count_mode,
                        "set | occurrence")
      ->check(CLI::IsMember({"set", "occurrence"}));

  // featurize
  auto* featurize_cmd =
      app.add_subcommand("featurize", "Emit one feature row per document");
  CorpusLibraryArgs featurize_args;
  featurize_args.attach(featurize_cmd, /*library_required=*/false);
  ModelArgs featurize_margs;
  std::string featurize_output = "-";
  featurize_cmd
      ->add_option("--set", featurize_margs.features,
                   "template | baseline | tfidf | hybrid")
      ->check(CLI::IsMember({"template", "baseline", "tfidf", "hybrid"}));
  featurize_cmd->add_option("--count-mode", featurize_margs.count_mode,
                            "set | occurrence")
      ->check(CLI::IsMember({"set", "occurrence"}));
  featurize_cmd->add_option("--out", featurize_output, "output file or -");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a difficulty model");
  CorpusLibraryArgs train_args;
  train_args.attach(train_cmd, /*library_required=*/false);
  ModelArgs train_margs;
  train_margs.attach(train_cmd);
  std::string train_output;
  train_cmd->add_option("--out", train_output, "model file")->required();

  // predict
  auto* predict_cmd =
      app.add_subcommand("predict", "Predict levels with a trained model");
  std::string predict_model;
  std::string predict_corpus;
  std::string predict_library;
  std::string predict_output = "-";
  predict_cmd->add_option("--model", predict_model, "model file")->required();
  predict_cmd->add_option("--corpus", predict_corpus, "corpus file")
      ->required();
  predict_cmd->add_option("--library", predict_library,
                          "template library file");
  predict_cmd->add_option("--out", predict_output, "output file or -");

  // evaluate
  auto* evaluate_cmd = app.add_subcommand(
      "evaluate", "Stratified k-fold cross validation report");
  CorpusLibraryArgs evaluate_args;
  evaluate_args.attach(evaluate_cmd);
  ModelArgs evaluate_margs;
  evaluate_margs.attach(evaluate_cmd);
  int evaluate_k = 5;
  std::uint64_t evaluate_seed = 0;
  std::string evaluate_report = "-";
  std::string evaluate_confusion;
  evaluate_cmd->add_option("--k", evaluate_k, "fold count");
  evaluate_cmd->add_option("--seed", evaluate_seed, "shuffle seed");
  evaluate_cmd->add_option("--report", evaluate_report, "report file or -");
  evaluate_cmd->add_option("--confusion", evaluate_confusion,
                           "confusion matrix CSV file");

  // plot-data
  auto* plot_cmd = app.add_subcommand(
      "plot-data", "Per-document boundary features for plotting");
  CorpusLibraryArgs plot_args;
  plot_args.attach(plot_cmd);
  std::string plot_boundary;
  ModelArgs plot_margs;
  std::string plot_output = "-";
  plot_cmd->add_option("--boundary", plot_boundary, "boundary level N2..N5")
      ->required();
  plot_cmd->add_option("--count-mode", plot_margs.count_mode,
                       "set | occurrence")
      ->check(CLI::IsMember({"set", "occurrence"}));
  plot_cmd->add_option("--out", plot_output, "output file or -");

  // synth
  auto* synth_cmd = app.add_subcommand(
      "synth", "Generate a synthetic corpus from a per-100 profile");
  std::string synth_profile;
  int synth_docs = 100;
  int synth_sentences = 20;
  std::uint64_t synth_seed = 0;
  std::string synth_corpus_out = "-";
  std::string synth_library_out;
  synth_cmd->add_option("--profile", synth_profile, "per-100 profile CSV")
      ->required();
  synth_cmd->add_option("--docs-per-level", synth_docs, "documents per level");
  synth_cmd->add_option("--sentences-per-doc", synth_sentences,
                        "sentences per document");
  synth_cmd->add_option("--seed", synth_seed, "generator seed");
  synth_cmd->add_option("--out-corpus", synth_corpus_out,
                        "corpus output file or -");
  synth_cmd->add_option("--out-library", synth_library_out,
                        "write the matching synthetic library here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (convert->parsed())
      return run_convert(convert_input, convert_dialect, convert_doc_id,
                         convert_level, convert_source, convert_output);
    if (validate_cmd->parsed()) return run_validate(validate_corpus);
    if (extract_cmd->parsed())
      return run_extract(extract_args, extract_output);
    if (stats_cmd->parsed())
      return run_stats(stats_args, stats_distribution, stats_per100,
                       stats_margs.mode());
    if (featurize_cmd->parsed())
      return run_featurize(featurize_args, featurize_margs, featurize_output);
    if (train_cmd->parsed())
      return run_train(train_args, train_margs, train_output);
    if (predict_cmd->parsed())
      return run_predict(predict_model, predict_corpus, predict_library,
                         predict_output);
    if (evaluate_cmd->parsed())
      return run_evaluate(evaluate_args, evaluate_margs, evaluate_k,
                          evaluate_seed, evaluate_report, evaluate_confusion);
    if (plot_cmd->parsed())
      return run_plot_data(plot_args, plot_boundary, plot_margs.mode(),
                           plot_output);
    if (synth_cmd->parsed())
      return run_synth(synth_profile, synth_docs, synth_sentences, synth_seed,
                       synth_corpus_out, synth_library_out);
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const InvariantError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const TemplateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
