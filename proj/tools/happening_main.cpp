// Command-line front-end: pipeline orchestration plus per-stage subcommands.
// Exit codes: 0 success, 1 config, 2 load, 3 training, 4 prediction,
// 5 inference, 6 evaluation.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "happening/pipeline.hpp"
#include "happening/rng.hpp"

namespace fs = std::filesystem;
using namespace happening;

namespace {

struct ParsedArgs {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> entries;  // flag assignments in order

  PipelineConfig build() const {
    PipelineConfig cfg;
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    for (const auto& [key, value] : entries) apply_config_entry(cfg, key, value);
    return cfg;
  }
  bool has(const std::string& key) const {
    for (const auto& [k, v] : entries) {
      (void)v;
      if (k == key) return true;
    }
    return false;
  }
};

void add_common_options(CLI::App* cmd, ParsedArgs& args) {
  cmd->add_option_function<std::string>(
      "--config", [&args](const std::string& v) { args.config_path = v; },
      "flat key = value configuration file (flags override it)");
  auto bind = [cmd, &args](const std::string& flag, const std::string& key,
                           const std::string& desc) {
    cmd->add_option_function<std::string>(
        flag, [&args, key](const std::string& v) { args.entries.emplace_back(key, v); }, desc);
  };
  bind("--events", "events", "events.tsv path");
  bind("--relations", "relations", "relations.tsv path");
  bind("--series", "series", "series.tsv path (optional)");
  bind("--out", "out", "output directory");
  bind("--seed", "seed", "run seed (required; all randomness derives from it)");
  bind("--classifier", "classifier", "classifier kind: log|rf");
  bind("--features", "features", "feature groups, comma separated: tex,stp,emb");
  bind("--constraint", "constraint", "inference constraint: bsl|evo|int|win|cov|cwi|ecw");
  bind("--window-a", "window_a", "window constraint: editions before");
  bind("--window-b", "window_b", "window constraint: editions after");
  bind("--alpha", "alpha", "coverage threshold in (0,1]");
  bind("--candidates-k", "candidates_k", "candidate sub-events per parent");
  bind("--folds", "folds", "cross-validation folds");
  bind("--corruption-factor", "corruption_factors", "corruption factor(s), comma separated");
  bind("--threads", "threads", "worker cap for parallel stages");
  bind("--impurity-threshold", "impurity_threshold", "series Gini impurity threshold");
  bind("--excluded-types", "excluded_types", "event types excluded from series");
  bind("--emb-dim", "emb_dim", "embedding vector size");
  bind("--emb-epochs", "emb_epochs", "embedding training epochs");
  bind("--emb-lr", "emb_lr", "embedding SGD learning rate");
  bind("--emb-margin", "emb_margin", "embedding ranking margin");
  bind("--rf-trees", "rf_trees", "random forest size");
  bind("--log-iterations", "log_iterations", "logistic regression iterations");
  cmd->add_flag_callback(
      "--skip-prediction",
      [&args] { args.entries.emplace_back("skip_prediction", "true"); },
      "run inference on the raw graph without the prediction stage");
  cmd->add_flag_callback(
      "--dump-forests", [&args] { args.entries.emplace_back("dump_forests", "true"); },
      "write one indented tree dump per series");
}

int protect(Stage stage, const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const StageError& e) {
    std::cerr << e.what() << '\n';
    return e.exit_code();
  } catch (const GraphLoadError& e) {
    std::cerr << "[load] " << e.what() << '\n';
    return static_cast<int>(Stage::Load);
  } catch (const std::exception& e) {
    std::cerr << '[' << to_string(stage) << "] " << e.what() << '\n';
    return static_cast<int>(stage);
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int cmd_pipeline(const ParsedArgs& args) {
  return protect(Stage::Config, [&] {
    const PipelineConfig cfg = args.build();
    const PipelineResult result = run_pipeline(cfg);
    std::cout << "predicted relations: " << result.predicted_relations << '\n'
              << "inferred events:     " << result.inferred_events << '\n'
              << "outputs under " << cfg.out_dir << ":\n";
    for (const auto& [name, path] : result.outputs) std::cout << "  " << name << ": " << path << '\n';
  });
}

int cmd_validate(const ParsedArgs& args) {
  return protect(Stage::Load, [&] {
    const PipelineConfig cfg = args.build();
    cfg.validate(true, false, false);
    const EventGraph g = load_graph(cfg.events_path, cfg.relations_path, cfg.series_path);
    const ValidationReport report = validate_graph(g);
    for (const auto& f : report.warnings) {
      std::cout << f.code << '\t' << f.offending_id << '\t' << f.message << '\n';
    }
    std::cout << "errors: " << report.error_count << ", findings: " << report.warnings.size()
              << '\n';
  });
}

int cmd_train(const ParsedArgs& args) {
  const PipelineConfig cfg = args.build();
  int rc = protect(Stage::Config, [&] { cfg.validate(); });
  if (rc) return rc;
  LoadedInputs loaded;
  rc = protect(Stage::Load, [&] { loaded = pipeline_load(cfg); });
  if (rc) return rc;
  return protect(Stage::Training, [&] {
    fs::create_directories(cfg.out_dir);
    CvOptions opt;
    opt.kind = cfg.classifier;
    opt.feature_groups = cfg.feature_groups;
    opt.embed = cfg.embed;
    opt.embed.seed = mix64(*cfg.seed ^ fnv1a64("embedding"));
    opt.logreg = cfg.logreg;
    opt.forest = cfg.forest;
    opt.threads = cfg.threads;
    const CvReport report =
        cross_validate(loaded.graph, loaded.prep.forests, cfg.folds, *cfg.seed, opt);
    std::cout << report.table();
    write_file(fs::path(cfg.out_dir) / "cv_report.json", report.json() + "\n");

    const TrainedArtifacts trained = pipeline_train(cfg, loaded.graph, loaded.prep);
    trained.model.save((fs::path(cfg.out_dir) / "embeddings.bin").string());
    trained.classifier.save((fs::path(cfg.out_dir) / "classifier.bin").string());
    write_feature_csv((fs::path(cfg.out_dir) / "features.csv").string(), trained.pairs,
                      loaded.graph, trained.index, &trained.model);
    for (const auto& w : trained.warnings) std::cerr << "warning: " << w << '\n';
  });
}

int cmd_predict(const ParsedArgs& args) {
  const PipelineConfig cfg = args.build();
  int rc = protect(Stage::Config, [&] { cfg.validate(); });
  if (rc) return rc;
  LoadedInputs loaded;
  rc = protect(Stage::Load, [&] { loaded = pipeline_load(cfg); });
  if (rc) return rc;
  TrainedArtifacts trained;
  rc = protect(Stage::Training,
               [&] { trained = pipeline_train(cfg, loaded.graph, loaded.prep); });
  if (rc) return rc;
  return protect(Stage::Prediction, [&] {
    fs::create_directories(cfg.out_dir);
    PredictionOptions popt;
    popt.candidates_k = cfg.candidates_k;
    popt.threads = cfg.threads;
    const auto predicted = predict_sub_events(loaded.graph, loaded.prep.forests,
                                              trained.classifier, trained.index, &trained.model,
                                              popt);
    write_predicted_tsv((fs::path(cfg.out_dir) / "predicted_relations.tsv").string(), predicted);
    std::cout << "predicted relations: " << predicted.size() << '\n';
  });
}

int cmd_infer(const ParsedArgs& args) {
  const PipelineConfig cfg = args.build();
  int rc = protect(Stage::Config, [&] { cfg.validate(); });
  if (rc) return rc;
  LoadedInputs loaded;
  rc = protect(Stage::Load, [&] { loaded = pipeline_load(cfg); });
  if (rc) return rc;
  return protect(Stage::Inference, [&] {
    fs::create_directories(cfg.out_dir);
    auto [delta, report] = run_inference(loaded.graph, loaded.prep.series, cfg.inference);
    write_inferred_tsv((fs::path(cfg.out_dir) / "inferred_events.tsv").string(), delta.events);
    write_file(fs::path(cfg.out_dir) / "inference_report.json", report.json() + "\n");
    apply_delta(loaded.graph, loaded.prep.series, delta);
    save_graph(loaded.graph, (fs::path(cfg.out_dir) / "events_full.tsv").string(),
               (fs::path(cfg.out_dir) / "relations_full.tsv").string(),
               (fs::path(cfg.out_dir) / "series_full.tsv").string());
    std::cout << "inferred events: " << delta.events.size() << '\n';
  });
}

int cmd_evaluate_recall(const ParsedArgs& args) {
  const PipelineConfig cfg = args.build();
  int rc = protect(Stage::Config, [&] { cfg.validate(); });
  if (rc) return rc;
  EventGraph graph;
  rc = protect(Stage::Load, [&] {
    graph = load_graph(cfg.events_path, cfg.relations_path, cfg.series_path);
  });
  if (rc) return rc;
  return protect(Stage::Evaluation, [&] {
    fs::create_directories(cfg.out_dir);
    std::vector<Constraint> constraints;
    if (args.has("constraint")) {
      constraints.push_back(cfg.inference.constraint);
    } else {
      constraints = {Constraint::BSL, Constraint::EVO, Constraint::INT, Constraint::WIN,
                     Constraint::COV, Constraint::CWI, Constraint::ECW};
    }
    const auto cells =
        evaluate_recall(graph, constraints, cfg.corruption_factors, cfg.inference,
                        cfg.impurity_threshold, cfg.excluded_types, *cfg.seed);
    const std::string json = recall_report_json(cells);
    write_file(fs::path(cfg.out_dir) / "recall_report.json", json + "\n");
    std::cout << json << '\n';
  });
}

int cmd_generate_corpus(const ParsedArgs& args, const SyntheticCorpusSpec& spec_in) {
  const PipelineConfig cfg = args.build();
  int rc = protect(Stage::Config, [&] {
    cfg.validate(false, true, true);
    SyntheticCorpusSpec spec = spec_in;
    spec.seed = *cfg.seed;
    spec.validate();
  });
  if (rc) return rc;
  return protect(Stage::Evaluation, [&] {
    SyntheticCorpusSpec spec = spec_in;
    spec.seed = *cfg.seed;
    const SyntheticCorpus corpus = generate_synthetic_corpus(spec);
    fs::create_directories(cfg.out_dir);
    save_graph(corpus.graph, (fs::path(cfg.out_dir) / "events.tsv").string(),
               (fs::path(cfg.out_dir) / "relations.tsv").string(),
               (fs::path(cfg.out_dir) / "series.tsv").string());
    nlohmann::json j;
    for (const auto& slot : corpus.catalog) {
      j[slot.series_id] = {{"template", slot.label_template}, {"present", slot.present}};
    }
    write_file(fs::path(cfg.out_dir) / "corpus_catalog.json", j.dump(2) + "\n");
    std::cout << "events: " << corpus.graph.events().size() << ", series: "
              << corpus.series.size() << '\n';
  });
}

int cmd_sample(const ParsedArgs& args, const std::string& input, std::size_t n) {
  const PipelineConfig cfg = args.build();
  int rc = protect(Stage::Config, [&] { cfg.validate(true, true, true); });
  if (rc) return rc;
  EventGraph graph;
  rc = protect(Stage::Load, [&] {
    graph = load_graph(cfg.events_path, cfg.relations_path, cfg.series_path);
  });
  if (rc) return rc;
  return protect(Stage::Evaluation, [&] {
    std::ifstream in(input);
    if (!in) throw std::runtime_error("cannot open " + input);
    auto label_of = [&](const std::string& id) {
      return graph.has_event(id) ? graph.event(id).label : id;
    };
    std::vector<AnnotationItem> items;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::vector<std::string> fields;
      std::stringstream ss(line);
      std::string field;
      while (std::getline(ss, field, '\t')) fields.push_back(field);
      if (fields.size() >= 9) {
        // inferred_events.tsv: id, label, ..., parent_id at column 6
        items.push_back({fields[0], fields[1], label_of(fields[5])});
      } else if (fields.size() >= 2) {
        // predicted_relations.tsv: sub, parent, ...
        items.push_back({fields[0], label_of(fields[0]), label_of(fields[1])});
      }
    }
    fs::create_directories(cfg.out_dir);
    sample_for_annotation(items, n, *cfg.seed,
                          (fs::path(cfg.out_dir) / "annotation_sample.tsv").string());
    std::cout << "sampled " << n << " of " << items.size() << '\n';
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"event series completion toolkit"};
  app.require_subcommand(1);

  ParsedArgs args;
  SyntheticCorpusSpec corpus_spec;
  std::string sample_input;
  std::size_t sample_n = 100;

  auto* pipeline = app.add_subcommand("pipeline", "run the full completion pipeline");
  add_common_options(pipeline, args);
  auto* train = app.add_subcommand("train", "cross-validate and train the classifier");
  add_common_options(train, args);
  auto* predict = app.add_subcommand("predict", "iterative sub-event relation prediction");
  add_common_options(predict, args);
  auto* infer = app.add_subcommand("infer", "event inference without prediction");
  add_common_options(infer, args);
  auto* recall = app.add_subcommand("evaluate-recall", "corruption/reconstruction experiment");
  add_common_options(recall, args);
  auto* corpus = app.add_subcommand("generate-corpus", "write a synthetic benchmark corpus");
  add_common_options(corpus, args);
  corpus->add_option("--series-count", corpus_spec.series_count, "number of series");
  corpus->add_option("--editions", corpus_spec.editions_per_series, "editions per series");
  corpus->add_option("--depth", corpus_spec.depth, "sub-tree depth");
  corpus->add_option("--branching", corpus_spec.branching, "children per node");
  corpus->add_option("--late-start", corpus_spec.late_start_fraction,
                     "fraction of slots starting late");
  corpus->add_option("--discontinued", corpus_spec.discontinued_fraction,
                     "fraction of slots ending early");
  corpus->add_option("--gap", corpus_spec.gap_fraction, "fraction of slots with gaps");
  auto* sample = app.add_subcommand("sample", "draw an annotation sample from an output file");
  add_common_options(sample, args);
  sample->add_option("--input", sample_input, "predicted_relations.tsv or inferred_events.tsv")
      ->required();
  sample->add_option("-n,--sample-size", sample_n, "sample size");
  auto* validate = app.add_subcommand("validate", "load a graph and report structural findings");
  add_common_options(validate, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return static_cast<int>(Stage::Config);
  }

  try {
    if (pipeline->parsed()) return cmd_pipeline(args);
    if (train->parsed()) return cmd_train(args);
    if (predict->parsed()) return cmd_predict(args);
    if (infer->parsed()) return cmd_infer(args);
    if (recall->parsed()) return cmd_evaluate_recall(args);
    if (corpus->parsed()) return cmd_generate_corpus(args, corpus_spec);
    if (sample->parsed()) return cmd_sample(args, sample_input, sample_n);
    if (validate->parsed()) return cmd_validate(args);
  } catch (const StageError& e) {
    std::cerr << e.what() << '\n';
    return e.exit_code();
  }
  return static_cast<int>(Stage::Config);
}
