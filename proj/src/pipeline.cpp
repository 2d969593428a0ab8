#include "happening/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "happening/rng.hpp"
#include "happening/text.hpp"

namespace happening {

namespace fs = std::filesystem;

std::string to_string(Stage s) {
  switch (s) {
    case Stage::Config: return "config";
    case Stage::Load: return "load";
    case Stage::Training: return "training";
    case Stage::Prediction: return "prediction";
    case Stage::Inference: return "inference";
    case Stage::Evaluation: return "evaluation";
  }
  return "?";
}

void PipelineConfig::validate(bool needs_inputs, bool needs_out, bool needs_seed) const {
  if (needs_seed && !seed) throw StageError(Stage::Config, "--seed is required");
  if (needs_inputs && (events_path.empty() || relations_path.empty())) {
    throw StageError(Stage::Config, "--events and --relations are required");
  }
  if (needs_out && out_dir.empty()) throw StageError(Stage::Config, "--out is required");
  if (threads < 1) throw StageError(Stage::Config, "--threads must be >= 1");
  if (candidates_k == 0) throw StageError(Stage::Config, "--candidates-k must be >= 1");
  if (impurity_threshold < 0.0 || impurity_threshold > 1.0) {
    throw StageError(Stage::Config, "impurity threshold must be in [0,1]");
  }
  try {
    embed.validate();
    inference.validate();
  } catch (const std::invalid_argument& e) {
    throw StageError(Stage::Config, e.what());
  }
  for (double f : corruption_factors) {
    if (f <= 0.0 || f >= 1.0) {
      throw StageError(Stage::Config, "corruption factors must lie in (0,1)");
    }
  }
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t idx = 0;
    std::uint64_t out = std::stoull(v, &idx);
    if (idx != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (...) {
    throw StageError(Stage::Config, key + ": expected an unsigned integer, got '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t idx = 0;
    int out = std::stoi(v, &idx);
    if (idx != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (...) {
    throw StageError(Stage::Config, key + ": expected an integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t idx = 0;
    double out = std::stod(v, &idx);
    if (idx != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (...) {
    throw StageError(Stage::Config, key + ": expected a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw StageError(Stage::Config, key + ": expected a boolean, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ',' || c == ';') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

unsigned parse_feature_groups(const std::string& key, const std::string& v) {
  unsigned groups = 0;
  for (const auto& item : split_list(v)) {
    if (item == "tex") {
      groups |= kGroupTex;
    } else if (item == "stp") {
      groups |= kGroupStp;
    } else if (item == "emb") {
      groups |= kGroupEmb;
    } else {
      throw StageError(Stage::Config, key + ": unknown feature group '" + item + "'");
    }
  }
  if (groups == 0) throw StageError(Stage::Config, key + ": no feature groups selected");
  return groups;
}

}  // namespace

void apply_config_entry(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "events") {
    cfg.events_path = value;
  } else if (key == "relations") {
    cfg.relations_path = value;
  } else if (key == "series") {
    cfg.series_path = value;
  } else if (key == "out") {
    cfg.out_dir = value;
  } else if (key == "seed") {
    cfg.seed = to_u64(key, value);
  } else if (key == "classifier") {
    try {
      cfg.classifier = classifier_kind_from_string(value);
    } catch (const std::invalid_argument& e) {
      throw StageError(Stage::Config, e.what());
    }
  } else if (key == "features") {
    cfg.feature_groups = parse_feature_groups(key, value);
  } else if (key == "constraint") {
    try {
      cfg.inference.constraint = constraint_from_string(value);
    } catch (const std::invalid_argument& e) {
      throw StageError(Stage::Config, e.what());
    }
  } else if (key == "window_a") {
    cfg.inference.window_before = to_int(key, value);
  } else if (key == "window_b") {
    cfg.inference.window_after = to_int(key, value);
  } else if (key == "alpha") {
    cfg.inference.coverage_alpha = to_double(key, value);
  } else if (key == "candidates_k") {
    cfg.candidates_k = static_cast<std::size_t>(to_u64(key, value));
  } else if (key == "folds") {
    cfg.folds = to_int(key, value);
  } else if (key == "skip_prediction") {
    cfg.skip_prediction = to_bool(key, value);
  } else if (key == "threads") {
    cfg.threads = to_int(key, value);
  } else if (key == "impurity_threshold") {
    cfg.impurity_threshold = to_double(key, value);
  } else if (key == "excluded_types") {
    cfg.excluded_types.clear();
    for (const auto& t : split_list(value)) cfg.excluded_types.insert(t);
  } else if (key == "dump_forests") {
    cfg.dump_forests = to_bool(key, value);
  } else if (key == "emb_dim") {
    cfg.embed.dim = to_int(key, value);
  } else if (key == "emb_epochs") {
    cfg.embed.epochs = to_int(key, value);
  } else if (key == "emb_lr") {
    cfg.embed.learning_rate = to_double(key, value);
  } else if (key == "emb_margin") {
    cfg.embed.margin = to_double(key, value);
  } else if (key == "emb_negatives") {
    cfg.embed.negatives_per_positive = to_int(key, value);
  } else if (key == "rf_trees") {
    cfg.forest.trees = to_int(key, value);
  } else if (key == "rf_max_depth") {
    cfg.forest.max_depth = to_int(key, value);
  } else if (key == "rf_min_leaf") {
    cfg.forest.min_leaf = to_int(key, value);
  } else if (key == "rf_feature_subsample") {
    cfg.forest.feature_subsample = to_int(key, value);
  } else if (key == "rf_bootstrap") {
    cfg.forest.bootstrap = to_bool(key, value);
  } else if (key == "log_lr") {
    cfg.logreg.learning_rate = to_double(key, value);
  } else if (key == "log_iterations") {
    cfg.logreg.iterations = to_int(key, value);
  } else if (key == "log_l2") {
    cfg.logreg.l2 = to_double(key, value);
  } else if (key == "corruption_factors") {
    cfg.corruption_factors.clear();
    for (const auto& f : split_list(value)) {
      cfg.corruption_factors.push_back(to_double(key, f));
    }
  } else {
    throw StageError(Stage::Config, "unknown config key '" + key + "'");
  }
}

void apply_config_file(PipelineConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StageError(Stage::Config, "cannot open config file " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw StageError(Stage::Config,
                       path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

LoadedInputs pipeline_load(const PipelineConfig& cfg) {
  LoadedInputs out;
  try {
    out.graph = load_graph(cfg.events_path, cfg.relations_path, cfg.series_path);
  } catch (const GraphLoadError& e) {
    throw StageError(Stage::Load, e.what());
  }
  out.validation = validate_graph(out.graph);
  out.prep = prepare_series(out.graph, cfg.impurity_threshold, cfg.excluded_types);
  return out;
}

TrainedArtifacts pipeline_train(const PipelineConfig& cfg, const EventGraph& g,
                                const PreparedSeries& prep) {
  try {
    TrainedArtifacts out;
    EmbedTrainConfig embed_cfg = cfg.embed;
    embed_cfg.seed = mix64(*cfg.seed ^ fnv1a64("embedding"));
    out.model = train_embeddings(embedding_triples(g), embed_cfg);
    out.index = TfIdfIndex::build(g);

    auto positives = build_positive_set(g, prep.forests);
    if (positives.empty()) {
      throw std::invalid_argument("no positive sub-event pairs inside the series forests");
    }
    auto negatives = build_negative_set(g, prep.forests, positives, *cfg.seed);
    out.warnings = negatives.warnings;
    out.pairs = std::move(positives);
    out.pairs.insert(out.pairs.end(), negatives.pairs.begin(), negatives.pairs.end());

    Dataset data;
    for (const auto& p : out.pairs) {
      const FeatureVector fv = extract_features(g.event(p.sub_id), g.event(p.parent_id), g,
                                                out.index, &out.model);
      data.add_row(fv.values, p.label ? 1 : 0);
    }
    const auto columns = feature_columns_for_groups(cfg.feature_groups);
    std::vector<std::string> names;
    for (std::size_t c : columns) names.push_back(feature_names()[c]);
    out.classifier =
        train_classifier(data, cfg.classifier, cfg.logreg, cfg.forest,
                         mix64(*cfg.seed ^ fnv1a64("classifier")), columns, names, cfg.threads);
    return out;
  } catch (const std::invalid_argument& e) {
    throw StageError(Stage::Training, e.what());
  }
}

namespace {

// Output paths are recorded relative to the output directory so reports from
// different experiment directories stay byte-comparable.
void declare_output(PipelineResult& result, const std::string& name, const fs::path& out_dir,
                    const fs::path& file) {
  std::error_code ec;
  const fs::path path = out_dir / file;
  if (fs::exists(path, ec) && fs::file_size(path, ec) > 0) {
    result.outputs.emplace(name, file.string());
  }
}

nlohmann::json config_echo(const PipelineConfig& cfg) {
  nlohmann::json j;
  j["seed"] = *cfg.seed;
  j["classifier"] = to_string(cfg.classifier);
  j["constraint"] = to_string(cfg.inference.constraint);
  j["window_a"] = cfg.inference.window_before;
  j["window_b"] = cfg.inference.window_after;
  j["alpha"] = cfg.inference.coverage_alpha;
  j["candidates_k"] = cfg.candidates_k;
  j["skip_prediction"] = cfg.skip_prediction;
  j["features"] = nlohmann::json::array();
  if (cfg.feature_groups & kGroupTex) j["features"].push_back("tex");
  if (cfg.feature_groups & kGroupStp) j["features"].push_back("stp");
  if (cfg.feature_groups & kGroupEmb) j["features"].push_back("emb");
  j["embedding"] = {{"dim", cfg.embed.dim},
                    {"epochs", cfg.embed.epochs},
                    {"learning_rate", cfg.embed.learning_rate},
                    {"margin", cfg.embed.margin}};
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  const fs::path out_dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw StageError(Stage::Config, "cannot create output directory " + cfg.out_dir);

  PipelineResult result;

  // Load + series preparation.
  LoadedInputs loaded = pipeline_load(cfg);
  EventGraph graph = std::move(loaded.graph);
  PreparedSeries prep = std::move(loaded.prep);
  try {
    nlohmann::json j;
    j["events"] = graph.events().size();
    j["sub_event_edges"] = graph.sub_event_edges().size();
    j["follow_up_edges"] = graph.follow_up_edges().size();
    j["generic_edges"] = graph.generic_edges().size();
    j["validation_errors"] = loaded.validation.error_count;
    j["validation_findings"] = loaded.validation.warnings.size();
    write_text(out_dir / "graph_summary.json", j.dump(2) + "\n");
    declare_output(result, "graph_summary", out_dir, "graph_summary.json");

    nlohmann::json s;
    s["series_kept"] = prep.series.size();
    s["series_rejected"] = prep.rejected_series;
    s["editions_removed"] = prep.removed_editions;
    write_text(out_dir / "series_summary.json", s.dump(2) + "\n");
    declare_output(result, "series_summary", out_dir, "series_summary.json");
    if (cfg.dump_forests) {
      fs::create_directories(out_dir / "forests", ec);
      for (const auto& [series_id, forest] : prep.forests) {
        std::string name = series_id;
        for (char& c : name) {
          if (c == '/' || c == ':') c = '_';
        }
        write_text(out_dir / "forests" / (name + ".txt"), dump_forest(forest, graph));
      }
    }
  } catch (const std::exception& e) {
    throw StageError(Stage::Load, e.what());
  }

  // Training.
  TrainedArtifacts trained = pipeline_train(cfg, graph, prep);
  try {
    trained.model.save((out_dir / "embeddings.bin").string());
    declare_output(result, "embeddings", out_dir, "embeddings.bin");
    trained.classifier.save((out_dir / "classifier.bin").string());
    declare_output(result, "classifier", out_dir, "classifier.bin");
    write_feature_csv((out_dir / "features.csv").string(), trained.pairs, graph, trained.index,
                      &trained.model);
    declare_output(result, "features", out_dir, "features.csv");
  } catch (const std::exception& e) {
    throw StageError(Stage::Training, e.what());
  }

  // Iterative sub-event prediction.
  std::vector<PredictedRelation> predicted;
  if (!cfg.skip_prediction) {
    try {
      PredictionOptions popt;
      popt.candidates_k = cfg.candidates_k;
      popt.threads = cfg.threads;
      predicted = predict_sub_events(graph, prep.forests, trained.classifier, trained.index,
                                     &trained.model, popt);
      write_predicted_tsv((out_dir / "predicted_relations.tsv").string(), predicted);
      declare_output(result, "predicted_relations", out_dir, "predicted_relations.tsv");
      for (const auto& rel : predicted) {
        if (!graph.has_sub_event_edge(rel.sub_id, rel.parent_id)) {
          graph.add_sub_event_edge(rel.sub_id, rel.parent_id);
        }
      }
      if (!predicted.empty()) {
        prep = prepare_series(graph, cfg.impurity_threshold, cfg.excluded_types);
      }
    } catch (const std::exception& e) {
      throw StageError(Stage::Prediction, e.what());
    }
  }
  result.predicted_relations = predicted.size();

  // Event inference.
  InferenceDelta delta;
  InferenceReport report;
  try {
    std::tie(delta, report) = run_inference(graph, prep.series, cfg.inference);
    write_inferred_tsv((out_dir / "inferred_events.tsv").string(), delta.events);
    declare_output(result, "inferred_events", out_dir, "inferred_events.tsv");
    write_text(out_dir / "inference_report.json", report.json() + "\n");
    declare_output(result, "inference_report", out_dir, "inference_report.json");
    apply_delta(graph, prep.series, delta);
    save_graph(graph, (out_dir / "events_full.tsv").string(),
               (out_dir / "relations_full.tsv").string(),
               (out_dir / "series_full.tsv").string());
    declare_output(result, "events_full", out_dir, "events_full.tsv");
    declare_output(result, "relations_full", out_dir, "relations_full.tsv");
    declare_output(result, "series_full", out_dir, "series_full.tsv");
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(Stage::Inference, e.what());
  }
  result.inferred_events = delta.events.size();
  result.inferred_relations = delta.relations.size();

  try {
    nlohmann::json j;
    j["config"] = config_echo(cfg);
    j["predicted_relations"] = result.predicted_relations;
    j["inferred_events"] = result.inferred_events;
    j["inferred_relations"] = result.inferred_relations;
    j["dataset_warnings"] = trained.warnings;
    j["outputs"] = result.outputs;
    write_text(out_dir / "pipeline_report.json", j.dump(2) + "\n");
    declare_output(result, "pipeline_report", out_dir, "pipeline_report.json");
  } catch (const std::exception& e) {
    throw StageError(Stage::Evaluation, e.what());
  }
  return result;
}

}  // namespace happening
