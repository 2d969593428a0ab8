#include "happening/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "happening/rng.hpp"

namespace happening {

std::string to_string(NegativeKind k) {
  switch (k) {
    case NegativeKind::SAME_SERIES:
      return "SAME_SERIES";
    case NegativeKind::SAME_PARENT:
      return "SAME_PARENT";
    case NegativeKind::UNCLE:
      return "UNCLE";
    case NegativeKind::TRANSITIVE:
      return "TRANSITIVE";
  }
  return "?";
}

std::vector<LabeledPair> build_positive_set(const EventGraph& g, const ForestMap& forests) {
  (void)g;
  std::vector<LabeledPair> positives;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& [series_id, forest] : forests) {
    (void)series_id;
    for (const auto& root : forest.roots) {
      std::vector<std::string> queue{root};
      std::size_t head = 0;
      while (head < queue.size()) {
        const std::string cur = queue[head++];
        auto it = forest.children_of.find(cur);
        if (it == forest.children_of.end()) continue;
        for (const auto& child : it->second) {
          if (seen.insert({child, cur}).second) {
            positives.push_back({child, cur, true, std::nullopt});
          }
          queue.push_back(child);
        }
      }
    }
  }
  return positives;
}

namespace {

using PairSet = std::set<std::pair<std::string, std::string>>;

// Candidate pools for the four negative kinds, deduplicated and sorted.
std::array<std::vector<std::pair<std::string, std::string>>, 4> build_pools(
    const EventGraph& g, const ForestMap& forests) {
  std::array<PairSet, 4> pools;
  auto eligible = [&](const std::string& sub, const std::string& parent) {
    return sub != parent && !g.has_sub_event_edge(sub, parent);
  };

  for (const auto& [series_id, forest] : forests) {
    (void)series_id;
    std::vector<std::string> nodes;
    for (const auto& [node, root] : forest.root_of) {
      (void)root;
      nodes.push_back(node);
    }

    // Same series: any ordered pair of events in this series' forest.
    for (const auto& a : nodes) {
      for (const auto& b : nodes) {
        if (eligible(a, b)) pools[0].insert({a, b});
      }
    }

    // Shared direct parent (both directions).
    for (const auto& [parent, children] : forest.children_of) {
      (void)parent;
      for (const auto& a : children) {
        for (const auto& b : children) {
          if (eligible(a, b)) pools[1].insert({a, b});
        }
      }
    }

    // Uncle: sub's grandparent equals the candidate parent's parent.
    for (const auto& node : nodes) {
      auto p = forest.parent_of.find(node);
      if (p == forest.parent_of.end()) continue;
      auto gp = forest.parent_of.find(p->second);
      if (gp == forest.parent_of.end()) continue;
      auto uncles = forest.children_of.find(gp->second);
      if (uncles == forest.children_of.end()) continue;
      for (const auto& uncle : uncles->second) {
        if (uncle == p->second) continue;
        if (eligible(node, uncle)) pools[2].insert({node, uncle});
      }
    }

    // Transitive but not direct: ancestors at distance >= 2. Parent chains
    // terminate at the edition root, which has no tree parent itself.
    for (const auto& node : nodes) {
      auto p = forest.parent_of.find(node);
      if (p == forest.parent_of.end()) continue;
      auto anc = forest.parent_of.find(p->second);
      while (anc != forest.parent_of.end()) {
        if (eligible(node, anc->second)) pools[3].insert({node, anc->second});
        anc = forest.parent_of.find(anc->second);
      }
    }
  }

  std::array<std::vector<std::pair<std::string, std::string>>, 4> out;
  for (int k = 0; k < 4; ++k) out[k].assign(pools[k].begin(), pools[k].end());
  return out;
}

}  // namespace

NegativeSet build_negative_set(const EventGraph& g, const ForestMap& forests,
                               const std::vector<LabeledPair>& positives, std::uint64_t seed) {
  if (positives.empty()) throw std::invalid_argument("build_negative_set: no positives");
  NegativeSet out;
  auto pools = build_pools(g, forests);
  Rng rng = make_rng(seed, "negatives");

  const std::size_t target = positives.size();
  std::array<std::size_t, 4> want{target / 4, target / 4, target / 4, target / 4};
  for (std::size_t i = 0; i < target % 4; ++i) ++want[i];

  PairSet chosen;
  std::array<std::vector<std::size_t>, 4> order;
  std::array<std::size_t, 4> cursor{0, 0, 0, 0};
  for (int k = 0; k < 4; ++k) {
    order[k].resize(pools[k].size());
    for (std::size_t i = 0; i < order[k].size(); ++i) order[k][i] = i;
    deterministic_shuffle(order[k], rng);
  }

  auto draw = [&](int k) -> bool {
    while (cursor[k] < order[k].size()) {
      const auto& pair = pools[k][order[k][cursor[k]++]];
      if (!chosen.insert(pair).second) continue;
      out.pairs.push_back(
          {pair.first, pair.second, false, static_cast<NegativeKind>(k)});
      return true;
    }
    return false;
  };

  std::array<std::size_t, 4> got{0, 0, 0, 0};
  for (int k = 0; k < 4; ++k) {
    while (got[k] < want[k] && draw(k)) ++got[k];
    if (got[k] < want[k]) {
      out.warnings.push_back("negative kind " + to_string(static_cast<NegativeKind>(k)) +
                             " underfilled: " + std::to_string(got[k]) + "/" +
                             std::to_string(want[k]) + ", backfilling from other kinds");
    }
  }
  // Backfill deficits from whichever pools still have candidates.
  while (out.pairs.size() < target) {
    bool any = false;
    for (int k = 0; k < 4 && out.pairs.size() < target; ++k) {
      if (draw(k)) any = true;
    }
    if (!any) {
      out.warnings.push_back("negative pools exhausted at " + std::to_string(out.pairs.size()) +
                             "/" + std::to_string(target));
      break;
    }
  }
  return out;
}

Classifier train_classifier(const Dataset& data, ClassifierKind kind,
                            const LogRegParams& logreg, const RfParams& forest,
                            std::uint64_t seed, std::vector<std::size_t> columns,
                            std::vector<std::string> column_names, int threads) {
  if (kind == ClassifierKind::LOG) {
    return Classifier::train_logreg(data, logreg, std::move(columns), std::move(column_names));
  }
  return Classifier::train_forest(data, forest, seed, std::move(columns),
                                  std::move(column_names), threads);
}

std::vector<Triple> embedding_triples(const EventGraph& g) {
  std::vector<Triple> triples;
  // Sub-event triples are oriented parent -> sub so that the trained triple
  // direction matches the scoring formula ||W1 parent + r - W2 sub||.
  for (const auto& [sub, parent] : g.sub_event_edges()) {
    triples.push_back({parent, kSubEventPredicate, sub});
  }
  for (const auto& [earlier, later] : g.follow_up_edges()) {
    triples.push_back({earlier, kFollowUpPredicate, later});
  }
  for (const auto& t : g.generic_edges()) triples.push_back(t);
  return triples;
}

CvReport cross_validate(const EventGraph& g, const ForestMap& forests, int folds,
                        std::uint64_t seed, const CvOptions& options) {
  auto positives = build_positive_set(g, forests);
  if (positives.empty()) throw std::invalid_argument("cross_validate: no positive pairs");
  auto negatives = build_negative_set(g, forests, positives, seed);

  std::vector<LabeledPair> all = positives;
  all.insert(all.end(), negatives.pairs.begin(), negatives.pairs.end());
  if (folds < 2) throw std::invalid_argument("folds must be >= 2");
  if (static_cast<std::size_t>(folds) > all.size()) {
    throw std::invalid_argument("more folds than labeled pairs");
  }

  Rng rng = make_rng(seed, "folds");
  deterministic_shuffle(all, rng);
  std::vector<int> fold_of(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    fold_of[i] = static_cast<int>(i * static_cast<std::size_t>(folds) / all.size());
  }

  const auto base_triples = embedding_triples(g);
  const TfIdfIndex idx = TfIdfIndex::build(g);
  const auto columns = feature_columns_for_groups(options.feature_groups);
  std::vector<std::string> names;
  for (std::size_t c : columns) names.push_back(feature_names()[c]);

  CvReport report;
  for (int f = 0; f < folds; ++f) {
    // Leave the held-out positives out of the embedding training triples.
    std::set<std::pair<std::string, std::string>> held_out_edges;
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (fold_of[i] == f && all[i].label) {
        held_out_edges.insert({all[i].sub_id, all[i].parent_id});
      }
    }
    std::vector<Triple> fold_triples;
    fold_triples.reserve(base_triples.size());
    for (const auto& t : base_triples) {
      // Sub-event triples carry (subject=parent, object=sub).
      if (t.predicate == kSubEventPredicate && held_out_edges.count({t.object, t.subject})) {
        continue;
      }
      fold_triples.push_back(t);
    }
    EmbedTrainConfig emb_cfg = options.embed;
    emb_cfg.seed = mix64(mix64(options.embed.seed ^ fnv1a64("cv-fold")) + static_cast<std::uint64_t>(f));
    const EmbeddingModel model = train_embeddings(fold_triples, emb_cfg);

    Dataset train;
    std::vector<std::size_t> eval_rows;
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (fold_of[i] == f) {
        eval_rows.push_back(i);
      } else {
        const FeatureVector fv = extract_features(g.event(all[i].sub_id),
                                                  g.event(all[i].parent_id), g, idx, &model);
        train.add_row(fv.values, all[i].label ? 1 : 0);
      }
    }
    const Classifier clf =
        train_classifier(train, options.kind, options.logreg, options.forest,
                         mix64(seed + static_cast<std::uint64_t>(f)), columns, names,
                         options.threads);

    FoldCounts counts;
    for (std::size_t i : eval_rows) {
      const FeatureVector fv = extract_features(g.event(all[i].sub_id),
                                                g.event(all[i].parent_id), g, idx, &model);
      const bool predicted = clf.predict(fv.values);
      if (all[i].label) {
        predicted ? ++counts.tp : ++counts.fn;
      } else {
        predicted ? ++counts.fp : ++counts.tn;
      }
    }
    report.folds.push_back(counts);
  }
  return report;
}

std::string CvReport::table() const {
  std::ostringstream os;
  os << "fold        TP        TN        FP        FN  accuracy\n";
  char buf[96];
  for (std::size_t i = 0; i < folds.size(); ++i) {
    const auto& f = folds[i];
    std::snprintf(buf, sizeof(buf), "%4zu%10ld%10ld%10ld%10ld%10.4f\n", i + 1, f.tp, f.tn, f.fp,
                  f.fn, f.accuracy());
    os << buf;
  }
  const FoldCounts sum = aggregate();
  std::snprintf(buf, sizeof(buf), " all%10ld%10ld%10ld%10ld%10.4f\n", sum.tp, sum.tn, sum.fp,
                sum.fn, sum.accuracy());
  os << buf;
  return os.str();
}

std::string CvReport::json() const {
  nlohmann::json j;
  j["folds"] = nlohmann::json::array();
  for (const auto& f : folds) {
    j["folds"].push_back({{"tp", f.tp},
                          {"tn", f.tn},
                          {"fp", f.fp},
                          {"fn", f.fn},
                          {"accuracy", f.accuracy()}});
  }
  const FoldCounts sum = aggregate();
  j["aggregate"] = {{"tp", sum.tp},
                    {"tn", sum.tn},
                    {"fp", sum.fp},
                    {"fn", sum.fn},
                    {"accuracy", sum.accuracy()}};
  return j.dump(2);
}

void write_feature_csv(const std::string& path, const std::vector<LabeledPair>& pairs,
                       const EventGraph& g, const TfIdfIndex& idx, const EmbeddingModel* model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "sub_id,parent_id,label";
  for (const auto& name : feature_names()) out << ',' << name;
  out << '\n';
  char buf[32];
  for (const auto& p : pairs) {
    out << p.sub_id << ',' << p.parent_id << ',' << (p.label ? 1 : 0);
    const FeatureVector fv =
        extract_features(g.event(p.sub_id), g.event(p.parent_id), g, idx, model);
    for (double v : fv.values) {
      std::snprintf(buf, sizeof(buf), "%.9g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace happening
