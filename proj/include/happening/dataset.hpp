#pragma once
// Labeled pair construction and 10-fold cross-validation for the sub-event
// classifier. Positives are the direct tree edges of the edition forests;
// negatives are drawn in equal parts from four structured pools (same series,
// shared parent, uncle, transitive-but-not-direct), never overlapping R.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "happening/classifier.hpp"
#include "happening/embedding.hpp"
#include "happening/features.hpp"
#include "happening/graph.hpp"
#include "happening/series.hpp"

namespace happening {

enum class NegativeKind { SAME_SERIES, SAME_PARENT, UNCLE, TRANSITIVE };

std::string to_string(NegativeKind k);

struct LabeledPair {
  std::string sub_id;
  std::string parent_id;
  bool label = false;
  std::optional<NegativeKind> negative_kind;
};

// One positive per direct sub-event edge inside the edition forests,
// deterministic order (series id, edition order, breadth-first).
std::vector<LabeledPair> build_positive_set(const EventGraph& g, const ForestMap& forests);

struct NegativeSet {
  std::vector<LabeledPair> pairs;
  std::vector<std::string> warnings;  // underfilled kinds, backfills
};

NegativeSet build_negative_set(const EventGraph& g, const ForestMap& forests,
                               const std::vector<LabeledPair>& positives, std::uint64_t seed);

Classifier train_classifier(const Dataset& data, ClassifierKind kind,
                            const LogRegParams& logreg, const RfParams& forest,
                            std::uint64_t seed, std::vector<std::size_t> columns,
                            std::vector<std::string> column_names, int threads = 1);

struct FoldCounts {
  long tp = 0;
  long tn = 0;
  long fp = 0;
  long fn = 0;

  long total() const { return tp + tn + fp + fn; }
  double accuracy() const {
    return total() == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(total());
  }
  FoldCounts& operator+=(const FoldCounts& o) {
    tp += o.tp;
    tn += o.tn;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
};

struct CvReport {
  std::vector<FoldCounts> folds;

  FoldCounts aggregate() const {
    FoldCounts sum;
    for (const auto& f : folds) sum += f;
    return sum;
  }
  std::string table() const;  // aligned per-fold and aggregate counts
  std::string json() const;
};

struct CvOptions {
  ClassifierKind kind = ClassifierKind::RF;
  unsigned feature_groups = kGroupAll;
  EmbedTrainConfig embed;
  LogRegParams logreg;
  RfParams forest;
  int threads = 1;
};

// Shuffles the labeled pairs into `folds` parts; per fold, embeddings are
// retrained on the triple set minus that fold's positive sub-event edges, the
// classifier is fitted on the remaining folds and scored on the held-out one.
CvReport cross_validate(const EventGraph& g, const ForestMap& forests, int folds,
                        std::uint64_t seed, const CvOptions& options);

// All graph relations as embedding training triples (sub-event, follow-up and
// generic edges; memberships are not triples).
std::vector<Triple> embedding_triples(const EventGraph& g);

// Feature matrix export with a header row naming every column.
void write_feature_csv(const std::string& path, const std::vector<LabeledPair>& pairs,
                       const EventGraph& g, const TfIdfIndex& idx, const EmbeddingModel* model);

}  // namespace happening
