#pragma once
// Evaluation machinery: leaf corruption with ground truth, reconstruction
// recall, the synthetic tournament-shaped corpus generator and annotation
// sampling.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "happening/graph.hpp"
#include "happening/inference.hpp"
#include "happening/series.hpp"

namespace happening {

struct CorruptionSpec {
  double factor = 0.1;  // fraction of leaf events to remove, in (0,1)
  std::uint64_t seed = 0;
};

struct CorruptionResult {
  EventGraph graph;
  std::vector<Event> removed;  // full original records
  std::vector<std::string> warnings;
};

// Removes floor(factor * |leaves|) leaf events (events without sub-events)
// and their incident edges. Edition roots without a parent are never removed.
CorruptionResult corrupt_graph(const EventGraph& g, const ForestMap& forests,
                               const CorruptionSpec& spec);

// Percentage of removed events matched by an inferred event with an equal
// normalized label.
double reconstruction_recall(const std::vector<Event>& removed,
                             const std::vector<InferredEvent>& inferred);

struct SyntheticCorpusSpec {
  int series_count = 5;
  int editions_per_series = 10;
  int depth = 2;      // sub-tree depth below each edition root
  int branching = 3;  // children per node
  double late_start_fraction = 0.0;
  double discontinued_fraction = 0.0;
  double gap_fraction = 0.0;
  std::uint64_t seed = 0;
  int base_year = 2000;

  void validate() const;
};

struct SlotTruth {
  std::string series_id;       // the slot's own series
  std::string label_template;  // digit-free slot template
  std::vector<bool> present;   // per edition index
};

struct SyntheticCorpus {
  EventGraph graph;
  SeriesMap series;
  std::vector<SlotTruth> catalog;
};

SyntheticCorpus generate_synthetic_corpus(const SyntheticCorpusSpec& spec);

// Full series pre-processing used by the pipeline and the recall harness.
struct PreparedSeries {
  SeriesMap series;  // filtered, forests built, sub-series computed
  ForestMap forests;
  std::vector<std::string> rejected_series;
  std::map<std::string, std::vector<std::string>> removed_editions;
};

PreparedSeries prepare_series(const EventGraph& g, double impurity_threshold,
                              const std::set<std::string>& excluded_types);

struct RecallCell {
  Constraint constraint;
  double factor;
  std::size_t removed = 0;
  std::size_t matched = 0;
  std::size_t inferred = 0;
  double recall = 0.0;  // percent
};

// The corruption grid: one corrupted graph per factor (deterministic from the
// seed), series pre-processing re-run on it, then inference per constraint.
std::vector<RecallCell> evaluate_recall(const EventGraph& g,
                                        const std::vector<Constraint>& constraints,
                                        const std::vector<double>& factors,
                                        const InferenceConfig& base_cfg,
                                        double impurity_threshold,
                                        const std::set<std::string>& excluded_types,
                                        std::uint64_t seed);

std::string recall_report_json(const std::vector<RecallCell>& cells);

struct AnnotationItem {
  std::string id;
  std::string label;
  std::string parent_label;
};

// Deterministic uniform sample written as a review sheet (header row, blank
// verdict column). Throws when n exceeds the item count.
void sample_for_annotation(const std::vector<AnnotationItem>& items, std::size_t n,
                           std::uint64_t seed, const std::string& path);

}  // namespace happening
