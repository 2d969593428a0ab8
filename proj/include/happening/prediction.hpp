#pragma once
// Iterative classifier-driven discovery of missing sub-event relations.
// Candidates come from a token inverted index (raw tokens, digits kept, so
// edition years anchor candidates); accepted pairs must keep the graph acyclic
// and keep one parent per series family. Parents outside any series become
// eligible once an earlier iteration attaches them.

#include <cstdint>
#include <string>
#include <vector>

#include "happening/classifier.hpp"
#include "happening/embedding.hpp"
#include "happening/features.hpp"
#include "happening/graph.hpp"
#include "happening/series.hpp"

namespace happening {

struct PredictedRelation {
  std::string sub_id;
  std::string parent_id;
  double probability = 0.0;
  int iteration = 0;
};

// Top-k events sharing normalized-label tokens with the parent label, by
// shared-token count, then unigram Jaccard, then id. Excludes the parent, its
// ancestors and its existing direct sub-events.
std::vector<std::string> candidate_sub_events(const EventGraph& g, const Event& parent,
                                              std::size_t k);

struct PredictionOptions {
  std::size_t candidates_k = 50;
  int threads = 1;
};

std::vector<PredictedRelation> predict_sub_events(const EventGraph& g, const ForestMap& forests,
                                                  const Classifier& clf, const TfIdfIndex& idx,
                                                  const EmbeddingModel* model,
                                                  const PredictionOptions& options);

// sub_id <TAB> parent_id <TAB> probability <TAB> iteration
void write_predicted_tsv(const std::string& path, const std::vector<PredictedRelation>& rels);

}  // namespace happening
