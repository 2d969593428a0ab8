#pragma once
// Feature vector for an ordered (candidate sub-event, candidate parent) pair:
// nine textual features over normalized and template labels, four
// spatio-temporal flags and the embedding score, each paired with a
// missingness flag so tree learners can split on absence. Missing values use
// sentinel 0.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "happening/embedding.hpp"
#include "happening/graph.hpp"

namespace happening {

inline constexpr std::size_t kFeatureCount = 14;
inline constexpr std::size_t kFeatureVectorSize = 2 * kFeatureCount;

enum FeatureIndex : std::size_t {
  kLabelContainment = 0,
  kLcsFraction,
  kUnigramSimilarity,
  kTemplateContainment,
  kTemplateLcsFraction,
  kTemplateUnigramSimilarity,
  kLabelCosine,
  kParentLabelLen,
  kSubLabelLen,
  kTimeOverlap,
  kTimeContainment,
  kTimeEquality,
  kLocationOverlap,
  kEmbeddingScore,
};

// 14 feature names followed by their "<name>_missing" flags, in vector order.
const std::array<std::string, kFeatureVectorSize>& feature_names();

enum FeatureGroup : unsigned {
  kGroupTex = 1u << 0,
  kGroupStp = 1u << 1,
  kGroupEmb = 1u << 2,
  kGroupAll = kGroupTex | kGroupStp | kGroupEmb,
};

// Column indices (values and their flags) belonging to the given groups.
std::vector<std::size_t> feature_columns_for_groups(unsigned groups);

struct FeatureVector {
  std::array<double, kFeatureVectorSize> values{};

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  void set(std::size_t feature, double value, bool missing) {
    values[feature] = value;
    values[kFeatureCount + feature] = missing ? 1.0 : 0.0;
  }
  bool missing(std::size_t feature) const { return values[kFeatureCount + feature] != 0.0; }
};

struct FeatValue {
  double value = 0.0;
  bool missing = false;
};

// Longest common substring length over min(|a|,|b|); empty input is missing.
FeatValue lcs_fraction(std::string_view a, std::string_view b);
// Jaccard similarity of whitespace-token sets; empty input is missing.
FeatValue unigram_similarity(std::string_view a, std::string_view b);

// tf-idf token index over every event label in the graph. tf is the raw
// count, idf = ln(N / df) with N the number of labels.
class TfIdfIndex {
 public:
  static TfIdfIndex build(const EventGraph& g);

  // Cosine of the tf-idf weighted token vectors; 0 for a zero vector.
  FeatValue cosine(std::string_view a, std::string_view b) const;
  std::size_t vocabulary_size() const { return vocabulary_.size(); }
  double idf_of(const std::string& token) const;

 private:
  std::unordered_map<std::string, std::size_t> vocabulary_;
  std::vector<double> idf_;
};

struct TemporalFlags {
  int overlap = 0;
  int containment = 0;
  int equality = 0;
  bool missing = false;
};

// overlap: intervals intersect; containment: sub time inside parent time;
// equality: identical endpoints. Any missing time makes all three missing.
TemporalFlags temporal_features(const Event& sub, const Event& parent);

FeatValue location_overlap(const Event& sub, const Event& parent);

// All fourteen features in fixed order (template features computed on
// template labels; containment = parent label is a substring of sub label).
// The embedding score is the missing sentinel when model is null.
FeatureVector extract_features(const Event& sub, const Event& parent, const EventGraph& g,
                               const TfIdfIndex& idx, const EmbeddingModel* model);

}  // namespace happening
