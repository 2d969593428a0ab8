#include "happening/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "happening/text.hpp"

namespace happening {

const std::array<std::string, kFeatureVectorSize>& feature_names() {
  static const std::array<std::string, kFeatureVectorSize> kNames = [] {
    std::array<std::string, kFeatureVectorSize> names = {
        "label_containment",  "lcs_fraction",          "unigram_similarity",
        "template_containment", "template_lcs_fraction", "template_unigram_similarity",
        "label_cosine",       "parent_label_len",      "sub_label_len",
        "time_overlap",       "time_containment",      "time_equality",
        "location_overlap",   "embedding_score",
    };
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      names[kFeatureCount + i] = names[i] + "_missing";
    }
    return names;
  }();
  return kNames;
}

std::vector<std::size_t> feature_columns_for_groups(unsigned groups) {
  std::vector<std::size_t> features;
  if (groups & kGroupTex) {
    for (std::size_t f = kLabelContainment; f <= kSubLabelLen; ++f) features.push_back(f);
  }
  if (groups & kGroupStp) {
    for (std::size_t f = kTimeOverlap; f <= kLocationOverlap; ++f) features.push_back(f);
  }
  if (groups & kGroupEmb) features.push_back(kEmbeddingScore);
  std::vector<std::size_t> columns = features;
  for (std::size_t f : features) columns.push_back(kFeatureCount + f);
  return columns;
}

FeatValue lcs_fraction(std::string_view a, std::string_view b) {
  if (a.empty() || b.empty()) return {0.0, true};
  const std::size_t lcs = longest_common_substring(a, b);
  return {static_cast<double>(lcs) / static_cast<double>(std::min(a.size(), b.size())), false};
}

FeatValue unigram_similarity(std::string_view a, std::string_view b) {
  if (a.empty() || b.empty()) return {0.0, true};
  return {token_jaccard(tokenize(a), tokenize(b)), false};
}

TfIdfIndex TfIdfIndex::build(const EventGraph& g) {
  TfIdfIndex idx;
  std::map<std::string, std::size_t> df;
  std::size_t n_labels = 0;
  for (const auto& [id, e] : g.events()) {
    (void)id;
    ++n_labels;
    std::set<std::string> seen;
    for (auto& tok : tokenize(normalize_label(e.label))) seen.insert(std::move(tok));
    for (const auto& tok : seen) ++df[tok];
  }
  idx.idf_.reserve(df.size());
  for (const auto& [tok, count] : df) {
    idx.vocabulary_.emplace(tok, idx.idf_.size());
    idx.idf_.push_back(std::log(static_cast<double>(n_labels) / static_cast<double>(count)));
  }
  return idx;
}

double TfIdfIndex::idf_of(const std::string& token) const {
  auto it = vocabulary_.find(token);
  return it == vocabulary_.end() ? 0.0 : idf_[it->second];
}

FeatValue TfIdfIndex::cosine(std::string_view a, std::string_view b) const {
  const std::string na = normalize_label(a);
  const std::string nb = normalize_label(b);
  if (na.empty() || nb.empty()) return {0.0, true};

  auto weigh = [&](const std::string& label) {
    std::map<std::size_t, double> weights;
    for (const auto& tok : tokenize(label)) {
      auto it = vocabulary_.find(tok);
      if (it != vocabulary_.end()) weights[it->second] += 1.0;  // raw tf
    }
    double norm_sq = 0.0;
    for (auto& [col, tf] : weights) {
      tf *= idf_[col];
      norm_sq += tf * tf;
    }
    return std::pair{weights, norm_sq};
  };

  auto [wa, na_sq] = weigh(na);
  auto [wb, nb_sq] = weigh(nb);
  if (na_sq == 0.0 || nb_sq == 0.0) return {0.0, true};
  double dot = 0.0;
  for (const auto& [col, w] : wa) {
    auto it = wb.find(col);
    if (it != wb.end()) dot += w * it->second;
  }
  return {dot / std::sqrt(na_sq * nb_sq), false};
}

TemporalFlags temporal_features(const Event& sub, const Event& parent) {
  if (!sub.time || !parent.time) return {0, 0, 0, true};
  TemporalFlags f;
  f.overlap = intervals_overlap(*sub.time, *parent.time) ? 1 : 0;
  f.containment = interval_contains(*parent.time, *sub.time) ? 1 : 0;
  f.equality = (*sub.time == *parent.time) ? 1 : 0;
  return f;
}

FeatValue location_overlap(const Event& sub, const Event& parent) {
  if (sub.locations.empty() || parent.locations.empty()) return {0.0, true};
  for (const auto& loc : sub.locations) {
    if (parent.locations.count(loc)) return {1.0, false};
  }
  return {0.0, false};
}

FeatureVector extract_features(const Event& sub, const Event& parent, const EventGraph& g,
                               const TfIdfIndex& idx, const EmbeddingModel* model) {
  (void)g;
  FeatureVector v;

  const std::string sub_label = normalize_label(sub.label);
  const std::string parent_label = normalize_label(parent.label);
  const std::string sub_tpl = template_label(sub.label);
  const std::string parent_tpl = template_label(parent.label);

  auto containment = [](const std::string& sub_l, const std::string& parent_l) -> FeatValue {
    if (sub_l.empty() || parent_l.empty()) return {0.0, true};
    return {sub_l.find(parent_l) != std::string::npos ? 1.0 : 0.0, false};
  };

  auto put = [&](std::size_t feature, FeatValue fv) { v.set(feature, fv.value, fv.missing); };

  put(kLabelContainment, containment(sub_label, parent_label));
  put(kLcsFraction, lcs_fraction(sub_label, parent_label));
  put(kUnigramSimilarity, unigram_similarity(sub_label, parent_label));
  put(kTemplateContainment, containment(sub_tpl, parent_tpl));
  put(kTemplateLcsFraction, lcs_fraction(sub_tpl, parent_tpl));
  put(kTemplateUnigramSimilarity, unigram_similarity(sub_tpl, parent_tpl));
  put(kLabelCosine, idx.cosine(sub.label, parent.label));
  v.set(kParentLabelLen, static_cast<double>(parent_label.size()), false);
  v.set(kSubLabelLen, static_cast<double>(sub_label.size()), false);

  const TemporalFlags t = temporal_features(sub, parent);
  v.set(kTimeOverlap, t.overlap, t.missing);
  v.set(kTimeContainment, t.containment, t.missing);
  v.set(kTimeEquality, t.equality, t.missing);
  put(kLocationOverlap, location_overlap(sub, parent));

  if (model) {
    auto score = embedding_feature(*model, sub.id, parent.id);
    if (score) {
      v.set(kEmbeddingScore, *score, false);
    } else {
      v.set(kEmbeddingScore, 0.0, true);
    }
  } else {
    v.set(kEmbeddingScore, 0.0, true);
  }
  return v;
}

}  // namespace happening
