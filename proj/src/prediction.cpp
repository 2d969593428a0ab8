#include "happening/prediction.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "happening/parallel.hpp"
#include "happening/text.hpp"

namespace happening {

namespace {

struct TokenIndex {
  std::unordered_map<std::string, std::vector<std::string>> postings;
  std::unordered_map<std::string, std::vector<std::string>> tokens_of;

  static TokenIndex build(const EventGraph& g) {
    TokenIndex idx;
    for (const auto& [id, e] : g.events()) {
      auto toks = tokenize(normalize_label(e.label));
      std::sort(toks.begin(), toks.end());
      toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
      for (const auto& t : toks) idx.postings[t].push_back(id);
      idx.tokens_of.emplace(id, std::move(toks));
    }
    return idx;
  }
};

std::set<std::string> ancestors_of(const EventGraph& g, const std::string& id) {
  std::set<std::string> out;
  std::vector<std::string> stack{id};
  while (!stack.empty()) {
    std::string cur = stack.back();
    stack.pop_back();
    for (const auto& p : g.direct_parents(cur)) {
      if (out.insert(p).second) stack.push_back(p);
    }
  }
  return out;
}

std::vector<std::string> top_candidates(const TokenIndex& idx, const EventGraph& g,
                                        const Event& parent, std::size_t k) {
  if (k == 0) return {};
  auto it = idx.tokens_of.find(parent.id);
  const std::vector<std::string> parent_tokens =
      it != idx.tokens_of.end() ? it->second : std::vector<std::string>{};
  if (parent_tokens.empty()) return {};

  std::map<std::string, std::size_t> shared;
  for (const auto& tok : parent_tokens) {
    auto post = idx.postings.find(tok);
    if (post == idx.postings.end()) continue;
    for (const auto& id : post->second) ++shared[id];
  }
  shared.erase(parent.id);
  const std::set<std::string> excluded = ancestors_of(g, parent.id);
  for (const auto& sub : g.direct_sub_events(parent.id)) shared.erase(sub);

  struct Scored {
    std::string id;
    std::size_t overlap;
    double jaccard;
  };
  std::vector<Scored> scored;
  scored.reserve(shared.size());
  for (const auto& [id, count] : shared) {
    if (excluded.count(id)) continue;
    const auto& toks = idx.tokens_of.at(id);
    const std::size_t uni = toks.size() + parent_tokens.size() - count;
    scored.push_back(
        {id, count, uni ? static_cast<double>(count) / static_cast<double>(uni) : 0.0});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.overlap != b.overlap) return a.overlap > b.overlap;
    if (a.jaccard != b.jaccard) return a.jaccard > b.jaccard;
    return a.id < b.id;
  });
  if (scored.size() > k) scored.resize(k);
  std::vector<std::string> out;
  out.reserve(scored.size());
  for (auto& s : scored) out.push_back(std::move(s.id));
  return out;
}

}  // namespace

std::vector<std::string> candidate_sub_events(const EventGraph& g, const Event& parent,
                                              std::size_t k) {
  return top_candidates(TokenIndex::build(g), g, parent, k);
}

std::vector<PredictedRelation> predict_sub_events(const EventGraph& g, const ForestMap& forests,
                                                  const Classifier& clf, const TfIdfIndex& idx,
                                                  const EmbeddingModel* model,
                                                  const PredictionOptions& options) {
  EventGraph work = g;
  const TokenIndex tokens = TokenIndex::build(work);

  // Series family per event, grown as accepted relations attach new events.
  std::map<std::string, std::set<std::string>> family;
  std::set<std::string> roots;
  for (const auto& [series_id, forest] : forests) {
    for (const auto& [node, root] : forest.root_of) {
      (void)root;
      family[node].insert(series_id);
    }
    for (const auto& root : forest.roots) roots.insert(root);
  }

  std::vector<PredictedRelation> accepted;
  std::set<Edge> accepted_set;
  for (int iteration = 1;; ++iteration) {
    // Events inside a series structure: edition roots plus everything
    // reachable downward in the working graph.
    std::set<std::string> in_series;
    {
      std::vector<std::string> stack(roots.begin(), roots.end());
      while (!stack.empty()) {
        std::string cur = stack.back();
        stack.pop_back();
        if (!in_series.insert(cur).second) continue;
        for (const auto& child : work.direct_sub_events(cur)) stack.push_back(child);
      }
    }
    const std::vector<std::string> parents(in_series.begin(), in_series.end());

    struct Proposal {
      std::string sub, parent;
      double probability;
    };
    std::vector<std::vector<Proposal>> per_parent(parents.size());
    parallel_for(parents.size(), options.threads, [&](std::size_t pi) {
      const Event& parent = work.event(parents[pi]);
      for (const auto& cand : top_candidates(tokens, work, parent, options.candidates_k)) {
        if (work.has_sub_event_edge(cand, parent.id)) continue;
        const FeatureVector fv = extract_features(work.event(cand), parent, work, idx, model);
        const double p = clf.predict_proba(fv.values);
        if (p >= 0.5) per_parent[pi].push_back({cand, parent.id, p});
      }
    });

    std::vector<Proposal> proposals;
    for (auto& list : per_parent) {
      proposals.insert(proposals.end(), list.begin(), list.end());
    }
    std::sort(proposals.begin(), proposals.end(), [](const Proposal& a, const Proposal& b) {
      if (a.probability != b.probability) return a.probability > b.probability;
      if (a.sub != b.sub) return a.sub < b.sub;
      return a.parent < b.parent;
    });

    std::size_t committed = 0;
    for (const auto& prop : proposals) {
      if (work.has_sub_event_edge(prop.sub, prop.parent)) continue;
      if (prop.sub == prop.parent) continue;
      // Acyclicity: the candidate must not already sit above the parent.
      if (work.is_ancestor(prop.sub, prop.parent)) continue;
      // One parent per series family.
      const auto& fam_parent = family[prop.parent];
      bool second_parent = false;
      for (const auto& existing : work.direct_parents(prop.sub)) {
        const auto& fam_existing = family[existing];
        for (const auto& f : fam_existing) {
          if (fam_parent.count(f)) {
            second_parent = true;
            break;
          }
        }
        if (second_parent) break;
      }
      if (second_parent) continue;

      work.add_sub_event_edge(prop.sub, prop.parent);
      family[prop.sub].insert(fam_parent.begin(), fam_parent.end());
      accepted.push_back({prop.sub, prop.parent, prop.probability, iteration});
      accepted_set.insert({prop.sub, prop.parent});
      ++committed;
    }
    if (committed == 0) break;
  }
  return accepted;
}

void write_predicted_tsv(const std::string& path, const std::vector<PredictedRelation>& rels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  char buf[32];
  for (const auto& r : rels) {
    std::snprintf(buf, sizeof(buf), "%.6f", r.probability);
    out << r.sub_id << '\t' << r.parent_id << '\t' << buf << '\t' << r.iteration << '\n';
  }
}

}  // namespace happening
