#include "happening/eval.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "happening/rng.hpp"
#include "happening/text.hpp"

namespace happening {

CorruptionResult corrupt_graph(const EventGraph& g, const ForestMap& forests,
                               const CorruptionSpec& spec) {
  if (spec.factor <= 0.0 || spec.factor >= 1.0) {
    throw std::invalid_argument("corruption factor must be in (0,1)");
  }
  // Leaves: forest events without sub-events. Parentless editions stay.
  std::set<std::string> leaves;
  for (const auto& [series_id, forest] : forests) {
    (void)series_id;
    for (const auto& [node, root] : forest.root_of) {
      (void)root;
      if (g.direct_sub_events(node).empty() && !g.direct_parents(node).empty()) {
        leaves.insert(node);
      }
    }
  }

  CorruptionResult result;
  result.graph = g;
  const std::size_t count =
      static_cast<std::size_t>(spec.factor * static_cast<double>(leaves.size()));
  if (count == 0) {
    result.warnings.push_back("corruption factor " + std::to_string(spec.factor) + " removes 0 of " +
                              std::to_string(leaves.size()) + " leaves");
    return result;
  }

  const std::vector<std::string> pool(leaves.begin(), leaves.end());
  Rng rng = make_rng(spec.seed, "corruption");
  auto picks = sample_indices(pool.size(), count, rng);
  std::sort(picks.begin(), picks.end());
  for (std::size_t i : picks) {
    result.removed.push_back(g.event(pool[i]));
    result.graph.remove_event(pool[i]);
  }
  return result;
}

namespace {

std::size_t matched_count(const std::vector<Event>& removed,
                          const std::vector<InferredEvent>& inferred) {
  std::set<std::string> labels;
  for (const auto& e : inferred) labels.insert(normalize_label(e.label));
  std::size_t matched = 0;
  for (const auto& e : removed) {
    if (labels.count(normalize_label(e.label))) ++matched;
  }
  return matched;
}

}  // namespace

double reconstruction_recall(const std::vector<Event>& removed,
                             const std::vector<InferredEvent>& inferred) {
  if (removed.empty()) throw std::invalid_argument("reconstruction_recall: nothing was removed");
  return 100.0 * static_cast<double>(matched_count(removed, inferred)) /
         static_cast<double>(removed.size());
}

// ---------------------------------------------------------------------------
// Synthetic corpus
// ---------------------------------------------------------------------------

void SyntheticCorpusSpec::validate() const {
  if (series_count < 1 || editions_per_series < 1 || depth < 0 || branching < 1) {
    throw std::invalid_argument("corpus counts must be >= 1 (depth >= 0)");
  }
  for (double f : {late_start_fraction, discontinued_fraction, gap_fraction}) {
    if (f < 0.0 || f > 1.0) throw std::invalid_argument("corpus fractions must be in [0,1]");
  }
}

namespace {

// Digit-free letter code: 0 -> A, 25 -> Z, 26 -> AA ...
std::string letter_code(int i) {
  std::string s;
  ++i;
  while (i > 0) {
    --i;
    s.insert(s.begin(), static_cast<char>('A' + i % 26));
    i /= 26;
  }
  return s;
}

const char* kSlotWords[] = {"Alpha", "Beta",  "Gamma", "Delta", "Epsilon", "Zeta",
                            "Eta",   "Theta", "Iota",  "Kappa", "Lambda",  "Mu"};

std::string slot_word(int i) {
  constexpr int n = static_cast<int>(std::size(kSlotWords));
  if (i < n) return kSlotWords[i];
  return std::string("Slot ") + letter_code(i - n);
}

struct SlotNode {
  std::string path_name;  // e.g. "Alpha" or "Alpha Beta"
  std::string series_id;
  int parent = -1;  // index into the slot vector, -1 = edition root
  std::vector<bool> present;
};

}  // namespace

SyntheticCorpus generate_synthetic_corpus(const SyntheticCorpusSpec& spec) {
  spec.validate();
  SyntheticCorpus corpus;
  EventGraph& g = corpus.graph;
  const int n_ed = spec.editions_per_series;

  Rng rng = make_rng(spec.seed, "corpus");
  for (int s = 0; s < spec.series_count; ++s) {
    const std::string series_name = "Open " + letter_code(s);
    const std::string series_id = "corpus:" + letter_code(s);
    const std::string city = "City " + letter_code(s);
    g.set_series_label(series_id, series_name);

    // Slot tree (shared template across editions), breadth-first.
    std::vector<SlotNode> slots;
    std::vector<int> current_level;  // -1 marks the edition root level
    current_level.push_back(-1);
    for (int level = 1; level <= spec.depth; ++level) {
      std::vector<int> next_level;
      for (int parent : current_level) {
        for (int b = 0; b < spec.branching; ++b) {
          SlotNode node;
          node.parent = parent;
          node.path_name = parent < 0
                               ? slot_word(b)
                               : slots[static_cast<std::size_t>(parent)].path_name + " " +
                                     slot_word(b);
          node.series_id = series_id + ":" + node.path_name;
          slots.push_back(std::move(node));
          next_level.push_back(static_cast<int>(slots.size()) - 1);
        }
      }
      current_level = std::move(next_level);
    }

    // Presence per slot: late starters, discontinued slots and gaps; a slot is
    // only effectively present where its parent slot is.
    for (auto& slot : slots) {
      int start = 0;
      int end = n_ed - 1;
      std::vector<bool> skipped(static_cast<std::size_t>(n_ed), false);
      if (n_ed > 1 && uniform_unit(rng) < spec.late_start_fraction) {
        start = 1 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(n_ed - 1)));
      }
      if (n_ed > 1 && uniform_unit(rng) < spec.discontinued_fraction) {
        end = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(n_ed - 1)));
      }
      if (uniform_unit(rng) < spec.gap_fraction) {
        for (int i = 1; i + 1 < n_ed; ++i) {
          if (uniform_unit(rng) < 0.25) skipped[static_cast<std::size_t>(i)] = true;
        }
      }
      slot.present.resize(static_cast<std::size_t>(n_ed));
      for (int i = 0; i < n_ed; ++i) {
        bool ok = i >= start && i <= end && !skipped[static_cast<std::size_t>(i)];
        if (ok && slot.parent >= 0) {
          ok = slots[static_cast<std::size_t>(slot.parent)].present[static_cast<std::size_t>(i)];
        }
        slot.present[static_cast<std::size_t>(i)] = ok;
      }
    }

    // Events per edition.
    for (int i = 0; i < n_ed; ++i) {
      const int year = spec.base_year + i;
      const std::string root_id = series_id + ":e" + letter_code(i);
      Event root;
      root.id = root_id;
      root.label = std::to_string(year) + " " + series_name;
      root.time = whole_year(year);
      root.locations.insert(city);
      root.types.insert("tournament");
      g.add_event(std::move(root));
      g.set_series_membership(root_id, series_id);
      if (i > 0) {
        g.add_follow_up_edge(series_id + ":e" + letter_code(i - 1), root_id);
      }

      for (std::size_t si = 0; si < slots.size(); ++si) {
        const SlotNode& slot = slots[si];
        if (!slot.present[static_cast<std::size_t>(i)]) continue;
        const std::string event_id = slot.series_id + ":e" + letter_code(i);
        const std::string parent_id =
            slot.parent < 0 ? root_id
                            : slots[static_cast<std::size_t>(slot.parent)].series_id + ":e" +
                                  letter_code(i);
        Event ev;
        ev.id = event_id;
        ev.label = std::to_string(year) + " " + series_name + " - " + slot.path_name;
        if (slot.parent < 0) {
          // Top-level slots alternate whole-year and month-long intervals;
          // deeper slots are whole years. Between them every time-generation
          // rule occurs somewhere in the corpus.
          const int b = static_cast<int>(si) % spec.branching;
          if (b % 2 == 0) {
            ev.time = whole_year(year);
          } else {
            const int month = 1 + b % 12;
            ev.time = Interval{{year, month, 1}, {year, month, 28}};
          }
        } else {
          ev.time = whole_year(year);
        }
        ev.locations.insert(city);
        ev.types.insert("competition");
        g.add_event(std::move(ev));
        g.add_sub_event_edge(event_id, parent_id);
        g.set_series_membership(event_id, slot.series_id);
        // Editions of a sub-series chain with follow-ups like any series.
        for (int back = i - 1; back >= 0; --back) {
          if (slot.present[static_cast<std::size_t>(back)]) {
            g.add_follow_up_edge(slot.series_id + ":e" + letter_code(back), event_id);
            break;
          }
        }
      }
    }

    for (const auto& slot : slots) {
      bool any = std::any_of(slot.present.begin(), slot.present.end(), [](bool p) { return p; });
      if (any) {
        g.set_series_label(slot.series_id, series_name + " - " + slot.path_name);
      }
      corpus.catalog.push_back(
          {slot.series_id, template_label(series_name + " - " + slot.path_name), slot.present});
    }
  }

  corpus.series = build_series_from_graph(g);
  return corpus;
}

PreparedSeries prepare_series(const EventGraph& g, double impurity_threshold,
                              const std::set<std::string>& excluded_types) {
  SeriesMap all = build_series_from_graph(g);
  for (auto& [id, s] : detect_implicit_series(g)) all.emplace(id, std::move(s));

  // Series with declared labels but no members carry no structure.
  for (auto it = all.begin(); it != all.end();) {
    it = it->second.editions.empty() ? all.erase(it) : std::next(it);
  }

  FilterOutcome filtered = filter_series(g, all, impurity_threshold, excluded_types);
  PreparedSeries out;
  out.rejected_series = std::move(filtered.rejected);
  out.removed_editions = std::move(filtered.removed_editions);

  ForestOutcome forests = build_forests(filtered.kept, g);
  for (const auto& dropped : forests.dropped_series) {
    filtered.kept.erase(dropped);
    out.rejected_series.push_back(dropped);
  }
  out.series = std::move(filtered.kept);
  out.forests = std::move(forests.forests);
  compute_sub_series(out.series, g);
  std::sort(out.rejected_series.begin(), out.rejected_series.end());
  return out;
}

std::vector<RecallCell> evaluate_recall(const EventGraph& g,
                                        const std::vector<Constraint>& constraints,
                                        const std::vector<double>& factors,
                                        const InferenceConfig& base_cfg,
                                        double impurity_threshold,
                                        const std::set<std::string>& excluded_types,
                                        std::uint64_t seed) {
  PreparedSeries base = prepare_series(g, impurity_threshold, excluded_types);
  std::vector<RecallCell> cells;
  for (std::size_t fi = 0; fi < factors.size(); ++fi) {
    CorruptionSpec spec;
    spec.factor = factors[fi];
    spec.seed = mix64(seed + fi);
    CorruptionResult corrupted = corrupt_graph(g, base.forests, spec);
    // Corruption can change forests; redo the pre-processing on the result.
    PreparedSeries prep =
        prepare_series(corrupted.graph, impurity_threshold, excluded_types);
    for (Constraint c : constraints) {
      InferenceConfig cfg = base_cfg;
      cfg.constraint = c;
      auto [delta, report] = run_inference(corrupted.graph, prep.series, cfg);
      (void)report;
      RecallCell cell;
      cell.constraint = c;
      cell.factor = factors[fi];
      cell.removed = corrupted.removed.size();
      cell.inferred = delta.events.size();
      cell.matched = matched_count(corrupted.removed, delta.events);
      cell.recall = cell.removed == 0 ? 0.0
                                      : 100.0 * static_cast<double>(cell.matched) /
                                            static_cast<double>(cell.removed);
      cells.push_back(cell);
    }
  }
  return cells;
}

std::string recall_report_json(const std::vector<RecallCell>& cells) {
  nlohmann::json j;
  for (const auto& cell : cells) {
    char factor_key[16];
    std::snprintf(factor_key, sizeof(factor_key), "%g", cell.factor);
    j[to_string(cell.constraint)][factor_key] = {{"recall", cell.recall},
                                                 {"removed", cell.removed},
                                                 {"matched", cell.matched},
                                                 {"inferred", cell.inferred}};
  }
  return j.dump(2);
}

void sample_for_annotation(const std::vector<AnnotationItem>& items, std::size_t n,
                           std::uint64_t seed, const std::string& path) {
  if (n > items.size()) {
    throw std::invalid_argument("sample size exceeds item count");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "id\tlabel\tparent_label\tverdict\n";
  Rng rng = make_rng(seed, "annotation");
  for (std::size_t i : sample_indices(items.size(), n, rng)) {
    const auto& item = items[i];
    out << item.id << '\t' << item.label << '\t' << item.parent_label << "\t\n";
  }
}

}  // namespace happening
