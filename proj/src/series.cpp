#include "happening/series.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "happening/text.hpp"

namespace happening {

double gini_impurity(const std::vector<std::string>& items) {
  if (items.empty()) throw std::invalid_argument("gini_impurity: empty multiset");
  std::map<std::string, std::size_t> counts;
  for (const auto& s : items) ++counts[s];
  const double n = static_cast<double>(items.size());
  double sum_sq = 0.0;
  for (const auto& [s, c] : counts) {
    (void)s;
    const double p = static_cast<double>(c) / n;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

std::vector<std::string> order_editions(const EventGraph& g, std::vector<std::string> ids) {
  std::stable_sort(ids.begin(), ids.end(), [&](const std::string& a, const std::string& b) {
    const auto& ta = g.event(a).time;
    const auto& tb = g.event(b).time;
    if (ta.has_value() != tb.has_value()) return ta.has_value();
    if (ta && tb && ta->start != tb->start) return ta->start < tb->start;
    return a < b;
  });
  return ids;
}

SeriesMap build_series_from_graph(const EventGraph& g) {
  SeriesMap series;
  for (const auto& [id, label] : g.series_labels()) {
    EventSeries s;
    s.id = id;
    s.label = label;
    series.emplace(id, std::move(s));
  }
  std::map<std::string, std::vector<std::string>> members;
  for (const auto& [event_id, series_id] : g.series_membership()) {
    members[series_id].push_back(event_id);
  }
  for (auto& [series_id, ids] : members) {
    auto [it, inserted] = series.try_emplace(series_id);
    if (inserted) it->second.id = series_id;
    it->second.editions = order_editions(g, std::move(ids));
  }
  return series;
}

SeriesMap detect_implicit_series(const EventGraph& g) {
  // Union of sub-event and follow-up adjacency, restricted to events without
  // a series membership.
  std::map<std::string, std::vector<std::string>> adj;
  auto connect = [&](const std::string& a, const std::string& b) {
    if (g.membership_of(a) || g.membership_of(b)) return;
    adj[a].push_back(b);
    adj[b].push_back(a);
  };
  for (const auto& [sub, parent] : g.sub_event_edges()) connect(sub, parent);
  for (const auto& [earlier, later] : g.follow_up_edges()) connect(earlier, later);

  SeriesMap out;
  std::set<std::string> seen;
  for (const auto& [start, neighbors] : adj) {
    (void)neighbors;
    if (seen.count(start)) continue;
    std::vector<std::string> component, stack{start};
    seen.insert(start);
    while (!stack.empty()) {
      std::string cur = stack.back();
      stack.pop_back();
      component.push_back(cur);
      for (const auto& next : adj[cur]) {
        if (seen.insert(next).second) stack.push_back(next);
      }
    }
    std::sort(component.begin(), component.end());
    // Editions: component events that are not a sub-event of anything.
    std::vector<std::string> roots;
    for (const auto& id : component) {
      if (g.direct_parents(id).empty()) roots.push_back(id);
    }
    if (roots.empty()) continue;
    EventSeries s;
    s.id = std::string(kImplicitSeriesPrefix) + component.front();
    s.editions = order_editions(g, std::move(roots));
    out.emplace(s.id, std::move(s));
  }
  return out;
}

namespace {

std::vector<std::string> edition_templates(const EventGraph& g,
                                           const std::vector<std::string>& editions) {
  std::vector<std::string> t;
  t.reserve(editions.size());
  for (const auto& id : editions) t.push_back(template_label(g.event(id).label));
  return t;
}

}  // namespace

FilterOutcome filter_series(const EventGraph& g, const SeriesMap& all_series,
                            double impurity_threshold,
                            const std::set<std::string>& excluded_types) {
  if (impurity_threshold < 0.0 || impurity_threshold > 1.0) {
    throw std::invalid_argument("impurity threshold must be in [0,1]");
  }
  FilterOutcome out;
  for (const auto& [id, s] : all_series) {
    EventSeries kept = s;
    std::vector<std::string> removed;

    // (a) editions typed with an excluded tag are dropped.
    std::vector<std::string> editions;
    for (const auto& ev_id : kept.editions) {
      const auto& types = g.event(ev_id).types;
      bool excluded = std::any_of(types.begin(), types.end(),
                                  [&](const std::string& t) { return excluded_types.count(t); });
      if (excluded) {
        removed.push_back(ev_id);
      } else {
        editions.push_back(ev_id);
      }
    }
    if (editions.empty()) {
      out.rejected.push_back(id);
      continue;
    }

    // (b) reject on impurity over the threshold.
    if (gini_impurity(edition_templates(g, editions)) >= impurity_threshold) {
      out.rejected.push_back(id);
      continue;
    }

    // (c) greedy removals, each strictly decreasing the impurity. Largest
    // decrease wins; ties go to the latest start time, then the larger id.
    while (editions.size() > 1) {
      const double before = gini_impurity(edition_templates(g, editions));
      double best_after = before;
      std::size_t best_idx = editions.size();
      for (std::size_t i = 0; i < editions.size(); ++i) {
        std::vector<std::string> rest;
        rest.reserve(editions.size() - 1);
        for (std::size_t j = 0; j < editions.size(); ++j) {
          if (j != i) rest.push_back(editions[j]);
        }
        const double after = gini_impurity(edition_templates(g, rest));
        if (after < best_after) {
          best_after = after;
          best_idx = i;
        } else if (after == best_after && best_idx < editions.size()) {
          auto later = [&](const std::string& a, const std::string& b) {
            const auto& ta = g.event(a).time;
            const auto& tb = g.event(b).time;
            if (ta.has_value() != tb.has_value()) return !ta.has_value();  // untimed = latest
            if (ta && tb && ta->start != tb->start) return tb->start < ta->start;
            return a > b;
          };
          if (later(editions[i], editions[best_idx])) best_idx = i;
        }
      }
      if (best_idx == editions.size() || best_after >= before) break;
      removed.push_back(editions[best_idx]);
      editions.erase(editions.begin() + static_cast<std::ptrdiff_t>(best_idx));
    }

    kept.editions = std::move(editions);
    if (!removed.empty()) out.removed_editions[id] = std::move(removed);
    out.kept.emplace(id, std::move(kept));
  }
  return out;
}

std::optional<EditionForest> to_edition_forest(const EventSeries& s, const EventGraph& g) {
  EditionForest forest;
  forest.series_id = s.id;
  forest.roots = s.editions;

  std::set<std::string> edition_set(s.editions.begin(), s.editions.end());
  std::set<std::string> dropped;
  auto drop = [&](const std::string& id, const char* reason) {
    if (dropped.insert(id).second) forest.removed.push_back({id, reason});
  };

  // Reachability from each edition root via sub-event children. An event
  // reached from two roots leaves both trees; a path that returns to its own
  // root means the root sits on a cycle and the series is unrepairable.
  std::map<std::string, std::string> claimed_by;  // event -> first reaching root
  std::set<std::string> shared;
  for (const auto& root : s.editions) {
    std::set<std::string> visited;
    std::vector<std::string> stack{root};
    visited.insert(root);
    while (!stack.empty()) {
      std::string cur = stack.back();
      stack.pop_back();
      for (const auto& child : g.direct_sub_events(cur)) {
        if (child == root) return std::nullopt;  // cycle through the edition root
        if (edition_set.count(child)) continue;  // another edition's root stays its own tree
        if (!visited.insert(child).second) continue;
        auto [it, inserted] = claimed_by.try_emplace(child, root);
        if (!inserted && it->second != root) shared.insert(child);
        stack.push_back(child);
      }
    }
  }
  for (const auto& id : shared) drop(id, "reachable from multiple editions");

  // Cycles below a root: iterative DFS with an on-path marker; every event on
  // a back-edge cycle is dropped.
  for (const auto& root : s.editions) {
    std::map<std::string, int> state;  // 0 new, 1 on path, 2 done
    struct Frame {
      std::string node;
      std::size_t child = 0;
    };
    std::vector<Frame> frames{{root}};
    std::vector<std::string> path{root};
    state[root] = 1;
    while (!frames.empty()) {
      Frame& fr = frames.back();
      const auto& children = g.direct_sub_events(fr.node);
      if (fr.child < children.size()) {
        const std::string& next = children[fr.child++];
        if (edition_set.count(next) || dropped.count(next)) continue;
        int st = state.count(next) ? state[next] : 0;
        if (st == 0) {
          state[next] = 1;
          frames.push_back({next});
          path.push_back(next);
        } else if (st == 1) {
          // Everything on the path from `next` down to the current node cycles.
          auto it = std::find(path.begin(), path.end(), next);
          for (; it != path.end(); ++it) {
            if (*it == root) return std::nullopt;
            drop(*it, "participates in a cycle");
          }
        }
      } else {
        state[fr.node] = 2;
        frames.pop_back();
        path.pop_back();
      }
    }
  }

  // Multi-parent events: more than one surviving parent inside the same tree.
  // Removals can orphan descendants, so iterate to a fixed point.
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& root : s.editions) {
      std::set<std::string> in_tree{root};
      std::vector<std::string> stack{root};
      while (!stack.empty()) {
        std::string cur = stack.back();
        stack.pop_back();
        for (const auto& child : g.direct_sub_events(cur)) {
          if (edition_set.count(child) || dropped.count(child)) continue;
          if (in_tree.insert(child).second) stack.push_back(child);
        }
      }
      for (const auto& node : in_tree) {
        if (node == root) continue;
        int parents_in_tree = 0;
        for (const auto& p : g.direct_parents(node)) {
          if (in_tree.count(p) && !dropped.count(p)) ++parents_in_tree;
        }
        if (parents_in_tree > 1) {
          drop(node, "multiple parents within one edition");
          changed = true;
        }
      }
    }
  }

  // Final trees: BFS from each root over surviving events, children in sorted
  // order, first reaching root keeps a node that is still somehow shared.
  for (const auto& root : s.editions) {
    forest.root_of[root] = root;
    std::vector<std::string> queue{root};
    std::size_t head = 0;
    while (head < queue.size()) {
      std::string cur = queue[head++];
      for (const auto& child : g.direct_sub_events(cur)) {
        if (edition_set.count(child) || dropped.count(child)) continue;
        if (forest.root_of.count(child)) continue;
        forest.root_of[child] = root;
        forest.parent_of[child] = cur;
        forest.children_of[cur].push_back(child);
        queue.push_back(child);
      }
    }
  }
  for (auto& [parent, children] : forest.children_of) {
    (void)parent;
    std::sort(children.begin(), children.end());
  }
  // Events whose only connection ran through a dropped node fall out of the
  // trees entirely; record them too.
  for (const auto& [node, root] : claimed_by) {
    (void)root;
    if (!forest.root_of.count(node)) drop(node, "unreachable after removals");
  }
  return forest;
}

ForestOutcome build_forests(const SeriesMap& series, const EventGraph& g) {
  ForestOutcome out;
  for (const auto& [id, s] : series) {
    auto forest = to_edition_forest(s, g);
    if (forest) {
      out.forests.emplace(id, std::move(*forest));
    } else {
      out.dropped_series.push_back(id);
    }
  }
  return out;
}

std::map<std::string, std::string> edition_index(const SeriesMap& series) {
  std::map<std::string, std::string> index;
  for (const auto& [id, s] : series) {
    for (const auto& ev : s.editions) index.emplace(ev, id);
  }
  return index;
}

void compute_sub_series(SeriesMap& series, const EventGraph& g) {
  for (auto& [id, s] : series) {
    (void)id;
    s.sub_series.clear();
    s.parent_series.clear();
  }
  auto index = edition_index(series);
  for (const auto& [sub, parent] : g.sub_event_edges()) {
    auto si = index.find(sub);
    auto pi = index.find(parent);
    if (si == index.end() || pi == index.end()) continue;
    if (si->second == pi->second) continue;
    series[pi->second].sub_series.insert(si->second);
    series[si->second].parent_series.insert(pi->second);
  }
}

std::string dump_forest(const EditionForest& f, const EventGraph& g) {
  std::ostringstream os;
  std::function<void(const std::string&, int)> walk = [&](const std::string& node, int depth) {
    for (int i = 0; i < depth; ++i) os << "  ";
    os << node << "  " << g.event(node).label << '\n';
    auto it = f.children_of.find(node);
    if (it == f.children_of.end()) return;
    for (const auto& child : it->second) walk(child, depth + 1);
  };
  for (const auto& root : f.roots) walk(root, 0);
  if (!f.removed.empty()) {
    os << "removed:\n";
    for (const auto& r : f.removed) os << "  " << r.event_id << "  (" << r.reason << ")\n";
  }
  return os.str();
}

}  // namespace happening
