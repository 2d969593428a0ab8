#pragma once
// Event series handling: building the series set from memberships, template
// labels, Gini-impurity filtering, implicit series discovery, normalization
// of each series into a forest of acyclic rooted edition trees, and
// sub-series links.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "happening/graph.hpp"

namespace happening {

inline constexpr const char* kImplicitSeriesPrefix = "implicit:";
inline constexpr double kDefaultImpurityThreshold = 0.9;

inline const std::set<std::string>& default_excluded_types() {
  static const std::set<std::string> kTypes{"military_conflict", "natural_disaster"};
  return kTypes;
}

struct EventSeries {
  std::string id;
  std::string label;                  // empty for unlabeled (implicit) series
  std::vector<std::string> editions;  // ascending by start time; untimed last, by id
  std::set<std::string> sub_series;
  std::set<std::string> parent_series;
};

using SeriesMap = std::map<std::string, EventSeries>;

struct RemovedEntry {
  std::string event_id;
  std::string reason;
};

struct EditionForest {
  std::string series_id;
  std::vector<std::string> roots;  // one tree per edition, in edition order
  std::map<std::string, std::string> parent_of;               // tree edges, child -> parent
  std::map<std::string, std::vector<std::string>> children_of;  // sorted children
  std::map<std::string, std::string> root_of;  // every tree node -> its edition root
  std::vector<RemovedEntry> removed;

  bool contains(const std::string& id) const { return root_of.count(id) != 0; }
};

using ForestMap = std::map<std::string, EditionForest>;

// 1 - sum(p_c^2) over the class proportions of distinct strings. Throws on
// empty input.
double gini_impurity(const std::vector<std::string>& items);

// Orders event ids by (start time, id); events without a time go last, by id.
std::vector<std::string> order_editions(const EventGraph& g, std::vector<std::string> ids);

// Series declared through inSeries memberships (labels from series.tsv when
// present). Empty series (ids only mentioned in series.tsv) are kept with no
// editions.
SeriesMap build_series_from_graph(const EventGraph& g);

// Connected components (over sub-event and follow-up edges) of events lacking
// series membership become new unlabeled series with reserved ids
// "implicit:<smallest event id>"; their editions are the component's
// parentless events in edition order.
SeriesMap detect_implicit_series(const EventGraph& g);

struct FilterOutcome {
  SeriesMap kept;
  std::vector<std::string> rejected;                    // series ids over the threshold
  std::map<std::string, std::vector<std::string>> removed_editions;  // per kept series
};

// Drops editions typed with an excluded tag, rejects series whose edition
// template labels have Gini impurity >= threshold, then greedily removes
// editions while each removal strictly decreases the impurity (largest
// decrease first; ties by latest start time, then lexicographically larger id).
FilterOutcome filter_series(const EventGraph& g, const SeriesMap& all_series,
                            double impurity_threshold, const std::set<std::string>& excluded_types);

// One rooted tree per edition over its transitive sub-events. Events reachable
// from two editions, events on cycles and multi-parent events are dropped into
// `removed`. nullopt when an edition root itself sits on a cycle; the caller
// drops such series.
std::optional<EditionForest> to_edition_forest(const EventSeries& s, const EventGraph& g);

struct ForestOutcome {
  ForestMap forests;
  std::vector<std::string> dropped_series;
};

ForestOutcome build_forests(const SeriesMap& series, const EventGraph& g);

// Registers s_s as a sub-series of s_p when some member of s_s is a direct
// sub-event of a member of s_p. Membership here means edition lists.
void compute_sub_series(SeriesMap& series, const EventGraph& g);

// Edition-list membership index: event id -> series id.
std::map<std::string, std::string> edition_index(const SeriesMap& series);

// Indented one-tree-per-edition dump, for debugging.
std::string dump_forest(const EditionForest& f, const EventGraph& g);

}  // namespace happening
