#pragma once
// Event inference: fills slots that sibling editions of a series cover but a
// particular edition lacks. For each edition, every sub-series of its series
// not yet represented among its direct sub-events is checked against the
// configured constraint; surviving slots receive an event whose label is
// synthesized by replaying the token edit script between sibling edition
// labels onto the sibling's sub-event label, with rule-based time and
// location generation and graph-wide duplicate-label detection.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "happening/graph.hpp"
#include "happening/series.hpp"

namespace happening {

inline constexpr const char* kInferredIdPrefix = "happening:";

enum class Constraint { BSL, EVO, INT, WIN, COV, CWI, ECW };

std::string to_string(Constraint c);
Constraint constraint_from_string(const std::string& s);

struct InferenceConfig {
  Constraint constraint = Constraint::BSL;
  int window_before = 5;  // a
  int window_after = 5;   // b
  double coverage_alpha = 0.5;

  void validate() const;
};

enum class EditOpKind { Equal, Delete, Insert };

struct EditOp {
  EditOpKind op;
  std::vector<std::string> text;  // non-empty; adjacent ops of one kind are merged
  bool operator==(const EditOp&) const = default;
};

// Minimal token edit script turning a into b. Within a replacement block the
// deletion precedes the insertion.
std::vector<EditOp> myers_diff(const std::vector<std::string>& a,
                               const std::vector<std::string>& b);

enum class TimeRule { PARENT_EQUAL, WHOLE_YEAR, LABEL_YEAR };

std::string to_string(TimeRule r);

struct InferredEvent {
  std::string id;  // happening:<n>
  std::string label;
  std::optional<Interval> time;
  std::vector<std::string> locations;
  std::string parent_id;
  std::string series_id;
  Constraint constraint_used = Constraint::BSL;
  std::optional<TimeRule> time_rule_used;
};

struct InferenceDelta {
  std::vector<InferredEvent> events;
  std::vector<Edge> relations;  // (sub, parent), including duplicate-merge relations
  std::vector<std::pair<std::string, std::string>> memberships;  // (event, series)

  bool empty() const { return events.empty() && relations.empty() && memberships.empty(); }
};

struct InferenceReport {
  std::string constraint;
  int inferred_events = 0;
  int new_relations = 0;
  int dedup_relations = 0;
  std::map<std::string, int> time_rule_counts;
  std::map<std::string, int> skip_reasons;

  std::string json() const;
};

// Working state shared by the inference operations: a mutable copy of the
// graph and series set plus the indexes Algorithm-style lookups need.
class InferenceContext {
 public:
  InferenceContext(const EventGraph& g, const SeriesMap& series);

  const EventGraph& graph() const { return graph_; }
  const SeriesMap& series() const { return series_; }
  std::optional<std::string> series_of(const std::string& event_id) const;

  EventGraph& mutable_graph() { return graph_; }
  SeriesMap& mutable_series() { return series_; }
  void register_member(const std::string& event_id, const std::string& series_id);
  std::optional<std::string> find_by_label(const std::string& normalized_label) const;
  void index_label(const std::string& normalized_label, const std::string& event_id);
  std::string next_inferred_id();

 private:
  EventGraph graph_;
  SeriesMap series_;
  std::map<std::string, std::string> series_of_;
  std::map<std::string, std::string> label_index_;  // normalized label -> smallest event id
  std::uint64_t next_id_ = 1;
};

// True when the sub-series m may produce an event under edition e of series sp.
bool check_constraints(const EventSeries& m, const std::string& edition_id,
                       const EventSeries& sp, const EventGraph& g, const InferenceConfig& cfg);

// Label synthesis per the edit-replay scheme; nothing when no similar edition
// has a sub-event in m, or the edit pattern is unsupported.
std::optional<std::string> generate_label(const std::string& edition_id, const EventSeries& m,
                                          const InferenceContext& ctx);

std::optional<std::pair<Interval, TimeRule>> generate_time(const std::string& edition_id,
                                                           const EventSeries& m,
                                                           const std::string& label,
                                                           const InferenceContext& ctx);

std::vector<std::string> generate_location(const std::string& edition_id, const EventSeries& m,
                                           const InferenceContext& ctx);

// Recursive per-edition inference (the edition, then all of its direct
// sub-events, including freshly inferred ones).
void infer_sub_events(const std::string& edition_id, InferenceContext& ctx,
                      const InferenceConfig& cfg, std::set<std::string>& visited,
                      InferenceDelta& delta, InferenceReport& report);

std::pair<InferenceDelta, InferenceReport> run_inference(const EventGraph& g,
                                                         const SeriesMap& series,
                                                         const InferenceConfig& cfg);

// Merges a delta into a graph and series set (events, memberships, edges).
void apply_delta(EventGraph& g, SeriesMap& series, const InferenceDelta& delta);

// id, label, start, end, locations, parent_id, series_id, constraint, time_rule
void write_inferred_tsv(const std::string& path, const std::vector<InferredEvent>& events);

}  // namespace happening
