#pragma once
// In-memory event graph: events with optional happening intervals, sub-event
// and follow-up edges, series memberships and generic relations. Loaded from
// and saved to tab-separated flat files:
//
//   events.tsv     id \t label \t start \t end \t loc1;loc2 \t type1;type2
//   relations.tsv  subject \t predicate \t object
//                  (reserved predicates: subEventOf, followedBy, inSeries)
//   series.tsv     series_id \t series_label            (optional)
//
// UTF-8, LF line endings, no header row. Empty strings mark absent values.
//
// Construction is single-writer; after load the graph is immutable and safe
// for concurrent reads. Batch mutation (merging predicted or inferred edges)
// happens in exclusive phases between read phases.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace happening {

inline constexpr const char* kSubEventPredicate = "subEventOf";
inline constexpr const char* kFollowUpPredicate = "followedBy";
inline constexpr const char* kInSeriesPredicate = "inSeries";

struct Date {
  int year = 0;
  int month = 1;
  int day = 1;
  auto operator<=>(const Date&) const = default;
};

bool is_valid_date(const Date& d);
std::optional<Date> parse_date(const std::string& s);
std::string format_date(const Date& d);

struct Interval {
  Date start;
  Date end;
  bool operator==(const Interval&) const = default;
};

inline bool intervals_overlap(const Interval& a, const Interval& b) {
  return !(a.end < b.start || b.end < a.start);
}
inline bool interval_contains(const Interval& outer, const Interval& inner) {
  return outer.start <= inner.start && inner.end <= outer.end;
}
// [Jan 1, Dec 31] of the interval's start year, when the interval is exactly that.
bool is_whole_year(const Interval& iv);
Interval whole_year(int year);

struct Event {
  std::string id;
  std::string label;
  std::optional<Interval> time;
  std::set<std::string> locations;
  std::set<std::string> types;
};

struct Triple {
  std::string subject;
  std::string predicate;
  std::string object;
  auto operator<=>(const Triple&) const = default;
};

using Edge = std::pair<std::string, std::string>;  // sub-event edges: (sub, parent)

class GraphLoadError : public std::runtime_error {
 public:
  GraphLoadError(std::string file, std::size_t line, std::size_t column, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) +
                           (column ? ":" + std::to_string(column) : "") + ": " + what),
        file_(std::move(file)),
        line_(line),
        column_(column) {}
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::string file_;
  std::size_t line_;
  std::size_t column_;
};

class EventGraph {
 public:
  // Mutators validate endpoint existence and the self-loop / 2-cycle invariants.
  void add_event(Event e);
  void add_sub_event_edge(const std::string& sub, const std::string& parent);
  void add_follow_up_edge(const std::string& earlier, const std::string& later);
  void set_series_membership(const std::string& event_id, const std::string& series_id);
  void add_generic_edge(const std::string& subject, const std::string& predicate,
                        const std::string& object);
  void set_series_label(const std::string& series_id, const std::string& label);
  // Removes the event and every edge or membership touching it.
  void remove_event(const std::string& id);

  bool has_event(const std::string& id) const { return events_.count(id) != 0; }
  const Event& event(const std::string& id) const;
  const std::map<std::string, Event>& events() const { return events_; }
  const std::set<Edge>& sub_event_edges() const { return sub_event_edges_; }
  const std::set<Edge>& follow_up_edges() const { return follow_up_edges_; }
  const std::map<std::string, std::string>& series_membership() const { return membership_; }
  const std::set<Triple>& generic_edges() const { return generic_edges_; }
  const std::map<std::string, std::string>& series_labels() const { return series_labels_; }

  std::optional<std::string> membership_of(const std::string& event_id) const;
  bool has_sub_event_edge(const std::string& sub, const std::string& parent) const {
    return sub_event_edges_.count({sub, parent}) != 0;
  }
  // Sorted adjacency; empty vector for unknown ids.
  const std::vector<std::string>& direct_sub_events(const std::string& parent) const;
  const std::vector<std::string>& direct_parents(const std::string& sub) const;
  // True when `ancestor` is reachable from `start` by walking parent edges.
  bool is_ancestor(const std::string& ancestor, const std::string& start) const;

  bool operator==(const EventGraph& other) const;

 private:
  std::map<std::string, Event> events_;
  std::set<Edge> sub_event_edges_;
  std::set<Edge> follow_up_edges_;
  std::map<std::string, std::string> membership_;
  std::set<Triple> generic_edges_;
  std::map<std::string, std::string> series_labels_;
  std::map<std::string, std::vector<std::string>> children_;
  std::map<std::string, std::vector<std::string>> parents_;

  void require_event(const std::string& id, const char* role) const;
};

EventGraph load_graph(const std::string& events_path, const std::string& relations_path,
                      const std::optional<std::string>& series_path = std::nullopt);
void save_graph(const EventGraph& g, const std::string& events_path,
                const std::string& relations_path,
                const std::optional<std::string>& series_path = std::nullopt);

struct ValidationFinding {
  std::string code;
  std::string message;
  std::string offending_id;
};

struct ValidationReport {
  int error_count = 0;
  std::vector<ValidationFinding> warnings;  // errors and warnings, in detection order
};

// Error-class code: CYCLE. Warning codes: SERIES_DANGLING, LABEL_EMPTY, NO_TIME_NO_LABEL.
ValidationReport validate_graph(const EventGraph& g);

}  // namespace happening
