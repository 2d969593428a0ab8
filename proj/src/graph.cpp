#include "happening/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace happening {

namespace {

const std::vector<std::string> kNoNeighbors;

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static const int d[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return d[m - 1];
}

std::vector<std::string> split_tab(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::set<std::string> split_semicolon(const std::string& s) {
  std::set<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t pos = s.find(';', start);
    std::string item =
        pos == std::string::npos ? s.substr(start) : s.substr(start, pos - start);
    if (!item.empty()) out.insert(item);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string join_semicolon(const std::set<std::string>& items) {
  std::string out;
  bool first = true;
  for (const auto& it : items) {
    if (!first) out.push_back(';');
    out += it;
    first = false;
  }
  return out;
}

void insert_sorted(std::vector<std::string>& v, const std::string& s) {
  auto it = std::lower_bound(v.begin(), v.end(), s);
  if (it == v.end() || *it != s) v.insert(it, s);
}

void erase_value(std::vector<std::string>& v, const std::string& s) {
  auto it = std::lower_bound(v.begin(), v.end(), s);
  if (it != v.end() && *it == s) v.erase(it);
}

}  // namespace

bool is_valid_date(const Date& d) {
  return d.month >= 1 && d.month <= 12 && d.day >= 1 && d.day <= days_in_month(d.year, d.month);
}

std::optional<Date> parse_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto digits = [](const char* p, int n, int& out) {
    out = 0;
    for (int i = 0; i < n; ++i) {
      if (p[i] < '0' || p[i] > '9') return false;
      out = out * 10 + (p[i] - '0');
    }
    return true;
  };
  Date d;
  if (!digits(s.data(), 4, d.year) || !digits(s.data() + 5, 2, d.month) ||
      !digits(s.data() + 8, 2, d.day)) {
    return std::nullopt;
  }
  if (!is_valid_date(d)) return std::nullopt;
  return d;
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

bool is_whole_year(const Interval& iv) {
  return iv.start.year == iv.end.year && iv.start.month == 1 && iv.start.day == 1 &&
         iv.end.month == 12 && iv.end.day == 31;
}

Interval whole_year(int year) { return {{year, 1, 1}, {year, 12, 31}}; }

void EventGraph::require_event(const std::string& id, const char* role) const {
  if (!events_.count(id)) {
    throw std::invalid_argument(std::string(role) + " references unknown event id: " + id);
  }
}

void EventGraph::add_event(Event e) {
  if (e.id.empty()) throw std::invalid_argument("event id must be non-empty");
  if (events_.count(e.id)) throw std::invalid_argument("duplicate event id: " + e.id);
  if (e.time && e.time->end < e.time->start) {
    throw std::invalid_argument("event " + e.id + " has end before start");
  }
  events_.emplace(e.id, std::move(e));
}

void EventGraph::add_sub_event_edge(const std::string& sub, const std::string& parent) {
  require_event(sub, "sub-event edge");
  require_event(parent, "sub-event edge");
  if (sub == parent) throw std::invalid_argument("sub-event self-loop on " + sub);
  if (sub_event_edges_.count({parent, sub})) {
    throw std::invalid_argument("sub-event 2-cycle between " + sub + " and " + parent);
  }
  if (sub_event_edges_.insert({sub, parent}).second) {
    insert_sorted(children_[parent], sub);
    insert_sorted(parents_[sub], parent);
  }
}

void EventGraph::add_follow_up_edge(const std::string& earlier, const std::string& later) {
  require_event(earlier, "follow-up edge");
  require_event(later, "follow-up edge");
  if (earlier == later) throw std::invalid_argument("follow-up self-loop on " + earlier);
  follow_up_edges_.insert({earlier, later});
}

void EventGraph::set_series_membership(const std::string& event_id,
                                       const std::string& series_id) {
  require_event(event_id, "series membership");
  auto it = membership_.find(event_id);
  if (it != membership_.end() && it->second != series_id) {
    throw std::invalid_argument("conflicting series membership for " + event_id);
  }
  membership_[event_id] = series_id;
}

void EventGraph::add_generic_edge(const std::string& subject, const std::string& predicate,
                                  const std::string& object) {
  require_event(subject, "relation");
  require_event(object, "relation");
  generic_edges_.insert({subject, predicate, object});
}

void EventGraph::set_series_label(const std::string& series_id, const std::string& label) {
  series_labels_[series_id] = label;
}

void EventGraph::remove_event(const std::string& id) {
  events_.erase(id);
  membership_.erase(id);
  for (auto it = sub_event_edges_.begin(); it != sub_event_edges_.end();) {
    if (it->first == id || it->second == id) {
      erase_value(children_[it->second], it->first);
      erase_value(parents_[it->first], it->second);
      it = sub_event_edges_.erase(it);
    } else {
      ++it;
    }
  }
  for (auto it = follow_up_edges_.begin(); it != follow_up_edges_.end();) {
    if (it->first == id || it->second == id) {
      it = follow_up_edges_.erase(it);
    } else {
      ++it;
    }
  }
  for (auto it = generic_edges_.begin(); it != generic_edges_.end();) {
    if (it->subject == id || it->object == id) {
      it = generic_edges_.erase(it);
    } else {
      ++it;
    }
  }
  children_.erase(id);
  parents_.erase(id);
}

const Event& EventGraph::event(const std::string& id) const {
  auto it = events_.find(id);
  if (it == events_.end()) throw std::out_of_range("unknown event id: " + id);
  return it->second;
}

std::optional<std::string> EventGraph::membership_of(const std::string& event_id) const {
  auto it = membership_.find(event_id);
  if (it == membership_.end()) return std::nullopt;
  return it->second;
}

const std::vector<std::string>& EventGraph::direct_sub_events(const std::string& parent) const {
  auto it = children_.find(parent);
  return it == children_.end() ? kNoNeighbors : it->second;
}

const std::vector<std::string>& EventGraph::direct_parents(const std::string& sub) const {
  auto it = parents_.find(sub);
  return it == parents_.end() ? kNoNeighbors : it->second;
}

bool EventGraph::is_ancestor(const std::string& ancestor, const std::string& start) const {
  std::vector<std::string> stack{start};
  std::set<std::string> seen;
  while (!stack.empty()) {
    std::string cur = stack.back();
    stack.pop_back();
    if (!seen.insert(cur).second) continue;
    for (const auto& p : direct_parents(cur)) {
      if (p == ancestor) return true;
      stack.push_back(p);
    }
  }
  return false;
}

bool EventGraph::operator==(const EventGraph& other) const {
  auto event_eq = [](const Event& a, const Event& b) {
    return a.id == b.id && a.label == b.label && a.time == b.time &&
           a.locations == b.locations && a.types == b.types;
  };
  if (events_.size() != other.events_.size()) return false;
  for (const auto& [id, e] : events_) {
    auto it = other.events_.find(id);
    if (it == other.events_.end() || !event_eq(e, it->second)) return false;
  }
  return sub_event_edges_ == other.sub_event_edges_ &&
         follow_up_edges_ == other.follow_up_edges_ && membership_ == other.membership_ &&
         generic_edges_ == other.generic_edges_ && series_labels_ == other.series_labels_;
}

namespace {

// Reads LF-separated lines; a trailing \r is tolerated. Returns false at EOF.
bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

EventGraph load_graph(const std::string& events_path, const std::string& relations_path,
                      const std::optional<std::string>& series_path) {
  EventGraph g;

  std::ifstream ev(events_path);
  if (!ev) throw GraphLoadError(events_path, 0, 0, "cannot open events file");
  std::string line;
  std::size_t lineno = 0;
  while (next_line(ev, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_tab(line);
    if (f.size() != 6) {
      throw GraphLoadError(events_path, lineno, 0,
                           "expected 6 tab-separated fields, got " + std::to_string(f.size()));
    }
    Event e;
    e.id = f[0];
    e.label = f[1];
    if (e.id.empty()) throw GraphLoadError(events_path, lineno, 1, "empty event id");
    if (f[2].empty() != f[3].empty()) {
      throw GraphLoadError(events_path, lineno, f[2].empty() ? 3 : 4,
                           "interval needs both start and end (or neither)");
    }
    if (!f[2].empty()) {
      auto start = parse_date(f[2]);
      if (!start) throw GraphLoadError(events_path, lineno, 3, "bad date: " + f[2]);
      auto end = parse_date(f[3]);
      if (!end) throw GraphLoadError(events_path, lineno, 4, "bad date: " + f[3]);
      if (*end < *start) {
        throw GraphLoadError(events_path, lineno, 3,
                             "interval end " + f[3] + " before start " + f[2]);
      }
      e.time = Interval{*start, *end};
    }
    e.locations = split_semicolon(f[4]);
    e.types = split_semicolon(f[5]);
    try {
      g.add_event(std::move(e));
    } catch (const std::invalid_argument& ex) {
      throw GraphLoadError(events_path, lineno, 1, ex.what());
    }
  }

  std::ifstream rel(relations_path);
  if (!rel) throw GraphLoadError(relations_path, 0, 0, "cannot open relations file");
  lineno = 0;
  while (next_line(rel, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_tab(line);
    if (f.size() != 3) {
      throw GraphLoadError(relations_path, lineno, 0,
                           "expected 3 tab-separated fields, got " + std::to_string(f.size()));
    }
    try {
      if (f[1] == kSubEventPredicate) {
        g.add_sub_event_edge(f[0], f[2]);
      } else if (f[1] == kFollowUpPredicate) {
        g.add_follow_up_edge(f[0], f[2]);
      } else if (f[1] == kInSeriesPredicate) {
        g.set_series_membership(f[0], f[2]);
      } else {
        g.add_generic_edge(f[0], f[1], f[2]);
      }
    } catch (const std::invalid_argument& ex) {
      throw GraphLoadError(relations_path, lineno, 0, ex.what());
    }
  }

  if (series_path) {
    std::ifstream se(*series_path);
    if (!se) throw GraphLoadError(*series_path, 0, 0, "cannot open series file");
    lineno = 0;
    while (next_line(se, line)) {
      ++lineno;
      if (line.empty()) continue;
      auto f = split_tab(line);
      if (f.size() != 2) {
        throw GraphLoadError(*series_path, lineno, 0,
                             "expected 2 tab-separated fields, got " + std::to_string(f.size()));
      }
      if (f[0].empty()) throw GraphLoadError(*series_path, lineno, 1, "empty series id");
      g.set_series_label(f[0], f[1]);
    }
  }

  return g;
}

void save_graph(const EventGraph& g, const std::string& events_path,
                const std::string& relations_path,
                const std::optional<std::string>& series_path) {
  std::ofstream ev(events_path, std::ios::binary);
  if (!ev) throw std::runtime_error("cannot write " + events_path);
  for (const auto& [id, e] : g.events()) {
    ev << id << '\t' << e.label << '\t';
    if (e.time) {
      ev << format_date(e.time->start) << '\t' << format_date(e.time->end);
    } else {
      ev << '\t';
    }
    ev << '\t' << join_semicolon(e.locations) << '\t' << join_semicolon(e.types) << '\n';
  }

  std::ofstream rel(relations_path, std::ios::binary);
  if (!rel) throw std::runtime_error("cannot write " + relations_path);
  for (const auto& [sub, parent] : g.sub_event_edges()) {
    rel << sub << '\t' << kSubEventPredicate << '\t' << parent << '\n';
  }
  for (const auto& [earlier, later] : g.follow_up_edges()) {
    rel << earlier << '\t' << kFollowUpPredicate << '\t' << later << '\n';
  }
  for (const auto& [event_id, series_id] : g.series_membership()) {
    rel << event_id << '\t' << kInSeriesPredicate << '\t' << series_id << '\n';
  }
  for (const auto& t : g.generic_edges()) {
    rel << t.subject << '\t' << t.predicate << '\t' << t.object << '\n';
  }

  if (series_path) {
    std::ofstream se(*series_path, std::ios::binary);
    if (!se) throw std::runtime_error("cannot write " + *series_path);
    for (const auto& [id, label] : g.series_labels()) {
      se << id << '\t' << label << '\n';
    }
  }
}

ValidationReport validate_graph(const EventGraph& g) {
  ValidationReport report;

  // Sub-event cycles of any length: nontrivial strongly connected components
  // of the (sub -> parent) edge set, found with iterative Tarjan.
  {
    std::map<std::string, int> index, lowlink;
    std::map<std::string, bool> on_stack;
    std::vector<std::string> scc_stack;
    int next_index = 0;
    struct Frame {
      std::string node;
      std::size_t child = 0;
    };
    for (const auto& [start_id, ev] : g.events()) {
      (void)ev;
      if (index.count(start_id)) continue;
      std::vector<Frame> frames{{start_id}};
      index[start_id] = lowlink[start_id] = next_index++;
      scc_stack.push_back(start_id);
      on_stack[start_id] = true;
      while (!frames.empty()) {
        Frame& fr = frames.back();
        const auto& parents = g.direct_parents(fr.node);
        if (fr.child < parents.size()) {
          const std::string& next = parents[fr.child++];
          if (!index.count(next)) {
            index[next] = lowlink[next] = next_index++;
            scc_stack.push_back(next);
            on_stack[next] = true;
            frames.push_back({next});
          } else if (on_stack[next]) {
            lowlink[fr.node] = std::min(lowlink[fr.node], index[next]);
          }
        } else {
          if (lowlink[fr.node] == index[fr.node]) {
            std::vector<std::string> component;
            while (true) {
              std::string w = scc_stack.back();
              scc_stack.pop_back();
              on_stack[w] = false;
              component.push_back(w);
              if (w == fr.node) break;
            }
            if (component.size() > 1) {
              std::sort(component.begin(), component.end());
              std::string msg = "sub-event cycle:";
              for (const auto& n : component) msg += " " + n;
              report.warnings.push_back({"CYCLE", msg, component.front()});
              ++report.error_count;
            }
          }
          std::string done = fr.node;
          frames.pop_back();
          if (!frames.empty()) {
            lowlink[frames.back().node] =
                std::min(lowlink[frames.back().node], lowlink[done]);
          }
        }
      }
    }
  }

  if (!g.series_labels().empty()) {
    for (const auto& [event_id, series_id] : g.series_membership()) {
      if (!g.series_labels().count(series_id)) {
        report.warnings.push_back(
            {"SERIES_DANGLING", "membership references unknown series " + series_id, event_id});
      }
    }
  }

  for (const auto& [id, e] : g.events()) {
    if (e.label.empty()) {
      report.warnings.push_back({"LABEL_EMPTY", "event has an empty label", id});
    }
    if (e.label.empty() && !e.time) {
      report.warnings.push_back({"NO_TIME_NO_LABEL", "event has neither time nor label", id});
    }
  }

  return report;
}

}  // namespace happening
