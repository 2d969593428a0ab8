#include "happening/inference.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "happening/features.hpp"
#include "happening/text.hpp"

namespace happening {

std::string to_string(Constraint c) {
  switch (c) {
    case Constraint::BSL: return "BSL";
    case Constraint::EVO: return "EVO";
    case Constraint::INT: return "INT";
    case Constraint::WIN: return "WIN";
    case Constraint::COV: return "COV";
    case Constraint::CWI: return "CWI";
    case Constraint::ECW: return "ECW";
  }
  return "?";
}

Constraint constraint_from_string(const std::string& s) {
  std::string up;
  for (char c : s) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (up == "BSL") return Constraint::BSL;
  if (up == "EVO") return Constraint::EVO;
  if (up == "INT") return Constraint::INT;
  if (up == "WIN") return Constraint::WIN;
  if (up == "COV") return Constraint::COV;
  if (up == "CWI") return Constraint::CWI;
  if (up == "ECW") return Constraint::ECW;
  throw std::invalid_argument("unknown constraint: " + s);
}

std::string to_string(TimeRule r) {
  switch (r) {
    case TimeRule::PARENT_EQUAL: return "PARENT_EQUAL";
    case TimeRule::WHOLE_YEAR: return "WHOLE_YEAR";
    case TimeRule::LABEL_YEAR: return "LABEL_YEAR";
  }
  return "?";
}

void InferenceConfig::validate() const {
  if (window_before < 1) throw std::invalid_argument("window_before must be >= 1");
  if (window_after < 1) throw std::invalid_argument("window_after must be >= 1");
  if (coverage_alpha <= 0.0 || coverage_alpha > 1.0) {
    throw std::invalid_argument("coverage_alpha must be in (0,1]");
  }
}

// ---------------------------------------------------------------------------
// Myers token diff
// ---------------------------------------------------------------------------

std::vector<EditOp> myers_diff(const std::vector<std::string>& a,
                               const std::vector<std::string>& b) {
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  const int max = n + m;

  // Unit-op script built backwards from the furthest-reaching path trace.
  std::vector<std::pair<EditOpKind, std::string>> units;
  if (max > 0) {
    const int off = max;
    std::vector<int> V(static_cast<std::size_t>(2 * max + 1), 0);
    std::vector<std::vector<int>> trace;
    int d_final = -1;
    for (int d = 0; d <= max && d_final < 0; ++d) {
      trace.push_back(V);
      for (int k = -d; k <= d; k += 2) {
        int x;
        if (k == -d || (k != d && V[static_cast<std::size_t>(off + k - 1)] <
                                      V[static_cast<std::size_t>(off + k + 1)])) {
          x = V[static_cast<std::size_t>(off + k + 1)];
        } else {
          x = V[static_cast<std::size_t>(off + k - 1)] + 1;
        }
        int y = x - k;
        while (x < n && y < m && a[static_cast<std::size_t>(x)] == b[static_cast<std::size_t>(y)]) {
          ++x;
          ++y;
        }
        V[static_cast<std::size_t>(off + k)] = x;
        if (x >= n && y >= m) {
          d_final = d;
          break;
        }
      }
    }

    int x = n, y = m;
    for (int d = d_final; d > 0; --d) {
      const auto& Vp = trace[static_cast<std::size_t>(d)];
      const int k = x - y;
      int prev_k;
      if (k == -d || (k != d && Vp[static_cast<std::size_t>(off + k - 1)] <
                                    Vp[static_cast<std::size_t>(off + k + 1)])) {
        prev_k = k + 1;  // the step into this diagonal was downward: an insert
      } else {
        prev_k = k - 1;  // rightward: a delete
      }
      const int prev_x = Vp[static_cast<std::size_t>(off + prev_k)];
      const int prev_y = prev_x - prev_k;
      const int step_x = prev_k == k + 1 ? prev_x : prev_x + 1;
      const int step_y = prev_k == k + 1 ? prev_y + 1 : prev_y;
      while (x > step_x && y > step_y) {
        units.emplace_back(EditOpKind::Equal, a[static_cast<std::size_t>(x - 1)]);
        --x;
        --y;
      }
      if (prev_k == k + 1) {
        units.emplace_back(EditOpKind::Insert, b[static_cast<std::size_t>(step_y - 1)]);
      } else {
        units.emplace_back(EditOpKind::Delete, a[static_cast<std::size_t>(step_x - 1)]);
      }
      x = prev_x;
      y = prev_y;
    }
    while (x > 0 && y > 0) {
      units.emplace_back(EditOpKind::Equal, a[static_cast<std::size_t>(x - 1)]);
      --x;
      --y;
    }
    std::reverse(units.begin(), units.end());
  }

  // Merge runs of one kind, reordering each contiguous non-EQUAL block so the
  // deletion comes before the insertion.
  std::vector<EditOp> script;
  std::size_t i = 0;
  while (i < units.size()) {
    if (units[i].first == EditOpKind::Equal) {
      EditOp op{EditOpKind::Equal, {}};
      while (i < units.size() && units[i].first == EditOpKind::Equal) {
        op.text.push_back(std::move(units[i].second));
        ++i;
      }
      script.push_back(std::move(op));
    } else {
      std::vector<std::string> deletes, inserts;
      while (i < units.size() && units[i].first != EditOpKind::Equal) {
        (units[i].first == EditOpKind::Delete ? deletes : inserts)
            .push_back(std::move(units[i].second));
        ++i;
      }
      if (!deletes.empty()) script.push_back({EditOpKind::Delete, std::move(deletes)});
      if (!inserts.empty()) script.push_back({EditOpKind::Insert, std::move(inserts)});
    }
  }
  return script;
}

// ---------------------------------------------------------------------------
// Context
// ---------------------------------------------------------------------------

InferenceContext::InferenceContext(const EventGraph& g, const SeriesMap& series)
    : graph_(g), series_(series), series_of_(edition_index(series)) {
  for (const auto& [id, e] : graph_.events()) {
    const std::string norm = normalize_label(e.label);
    if (norm.empty()) continue;
    auto [it, inserted] = label_index_.try_emplace(norm, id);
    if (!inserted && id < it->second) it->second = id;
    if (id.rfind(kInferredIdPrefix, 0) == 0) {
      const std::string tail = id.substr(std::string(kInferredIdPrefix).size());
      if (!tail.empty() && tail.size() <= 18 &&
          tail.find_first_not_of("0123456789") == std::string::npos) {
        next_id_ = std::max(next_id_, static_cast<std::uint64_t>(std::stoull(tail)) + 1);
      }
    }
  }
}

std::optional<std::string> InferenceContext::series_of(const std::string& event_id) const {
  auto it = series_of_.find(event_id);
  if (it == series_of_.end()) return std::nullopt;
  return it->second;
}

namespace {

bool edition_before(const EventGraph& g, const std::string& a, const std::string& b) {
  const auto& ta = g.event(a).time;
  const auto& tb = g.event(b).time;
  if (ta.has_value() != tb.has_value()) return ta.has_value();
  if (ta && tb && ta->start != tb->start) return ta->start < tb->start;
  return a < b;
}

}  // namespace

void InferenceContext::register_member(const std::string& event_id,
                                       const std::string& series_id) {
  auto& editions = series_.at(series_id).editions;
  auto pos = std::lower_bound(editions.begin(), editions.end(), event_id,
                              [&](const std::string& lhs, const std::string& rhs) {
                                return edition_before(graph_, lhs, rhs);
                              });
  editions.insert(pos, event_id);
  series_of_[event_id] = series_id;
}

std::optional<std::string> InferenceContext::find_by_label(
    const std::string& normalized_label) const {
  auto it = label_index_.find(normalized_label);
  if (it == label_index_.end()) return std::nullopt;
  return it->second;
}

void InferenceContext::index_label(const std::string& normalized_label,
                                   const std::string& event_id) {
  auto [it, inserted] = label_index_.try_emplace(normalized_label, event_id);
  if (!inserted && event_id < it->second) it->second = event_id;
}

std::string InferenceContext::next_inferred_id() {
  return std::string(kInferredIdPrefix) + std::to_string(next_id_++);
}

// ---------------------------------------------------------------------------
// Constraints
// ---------------------------------------------------------------------------

namespace {

std::optional<std::size_t> position_of(const std::vector<std::string>& editions,
                                       const std::string& id) {
  auto it = std::find(editions.begin(), editions.end(), id);
  if (it == editions.end()) return std::nullopt;
  return static_cast<std::size_t>(it - editions.begin());
}

// Edition positions of sp covered by members of m (through their direct parents).
std::vector<std::size_t> covered_positions(const EventSeries& m, const EventSeries& sp,
                                           const EventGraph& g) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < sp.editions.size(); ++i) index.emplace(sp.editions[i], i);
  std::set<std::size_t> covered;
  for (const auto& member : m.editions) {
    for (const auto& parent : g.direct_parents(member)) {
      auto it = index.find(parent);
      if (it != index.end()) covered.insert(it->second);
    }
  }
  return {covered.begin(), covered.end()};
}

}  // namespace

bool check_constraints(const EventSeries& m, const std::string& edition_id,
                       const EventSeries& sp, const EventGraph& g, const InferenceConfig& cfg) {
  if (cfg.constraint == Constraint::BSL) return true;
  const auto pos_opt = position_of(sp.editions, edition_id);
  if (!pos_opt) return false;
  const long pos = static_cast<long>(*pos_opt);
  const long n = static_cast<long>(sp.editions.size());
  const long a = cfg.window_before;
  const long b = cfg.window_after;
  const auto covered = covered_positions(m, sp, g);

  auto any_before = [&] {
    return std::any_of(covered.begin(), covered.end(),
                       [&](std::size_t p) { return static_cast<long>(p) < pos; });
  };
  auto any_after = [&] {
    return std::any_of(covered.begin(), covered.end(),
                       [&](std::size_t p) { return static_cast<long>(p) > pos; });
  };
  auto any_in = [&](long lo, long hi) {
    return std::any_of(covered.begin(), covered.end(), [&](std::size_t p) {
      return static_cast<long>(p) >= lo && static_cast<long>(p) <= hi;
    });
  };
  auto window_coverage = [&] {
    const long lo = std::max(0l, pos - a);
    const long hi = std::min(n - 1, pos + b);
    const long window_editions = hi - lo + 1;
    // Members whose parent position falls inside the window.
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < sp.editions.size(); ++i) index.emplace(sp.editions[i], i);
    long in_window = 0;
    for (const auto& member : m.editions) {
      bool inside = false;
      for (const auto& parent : g.direct_parents(member)) {
        auto it = index.find(parent);
        if (it != index.end() && static_cast<long>(it->second) >= lo &&
            static_cast<long>(it->second) <= hi) {
          inside = true;
          break;
        }
      }
      if (inside) ++in_window;
    }
    return static_cast<double>(in_window) / static_cast<double>(window_editions);
  };

  switch (cfg.constraint) {
    case Constraint::BSL:
      return true;
    case Constraint::EVO:
      return any_before();
    case Constraint::INT:
      return any_before() && any_after();
    case Constraint::WIN:
      return any_in(pos - a, pos - 1) && any_in(pos + 1, pos + b);
    case Constraint::COV:
      return static_cast<double>(m.editions.size()) / static_cast<double>(n) >=
             cfg.coverage_alpha;
    case Constraint::CWI:
      return window_coverage() >= cfg.coverage_alpha;
    case Constraint::ECW:
      return any_before() && window_coverage() >= cfg.coverage_alpha;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Label / time / location generation
// ---------------------------------------------------------------------------

namespace {

// Replays the (c.label -> e.label) edit script against the tokens of the
// donor sub-event label. Supported scripts interleave EQUAL runs with
// DELETE+INSERT substitutions; anything else yields nothing.
std::optional<std::string> replay_edits(const std::vector<EditOp>& edits,
                                        const std::vector<std::string>& donor_tokens) {
  std::vector<std::string> result;
  std::vector<std::string> rest = donor_tokens;
  const EditOp* pending_delete = nullptr;
  for (const auto& op : edits) {
    switch (op.op) {
      case EditOpKind::Delete:
        if (pending_delete) return std::nullopt;
        pending_delete = &op;
        break;
      case EditOpKind::Insert: {
        if (!pending_delete) return std::nullopt;
        auto it = std::search(rest.begin(), rest.end(), pending_delete->text.begin(),
                              pending_delete->text.end());
        if (it == rest.end()) return std::nullopt;
        result.insert(result.end(), rest.begin(), it);
        result.insert(result.end(), op.text.begin(), op.text.end());
        rest.erase(rest.begin(),
                   it + static_cast<std::ptrdiff_t>(pending_delete->text.size()));
        pending_delete = nullptr;
        break;
      }
      case EditOpKind::Equal:
        if (pending_delete) return std::nullopt;
        break;
    }
  }
  if (pending_delete) return std::nullopt;
  result.insert(result.end(), rest.begin(), rest.end());
  if (result.empty()) return std::nullopt;
  return join_tokens(result);
}

}  // namespace

std::optional<std::string> generate_label(const std::string& edition_id, const EventSeries& m,
                                          const InferenceContext& ctx) {
  if (m.editions.empty()) return std::nullopt;
  const auto sp_id = ctx.series_of(edition_id);
  if (!sp_id) return std::nullopt;
  const EventSeries& sp = ctx.series().at(*sp_id);
  const auto pos = position_of(sp.editions, edition_id);
  if (!pos) return std::nullopt;

  const EventGraph& g = ctx.graph();
  const std::string e_label = normalize_label(g.event(edition_id).label);

  struct Candidate {
    std::string id;
    double similarity;
    std::size_t closeness;
    std::size_t index;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < sp.editions.size(); ++i) {
    const std::string& c_id = sp.editions[i];
    if (c_id == edition_id) continue;
    const FeatValue sim = lcs_fraction(e_label, normalize_label(g.event(c_id).label));
    const std::size_t closeness = i > *pos ? i - *pos : *pos - i;
    candidates.push_back({c_id, sim.missing ? 0.0 : sim.value, closeness, i});
  }
  if (candidates.empty()) return std::nullopt;
  const double max_sim =
      std::max_element(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        return a.similarity < b.similarity;
      })->similarity;
  std::erase_if(candidates, [&](const Candidate& c) { return c.similarity < max_sim; });
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.closeness != b.closeness) return a.closeness < b.closeness;
    return a.index < b.index;  // ties prefer the earlier edition
  });

  const std::set<std::string> members(m.editions.begin(), m.editions.end());
  for (const auto& cand : candidates) {
    // The donor: cand's direct sub-event inside m.
    std::string donor;
    for (const auto& child : g.direct_sub_events(cand.id)) {
      if (members.count(child)) {
        donor = child;
        break;  // children are sorted; smallest id wins
      }
    }
    if (donor.empty()) continue;
    const auto edits = myers_diff(tokenize(normalize_label(g.event(cand.id).label)),
                                  tokenize(e_label));
    return replay_edits(edits, tokenize(normalize_label(g.event(donor).label)));
  }
  return std::nullopt;
}

std::optional<std::pair<Interval, TimeRule>> generate_time(const std::string& edition_id,
                                                           const EventSeries& m,
                                                           const std::string& label,
                                                           const InferenceContext& ctx) {
  const EventGraph& g = ctx.graph();

  // (a) every member's time equals its own parent's time -> copy the edition's.
  if (!m.editions.empty()) {
    bool all_equal_parent = true;
    for (const auto& member : m.editions) {
      const auto& mt = g.event(member).time;
      const auto& parents = g.direct_parents(member);
      if (!mt || parents.empty()) {
        all_equal_parent = false;
        break;
      }
      for (const auto& p : parents) {
        const auto& pt = g.event(p).time;
        if (!pt || !(*pt == *mt)) {
          all_equal_parent = false;
          break;
        }
      }
      if (!all_equal_parent) break;
    }
    if (all_equal_parent && g.event(edition_id).time) {
      return std::pair{*g.event(edition_id).time, TimeRule::PARENT_EQUAL};
    }
  }

  // (b) every member spans a whole year -> the year of the nearest
  // (transitive) parent carrying a whole-year time.
  if (!m.editions.empty()) {
    const bool all_whole_year =
        std::all_of(m.editions.begin(), m.editions.end(), [&](const std::string& member) {
          const auto& t = g.event(member).time;
          return t && is_whole_year(*t);
        });
    if (all_whole_year) {
      std::vector<std::string> frontier{edition_id};
      std::set<std::string> seen{edition_id};
      while (!frontier.empty()) {
        std::vector<std::string> next;
        for (const auto& id : frontier) {
          const auto& t = g.event(id).time;
          if (t && is_whole_year(*t)) {
            return std::pair{whole_year(t->start.year), TimeRule::WHOLE_YEAR};
          }
          for (const auto& p : g.direct_parents(id)) {
            if (seen.insert(p).second) next.push_back(p);
          }
        }
        frontier = std::move(next);
      }
    }
  }

  // (c) a year expression in the label.
  if (auto year = find_label_year(label)) {
    return std::pair{whole_year(*year), TimeRule::LABEL_YEAR};
  }
  return std::nullopt;
}

std::vector<std::string> generate_location(const std::string& edition_id, const EventSeries& m,
                                           const InferenceContext& ctx) {
  (void)edition_id;
  if (m.editions.empty()) return {};
  const EventGraph& g = ctx.graph();
  const std::set<std::string>* common = nullptr;
  for (const auto& member : m.editions) {
    const auto& locs = g.event(member).locations;
    if (locs.empty()) return {};
    if (!common) {
      common = &locs;
    } else if (*common != locs) {
      return {};
    }
  }
  return {common->begin(), common->end()};
}

// ---------------------------------------------------------------------------
// Algorithm driver
// ---------------------------------------------------------------------------

namespace {

// One event's slot pass; returns the children to descend into.
std::vector<std::string> infer_slots_for(const std::string& edition_id, InferenceContext& ctx,
                                         const InferenceConfig& cfg, InferenceDelta& delta,
                                         InferenceReport& report) {
  const auto sp_id = ctx.series_of(edition_id);
  if (sp_id) {
    const EventSeries& sp = ctx.series().at(*sp_id);

    // M: sub-series of the edition's series minus those already represented
    // among its direct sub-events.
    std::set<std::string> covered;
    for (const auto& child : ctx.graph().direct_sub_events(edition_id)) {
      if (auto cs = ctx.series_of(child)) covered.insert(*cs);
    }
    std::vector<std::string> slots;
    for (const auto& m_id : sp.sub_series) {
      if (!covered.count(m_id)) slots.push_back(m_id);
    }

    for (const auto& m_id : slots) {
      const EventSeries& m = ctx.series().at(m_id);
      if (!check_constraints(m, edition_id, sp, ctx.graph(), cfg)) {
        ++report.skip_reasons["constraint_not_satisfied"];
        continue;
      }
      const auto label = generate_label(edition_id, m, ctx);
      if (!label) {
        ++report.skip_reasons["label_generation_failed"];
        continue;
      }

      if (auto existing = ctx.find_by_label(*label)) {
        // An equivalent event already exists: connect it instead.
        const std::string& old_id = *existing;
        if (old_id == edition_id || ctx.graph().is_ancestor(old_id, edition_id)) {
          ++report.skip_reasons["duplicate_would_cycle"];
          continue;
        }
        if (!ctx.graph().has_sub_event_edge(old_id, edition_id)) {
          ctx.mutable_graph().add_sub_event_edge(old_id, edition_id);
          delta.relations.push_back({old_id, edition_id});
          ++report.dedup_relations;
          ++report.new_relations;
        }
        if (!ctx.series_of(old_id)) {
          ctx.mutable_graph().set_series_membership(old_id, m_id);
          ctx.register_member(old_id, m_id);
          delta.memberships.push_back({old_id, m_id});
        }
        continue;
      }

      const auto time = generate_time(edition_id, m, *label, ctx);
      const auto locations = generate_location(edition_id, m, ctx);
      InferredEvent inferred;
      inferred.id = ctx.next_inferred_id();
      inferred.label = *label;
      if (time) {
        inferred.time = time->first;
        inferred.time_rule_used = time->second;
        ++report.time_rule_counts[to_string(time->second)];
      } else {
        ++report.time_rule_counts["none"];
      }
      inferred.locations = locations;
      inferred.parent_id = edition_id;
      inferred.series_id = m_id;
      inferred.constraint_used = cfg.constraint;

      Event ev;
      ev.id = inferred.id;
      ev.label = inferred.label;
      ev.time = inferred.time;
      ev.locations.insert(locations.begin(), locations.end());
      ctx.mutable_graph().add_event(std::move(ev));
      ctx.mutable_graph().add_sub_event_edge(inferred.id, edition_id);
      ctx.mutable_graph().set_series_membership(inferred.id, m_id);
      ctx.register_member(inferred.id, m_id);
      ctx.index_label(*label, inferred.id);

      delta.events.push_back(inferred);
      delta.relations.push_back({inferred.id, edition_id});
      delta.memberships.push_back({inferred.id, m_id});
      ++report.inferred_events;
      ++report.new_relations;
    }
  }

  return ctx.graph().direct_sub_events(edition_id);
}

}  // namespace

void infer_sub_events(const std::string& edition_id, InferenceContext& ctx,
                      const InferenceConfig& cfg, std::set<std::string>& visited,
                      InferenceDelta& delta, InferenceReport& report) {
  // Pre-order walk with an explicit stack; the children list is taken after
  // an event's slot pass so freshly inferred events are descended into too.
  std::vector<std::string> stack{edition_id};
  while (!stack.empty()) {
    const std::string current = stack.back();
    stack.pop_back();
    if (!visited.insert(current).second) continue;
    std::vector<std::string> children = infer_slots_for(current, ctx, cfg, delta, report);
    for (auto it = children.rbegin(); it != children.rend(); ++it) {
      stack.push_back(std::move(*it));
    }
  }
}

std::pair<InferenceDelta, InferenceReport> run_inference(const EventGraph& g,
                                                         const SeriesMap& series,
                                                         const InferenceConfig& cfg) {
  cfg.validate();
  InferenceContext ctx(g, series);
  InferenceDelta delta;
  InferenceReport report;
  report.constraint = to_string(cfg.constraint);
  std::set<std::string> visited;

  std::vector<std::pair<std::string, std::vector<std::string>>> schedule;
  for (const auto& [id, s] : series) schedule.emplace_back(id, s.editions);
  for (const auto& [series_id, editions] : schedule) {
    (void)series_id;
    for (const auto& edition : editions) {
      infer_sub_events(edition, ctx, cfg, visited, delta, report);
    }
  }
  return {std::move(delta), std::move(report)};
}

void apply_delta(EventGraph& g, SeriesMap& series, const InferenceDelta& delta) {
  for (const auto& inferred : delta.events) {
    Event ev;
    ev.id = inferred.id;
    ev.label = inferred.label;
    ev.time = inferred.time;
    ev.locations.insert(inferred.locations.begin(), inferred.locations.end());
    g.add_event(std::move(ev));
  }
  for (const auto& [event_id, series_id] : delta.memberships) {
    g.set_series_membership(event_id, series_id);
    auto it = series.find(series_id);
    if (it == series.end()) continue;
    auto& editions = it->second.editions;
    if (std::find(editions.begin(), editions.end(), event_id) == editions.end()) {
      editions.push_back(event_id);
      editions = order_editions(g, std::move(editions));
    }
  }
  for (const auto& [sub, parent] : delta.relations) {
    if (!g.has_sub_event_edge(sub, parent)) g.add_sub_event_edge(sub, parent);
  }
}

std::string InferenceReport::json() const {
  nlohmann::json j;
  j["constraint"] = constraint;
  j["inferred_events"] = inferred_events;
  j["new_relations"] = new_relations;
  j["dedup_relations"] = dedup_relations;
  j["time_rules"] = time_rule_counts;
  j["skips"] = skip_reasons;
  return j.dump(2);
}

void write_inferred_tsv(const std::string& path, const std::vector<InferredEvent>& events) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& e : events) {
    out << e.id << '\t' << e.label << '\t';
    if (e.time) {
      out << format_date(e.time->start) << '\t' << format_date(e.time->end);
    } else {
      out << '\t';
    }
    out << '\t';
    for (std::size_t i = 0; i < e.locations.size(); ++i) {
      if (i) out << ';';
      out << e.locations[i];
    }
    out << '\t' << e.parent_id << '\t' << e.series_id << '\t' << to_string(e.constraint_used)
        << '\t' << (e.time_rule_used ? to_string(*e.time_rule_used) : "") << '\n';
  }
}

}  // namespace happening
