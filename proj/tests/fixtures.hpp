#pragma once
// Shared hand-built graphs for the unit and acceptance suites.

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>

#include "happening/eval.hpp"
#include "happening/graph.hpp"
#include "happening/rng.hpp"
#include "happening/series.hpp"

namespace happening::testing {

// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path();
    for (int i = 0; i < 10000; ++i) {
      auto candidate = base / (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(i));
      std::error_code ec;
      if (std::filesystem::create_directories(candidate, ec)) {
        path = candidate;
        return;
      }
    }
    throw std::runtime_error("cannot create temp dir");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

// Three editions of a tennis-tournament-style graph: the men's singles chain is complete, the
// finals exist for 2008 and 2009 only. Event ids: wc2008..wc2010,
// ms2008..ms2010, fin2008, fin2009.
inline EventGraph tournament_fixture() {
  EventGraph g;
  auto add = [&](const std::string& id, const std::string& label, Interval time) {
    Event e;
    e.id = id;
    e.label = label;
    e.time = time;
    e.locations.insert("London");
    g.add_event(std::move(e));
  };
  for (int year : {2008, 2009, 2010}) {
    const std::string y = std::to_string(year);
    add("wc" + y, y + " WC", whole_year(year));
    add("ms" + y, y + " WC - Men's Singles", {{year, 6, 21}, {year, 7, 4}});
    g.add_sub_event_edge("ms" + y, "wc" + y);
    g.set_series_membership("wc" + y, "wc");
    g.set_series_membership("ms" + y, "wc-ms");
  }
  for (int year : {2008, 2009}) {
    const std::string y = std::to_string(year);
    add("fin" + y, y + " WC - Men's Singles final", {{year, 7, 4}, {year, 7, 4}});
    g.add_sub_event_edge("fin" + y, "ms" + y);
    g.set_series_membership("fin" + y, "wc-ms-final");
  }
  g.add_follow_up_edge("wc2008", "wc2009");
  g.add_follow_up_edge("wc2009", "wc2010");
  g.set_series_label("wc", "WC");
  g.set_series_label("wc-ms", "WC - Men's Singles");
  g.set_series_label("wc-ms-final", "WC - Men's Singles final");
  return g;
}

// Like the fixture above but with a women's branch whose finals are complete
// across `n` editions. The men's finals are present but DETACHED (membership
// only, no sub-event edge) — prediction has to attach them before inference
// can use the final sub-series.
inline EventGraph coupling_fixture(int n = 6, bool attach_mens_finals = false) {
  EventGraph g;
  auto add = [&](const std::string& id, const std::string& label, Interval time) {
    Event e;
    e.id = id;
    e.label = label;
    e.time = time;
    e.locations.insert("London");
    g.add_event(std::move(e));
  };
  std::string prev;
  for (int i = 0; i < n; ++i) {
    const int year = 2004 + i;
    const std::string y = std::to_string(year);
    add("wc" + y, y + " WC", whole_year(year));
    g.set_series_membership("wc" + y, "wc");
    if (!prev.empty()) g.add_follow_up_edge(prev, "wc" + y);
    prev = "wc" + y;

    add("ms" + y, y + " WC - Men's Singles", {{year, 6, 21}, {year, 7, 4}});
    g.add_sub_event_edge("ms" + y, "wc" + y);
    g.set_series_membership("ms" + y, "wc-ms");
    add("ws" + y, y + " WC - Women's Singles", {{year, 6, 21}, {year, 7, 4}});
    g.add_sub_event_edge("ws" + y, "wc" + y);
    g.set_series_membership("ws" + y, "wc-ws");

    add("wfin" + y, y + " WC - Women's Singles final", {{year, 7, 3}, {year, 7, 3}});
    g.add_sub_event_edge("wfin" + y, "ws" + y);
    g.set_series_membership("wfin" + y, "wc-ws-final");

    // Men's finals only for the first n-1 editions; the last one is the slot
    // inference should fill once the others are attached.
    if (i + 1 < n) {
      add("mfin" + y, y + " WC - Men's Singles final", {{year, 7, 4}, {year, 7, 4}});
      g.set_series_membership("mfin" + y, "wc-ms-final");
      if (attach_mens_finals) g.add_sub_event_edge("mfin" + y, "ms" + y);
    }
  }
  g.set_series_label("wc", "WC");
  g.set_series_label("wc-ms", "WC - Men's Singles");
  g.set_series_label("wc-ws", "WC - Women's Singles");
  g.set_series_label("wc-ms-final", "WC - Men's Singles final");
  g.set_series_label("wc-ws-final", "WC - Women's Singles final");
  return g;
}

// Random event graph for stress tests: digit-bearing labels from a small
// vocabulary (some empty), random times/locations, random sub-event and
// follow-up edges (invalid ones skipped), random series memberships.
inline EventGraph random_graph(Rng& rng, std::size_t min_events = 6,
                               std::size_t max_extra = 30) {
  static const char* kWords[] = {"Cup", "Open", "Final", "Heat", "Race", "Gala"};
  EventGraph g;
  const std::size_t n = min_events + uniform_below(rng, max_extra);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) {
    Event e;
    e.id = "v" + std::to_string(i);
    if (uniform_below(rng, 10) != 0) {
      e.label = std::to_string(2000 + uniform_below(rng, 6));
      for (std::size_t w = 0, len = 1 + uniform_below(rng, 3); w < len; ++w) {
        e.label += " " + std::string(kWords[uniform_below(rng, 6)]);
      }
    }
    if (coin_flip(rng)) {
      e.time = whole_year(2000 + static_cast<int>(uniform_below(rng, 6)));
    }
    if (coin_flip(rng)) e.locations.insert("city" + std::to_string(uniform_below(rng, 3)));
    g.add_event(std::move(e));
    ids.push_back("v" + std::to_string(i));
  }
  for (std::size_t k = 0, edges = uniform_below(rng, 2 * n); k < edges; ++k) {
    const auto& a = ids[uniform_below(rng, ids.size())];
    const auto& b = ids[uniform_below(rng, ids.size())];
    try {
      if (uniform_below(rng, 4) == 0) {
        g.add_follow_up_edge(a, b);
      } else {
        g.add_sub_event_edge(a, b);
      }
    } catch (const std::invalid_argument&) {
    }
  }
  for (const auto& id : ids) {
    if (uniform_below(rng, 3) != 0) {
      g.set_series_membership(id, "s" + std::to_string(uniform_below(rng, 5)));
    }
  }
  return g;
}

inline SyntheticCorpusSpec regular_corpus_spec(std::uint64_t seed = 11) {
  SyntheticCorpusSpec spec;
  spec.series_count = 5;
  spec.editions_per_series = 10;
  spec.depth = 2;
  spec.branching = 3;
  spec.seed = seed;
  return spec;
}

inline SyntheticCorpusSpec irregular_corpus_spec(std::uint64_t seed = 12) {
  SyntheticCorpusSpec spec = regular_corpus_spec(seed);
  spec.late_start_fraction = 0.2;
  spec.discontinued_fraction = 0.2;
  spec.gap_fraction = 0.1;
  return spec;
}

}  // namespace happening::testing
