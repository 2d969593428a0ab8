#include <doctest.h>

#include <fstream>

#include "fixtures.hpp"
#include "happening/graph.hpp"

using namespace happening;
using happening::testing::TempDir;

namespace {

void write(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("dates parse and order") {
  CHECK(parse_date("2008-07-06") == Date{2008, 7, 6});
  CHECK(parse_date("2008-2-1") == std::nullopt);
  CHECK(parse_date("2008-13-01") == std::nullopt);
  CHECK(parse_date("2019-02-29") == std::nullopt);
  CHECK(parse_date("2020-02-29") == Date{2020, 2, 29});
  CHECK(format_date({2008, 7, 6}) == "2008-07-06");
  CHECK(Date{2008, 6, 23} < Date{2008, 7, 6});
  CHECK(is_whole_year(whole_year(2010)));
  CHECK_FALSE(is_whole_year({{2010, 1, 1}, {2011, 12, 31}}));
}

TEST_CASE("load_graph materializes rows") {
  TempDir dir("load");
  write(dir.file("events.tsv"),
        "e1\tAlpha\t2008-01-01\t2008-12-31\tLondon\t\n"
        "e2\tBeta\t\t\t\ttype_a;type_b\n"
        "e3\tGamma\t2009-05-01\t2009-05-02\tParis;Lyon\t\n");
  write(dir.file("relations.tsv"),
        "e2\tsubEventOf\te1\n"
        "e3\tsubEventOf\te1\n"
        "e1\trelatedTo\te3\n");
  const EventGraph g = load_graph(dir.file("events.tsv"), dir.file("relations.tsv"));
  CHECK(g.events().size() == 3);
  CHECK(g.sub_event_edges().size() == 2);
  CHECK(g.generic_edges().size() == 1);
  CHECK(g.event("e2").types == std::set<std::string>{"type_a", "type_b"});
  CHECK(g.event("e3").locations == std::set<std::string>{"Lyon", "Paris"});
  CHECK_FALSE(g.event("e2").time.has_value());
  CHECK(g.direct_sub_events("e1") == std::vector<std::string>{"e2", "e3"});
}

TEST_CASE("load_graph rejects a reversed interval with its row number") {
  TempDir dir("badrow");
  write(dir.file("events.tsv"),
        "e1\tAlpha\t\t\t\t\n"
        "e2\tBeta\t2008-07-06\t2008-06-23\t\t\n");
  write(dir.file("relations.tsv"), "");
  CHECK_THROWS_WITH_AS(load_graph(dir.file("events.tsv"), dir.file("relations.tsv")),
                       doctest::Contains(":2:"), GraphLoadError);
  try {
    load_graph(dir.file("events.tsv"), dir.file("relations.tsv"));
  } catch (const GraphLoadError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("before start") != std::string::npos);
  }
}

TEST_CASE("load_graph rejects self-loops and duplicates") {
  TempDir dir("loops");
  write(dir.file("events.tsv"), "e9\tNine\t\t\t\t\n");
  write(dir.file("relations.tsv"), "e9\tsubEventOf\te9\n");
  CHECK_THROWS_WITH_AS(load_graph(dir.file("events.tsv"), dir.file("relations.tsv")),
                       doctest::Contains("self-loop"), GraphLoadError);

  write(dir.file("dup_events.tsv"), "e1\tA\t\t\t\t\ne1\tB\t\t\t\t\n");
  write(dir.file("empty.tsv"), "");
  CHECK_THROWS_WITH_AS(load_graph(dir.file("dup_events.tsv"), dir.file("empty.tsv")),
                       doctest::Contains("duplicate"), GraphLoadError);

  write(dir.file("one.tsv"), "e1\tA\t\t\t\t\n");
  write(dir.file("dangling.tsv"), "e1\tsubEventOf\tghost\n");
  CHECK_THROWS_WITH_AS(load_graph(dir.file("one.tsv"), dir.file("dangling.tsv")),
                       doctest::Contains("unknown event id"), GraphLoadError);

  write(dir.file("two.tsv"), "e1\tA\t\t\t\t\ne2\tB\t\t\t\t\n");
  write(dir.file("twocycle.tsv"), "e1\tsubEventOf\te2\ne2\tsubEventOf\te1\n");
  CHECK_THROWS_WITH_AS(load_graph(dir.file("two.tsv"), dir.file("twocycle.tsv")),
                       doctest::Contains("2-cycle"), GraphLoadError);
}

TEST_CASE("missing events file") {
  TempDir dir("missing");
  write(dir.file("relations.tsv"), "");
  CHECK_THROWS_AS(load_graph(dir.file("nope.tsv"), dir.file("relations.tsv")), GraphLoadError);
}

TEST_CASE("save then load is the identity") {
  const EventGraph g = happening::testing::tournament_fixture();
  TempDir dir("roundtrip");
  save_graph(g, dir.file("e.tsv"), dir.file("r.tsv"), dir.file("s.tsv"));
  const EventGraph g2 = load_graph(dir.file("e.tsv"), dir.file("r.tsv"), dir.file("s.tsv"));
  CHECK(g == g2);
  // And a second round trip produces byte-identical files.
  save_graph(g2, dir.file("e2.tsv"), dir.file("r2.tsv"), dir.file("s2.tsv"));
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(slurp(dir.file("e.tsv")) == slurp(dir.file("e2.tsv")));
  CHECK(slurp(dir.file("r.tsv")) == slurp(dir.file("r2.tsv")));
  CHECK(slurp(dir.file("s.tsv")) == slurp(dir.file("s2.tsv")));
}

TEST_CASE("lookups succeed for exactly the loaded ids") {
  const EventGraph g = happening::testing::tournament_fixture();
  for (const auto& [id, e] : g.events()) {
    CHECK(g.has_event(id));
    CHECK(g.event(id).id == id);
  }
  CHECK_FALSE(g.has_event("nope"));
  CHECK_THROWS_AS(g.event("nope"), std::out_of_range);
}

TEST_CASE("validate_graph reports cycles as errors") {
  EventGraph g;
  for (const char* id : {"a", "b", "c"}) {
    Event e;
    e.id = id;
    e.label = id;
    g.add_event(std::move(e));
  }
  g.add_sub_event_edge("a", "b");
  g.add_sub_event_edge("b", "c");
  g.add_sub_event_edge("c", "a");
  const ValidationReport report = validate_graph(g);
  CHECK(report.error_count == 1);
  bool found = false;
  for (const auto& f : report.warnings) {
    if (f.code == "CYCLE") {
      found = true;
      CHECK(f.message.find("a") != std::string::npos);
      CHECK(f.message.find("b") != std::string::npos);
      CHECK(f.message.find("c") != std::string::npos);
    }
  }
  CHECK(found);
}

TEST_CASE("validate_graph on a clean fixture") {
  const ValidationReport report = validate_graph(happening::testing::tournament_fixture());
  CHECK(report.error_count == 0);
}

TEST_CASE("validate_graph warns on empty labels and dangling series") {
  EventGraph g;
  Event e;
  e.id = "x";
  g.add_event(std::move(e));
  g.set_series_membership("x", "ghost-series");
  g.set_series_label("real-series", "Real");
  const ValidationReport report = validate_graph(g);
  CHECK(report.error_count == 0);
  bool label_empty = false, dangling = false, bare = false;
  for (const auto& f : report.warnings) {
    if (f.code == "LABEL_EMPTY" && f.offending_id == "x") label_empty = true;
    if (f.code == "SERIES_DANGLING" && f.offending_id == "x") dangling = true;
    if (f.code == "NO_TIME_NO_LABEL" && f.offending_id == "x") bare = true;
  }
  CHECK(label_empty);
  CHECK(dangling);
  CHECK(bare);
}

TEST_CASE("remove_event drops incident structure") {
  EventGraph g = happening::testing::tournament_fixture();
  g.remove_event("ms2009");
  CHECK_FALSE(g.has_event("ms2009"));
  for (const auto& [sub, parent] : g.sub_event_edges()) {
    CHECK(sub != "ms2009");
    CHECK(parent != "ms2009");
  }
  CHECK(g.direct_sub_events("wc2009").empty());
  CHECK(g.direct_parents("fin2009").empty());
}
