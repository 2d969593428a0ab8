#include <doctest.h>

#include <fstream>

#include <algorithm>
#include <set>

#include "fixtures.hpp"
#include "happening/dataset.hpp"
#include "happening/eval.hpp"

using namespace happening;
using happening::testing::coupling_fixture;
using happening::testing::tournament_fixture;

namespace {

PreparedSeries prep(const EventGraph& g) {
  return prepare_series(g, kDefaultImpurityThreshold, default_excluded_types());
}

}  // namespace

TEST_CASE("build_positive_set: direct tree edges only") {
  const EventGraph g = tournament_fixture();
  const PreparedSeries p = prep(g);
  const auto positives = build_positive_set(g, p.forests);

  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& pr : positives) {
    CHECK(pr.label);
    CHECK_FALSE(pr.negative_kind.has_value());
    CHECK(g.has_sub_event_edge(pr.sub_id, pr.parent_id));
    pairs.insert({pr.sub_id, pr.parent_id});
  }
  CHECK(pairs.count({"ms2009", "wc2009"}));
  CHECK(pairs.count({"fin2009", "ms2009"}));
  CHECK_FALSE(pairs.count({"fin2009", "wc2009"}));  // transitive, not direct
  // 3 (ms->wc) + 2 (fin->ms) distinct edges.
  CHECK(pairs.size() == 5);
}

TEST_CASE("build_positive_set: empty edge set") {
  EventGraph g;
  Event e;
  e.id = "solo";
  e.label = "solo";
  g.add_event(std::move(e));
  g.set_series_membership("solo", "s");
  const PreparedSeries p = prep(g);
  CHECK(build_positive_set(g, p.forests).empty());
}

TEST_CASE("build_negative_set: size, kinds and exclusion from R") {
  const EventGraph g = coupling_fixture(6, /*attach_mens_finals=*/true);
  const PreparedSeries p = prep(g);
  const auto positives = build_positive_set(g, p.forests);
  REQUIRE_FALSE(positives.empty());
  const NegativeSet negatives = build_negative_set(g, p.forests, positives, 77);

  CHECK(negatives.pairs.size() == positives.size());
  std::set<std::pair<std::string, std::string>> seen;
  std::map<NegativeKind, int> per_kind;
  for (const auto& n : negatives.pairs) {
    CHECK_FALSE(n.label);
    REQUIRE(n.negative_kind.has_value());
    ++per_kind[*n.negative_kind];
    CHECK_FALSE(g.has_sub_event_edge(n.sub_id, n.parent_id));
    CHECK(n.sub_id != n.parent_id);
    CHECK(seen.insert({n.sub_id, n.parent_id}).second);  // no duplicates
  }
  // All four kinds are available in this two-level fixture.
  CHECK(per_kind[NegativeKind::SAME_SERIES] > 0);
  CHECK(per_kind[NegativeKind::SAME_PARENT] > 0);
  CHECK(per_kind[NegativeKind::UNCLE] > 0);
  CHECK(per_kind[NegativeKind::TRANSITIVE] > 0);

  // Kind semantics spot checks.
  for (const auto& n : negatives.pairs) {
    if (n.negative_kind == NegativeKind::TRANSITIVE) {
      // Ancestor at distance >= 2 inside some forest.
      bool ok = false;
      for (const auto& [sid, forest] : p.forests) {
        (void)sid;
        auto it = forest.parent_of.find(n.sub_id);
        std::size_t distance = 0;
        while (it != forest.parent_of.end()) {
          ++distance;
          if (it->second == n.parent_id && distance >= 2) ok = true;
          it = forest.parent_of.find(it->second);
        }
        if (!ok && forest.contains(n.sub_id) && forest.root_of.at(n.sub_id) == n.parent_id &&
            forest.parent_of.count(n.sub_id) &&
            forest.parent_of.at(n.sub_id) != n.parent_id) {
          ok = true;
        }
      }
      CHECK(ok);
    }
    if (n.negative_kind == NegativeKind::SAME_PARENT) {
      bool ok = false;
      for (const auto& [sid, forest] : p.forests) {
        (void)sid;
        auto a = forest.parent_of.find(n.sub_id);
        auto b = forest.parent_of.find(n.parent_id);
        if (a != forest.parent_of.end() && b != forest.parent_of.end() &&
            a->second == b->second) {
          ok = true;
        }
      }
      CHECK(ok);
    }
  }

  // Deterministic given the seed.
  const NegativeSet again = build_negative_set(g, p.forests, positives, 77);
  REQUIRE(again.pairs.size() == negatives.pairs.size());
  for (std::size_t i = 0; i < again.pairs.size(); ++i) {
    CHECK(again.pairs[i].sub_id == negatives.pairs[i].sub_id);
    CHECK(again.pairs[i].parent_id == negatives.pairs[i].parent_id);
  }
}

TEST_CASE("build_negative_set backfills missing kinds with a warning") {
  // Single-level structure: no grandparents, so UNCLE and TRANSITIVE are empty.
  EventGraph g;
  auto add = [&](const std::string& id, const std::string& label) {
    Event e;
    e.id = id;
    e.label = label;
    g.add_event(std::move(e));
  };
  for (int i = 0; i < 6; ++i) {
    const std::string y = std::to_string(2000 + i);
    add("root" + y, y + " Cup");
    g.set_series_membership("root" + y, "cup");
    add("part" + y, y + " Cup - Part");
    g.add_sub_event_edge("part" + y, "root" + y);
    g.set_series_membership("part" + y, "cup-part");
  }
  const PreparedSeries p = prep(g);
  const auto positives = build_positive_set(g, p.forests);
  const NegativeSet negatives = build_negative_set(g, p.forests, positives, 5);
  CHECK_FALSE(negatives.warnings.empty());
  CHECK(negatives.pairs.size() == positives.size());
  for (const auto& n : negatives.pairs) {
    CHECK((n.negative_kind == NegativeKind::SAME_SERIES ||
           n.negative_kind == NegativeKind::SAME_PARENT));
  }
}

TEST_CASE("random graphs: pair sets respect the edge set exhaustively") {
  Rng rng = make_rng(88, "dataset-fuzz");
  for (int trial = 0; trial < 30; ++trial) {
    const EventGraph g = happening::testing::random_graph(rng);
    const PreparedSeries p = prep(g);
    const auto positives = build_positive_set(g, p.forests);
    for (const auto& pr : positives) {
      CHECK(g.has_sub_event_edge(pr.sub_id, pr.parent_id));
    }
    if (positives.empty()) continue;
    const NegativeSet negatives = build_negative_set(g, p.forests, positives, 88);
    CHECK(negatives.pairs.size() <= positives.size());
    for (const auto& n : negatives.pairs) {
      CHECK_FALSE(g.has_sub_event_edge(n.sub_id, n.parent_id));
      CHECK(n.sub_id != n.parent_id);
    }
  }
}

TEST_CASE("cross_validate on the synthetic corpus") {
  const SyntheticCorpus corpus =
      generate_synthetic_corpus(happening::testing::regular_corpus_spec());
  const PreparedSeries p = prep(corpus.graph);

  CvOptions opt;
  opt.kind = ClassifierKind::RF;
  opt.embed.dim = 8;
  opt.embed.epochs = 10;
  opt.embed.learning_rate = 0.02;
  opt.forest.trees = 30;
  const CvReport report = cross_validate(corpus.graph, p.forests, 5, 123, opt);

  REQUIRE(report.folds.size() == 5);
  long total = 0;
  for (const auto& f : report.folds) {
    CHECK(f.accuracy() ==
          doctest::Approx(static_cast<double>(f.tp + f.tn) /
                          static_cast<double>(f.tp + f.tn + f.fp + f.fn)));
    total += f.total();
  }
  const FoldCounts agg = report.aggregate();
  CHECK(agg.total() == total);
  CHECK(agg.accuracy() > 0.8);  // near-separable structure

  CHECK_THROWS_AS(cross_validate(corpus.graph, p.forests, 1, 1, opt), std::invalid_argument);

  const std::string table = report.table();
  CHECK(table.find("accuracy") != std::string::npos);
  const std::string json = report.json();
  CHECK(json.find("\"aggregate\"") != std::string::npos);
}

TEST_CASE("feature csv export") {
  const EventGraph g = tournament_fixture();
  const PreparedSeries p = prep(g);
  const auto positives = build_positive_set(g, p.forests);
  const TfIdfIndex idx = TfIdfIndex::build(g);
  happening::testing::TempDir dir("csv");
  write_feature_csv(dir.file("features.csv"), positives, g, idx, nullptr);
  std::ifstream in(dir.file("features.csv"));
  std::string header;
  std::getline(in, header);
  CHECK(header.find("sub_id,parent_id,label,label_containment") == 0);
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == positives.size());
}
