#include <doctest.h>

#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "happening/features.hpp"
#include "happening/rng.hpp"
#include "happening/text.hpp"

using namespace happening;

namespace {

Event labeled(const std::string& id, const std::string& label) {
  Event e;
  e.id = id;
  e.label = label;
  return e;
}

std::string random_string(Rng& rng, std::size_t max_len, int alphabet) {
  std::string s;
  const std::size_t len = uniform_below(rng, max_len + 1);
  for (std::size_t i = 0; i < len; ++i) {
    s.push_back(static_cast<char>('a' + uniform_below(rng, static_cast<std::uint64_t>(alphabet))));
  }
  return s;
}

// Quadratic brute force over all substrings of the shorter string.
std::size_t lcs_oracle(const std::string& a, const std::string& b) {
  const std::string& s = a.size() <= b.size() ? a : b;
  const std::string& t = a.size() <= b.size() ? b : a;
  std::size_t best = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t len = best + 1; i + len <= s.size(); ++len) {
      if (t.find(s.substr(i, len)) == std::string::npos) break;
      best = len;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("lcs_fraction examples") {
  CHECK(lcs_fraction("2009 WC", "2009 WC").value == doctest::Approx(1.0));
  CHECK(lcs_fraction("2009 WC - Men's Singles final", "2009 WC - Men's Singles").value ==
        doctest::Approx(1.0));
  CHECK(lcs_fraction("abc", "xbcy").value == doctest::Approx(2.0 / 3.0));
  const FeatValue empty = lcs_fraction("", "abc");
  CHECK(empty.value == 0.0);
  CHECK(empty.missing);
}

TEST_CASE("lcs_fraction equals the quadratic oracle") {
  Rng rng = make_rng(14, "lcs-prop");
  for (int trial = 0; trial < 1000; ++trial) {
    const std::string a = random_string(rng, 30, 4);
    const std::string b = random_string(rng, 30, 4);
    if (a.empty() || b.empty()) continue;
    const double expected = static_cast<double>(lcs_oracle(a, b)) /
                            static_cast<double>(std::min(a.size(), b.size()));
    CHECK(lcs_fraction(a, b).value == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("unigram_similarity examples") {
  CHECK(unigram_similarity("2009 WC Men's Singles", "2009 WC Women's Singles").value ==
        doctest::Approx(0.6));
  CHECK(unigram_similarity("a b c", "a b c").value == doctest::Approx(1.0));
  CHECK(unigram_similarity("a b", "c d").value == doctest::Approx(0.0));
  CHECK(unigram_similarity("", "x").missing);
}

TEST_CASE("unigram_similarity equals set enumeration") {
  Rng rng = make_rng(15, "jac-prop");
  for (int trial = 0; trial < 1000; ++trial) {
    std::string a, b;
    for (std::size_t i = 0, n = uniform_below(rng, 8); i < n; ++i) {
      a += random_string(rng, 3, 3) + " ";
    }
    for (std::size_t i = 0, n = uniform_below(rng, 8); i < n; ++i) {
      b += random_string(rng, 3, 3) + " ";
    }
    std::set<std::string> sa, sb;
    for (const auto& t : tokenize(a)) sa.insert(t);
    for (const auto& t : tokenize(b)) sb.insert(t);
    if (normalize_label(a).empty() || normalize_label(b).empty()) continue;
    std::set<std::string> uni = sa, inter;
    uni.insert(sb.begin(), sb.end());
    for (const auto& t : sa) {
      if (sb.count(t)) inter.insert(t);
    }
    const double expected =
        uni.empty() ? 0.0 : static_cast<double>(inter.size()) / static_cast<double>(uni.size());
    CHECK(unigram_similarity(a, b).value == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("similarity features are symmetric, containment is not") {
  Rng rng = make_rng(16, "sym-prop");
  EventGraph g;
  g.add_event(labeled("x", "alpha beta"));
  g.add_event(labeled("y", "alpha beta gamma"));
  const TfIdfIndex idx = TfIdfIndex::build(g);
  for (int trial = 0; trial < 200; ++trial) {
    const std::string a = random_string(rng, 12, 3) + " " + random_string(rng, 12, 3);
    const std::string b = random_string(rng, 12, 3);
    if (normalize_label(a).empty() || normalize_label(b).empty()) continue;
    CHECK(lcs_fraction(a, b).value == lcs_fraction(b, a).value);
    CHECK(unigram_similarity(a, b).value == unigram_similarity(b, a).value);
    CHECK(idx.cosine(a, b).value == doctest::Approx(idx.cosine(b, a).value));
  }
  // "alpha beta" is contained in "alpha beta gamma" but not vice versa.
  const FeatureVector xy = extract_features(g.event("y"), g.event("x"), g, idx, nullptr);
  const FeatureVector yx = extract_features(g.event("x"), g.event("y"), g, idx, nullptr);
  CHECK(xy[kLabelContainment] == 1.0);
  CHECK(yx[kLabelContainment] == 0.0);
}

TEST_CASE("label_cosine pinned against a hand computation") {
  EventGraph g;
  g.add_event(labeled("d1", "a b"));
  g.add_event(labeled("d2", "a c"));
  g.add_event(labeled("d3", "d"));
  const TfIdfIndex idx = TfIdfIndex::build(g);
  // idf(a) = ln(3/2); idf(b) = idf(c) = ln 3. Both vectors have weight
  // idf(a) on "a" and idf(b)=idf(c) on their second token:
  // cos = idf(a)^2 / (idf(a)^2 + idf(b)^2).
  const double idf_a = std::log(3.0 / 2.0);
  const double idf_b = std::log(3.0);
  const double expected = idf_a * idf_a / (idf_a * idf_a + idf_b * idf_b);
  CHECK(idx.cosine("a b", "a c").value == doctest::Approx(expected).epsilon(1e-12));
  CHECK(idx.cosine("a b", "a b").value == doctest::Approx(1.0));
  CHECK(idx.cosine("a b", "d").value == doctest::Approx(0.0));
}

TEST_CASE("temporal_features") {
  Event sub, parent;
  sub.time = Interval{{2008, 6, 23}, {2008, 7, 6}};
  parent.time = Interval{{2008, 1, 1}, {2008, 12, 31}};
  auto f = temporal_features(sub, parent);
  CHECK(f.overlap == 1);
  CHECK(f.containment == 1);
  CHECK(f.equality == 0);
  CHECK_FALSE(f.missing);

  parent.time = sub.time;
  f = temporal_features(sub, parent);
  CHECK((f.overlap == 1 && f.containment == 1 && f.equality == 1));

  parent.time = Interval{{2009, 1, 1}, {2009, 2, 1}};
  f = temporal_features(sub, parent);
  CHECK((f.overlap == 0 && f.containment == 0 && f.equality == 0));

  parent.time.reset();
  f = temporal_features(sub, parent);
  CHECK(f.missing);
  CHECK((f.overlap == 0 && f.containment == 0 && f.equality == 0));
}

TEST_CASE("location_overlap") {
  Event sub, parent;
  sub.locations = {"London"};
  parent.locations = {"London", "UK"};
  CHECK(location_overlap(sub, parent).value == 1.0);
  parent.locations = {"Paris"};
  CHECK(location_overlap(sub, parent).value == 0.0);
  CHECK_FALSE(location_overlap(sub, parent).missing);
  parent.locations = {};
  const FeatValue missing = location_overlap(sub, parent);
  CHECK(missing.value == 0.0);
  CHECK(missing.missing);
}

TEST_CASE("extract_features fixed order and containment") {
  const EventGraph g = happening::testing::tournament_fixture();
  const TfIdfIndex idx = TfIdfIndex::build(g);
  const FeatureVector v =
      extract_features(g.event("fin2009"), g.event("ms2009"), g, idx, nullptr);
  CHECK(v[kLabelContainment] == 1.0);
  CHECK(v[kTemplateContainment] == 1.0);
  CHECK(v[kLcsFraction] == doctest::Approx(1.0));
  CHECK(v[kTimeOverlap] == 1.0);
  CHECK(v[kTimeContainment] == 1.0);
  CHECK(v[kLocationOverlap] == 1.0);
  CHECK(v[kParentLabelLen] == doctest::Approx(23.0));
  CHECK(v[kSubLabelLen] == doctest::Approx(29.0));
  CHECK(v.missing(kEmbeddingScore));  // no model supplied

  // Identical event with itself: all similarity features 1.
  const FeatureVector self =
      extract_features(g.event("ms2009"), g.event("ms2009"), g, idx, nullptr);
  CHECK(self[kLcsFraction] == 1.0);
  CHECK(self[kUnigramSimilarity] == 1.0);
  CHECK(self[kTemplateUnigramSimilarity] == 1.0);
  CHECK(self[kLabelCosine] == doctest::Approx(1.0));
  CHECK(self[kTimeEquality] == 1.0);
  CHECK(self[kParentLabelLen] == self[kSubLabelLen]);
}

TEST_CASE("fully unrelated pair scores zero everywhere") {
  EventGraph g;
  Event a = labeled("a", "alpha beta");
  a.time = Interval{{2001, 1, 1}, {2001, 2, 1}};
  a.locations = {"X"};
  Event b = labeled("b", "gamma delta");
  b.time = Interval{{2005, 1, 1}, {2005, 2, 1}};
  b.locations = {"Y"};
  g.add_event(std::move(a));
  g.add_event(std::move(b));
  const TfIdfIndex idx = TfIdfIndex::build(g);
  const FeatureVector v = extract_features(g.event("a"), g.event("b"), g, idx, nullptr);
  for (std::size_t f :
       {kLabelContainment, kUnigramSimilarity, kTemplateContainment, kTemplateUnigramSimilarity,
        kLabelCosine, kTimeOverlap, kTimeContainment, kTimeEquality, kLocationOverlap}) {
    CHECK(v[f] == 0.0);
  }
}

TEST_CASE("feature name table is stable") {
  const auto& names = feature_names();
  REQUIRE(names.size() == kFeatureVectorSize);
  CHECK(names[0] == "label_containment");
  CHECK(names[kLabelCosine] == "label_cosine");
  CHECK(names[kEmbeddingScore] == "embedding_score");
  CHECK(names[kFeatureCount] == "label_containment_missing");
  CHECK(names[kFeatureVectorSize - 1] == "embedding_score_missing");

  const auto tex = feature_columns_for_groups(kGroupTex);
  CHECK(tex.size() == 18);  // 9 features + 9 flags
  const auto stp = feature_columns_for_groups(kGroupStp);
  CHECK(stp.size() == 8);
  const auto emb = feature_columns_for_groups(kGroupEmb);
  CHECK(emb.size() == 2);
  CHECK(feature_columns_for_groups(kGroupAll).size() == kFeatureVectorSize);
}
