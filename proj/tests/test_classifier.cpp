#include <doctest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "happening/classifier.hpp"
#include "happening/rng.hpp"

using namespace happening;

namespace {

Dataset separable_data(Rng& rng, std::size_t n = 200) {
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    const double base = label ? 2.0 : -2.0;
    const double x0 = base + uniform_range(rng, -0.5, 0.5);
    const double x1 = uniform_range(rng, -1.0, 1.0);
    d.add_row(std::vector<double>{x0, x1}, label);
  }
  return d;
}

Dataset xor_data(Rng& rng, std::size_t n = 400) {
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    const bool a = coin_flip(rng);
    const bool b = coin_flip(rng);
    const double x0 = (a ? 1.0 : 0.0) + uniform_range(rng, -0.05, 0.05);
    const double x1 = (b ? 1.0 : 0.0) + uniform_range(rng, -0.05, 0.05);
    d.add_row(std::vector<double>{x0, x1}, a != b ? 1 : 0);
  }
  return d;
}

double training_accuracy(const Classifier& clf, const Dataset& d) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < d.rows; ++i) {
    if (clf.predict(d.row(i)) == (d.y[i] == 1)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(d.rows);
}

const std::vector<std::size_t> kCols{0, 1};
const std::vector<std::string> kNames{"f0", "f1"};

}  // namespace

TEST_CASE("logistic regression separates a linear toy set") {
  Rng rng = make_rng(17, "clf-sep");
  const Dataset d = separable_data(rng);
  const Classifier clf = Classifier::train_logreg(d, LogRegParams{}, kCols, kNames);
  CHECK(training_accuracy(clf, d) == doctest::Approx(1.0));
}

TEST_CASE("random forest solves XOR while logistic regression cannot") {
  Rng rng = make_rng(18, "clf-xor");
  const Dataset d = xor_data(rng);
  RfParams rf;
  rf.trees = 50;
  const Classifier forest = Classifier::train_forest(d, rf, 1, kCols, kNames);
  CHECK(training_accuracy(forest, d) == doctest::Approx(1.0));
  const Classifier logreg = Classifier::train_logreg(d, LogRegParams{}, kCols, kNames);
  const double acc = training_accuracy(logreg, d);
  CHECK(acc > 0.25);
  CHECK(acc < 0.75);
}

TEST_CASE("label-randomized data stays at chance level") {
  Rng rng = make_rng(19, "clf-chance");
  Dataset train, eval;
  for (int i = 0; i < 600; ++i) {
    const std::vector<double> row{uniform_unit(rng), uniform_unit(rng), uniform_unit(rng)};
    const int label = coin_flip(rng) ? 1 : 0;
    (i < 400 ? train : eval).add_row(row, label);
  }
  RfParams rf;
  rf.trees = 50;
  const Classifier clf =
      Classifier::train_forest(train, rf, 2, {0, 1, 2}, {"a", "b", "c"});
  const double acc = training_accuracy(clf, eval);
  CHECK(acc > 0.4);
  CHECK(acc < 0.6);
}

TEST_CASE("determinism: same seed and data give identical predictions") {
  Rng rng = make_rng(20, "clf-det");
  const Dataset d = xor_data(rng, 200);
  RfParams rf;
  rf.trees = 30;
  const Classifier a = Classifier::train_forest(d, rf, 99, kCols, kNames);
  const Classifier b = Classifier::train_forest(d, rf, 99, kCols, kNames);
  Rng probe_rng = make_rng(21, "clf-probe");
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> probe{uniform_range(probe_rng, -1, 2),
                                    uniform_range(probe_rng, -1, 2)};
    CHECK(a.predict_proba(probe) == b.predict_proba(probe));
  }
  // Thread count must not change the model either.
  const Classifier c = Classifier::train_forest(d, rf, 99, kCols, kNames, 4);
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> probe{uniform_range(probe_rng, -1, 2),
                                    uniform_range(probe_rng, -1, 2)};
    CHECK(a.predict_proba(probe) == c.predict_proba(probe));
  }
}

TEST_CASE("a 1-tree depth-1 forest is the brute-force best stump") {
  Rng rng = make_rng(22, "clf-stump");
  Dataset d;
  for (int i = 0; i < 120; ++i) {
    const std::vector<double> row{uniform_range(rng, 0, 1), uniform_range(rng, 0, 1),
                                  uniform_range(rng, 0, 1)};
    // Mostly determined by feature 1 with noise.
    const int label = (row[1] > 0.55) == (uniform_unit(rng) > 0.15) ? 1 : 0;
    d.add_row(row, label);
  }
  RfParams rf;
  rf.trees = 1;
  rf.max_depth = 1;
  rf.bootstrap = false;
  rf.feature_subsample = -1;  // all features
  const Classifier stump =
      Classifier::train_forest(d, rf, 7, {0, 1, 2}, {"a", "b", "c"});
  const double stump_acc = training_accuracy(stump, d);

  // Brute force over all single-feature threshold splits, both polarities.
  double best = 0.0;
  for (std::size_t f = 0; f < 3; ++f) {
    std::vector<double> values;
    for (std::size_t i = 0; i < d.rows; ++i) values.push_back(d.row(i)[f]);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
      const double thr = (values[i] + values[i + 1]) / 2;
      std::size_t left_as_pos = 0, right_as_pos = 0;
      for (std::size_t r = 0; r < d.rows; ++r) {
        const bool left = d.row(r)[f] <= thr;
        if ((left ? 1 : 0) == d.y[r]) ++left_as_pos;
        if ((left ? 0 : 1) == d.y[r]) ++right_as_pos;
      }
      best = std::max({best,
                       static_cast<double>(left_as_pos) / static_cast<double>(d.rows),
                       static_cast<double>(right_as_pos) / static_cast<double>(d.rows)});
    }
  }
  CHECK(stump_acc == doctest::Approx(best));
}

TEST_CASE("single-class training data is rejected") {
  Dataset d;
  d.add_row(std::vector<double>{1.0}, 1);
  d.add_row(std::vector<double>{2.0}, 1);
  CHECK_THROWS_AS(Classifier::train_logreg(d, LogRegParams{}, {0}, {"x"}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Classifier::train_forest(d, RfParams{}, 1, {0}, {"x"}),
                  std::invalid_argument);
}

TEST_CASE("classifier save/load round trip") {
  Rng rng = make_rng(23, "clf-io");
  const Dataset d = xor_data(rng, 150);
  happening::testing::TempDir dir("clf");

  RfParams rf;
  rf.trees = 20;
  const Classifier forest = Classifier::train_forest(d, rf, 3, kCols, kNames);
  forest.save(dir.file("rf.bin"));
  const Classifier forest2 = Classifier::load(dir.file("rf.bin"));
  CHECK(forest2.kind() == ClassifierKind::RF);
  CHECK(forest2.feature_order() == kNames);

  const Classifier logreg = Classifier::train_logreg(d, LogRegParams{}, kCols, kNames);
  logreg.save(dir.file("log.bin"));
  const Classifier logreg2 = Classifier::load(dir.file("log.bin"));

  Rng probe_rng = make_rng(24, "clf-io-probe");
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> probe{uniform_range(probe_rng, -1, 2),
                                    uniform_range(probe_rng, -1, 2)};
    CHECK(forest.predict_proba(probe) == forest2.predict_proba(probe));
    CHECK(logreg.predict_proba(probe) == logreg2.predict_proba(probe));
  }
}
