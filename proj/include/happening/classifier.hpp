#pragma once
// Binary classifiers for the sub-event decision: L2-penalized logistic
// regression trained by full-batch gradient descent over z-scored columns,
// and a random forest of CART trees with Gini splits. Both are deterministic
// given the seed and predict a probability in [0,1]; the decision threshold
// is 0.5.
//
// Classifier file format (little-endian, magic "HPNGCLS1"): header, the
// selected column list with names, then kind-specific payload (weights and
// standardization stats for LOG, flattened node arrays per tree for RF).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace happening {

enum class ClassifierKind { LOG, RF };

std::string to_string(ClassifierKind k);
ClassifierKind classifier_kind_from_string(const std::string& s);

struct LogRegParams {
  double learning_rate = 0.1;
  int iterations = 500;
  double l2 = 1e-4;
};

struct RfParams {
  int trees = 100;
  int max_depth = 0;         // 0 = unlimited
  int min_leaf = 1;
  int feature_subsample = 0;  // 0 = ceil(sqrt(#columns)); -1 = all columns
  bool bootstrap = true;
};

// Row-major dense feature matrix with binary labels.
struct Dataset {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> x;  // rows * cols
  std::vector<int> y;     // 0/1

  std::span<const double> row(std::size_t i) const { return {x.data() + i * cols, cols}; }
  void add_row(std::span<const double> values, int label);
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double leaf_prob = 0.0;
};

class Classifier {
 public:
  // `columns` selects the feature-vector columns this classifier consumes
  // (ablation support); `column_names` documents them in training order.
  static Classifier train_logreg(const Dataset& data, const LogRegParams& params,
                                 std::vector<std::size_t> columns,
                                 std::vector<std::string> column_names);
  static Classifier train_forest(const Dataset& data, const RfParams& params, std::uint64_t seed,
                                 std::vector<std::size_t> columns,
                                 std::vector<std::string> column_names, int threads = 1);

  ClassifierKind kind() const { return kind_; }
  const std::vector<std::size_t>& columns() const { return columns_; }
  const std::vector<std::string>& feature_order() const { return column_names_; }

  // `full_vector` is indexed by the original feature-vector layout; the
  // classifier gathers its own columns.
  double predict_proba(std::span<const double> full_vector) const;
  bool predict(std::span<const double> full_vector) const {
    return predict_proba(full_vector) >= 0.5;
  }

  void save(const std::string& path) const;
  static Classifier load(const std::string& path);

 private:
  ClassifierKind kind_ = ClassifierKind::LOG;
  std::vector<std::size_t> columns_;
  std::vector<std::string> column_names_;
  // LOG
  std::vector<double> weights_;
  double bias_ = 0.0;
  std::vector<double> means_;
  std::vector<double> stds_;
  // RF
  std::vector<std::vector<TreeNode>> trees_;

  std::vector<double> gather(std::span<const double> full_vector) const;
  double tree_prob(const std::vector<TreeNode>& tree, std::span<const double> row) const;
};

}  // namespace happening
