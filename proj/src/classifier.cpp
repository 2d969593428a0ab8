#include "happening/classifier.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "happening/kernels.hpp"
#include "happening/parallel.hpp"
#include "happening/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "classifier serialization assumes a little-endian host");

namespace happening {

namespace {
constexpr char kMagic[8] = {'H', 'P', 'N', 'G', 'C', 'L', 'S', '1'};
}

std::string to_string(ClassifierKind k) { return k == ClassifierKind::LOG ? "log" : "rf"; }

ClassifierKind classifier_kind_from_string(const std::string& s) {
  if (s == "log" || s == "LOG") return ClassifierKind::LOG;
  if (s == "rf" || s == "RF") return ClassifierKind::RF;
  throw std::invalid_argument("unknown classifier kind: " + s);
}

void Dataset::add_row(std::span<const double> values, int label) {
  if (cols == 0) cols = values.size();
  if (values.size() != cols) throw std::invalid_argument("inconsistent feature width");
  x.insert(x.end(), values.begin(), values.end());
  y.push_back(label);
  ++rows;
}

namespace {

void check_two_classes(const Dataset& data) {
  if (data.rows == 0) throw std::invalid_argument("empty training set");
  const int first = data.y.front();
  if (std::all_of(data.y.begin(), data.y.end(), [&](int v) { return v == first; })) {
    throw std::invalid_argument("training data contains a single class");
  }
}

// Gathered column matrix for the selected columns.
std::vector<double> gather_matrix(const Dataset& data, const std::vector<std::size_t>& columns) {
  std::vector<double> out(data.rows * columns.size());
  for (std::size_t i = 0; i < data.rows; ++i) {
    auto row = data.row(i);
    for (std::size_t j = 0; j < columns.size(); ++j) out[i * columns.size() + j] = row[columns[j]];
  }
  return out;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

std::vector<double> Classifier::gather(std::span<const double> full_vector) const {
  std::vector<double> out(columns_.size());
  for (std::size_t j = 0; j < columns_.size(); ++j) out[j] = full_vector[columns_[j]];
  return out;
}

Classifier Classifier::train_logreg(const Dataset& data, const LogRegParams& params,
                                    std::vector<std::size_t> columns,
                                    std::vector<std::string> column_names) {
  check_two_classes(data);
  Classifier clf;
  clf.kind_ = ClassifierKind::LOG;
  clf.columns_ = std::move(columns);
  clf.column_names_ = std::move(column_names);

  const std::size_t d = clf.columns_.size();
  const std::size_t n = data.rows;
  std::vector<double> x = gather_matrix(data, clf.columns_);

  // z-score standardization fitted on the training data only.
  clf.means_.assign(d, 0.0);
  clf.stds_.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) clf.means_[j] += x[i * d + j];
  }
  for (std::size_t j = 0; j < d; ++j) clf.means_[j] /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double c = x[i * d + j] - clf.means_[j];
      clf.stds_[j] += c * c;
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    clf.stds_[j] = std::sqrt(clf.stds_[j] / static_cast<double>(n));
    if (clf.stds_[j] == 0.0) clf.stds_[j] = 1.0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      x[i * d + j] = (x[i * d + j] - clf.means_[j]) / clf.stds_[j];
    }
  }

  const auto& K = kern::active();
  clf.weights_.assign(d, 0.0);
  clf.bias_ = 0.0;
  std::vector<double> grad(d);
  for (int iter = 0; iter < params.iterations; ++iter) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = x.data() + i * d;
      const double p = sigmoid(K.dot(clf.weights_.data(), row, d) + clf.bias_);
      const double err = p - static_cast<double>(data.y[i]);
      K.axpy(err, row, grad.data(), d);
      grad_b += err;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    K.scale(grad.data(), inv_n, d);
    K.axpy(2.0 * params.l2, clf.weights_.data(), grad.data(), d);
    K.axpy(-params.learning_rate, grad.data(), clf.weights_.data(), d);
    clf.bias_ -= params.learning_rate * grad_b * inv_n;
  }
  return clf;
}

// ---------------------------------------------------------------------------
// CART / random forest
// ---------------------------------------------------------------------------

namespace {

struct SplitChoice {
  double impurity = 1e100;  // weighted child Gini
  std::size_t feature = 0;
  double threshold = 0.0;
  bool found = false;
};

// Best threshold split of `rows` (indices into x) along the candidate
// features; ties break toward the lower feature index, then lower threshold.
SplitChoice best_split(const std::vector<double>& x, const std::vector<int>& y, std::size_t d,
                       const std::vector<std::size_t>& rows,
                       const std::vector<std::size_t>& features) {
  SplitChoice best;
  std::vector<std::pair<double, int>> order(rows.size());
  for (std::size_t f : features) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      order[i] = {x[rows[i] * d + f], y[rows[i]]};
    }
    std::sort(order.begin(), order.end());
    const std::size_t n = order.size();
    std::size_t total_pos = 0;
    for (const auto& [v, label] : order) total_pos += static_cast<std::size_t>(label);
    std::size_t left_n = 0, left_pos = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      ++left_n;
      left_pos += static_cast<std::size_t>(order[i].second);
      if (order[i].first == order[i + 1].first) continue;  // no cut between equals
      const std::size_t right_n = n - left_n;
      const std::size_t right_pos = total_pos - left_pos;
      auto gini = [](std::size_t cnt, std::size_t pos) {
        const double p = static_cast<double>(pos) / static_cast<double>(cnt);
        return 2.0 * p * (1.0 - p);
      };
      const double impurity = (static_cast<double>(left_n) * gini(left_n, left_pos) +
                               static_cast<double>(right_n) * gini(right_n, right_pos)) /
                              static_cast<double>(n);
      const double threshold = order[i].first + 0.5 * (order[i + 1].first - order[i].first);
      const bool better =
          impurity < best.impurity ||
          (impurity == best.impurity && best.found &&
           (f < best.feature || (f == best.feature && threshold < best.threshold)));
      if (!best.found || better) {
        best = {impurity, f, threshold, true};
      }
    }
  }
  return best;
}

struct TreeBuilder {
  const std::vector<double>& x;
  const std::vector<int>& y;
  std::size_t d;
  const RfParams& params;
  std::size_t subsample;
  Rng rng;
  std::vector<TreeNode> nodes;

  std::int32_t build(std::vector<std::size_t> rows, int depth) {
    std::size_t pos = 0;
    for (std::size_t r : rows) pos += static_cast<std::size_t>(y[r]);
    const double prob = static_cast<double>(pos) / static_cast<double>(rows.size());

    auto make_leaf = [&]() {
      nodes.push_back({-1, 0.0, -1, -1, prob});
      return static_cast<std::int32_t>(nodes.size() - 1);
    };
    if (pos == 0 || pos == rows.size()) return make_leaf();
    if (params.max_depth > 0 && depth >= params.max_depth) return make_leaf();
    if (rows.size() < 2 * static_cast<std::size_t>(params.min_leaf)) return make_leaf();

    // Feature subsample drawn per split.
    std::vector<std::size_t> features;
    if (subsample >= d) {
      features.resize(d);
      std::iota(features.begin(), features.end(), 0);
    } else {
      features = sample_indices(d, subsample, rng);
      std::sort(features.begin(), features.end());
    }
    SplitChoice split = best_split(x, y, d, rows, features);
    if (!split.found) return make_leaf();

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) {
      (x[r * d + split.feature] <= split.threshold ? left : right).push_back(r);
    }
    if (left.size() < static_cast<std::size_t>(params.min_leaf) ||
        right.size() < static_cast<std::size_t>(params.min_leaf)) {
      return make_leaf();
    }
    const std::int32_t self = static_cast<std::int32_t>(nodes.size());
    nodes.push_back({static_cast<std::int32_t>(split.feature), split.threshold, -1, -1, prob});
    const std::int32_t l = build(std::move(left), depth + 1);
    const std::int32_t r = build(std::move(right), depth + 1);
    nodes[self].left = l;
    nodes[self].right = r;
    return self;
  }
};

}  // namespace

Classifier Classifier::train_forest(const Dataset& data, const RfParams& params,
                                    std::uint64_t seed, std::vector<std::size_t> columns,
                                    std::vector<std::string> column_names, int threads) {
  check_two_classes(data);
  if (params.trees < 1) throw std::invalid_argument("forest needs at least one tree");
  Classifier clf;
  clf.kind_ = ClassifierKind::RF;
  clf.columns_ = std::move(columns);
  clf.column_names_ = std::move(column_names);

  const std::size_t d = clf.columns_.size();
  const std::size_t n = data.rows;
  const std::vector<double> x = gather_matrix(data, clf.columns_);

  std::size_t subsample;
  if (params.feature_subsample > 0) {
    subsample = static_cast<std::size_t>(params.feature_subsample);
  } else if (params.feature_subsample < 0) {
    subsample = d;
  } else {
    subsample = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
  }
  subsample = std::min(subsample, d);

  clf.trees_.resize(static_cast<std::size_t>(params.trees));
  parallel_for(clf.trees_.size(), threads, [&](std::size_t t) {
    Rng rng = make_rng(seed, "rf-tree", t);
    std::vector<std::size_t> rows;
    rows.reserve(n);
    if (params.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) {
        rows.push_back(static_cast<std::size_t>(uniform_below(rng, n)));
      }
    } else {
      rows.resize(n);
      std::iota(rows.begin(), rows.end(), 0);
    }
    std::size_t pos = 0;
    for (std::size_t r : rows) pos += static_cast<std::size_t>(data.y[r]);
    if (pos == 0 || pos == rows.size()) {
      // Single-class bootstrap sample: fall back to the full data.
      rows.resize(n);
      std::iota(rows.begin(), rows.end(), 0);
    }
    TreeBuilder builder{x, data.y, d, params, subsample, std::move(rng), {}};
    builder.build(std::move(rows), 0);
    clf.trees_[t] = std::move(builder.nodes);
  });
  return clf;
}

double Classifier::tree_prob(const std::vector<TreeNode>& tree,
                             std::span<const double> row) const {
  std::int32_t node = 0;
  while (tree[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& nd = tree[static_cast<std::size_t>(node)];
    node = row[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
  }
  return tree[static_cast<std::size_t>(node)].leaf_prob;
}

double Classifier::predict_proba(std::span<const double> full_vector) const {
  const std::vector<double> row = gather(full_vector);
  if (kind_ == ClassifierKind::LOG) {
    double z = bias_;
    for (std::size_t j = 0; j < row.size(); ++j) {
      z += weights_[j] * (row[j] - means_[j]) / stds_[j];
    }
    return sigmoid(z);
  }
  // Majority vote: the fraction of trees whose leaf calls the pair positive.
  std::size_t votes = 0;
  for (const auto& tree : trees_) {
    if (tree_prob(tree, row) >= 0.5) ++votes;
  }
  return static_cast<double>(votes) / static_cast<double>(trees_.size());
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

void write_str(std::ofstream& out, const std::string& s) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_str(std::ifstream& in) {
  const auto len = read_pod<std::uint32_t>(in);
  std::string s(len, '\0');
  in.read(s.data(), len);
  return s;
}

void write_dvec(std::ofstream& out, const std::vector<double>& v) {
  write_pod<std::uint64_t>(out, v.size());
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> read_dvec(std::ifstream& in) {
  std::vector<double> v(read_pod<std::uint64_t>(in));
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
  return v;
}

}  // namespace

void Classifier::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod<std::uint8_t>(out, kind_ == ClassifierKind::LOG ? 0 : 1);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(columns_.size()));
  for (std::size_t c : columns_) write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(c));
  for (const auto& name : column_names_) write_str(out, name);
  if (kind_ == ClassifierKind::LOG) {
    write_dvec(out, weights_);
    write_pod<double>(out, bias_);
    write_dvec(out, means_);
    write_dvec(out, stds_);
  } else {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(trees_.size()));
    for (const auto& tree : trees_) {
      write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(tree.size()));
      for (const auto& nd : tree) {
        write_pod<std::int32_t>(out, nd.feature);
        write_pod<double>(out, nd.threshold);
        write_pod<std::int32_t>(out, nd.left);
        write_pod<std::int32_t>(out, nd.right);
        write_pod<double>(out, nd.leaf_prob);
      }
    }
  }
  if (!out) throw std::runtime_error("short write to " + path);
}

Classifier Classifier::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error(path + " is not a classifier file");
  }
  Classifier clf;
  clf.kind_ = read_pod<std::uint8_t>(in) == 0 ? ClassifierKind::LOG : ClassifierKind::RF;
  const auto ncols = read_pod<std::uint32_t>(in);
  clf.columns_.resize(ncols);
  for (auto& c : clf.columns_) c = read_pod<std::uint32_t>(in);
  clf.column_names_.resize(ncols);
  for (auto& name : clf.column_names_) name = read_str(in);
  if (clf.kind_ == ClassifierKind::LOG) {
    clf.weights_ = read_dvec(in);
    clf.bias_ = read_pod<double>(in);
    clf.means_ = read_dvec(in);
    clf.stds_ = read_dvec(in);
  } else {
    clf.trees_.resize(read_pod<std::uint32_t>(in));
    for (auto& tree : clf.trees_) {
      tree.resize(read_pod<std::uint32_t>(in));
      for (auto& nd : tree) {
        nd.feature = read_pod<std::int32_t>(in);
        nd.threshold = read_pod<double>(in);
        nd.left = read_pod<std::int32_t>(in);
        nd.right = read_pod<std::int32_t>(in);
        nd.leaf_prob = read_pod<double>(in);
      }
    }
  }
  if (!in) throw std::runtime_error("truncated classifier file " + path);
  return clf;
}

}  // namespace happening
