#pragma once
// Translation embeddings over event-event triples. A triple (h, r, t) is
// scored as || W1[r] h + r_vec - W2[r] t ||_1 with relation-specific k x k
// projection matrices; training minimizes the margin ranking loss
// sum max(0, margin + score(pos) - score(neg)) by SGD against corrupted
// triples. The sub-event feature scores (head = parent, tail = sub-event).
//
// Model file format (little-endian, magic "HPNGEMB1"):
//
//   offset  content
//   0       8 bytes  magic "HPNGEMB1"
//   8       u32      k (vector size)
//   12      u32      entity count E
//   16      u32      relation count R
//   20      entity id table:   E x { u32 byte length, UTF-8 bytes }
//   ...     relation id table: R x { u32 byte length, UTF-8 bytes }
//   ...     entity vectors     E x k f64
//   ...     relation vectors   R x k f64
//   ...     head projections   R x k x k f64 (row-major)
//   ...     tail projections   R x k x k f64 (row-major)

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "happening/graph.hpp"

namespace happening {

struct EmbedTrainConfig {
  double learning_rate = 0.0001;
  double margin = 1.0;
  int dim = 100;
  int epochs = 1000;
  int negatives_per_positive = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

class EmbeddingModel {
 public:
  EmbeddingModel() = default;
  EmbeddingModel(int dim, std::vector<std::string> entity_ids,
                 std::vector<std::string> relation_ids);

  int dim() const { return dim_; }
  std::size_t entity_count() const { return entity_ids_.size(); }
  std::size_t relation_count() const { return relation_ids_.size(); }
  const std::vector<std::string>& entity_ids() const { return entity_ids_; }
  const std::vector<std::string>& relation_ids() const { return relation_ids_; }

  bool has_entity(const std::string& id) const { return entity_index_.count(id) != 0; }
  bool has_relation(const std::string& id) const { return relation_index_.count(id) != 0; }
  int entity_index(const std::string& id) const;
  int relation_index(const std::string& id) const;

  std::span<double> entity_vec(int i);
  std::span<const double> entity_vec(int i) const;
  std::span<double> relation_vec(int r);
  std::span<const double> relation_vec(int r) const;
  std::span<double> proj_head(int r);  // W1, row-major k x k
  std::span<const double> proj_head(int r) const;
  std::span<double> proj_tail(int r);  // W2
  std::span<const double> proj_tail(int r) const;

  // L1 translation score; lower is more plausible. Throws std::out_of_range
  // for unknown ids.
  double score(const std::string& head, const std::string& predicate,
               const std::string& tail) const;
  double score_indexed(int head, int relation, int tail) const;

  void save(const std::string& path) const;
  static EmbeddingModel load(const std::string& path);

  bool operator==(const EmbeddingModel&) const = default;

 private:
  int dim_ = 0;
  std::vector<std::string> entity_ids_;
  std::vector<std::string> relation_ids_;
  std::unordered_map<std::string, int> entity_index_;
  std::unordered_map<std::string, int> relation_index_;
  std::vector<double> entity_vecs_;
  std::vector<double> relation_vecs_;
  std::vector<double> proj_head_;
  std::vector<double> proj_tail_;
};

struct TripleRef {
  int head = -1;
  int relation = -1;
  int tail = -1;
};

// Gradient of max(0, margin + f(pos) - f(neg)) with respect to every touched
// parameter. Buffers are resized on first use and reused across calls; the
// trainer and the finite-difference tests share this one code path.
struct PairGradient {
  double loss = 0.0;
  bool active = false;
  // Slot order: pos head, pos tail, neg head, neg tail. Slots may refer to the
  // same entity; contributions are kept separate and summed on application.
  std::array<std::vector<double>, 4> entity_grad;
  std::vector<double> relation_grad;
  std::vector<double> proj_head_grad;  // shared W1[r], k x k
  std::vector<double> proj_tail_grad;  // shared W2[r]
  // scratch
  std::vector<double> residual_pos, residual_neg, sign_pos, sign_neg, tmp;
};

double hinge_pair_gradient(const EmbeddingModel& m, const TripleRef& pos, const TripleRef& neg,
                           double margin, PairGradient& out);

using EpochCallback = std::function<void(int epoch, const EmbeddingModel& model)>;

// Deterministic given cfg.seed. Entity vectors are pulled back onto the unit
// ball after every epoch.
EmbeddingModel train_embeddings(const std::vector<Triple>& triples, const EmbedTrainConfig& cfg,
                                const EpochCallback& on_epoch = {});

// Sub-event plausibility of (sub, parent): score with head = parent and
// tail = sub over the subEventOf relation. nullopt when either event or the
// relation is not embedded; callers substitute their missing-value sentinel.
std::optional<double> embedding_feature(const EmbeddingModel& m, const std::string& sub,
                                        const std::string& parent);

}  // namespace happening
