#include "happening/embedding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "happening/kernels.hpp"
#include "happening/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "model serialization assumes a little-endian host");

namespace happening {

namespace {
constexpr char kMagic[8] = {'H', 'P', 'N', 'G', 'E', 'M', 'B', '1'};
}

void EmbedTrainConfig::validate() const {
  if (learning_rate <= 0) throw std::invalid_argument("embedding learning_rate must be > 0");
  if (margin <= 0) throw std::invalid_argument("embedding margin must be > 0");
  if (dim < 1) throw std::invalid_argument("embedding dim must be >= 1");
  if (epochs < 1) throw std::invalid_argument("embedding epochs must be >= 1");
  if (negatives_per_positive < 1) {
    throw std::invalid_argument("negatives_per_positive must be >= 1");
  }
}

EmbeddingModel::EmbeddingModel(int dim, std::vector<std::string> entity_ids,
                               std::vector<std::string> relation_ids)
    : dim_(dim), entity_ids_(std::move(entity_ids)), relation_ids_(std::move(relation_ids)) {
  for (std::size_t i = 0; i < entity_ids_.size(); ++i) {
    entity_index_.emplace(entity_ids_[i], static_cast<int>(i));
  }
  for (std::size_t i = 0; i < relation_ids_.size(); ++i) {
    relation_index_.emplace(relation_ids_[i], static_cast<int>(i));
  }
  const std::size_t k = static_cast<std::size_t>(dim_);
  entity_vecs_.assign(entity_ids_.size() * k, 0.0);
  relation_vecs_.assign(relation_ids_.size() * k, 0.0);
  proj_head_.assign(relation_ids_.size() * k * k, 0.0);
  proj_tail_.assign(relation_ids_.size() * k * k, 0.0);
  for (std::size_t r = 0; r < relation_ids_.size(); ++r) {
    for (std::size_t i = 0; i < k; ++i) {
      proj_head_[r * k * k + i * k + i] = 1.0;
      proj_tail_[r * k * k + i * k + i] = 1.0;
    }
  }
}

int EmbeddingModel::entity_index(const std::string& id) const {
  auto it = entity_index_.find(id);
  if (it == entity_index_.end()) throw std::out_of_range("unknown entity: " + id);
  return it->second;
}

int EmbeddingModel::relation_index(const std::string& id) const {
  auto it = relation_index_.find(id);
  if (it == relation_index_.end()) throw std::out_of_range("unknown relation: " + id);
  return it->second;
}

std::span<double> EmbeddingModel::entity_vec(int i) {
  return {entity_vecs_.data() + static_cast<std::size_t>(i) * dim_,
          static_cast<std::size_t>(dim_)};
}
std::span<const double> EmbeddingModel::entity_vec(int i) const {
  return {entity_vecs_.data() + static_cast<std::size_t>(i) * dim_,
          static_cast<std::size_t>(dim_)};
}
std::span<double> EmbeddingModel::relation_vec(int r) {
  return {relation_vecs_.data() + static_cast<std::size_t>(r) * dim_,
          static_cast<std::size_t>(dim_)};
}
std::span<const double> EmbeddingModel::relation_vec(int r) const {
  return {relation_vecs_.data() + static_cast<std::size_t>(r) * dim_,
          static_cast<std::size_t>(dim_)};
}
std::span<double> EmbeddingModel::proj_head(int r) {
  const std::size_t kk = static_cast<std::size_t>(dim_) * dim_;
  return {proj_head_.data() + r * kk, kk};
}
std::span<const double> EmbeddingModel::proj_head(int r) const {
  const std::size_t kk = static_cast<std::size_t>(dim_) * dim_;
  return {proj_head_.data() + r * kk, kk};
}
std::span<double> EmbeddingModel::proj_tail(int r) {
  const std::size_t kk = static_cast<std::size_t>(dim_) * dim_;
  return {proj_tail_.data() + r * kk, kk};
}
std::span<const double> EmbeddingModel::proj_tail(int r) const {
  const std::size_t kk = static_cast<std::size_t>(dim_) * dim_;
  return {proj_tail_.data() + r * kk, kk};
}

namespace {

// residual = W1 h + r - W2 t
void compute_residual(const EmbeddingModel& m, const TripleRef& t, std::vector<double>& residual,
                      std::vector<double>& tmp) {
  const auto& K = kern::active();
  const std::size_t k = static_cast<std::size_t>(m.dim());
  residual.resize(k);
  tmp.resize(k);
  K.matvec(m.proj_head(t.relation).data(), m.entity_vec(t.head).data(), residual.data(), k);
  K.vadd(residual.data(), m.relation_vec(t.relation).data(), k);
  K.matvec(m.proj_tail(t.relation).data(), m.entity_vec(t.tail).data(), tmp.data(), k);
  K.vsub(residual.data(), tmp.data(), k);
}

}  // namespace

double EmbeddingModel::score_indexed(int head, int relation, int tail) const {
  static thread_local std::vector<double> residual, tmp;
  compute_residual(*this, {head, relation, tail}, residual, tmp);
  return kern::active().l1_norm(residual.data(), residual.size());
}

double EmbeddingModel::score(const std::string& head, const std::string& predicate,
                             const std::string& tail) const {
  return score_indexed(entity_index(head), relation_index(predicate), entity_index(tail));
}

double hinge_pair_gradient(const EmbeddingModel& m, const TripleRef& pos, const TripleRef& neg,
                           double margin, PairGradient& out) {
  const auto& K = kern::active();
  const std::size_t k = static_cast<std::size_t>(m.dim());
  const std::size_t kk = k * k;

  compute_residual(m, pos, out.residual_pos, out.tmp);
  compute_residual(m, neg, out.residual_neg, out.tmp);
  const double f_pos = K.l1_norm(out.residual_pos.data(), k);
  const double f_neg = K.l1_norm(out.residual_neg.data(), k);
  out.loss = margin + f_pos - f_neg;
  out.active = out.loss > 0.0;
  if (!out.active) {
    out.loss = 0.0;
    return 0.0;
  }

  out.sign_pos.resize(k);
  out.sign_neg.resize(k);
  K.sign(out.residual_pos.data(), out.sign_pos.data(), k);
  K.sign(out.residual_neg.data(), out.sign_neg.data(), k);

  for (auto& g : out.entity_grad) g.assign(k, 0.0);
  out.relation_grad.assign(k, 0.0);
  out.proj_head_grad.assign(kk, 0.0);
  out.proj_tail_grad.assign(kk, 0.0);
  out.tmp.resize(k);

  // d/dh ||W1 h + r - W2 t||_1 = W1^T sign, d/dt = -W2^T sign; the negative
  // triple enters the loss with a minus sign.
  K.matvec_t(m.proj_head(pos.relation).data(), out.sign_pos.data(), out.tmp.data(), k);
  K.vadd(out.entity_grad[0].data(), out.tmp.data(), k);
  K.matvec_t(m.proj_tail(pos.relation).data(), out.sign_pos.data(), out.tmp.data(), k);
  K.vsub(out.entity_grad[1].data(), out.tmp.data(), k);
  K.matvec_t(m.proj_head(neg.relation).data(), out.sign_neg.data(), out.tmp.data(), k);
  K.vsub(out.entity_grad[2].data(), out.tmp.data(), k);
  K.matvec_t(m.proj_tail(neg.relation).data(), out.sign_neg.data(), out.tmp.data(), k);
  K.vadd(out.entity_grad[3].data(), out.tmp.data(), k);

  K.vadd(out.relation_grad.data(), out.sign_pos.data(), k);
  K.vsub(out.relation_grad.data(), out.sign_neg.data(), k);

  K.ger(out.proj_head_grad.data(), 1.0, out.sign_pos.data(), m.entity_vec(pos.head).data(), k);
  K.ger(out.proj_head_grad.data(), -1.0, out.sign_neg.data(), m.entity_vec(neg.head).data(), k);
  K.ger(out.proj_tail_grad.data(), -1.0, out.sign_pos.data(), m.entity_vec(pos.tail).data(), k);
  K.ger(out.proj_tail_grad.data(), 1.0, out.sign_neg.data(), m.entity_vec(neg.tail).data(), k);

  return out.loss;
}

namespace {

void apply_pair_gradient(EmbeddingModel& m, const TripleRef& pos, const TripleRef& neg,
                         const PairGradient& grad, double lr) {
  const auto& K = kern::active();
  const std::size_t k = static_cast<std::size_t>(m.dim());
  K.axpy(-lr, grad.entity_grad[0].data(), m.entity_vec(pos.head).data(), k);
  K.axpy(-lr, grad.entity_grad[1].data(), m.entity_vec(pos.tail).data(), k);
  K.axpy(-lr, grad.entity_grad[2].data(), m.entity_vec(neg.head).data(), k);
  K.axpy(-lr, grad.entity_grad[3].data(), m.entity_vec(neg.tail).data(), k);
  K.axpy(-lr, grad.relation_grad.data(), m.relation_vec(pos.relation).data(), k);
  K.axpy(-lr, grad.proj_head_grad.data(), m.proj_head(pos.relation).data(), k * k);
  K.axpy(-lr, grad.proj_tail_grad.data(), m.proj_tail(pos.relation).data(), k * k);
}

}  // namespace

EmbeddingModel train_embeddings(const std::vector<Triple>& triples, const EmbedTrainConfig& cfg,
                                const EpochCallback& on_epoch) {
  cfg.validate();
  if (triples.empty()) throw std::invalid_argument("train_embeddings: empty triple set");

  std::set<std::string> entity_set, relation_set;
  for (const auto& t : triples) {
    entity_set.insert(t.subject);
    entity_set.insert(t.object);
    relation_set.insert(t.predicate);
  }
  EmbeddingModel m(cfg.dim, {entity_set.begin(), entity_set.end()},
                   {relation_set.begin(), relation_set.end()});

  const std::size_t k = static_cast<std::size_t>(cfg.dim);
  const double bound = 6.0 / std::sqrt(static_cast<double>(cfg.dim));
  Rng rng = make_rng(cfg.seed, "embedding-train");
  for (std::size_t i = 0; i < m.entity_count(); ++i) {
    auto v = m.entity_vec(static_cast<int>(i));
    for (std::size_t j = 0; j < k; ++j) v[j] = uniform_range(rng, -bound, bound);
  }
  for (std::size_t r = 0; r < m.relation_count(); ++r) {
    auto v = m.relation_vec(static_cast<int>(r));
    for (std::size_t j = 0; j < k; ++j) v[j] = uniform_range(rng, -bound, bound);
  }

  std::vector<TripleRef> train;
  train.reserve(triples.size());
  std::unordered_set<std::uint64_t> known;
  const std::uint64_t ne = m.entity_count();
  auto key = [&](const TripleRef& t) {
    return (static_cast<std::uint64_t>(t.relation) * ne + t.head) * ne + t.tail;
  };
  std::set<Triple> unique(triples.begin(), triples.end());
  for (const auto& t : unique) {
    TripleRef ref{m.entity_index(t.subject), m.relation_index(t.predicate),
                  m.entity_index(t.object)};
    train.push_back(ref);
    known.insert(key(ref));
  }

  const auto& K = kern::active();
  PairGradient grad;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& pos : train) {
      for (int nneg = 0; nneg < cfg.negatives_per_positive; ++nneg) {
        TripleRef neg = pos;
        bool corrupt_head = coin_flip(rng);
        for (int attempt = 0; attempt < 1000; ++attempt) {
          int candidate = static_cast<int>(uniform_below(rng, ne));
          if (corrupt_head) {
            neg.head = candidate;
          } else {
            neg.tail = candidate;
          }
          if (!known.count(key(neg))) break;
        }
        if (known.count(key(neg))) continue;  // degenerate graph, skip
        if (hinge_pair_gradient(m, pos, neg, cfg.margin, grad) > 0.0) {
          apply_pair_gradient(m, pos, neg, grad, cfg.learning_rate);
        }
      }
    }
    // Pull entities back onto the unit ball.
    for (std::size_t i = 0; i < m.entity_count(); ++i) {
      auto v = m.entity_vec(static_cast<int>(i));
      const double nsq = K.l2_norm_sq(v.data(), k);
      if (nsq > 1.0) K.scale(v.data(), 1.0 / std::sqrt(nsq), k);
    }
    if (on_epoch) on_epoch(epoch, m);
  }
  return m;
}

std::optional<double> embedding_feature(const EmbeddingModel& m, const std::string& sub,
                                        const std::string& parent) {
  if (!m.has_entity(sub) || !m.has_entity(parent) || !m.has_relation(kSubEventPredicate)) {
    return std::nullopt;
  }
  return m.score(parent, kSubEventPredicate, sub);
}

// --------------------------------------------------------------------------
// Serialization
// --------------------------------------------------------------------------

namespace {

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

void write_string(std::ofstream& out, const std::string& s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::ifstream& in) {
  std::uint32_t len = read_u32(in);
  std::string s(len, '\0');
  in.read(s.data(), len);
  return s;
}

void write_doubles(std::ofstream& out, std::span<const double> v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_doubles(std::ifstream& in, std::span<double> v) {
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
}

}  // namespace

void EmbeddingModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  write_u32(out, static_cast<std::uint32_t>(dim_));
  write_u32(out, static_cast<std::uint32_t>(entity_ids_.size()));
  write_u32(out, static_cast<std::uint32_t>(relation_ids_.size()));
  for (const auto& id : entity_ids_) write_string(out, id);
  for (const auto& id : relation_ids_) write_string(out, id);
  write_doubles(out, entity_vecs_);
  write_doubles(out, relation_vecs_);
  write_doubles(out, proj_head_);
  write_doubles(out, proj_tail_);
  if (!out) throw std::runtime_error("short write to " + path);
}

EmbeddingModel EmbeddingModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error(path + " is not an embedding model file");
  }
  const std::uint32_t dim = read_u32(in);
  const std::uint32_t ne = read_u32(in);
  const std::uint32_t nr = read_u32(in);
  std::vector<std::string> entity_ids(ne), relation_ids(nr);
  for (auto& id : entity_ids) id = read_string(in);
  for (auto& id : relation_ids) id = read_string(in);
  EmbeddingModel m(static_cast<int>(dim), std::move(entity_ids), std::move(relation_ids));
  read_doubles(in, m.entity_vecs_);
  read_doubles(in, m.relation_vecs_);
  read_doubles(in, m.proj_head_);
  read_doubles(in, m.proj_tail_);
  if (!in) throw std::runtime_error("truncated embedding model file " + path);
  return m;
}

}  // namespace happening
