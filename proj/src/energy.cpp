#include "fgs/energy.hpp"

#include "fgs/errors.hpp"

#include <limits>
#include <string>
#include <utility>

namespace fgs {

EmbeddingTable::EmbeddingTable(const std::vector<std::vector<double>>& vectors,
                               std::vector<std::string> labels)
    : labels_(std::move(labels)) {
  if (vectors.size() < 2) {
    throw ContractError("embedding table needs at least 2 tokens");
  }
  const auto h = vectors.front().size();
  if (h == 0) throw ContractError("embedding dimension must be >= 1");
  vectors_.resize(static_cast<Eigen::Index>(h),
                  static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    if (vectors[k].size() != h) {
      throw ContractError("embedding " + std::to_string(k) +
                          " has dimension " +
                          std::to_string(vectors[k].size()) + ", expected " +
                          std::to_string(h));
    }
    for (std::size_t i = 0; i < h; ++i) {
      vectors_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          vectors[k][i];
    }
  }
  for (int a = 0; a < size(); ++a) {
    for (int b = a + 1; b < size(); ++b) {
      if (vectors_.col(a) == vectors_.col(b)) {
        throw ContractError("embeddings " + std::to_string(a) + " and " +
                            std::to_string(b) + " coincide");
      }
    }
  }
  if (labels_.empty()) {
    for (int k = 0; k < size(); ++k) labels_.push_back(std::to_string(k));
  } else if (static_cast<int>(labels_.size()) != size()) {
    throw ContractError("label count does not match token count");
  }
}

EmbeddingTable EmbeddingTable::binary_spins() {
  return EmbeddingTable({{-1.0}, {1.0}}, {"-1", "+1"});
}

int EmbeddingTable::nearest(const Eigen::Ref<const Vector>& point) const {
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int k = 0; k < size(); ++k) {
    const double d = (vectors_.col(k) - point).squaredNorm();
    if (d < best_dist) {
      best_dist = d;
      best = k;
    }
  }
  return best;
}

bool EmbeddingTable::operator==(const EmbeddingTable& other) const {
  return vectors_.rows() == other.vectors_.rows() &&
         vectors_.cols() == other.vectors_.cols() &&
         vectors_ == other.vectors_;
}

SequenceState::SequenceState(const EmbeddingTable& table,
                             std::vector<int> tokens)
    : tokens_(std::move(tokens)) {
  const int h = table.dim();
  embedding_.resize(static_cast<Eigen::Index>(tokens_.size()) * h);
  for (int n = 0; n < length(); ++n) {
    const int tok = tokens_[n];
    if (tok < 0 || tok >= table.size()) {
      throw ContractError("token " + std::to_string(tok) + " at position " +
                          std::to_string(n) + " outside [0, " +
                          std::to_string(table.size()) + ")");
    }
    embedding_.segment(n * h, h) = table.vector(tok);
  }
}

void SequenceState::set_token(const EmbeddingTable& table, int position,
                              int token) {
  const int h = table.dim();
  tokens_[position] = token;
  embedding_.segment(position * h, h) = table.vector(token);
}

int SequenceState::hamming(const SequenceState& other) const {
  if (other.length() != length()) {
    throw ContractError("hamming distance between different lengths");
  }
  int d = 0;
  for (int n = 0; n < length(); ++n) d += tokens_[n] != other.tokens_[n];
  return d;
}

Matrix cycle_adjacency(int length) {
  if (length < 2) throw ContractError("cycle needs at least 2 positions");
  Matrix a = Matrix::Zero(length, length);
  for (int i = 0; i < length; ++i) {
    const int j = (i + 1) % length;
    a(i, j) = 1.0;
    a(j, i) = 1.0;
  }
  return a;
}

LogQuadraticEnergy::LogQuadraticEnergy(EmbeddingTable table, int length,
                                       Matrix coupling, Vector field,
                                       double beta)
    : table_(std::move(table)),
      length_(length),
      coupling_(std::move(coupling)),
      field_(std::move(field)),
      beta_(beta) {
  const Eigen::Index d = static_cast<Eigen::Index>(length_) * table_.dim();
  if (length_ < 1) throw ContractError("sequence length must be >= 1");
  if (coupling_.rows() != d || coupling_.cols() != d) {
    throw ContractError("coupling matrix must be " + std::to_string(d) + "x" +
                        std::to_string(d));
  }
  if (field_.size() == 0) field_ = Vector::Zero(d);
  if (field_.size() != d) {
    throw ContractError("field vector must have length " + std::to_string(d));
  }
  if (!(beta_ >= 0.0)) throw ContractError("beta must be non-negative");
  coupling_ = 0.5 * (coupling_ + coupling_.transpose()).eval();
}

LogQuadraticEnergy LogQuadraticEnergy::cycle(EmbeddingTable table, int length,
                                             double beta) {
  const int h = table.dim();
  const Matrix ring = cycle_adjacency(length);
  Matrix j = Matrix::Zero(length * h, length * h);
  for (int a = 0; a < length; ++a) {
    for (int b = 0; b < length; ++b) {
      if (ring(a, b) != 0.0) {
        j.block(a * h, b * h, h, h) = ring(a, b) * Matrix::Identity(h, h);
      }
    }
  }
  return LogQuadraticEnergy(std::move(table), length, std::move(j),
                            Vector::Zero(length * h), beta);
}

double LogQuadraticEnergy::energy_at(const Vector& x) const {
  return -beta_ * (0.5 * x.dot(coupling_ * x) + field_.dot(x));
}

Vector LogQuadraticEnergy::gradient_at(const Vector& x) const {
  return -beta_ * (coupling_ * x + field_);
}

std::optional<Matrix> LogQuadraticEnergy::constant_hessian() const {
  return Matrix(-beta_ * coupling_);
}

CompositeEnergy::CompositeEnergy(std::vector<Term> terms)
    : terms_(std::move(terms)) {
  if (terms_.empty()) throw ContractError("composite energy has no terms");
  for (const auto& t : terms_) {
    if (!t.model) throw ContractError("composite term without a model");
    if (t.model->length() != terms_.front().model->length() ||
        !(t.model->table() == terms_.front().model->table())) {
      throw ContractError(
          "composite terms must share sequence length and embedding table");
    }
  }
}

double CompositeEnergy::energy_at(const Vector& x) const {
  double u = 0.0;
  for (const auto& t : terms_) u += t.weight * t.model->energy_at(x);
  return u;
}

Vector CompositeEnergy::gradient_at(const Vector& x) const {
  Vector g = Vector::Zero(x.size());
  for (const auto& t : terms_) g += t.weight * t.model->gradient_at(x);
  return g;
}

std::optional<Matrix> CompositeEnergy::constant_hessian() const {
  Matrix h = Matrix::Zero(dim(), dim());
  for (const auto& t : terms_) {
    auto term = t.model->constant_hessian();
    if (!term) return std::nullopt;
    h += t.weight * *term;
  }
  return h;
}

namespace {

void check_state(const EnergyModel& model, const SequenceState& state) {
  if (state.length() != model.length() ||
      state.embedding().size() != model.dim()) {
    throw ContractError("state of length " + std::to_string(state.length()) +
                        " does not match model of length " +
                        std::to_string(model.length()));
  }
  for (int tok : state.tokens()) {
    if (tok < 0 || tok >= model.table().size()) {
      throw ContractError("state token outside the model's table");
    }
  }
}

}  // namespace

double energy_eval(const EnergyModel& model, const SequenceState& state) {
  check_state(model, state);
  return model.energy_at(state.embedding());
}

Vector gradient_eval(const EnergyModel& model, const SequenceState& state) {
  check_state(model, state);
  return model.gradient_at(state.embedding());
}

Vector finite_diff_gradient(const EnergyModel& model, const Vector& x,
                            double step) {
  if (!(step > 0.0)) throw ContractError("finite-difference step must be > 0");
  if (x.size() != model.dim()) throw ContractError("point has wrong dimension");
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double up = model.energy_at(probe);
    probe[i] = x[i] - step;
    const double down = model.energy_at(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

}  // namespace fgs
