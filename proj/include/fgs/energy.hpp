#pragma once

#include <Eigen/Core>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fgs {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// The discrete token set V and its embedding vectors, one column per token.
class EmbeddingTable {
 public:
  EmbeddingTable(const std::vector<std::vector<double>>& vectors,
                 std::vector<std::string> labels = {});

  // V = {-1, +1} in one dimension, labelled "-1" and "+1".
  static EmbeddingTable binary_spins();

  int size() const { return static_cast<int>(vectors_.cols()); }
  int dim() const { return static_cast<int>(vectors_.rows()); }

  auto vector(int token) const { return vectors_.col(token); }
  const Matrix& vectors() const { return vectors_; }
  const std::string& label(int token) const { return labels_.at(token); }

  // Index of the Euclidean-nearest embedding; ties go to the lowest index.
  int nearest(const Eigen::Ref<const Vector>& point) const;

  bool operator==(const EmbeddingTable& other) const;

 private:
  Matrix vectors_;
  std::vector<std::string> labels_;
};

// A length-N token sequence together with its flat embedding [x_1 ... x_N].
class SequenceState {
 public:
  SequenceState(const EmbeddingTable& table, std::vector<int> tokens);

  int length() const { return static_cast<int>(tokens_.size()); }
  const std::vector<int>& tokens() const { return tokens_; }
  int token(int position) const { return tokens_[position]; }
  const Vector& embedding() const { return embedding_; }

  void set_token(const EmbeddingTable& table, int position, int token);

  // Number of positions whose token differs.
  int hamming(const SequenceState& other) const;

  bool operator==(const SequenceState& other) const {
    return tokens_ == other.tokens_;
  }

 private:
  std::vector<int> tokens_;
  Vector embedding_;
};

// U(x) over flat embeddings x in R^{N*h}. Implementations must accept any
// real x, not only points of the embedding lattice.
class EnergyModel {
 public:
  virtual ~EnergyModel() = default;

  virtual int length() const = 0;
  virtual const EmbeddingTable& table() const = 0;
  int dim() const { return length() * table().dim(); }

  virtual double energy_at(const Vector& x) const = 0;
  virtual Vector gradient_at(const Vector& x) const = 0;

  // Hessian of U when it does not depend on x (quadratic energies).
  virtual std::optional<Matrix> constant_hessian() const {
    return std::nullopt;
  }
};

// U(x) = -beta * (1/2 x^T J x + b^T x), J symmetrized on construction.
class LogQuadraticEnergy final : public EnergyModel {
 public:
  LogQuadraticEnergy(EmbeddingTable table, int length, Matrix coupling,
                     Vector field, double beta);

  // Ising-style ring: J = cycle adjacency (x) I_h, b = 0.
  static LogQuadraticEnergy cycle(EmbeddingTable table, int length,
                                  double beta);

  int length() const override { return length_; }
  const EmbeddingTable& table() const override { return table_; }

  double energy_at(const Vector& x) const override;
  Vector gradient_at(const Vector& x) const override;
  std::optional<Matrix> constant_hessian() const override;

  const Matrix& coupling() const { return coupling_; }
  const Vector& field() const { return field_; }
  double beta() const { return beta_; }

 private:
  EmbeddingTable table_;
  int length_;
  Matrix coupling_;
  Vector field_;
  double beta_;
};

// Weighted sum of energies over a shared embedding table.
class CompositeEnergy final : public EnergyModel {
 public:
  struct Term {
    std::shared_ptr<const EnergyModel> model;
    double weight = 1.0;
  };

  explicit CompositeEnergy(std::vector<Term> terms);

  int length() const override { return terms_.front().model->length(); }
  const EmbeddingTable& table() const override {
    return terms_.front().model->table();
  }

  double energy_at(const Vector& x) const override;
  Vector gradient_at(const Vector& x) const override;
  std::optional<Matrix> constant_hessian() const override;

  const std::vector<Term>& terms() const { return terms_; }

 private:
  std::vector<Term> terms_;
};

// N x N adjacency of the N-cycle; position N-1 wraps to 0.
Matrix cycle_adjacency(int length);

double energy_eval(const EnergyModel& model, const SequenceState& state);
Vector gradient_eval(const EnergyModel& model, const SequenceState& state);

// Central differences of U at an arbitrary (possibly off-lattice) point.
Vector finite_diff_gradient(const EnergyModel& model, const Vector& x,
                            double step);

}  // namespace fgs
