#pragma once

#include "fgs/energy.hpp"

#include <random>
#include <string>

namespace fgs {

using Rng = std::mt19937_64;

// p-NCG: all positions resampled in parallel from
//   q(x'|x) ∝ exp(-1/2 ∇U(x)^T (x'-x) - 1/(2 alpha) ||x'-x||_p^p).
struct PncgConfig {
  double alpha = 1.0;
  double p = 2.0;
};

enum class Scan { random, systematic };

// Gibbs with Langevin: a single position, self-transition removed,
//   q(x'_n|x) ∝ exp(-∇_n U(x)^T (x'_n-x_n) - 1/alpha ||x'_n-x_n||_p^p).
struct GwlConfig {
  double alpha = 1.0;
  double p = 2.0;
  Scan scan = Scan::random;
};

struct MucolaConfig {
  double alpha = 1.0;
};

// Switch from p-NCG to GwL once the mean proposed change count over the
// last `window` accepted p-NCG steps drops to `change_threshold`, or after
// `max_pncg_steps` p-NCG steps regardless.
struct HybridConfig {
  int window = 100;
  double change_threshold = 1.0;
  long long max_pncg_steps = 10000;
};

enum class KernelKind { pncg, gwl, rwm, mucola, hybrid };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

// Declarative kernel description shared by the chain runner and the exact
// transition-matrix builder. `adjusted` selects the Metropolis-Hastings
// correction; MUCOLA is always unadjusted and hybrid always adjusted.
struct KernelSpec {
  KernelKind kind = KernelKind::pncg;
  bool adjusted = true;
  double alpha = 1.0;
  double p = 2.0;
  Scan scan = Scan::random;
  HybridConfig hybrid{};

  PncgConfig pncg() const { return {alpha, p}; }
  GwlConfig gwl() const { return {alpha, p, scan}; }
  MucolaConfig mucola() const { return {alpha}; }
  std::string name() const;
};

void validate(const PncgConfig& cfg);
void validate(const GwlConfig& cfg);
void validate(const MucolaConfig& cfg);
void validate(const HybridConfig& cfg);
void validate(const KernelSpec& spec);

// A state with U and ∇U evaluated once, so accepted candidates carry their
// gradient into the next step.
struct EvaluatedState {
  SequenceState state;
  double energy = 0.0;
  Vector gradient;
};

EvaluatedState evaluate(const EnergyModel& model, SequenceState state);

struct Candidate {
  SequenceState state;
  double log_q_forward = 0.0;
  int changes = 0;
};

struct StepRecord {
  long long t = 0;
  bool accepted = false;
  double energy = 0.0;
  double log_ratio = 0.0;
  int changes = 0;
  bool nonfinite = false;
};

// sum_i |d_i|^p
double p_norm_pow(const Eigen::Ref<const Vector>& d, double p);

// log-softmax with max subtraction; -inf entries stay -inf.
Vector log_softmax(const Vector& logits);

// Draws an index from softmax(logits). Returns the index and stores its
// log-probability in *log_prob.
int sample_logits(const Vector& logits, Rng& rng, double* log_prob);

// ---- p-NCG -----------------------------------------------------------------

Vector pncg_position_logits(const EnergyModel& model, const SequenceState& state,
                            const Vector& gradient, const PncgConfig& cfg,
                            int position);
Vector pncg_position_logits(const EnergyModel& model, const SequenceState& state,
                            const PncgConfig& cfg, int position);

Candidate pncg_propose(const EnergyModel& model, const EvaluatedState& current,
                       const PncgConfig& cfg, Rng& rng);

double pncg_log_q(const EnergyModel& model, const EvaluatedState& from,
                  const SequenceState& to, const PncgConfig& cfg);
double pncg_log_q(const EnergyModel& model, const SequenceState& from,
                  const SequenceState& to, const PncgConfig& cfg);

// ---- Gibbs with Langevin ---------------------------------------------------

// Logits over the K tokens at `position`; the current token gets -inf.
Vector gwl_position_logits(const EnergyModel& model, const SequenceState& state,
                           const Vector& gradient, const GwlConfig& cfg,
                           int position);

Candidate gwl_propose(const EnergyModel& model, const EvaluatedState& current,
                      const GwlConfig& cfg, int position, Rng& rng);

// -inf unless `to` differs from `from` in exactly one position. Under random
// scan the log(1/N) position choice is included.
double gwl_log_q(const EnergyModel& model, const EvaluatedState& from,
                 const SequenceState& to, const GwlConfig& cfg);
double gwl_log_q(const EnergyModel& model, const SequenceState& from,
                 const SequenceState& to, const GwlConfig& cfg);

// ---- Random-walk Metropolis ------------------------------------------------

Candidate rwm_propose(const EmbeddingTable& table, const SequenceState& state,
                      Rng& rng);
double rwm_log_q(const EmbeddingTable& table, const SequenceState& from,
                 const SequenceState& to);

// ---- Metropolis-Hastings ---------------------------------------------------

class Proposal {
 public:
  virtual ~Proposal() = default;
  virtual Candidate propose(const EvaluatedState& current, Rng& rng) const = 0;
  virtual double log_q(const EvaluatedState& from,
                       const SequenceState& to) const = 0;
};

class PncgProposal final : public Proposal {
 public:
  PncgProposal(const EnergyModel& model, PncgConfig cfg);
  Candidate propose(const EvaluatedState& current, Rng& rng) const override;
  double log_q(const EvaluatedState& from,
               const SequenceState& to) const override;

 private:
  const EnergyModel& model_;
  PncgConfig cfg_;
};

// Random-scan GwL. Systematic scan is driven by GwlKernel.
class GwlProposal final : public Proposal {
 public:
  GwlProposal(const EnergyModel& model, GwlConfig cfg);
  Candidate propose(const EvaluatedState& current, Rng& rng) const override;
  double log_q(const EvaluatedState& from,
               const SequenceState& to) const override;

 private:
  const EnergyModel& model_;
  GwlConfig cfg_;
};

class RwmProposal final : public Proposal {
 public:
  explicit RwmProposal(const EnergyModel& model) : model_(model) {}
  Candidate propose(const EvaluatedState& current, Rng& rng) const override;
  double log_q(const EvaluatedState& from,
               const SequenceState& to) const override;

 private:
  const EnergyModel& model_;
};

struct MhDecision {
  bool accepted = false;
  double log_ratio = 0.0;
  bool nonfinite = false;
};

// log ratio = -U(x') + U(x) + log q(x|x') - log q(x'|x). Never exponentiates a
// positive ratio; a uniform is drawn only when the ratio is negative.
MhDecision mh_decide(double energy_current, double energy_candidate,
                     double log_q_forward, double log_q_reverse, Rng& rng);

// One proposal + accept/reject. On rejection `current` is returned unchanged.
std::pair<EvaluatedState, StepRecord> mh_step(const EnergyModel& model,
                                              const Proposal& proposal,
                                              const EvaluatedState& current,
                                              Rng& rng);
std::pair<SequenceState, StepRecord> mh_step(const EnergyModel& model,
                                             const Proposal& proposal,
                                             const SequenceState& current,
                                             Rng& rng);

// ---- MUCOLA ----------------------------------------------------------------

// y = x - alpha/2 ∇U(x) + sqrt(alpha) xi, projected position-wise onto the
// nearest embedding. Unadjusted.
SequenceState mucola_step(const EnergyModel& model, const EvaluatedState& current,
                          const MucolaConfig& cfg, Rng& rng);
SequenceState mucola_step(const EnergyModel& model, const SequenceState& current,
                          const MucolaConfig& cfg, Rng& rng);

}  // namespace fgs
