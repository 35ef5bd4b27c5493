#pragma once

#include "fgs/samplers.hpp"

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fgs {

// One Markov transition. Kernels own only per-chain state (scan counters,
// hybrid history); given the same state and RNG stream a step is
// deterministic.
class ChainKernel {
 public:
  virtual ~ChainKernel() = default;
  virtual StepRecord step(EvaluatedState& state, Rng& rng) = 0;
  virtual std::string name() const = 0;
};

// Proposal followed by the Metropolis-Hastings correction.
class MetropolisKernel final : public ChainKernel {
 public:
  MetropolisKernel(const EnergyModel& model,
                   std::unique_ptr<const Proposal> proposal, std::string name);
  StepRecord step(EvaluatedState& state, Rng& rng) override;
  std::string name() const override { return name_; }

 private:
  const EnergyModel& model_;
  std::unique_ptr<const Proposal> proposal_;
  std::string name_;
};

// p-NCG used unadjusted: every proposal is taken.
class UnadjustedPncgKernel final : public ChainKernel {
 public:
  UnadjustedPncgKernel(const EnergyModel& model, PncgConfig cfg);
  StepRecord step(EvaluatedState& state, Rng& rng) override;
  std::string name() const override { return "pncg"; }

 private:
  const EnergyModel& model_;
  PncgConfig cfg_;
};

// GwL + MH with random or systematic scan.
class GwlKernel final : public ChainKernel {
 public:
  GwlKernel(const EnergyModel& model, GwlConfig cfg, bool adjusted = true);
  StepRecord step(EvaluatedState& state, Rng& rng) override;
  std::string name() const override { return adjusted_ ? "gwl+mh" : "gwl"; }

 private:
  const EnergyModel& model_;
  GwlConfig cfg_;
  bool adjusted_;
  int next_position_ = 0;
};

class MucolaKernel final : public ChainKernel {
 public:
  MucolaKernel(const EnergyModel& model, MucolaConfig cfg);
  StepRecord step(EvaluatedState& state, Rng& rng) override;
  std::string name() const override { return "mucola"; }

 private:
  const EnergyModel& model_;
  MucolaConfig cfg_;
};

// True iff the mean change count over the last `window` accepted records is
// at most the threshold, or history holds max_pncg_steps records or more.
bool hybrid_should_switch(std::span<const StepRecord> history,
                          const HybridConfig& cfg);

// p-NCG + MH until hybrid_should_switch fires, then GwL + MH.
class HybridKernel final : public ChainKernel {
 public:
  HybridKernel(const EnergyModel& model, PncgConfig pncg, GwlConfig gwl,
               HybridConfig cfg);
  StepRecord step(EvaluatedState& state, Rng& rng) override;
  std::string name() const override { return "hybrid+mh"; }

  // Number of p-NCG steps taken before the switch, once it has happened.
  std::optional<long long> switch_step() const { return switch_step_; }

 private:
  HybridConfig cfg_;
  MetropolisKernel pncg_;
  GwlKernel gwl_;
  std::vector<StepRecord> history_;
  std::optional<long long> switch_step_;
};

std::unique_ptr<ChainKernel> make_kernel(const KernelSpec& spec,
                                         const EnergyModel& model);

struct ChainTrace {
  int length = 0;
  std::vector<StepRecord> records;
  // Tokens after each step, `length` per record; empty when not kept.
  std::vector<int> tokens;
  std::optional<SequenceState> final_state;
  bool aborted = false;
  std::string error;

  std::span<const int> tokens_at(std::size_t step) const {
    return {tokens.data() + step * length, static_cast<std::size_t>(length)};
  }
};

using StepCallback =
    std::function<void(const StepRecord&, const SequenceState&)>;

// Runs `steps` transitions from `initial`. Records are numbered t = 1..steps
// and describe the state after that step. A throwing callback stops the run;
// the trace up to and including that step is returned with `aborted` set.
ChainTrace run_chain(const EnergyModel& model, ChainKernel& kernel,
                     const SequenceState& initial, long long steps, Rng& rng,
                     std::span<const StepCallback> callbacks = {},
                     bool keep_states = true);

// Writes {"t", "energy", "accepted", "changes"[, "state"]} per line.
class JsonlTraceWriter {
 public:
  JsonlTraceWriter(std::ostream& out, bool emit_states)
      : out_(out), emit_states_(emit_states) {}
  void operator()(const StepRecord& rec, const SequenceState& state);

 private:
  std::ostream& out_;
  bool emit_states_;
};

// Uniform random token sequence.
SequenceState random_state(const EmbeddingTable& table, int length, Rng& rng);

}  // namespace fgs
