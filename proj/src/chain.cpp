#include "fgs/chain.hpp"

#include "fgs/errors.hpp"

#include <json.hpp>

#include <ostream>

namespace fgs {

MetropolisKernel::MetropolisKernel(const EnergyModel& model,
                                   std::unique_ptr<const Proposal> proposal,
                                   std::string name)
    : model_(model), proposal_(std::move(proposal)), name_(std::move(name)) {}

StepRecord MetropolisKernel::step(EvaluatedState& state, Rng& rng) {
  auto [next, rec] = mh_step(model_, *proposal_, state, rng);
  if (rec.accepted) state = std::move(next);
  return rec;
}

UnadjustedPncgKernel::UnadjustedPncgKernel(const EnergyModel& model,
                                           PncgConfig cfg)
    : model_(model), cfg_(cfg) {
  validate(cfg_);
}

StepRecord UnadjustedPncgKernel::step(EvaluatedState& state, Rng& rng) {
  Candidate cand = pncg_propose(model_, state, cfg_, rng);
  state = evaluate(model_, std::move(cand.state));
  StepRecord rec;
  rec.accepted = true;
  rec.energy = state.energy;
  rec.changes = cand.changes;
  rec.nonfinite = !std::isfinite(state.energy);
  return rec;
}

GwlKernel::GwlKernel(const EnergyModel& model, GwlConfig cfg, bool adjusted)
    : model_(model), cfg_(cfg), adjusted_(adjusted) {
  validate(cfg_);
}

StepRecord GwlKernel::step(EvaluatedState& state, Rng& rng) {
  int position;
  if (cfg_.scan == Scan::systematic) {
    position = next_position_;
    next_position_ = (next_position_ + 1) % model_.length();
  } else {
    position = std::uniform_int_distribution<int>(0, model_.length() - 1)(rng);
  }
  Candidate cand = gwl_propose(model_, state, cfg_, position, rng);
  EvaluatedState next = evaluate(model_, std::move(cand.state));

  StepRecord rec;
  rec.changes = 1;
  if (!adjusted_) {
    state = std::move(next);
    rec.accepted = true;
    rec.energy = state.energy;
    return rec;
  }
  double log_q_reverse = -std::numeric_limits<double>::infinity();
  if (std::isfinite(next.energy)) {
    log_q_reverse = gwl_log_q(model_, next, state.state, cfg_);
  }
  const MhDecision d = mh_decide(state.energy, next.energy, cand.log_q_forward,
                                 log_q_reverse, rng);
  rec.accepted = d.accepted;
  rec.log_ratio = d.log_ratio;
  rec.nonfinite = d.nonfinite;
  if (d.accepted) state = std::move(next);
  rec.energy = state.energy;
  return rec;
}

MucolaKernel::MucolaKernel(const EnergyModel& model, MucolaConfig cfg)
    : model_(model), cfg_(cfg) {
  validate(cfg_);
}

StepRecord MucolaKernel::step(EvaluatedState& state, Rng& rng) {
  SequenceState next = mucola_step(model_, state, cfg_, rng);
  StepRecord rec;
  rec.changes = next.hamming(state.state);
  rec.accepted = true;
  state = evaluate(model_, std::move(next));
  rec.energy = state.energy;
  rec.nonfinite = !std::isfinite(state.energy);
  return rec;
}

bool hybrid_should_switch(std::span<const StepRecord> history,
                          const HybridConfig& cfg) {
  if (static_cast<long long>(history.size()) >= cfg.max_pncg_steps) return true;
  long long seen = 0;
  double total = 0.0;
  for (auto it = history.rbegin(); it != history.rend() && seen < cfg.window;
       ++it) {
    if (!it->accepted) continue;
    total += it->changes;
    ++seen;
  }
  if (seen < cfg.window) return false;
  return total / static_cast<double>(seen) <= cfg.change_threshold;
}

HybridKernel::HybridKernel(const EnergyModel& model, PncgConfig pncg,
                           GwlConfig gwl, HybridConfig cfg)
    : cfg_(cfg),
      pncg_(model, std::make_unique<PncgProposal>(model, pncg), "pncg+mh"),
      gwl_(model, gwl, true) {
  validate(cfg_);
}

StepRecord HybridKernel::step(EvaluatedState& state, Rng& rng) {
  if (switch_step_) return gwl_.step(state, rng);
  StepRecord rec = pncg_.step(state, rng);
  history_.push_back(rec);
  if (hybrid_should_switch(history_, cfg_)) {
    switch_step_ = static_cast<long long>(history_.size());
    history_.clear();
    history_.shrink_to_fit();
  }
  return rec;
}

std::unique_ptr<ChainKernel> make_kernel(const KernelSpec& spec,
                                         const EnergyModel& model) {
  validate(spec);
  switch (spec.kind) {
    case KernelKind::pncg:
      if (!spec.adjusted) {
        return std::make_unique<UnadjustedPncgKernel>(model, spec.pncg());
      }
      return std::make_unique<MetropolisKernel>(
          model, std::make_unique<PncgProposal>(model, spec.pncg()),
          spec.name());
    case KernelKind::gwl:
      return std::make_unique<GwlKernel>(model, spec.gwl(), spec.adjusted);
    case KernelKind::rwm:
      if (!spec.adjusted) {
        throw ConfigError("rwm is only available with the MH correction");
      }
      return std::make_unique<MetropolisKernel>(
          model, std::make_unique<RwmProposal>(model), spec.name());
    case KernelKind::mucola:
      if (spec.adjusted) {
        throw InfeasibleError(
            "MH-corrected MUCOLA needs the Gaussian mass of a Voronoi cell, "
            "which is not computable in general; use it unadjusted");
      }
      return std::make_unique<MucolaKernel>(model, spec.mucola());
    case KernelKind::hybrid:
      return std::make_unique<HybridKernel>(
          model, spec.pncg(), GwlConfig{spec.alpha, spec.p, spec.scan},
          spec.hybrid);
  }
  throw ConfigError("unknown kernel kind");
}

ChainTrace run_chain(const EnergyModel& model, ChainKernel& kernel,
                     const SequenceState& initial, long long steps, Rng& rng,
                     std::span<const StepCallback> callbacks,
                     bool keep_states) {
  if (steps < 1) throw ContractError("steps must be >= 1");
  ChainTrace trace;
  trace.length = initial.length();
  trace.records.reserve(static_cast<std::size_t>(steps));
  if (keep_states) {
    trace.tokens.reserve(static_cast<std::size_t>(steps) * initial.length());
  }
  EvaluatedState state = evaluate(model, initial);
  for (long long t = 1; t <= steps; ++t) {
    StepRecord rec = kernel.step(state, rng);
    rec.t = t;
    trace.records.push_back(rec);
    if (keep_states) {
      const auto& toks = state.state.tokens();
      trace.tokens.insert(trace.tokens.end(), toks.begin(), toks.end());
    }
    try {
      for (const auto& cb : callbacks) cb(rec, state.state);
    } catch (const std::exception& e) {
      trace.aborted = true;
      trace.error = e.what();
      break;
    }
  }
  trace.final_state = state.state;
  return trace;
}

void JsonlTraceWriter::operator()(const StepRecord& rec,
                                  const SequenceState& state) {
  nlohmann::ordered_json line;
  line["t"] = rec.t;
  line["energy"] = rec.energy;
  line["accepted"] = rec.accepted;
  line["changes"] = rec.changes;
  if (emit_states_) line["state"] = state.tokens();
  out_ << line.dump() << '\n';
  if (!out_) throw std::runtime_error("failed to write trace record");
}

SequenceState random_state(const EmbeddingTable& table, int length, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, table.size() - 1);
  std::vector<int> tokens(length);
  for (auto& t : tokens) t = pick(rng);
  return SequenceState(table, std::move(tokens));
}

}  // namespace fgs
