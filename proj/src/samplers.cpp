#include "fgs/samplers.hpp"

#include "fgs/errors.hpp"

#include <cmath>
#include <limits>

namespace fgs {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

void check_pair(const EnergyModel& model, const SequenceState& from,
                const SequenceState& to) {
  if (from.length() != model.length() || to.length() != model.length()) {
    throw ContractError("state length does not match the model");
  }
}

}  // namespace

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::pncg: return "pncg";
    case KernelKind::gwl: return "gwl";
    case KernelKind::rwm: return "rwm";
    case KernelKind::mucola: return "mucola";
    case KernelKind::hybrid: return "hybrid";
  }
  return "unknown";
}

KernelKind kernel_kind_from_string(const std::string& name) {
  if (name == "pncg") return KernelKind::pncg;
  if (name == "gwl") return KernelKind::gwl;
  if (name == "rwm") return KernelKind::rwm;
  if (name == "mucola") return KernelKind::mucola;
  if (name == "hybrid") return KernelKind::hybrid;
  throw ConfigError("unknown kernel '" + name +
                    "' (expected pncg, gwl, rwm, mucola or hybrid)");
}

std::string KernelSpec::name() const {
  std::string n = to_string(kind);
  if (kind == KernelKind::mucola) return n;
  if (kind == KernelKind::hybrid) return n + "+mh";
  return adjusted ? n + "+mh" : n;
}

void validate(const PncgConfig& cfg) {
  if (!(cfg.alpha > 0.0)) throw ConfigError("alpha must be > 0");
  if (!(cfg.p >= 1.0)) throw ConfigError("p must be >= 1");
}

void validate(const GwlConfig& cfg) {
  if (!(cfg.alpha > 0.0)) throw ConfigError("alpha must be > 0");
  if (!(cfg.p >= 1.0)) throw ConfigError("p must be >= 1");
}

void validate(const MucolaConfig& cfg) {
  if (!(cfg.alpha > 0.0)) throw ConfigError("alpha must be > 0");
}

void validate(const HybridConfig& cfg) {
  if (cfg.window < 1) throw ConfigError("hybrid window must be >= 1");
  if (!(cfg.change_threshold >= 0.0)) {
    throw ConfigError("hybrid change threshold must be >= 0");
  }
  if (cfg.max_pncg_steps < 1) {
    throw ConfigError("hybrid max_pncg_steps must be >= 1");
  }
}

void validate(const KernelSpec& spec) {
  validate(spec.pncg());
  if (spec.kind == KernelKind::hybrid) validate(spec.hybrid);
}

EvaluatedState evaluate(const EnergyModel& model, SequenceState state) {
  const double u = energy_eval(model, state);
  Vector g = model.gradient_at(state.embedding());
  return {std::move(state), u, std::move(g)};
}

double p_norm_pow(const Eigen::Ref<const Vector>& d, double p) {
  if (p == 2.0) return d.squaredNorm();
  if (p == 1.0) return d.cwiseAbs().sum();
  return d.cwiseAbs().array().pow(p).sum();
}

Vector log_softmax(const Vector& logits) {
  const double m = logits.maxCoeff();
  if (m == kNegInf || std::isnan(m)) {
    throw ContractError("softmax over logits with no finite entry");
  }
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return (logits.array() - lse).matrix();
}

int sample_logits(const Vector& logits, Rng& rng, double* log_prob) {
  const Vector lp = log_softmax(logits);
  const double u = uniform01(rng);
  double cum = 0.0;
  int last = -1;
  for (Eigen::Index k = 0; k < lp.size(); ++k) {
    if (lp[k] == kNegInf) continue;
    last = static_cast<int>(k);
    cum += std::exp(lp[k]);
    if (u < cum) {
      if (log_prob) *log_prob = lp[k];
      return last;
    }
  }
  if (log_prob) *log_prob = lp[last];
  return last;
}

// ---- p-NCG -----------------------------------------------------------------

Vector pncg_position_logits(const EnergyModel& model, const SequenceState& state,
                            const Vector& gradient, const PncgConfig& cfg,
                            int position) {
  const auto& table = model.table();
  const int h = table.dim();
  const auto x_n = state.embedding().segment(position * h, h);
  const auto g_n = gradient.segment(position * h, h);
  Vector logits(table.size());
  for (int v = 0; v < table.size(); ++v) {
    const Vector d = table.vector(v) - x_n;
    logits[v] = -0.5 * g_n.dot(d) - p_norm_pow(d, cfg.p) / (2.0 * cfg.alpha);
  }
  return logits;
}

Vector pncg_position_logits(const EnergyModel& model, const SequenceState& state,
                            const PncgConfig& cfg, int position) {
  return pncg_position_logits(model, state, gradient_eval(model, state), cfg,
                              position);
}

Candidate pncg_propose(const EnergyModel& model, const EvaluatedState& current,
                       const PncgConfig& cfg, Rng& rng) {
  SequenceState next = current.state;
  double log_q = 0.0;
  int changes = 0;
  for (int n = 0; n < model.length(); ++n) {
    double lp = 0.0;
    const int tok = sample_logits(
        pncg_position_logits(model, current.state, current.gradient, cfg, n),
        rng, &lp);
    log_q += lp;
    if (tok != current.state.token(n)) {
      next.set_token(model.table(), n, tok);
      ++changes;
    }
  }
  return {std::move(next), log_q, changes};
}

double pncg_log_q(const EnergyModel& model, const EvaluatedState& from,
                  const SequenceState& to, const PncgConfig& cfg) {
  check_pair(model, from.state, to);
  double log_q = 0.0;
  for (int n = 0; n < model.length(); ++n) {
    const Vector lp = log_softmax(
        pncg_position_logits(model, from.state, from.gradient, cfg, n));
    log_q += lp[to.token(n)];
  }
  return log_q;
}

double pncg_log_q(const EnergyModel& model, const SequenceState& from,
                  const SequenceState& to, const PncgConfig& cfg) {
  return pncg_log_q(model, evaluate(model, from), to, cfg);
}

// ---- Gibbs with Langevin ---------------------------------------------------

Vector gwl_position_logits(const EnergyModel& model, const SequenceState& state,
                           const Vector& gradient, const GwlConfig& cfg,
                           int position) {
  const auto& table = model.table();
  const int h = table.dim();
  const auto x_n = state.embedding().segment(position * h, h);
  const auto g_n = gradient.segment(position * h, h);
  Vector logits(table.size());
  for (int v = 0; v < table.size(); ++v) {
    if (v == state.token(position)) {
      logits[v] = kNegInf;
      continue;
    }
    const Vector d = table.vector(v) - x_n;
    logits[v] = -g_n.dot(d) - p_norm_pow(d, cfg.p) / cfg.alpha;
  }
  return logits;
}

Candidate gwl_propose(const EnergyModel& model, const EvaluatedState& current,
                      const GwlConfig& cfg, int position, Rng& rng) {
  if (model.table().size() < 2) {
    throw ContractError("GwL has no legal move with a single token");
  }
  if (position < 0 || position >= model.length()) {
    throw ContractError("GwL position out of range");
  }
  double lp = 0.0;
  const int tok = sample_logits(
      gwl_position_logits(model, current.state, current.gradient, cfg, position),
      rng, &lp);
  SequenceState next = current.state;
  next.set_token(model.table(), position, tok);
  if (cfg.scan == Scan::random) lp -= std::log(double(model.length()));
  return {std::move(next), lp, 1};
}

double gwl_log_q(const EnergyModel& model, const EvaluatedState& from,
                 const SequenceState& to, const GwlConfig& cfg) {
  check_pair(model, from.state, to);
  int position = -1;
  for (int n = 0; n < model.length(); ++n) {
    if (from.state.token(n) != to.token(n)) {
      if (position >= 0) return kNegInf;
      position = n;
    }
  }
  if (position < 0) return kNegInf;
  const Vector lp = log_softmax(
      gwl_position_logits(model, from.state, from.gradient, cfg, position));
  double log_q = lp[to.token(position)];
  if (cfg.scan == Scan::random) log_q -= std::log(double(model.length()));
  return log_q;
}

double gwl_log_q(const EnergyModel& model, const SequenceState& from,
                 const SequenceState& to, const GwlConfig& cfg) {
  return gwl_log_q(model, evaluate(model, from), to, cfg);
}

// ---- Random-walk Metropolis ------------------------------------------------

Candidate rwm_propose(const EmbeddingTable& table, const SequenceState& state,
                      Rng& rng) {
  const int k = table.size();
  if (k < 2) throw ContractError("RWM has no legal move with a single token");
  const int n = std::uniform_int_distribution<int>(0, state.length() - 1)(rng);
  const int r = std::uniform_int_distribution<int>(0, k - 2)(rng);
  const int tok = r < state.token(n) ? r : r + 1;
  SequenceState next = state;
  next.set_token(table, n, tok);
  return {std::move(next),
          -std::log(double(state.length())) - std::log(double(k - 1)), 1};
}

double rwm_log_q(const EmbeddingTable& table, const SequenceState& from,
                 const SequenceState& to) {
  if (from.hamming(to) != 1) return kNegInf;
  return -std::log(double(from.length())) - std::log(double(table.size() - 1));
}

// ---- Proposals -------------------------------------------------------------

PncgProposal::PncgProposal(const EnergyModel& model, PncgConfig cfg)
    : model_(model), cfg_(cfg) {
  validate(cfg_);
}

Candidate PncgProposal::propose(const EvaluatedState& current, Rng& rng) const {
  return pncg_propose(model_, current, cfg_, rng);
}

double PncgProposal::log_q(const EvaluatedState& from,
                           const SequenceState& to) const {
  return pncg_log_q(model_, from, to, cfg_);
}

GwlProposal::GwlProposal(const EnergyModel& model, GwlConfig cfg)
    : model_(model), cfg_(cfg) {
  validate(cfg_);
  cfg_.scan = Scan::random;
}

Candidate GwlProposal::propose(const EvaluatedState& current, Rng& rng) const {
  const int n =
      std::uniform_int_distribution<int>(0, model_.length() - 1)(rng);
  return gwl_propose(model_, current, cfg_, n, rng);
}

double GwlProposal::log_q(const EvaluatedState& from,
                          const SequenceState& to) const {
  return gwl_log_q(model_, from, to, cfg_);
}

Candidate RwmProposal::propose(const EvaluatedState& current, Rng& rng) const {
  return rwm_propose(model_.table(), current.state, rng);
}

double RwmProposal::log_q(const EvaluatedState& from,
                          const SequenceState& to) const {
  return rwm_log_q(model_.table(), from.state, to);
}

// ---- Metropolis-Hastings ---------------------------------------------------

MhDecision mh_decide(double energy_current, double energy_candidate,
                     double log_q_forward, double log_q_reverse, Rng& rng) {
  MhDecision d;
  if (!std::isfinite(energy_candidate)) {
    d.nonfinite = true;
    d.log_ratio = kNegInf;
    return d;
  }
  d.log_ratio =
      (energy_current - energy_candidate) + (log_q_reverse - log_q_forward);
  if (std::isnan(d.log_ratio)) {
    d.nonfinite = true;
    return d;
  }
  if (d.log_ratio >= 0.0) {
    d.accepted = true;
    return d;
  }
  d.accepted = std::log(uniform01(rng)) < d.log_ratio;
  return d;
}

std::pair<EvaluatedState, StepRecord> mh_step(const EnergyModel& model,
                                              const Proposal& proposal,
                                              const EvaluatedState& current,
                                              Rng& rng) {
  Candidate cand = proposal.propose(current, rng);
  EvaluatedState next = evaluate(model, std::move(cand.state));
  double log_q_reverse = kNegInf;
  if (std::isfinite(next.energy)) {
    log_q_reverse = proposal.log_q(next, current.state);
  }
  const MhDecision d = mh_decide(current.energy, next.energy,
                                 cand.log_q_forward, log_q_reverse, rng);
  StepRecord rec;
  rec.accepted = d.accepted;
  rec.log_ratio = d.log_ratio;
  rec.nonfinite = d.nonfinite;
  rec.changes = cand.changes;
  if (d.accepted) {
    rec.energy = next.energy;
    return {std::move(next), rec};
  }
  rec.energy = current.energy;
  return {current, rec};
}

std::pair<SequenceState, StepRecord> mh_step(const EnergyModel& model,
                                             const Proposal& proposal,
                                             const SequenceState& current,
                                             Rng& rng) {
  auto [next, rec] = mh_step(model, proposal, evaluate(model, current), rng);
  return {std::move(next.state), rec};
}

// ---- MUCOLA ----------------------------------------------------------------

SequenceState mucola_step(const EnergyModel& model, const EvaluatedState& current,
                          const MucolaConfig& cfg, Rng& rng) {
  const auto& table = model.table();
  const int h = table.dim();
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector y = current.state.embedding() - 0.5 * cfg.alpha * current.gradient;
  const double scale = std::sqrt(cfg.alpha);
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += scale * normal(rng);
  std::vector<int> tokens(model.length());
  for (int n = 0; n < model.length(); ++n) {
    tokens[n] = table.nearest(y.segment(n * h, h));
  }
  return SequenceState(table, std::move(tokens));
}

SequenceState mucola_step(const EnergyModel& model, const SequenceState& current,
                          const MucolaConfig& cfg, Rng& rng) {
  return mucola_step(model, evaluate(model, current), cfg, rng);
}

}  // namespace fgs
