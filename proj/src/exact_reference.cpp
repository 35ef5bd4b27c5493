#include "fgs/errors.hpp"
#include "fgs/exact.hpp"

#include <cmath>

namespace fgs::reference {

TransitionMatrix build_transition_matrix(const KernelSpec& spec,
                                         const EnergyModel& model,
                                         const StateSpace& space) {
  if (spec.kind == KernelKind::mucola || spec.kind == KernelKind::hybrid) {
    throw UnsupportedError("reference builder covers pncg, gwl and rwm only");
  }
  const long long s = space.size();

  auto log_q = [&](const SequenceState& from, const SequenceState& to) {
    switch (spec.kind) {
      case KernelKind::pncg: return pncg_log_q(model, from, to, spec.pncg());
      case KernelKind::gwl: return gwl_log_q(model, from, to, spec.gwl());
      default: return rwm_log_q(model.table(), from, to);
    }
  };

  TransitionMatrix p = TransitionMatrix::Zero(s, s);
  for (long long i = 0; i < s; ++i) {
    const SequenceState x = space.state(i);
    const double ux = energy_eval(model, x);
    double off = 0.0;
    for (long long j = 0; j < s; ++j) {
      if (j == i) continue;
      const SequenceState y = space.state(j);
      const double forward = std::exp(log_q(x, y));
      if (forward == 0.0) continue;
      double accept = 1.0;
      if (spec.adjusted) {
        const double uy = energy_eval(model, y);
        const double ratio = std::exp(-uy + ux) * std::exp(log_q(y, x)) / forward;
        accept = std::min(1.0, ratio);
      }
      p(i, j) = forward * accept;
      off += p(i, j);
    }
    p(i, i) = spec.adjusted ? 1.0 - off : std::exp(log_q(x, x));
  }
  return p;
}

TransitionMatrix multiply(const TransitionMatrix& a, const TransitionMatrix& b) {
  TransitionMatrix c(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      double sum = 0.0;
      for (Eigen::Index k = 0; k < a.cols(); ++k) sum += a(i, k) * b(k, j);
      c(i, j) = sum;
    }
  }
  return c;
}

MixingTime exact_mixing_time(const TransitionMatrix& p,
                             const DistributionVector& pi, double epsilon,
                             long long cap) {
  TransitionMatrix current = p;
  for (long long t = 1; t <= cap; ++t) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      double tv = 0.0;
      for (Eigen::Index j = 0; j < p.cols(); ++j) {
        tv += std::abs(current(i, j) - pi[j]);
      }
      worst = std::max(worst, 0.5 * tv);
    }
    if (worst <= epsilon) return {t, false};
    if (t < cap) current = multiply(current, p);
  }
  return {cap, true};
}

}  // namespace fgs::reference
