#include "fgs/diagnostics.hpp"

#include "fgs/errors.hpp"

#include <algorithm>
#include <cmath>

namespace fgs {

void EmpiricalDistribution::merge(const EmpiricalDistribution& other) {
  if (other.counts_.size() != counts_.size()) {
    throw ContractError("cannot merge distributions over different spaces");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  total_ += other.total_;
}

DistributionVector EmpiricalDistribution::normalized() const {
  if (total_ == 0) throw ContractError("empirical distribution is empty");
  DistributionVector v(static_cast<Eigen::Index>(counts_.size()));
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = double(counts_[i]) / double(total_);
  }
  return v;
}

namespace {

void require_states(const ChainTrace& trace, const StateSpace& space) {
  if (trace.length != space.length()) {
    throw ContractError("trace length does not match the state space");
  }
  if (trace.tokens.size() != trace.records.size() * trace.length) {
    throw ContractError("trace does not carry per-step states");
  }
}

}  // namespace

DistributionVector empirical_distribution(const ChainTrace& trace,
                                          const StateSpace& space,
                                          long long burn_in) {
  require_states(trace, space);
  const auto n = static_cast<long long>(trace.records.size());
  if (burn_in < 0 || burn_in >= n) {
    throw ContractError("no records left after burn-in");
  }
  EmpiricalDistribution acc(space.size());
  for (long long t = burn_in; t < n; ++t) acc.add(space.index_of(trace.tokens_at(t)));
  return acc.normalized();
}

std::vector<TvPoint> tv_curve(const ChainTrace& trace, const StateSpace& space,
                              const DistributionVector& exact_pi,
                              std::span<const long long> checkpoints) {
  require_states(trace, space);
  if (exact_pi.size() != space.size()) {
    throw ContractError("target length does not match the state space");
  }
  std::vector<TvPoint> curve;
  EmpiricalDistribution acc(space.size());
  long long done = 0;
  long long prev = 0;
  const auto n = static_cast<long long>(trace.records.size());
  for (long long c : checkpoints) {
    if (c <= prev) throw ContractError("checkpoints must be strictly increasing");
    if (c > n) break;
    for (; done < c; ++done) acc.add(space.index_of(trace.tokens_at(done)));
    curve.push_back({c, tv_distance(acc.normalized(), exact_pi)});
    prev = c;
  }
  return curve;
}

std::vector<long long> log_checkpoints(long long steps) {
  std::vector<long long> out;
  for (long long decade = 1; decade <= steps; decade *= 10) {
    for (long long m : {1, 2, 5}) {
      if (decade * m <= steps) out.push_back(decade * m);
    }
    if (decade > steps / 10) break;
  }
  if (out.empty() || out.back() != steps) out.push_back(steps);
  return out;
}

void EnergyTrace::push(double energy) {
  energies_.push_back(energy);
  sum_ += energy;
  running_mean_.push_back(sum_ / double(energies_.size()));
}

EnergyTrace energy_trace(const ChainTrace& trace) {
  EnergyTrace out;
  for (const auto& r : trace.records) out.push(r.energy);
  return out;
}

EnergySummary energy_summary(std::span<const double> energies,
                             long long burn_in, int batches) {
  const auto n = static_cast<long long>(energies.size());
  if (burn_in < 0 || burn_in >= n) {
    throw ContractError("no records left after burn-in");
  }
  const auto kept = energies.subspan(static_cast<std::size_t>(burn_in));
  EnergySummary s;
  s.count = static_cast<long long>(kept.size());
  double sum = 0.0;
  for (double e : kept) sum += e;
  s.mean = sum / double(s.count);
  double sq = 0.0;
  for (double e : kept) sq += (e - s.mean) * (e - s.mean);
  s.variance = s.count > 1 ? sq / double(s.count - 1) : 0.0;

  const long long b = std::min<long long>(batches, s.count);
  const long long size = s.count / b;
  if (b >= 2 && size >= 1) {
    std::vector<double> means(static_cast<std::size_t>(b), 0.0);
    for (long long k = 0; k < b; ++k) {
      double m = 0.0;
      for (long long i = k * size; i < (k + 1) * size; ++i) m += kept[i];
      means[k] = m / double(size);
    }
    double grand = 0.0;
    for (double m : means) grand += m;
    grand /= double(b);
    double var = 0.0;
    for (double m : means) var += (m - grand) * (m - grand);
    var /= double(b - 1);
    s.standard_error = std::sqrt(var / double(b));
  }
  return s;
}

EnergySummary energy_summary(const ChainTrace& trace, long long burn_in,
                             int batches) {
  std::vector<double> e;
  e.reserve(trace.records.size());
  for (const auto& r : trace.records) e.push_back(r.energy);
  return energy_summary(e, burn_in, batches);
}

long long default_burn_in(long long steps) { return steps / 10; }

double AcceptanceStats::windowed_rate(long long window) const {
  if (window <= 0 || accepted_.empty()) return 0.0;
  const auto n = static_cast<long long>(accepted_.size());
  const long long from = std::max<long long>(0, n - window);
  long long acc = 0;
  for (long long i = from; i < n; ++i) acc += accepted_[i];
  return double(acc) / double(n - from);
}

void AcceptanceStats::merge(const AcceptanceStats& other) {
  proposals += other.proposals;
  acceptances += other.acceptances;
  changes.insert(changes.end(), other.changes.begin(), other.changes.end());
  accepted_.insert(accepted_.end(), other.accepted_.begin(),
                   other.accepted_.end());
}

AcceptanceStats acceptance_stats(const ChainTrace& trace) {
  AcceptanceStats s;
  for (const auto& r : trace.records) {
    ++s.proposals;
    s.acceptances += r.accepted;
    s.changes.push_back(r.changes);
    s.accepted_.push_back(r.accepted);
  }
  return s;
}

}  // namespace fgs
