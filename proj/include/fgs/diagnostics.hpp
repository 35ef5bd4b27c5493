#pragma once

#include "fgs/chain.hpp"
#include "fgs/exact.hpp"

#include <span>
#include <utility>
#include <vector>

namespace fgs {

// Visit counts over an enumerated state space. merge() is associative and
// commutative, so per-chain accumulators can be combined in any order.
class EmpiricalDistribution {
 public:
  explicit EmpiricalDistribution(long long states) : counts_(states, 0) {}

  void add(long long state_index) {
    ++counts_.at(static_cast<std::size_t>(state_index));
    ++total_;
  }
  void merge(const EmpiricalDistribution& other);

  long long total() const { return total_; }
  const std::vector<long long>& counts() const { return counts_; }
  DistributionVector normalized() const;

 private:
  std::vector<long long> counts_;
  long long total_ = 0;
};

// Frequencies of the states visited after `burn_in` records. Needs a trace
// with kept states.
DistributionVector empirical_distribution(const ChainTrace& trace,
                                          const StateSpace& space,
                                          long long burn_in);

struct TvPoint {
  long long step = 0;
  double tv = 0.0;
};

// TV between the running empirical distribution of records 1..c and
// `exact_pi`, for each checkpoint c. Accumulates from step 1 (no burn-in).
std::vector<TvPoint> tv_curve(const ChainTrace& trace, const StateSpace& space,
                              const DistributionVector& exact_pi,
                              std::span<const long long> checkpoints);

// Checkpoints 1, 2, 5, 10, 20, 50, ... up to and including `steps`.
std::vector<long long> log_checkpoints(long long steps);

class EnergyTrace {
 public:
  void push(double energy);
  const std::vector<double>& energies() const { return energies_; }
  const std::vector<double>& running_mean() const { return running_mean_; }

 private:
  std::vector<double> energies_;
  std::vector<double> running_mean_;
  double sum_ = 0.0;
};

EnergyTrace energy_trace(const ChainTrace& trace);

struct EnergySummary {
  long long count = 0;
  double mean = 0.0;
  double variance = 0.0;
  // Batch-means standard error of the mean, so autocorrelation is counted.
  double standard_error = 0.0;
};

EnergySummary energy_summary(std::span<const double> energies,
                             long long burn_in, int batches = 50);
EnergySummary energy_summary(const ChainTrace& trace, long long burn_in,
                             int batches = 50);

// Default burn-in: the first 10% of the steps.
long long default_burn_in(long long steps);

struct AcceptanceStats {
  long long proposals = 0;
  long long acceptances = 0;
  std::vector<int> changes;

  double rate() const {
    return proposals == 0 ? 0.0 : double(acceptances) / double(proposals);
  }
  // Acceptance rate over the last `window` proposals.
  double windowed_rate(long long window) const;
  void merge(const AcceptanceStats& other);

 private:
  friend AcceptanceStats acceptance_stats(const ChainTrace& trace);
  std::vector<char> accepted_;
};

AcceptanceStats acceptance_stats(const ChainTrace& trace);

}  // namespace fgs
