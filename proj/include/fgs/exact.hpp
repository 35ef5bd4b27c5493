#pragma once

#include "fgs/energy.hpp"
#include "fgs/samplers.hpp"

#include <json.hpp>

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fgs {

using TransitionMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using DistributionVector = Eigen::VectorXd;

inline constexpr long long kDefaultStateCap = 1'000'000;

// All K^N token sequences in lexicographic order (position 0 most
// significant).
class StateSpace {
 public:
  StateSpace(EmbeddingTable table, int length, long long cap = kDefaultStateCap);

  long long size() const { return size_; }
  int length() const { return length_; }
  const EmbeddingTable& table() const { return table_; }

  std::vector<int> tokens(long long index) const;
  long long index_of(std::span<const int> tokens) const;
  SequenceState state(long long index) const;
  // Token labels joined with '_', e.g. "-1_+1_+1".
  std::string label(long long index) const;

 private:
  EmbeddingTable table_;
  int length_;
  long long size_;
};

StateSpace enumerate_states(const EmbeddingTable& table, int length,
                            long long cap = kDefaultStateCap);

// pi(x) = exp(-U(x)) / Z over the enumeration, via log-sum-exp.
DistributionVector exact_target(const EnergyModel& model,
                                const StateSpace& space);

// Exact kernel matrix for p-NCG, random-scan GwL or RWM, with or without MH;
// unadjusted MUCOLA is forwarded to mucola_exact_matrix. Rows are built in
// parallel; every entry is computed by a single thread, so the result does
// not depend on the thread count.
TransitionMatrix build_transition_matrix(const KernelSpec& spec,
                                         const EnergyModel& model,
                                         const StateSpace& space);

// Requires K = 2 and h = 1, where each projection cell is a half-line and the
// Gaussian mass factorizes into univariate normal CDFs.
TransitionMatrix mucola_exact_matrix(const EnergyModel& model,
                                     const StateSpace& space,
                                     const MucolaConfig& cfg);

// Some power of P is entrywise positive.
bool is_primitive(const TransitionMatrix& p);

// Solves v^T P = v^T, sum(v) = 1 by elimination. Throws
// NoUniqueStationaryError for reducible or periodic chains.
DistributionVector stationary_distribution(const TransitionMatrix& p);
// Eigenvector of P^T for the eigenvalue closest to 1 (cross-check).
DistributionVector stationary_distribution_eigen(const TransitionMatrix& p);

double tv_distance(const DistributionVector& mu, const DistributionVector& nu);

// Closed-form reversing measure of unadjusted p-NCG on a quadratic energy:
// pi_alpha(x) ∝ Z_alpha(x) pi(x) with
// Z_alpha(x) = sum_y exp(-(U(y)-U(x))/2 + (y-x)^T H (y-x)/4
//                        - ||y-x||_p^p / (2 alpha)).
DistributionVector pi_alpha(const EnergyModel& model, const StateSpace& space,
                            const PncgConfig& cfg);

// max_{x,x'} |pi(x) P(x,x') - pi(x') P(x',x)|
double detailed_balance_residual(const TransitionMatrix& p,
                                 const DistributionVector& pi);
// ||pi^T P - pi^T||_inf
double stationarity_residual(const TransitionMatrix& p,
                             const DistributionVector& pi);

struct SpectralGap {
  double gamma = 0.0;    // 1 - lambda2
  double lambda2 = 0.0;  // second largest eigenvalue
  double absolute_gap = 0.0;  // 1 - max(|lambda| : lambda != lambda1)
  std::vector<double> eigenvalues;  // ascending
};

// Eigenvalues of D^{1/2} P D^{-1/2}, D = diag(pi). Throws NotReversibleError
// if detailed balance fails by more than 1e-10.
SpectralGap spectral_gap(const TransitionMatrix& p,
                         const DistributionVector& pi);

struct GershgorinReport {
  std::vector<std::pair<double, double>> discs;  // (center, radius)
  std::vector<std::complex<double>> eigenvalues;
  bool contained = false;
};

GershgorinReport gershgorin_check(const TransitionMatrix& p,
                                  double tolerance = 1e-8);

struct MixingTime {
  long long steps = 0;
  bool capped = false;  // true: t_mix >= steps, the cap
};

// Worst-start TV distance max_x TV(P(x, .), pi).
double worst_start_tv(const TransitionMatrix& p, const DistributionVector& pi);

// Smallest t with max_x TV(P^t(x, .), pi) <= epsilon. Uses repeated squaring
// to bracket t and binary lifting to pin it down; valid because the
// worst-start distance is non-increasing in t.
MixingTime exact_mixing_time(const TransitionMatrix& p,
                             const DistributionVector& pi, double epsilon,
                             long long cap = kDefaultStateCap);

// Row-parallel dense product.
TransitionMatrix multiply(const TransitionMatrix& a, const TransitionMatrix& b);

// Mixing-time lower bound for unadjusted p-NCG on a quadratic energy,
//   t_mix >= (c1/Z exp(c2/(2 alpha)) - 1) log(1/(2 eps)),
// alongside the exact t_mix, spectral gap and Gershgorin verdict of the
// unadjusted p-NCG matrix.
struct MixingReport {
  double epsilon = 0.25;
  double alpha = 1.0;
  double p = 2.0;
  long long exact_t_mix = 0;
  bool t_mix_capped = false;
  double lower_bound = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double z = 0.0;
  double lambda_min = 0.0;
  double d2 = 0.0;
  double dp = 0.0;
  double gamma = 0.0;
  double lambda2 = 0.0;
  bool gershgorin_contained = false;
};

MixingReport mixing_time_lower_bound(const EnergyModel& model,
                                     const StateSpace& space,
                                     const PncgConfig& cfg, double epsilon,
                                     long long cap = kDefaultStateCap);

// min over distinct embedded states of ||x - x'||_q^q. On a product space the
// minimum is attained by a single-position difference.
double min_pairwise_pnorm(const StateSpace& space, double q);

nlohmann::ordered_json mixing_report_json(const MixingReport& report);

// CSV with a header row of state labels, one matrix row per line.
void write_matrix_csv(std::ostream& out, const TransitionMatrix& p,
                      const StateSpace& space);
// One row per state: label, then one column per named distribution.
void write_distributions_csv(
    std::ostream& out, const StateSpace& space,
    const std::vector<std::pair<std::string, DistributionVector>>& columns);

// Straightforward single-threaded implementations used to test the parallel
// kernels above. They evaluate every entry from the public per-pair
// functions (pncg_log_q, gwl_log_q, rwm_log_q) and step the matrix power one
// multiplication at a time.
namespace reference {

TransitionMatrix build_transition_matrix(const KernelSpec& spec,
                                         const EnergyModel& model,
                                         const StateSpace& space);

TransitionMatrix multiply(const TransitionMatrix& a, const TransitionMatrix& b);

MixingTime exact_mixing_time(const TransitionMatrix& p,
                             const DistributionVector& pi, double epsilon,
                             long long cap);

}  // namespace reference

}  // namespace fgs
