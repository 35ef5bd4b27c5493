#include "fgs/exact.hpp"

#include "fgs/errors.hpp"

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace fgs {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const Vector& v) {
  const double m = v.maxCoeff();
  if (m == kNegInf) return kNegInf;
  return m + std::log((v.array() - m).exp().sum());
}

// P(Z <= z) for standard normal Z.
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

void check_square(const TransitionMatrix& p) {
  if (p.rows() != p.cols() || p.rows() == 0) {
    throw ContractError("transition matrix must be square and non-empty");
  }
}

void check_pair(const TransitionMatrix& p, const DistributionVector& pi) {
  check_square(p);
  if (pi.size() != p.rows()) {
    throw ContractError("distribution length does not match matrix size");
  }
}

// Shortest representation that round-trips.
std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Vector energies(const EnergyModel& model, const StateSpace& space) {
  const long long s = space.size();
  Vector u(s);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < s; ++i) {
    u[i] = model.energy_at(space.state(i).embedding());
  }
  return u;
}

// Position strides of the lexicographic index: stride[n] = K^(N-1-n).
std::vector<long long> strides(const StateSpace& space) {
  std::vector<long long> st(space.length());
  long long s = 1;
  for (int n = space.length() - 1; n >= 0; --n) {
    st[n] = s;
    s *= space.table().size();
  }
  return st;
}

void check_model_space(const EnergyModel& model, const StateSpace& space) {
  if (model.length() != space.length() || !(model.table() == space.table())) {
    throw ContractError("state space does not match the model");
  }
}

}  // namespace

// ---- StateSpace ------------------------------------------------------------

StateSpace::StateSpace(EmbeddingTable table, int length, long long cap)
    : table_(std::move(table)), length_(length) {
  if (length_ < 1) throw ContractError("sequence length must be >= 1");
  const double required = std::pow(double(table_.size()), double(length_));
  if (required > double(cap)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "state space of %d^%d = %.0f states exceeds the cap of %lld",
                  table_.size(), length_, required, cap);
    throw InfeasibleError(buf);
  }
  size_ = 1;
  for (int n = 0; n < length_; ++n) size_ *= table_.size();
}

std::vector<int> StateSpace::tokens(long long index) const {
  if (index < 0 || index >= size_) throw ContractError("state index out of range");
  std::vector<int> toks(length_);
  const int k = table_.size();
  for (int n = length_ - 1; n >= 0; --n) {
    toks[n] = static_cast<int>(index % k);
    index /= k;
  }
  return toks;
}

long long StateSpace::index_of(std::span<const int> tokens) const {
  if (static_cast<int>(tokens.size()) != length_) {
    throw ContractError("token sequence has the wrong length");
  }
  long long idx = 0;
  for (int t : tokens) {
    if (t < 0 || t >= table_.size()) throw ContractError("token out of range");
    idx = idx * table_.size() + t;
  }
  return idx;
}

SequenceState StateSpace::state(long long index) const {
  return SequenceState(table_, tokens(index));
}

std::string StateSpace::label(long long index) const {
  std::string out;
  for (int t : tokens(index)) {
    if (!out.empty()) out += '_';
    out += table_.label(t);
  }
  return out;
}

StateSpace enumerate_states(const EmbeddingTable& table, int length,
                            long long cap) {
  return StateSpace(table, length, cap);
}

DistributionVector exact_target(const EnergyModel& model,
                                const StateSpace& space) {
  check_model_space(model, space);
  const Vector log_w = -energies(model, space);
  return (log_w.array() - log_sum_exp(log_w)).exp().matrix();
}

// ---- Transition matrices ---------------------------------------------------

TransitionMatrix build_transition_matrix(const KernelSpec& spec,
                                         const EnergyModel& model,
                                         const StateSpace& space) {
  check_model_space(model, space);
  switch (spec.kind) {
    case KernelKind::hybrid:
      throw UnsupportedError(
          "the hybrid kernel switches on chain history and has no fixed "
          "transition matrix");
    case KernelKind::mucola:
      if (spec.adjusted) {
        throw InfeasibleError(
            "MH-corrected MUCOLA needs Gaussian masses of Voronoi cells");
      }
      return mucola_exact_matrix(model, space, spec.mucola());
    case KernelKind::gwl:
      if (spec.scan != Scan::random) {
        throw UnsupportedError(
            "systematic-scan GwL is time-inhomogeneous; only random scan has "
            "a transition matrix");
      }
      [[fallthrough]];
    default:
      break;
  }
  validate(spec.pncg());

  const long long s = space.size();
  const int n_pos = space.length();
  const int k = space.table().size();
  const auto stride = strides(space);
  const double log_n = std::log(double(n_pos));

  const Vector u = energies(model, space);
  TransitionMatrix log_q = TransitionMatrix::Constant(s, s, kNegInf);

#pragma omp parallel for schedule(static)
  for (long long x = 0; x < s; ++x) {
    const EvaluatedState from = evaluate(model, space.state(x));
    const auto& xt = from.state.tokens();
    if (spec.kind == KernelKind::pncg) {
      Matrix table(n_pos, k);
      for (int n = 0; n < n_pos; ++n) {
        table.row(n) = log_softmax(pncg_position_logits(
                                       model, from.state, from.gradient,
                                       spec.pncg(), n))
                           .transpose();
      }
      std::vector<int> yt(n_pos, 0);
      for (long long y = 0; y < s; ++y) {
        double lq = 0.0;
        for (int n = 0; n < n_pos; ++n) lq += table(n, yt[n]);
        log_q(x, y) = lq;
        for (int n = n_pos - 1; n >= 0; --n) {
          if (++yt[n] < k) break;
          yt[n] = 0;
        }
      }
    } else {
      for (int n = 0; n < n_pos; ++n) {
        Vector lp;
        if (spec.kind == KernelKind::gwl) {
          lp = log_softmax(gwl_position_logits(model, from.state,
                                               from.gradient, spec.gwl(), n));
        }
        for (int v = 0; v < k; ++v) {
          if (v == xt[n]) continue;
          const long long y = x + (v - xt[n]) * stride[n];
          log_q(x, y) = spec.kind == KernelKind::gwl
                            ? lp[v] - log_n
                            : -log_n - std::log(double(k - 1));
        }
      }
    }
  }

  TransitionMatrix p = TransitionMatrix::Zero(s, s);
#pragma omp parallel for schedule(static)
  for (long long x = 0; x < s; ++x) {
    double off = 0.0;
    for (long long y = 0; y < s; ++y) {
      if (y == x || log_q(x, y) == kNegInf) continue;
      double entry = std::exp(log_q(x, y));
      if (spec.adjusted) {
        const double r = (u[x] - u[y]) + (log_q(y, x) - log_q(x, y));
        if (r < 0.0) entry *= std::exp(r);
      }
      p(x, y) = entry;
      off += entry;
    }
    p(x, x) = spec.adjusted ? 1.0 - off : std::exp(log_q(x, x));
    if (!spec.adjusted && log_q(x, x) == kNegInf) p(x, x) = 0.0;
  }
  return p;
}

TransitionMatrix mucola_exact_matrix(const EnergyModel& model,
                                     const StateSpace& space,
                                     const MucolaConfig& cfg) {
  check_model_space(model, space);
  validate(cfg);
  const auto& table = space.table();
  if (table.size() != 2 || table.dim() != 1) {
    throw InfeasibleError(
        "exact MUCOLA transitions need K = 2 and h = 1; otherwise each entry "
        "is a Gaussian integral over a Voronoi polytope (got K = " +
        std::to_string(table.size()) + ", h = " + std::to_string(table.dim()) +
        ")");
  }
  const double v0 = table.vector(0)[0];
  const double v1 = table.vector(1)[0];
  const double mid = 0.5 * (v0 + v1);
  const int low = v0 < v1 ? 0 : 1;
  const double sd = std::sqrt(cfg.alpha);
  const long long s = space.size();
  const int n_pos = space.length();

  TransitionMatrix p(s, s);
#pragma omp parallel for schedule(static)
  for (long long x = 0; x < s; ++x) {
    const SequenceState from = space.state(x);
    const Vector mu =
        from.embedding() - 0.5 * cfg.alpha * model.gradient_at(from.embedding());
    Matrix prob(n_pos, 2);
    for (int n = 0; n < n_pos; ++n) {
      const double z = (mid - mu[n]) / sd;
      prob(n, low) = normal_cdf(z);
      prob(n, 1 - low) = normal_cdf(-z);
    }
    std::vector<int> yt(n_pos, 0);
    for (long long y = 0; y < s; ++y) {
      double entry = 1.0;
      for (int n = 0; n < n_pos; ++n) entry *= prob(n, yt[n]);
      p(x, y) = entry;
      for (int n = n_pos - 1; n >= 0; --n) {
        if (++yt[n] < 2) break;
        yt[n] = 0;
      }
    }
  }
  return p;
}

// ---- Stationary distributions ----------------------------------------------

bool is_primitive(const TransitionMatrix& p) {
  check_square(p);
  const long long s = p.rows();
  if ((p.array() > 0.0).all()) return true;
  const long long words = (s + 63) / 64;
  using Bits = std::vector<std::uint64_t>;
  std::vector<Bits> reach(s, Bits(words, 0));
  for (long long i = 0; i < s; ++i) {
    for (long long j = 0; j < s; ++j) {
      if (p(i, j) > 0.0) reach[i][j / 64] |= std::uint64_t{1} << (j % 64);
    }
  }
  // Wielandt: a primitive S x S matrix has P^m > 0 for all m >= (S-1)^2 + 1.
  const double wielandt = double(s - 1) * double(s - 1) + 1.0;
  const std::uint64_t tail =
      s % 64 == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << (s % 64)) - 1;
  auto all_set = [&](const std::vector<Bits>& m) {
    for (const auto& row : m) {
      for (long long w = 0; w + 1 < words; ++w) {
        if (row[w] != ~std::uint64_t{0}) return false;
      }
      if ((row[words - 1] & tail) != tail) return false;
    }
    return true;
  };
  for (double power = 1.0;; power *= 2.0) {
    if (all_set(reach)) return true;
    if (power >= wielandt) return false;
    std::vector<Bits> next(s, Bits(words, 0));
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < s; ++i) {
      for (long long j = 0; j < s; ++j) {
        if (reach[i][j / 64] >> (j % 64) & 1) {
          for (long long w = 0; w < words; ++w) next[i][w] |= reach[j][w];
        }
      }
    }
    reach.swap(next);
  }
}

DistributionVector stationary_distribution(const TransitionMatrix& p) {
  check_square(p);
  if (!is_primitive(p)) {
    throw NoUniqueStationaryError(
        "chain is reducible or periodic: no power of P is entrywise positive");
  }
  // Grassmann-Taksar-Heyman elimination on (P^T - I) v = 0, sum(v) = 1. Only
  // off-diagonal entries are read, so nearly-absorbing rows whose diagonal
  // rounds to 1 keep their exact out-flow rates.
  const Eigen::Index s = p.rows();
  Matrix a = p;
  for (Eigen::Index n = s - 1; n >= 1; --n) {
    const double out = a.row(n).head(n).sum();
    if (!(out > 0.0)) {
      throw NoUniqueStationaryError("stationary solve: state " +
                                    std::to_string(n) +
                                    " has no path to lower states");
    }
    a.col(n).head(n) /= out;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double f = a(i, n);
      if (f != 0.0) a.row(i).head(n) += f * a.row(n).head(n);
    }
  }
  Vector v(s);
  v[0] = 1.0;
  for (Eigen::Index n = 1; n < s; ++n) {
    v[n] = v.head(n).dot(a.col(n).head(n));
  }
  v /= v.sum();
  const double residual = stationarity_residual(p, v);
  if (!(residual < 1e-10)) {
    throw NoUniqueStationaryError("stationary solve residual " +
                                  format_double(residual) + " exceeds 1e-10");
  }
  return v;
}

DistributionVector stationary_distribution_eigen(const TransitionMatrix& p) {
  check_square(p);
  Eigen::EigenSolver<Matrix> es(Matrix(p.transpose()));
  const auto& ev = es.eigenvalues();
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < ev.size(); ++i) {
    if (std::abs(ev[i] - 1.0) < std::abs(ev[best] - 1.0)) best = i;
  }
  Vector v = es.eigenvectors().col(best).real();
  return v / v.sum();
}

double tv_distance(const DistributionVector& mu, const DistributionVector& nu) {
  if (mu.size() != nu.size()) {
    throw ContractError("tv_distance: length mismatch (" +
                        std::to_string(mu.size()) + " vs " +
                        std::to_string(nu.size()) + ")");
  }
  return 0.5 * (mu - nu).cwiseAbs().sum();
}

DistributionVector pi_alpha(const EnergyModel& model, const StateSpace& space,
                            const PncgConfig& cfg) {
  check_model_space(model, space);
  validate(cfg);
  const auto hessian = model.constant_hessian();
  if (!hessian) {
    throw UnsupportedError(
        "pi_alpha has a closed form only for quadratic energies");
  }
  const long long s = space.size();
  const Vector u = energies(model, space);
  Matrix x(model.dim(), s);
  for (long long i = 0; i < s; ++i) x.col(i) = space.state(i).embedding();

  Vector log_w(s);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < s; ++i) {
    Vector terms(s);
    for (long long j = 0; j < s; ++j) {
      const Vector d = x.col(j) - x.col(i);
      terms[j] = -0.5 * (u[j] - u[i]) + 0.25 * d.dot(*hessian * d) -
                 p_norm_pow(d, cfg.p) / (2.0 * cfg.alpha);
    }
    log_w[i] = log_sum_exp(terms) - u[i];
  }
  return (log_w.array() - log_sum_exp(log_w)).exp().matrix();
}

double detailed_balance_residual(const TransitionMatrix& p,
                                 const DistributionVector& pi) {
  check_pair(p, pi);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < p.cols(); ++j) {
      worst = std::max(worst, std::abs(pi[i] * p(i, j) - pi[j] * p(j, i)));
    }
  }
  return worst;
}

double stationarity_residual(const TransitionMatrix& p,
                             const DistributionVector& pi) {
  check_pair(p, pi);
  return (p.transpose() * pi - pi).cwiseAbs().maxCoeff();
}

// ---- Spectra ---------------------------------------------------------------

SpectralGap spectral_gap(const TransitionMatrix& p,
                         const DistributionVector& pi) {
  check_pair(p, pi);
  const Eigen::Index s = p.rows();
  double worst = 0.0;
  Eigen::Index wi = 0, wj = 0;
  for (Eigen::Index i = 0; i < s; ++i) {
    for (Eigen::Index j = i + 1; j < s; ++j) {
      const double r = std::abs(pi[i] * p(i, j) - pi[j] * p(j, i));
      if (r > worst) {
        worst = r;
        wi = i;
        wj = j;
      }
    }
  }
  if (worst > 1e-10) {
    throw NotReversibleError("chain is not reversible: detailed balance "
                             "fails by " + format_double(worst) +
                                 " between states " + std::to_string(wi) +
                                 " and " + std::to_string(wj),
                             wi, wj, worst);
  }
  if ((pi.array() <= 0.0).any()) {
    throw ContractError("spectral_gap needs a strictly positive distribution");
  }
  const Vector root = pi.cwiseSqrt();
  Matrix sym = root.asDiagonal() * Matrix(p) * root.cwiseInverse().asDiagonal();
  sym = (0.5 * (sym + sym.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();

  SpectralGap out;
  out.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  out.lambda2 = s >= 2 ? ev[s - 2] : 0.0;
  out.gamma = 1.0 - out.lambda2;
  out.absolute_gap =
      1.0 - std::max(std::abs(out.lambda2), s >= 2 ? std::abs(ev[0]) : 0.0);
  return out;
}

GershgorinReport gershgorin_check(const TransitionMatrix& p, double tolerance) {
  check_square(p);
  GershgorinReport out;
  const Eigen::Index s = p.rows();
  for (Eigen::Index i = 0; i < s; ++i) {
    out.discs.emplace_back(p(i, i), p.row(i).cwiseAbs().sum() - std::abs(p(i, i)));
  }
  Eigen::EigenSolver<Matrix> es(Matrix(p), false);
  const auto& ev = es.eigenvalues();
  out.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  out.contained = std::all_of(
      out.eigenvalues.begin(), out.eigenvalues.end(),
      [&](std::complex<double> z) {
        return std::any_of(out.discs.begin(), out.discs.end(), [&](auto d) {
          return std::abs(z - d.first) <= d.second + tolerance;
        });
      });
  return out;
}

// ---- Mixing times ----------------------------------------------------------

TransitionMatrix multiply(const TransitionMatrix& a, const TransitionMatrix& b) {
  if (a.cols() != b.rows()) throw ContractError("multiply: shape mismatch");
  TransitionMatrix c = TransitionMatrix::Zero(a.rows(), b.cols());
  const Eigen::Index rows = a.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik != 0.0) c.row(i) += aik * b.row(k);
    }
  }
  return c;
}

double worst_start_tv(const TransitionMatrix& p, const DistributionVector& pi) {
  check_pair(p, pi);
  std::vector<double> row_tv(p.rows());
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    row_tv[i] = 0.5 * (p.row(i).transpose() - pi).cwiseAbs().sum();
  }
  return *std::max_element(row_tv.begin(), row_tv.end());
}

MixingTime exact_mixing_time(const TransitionMatrix& p,
                             const DistributionVector& pi, double epsilon,
                             long long cap) {
  check_pair(p, pi);
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ContractError("epsilon must lie in (0, 1)");
  }
  if (cap < 1) throw ContractError("step cap must be >= 1");
  if (worst_start_tv(p, pi) <= epsilon) return {1, false};

  // powers[j] = P^(2^j); invariant: d(2^(last)) > epsilon until the loop ends.
  std::vector<TransitionMatrix> powers{p};
  long long span = 1;
  while (true) {
    if (span >= cap) return {cap, true};
    powers.push_back(multiply(powers.back(), powers.back()));
    span *= 2;
    if (worst_start_tv(powers.back(), pi) <= epsilon) break;
  }
  // d(span/2) > epsilon >= d(span): lift from span/2.
  const int top = static_cast<int>(powers.size()) - 1;
  TransitionMatrix current = powers[top - 1];
  long long t = span / 2;
  for (int j = top - 2; j >= 0; --j) {
    TransitionMatrix trial = multiply(current, powers[j]);
    if (worst_start_tv(trial, pi) > epsilon) {
      current = std::move(trial);
      t += 1LL << j;
    }
  }
  if (t + 1 > cap) return {cap, true};
  return {t + 1, false};
}

double min_pairwise_pnorm(const StateSpace& space, double q) {
  const auto& table = space.table();
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < table.size(); ++a) {
    for (int b = a + 1; b < table.size(); ++b) {
      best = std::min(best, p_norm_pow(table.vector(a) - table.vector(b), q));
    }
  }
  return best;
}

MixingReport mixing_time_lower_bound(const EnergyModel& model,
                                     const StateSpace& space,
                                     const PncgConfig& cfg, double epsilon,
                                     long long cap) {
  check_model_space(model, space);
  validate(cfg);
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ContractError("epsilon must lie in (0, 1)");
  }
  const auto hessian = model.constant_hessian();
  if (!hessian) {
    throw UnsupportedError(
        "the mixing-time bound applies only to quadratic energies");
  }
  MixingReport r;
  r.epsilon = epsilon;
  r.alpha = cfg.alpha;
  r.p = cfg.p;

  // exp(x^T A x + b^T x) convention: A = -H/2.
  const Matrix a = -0.5 * *hessian;
  r.lambda_min = Eigen::SelfAdjointEigenSolver<Matrix>(a, Eigen::EigenvaluesOnly)
                     .eigenvalues()
                     .minCoeff();
  const Vector u = energies(model, space);
  r.z = (-(u.array() - u.maxCoeff())).exp().sum();
  r.d2 = min_pairwise_pnorm(space, 2.0);
  r.dp = min_pairwise_pnorm(space, cfg.p);
  r.c1 = 0.5 * std::exp(r.lambda_min * r.d2 / 2.0);
  r.c2 = r.dp;
  r.lower_bound = (r.c1 / r.z * std::exp(r.c2 / (2.0 * cfg.alpha)) - 1.0) *
                  std::log(1.0 / (2.0 * epsilon));

  KernelSpec spec;
  spec.kind = KernelKind::pncg;
  spec.adjusted = false;
  spec.alpha = cfg.alpha;
  spec.p = cfg.p;
  const TransitionMatrix p = build_transition_matrix(spec, model, space);
  const DistributionVector stationary = pi_alpha(model, space, cfg);
  const MixingTime t = exact_mixing_time(p, stationary, epsilon, cap);
  r.exact_t_mix = t.steps;
  r.t_mix_capped = t.capped;
  const SpectralGap gap = spectral_gap(p, stationary);
  r.gamma = gap.gamma;
  r.lambda2 = gap.lambda2;
  r.gershgorin_contained = gershgorin_check(p).contained;
  return r;
}

nlohmann::ordered_json mixing_report_json(const MixingReport& r) {
  nlohmann::ordered_json j;
  j["epsilon"] = r.epsilon;
  j["alpha"] = r.alpha;
  j["p"] = r.p;
  j["exact_t_mix"] = r.exact_t_mix;
  j["t_mix_capped"] = r.t_mix_capped;
  j["lower_bound"] = r.lower_bound;
  j["c1"] = r.c1;
  j["c2"] = r.c2;
  j["Z"] = r.z;
  j["lambda_min_A"] = r.lambda_min;
  j["d2"] = r.d2;
  j["dp"] = r.dp;
  j["spectral_gap"] = r.gamma;
  j["lambda2"] = r.lambda2;
  j["gershgorin_contained"] = r.gershgorin_contained;
  j["bound_holds"] = r.t_mix_capped || r.lower_bound <= double(r.exact_t_mix);
  return j;
}

void write_matrix_csv(std::ostream& out, const TransitionMatrix& p,
                      const StateSpace& space) {
  if (p.rows() != space.size()) {
    throw ContractError("matrix size does not match the state space");
  }
  out << "state";
  for (long long j = 0; j < space.size(); ++j) out << ',' << space.label(j);
  out << '\n';
  for (long long i = 0; i < space.size(); ++i) {
    out << space.label(i);
    for (long long j = 0; j < space.size(); ++j) {
      out << ',' << format_double(p(i, j));
    }
    out << '\n';
  }
}

void write_distributions_csv(
    std::ostream& out, const StateSpace& space,
    const std::vector<std::pair<std::string, DistributionVector>>& columns) {
  out << "state";
  for (const auto& [name, v] : columns) {
    if (v.size() != space.size()) {
      throw ContractError("distribution '" + name + "' has the wrong length");
    }
    out << ',' << name;
  }
  out << '\n';
  for (long long i = 0; i < space.size(); ++i) {
    out << space.label(i);
    for (const auto& [name, v] : columns) out << ',' << format_double(v[i]);
    out << '\n';
  }
}

}  // namespace fgs
