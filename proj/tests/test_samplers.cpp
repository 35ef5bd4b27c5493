#include "fgs/errors.hpp"
#include "fgs/samplers.hpp"

#include "toy.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace fgs;

namespace {

// Linear energy U(x) = -beta b^T x, so the gradient is the constant -beta b.
LogQuadraticEnergy linear(const EmbeddingTable& table, int n, Vector b,
                          double beta = 1.0) {
  const int d = n * table.dim();
  return LogQuadraticEnergy(table, n, Matrix::Zero(d, d), std::move(b), beta);
}

LogQuadraticEnergy flat(const EmbeddingTable& table, int n) {
  return linear(table, n, Vector::Zero(n * table.dim()));
}

double binomial_sd(double p, long long n) { return std::sqrt(p * (1 - p) / n); }

}  // namespace

TEST_CASE("p-NCG position logits") {
  const auto spins = EmbeddingTable::binary_spins();
  const auto z = flat(spins, 1);
  const SequenceState minus(spins, {0});

  const Vector l0 = pncg_position_logits(z, minus, PncgConfig{1.0, 2.0}, 0);
  CHECK(l0[0] == 0.0);
  CHECK(l0[1] == doctest::Approx(-2.0).epsilon(1e-15));

  // Gradient -0.84 at the current position.
  const Vector g = Vector::Constant(1, -0.84);
  const Vector l1 = pncg_position_logits(z, minus, g, PncgConfig{1.0, 2.0}, 0);
  CHECK(l1[1] == doctest::Approx(-1.16).epsilon(1e-14));
}

TEST_CASE("p-NCG proposal log-probability") {
  const auto spins = EmbeddingTable::binary_spins();
  const auto z1 = flat(spins, 1);
  const SequenceState s(spins, {1});
  CHECK(pncg_log_q(z1, s, s, PncgConfig{1.0, 2.0}) ==
        doctest::Approx(toy::oracle::pncg_log_stay_zero_grad).epsilon(1e-14));

  // Uniform logits: at x_n = -1 a gradient of -2 cancels the flip penalty.
  const int n = 4;
  const auto m = linear(spins, n, Vector::Constant(n, 2.0));
  const SequenceState all_minus(spins, std::vector<int>(n, 0));
  const SequenceState other(spins, {1, 0, 1, 1});
  CHECK(pncg_log_q(m, all_minus, other, PncgConfig{1.0, 2.0}) ==
        doctest::Approx(-n * std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("p-NCG joint log q is the sum of per-position log-softmaxes") {
  const auto m = toy::ring(5);
  const auto& t = m->table();
  const PncgConfig cfg{0.7, 2.0};
  const SequenceState from(t, {0, 1, 1, 0, 1});
  const SequenceState to(t, {1, 1, 0, 0, 1});
  const EvaluatedState ev = evaluate(*m, from);
  double sum = 0.0;
  for (int n = 0; n < 5; ++n) {
    sum += log_softmax(pncg_position_logits(*m, from, ev.gradient, cfg, n))[to.token(n)];
  }
  CHECK(std::abs(pncg_log_q(*m, ev, to, cfg) - sum) < 1e-12);
}

TEST_CASE("p-NCG proposal frequencies") {
  const auto spins = EmbeddingTable::binary_spins();
  const int n = 5;
  const auto z = flat(spins, n);
  const EvaluatedState cur = evaluate(z, SequenceState(spins, {0, 1, 0, 1, 1}));
  Rng rng(11);
  const long long draws = 200000;
  long long flips = 0;
  for (long long i = 0; i < draws; ++i) {
    const Candidate c = pncg_propose(z, cur, PncgConfig{1.0, 2.0}, rng);
    flips += c.changes;
    CHECK_FALSE(c.changes > n);
  }
  const double rate = double(flips) / double(draws * n);
  CHECK(std::abs(rate - toy::oracle::pncg_flip_zero_grad) <
        4 * binomial_sd(toy::oracle::pncg_flip_zero_grad, draws * n));

  // Equal logits: each position flips with probability 1/2.
  const auto m = linear(spins, n, Vector::Constant(n, 2.0));
  const EvaluatedState low = evaluate(m, SequenceState(spins, std::vector<int>(n, 0)));
  flips = 0;
  for (long long i = 0; i < draws; ++i) {
    flips += pncg_propose(m, low, PncgConfig{1.0, 2.0}, rng).changes;
  }
  CHECK(std::abs(double(flips) / double(draws * n) - 0.5) <
        4 * binomial_sd(0.5, draws * n));
}

TEST_CASE("p-NCG at tiny alpha stays put") {
  const auto m = toy::ring(5);
  Rng rng(3);
  const EvaluatedState cur = evaluate(*m, SequenceState(m->table(), {0, 1, 0, 1, 0}));
  for (int i = 0; i < 1000; ++i) {
    CHECK(pncg_propose(*m, cur, PncgConfig{1e-3, 2.0}, rng).changes == 0);
  }
}

TEST_CASE("GwL logits and proposals") {
  const auto spins = EmbeddingTable::binary_spins();
  const auto z = flat(spins, 1);
  const SequenceState minus(spins, {0});
  const Vector g = Vector::Constant(1, -0.84);
  const Vector l = gwl_position_logits(z, minus, g, GwlConfig{1.0, 2.0}, 0);
  CHECK(l[1] == doctest::Approx(-2.32).epsilon(1e-14));
  CHECK(std::isinf(l[0]));
  CHECK(l[0] < 0);

  // K = 2: the only non-self move is the flip.
  const auto m = toy::ring(5);
  Rng rng(5);
  const EvaluatedState cur = evaluate(*m, SequenceState(m->table(), {0, 1, 0, 1, 0}));
  for (int pos = 0; pos < 5; ++pos) {
    const Candidate c = gwl_propose(*m, cur, GwlConfig{}, pos, rng);
    CHECK(c.changes == 1);
    CHECK(c.state.token(pos) != cur.state.token(pos));
  }

  // K = 3, equidistant embeddings, zero gradient.
  const EmbeddingTable tri({{1, 0}, {-0.5, std::sqrt(3.0) / 2}, {-0.5, -std::sqrt(3.0) / 2}});
  const auto zt = flat(tri, 1);
  const EvaluatedState c3 = evaluate(zt, SequenceState(tri, {0}));
  long long to1 = 0;
  const long long draws = 100000;
  for (long long i = 0; i < draws; ++i) {
    const Candidate c = gwl_propose(zt, c3, GwlConfig{}, 0, rng);
    REQUIRE(c.state.token(0) != 0);
    to1 += c.state.token(0) == 1;
  }
  CHECK(std::abs(double(to1) / draws - 0.5) < 4 * binomial_sd(0.5, draws));
}

TEST_CASE("GwL proposal log-probability") {
  const auto spins = EmbeddingTable::binary_spins();
  const auto z = flat(spins, 5);
  const SequenceState s(spins, {0, 1, 0, 1, 1});
  const double ninf = -std::numeric_limits<double>::infinity();
  CHECK(gwl_log_q(z, s, s, GwlConfig{}) == ninf);
  CHECK(gwl_log_q(z, s, SequenceState(spins, {1, 0, 0, 1, 1}), GwlConfig{}) == ninf);
  CHECK(gwl_log_q(z, s, SequenceState(spins, {0, 1, 1, 1, 1}), GwlConfig{}) ==
        doctest::Approx(std::log(0.2)).epsilon(1e-14));
}

TEST_CASE("RWM proposal") {
  const auto spins = EmbeddingTable::binary_spins();
  const SequenceState s(spins, {0, 1, 0, 1, 1});
  const SequenceState t(spins, {0, 1, 1, 1, 1});
  CHECK(rwm_log_q(spins, s, t) == doctest::Approx(std::log(0.2)).epsilon(1e-15));
  CHECK(rwm_log_q(spins, s, t) == rwm_log_q(spins, t, s));
  CHECK(std::isinf(rwm_log_q(spins, s, s)));
  Rng rng(9);
  std::vector<long long> hits(5, 0);
  for (int i = 0; i < 50000; ++i) {
    const Candidate c = rwm_propose(spins, s, rng);
    REQUIRE(c.changes == 1);
    for (int p = 0; p < 5; ++p) hits[p] += c.state.token(p) != s.token(p);
  }
  for (long long h : hits) CHECK(std::abs(h / 50000.0 - 0.2) < 4 * binomial_sd(0.2, 50000));
}

TEST_CASE("MH decision") {
  Rng rng(1);
  CHECK(mh_decide(1.0, 1.0, -0.3, -0.3, rng).accepted);
  CHECK(mh_decide(1.0, 1.0, -0.3, -0.3, rng).log_ratio == 0.0);
  CHECK(mh_decide(1.0, 0.5, -1.0, -2.0, rng).accepted);
  // Always-reject: huge energy increase.
  CHECK_FALSE(mh_decide(0.0, 1e300, 0.0, 0.0, rng).accepted);
  const auto nan = mh_decide(0.0, std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0, rng);
  CHECK_FALSE(nan.accepted);
  CHECK(nan.nonfinite);
  // No overflow for very negative candidate energy.
  CHECK(mh_decide(0.0, -1e300, 0.0, 0.0, rng).accepted);
}

TEST_CASE("exact Gibbs conditional on a two-state model is always accepted") {
  // N = 1, K = 2, proposal q(y | x) = pi(y).
  const auto spins = EmbeddingTable::binary_spins();
  const auto m = linear(spins, 1, Vector::Constant(1, 0.3));
  const double u0 = m.energy_at(Vector::Constant(1, -1.0));
  const double u1 = m.energy_at(Vector::Constant(1, 1.0));
  const double logz = std::log(std::exp(-u0) + std::exp(-u1));
  Rng rng(2);
  const MhDecision d = mh_decide(u0, u1, -u1 - logz, -u0 - logz, rng);
  CHECK(d.accepted);
  CHECK(d.log_ratio == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("MUCOLA step") {
  const auto spins = EmbeddingTable::binary_spins();
  const int n = 4;
  const auto z = flat(spins, n);
  const EvaluatedState cur = evaluate(z, SequenceState(spins, std::vector<int>(n, 1)));
  Rng rng(17);
  const long long draws = 200000;
  long long flips = 0;
  for (long long i = 0; i < draws; ++i) {
    flips += mucola_step(z, cur, MucolaConfig{1.0}, rng).hamming(cur.state);
  }
  const double p = toy::oracle::phi_minus_one;
  CHECK(std::abs(double(flips) / double(draws * n) - p) < 4 * binomial_sd(p, draws * n));

  const auto m = toy::ring(5);
  const EvaluatedState s = evaluate(*m, SequenceState(m->table(), {0, 1, 1, 0, 1}));
  for (int i = 0; i < 100; ++i) CHECK(mucola_step(*m, s, MucolaConfig{1e-8}, rng) == s.state);
}

TEST_CASE("kernel configuration validation") {
  CHECK_THROWS_AS(validate(PncgConfig{0.0, 2.0}), ConfigError);
  CHECK_THROWS_AS(validate(PncgConfig{1.0, 0.5}), ConfigError);
  CHECK_THROWS_AS(validate(GwlConfig{-1.0}), ConfigError);
  CHECK_THROWS_AS(validate(MucolaConfig{0.0}), ConfigError);
  CHECK_THROWS_AS(validate(HybridConfig{0, 1.0, 10}), ConfigError);
  CHECK_NOTHROW(validate(KernelSpec{}));
  CHECK(kernel_kind_from_string("gwl") == KernelKind::gwl);
  CHECK_THROWS_AS(kernel_kind_from_string("svs"), ConfigError);
  CHECK(KernelSpec{KernelKind::pncg, true}.name() == "pncg+mh");
  CHECK(KernelSpec{KernelKind::mucola, false}.name() == "mucola");
}
