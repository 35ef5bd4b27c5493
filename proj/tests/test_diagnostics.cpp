#include "fgs/chain.hpp"
#include "fgs/diagnostics.hpp"
#include "fgs/errors.hpp"

#include "toy.hpp"

#include <doctest.h>

#include <cmath>

using namespace fgs;

namespace {

// Hand-built trace, one state per record.
ChainTrace manual_trace(int length, const std::vector<std::vector<int>>& states,
                        const std::vector<double>& energies = {}) {
  ChainTrace t;
  t.length = length;
  for (std::size_t i = 0; i < states.size(); ++i) {
    StepRecord r;
    r.t = long(i + 1);
    r.accepted = i % 2 == 0;
    r.changes = int(i % 3);
    r.energy = energies.empty() ? 0.0 : energies[i];
    t.records.push_back(r);
    t.tokens.insert(t.tokens.end(), states[i].begin(), states[i].end());
  }
  return t;
}

ChainTrace run(const EnergyModel& m, const KernelSpec& spec, long long steps,
               std::uint64_t seed) {
  auto k = make_kernel(spec, m);
  Rng rng(seed);
  const auto init = random_state(m.table(), m.length(), rng);
  return run_chain(m, *k, init, steps, rng);
}

double mean_energy(const EnergyModel& m, const StateSpace& s, const DistributionVector& d) {
  double e = 0.0;
  for (long long i = 0; i < s.size(); ++i) e += d[i] * m.energy_at(s.state(i).embedding());
  return e;
}

}  // namespace

TEST_CASE("empirical distribution") {
  const StateSpace s(EmbeddingTable::binary_spins(), 2);
  const auto single = empirical_distribution(manual_trace(2, {{1, 0}}), s, 0);
  CHECK(single[2] == 1.0);
  CHECK(single.sum() == 1.0);

  const auto alt = empirical_distribution(
      manual_trace(2, {{0, 1}, {1, 1}, {0, 1}, {1, 1}}), s, 0);
  CHECK(alt[1] == 0.5);
  CHECK(alt[3] == 0.5);
  CHECK_THROWS_AS(empirical_distribution(manual_trace(2, {{0, 1}}), s, 1), ContractError);

  EmpiricalDistribution a(4), b(4);
  a.add(0);
  b.add(3);
  b.add(3);
  a.merge(b);
  CHECK(a.total() == 3);
  CHECK(a.normalized()[3] == doctest::Approx(2.0 / 3));
}

TEST_CASE("log checkpoints") {
  CHECK(log_checkpoints(100) == std::vector<long long>{1, 2, 5, 10, 20, 50, 100});
  CHECK(log_checkpoints(30) == std::vector<long long>{1, 2, 5, 10, 20, 30});
  CHECK(log_checkpoints(1) == std::vector<long long>{1});
}

TEST_CASE("TV curve of a stuck chain approaches the point-mass distance") {
  const auto m = toy::ring(3);
  const StateSpace s(m->table(), 3);
  const auto pi = exact_target(*m, s);
  const std::vector<std::vector<int>> stuck(50, {1, 1, 1});
  const std::vector<long long> cps{1, 10, 50};
  const auto curve = tv_curve(manual_trace(3, stuck), s, pi, cps);
  REQUIRE(curve.size() == 3);
  for (const auto& pt : curve) CHECK(pt.tv == doctest::Approx(1.0 - pi[7]));
}

TEST_CASE("p-NCG + MH converges to the toy target") {
  const auto m = toy::ring(5);
  const StateSpace s(m->table(), 5);
  const auto pi = exact_target(*m, s);
  const auto trace = run(*m, KernelSpec{KernelKind::pncg, true, 1.0}, 200000, 21);
  CHECK(tv_distance(empirical_distribution(trace, s, 0), pi) < 0.02);
  const std::vector<long long> cps{1000, 200000};
  const auto curve = tv_curve(trace, s, pi, cps);
  CHECK(curve.back().tv < 0.02);
}

TEST_CASE("chain started from an exact sample stays near pi") {
  const auto m = toy::ring(5);
  const StateSpace s(m->table(), 5);
  const auto pi = exact_target(*m, s);
  Rng rng(8);
  std::discrete_distribution<long long> draw(pi.data(), pi.data() + pi.size());
  auto k = make_kernel(KernelSpec{KernelKind::gwl, true, 1.0}, *m);
  const auto trace = run_chain(*m, *k, s.state(draw(rng)), 40000, rng);
  const std::vector<long long> cps{10000, 40000};
  for (const auto& pt : tv_curve(trace, s, pi, cps)) {
    CHECK(pt.tv < 3.0 * std::sqrt(double(s.size()) / double(pt.step)));
  }
}

TEST_CASE("energy summary") {
  const std::vector<double> flat(500, 2.5);
  const auto sf = energy_summary(flat, 50);
  CHECK(sf.mean == 2.5);
  CHECK(sf.variance == 0.0);
  CHECK(sf.standard_error == 0.0);
  CHECK(sf.count == 450);
  CHECK_THROWS_AS(energy_summary(flat, 500), ContractError);

  // Independent draws: batch-means SE close to sigma / sqrt(n).
  Rng rng(5);
  std::normal_distribution<double> normal(1.0, 2.0);
  std::vector<double> iid(100000);
  for (double& x : iid) x = normal(rng);
  const auto si = energy_summary(iid, 0);
  CHECK(si.standard_error == doctest::Approx(2.0 / std::sqrt(100000.0)).epsilon(0.3));
  CHECK(std::abs(si.mean - 1.0) < 4 * si.standard_error);

  EnergyTrace et;
  et.push(1.0);
  et.push(3.0);
  CHECK(et.running_mean() == std::vector<double>{1.0, 2.0});
  CHECK(default_burn_in(1000) == 100);
}

TEST_CASE("faithful kernels hit E_pi[U]; MUCOLA hits its own stationary mean") {
  const auto m = toy::ring(5);
  const StateSpace s(m->table(), 5);
  for (const auto& spec : {KernelSpec{KernelKind::pncg, true, 1.0},
                           KernelSpec{KernelKind::gwl, true, 1.0},
                           KernelSpec{KernelKind::rwm, true}}) {
    const auto es = energy_summary(run(*m, spec, 200000, 13), 20000);
    CHECK(std::abs(es.mean - toy::oracle::mean_energy5) < 3 * es.standard_error);
  }
  const auto st = stationary_distribution(mucola_exact_matrix(*m, s, MucolaConfig{1.5}));
  const double target = mean_energy(*m, s, st);
  const auto es = energy_summary(run(*m, KernelSpec{KernelKind::mucola, false, 1.5}, 200000, 13), 20000);
  CHECK(std::abs(es.mean - target) < 3 * es.standard_error);
  CHECK(std::abs(es.mean - toy::oracle::mean_energy5) > 3 * es.standard_error);
}

TEST_CASE("acceptance statistics") {
  const auto t = manual_trace(1, {{0}, {1}, {0}, {1}, {0}});
  const auto a = acceptance_stats(t);
  CHECK(a.proposals == 5);
  CHECK(a.acceptances == 3);
  CHECK(a.rate() == doctest::Approx(0.6));
  CHECK(a.windowed_rate(2) == doctest::Approx(0.5));
  CHECK(a.changes == std::vector<int>{0, 1, 2, 0, 1});
  auto b = a;
  b.merge(a);
  CHECK(b.proposals == 10);
  CHECK(b.acceptances <= b.proposals);
}
