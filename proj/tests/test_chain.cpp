#include "fgs/chain.hpp"
#include "fgs/errors.hpp"

#include "toy.hpp"

#include <doctest.h>
#include <json.hpp>

#include <sstream>
#include <stdexcept>

using namespace fgs;

namespace {

StepRecord record(bool accepted, int changes) {
  StepRecord r;
  r.accepted = accepted;
  r.changes = changes;
  return r;
}

// Never moves.
class RejectAll final : public ChainKernel {
 public:
  StepRecord step(EvaluatedState& state, Rng&) override {
    StepRecord r;
    r.energy = state.energy;
    return r;
  }
  std::string name() const override { return "reject"; }
};

}  // namespace

TEST_CASE("hybrid switch rule") {
  HybridConfig cfg{10, 1.0, 1000};
  std::vector<StepRecord> h;
  for (int i = 0; i < 9; ++i) h.push_back(record(true, 1));
  CHECK_FALSE(hybrid_should_switch(h, cfg));  // fewer than `window` accepted
  h.push_back(record(true, 0));
  CHECK(hybrid_should_switch(h, cfg));

  std::vector<StepRecord> busy;
  for (int i = 0; i < 50; ++i) busy.push_back(record(true, 4));
  CHECK_FALSE(hybrid_should_switch(busy, cfg));
  // Rejected records do not count toward the window.
  for (int i = 0; i < 50; ++i) busy.push_back(record(false, 0));
  CHECK_FALSE(hybrid_should_switch(busy, cfg));

  HybridConfig capped{10, 1.0, 60};
  busy.resize(60, record(true, 4));
  CHECK(hybrid_should_switch(busy, capped));
}

TEST_CASE("hybrid kernel switches early on the toy") {
  const auto m = toy::ring(5);
  KernelSpec spec{KernelKind::hybrid, true, 1.0};
  auto kernel = make_kernel(spec, *m);
  Rng rng(4);
  const auto init = random_state(m->table(), 5, rng);
  run_chain(*m, *kernel, init, 6000, rng);
  const auto* hybrid = dynamic_cast<const HybridKernel*>(kernel.get());
  REQUIRE(hybrid);
  REQUIRE(hybrid->switch_step());
  CHECK(*hybrid->switch_step() < 5000);
}

TEST_CASE("make_kernel rejects unsupported combinations") {
  const auto m = toy::ring(3);
  CHECK_THROWS_AS(make_kernel(KernelSpec{KernelKind::mucola, true}, *m), InfeasibleError);
  CHECK_THROWS_AS(make_kernel(KernelSpec{KernelKind::rwm, false}, *m), ConfigError);
  CHECK(make_kernel(KernelSpec{KernelKind::gwl, true}, *m)->name() == "gwl+mh");
  CHECK(make_kernel(KernelSpec{KernelKind::pncg, false}, *m)->name() == "pncg");
}

TEST_CASE("run_chain numbering and rejection") {
  const auto m = toy::ring(3);
  RejectAll kernel;
  Rng rng(1);
  const SequenceState init(m->table(), {0, 1, 1});
  const ChainTrace one = run_chain(*m, kernel, init, 1, rng);
  REQUIRE(one.records.size() == 1);
  CHECK(one.records[0].t == 1);
  REQUIRE(one.final_state);
  CHECK(*one.final_state == init);

  const ChainTrace many = run_chain(*m, kernel, init, 5, rng);
  for (std::size_t i = 0; i < 5; ++i) CHECK(many.records[i].t == long(i + 1));
}

TEST_CASE("identical seeds give identical traces") {
  const auto m = toy::ring(5);
  for (const KernelSpec& spec :
       {KernelSpec{KernelKind::pncg, true, 1.0}, KernelSpec{KernelKind::gwl, true, 1.0},
        KernelSpec{KernelKind::rwm, true}, KernelSpec{KernelKind::mucola, false, 1.5},
        KernelSpec{KernelKind::gwl, true, 1.0, 2.0, Scan::systematic}}) {
    auto run = [&] {
      auto k = make_kernel(spec, *m);
      Rng rng(42);
      const auto init = random_state(m->table(), 5, rng);
      return run_chain(*m, *k, init, 2000, rng);
    };
    const ChainTrace a = run();
    const ChainTrace b = run();
    CHECK(a.tokens == b.tokens);
    CHECK(a.records.size() == b.records.size());
    bool same = true;
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      same = same && a.records[i].energy == b.records[i].energy &&
             a.records[i].accepted == b.records[i].accepted;
    }
    CHECK(same);
  }
}

TEST_CASE("systematic GwL visits positions in order") {
  const auto m = toy::ring(4);
  auto k = make_kernel(KernelSpec{KernelKind::gwl, true, 1.0, 2.0, Scan::systematic}, *m);
  Rng rng(3);
  const SequenceState init(m->table(), {0, 0, 0, 0});
  const ChainTrace t = run_chain(*m, *k, init, 8, rng);
  SequenceState prev = init;
  for (std::size_t i = 0; i < 8; ++i) {
    const auto tok = t.tokens_at(i);
    for (int p = 0; p < 4; ++p) {
      if (p != int(i % 4)) CHECK(tok[p] == prev.token(p));
    }
    prev = SequenceState(m->table(), {tok.begin(), tok.end()});
  }
}

TEST_CASE("a throwing callback aborts and keeps the partial trace") {
  const auto m = toy::ring(3);
  auto k = make_kernel(KernelSpec{KernelKind::rwm, true}, *m);
  Rng rng(2);
  const std::vector<StepCallback> cbs{[](const StepRecord& r, const SequenceState&) {
    if (r.t == 4) throw std::runtime_error("disk full");
  }};
  const ChainTrace t = run_chain(*m, *k, SequenceState(m->table(), {0, 0, 0}), 10, rng, cbs);
  CHECK(t.aborted);
  CHECK(t.records.size() == 4);
  CHECK(t.error.find("disk full") != std::string::npos);
}

TEST_CASE("JSONL trace writer") {
  const auto m = toy::ring(3);
  auto k = make_kernel(KernelSpec{KernelKind::pncg, true, 1.0}, *m);
  Rng rng(2);
  std::ostringstream out;
  const std::vector<StepCallback> cbs{JsonlTraceWriter(out, true)};
  run_chain(*m, *k, SequenceState(m->table(), {0, 0, 0}), 3, rng, cbs, false);
  std::istringstream lines(out.str());
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("t") == n + 1);
    CHECK(j.contains("energy"));
    CHECK(j.contains("accepted"));
    CHECK(j.contains("changes"));
    CHECK(j.at("state").size() == 3);
    ++n;
  }
  CHECK(n == 3);
}
