#include <doctest.h>

#include "bra/harness.hpp"
#include "bra/io.hpp"

using namespace bra;

namespace {

Component comp(const std::string& id, std::vector<std::string> provided,
               std::vector<std::string> required) {
  Component c;
  c.id = id;
  c.function_label = provided.empty() ? id : provided.front();
  for (auto& p : provided) c.provided_ports.push_back({p, p});
  for (auto& r : required) c.required_ports.push_back({r, r});
  return c;
}

DependencyLink link(const std::string& id, const std::string& from_c,
                    const std::string& from_p, const std::string& to_c,
                    const std::string& to_p) {
  DependencyLink l;
  l.id = id;
  l.from = {from_c, from_p};
  l.to = {to_c, to_p};
  return l;
}

// stim -> r1 -> r2 -> ... -> rN (relays)
Hcd relay_chain(int n) {
  Hcd hcd;
  hcd.id = "relay-chain";
  for (int i = 1; i <= n; ++i) {
    const std::string id = "r" + std::to_string(i);
    hcd.components.emplace(id, comp(id, {"out"}, {"in"}));
    if (i > 1) {
      hcd.links.emplace("l" + std::to_string(i),
                        link("l" + std::to_string(i), "r" + std::to_string(i - 1),
                             "out", id, "in"));
    }
  }
  hcd.external_inputs.push_back({"stim", "r1", "in"});
  hcd.external_outputs.push_back({"resp", "r" + std::to_string(n), "out"});
  return hcd;
}

StubBindings relay_bindings(int n) {
  StubBindings b;
  for (int i = 1; i <= n; ++i) {
    b["r" + std::to_string(i)] = StubSpec{.kind = StubSpec::Kind::relay};
  }
  return b;
}

std::vector<double> pulse(int steps, int at) {
  std::vector<double> s(static_cast<std::size_t>(steps), 0.0);
  s[static_cast<std::size_t>(at)] = 1.0;
  return s;
}

}  // namespace

TEST_CASE("outputs at step t come from inputs at t-1; step 0 is quiet") {
  const Hcd hcd = relay_chain(1);
  const Schedule schedule{{"stim", pulse(4, 0)}};
  const Trace trace = run(hcd, relay_bindings(1), schedule, 4, 0);
  CHECK(trace.value_at(0, "r1", "out") == 0.0);
  CHECK(trace.value_at(1, "r1", "out") == 1.0);
  CHECK(trace.value_at(2, "r1", "out") == 0.0);
}

TEST_CASE("constant stubs emit from step 0") {
  Hcd hcd;
  hcd.id = "const";
  hcd.components.emplace("k", comp("k", {"out"}, {}));
  StubBindings b{{"k", StubSpec{.kind = StubSpec::Kind::constant, .value = 2.5}}};
  const Trace trace = run(hcd, b, {}, 3, 0);
  CHECK(trace.value_at(0, "k", "out") == 2.5);
  CHECK(trace.value_at(2, "k", "out") == 2.5);
}

TEST_CASE("a pulse traverses a relay chain with latency equal to its length") {
  for (int n = 1; n <= 5; ++n) {
    const Hcd hcd = relay_chain(n);
    const Schedule schedule{{"stim", pulse(n + 3, 1)}};
    const Trace trace = run(hcd, relay_bindings(n), schedule, n + 3, 0);
    const std::string last = "r" + std::to_string(n);
    CHECK(trace.first_active(last, "out") == 1 + n);
  }
}

TEST_CASE("delay(k) shifts by k steps and delay(1) equals relay") {
  Hcd hcd = relay_chain(1);
  const Schedule schedule{{"stim", pulse(8, 1)}};
  StubBindings delayed{{"r1", StubSpec{.kind = StubSpec::Kind::delay, .k = 3}}};
  const Trace t3 = run(hcd, delayed, schedule, 8, 0);
  CHECK(t3.first_active("r1", "out") == 4);

  StubBindings d1{{"r1", StubSpec{.kind = StubSpec::Kind::delay, .k = 1}}};
  const Trace a = run(hcd, d1, schedule, 8, 0);
  const Trace b = run(hcd, relay_bindings(1), schedule, 8, 0);
  CHECK(a.records == b.records);
}

TEST_CASE("sum, threshold, gate and table behave per definition") {
  Hcd hcd;
  hcd.id = "mix";
  hcd.components.emplace("s", comp("s", {"out"}, {"p", "q"}));
  hcd.external_inputs.push_back({"p", "s", "p"});
  hcd.external_inputs.push_back({"q", "s", "q"});
  hcd.external_outputs.push_back({"y", "s", "out"});
  const Schedule schedule{{"p", {0.25, 1.0, 0.0}}, {"q", {0.5, 1.0, 0.0}}};

  StubBindings sum{{"s", StubSpec{.kind = StubSpec::Kind::sum}}};
  CHECK(run(hcd, sum, schedule, 3, 0).value_at(1, "s", "out") == 0.75);

  StubBindings thr{{"s", StubSpec{.kind = StubSpec::Kind::threshold, .theta = 0.7}}};
  const Trace tt = run(hcd, thr, schedule, 3, 0);
  CHECK(tt.value_at(1, "s", "out") == 1.0);
  CHECK(tt.value_at(2, "s", "out") == 1.0);

  // Ports sort lexicographically: p carries data, q control.
  StubBindings gate{{"s", StubSpec{.kind = StubSpec::Kind::gate}}};
  const Trace tg = run(hcd, gate, schedule, 3, 0);
  CHECK(tg.value_at(1, "s", "out") == 0.25);
  CHECK(tg.value_at(2, "s", "out") == 1.0);

  StubSpec table{.kind = StubSpec::Kind::table};
  table.table_entries = {{"00", 0.0}, {"01", 3.0}, {"10", 5.0}, {"11", 7.0}};
  StubBindings tb{{"s", table}};
  const Trace tl = run(hcd, tb, schedule, 3, 0);
  CHECK(tl.value_at(1, "s", "out") == 3.0);  // p=0.25 -> 0, q=0.5 -> 1
  CHECK(tl.value_at(2, "s", "out") == 7.0);
}

TEST_CASE("identical configuration gives an identical trace") {
  const Hcd hcd = relay_chain(3);
  const Schedule schedule{{"stim", pulse(20, 2)}};
  const Trace a = run(hcd, relay_bindings(3), schedule, 20, 7);
  const Trace b = run(hcd, relay_bindings(3), schedule, 20, 7);
  CHECK(a == b);
  CHECK(serialize_trace_csv(a) == serialize_trace_csv(b));
}

TEST_CASE("the trace is a complete sorted grid") {
  const Hcd hcd = relay_chain(2);
  const Schedule schedule{{"stim", pulse(5, 0)}};
  const Trace trace = run(hcd, relay_bindings(2), schedule, 5, 0);
  CHECK(trace.records.size() == 10);  // 5 steps x 2 provided ports
  for (std::size_t i = 1; i < trace.records.size(); ++i) {
    const auto& x = trace.records[i - 1];
    const auto& y = trace.records[i];
    CHECK(std::tie(x.t, x.component, x.port) < std::tie(y.t, y.component, y.port));
  }
}

TEST_CASE("unbound components, arity mismatches and schedule gaps throw") {
  const Hcd hcd = relay_chain(2);
  StubBindings missing = relay_bindings(1);
  const Schedule schedule{{"stim", pulse(5, 0)}};
  CHECK_THROWS_WITH_AS(run(hcd, missing, schedule, 5, 0),
                       doctest::Contains("r2"), BraError);

  StubBindings wrong = relay_bindings(2);
  wrong["r1"].arity = 2;
  CHECK_THROWS_WITH_AS(run(hcd, wrong, schedule, 5, 0),
                       doctest::Contains("arity"), BraError);

  const Schedule gap{{"stim", pulse(3, 0)}};
  CHECK_THROWS_WITH_AS(run(hcd, relay_bindings(2), gap, 5, 0),
                       doctest::Contains("schedule gap"), BraError);
}

TEST_CASE("ablate removes components, incident links and their externals") {
  const Hcd hcd = relay_chain(3);
  const Hcd cut = ablate(hcd, {"r2"});
  CHECK(!cut.components.contains("r2"));
  CHECK(cut.links.empty());
  CHECK(cut.external_inputs.size() == 1);   // r1 survives
  CHECK(cut.external_outputs.size() == 1);  // r3 survives
  CHECK_THROWS_AS((void)ablate(hcd, {"ghost"}), BraError);
}

TEST_CASE("replace_stub checks arity against the component") {
  const Hcd hcd = relay_chain(1);
  StubSpec two_headed{.kind = StubSpec::Kind::relay, .arity = 2};
  CHECK_THROWS_AS((void)replace_stub(hcd, relay_bindings(1), "r1", two_headed),
                  BraError);
  const StubBindings swapped = replace_stub(
      hcd, relay_bindings(1), "r1",
      StubSpec{.kind = StubSpec::Kind::threshold, .theta = 0.9});
  CHECK(swapped.at("r1").kind == StubSpec::Kind::threshold);
}

TEST_CASE("goal predicates evaluate against trace and schedule") {
  const Hcd hcd = relay_chain(2);
  const Schedule schedule{{"stim", pulse(8, 2)}};
  const Trace trace = run(hcd, relay_bindings(2), schedule, 8, 0);

  GoalPredicate by;
  by.kind = GoalPredicate::Kind::port_active_by;
  by.component = "r2";
  by.port = "out";
  by.deadline = 4;
  CHECK(goal_achieved(by, trace, schedule));
  by.deadline = 3;
  CHECK(!goal_achieved(by, trace, schedule));

  GoalPredicate after;
  after.kind = GoalPredicate::Kind::port_active_after_input;
  after.component = "r2";
  after.port = "out";
  after.input = "stim";
  after.within = 2;
  CHECK(goal_achieved(after, trace, schedule));
  after.within = 1;
  CHECK(!goal_achieved(after, trace, schedule));
  after.input = "ghost";
  CHECK_THROWS_AS((void)goal_achieved(after, trace, schedule), BraError);

  GoalPredicate none;
  CHECK_THROWS_AS((void)goal_achieved(none, trace, schedule), BraError);
}
