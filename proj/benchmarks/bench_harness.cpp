#include <benchmark/benchmark.h>

#include "bra/harness.hpp"
#include "bra/io.hpp"

namespace {

using namespace bra;

void chain(int length, Hcd& hcd, StubBindings& bindings, Schedule& schedule,
           int steps) {
  for (int i = 0; i < length; ++i) {
    Component comp;
    comp.id = "c" + std::to_string(i);
    comp.function_label = "out";
    comp.provided_ports.push_back({"out", ""});
    comp.required_ports.push_back({"in", ""});
    hcd.components.emplace(comp.id, comp);
    bindings[comp.id] = StubSpec{.kind = StubSpec::Kind::relay};
    if (i > 0) {
      DependencyLink link;
      link.id = "l" + std::to_string(i);
      link.from = {"c" + std::to_string(i - 1), "out"};
      link.to = {comp.id, "in"};
      hcd.links.emplace(link.id, link);
    }
  }
  hcd.id = "chain";
  hcd.external_inputs.push_back({"stim", "c0", "in"});
  hcd.external_outputs.push_back(
      {"resp", "c" + std::to_string(length - 1), "out"});
  std::vector<double> series(static_cast<std::size_t>(steps), 0.0);
  series[1] = 1.0;
  schedule["stim"] = series;
}

void bench_run(benchmark::State& state) {
  Hcd hcd;
  StubBindings bindings;
  Schedule schedule;
  const int steps = 200;
  chain(static_cast<int>(state.range(0)), hcd, bindings, schedule, steps);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run(hcd, bindings, schedule, steps, 0));
  }
}
BENCHMARK(bench_run)->Arg(8)->Arg(32)->Arg(128);

void bench_trace_csv(benchmark::State& state) {
  Hcd hcd;
  StubBindings bindings;
  Schedule schedule;
  const int steps = 200;
  chain(32, hcd, bindings, schedule, steps);
  const Trace trace = run(hcd, bindings, schedule, steps, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(serialize_trace_csv(trace));
  }
}
BENCHMARK(bench_trace_csv);

}  // namespace

BENCHMARK_MAIN();
