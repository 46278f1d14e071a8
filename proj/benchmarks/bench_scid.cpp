#include <benchmark/benchmark.h>

#include <random>

#include "bra/scid.hpp"

namespace {

using namespace bra;

Bif dense_bif(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Sign signs[] = {Sign::excitatory, Sign::inhibitory, Sign::modulatory};
  Bif bif;
  for (int i = 0; i < n; ++i) {
    CircuitNode node;
    node.id = "c" + std::to_string(i);
    node.label = node.id;
    node.is_uniform = true;
    node.sign = signs[rng() % 3];
    node.transmitter = Transmitter::glutamate;
    bif.circuits.emplace(node.id, node);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || rng() % 100 >= 30) continue;
      Connection c;
      c.id = "k" + std::to_string(i) + "_" + std::to_string(j);
      c.input = "c" + std::to_string(i);
      c.output = "c" + std::to_string(j);
      bif.connections.emplace(c.id, c);
    }
  }
  return bif;
}

FunctionTemplate chain_template(int roles) {
  FunctionTemplate tmpl;
  tmpl.id = "chain";
  for (int i = 0; i < roles; ++i) {
    Role role;
    role.id = "R" + std::to_string(i);
    role.function_label = role.id;
    tmpl.roles.push_back(role);
    if (i > 0) {
      RoleEdge edge;
      edge.from = "R" + std::to_string(i - 1);
      edge.to = role.id;
      edge.constraint.max_path_len = 2;
      tmpl.role_edges.push_back(edge);
    }
  }
  return tmpl;
}

void bench_enumerate(benchmark::State& state) {
  const Bif bif = dense_bif(static_cast<int>(state.range(0)), 17);
  const FunctionTemplate tmpl = chain_template(3);
  std::set<std::string> roi;
  for (const auto& [id, node] : bif.circuits) roi.insert(id);
  for (auto _ : state) {
    benchmark::DoNotOptimize(enumerate_candidates(bif, roi, tmpl));
  }
}
BENCHMARK(bench_enumerate)->Arg(8)->Arg(12)->Arg(16);

void bench_enumerate_parallel(benchmark::State& state) {
  const Bif bif = dense_bif(16, 17);
  const FunctionTemplate tmpl = chain_template(3);
  std::set<std::string> roi;
  for (const auto& [id, node] : bif.circuits) roi.insert(id);
  EnumerationOptions options;
  options.jobs = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(enumerate_candidates(bif, roi, tmpl, options));
  }
}
BENCHMARK(bench_enumerate_parallel)->Arg(1)->Arg(2)->Arg(4);

}  // namespace
