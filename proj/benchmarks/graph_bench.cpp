#include <benchmark/benchmark.h>

#include "hypokg/common/text.hpp"
#include "hypokg/cypher/engine.hpp"
#include "hypokg/kg/ops.hpp"
#include "support/fixtures.hpp"

namespace hypokg {
namespace {

void BM_CypherCorpus(benchmark::State& state) {
  const auto graph = testing::query_fixture_graph();
  const auto names = testing::query_corpus();
  const auto& name = names.at(static_cast<std::size_t>(state.range(0)));
  const auto text = read_file(testing::data_path("cypher/queries/" + name + ".cypher"));
  for (auto _ : state) benchmark::DoNotOptimize(cypher::run(text, graph));
  state.SetLabel(name);
}
BENCHMARK(BM_CypherCorpus)->DenseRange(0, 9);

void BM_CypherParse(benchmark::State& state) {
  const auto text = read_file(testing::data_path("cypher/queries/q2_top_drug_per_class.cypher"));
  for (auto _ : state) benchmark::DoNotOptimize(cypher::parse(text));
}
BENCHMARK(BM_CypherParse);

void BM_KHopFilter(benchmark::State& state) {
  Rng rng(1);
  const int n = static_cast<int>(state.range(0));
  const auto g = testing::random_graph(rng, n, 4.0 / n);
  const std::vector<kg::NodeId> seeds{g.node(0), g.node(1)};
  for (auto _ : state) benchmark::DoNotOptimize(kg::k_hop_filter(g, seeds, 2));
  state.SetComplexityN(n);
}
BENCHMARK(BM_KHopFilter)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_MergeGraphs(benchmark::State& state) {
  Rng rng(2);
  const auto a = testing::random_graph(rng, 500, 0.01);
  const auto b = testing::random_graph(rng, 500, 0.01, "M");
  for (auto _ : state) benchmark::DoNotOptimize(kg::merge_graphs(a, b));
}
BENCHMARK(BM_MergeGraphs);

}  // namespace
}  // namespace hypokg

BENCHMARK_MAIN();
