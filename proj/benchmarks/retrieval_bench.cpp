#include <benchmark/benchmark.h>

#include "hypokg/common/rng.hpp"
#include "hypokg/embed/index.hpp"

namespace hypokg {
namespace {

void BM_ReferenceEmbed(benchmark::State& state) {
  embed::ReferenceEmbedder embedder;
  const std::string text =
      "atenolol suppressed ventricular tachycardia in patients with arrhythmogenic right ventricular cardiomyopathy";
  for (auto _ : state) benchmark::DoNotOptimize(embedder.embed(text));
}
BENCHMARK(BM_ReferenceEmbed);

void BM_IndexSearch(benchmark::State& state) {
  Rng rng(4);
  const std::size_t d = 256;
  const auto n = static_cast<std::size_t>(state.range(0));
  embed::EmbeddingIndex index(d);
  auto random_vector = [&] {
    embed::Vector v(d);
    for (auto& x : v) x = rng.normal();
    return v;
  };
  for (std::size_t i = 0; i < n; ++i) {
    index.add(embed::Chunk{embed::SourceKind::kg_node, "N:" + std::to_string(i), {0, 1}, "n"}, random_vector());
  }
  const auto query = random_vector();
  for (auto _ : state) benchmark::DoNotOptimize(index.search(query, 10));
  state.SetComplexityN(static_cast<std::int64_t>(n));
}
BENCHMARK(BM_IndexSearch)->RangeMultiplier(8)->Range(64, 32768)->Complexity(benchmark::oN);

}  // namespace
}  // namespace hypokg
