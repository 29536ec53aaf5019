#include <deque>
#include <map>
#include <set>

#include "acceptance/criteria.hpp"
#include "hypokg/common/text.hpp"
#include "hypokg/cypher/engine.hpp"
#include "hypokg/kg/ops.hpp"
#include "support/fixtures.hpp"

namespace hypokg::acceptance {

using testing::data_path;

Outcome cypher_corpus() {
  const auto graph = testing::query_fixture_graph();
  const auto names = testing::query_corpus();
  std::size_t matched = 0;
  std::string mismatched;
  for (const auto& name : names) {
    const auto text = read_file(data_path("cypher/queries/" + name + ".cypher"));
    const auto v = cypher::validate(text);
    if (!v.ok()) {
      mismatched += " " + name + "(invalid)";
      continue;
    }
    const auto table = cypher::run(text, graph);
    if (table.to_tsv() == read_file(data_path("cypher/golden/" + name + ".tsv")) && table.type_mismatches == 0) {
      ++matched;
    } else {
      mismatched += " " + name;
    }
  }
  Outcome o;
  o.pass = matched == names.size() && !names.empty();
  o.detail = std::to_string(matched) + "/" + std::to_string(names.size()) + " queries match golden tables";
  if (!mismatched.empty()) o.detail += "; mismatched:" + mismatched;
  return o;
}

namespace {

// Multi-source BFS over the undirected view of `g`.
std::set<std::string> bfs_nodes(const kg::KnowledgeGraph& g, const std::vector<kg::NodeId>& seeds, int k) {
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& e : g.edges()) {
    adj[e.head.str()].push_back(e.tail.str());
    adj[e.tail.str()].push_back(e.head.str());
  }
  std::map<std::string, int> dist;
  std::deque<std::string> queue;
  for (const auto& s : seeds) {
    if (dist.emplace(s.str(), 0).second) queue.push_back(s.str());
  }
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop_front();
    if (dist[u] == k) continue;
    for (const auto& v : adj[u]) {
      if (dist.emplace(v, dist[u] + 1).second) queue.push_back(v);
    }
  }
  std::set<std::string> out;
  for (const auto& [n, d] : dist) out.insert(n);
  return out;
}

}  // namespace

Outcome k_hop_oracle() {
  Rng rng(20240601);
  const int trials = 200;
  int agree = 0;
  for (int t = 0; t < trials; ++t) {
    const int n = 1 + static_cast<int>(rng.below(100));
    auto g = testing::random_graph(rng, n, rng.uniform(0.0, 0.15));
    std::vector<kg::NodeId> seeds;
    const auto count = 1 + rng.below(4);
    for (std::size_t s = 0; s < count; ++s) seeds.push_back(g.node(static_cast<kg::NodeIndex>(rng.below(g.node_count()))));
    const int k = static_cast<int>(rng.below(5));

    const auto filtered = kg::k_hop_filter(g, seeds, k);
    const auto want_nodes = bfs_nodes(g, seeds, k);
    std::multiset<std::string> want_edges, got_edges;
    for (const auto& e : g.edges()) {
      if (want_nodes.count(e.head.str()) && want_nodes.count(e.tail.str())) {
        want_edges.insert(e.head.str() + "|" + e.relation + "|" + e.tail.str());
      }
    }
    for (const auto& e : filtered.edges()) got_edges.insert(e.head.str() + "|" + e.relation + "|" + e.tail.str());
    std::set<std::string> got_nodes;
    for (const auto& id : filtered.nodes()) got_nodes.insert(id.str());
    agree += got_nodes == want_nodes && got_edges == want_edges;
  }
  return {agree == trials, std::to_string(agree) + "/" + std::to_string(trials) + " random graphs equal the BFS oracle"};
}

}  // namespace hypokg::acceptance
