#include "support/fixtures.hpp"

#include <atomic>
#include <fstream>
#include <unistd.h>

#include "hypokg/kg/io.hpp"

namespace hypokg::testing {

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("hypokg_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string TempDir::write(const std::string& name, const std::string& contents) const {
  const auto p = path_ / name;
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << contents;
  return p.string();
}

std::string data_path(const std::string& name) {
  return std::string(HYPOKG_TEST_DATA_DIR) + "/" + name;
}

kg::KnowledgeGraph make_graph(const std::vector<Triple>& triples,
                              const std::vector<std::string>& extra_nodes) {
  kg::GraphBuilder builder;
  for (const auto& n : extra_nodes) builder.add_node(kg::NodeId::parse(n));
  for (const auto& [h, r, t] : triples) {
    builder.add_edge({kg::NodeId::parse(h), r, kg::NodeId::parse(t),
                      kg::Provenance::knowledge_base, std::nullopt});
  }
  return builder.build();
}

kg::KnowledgeGraph random_graph(Rng& rng, int n, double p, const std::string& ns) {
  kg::GraphBuilder builder;
  for (int i = 0; i < n; ++i) builder.add_node({ns, std::to_string(i)});
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.bernoulli(p)) {
        builder.add_edge({{ns, std::to_string(i)}, "r", {ns, std::to_string(j)},
                          kg::Provenance::knowledge_base, std::nullopt});
      }
    }
  }
  return builder.build();
}

kg::KnowledgeGraph planted_communities(std::uint64_t seed, int block, double p_in, double p_out,
                                       int feature_dim) {
  Rng rng(seed);
  std::vector<kg::NodeId> ids;
  for (int i = 0; i < block; ++i) ids.push_back({"A", std::to_string(i)});
  for (int i = 0; i < block; ++i) ids.push_back({"B", std::to_string(i)});
  kg::GraphBuilder builder;
  for (const auto& id : ids) {
    std::vector<double> f(static_cast<std::size_t>(feature_dim));
    for (auto& v : f) v = rng.normal();
    builder.set_features(id, std::move(f));
  }
  const int n = static_cast<int>(ids.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const bool same = (i < block) == (j < block);
      if (rng.bernoulli(same ? p_in : p_out)) {
        builder.add_edge({ids[static_cast<std::size_t>(i)], "link", ids[static_cast<std::size_t>(j)],
                          kg::Provenance::knowledge_base, std::nullopt});
      }
    }
  }
  return builder.build();
}

kg::KnowledgeGraph driver_path_graph(std::uint64_t seed) {
  Rng rng(seed);
  constexpr int kNoise = 40;
  constexpr int kFeatures = 8;
  kg::GraphBuilder builder;
  auto features = [&](double scale) {
    std::vector<double> f(kFeatures);
    for (auto& v : f) v = scale * rng.normal();
    return f;
  };
  auto noise = [](std::uint64_t i) { return kg::NodeId{"N", std::to_string(i)}; };
  const kg::NodeId s{"S", "s"}, t{"T", "t"}, a{"D", "a"};
  for (int i = 0; i < kNoise; ++i) builder.set_features(noise(i), features(1.0));
  builder.set_features(s, features(1.0));
  builder.set_features(t, features(1.0));
  builder.set_features(a, features(3.0));
  auto link = [&](const kg::NodeId& x, const kg::NodeId& y) {
    builder.add_edge({x, "link", y, kg::Provenance::knowledge_base, std::nullopt});
  };
  for (int i = 0; i < kNoise; ++i) {
    for (int j = i + 1; j < kNoise; ++j) {
      if (rng.bernoulli(0.08)) link(noise(i), noise(j));
    }
  }
  link(s, a);
  link(a, t);
  for (int k = 0; k < 2; ++k) {
    link(s, noise(rng.below(kNoise)));
    link(t, noise(rng.below(kNoise)));
  }
  return builder.build();
}

kg::KnowledgeGraph path_graph(int n) {
  std::vector<Triple> triples;
  for (int i = 0; i + 1 < n; ++i) {
    triples.emplace_back("P:" + std::to_string(i), "next", "P:" + std::to_string(i + 1));
  }
  return make_graph(triples);
}

kg::KnowledgeGraph query_fixture_graph() {
  kg::GraphBuilder builder;
  kg::load_edge_list_into(builder, data_path("cypher/graph.tsv"), kg::Provenance::knowledge_base);
  kg::attach_node_text(builder, kg::load_node_text(data_path("cypher/node_text.tsv")));
  return builder.build();
}

std::vector<std::string> query_corpus() {
  return {"q1_drugs_by_class",          "q2_top_drug_per_class",  "q2a_top_beta_blocker",
          "q2b_top_antiarrhythmic",     "q2c_top_antifibrotic",   "q3_treatments_for_diseases",
          "q4_drug_targets",            "q5_target_interactions", "q6_target_annotations",
          "smoke"};
}

}  // namespace hypokg::testing
