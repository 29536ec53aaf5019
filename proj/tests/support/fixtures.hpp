#pragma once

#include <filesystem>
#include <string>
#include <tuple>
#include <vector>

#include "hypokg/common/rng.hpp"
#include "hypokg/kg/graph.hpp"

namespace hypokg::testing {

/// Directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string write(const std::string& name, const std::string& contents) const;

 private:
  std::filesystem::path path_;
};

std::string data_path(const std::string& name);

using Triple = std::tuple<std::string, std::string, std::string>;

kg::KnowledgeGraph make_graph(const std::vector<Triple>& triples,
                              const std::vector<std::string>& extra_nodes = {});

/// Erdos-Renyi graph over nodes "N:0".."N:<n-1>" with relation "r".
kg::KnowledgeGraph random_graph(Rng& rng, int n, double p, const std::string& ns = "N");

/// Two communities of `block` nodes each ("A:i" and "B:i"), random Gaussian
/// node features of dimension `feature_dim`.
kg::KnowledgeGraph planted_communities(std::uint64_t seed, int block, double p_in, double p_out,
                                       int feature_dim);

/// Graph behind the Cypher query corpus (tests/data/cypher), with node text.
kg::KnowledgeGraph query_fixture_graph();

/// Query corpus names (file stems under tests/data/cypher/queries).
std::vector<std::string> query_corpus();

/// Explainer fixture: 40 noise nodes "N:i" (Erdos-Renyi, p = 0.08), a target
/// pair "S:s" / "T:t" joined only through the driver "D:a" (features scaled
/// by 3), and two random noise neighbours for each endpoint. 8 features.
kg::KnowledgeGraph driver_path_graph(std::uint64_t seed);

/// Path graph "P:0 - P:1 - ... - P:<n-1>".
kg::KnowledgeGraph path_graph(int n);

}  // namespace hypokg::testing
