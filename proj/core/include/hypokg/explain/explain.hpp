#pragma once

#include <string>
#include <vector>

#include "hypokg/kg/graph.hpp"
#include "hypokg/linkpred/gcn.hpp"

namespace hypokg::explain {

/// Union of the k_hop_filter balls around each endpoint. Throws
/// kg::UnknownNodeError for unknown endpoints, InvalidArgument when hops < 1.
kg::KnowledgeGraph computation_subgraph(const kg::KnowledgeGraph& graph, const std::vector<kg::NodeId>& endpoints,
                                        int hops);

struct ExplainConfig {
  double lambda_size = 0.005;     // weight on the sum of mask values
  double lambda_entropy = 1.0;    // weight on the summed mask entropy
  int iterations = 200;
  double learning_rate = 0.05;
  int hops = 2;                   // matches the two GCN layers
};

/// Undirected edge oriented as its first stored edge in the graph.
struct ScoredEdge {
  kg::NodeId head;
  kg::NodeId tail;
  double score = 0.0;
};

struct Explanation {
  kg::NodeId head;
  kg::NodeId tail;
  double predicted_probability = 0.0;  // full-graph model output
  std::vector<ScoredEdge> edge_scores;  // every masked edge, in pair order
  std::vector<ScoredEdge> top_k;        // score descending, ties lexicographic
  kg::KnowledgeGraph subgraph;
  std::vector<double> objective_curve;
};

/// Masked link-prediction problem over a computation subgraph. The target
/// pair, when it is itself an edge, keeps weight 1 and is not masked.
class MaskProblem {
 public:
  MaskProblem(const linkpred::LinkModel& model, const kg::KnowledgeGraph& graph, const kg::NodeId& head,
              const kg::NodeId& tail, int hops);

  const kg::KnowledgeGraph& subgraph() const { return sub_; }
  /// Masked undirected pairs (subgraph indices), target excluded.
  const std::vector<linkpred::NodePair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }

  /// Target probability with each masked pair weighted by mask[i].
  double probability(const std::vector<double>& mask) const;

  struct Evaluation {
    double objective = 0.0;
    double probability = 0.0;
    std::vector<double> grad;  // d objective / d mask
  };
  /// -log p + lambda_size * sum(m) + lambda_entropy * sum(H(m)) and its
  /// analytic gradient through the renormalized adjacency.
  Evaluation evaluate(const std::vector<double>& mask, double lambda_size, double lambda_entropy) const;

 private:
  linkpred::SparseMatrix adjacency(const std::vector<double>& mask, std::vector<double>* degree) const;

  const linkpred::LinkModel& model_;
  kg::KnowledgeGraph sub_;
  std::vector<linkpred::NodePair> pairs_;
  std::vector<kg::NodeId> heads_;  // orientation per pair
  std::vector<kg::NodeId> tails_;
  bool target_is_edge_ = false;
  Eigen::Index u_ = 0;
  Eigen::Index v_ = 0;
  linkpred::Matrix x_;

  friend Explanation explain_edge(const linkpred::LinkModel&, const kg::KnowledgeGraph&, const kg::NodeId&,
                                  const kg::NodeId&, std::size_t, const ExplainConfig&);
};

/// Learns a sigmoid edge mask (logits start at 0) by gradient descent. Throws
/// kg::UnknownNodeError for unknown endpoints, InvalidArgument when head ==
/// tail, linkpred::TrainingError on a non-finite objective.
Explanation explain_edge(const linkpred::LinkModel& model, const kg::KnowledgeGraph& graph, const kg::NodeId& head,
                         const kg::NodeId& tail, std::size_t k, const ExplainConfig& config = {});

/// Rows of the importance table: top_k then the target with score 1.0.
std::string importance_tsv(const Explanation& expl);
/// Undirected DOT graph; pen width proportional to score, target dashed and
/// labelled with the predicted probability.
std::string importance_dot(const Explanation& expl);

/// "<head>_<tail>_edge_importance".
std::string explanation_stem(const Explanation& expl);

/// Writes <stem>.tsv and <stem>.dot into out_dir (created if missing).
/// Returns the two paths. Throws IoError when the directory is unwritable.
std::vector<std::string> export_explanation(const Explanation& expl, const std::string& out_dir);

}  // namespace hypokg::explain
