#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hypokg/kg/graph.hpp"

namespace hypokg::linkpred {

using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
/// Unordered node pair, stored with first < second.
using NodePair = std::pair<kg::NodeIndex, kg::NodeIndex>;

/// Non-finite loss or objective; carries the epoch (or iteration) it appeared at.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, int epoch) : Error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

// ---- splitting -------------------------------------------------------------

struct SplitSizes {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

/// 85:5:10 with largest-remainder rounding; remainder ties go train, val, test.
SplitSizes split_sizes(std::size_t positives);

constexpr std::size_t kMinSplitEdges = 20;

struct EdgeSplit {
  std::uint64_t seed = 0;
  std::vector<NodePair> train, val, test;
  std::vector<NodePair> train_neg, val_neg, test_neg;

  /// Canonical text form; equal seeds on equal graphs give identical bytes.
  std::string serialize(const kg::KnowledgeGraph& graph) const;
};

/// Positives are the distinct undirected non-loop node pairs of `graph`.
/// Throws InvalidArgument below kMinSplitEdges positives, or when negatives
/// cannot be drawn within the rejection budget.
EdgeSplit split_edges(const kg::KnowledgeGraph& graph, std::uint64_t seed, double negative_ratio = 1.0);

// ---- model -----------------------------------------------------------------

/// D^-1/2 (A + I) D^-1/2 over the undirected simple view given by `pairs`.
SparseMatrix normalize_adjacency(std::size_t node_count, const std::vector<NodePair>& pairs);
SparseMatrix normalize_adjacency(const kg::KnowledgeGraph& graph);

/// Stored node features when the graph carries any (zeros for nodes without a
/// record); otherwise two columns: the row sum of `adj` and a constant 1.
Matrix node_features(const kg::KnowledgeGraph& graph, const SparseMatrix& adj);

struct TrainConfig {
  int hidden = 64;
  int out = 32;
  double learning_rate = 0.01;
  int epochs = 1000;
  double negative_ratio = 1.0;
  std::uint64_t seed = 0;
  double clip_norm = 5.0;
};

struct LinkModel {
  Matrix w1;  // F x H
  Matrix w2;  // H x D
  double threshold = 0.5;
  bool calibrated = false;
  TrainConfig config;
};

/// Glorot-uniform weights drawn from config.seed.
LinkModel init_model(int feature_dim, const TrainConfig& config);

/// Z = adj * relu(adj * X * W1) * W2. Throws InvalidArgument on shape mismatch.
Matrix gcn_forward(const LinkModel& model, const Matrix& features, const SparseMatrix& adj);

struct LossGradients {
  double loss = 0.0;
  Matrix dw1;
  Matrix dw2;
};

/// Mean binary cross-entropy of sigmoid(z_u . z_v) against `labels`, with
/// analytic gradients for W1 and W2.
LossGradients loss_and_gradients(const LinkModel& model, const Matrix& features, const SparseMatrix& adj,
                                 const std::vector<NodePair>& pairs, const std::vector<double>& labels);

double sigmoid(double x);

struct Embeddings {
  std::vector<kg::NodeId> nodes;  // sorted, row i of z belongs to nodes[i]
  Matrix z;
};

/// Embeds every node with message passing over the full graph.
Embeddings embed_graph(const LinkModel& model, const kg::KnowledgeGraph& graph);

/// sigmoid(z_u . z_v). Throws kg::UnknownNodeError for nodes without a row.
double score_edge(const Embeddings& embeddings, const kg::NodeId& u, const kg::NodeId& v);

// ---- metrics ---------------------------------------------------------------

struct MetricsReport {
  double threshold = 0.5;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> auroc;  // absent when labels are one class
  std::optional<double> auprc;
  std::vector<double> loss_curve;
};

/// Mann-Whitney AUROC with half credit for ties. Throws InvalidArgument when
/// labels are all one class or lengths differ.
double auroc(const std::vector<double>& scores, const std::vector<bool>& labels);
/// Average precision over distinct-score steps. Same errors as auroc().
double average_precision(const std::vector<double>& scores, const std::vector<bool>& labels);

/// Threshold metrics count score >= threshold as positive. Rank metrics are
/// left empty when labels are one class.
MetricsReport evaluate(const std::vector<double>& scores, const std::vector<bool>& labels, double threshold);

/// F1-maximizing threshold among {0, 1} and midpoints of adjacent distinct
/// scores; the lowest wins ties. Throws InvalidArgument on empty input or no
/// positive label.
double select_threshold(const std::vector<double>& scores, const std::vector<bool>& labels);

// ---- training --------------------------------------------------------------

struct TrainResult {
  LinkModel model;
  EdgeSplit split;
  MetricsReport val;           // at the selected threshold
  MetricsReport test;          // at the selected threshold
  MetricsReport test_at_half;  // at 0.5
  std::vector<double> loss_curve;
};

/// Full-batch gradient descent on train positives plus sampled negatives, with
/// message passing restricted to train positives. The threshold is selected
/// on the validation partition. Throws TrainingError on a non-finite loss.
TrainResult train(const kg::KnowledgeGraph& graph, const TrainConfig& config);

// ---- checkpoints -----------------------------------------------------------

void save_checkpoint(const LinkModel& model, const std::string& path);
LinkModel load_checkpoint(const std::string& path);

}  // namespace hypokg::linkpred
