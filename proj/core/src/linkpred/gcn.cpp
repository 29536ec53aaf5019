#include "hypokg/linkpred/gcn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>

#include "../common/binary.hpp"
#include "hypokg/common/rng.hpp"
#include "hypokg/common/text.hpp"
#include "hypokg/kg/ops.hpp"

namespace hypokg::linkpred {

SplitSizes split_sizes(std::size_t positives) {
  constexpr std::size_t kParts[3] = {85, 5, 10};
  std::size_t sizes[3];
  std::size_t rem[3];
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    sizes[i] = positives * kParts[i] / 100;
    rem[i] = positives * kParts[i] % 100;
    assigned += sizes[i];
  }
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; assigned < positives; ++k, ++assigned) ++sizes[order[k]];
  return {sizes[0], sizes[1], sizes[2]};
}

std::string EdgeSplit::serialize(const kg::KnowledgeGraph& graph) const {
  std::string out = "seed\t" + std::to_string(seed) + "\n";
  auto section = [&](const char* name, const std::vector<NodePair>& pairs) {
    for (const auto& [u, v] : pairs) out += std::string(name) + "\t" + graph.node(u).str() + "\t" + graph.node(v).str() + "\n";
  };
  section("train", train);
  section("val", val);
  section("test", test);
  section("train_neg", train_neg);
  section("val_neg", val_neg);
  section("test_neg", test_neg);
  return out;
}

EdgeSplit split_edges(const kg::KnowledgeGraph& graph, std::uint64_t seed, double negative_ratio) {
  std::vector<NodePair> positives;
  for (const auto& p : kg::undirected_pairs(graph)) {
    if (p.first != p.second) positives.push_back(p);
  }
  if (positives.size() < kMinSplitEdges) {
    throw InvalidArgument("edge split needs at least " + std::to_string(kMinSplitEdges) + " edges, graph has " +
                          std::to_string(positives.size()));
  }
  if (!(negative_ratio > 0.0) || !std::isfinite(negative_ratio)) {
    throw InvalidArgument("negative ratio must be positive");
  }
  Rng rng(seed);
  EdgeSplit split;
  split.seed = seed;
  std::vector<NodePair> shuffled = positives;
  rng.shuffle(shuffled);
  const auto sizes = split_sizes(shuffled.size());
  auto take = [&](std::size_t from, std::size_t n) {
    std::vector<NodePair> part(shuffled.begin() + static_cast<std::ptrdiff_t>(from),
                               shuffled.begin() + static_cast<std::ptrdiff_t>(from + n));
    std::sort(part.begin(), part.end());
    return part;
  };
  split.train = take(0, sizes.train);
  split.val = take(sizes.train, sizes.val);
  split.test = take(sizes.train + sizes.val, sizes.test);

  const std::uint64_t n = graph.node_count();
  const std::set<NodePair> positive_set(positives.begin(), positives.end());
  auto want = [&](std::size_t k) { return static_cast<std::size_t>(std::llround(negative_ratio * static_cast<double>(k))); };
  const std::size_t needed = want(sizes.train) + want(sizes.val) + want(sizes.test);
  const std::uint64_t non_edges = n * (n - 1) / 2 - positives.size();
  if (needed > non_edges) {
    throw InvalidArgument("graph too dense to sample " + std::to_string(needed) + " negatives (" +
                          std::to_string(non_edges) + " non-edges)");
  }
  std::set<NodePair> used;
  std::size_t budget = 50 * needed + 1000;
  auto sample = [&](std::size_t count) {
    std::vector<NodePair> out;
    while (out.size() < count) {
      if (budget-- == 0) throw InvalidArgument("negative sampling exhausted its rejection budget");
      auto u = static_cast<kg::NodeIndex>(rng.below(n));
      auto v = static_cast<kg::NodeIndex>(rng.below(n));
      if (u == v) continue;
      NodePair p = std::minmax(u, v);
      if (positive_set.count(p) || !used.insert(p).second) continue;
      out.push_back(p);
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  split.train_neg = sample(want(sizes.train));
  split.val_neg = sample(want(sizes.val));
  split.test_neg = sample(want(sizes.test));
  return split;
}

SparseMatrix normalize_adjacency(std::size_t node_count, const std::vector<NodePair>& pairs) {
  if (node_count == 0) throw InvalidArgument("adjacency needs at least one node");
  std::set<NodePair> unique;
  for (const auto& [u, v] : pairs) {
    if (u >= node_count || v >= node_count) throw InvalidArgument("adjacency pair out of range");
    if (u != v) unique.insert(std::minmax(u, v));
  }
  std::vector<double> degree(node_count, 1.0);
  for (const auto& [u, v] : unique) {
    degree[u] += 1.0;
    degree[v] += 1.0;
  }
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(node_count + 2 * unique.size());
  for (std::size_t i = 0; i < node_count; ++i) {
    const auto ii = static_cast<int>(i);
    entries.emplace_back(ii, ii, 1.0 / degree[i]);
  }
  for (const auto& [u, v] : unique) {
    const double w = 1.0 / std::sqrt(degree[u] * degree[v]);
    entries.emplace_back(static_cast<int>(u), static_cast<int>(v), w);
    entries.emplace_back(static_cast<int>(v), static_cast<int>(u), w);
  }
  SparseMatrix adj(static_cast<Eigen::Index>(node_count), static_cast<Eigen::Index>(node_count));
  adj.setFromTriplets(entries.begin(), entries.end());
  return adj;
}

SparseMatrix normalize_adjacency(const kg::KnowledgeGraph& graph) {
  return normalize_adjacency(graph.node_count(), kg::undirected_pairs(graph));
}

Matrix node_features(const kg::KnowledgeGraph& graph, const SparseMatrix& adj) {
  const auto n = static_cast<Eigen::Index>(graph.node_count());
  if (adj.rows() != n) throw InvalidArgument("adjacency does not match graph size");
  if (graph.feature_dim() > 0) {
    Matrix x(n, static_cast<Eigen::Index>(graph.feature_dim()));
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto row = graph.features(static_cast<kg::NodeIndex>(i));
      for (std::size_t j = 0; j < row.size(); ++j) x(i, static_cast<Eigen::Index>(j)) = row[j];
    }
    return x;
  }
  Matrix x(n, 2);
  const Eigen::VectorXd sums = adj * Eigen::VectorXd::Ones(n);
  x.col(0) = sums;
  x.col(1).setOnes();
  return x;
}

LinkModel init_model(int feature_dim, const TrainConfig& config) {
  if (feature_dim < 1 || config.hidden < 1 || config.out < 1) throw InvalidArgument("model dimensions must be positive");
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  auto glorot = [&](int rows, int cols) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-limit, limit);
    }
    return m;
  };
  LinkModel model;
  model.config = config;
  model.w1 = glorot(feature_dim, config.hidden);
  model.w2 = glorot(config.hidden, config.out);
  return model;
}

namespace {

void check_shapes(const LinkModel& model, const Matrix& x, const SparseMatrix& adj) {
  if (adj.rows() != adj.cols() || adj.rows() != x.rows()) {
    throw InvalidArgument("gcn: adjacency is " + std::to_string(adj.rows()) + "x" + std::to_string(adj.cols()) +
                          " but features have " + std::to_string(x.rows()) + " rows");
  }
  if (x.cols() != model.w1.rows() || model.w1.cols() != model.w2.rows()) {
    throw InvalidArgument("gcn: feature width " + std::to_string(x.cols()) + " does not fit W1 " +
                          std::to_string(model.w1.rows()) + "x" + std::to_string(model.w1.cols()) + " and W2 " +
                          std::to_string(model.w2.rows()) + "x" + std::to_string(model.w2.cols()));
  }
}

double bce_with_logits(double s, double y) { return std::max(s, 0.0) - s * y + std::log1p(std::exp(-std::abs(s))); }

}  // namespace

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix gcn_forward(const LinkModel& model, const Matrix& features, const SparseMatrix& adj) {
  check_shapes(model, features, adj);
  const Matrix h1 = ((adj * features) * model.w1).cwiseMax(0.0);
  return (adj * h1) * model.w2;
}

LossGradients loss_and_gradients(const LinkModel& model, const Matrix& features, const SparseMatrix& adj,
                                 const std::vector<NodePair>& pairs, const std::vector<double>& labels) {
  check_shapes(model, features, adj);
  if (pairs.size() != labels.size() || pairs.empty()) throw InvalidArgument("loss needs one label per pair");
  const Matrix ax = adj * features;
  const Matrix pre = ax * model.w1;
  const Matrix h1 = pre.cwiseMax(0.0);
  const Matrix b = adj * h1;
  const Matrix z = b * model.w2;

  LossGradients out;
  Matrix dz = Matrix::Zero(z.rows(), z.cols());
  const double m = static_cast<double>(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto u = static_cast<Eigen::Index>(pairs[i].first);
    const auto v = static_cast<Eigen::Index>(pairs[i].second);
    const double s = z.row(u).dot(z.row(v));
    out.loss += bce_with_logits(s, labels[i]) / m;
    const double g = (sigmoid(s) - labels[i]) / m;
    dz.row(u) += g * z.row(v);
    dz.row(v) += g * z.row(u);
  }
  out.dw2 = b.transpose() * dz;
  const Matrix db = dz * model.w2.transpose();
  Matrix dpre = adj.transpose() * db;
  dpre = dpre.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
  out.dw1 = ax.transpose() * dpre;
  return out;
}

Embeddings embed_graph(const LinkModel& model, const kg::KnowledgeGraph& graph) {
  const auto adj = normalize_adjacency(graph);
  Embeddings e;
  e.nodes = graph.nodes();
  e.z = gcn_forward(model, node_features(graph, adj), adj);
  return e;
}

double score_edge(const Embeddings& embeddings, const kg::NodeId& u, const kg::NodeId& v) {
  auto row = [&](const kg::NodeId& id) {
    auto it = std::lower_bound(embeddings.nodes.begin(), embeddings.nodes.end(), id);
    if (it == embeddings.nodes.end() || *it != id) throw kg::UnknownNodeError({id});
    return static_cast<Eigen::Index>(it - embeddings.nodes.begin());
  };
  return sigmoid(embeddings.z.row(row(u)).dot(embeddings.z.row(row(v))));
}

namespace {

void check_labels(const std::vector<double>& scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("scores and labels differ in length");
  const auto pos = std::count(labels.begin(), labels.end(), true);
  if (pos == 0 || pos == static_cast<std::ptrdiff_t>(labels.size())) {
    throw InvalidArgument("rank metrics need both positive and negative labels");
  }
}

std::vector<std::size_t> descending(const std::vector<double>& scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

}  // namespace

double auroc(const std::vector<double>& scores, const std::vector<bool>& labels) {
  check_labels(scores, labels);
  // Rank-sum form of Mann-Whitney U with average ranks over ties.
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  double pos = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[idx[k]]) {
        rank_sum += avg_rank;
        pos += 1.0;
      }
    }
    i = j;
  }
  const double neg = static_cast<double>(scores.size()) - pos;
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

double average_precision(const std::vector<double>& scores, const std::vector<bool>& labels) {
  check_labels(scores, labels);
  const auto idx = descending(scores);
  const double total_pos = static_cast<double>(std::count(labels.begin(), labels.end(), true));
  double tp = 0.0;
  double seen = 0.0;
  double prev_recall = 0.0;
  double ap = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      if (labels[idx[j]]) tp += 1.0;
      seen += 1.0;
      ++j;
    }
    const double recall = tp / total_pos;
    ap += (recall - prev_recall) * (tp / seen);
    prev_recall = recall;
    i = j;
  }
  return ap;
}

MetricsReport evaluate(const std::vector<double>& scores, const std::vector<bool>& labels, double threshold) {
  if (scores.size() != labels.size()) throw InvalidArgument("scores and labels differ in length");
  if (scores.empty()) throw InvalidArgument("evaluate needs at least one score");
  MetricsReport r;
  r.threshold = threshold;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (predicted && labels[i]) ++r.tp;
    else if (predicted) ++r.fp;
    else if (labels[i]) ++r.fn;
    else ++r.tn;
  }
  const auto d = [](std::size_t x) { return static_cast<double>(x); };
  r.accuracy = d(r.tp + r.tn) / d(scores.size());
  r.precision = r.tp + r.fp > 0 ? d(r.tp) / d(r.tp + r.fp) : 0.0;
  r.recall = r.tp + r.fn > 0 ? d(r.tp) / d(r.tp + r.fn) : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  const auto pos = std::count(labels.begin(), labels.end(), true);
  if (pos > 0 && pos < static_cast<std::ptrdiff_t>(labels.size())) {
    r.auroc = auroc(scores, labels);
    r.auprc = average_precision(scores, labels);
  }
  return r;
}

double select_threshold(const std::vector<double>& scores, const std::vector<bool>& labels) {
  if (scores.empty()) throw InvalidArgument("select_threshold needs at least one score");
  if (scores.size() != labels.size()) throw InvalidArgument("scores and labels differ in length");
  if (std::find(labels.begin(), labels.end(), true) == labels.end()) {
    throw InvalidArgument("select_threshold needs at least one positive label");
  }
  std::vector<double> sorted = scores;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<double> candidates = {0.0, 1.0};
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) candidates.push_back(0.5 * (sorted[i] + sorted[i + 1]));
  std::sort(candidates.begin(), candidates.end());

  // Sweep candidates upward; F1 = 2tp / (2tp + fp + fn) is compared exactly
  // as a fraction of integers so ties are real ties.
  const auto idx = descending(scores);
  const auto total_pos = static_cast<std::uint64_t>(std::count(labels.begin(), labels.end(), true));
  std::uint64_t tp = total_pos;
  std::uint64_t fp = idx.size() - total_pos;
  std::size_t k = idx.size();  // scores[idx[0..k)] are >= the current candidate
  std::uint64_t best_num = 0;
  std::uint64_t best_den = 1;
  double best = candidates.front();
  bool first = true;
  for (double t : candidates) {
    while (k > 0 && scores[idx[k - 1]] < t) {
      --k;
      if (labels[idx[k]]) --tp;
      else --fp;
    }
    const std::uint64_t num = 2 * tp;
    const std::uint64_t den = 2 * tp + fp + (total_pos - tp);
    if (first || num * best_den > best_num * den) {
      best_num = num;
      best_den = den;
      best = t;
      first = false;
    }
  }
  return best;
}

TrainResult train(const kg::KnowledgeGraph& graph, const TrainConfig& config) {
  if (config.epochs < 0) throw InvalidArgument("epochs must be non-negative");
  if (!(config.learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
  TrainResult result;
  result.split = split_edges(graph, config.seed, config.negative_ratio);
  const auto& split = result.split;
  const auto adj = normalize_adjacency(graph.node_count(), split.train);
  const Matrix x = node_features(graph, adj);
  LinkModel model = init_model(static_cast<int>(x.cols()), config);

  std::vector<NodePair> pairs = split.train;
  pairs.insert(pairs.end(), split.train_neg.begin(), split.train_neg.end());
  std::vector<double> labels(split.train.size(), 1.0);
  labels.resize(pairs.size(), 0.0);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    auto g = loss_and_gradients(model, x, adj, pairs, labels);
    if (!std::isfinite(g.loss) || !g.dw1.allFinite() || !g.dw2.allFinite()) {
      throw TrainingError("non-finite loss at epoch " + std::to_string(epoch), epoch);
    }
    result.loss_curve.push_back(g.loss);
    const double norm = std::sqrt(g.dw1.squaredNorm() + g.dw2.squaredNorm());
    const double scale = config.clip_norm > 0 && norm > config.clip_norm ? config.clip_norm / norm : 1.0;
    model.w1 -= config.learning_rate * scale * g.dw1;
    model.w2 -= config.learning_rate * scale * g.dw2;
  }

  const Matrix z = gcn_forward(model, x, adj);
  auto scored = [&](const std::vector<NodePair>& pos, const std::vector<NodePair>& neg) {
    std::pair<std::vector<double>, std::vector<bool>> out;
    for (const auto* part : {&pos, &neg}) {
      for (const auto& [u, v] : *part) {
        out.first.push_back(sigmoid(z.row(u).dot(z.row(v))));
        out.second.push_back(part == &pos);
      }
    }
    return out;
  };
  const auto [val_scores, val_labels] = scored(split.val, split.val_neg);
  const auto [test_scores, test_labels] = scored(split.test, split.test_neg);
  model.threshold = select_threshold(val_scores, val_labels);
  model.calibrated = true;
  result.val = evaluate(val_scores, val_labels, model.threshold);
  result.test = evaluate(test_scores, test_labels, model.threshold);
  result.test_at_half = evaluate(test_scores, test_labels, 0.5);
  result.val.loss_curve = result.loss_curve;
  result.test.loss_curve = result.loss_curve;
  result.model = std::move(model);
  return result;
}

namespace {
constexpr char kCheckpointMagic[4] = {'H', 'K', 'G', 'M'};
constexpr std::uint32_t kCheckpointVersion = 1;

void put_matrix(std::string& out, const Matrix& m) {
  binary::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
  binary::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) binary::put_f64(out, m(i, j));
  }
}

Matrix read_matrix(binary::Reader& in) {
  const auto rows = in.le<std::uint32_t>();
  const auto cols = in.le<std::uint32_t>();
  if (static_cast<std::uint64_t>(rows) * cols > (1ULL << 28)) throw FormatError("checkpoint matrix is implausibly large");
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = in.f64();
  }
  return m;
}
}  // namespace

void save_checkpoint(const LinkModel& model, const std::string& path) {
  std::string out(kCheckpointMagic, 4);
  binary::put_le<std::uint32_t>(out, kCheckpointVersion);
  const auto& c = model.config;
  binary::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(c.hidden));
  binary::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(c.out));
  binary::put_f64(out, c.learning_rate);
  binary::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(c.epochs));
  binary::put_f64(out, c.negative_ratio);
  binary::put_le<std::uint64_t>(out, c.seed);
  binary::put_f64(out, c.clip_norm);
  binary::put_f64(out, model.threshold);
  out.push_back(model.calibrated ? 1 : 0);
  put_matrix(out, model.w1);
  put_matrix(out, model.w2);
  write_file(path, out);
}

LinkModel load_checkpoint(const std::string& path) {
  binary::Reader in(read_file(path), path);
  if (in.bytes(4) != std::string(kCheckpointMagic, 4)) throw FormatError(path + ": not a model checkpoint");
  const auto version = in.le<std::uint32_t>();
  if (version != kCheckpointVersion) throw FormatError(path + ": unsupported checkpoint version " + std::to_string(version));
  LinkModel m;
  m.config.hidden = static_cast<int>(in.le<std::uint32_t>());
  m.config.out = static_cast<int>(in.le<std::uint32_t>());
  m.config.learning_rate = in.f64();
  m.config.epochs = static_cast<int>(in.le<std::uint32_t>());
  m.config.negative_ratio = in.f64();
  m.config.seed = in.le<std::uint64_t>();
  m.config.clip_norm = in.f64();
  m.threshold = in.f64();
  m.calibrated = in.le<std::uint8_t>() != 0;
  m.w1 = read_matrix(in);
  m.w2 = read_matrix(in);
  if (!in.at_end()) throw FormatError(path + ": trailing bytes after checkpoint");
  if (m.w1.cols() != m.w2.rows() || m.w1.cols() != m.config.hidden || m.w2.cols() != m.config.out) {
    throw FormatError(path + ": checkpoint shapes disagree with its config");
  }
  if (!m.w1.allFinite() || !m.w2.allFinite()) throw FormatError(path + ": checkpoint holds non-finite weights");
  return m;
}

}  // namespace hypokg::linkpred
