#include "hypokg/explain/explain.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include "hypokg/common/text.hpp"
#include "hypokg/kg/ops.hpp"

namespace hypokg::explain {

using linkpred::Matrix;
using linkpred::NodePair;
using linkpred::SparseMatrix;

kg::KnowledgeGraph computation_subgraph(const kg::KnowledgeGraph& graph, const std::vector<kg::NodeId>& endpoints,
                                        int hops) {
  if (hops < 1) throw InvalidArgument("computation subgraph needs hops >= 1");
  if (endpoints.empty()) throw InvalidArgument("computation subgraph needs at least one endpoint");
  std::vector<kg::NodeId> missing;
  for (const auto& e : endpoints) {
    if (!graph.find(e)) missing.push_back(e);
  }
  if (!missing.empty()) throw kg::UnknownNodeError(missing);
  kg::KnowledgeGraph out = kg::k_hop_filter(graph, {endpoints.front()}, hops);
  for (std::size_t i = 1; i < endpoints.size(); ++i) out = kg::merge_graphs(out, kg::k_hop_filter(graph, {endpoints[i]}, hops));
  return out;
}

MaskProblem::MaskProblem(const linkpred::LinkModel& model, const kg::KnowledgeGraph& graph, const kg::NodeId& head,
                         const kg::NodeId& tail, int hops)
    : model_(model) {
  if (head == tail) throw InvalidArgument("cannot explain a self pair " + head.str());
  sub_ = computation_subgraph(graph, {head, tail}, hops);
  u_ = *sub_.find(head);
  v_ = *sub_.find(tail);
  const NodePair target = std::minmax(static_cast<kg::NodeIndex>(u_), static_cast<kg::NodeIndex>(v_));

  std::map<NodePair, std::size_t> seen;
  for (kg::EdgeIndex e = 0; e < sub_.edges().size(); ++e) {
    const auto a = sub_.edge_head(e);
    const auto b = sub_.edge_tail(e);
    if (a == b) continue;
    const NodePair p = std::minmax(a, b);
    if (p == target) {
      target_is_edge_ = true;
      continue;
    }
    if (seen.emplace(p, pairs_.size()).second) {
      pairs_.push_back(p);
      heads_.push_back(sub_.edges()[e].head);
      tails_.push_back(sub_.edges()[e].tail);
    }
  }
  // Keep the pair list in index order, orientation following the first edge.
  std::vector<std::size_t> order(pairs_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pairs_[a] < pairs_[b]; });
  std::vector<NodePair> p2;
  std::vector<kg::NodeId> h2, t2;
  for (auto i : order) {
    p2.push_back(pairs_[i]);
    h2.push_back(heads_[i]);
    t2.push_back(tails_[i]);
  }
  pairs_ = std::move(p2);
  heads_ = std::move(h2);
  tails_ = std::move(t2);

  // Features come from the full graph so default features match prediction.
  const Matrix full = linkpred::node_features(graph, linkpred::normalize_adjacency(graph));
  x_.resize(static_cast<Eigen::Index>(sub_.node_count()), full.cols());
  for (kg::NodeIndex i = 0; i < sub_.node_count(); ++i) x_.row(i) = full.row(*graph.find(sub_.node(i)));
  if (x_.cols() != model_.w1.rows()) {
    throw InvalidArgument("model expects " + std::to_string(model_.w1.rows()) + " features, graph provides " +
                          std::to_string(x_.cols()));
  }
}

SparseMatrix MaskProblem::adjacency(const std::vector<double>& mask, std::vector<double>* degree) const {
  if (mask.size() != pairs_.size()) throw InvalidArgument("mask length does not match the masked edge count");
  const std::size_t n = sub_.node_count();
  std::vector<double>& d = *degree;
  d.assign(n, 1.0);
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    d[pairs_[i].first] += mask[i];
    d[pairs_[i].second] += mask[i];
  }
  if (target_is_edge_) {
    d[static_cast<std::size_t>(u_)] += 1.0;
    d[static_cast<std::size_t>(v_)] += 1.0;
  }
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t i = 0; i < n; ++i) t.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0 / d[i]);
  auto add = [&](std::size_t a, std::size_t b, double w) {
    const double v = w / std::sqrt(d[a] * d[b]);
    t.emplace_back(static_cast<int>(a), static_cast<int>(b), v);
    t.emplace_back(static_cast<int>(b), static_cast<int>(a), v);
  };
  for (std::size_t i = 0; i < pairs_.size(); ++i) add(pairs_[i].first, pairs_[i].second, mask[i]);
  if (target_is_edge_) add(static_cast<std::size_t>(u_), static_cast<std::size_t>(v_), 1.0);
  SparseMatrix adj(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  adj.setFromTriplets(t.begin(), t.end());
  return adj;
}

double MaskProblem::probability(const std::vector<double>& mask) const {
  std::vector<double> d;
  const Matrix z = linkpred::gcn_forward(model_, x_, adjacency(mask, &d));
  return linkpred::sigmoid(z.row(u_).dot(z.row(v_)));
}

MaskProblem::Evaluation MaskProblem::evaluate(const std::vector<double>& mask, double lambda_size,
                                              double lambda_entropy) const {
  std::vector<double> d;
  const SparseMatrix adj = adjacency(mask, &d);
  const Matrix xw = x_ * model_.w1;
  const Matrix pre = adj * xw;
  const Matrix h1 = pre.cwiseMax(0.0);
  const Matrix b = adj * h1;
  const Matrix z = b * model_.w2;
  const double s = z.row(u_).dot(z.row(v_));

  Evaluation ev;
  ev.probability = linkpred::sigmoid(s);
  // -log sigmoid(s) in a form that stays finite for large |s|.
  ev.objective = std::max(-s, 0.0) + std::log1p(std::exp(-std::abs(s)));
  const double g = ev.probability - 1.0;

  Matrix dz = Matrix::Zero(z.rows(), z.cols());
  dz.row(u_) += g * z.row(v_);
  dz.row(v_) += g * z.row(u_);
  const Matrix db = dz * model_.w2.transpose();
  const Matrix dpre = (adj * db).cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
  // d objective / d adj(i, j), needed only on the sparsity pattern.
  auto grad_adj = [&](Eigen::Index i, Eigen::Index j) { return db.row(i).dot(h1.row(j)) + dpre.row(i).dot(xw.row(j)); };

  std::vector<double> dd(d.size(), 0.0);
  for (Eigen::Index i = 0; i < adj.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(adj, i); it; ++it) {
      const double contrib = grad_adj(it.row(), it.col()) * it.value();
      dd[static_cast<std::size_t>(it.row())] -= 0.5 * contrib / d[static_cast<std::size_t>(it.row())];
      dd[static_cast<std::size_t>(it.col())] -= 0.5 * contrib / d[static_cast<std::size_t>(it.col())];
    }
  }

  ev.grad.resize(pairs_.size());
  for (std::size_t e = 0; e < pairs_.size(); ++e) {
    const auto a = pairs_[e].first;
    const auto bb = pairs_[e].second;
    const double m = std::clamp(mask[e], 1e-12, 1.0 - 1e-12);
    const double scale = 1.0 / std::sqrt(d[a] * d[bb]);
    ev.grad[e] = (grad_adj(a, bb) + grad_adj(bb, a)) * scale + dd[a] + dd[bb] + lambda_size +
                 lambda_entropy * std::log((1.0 - m) / m);
    ev.objective += lambda_size * mask[e] - lambda_entropy * (m * std::log(m) + (1.0 - m) * std::log(1.0 - m));
  }
  return ev;
}

namespace {

bool lex_less(const ScoredEdge& a, const ScoredEdge& b) {
  if (a.head != b.head) return a.head < b.head;
  return a.tail < b.tail;
}

}  // namespace

Explanation explain_edge(const linkpred::LinkModel& model, const kg::KnowledgeGraph& graph, const kg::NodeId& head,
                         const kg::NodeId& tail, std::size_t k, const ExplainConfig& config) {
  if (config.iterations < 0) throw InvalidArgument("iterations must be non-negative");
  MaskProblem problem(model, graph, head, tail, config.hops);
  Explanation expl;
  expl.head = head;
  expl.tail = tail;
  expl.predicted_probability = linkpred::score_edge(linkpred::embed_graph(model, graph), head, tail);

  std::vector<double> logits(problem.size(), 0.0);
  std::vector<double> mask(problem.size(), 0.5);
  for (int it = 1; it <= config.iterations; ++it) {
    const auto ev = problem.evaluate(mask, config.lambda_size, config.lambda_entropy);
    if (!std::isfinite(ev.objective)) {
      throw linkpred::TrainingError("non-finite explanation objective at iteration " + std::to_string(it), it);
    }
    expl.objective_curve.push_back(ev.objective);
    for (std::size_t e = 0; e < logits.size(); ++e) {
      logits[e] -= config.learning_rate * ev.grad[e] * mask[e] * (1.0 - mask[e]);
      mask[e] = linkpred::sigmoid(logits[e]);
    }
  }

  for (std::size_t e = 0; e < problem.size(); ++e) {
    expl.edge_scores.push_back({problem.heads_[e], problem.tails_[e], mask[e]});
  }
  expl.top_k = expl.edge_scores;
  std::stable_sort(expl.top_k.begin(), expl.top_k.end(), [](const ScoredEdge& a, const ScoredEdge& b) {
    if (a.score != b.score) return a.score > b.score;
    return lex_less(a, b);
  });
  expl.top_k.resize(std::min(k, expl.top_k.size()));
  expl.subgraph = problem.sub_;
  return expl;
}

std::string importance_tsv(const Explanation& expl) {
  std::string out = "head\ttail\tscore\n";
  for (const auto& e : expl.top_k) out += e.head.str() + "\t" + e.tail.str() + "\t" + format_real(e.score) + "\n";
  out += expl.head.str() + "\t" + expl.tail.str() + "\t1.0\n";
  return out;
}

namespace {
std::string dot_id(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}
}  // namespace

std::string importance_dot(const Explanation& expl) {
  std::string out = "graph " + dot_id(explanation_stem(expl)) + " {\n  node [shape=box];\n";
  for (const auto& e : expl.top_k) {
    out += "  " + dot_id(e.head.str()) + " -- " + dot_id(e.tail.str()) + " [penwidth=" + format_fixed(5.0 * e.score, 4) +
           ", label=" + dot_id(format_fixed(e.score, 4)) + "];\n";
  }
  out += "  " + dot_id(expl.head.str()) + " -- " + dot_id(expl.tail.str()) +
         " [style=dashed, color=red, penwidth=5.0000, label=" +
         dot_id("p=" + format_fixed(expl.predicted_probability, 4)) + "];\n}\n";
  return out;
}

std::string explanation_stem(const Explanation& expl) {
  return expl.head.str() + "_" + expl.tail.str() + "_edge_importance";
}

std::vector<std::string> export_explanation(const Explanation& expl, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create directory '" + out_dir + "': " + ec.message());
  const auto stem = (std::filesystem::path(out_dir) / explanation_stem(expl)).string();
  write_file(stem + ".tsv", importance_tsv(expl));
  write_file(stem + ".dot", importance_dot(expl));
  return {stem + ".tsv", stem + ".dot"};
}

}  // namespace hypokg::explain
