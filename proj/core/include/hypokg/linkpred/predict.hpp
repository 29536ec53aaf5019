#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hypokg/linkpred/gcn.hpp"

namespace hypokg::linkpred {

/// Relation label written for pairs that do not name one.
inline constexpr std::string_view kPredictedRelation = "predicted";

struct CandidatePair {
  std::string head;
  std::string tail;
  std::string relation{kPredictedRelation};
};

/// One pair per line, "head<TAB>tail" with an optional third relation column.
/// Blank lines and lines starting with '#' are ignored. Throws FormatError
/// with the line number on a malformed line.
std::vector<CandidatePair> parse_pairs(std::string_view text);
std::vector<CandidatePair> read_pairs(const std::string& path);

struct Prediction {
  kg::NodeId head;
  std::string relation;
  kg::NodeId tail;
  double probability = 0.0;
  std::size_t rank = 0;  // 1-based; 0 for excluded rows
  bool excluded_existing = false;
};

struct PredictionRun {
  /// Ranked novel pairs (probability descending, ties by head then tail),
  /// followed by pairs already joined by an edge.
  std::vector<Prediction> table;
  std::vector<Prediction> top;  // first n ranked rows
  std::vector<std::string> skipped;  // one message per unusable pair
};

/// Scores every pair with embeddings from full-graph message passing. Pairs
/// that already share an edge (any relation, either direction) are excluded
/// from ranking; pairs naming unknown nodes are skipped. Throws
/// InvalidArgument when n < 1.
PredictionRun predict_candidates(const LinkModel& model, const kg::KnowledgeGraph& graph,
                                 const std::vector<CandidatePair>& pairs, std::size_t n);

/// "head,relation,tail,probability,rank,excluded_existing" plus one row per
/// table entry; fields are CSV-quoted when needed.
std::string predictions_csv(const std::vector<Prediction>& table);

}  // namespace hypokg::linkpred
