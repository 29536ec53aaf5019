#include "hypokg/linkpred/predict.hpp"

#include <algorithm>
#include <set>

#include "hypokg/common/text.hpp"
#include "hypokg/kg/ops.hpp"

namespace hypokg::linkpred {

std::vector<CandidatePair> parse_pairs(std::string_view text) {
  std::vector<CandidatePair> out;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || trim(line).front() == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() < 2 || fields.size() > 3) {
      throw FormatError("pairs line " + std::to_string(line_no) + ": expected 2 or 3 tab-separated fields, got " +
                        std::to_string(fields.size()));
    }
    CandidatePair p;
    p.head = std::string(trim(fields[0]));
    p.tail = std::string(trim(fields[1]));
    if (fields.size() == 3 && !trim(fields[2]).empty()) p.relation = std::string(trim(fields[2]));
    if (p.head.empty() || p.tail.empty()) throw FormatError("pairs line " + std::to_string(line_no) + ": empty node id");
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<CandidatePair> read_pairs(const std::string& path) { return parse_pairs(read_file(path)); }

PredictionRun predict_candidates(const LinkModel& model, const kg::KnowledgeGraph& graph,
                                 const std::vector<CandidatePair>& pairs, std::size_t n) {
  if (n < 1) throw InvalidArgument("number of predictions must be at least 1");
  const auto pair_list = kg::undirected_pairs(graph);
  const std::set<NodePair> existing(pair_list.begin(), pair_list.end());
  const Embeddings emb = embed_graph(model, graph);

  PredictionRun run;
  std::vector<Prediction> ranked;
  std::vector<Prediction> excluded;
  for (const auto& c : pairs) {
    const auto head = kg::NodeId::try_parse(c.head);
    const auto tail = kg::NodeId::try_parse(c.tail);
    std::optional<kg::NodeIndex> hi, ti;
    if (head) hi = graph.find(*head);
    if (tail) ti = graph.find(*tail);
    if (!hi || !ti) {
      run.skipped.push_back("skipped pair " + c.head + "\t" + c.tail + ": unknown node " + (!hi ? c.head : c.tail));
      continue;
    }
    Prediction p;
    p.head = *head;
    p.tail = *tail;
    p.relation = c.relation;
    p.probability = score_edge(emb, p.head, p.tail);
    p.excluded_existing = *hi == *ti || existing.count(std::minmax(*hi, *ti)) > 0;
    (p.excluded_existing ? excluded : ranked).push_back(std::move(p));
  }
  auto order = [](const Prediction& a, const Prediction& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    if (a.head != b.head) return a.head < b.head;
    if (a.tail != b.tail) return a.tail < b.tail;
    return a.relation < b.relation;
  };
  std::sort(ranked.begin(), ranked.end(), order);
  std::sort(excluded.begin(), excluded.end(), order);
  for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i].rank = i + 1;
  run.top.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(std::min(n, ranked.size())));
  run.table = std::move(ranked);
  run.table.insert(run.table.end(), excluded.begin(), excluded.end());
  return run;
}

namespace {
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}
}  // namespace

std::string predictions_csv(const std::vector<Prediction>& table) {
  std::string out = "head,relation,tail,probability,rank,excluded_existing\n";
  for (const auto& p : table) {
    out += csv_field(p.head.str()) + "," + csv_field(p.relation) + "," + csv_field(p.tail.str()) + "," +
           format_real(p.probability) + "," + (p.rank ? std::to_string(p.rank) : "") + "," +
           (p.excluded_existing ? "true" : "false") + "\n";
  }
  return out;
}

}  // namespace hypokg::linkpred
