#include "hypokg/kg/io.hpp"

#include <fstream>
#include <sstream>

#include "hypokg/common/text.hpp"

namespace hypokg::kg {

namespace {

// Calls fn(line_number, line) for every non-blank, non-comment line.
template <typename Fn>
void for_each_content_line(const std::string& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    fn(number, std::string_view(line));
  }
  if (in.bad()) throw IoError("error while reading '" + path + "'");
}

}  // namespace

LoadReport load_edge_list_into(GraphBuilder& builder, const std::string& path,
                               Provenance provenance, char delimiter) {
  LoadReport report;
  const BuildCounters before = builder.counters();
  bool first = true;
  for_each_content_line(path, [&](std::size_t number, std::string_view line) {
    const bool is_first = first;
    first = false;
    auto fields = split(line, delimiter);
    for (auto& f : fields) f = std::string(trim(f));
    if (is_first && fields.size() >= 3 && !NodeId::try_parse(fields[2])) {
      report.header_skipped = 1;
      return;
    }
    ++report.lines;
    auto head = fields.size() >= 3 ? NodeId::try_parse(fields[0]) : std::nullopt;
    auto tail = fields.size() >= 3 ? NodeId::try_parse(fields[2]) : std::nullopt;
    double weight = 0.0;
    const bool has_weight = fields.size() == 4;
    const bool ok = (fields.size() == 3 || fields.size() == 4) && head && tail &&
                    !fields[1].empty() && (!has_weight || parse_real(fields[3], weight));
    if (!ok) {
      ++report.malformed;
      report.malformed_lines.push_back(number);
      return;
    }
    Edge edge{*std::move(head), fields[1], *std::move(tail), provenance, std::nullopt};
    if (has_weight) edge.weight = weight;
    builder.add_edge(std::move(edge));
  });
  if (report.lines > 0 && report.malformed == report.lines) {
    throw FormatError("'" + path + "': all " + std::to_string(report.lines) +
                      " edge lines are malformed");
  }
  const BuildCounters& after = builder.counters();
  report.duplicates = after.duplicates - before.duplicates;
  report.self_loops_dropped = after.self_loops_dropped - before.self_loops_dropped;
  report.weight_conflicts = after.weight_conflicts - before.weight_conflicts;
  return report;
}

EdgeListLoad load_edge_list(const std::string& path, Provenance provenance, char delimiter) {
  GraphBuilder builder;
  LoadReport report = load_edge_list_into(builder, path, provenance, delimiter);
  return {builder.build(), std::move(report)};
}

std::map<NodeId, std::vector<double>> load_node_features(const std::string& path) {
  std::map<NodeId, std::vector<double>> out;
  std::size_t dim = 0;
  for_each_content_line(path, [&](std::size_t number, std::string_view line) {
    const auto tab = line.find('\t');
    const auto where = path + ":" + std::to_string(number);
    if (tab == std::string_view::npos) throw FormatError(where + ": expected NodeId<TAB>values");
    auto id = NodeId::try_parse(trim(line.substr(0, tab)));
    if (!id) throw FormatError(where + ": invalid node id");
    std::vector<double> values;
    for (const auto& token : split(line.substr(tab + 1), ',')) {
      double v = 0.0;
      if (!parse_real(token, v)) throw FormatError(where + ": invalid feature value '" + token + "'");
      values.push_back(v);
    }
    if (dim != 0 && values.size() != dim) {
      throw FormatError(where + ": feature dimension " + std::to_string(values.size()) +
                        " differs from " + std::to_string(dim));
    }
    dim = values.size();
    out[*std::move(id)] = std::move(values);
  });
  return out;
}

std::map<NodeId, std::string> load_node_text(const std::string& path) {
  std::map<NodeId, std::string> out;
  for_each_content_line(path, [&](std::size_t number, std::string_view line) {
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw FormatError(path + ":" + std::to_string(number) + ": expected NodeId<TAB>text");
    }
    auto id = NodeId::try_parse(trim(line.substr(0, tab)));
    if (!id) throw FormatError(path + ":" + std::to_string(number) + ": invalid node id");
    out[*std::move(id)] = std::string(trim(line.substr(tab + 1)));
  });
  return out;
}

std::size_t attach_node_features(GraphBuilder& builder,
                                 const std::map<NodeId, std::vector<double>>& features) {
  std::size_t ignored = 0;
  for (const auto& [id, values] : features) {
    if (!builder.contains(id)) {
      ++ignored;
      continue;
    }
    builder.set_features(id, values);
  }
  return ignored;
}

std::size_t attach_node_text(GraphBuilder& builder, const std::map<NodeId, std::string>& text) {
  std::size_t ignored = 0;
  for (const auto& [id, value] : text) {
    if (!builder.contains(id)) {
      ++ignored;
      continue;
    }
    builder.set_text(id, value);
  }
  return ignored;
}

void save_edge_list(const KnowledgeGraph& graph, const std::string& path, char delimiter) {
  std::ostringstream out;
  for (const auto& e : graph.edges()) {
    out << e.head.str() << delimiter << e.relation << delimiter << e.tail.str();
    if (e.weight) out << delimiter << format_real(*e.weight);
    out << '\n';
  }
  write_file(path, out.str());
}

}  // namespace hypokg::kg
