#include "hypokg/agents/agents.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <map>
#include <set>

#include "hypokg/common/text.hpp"
#include "hypokg/embed/tokenize.hpp"

namespace hypokg::agents {

using nlohmann::json;

std::string_view to_string(MatchMethod m) {
  switch (m) {
    case MatchMethod::exact_name: return "exact_name";
    case MatchMethod::normalized_name: return "normalized_name";
    case MatchMethod::vector_similarity: return "vector_similarity";
  }
  return "exact_name";
}

// ---- entity linking -------------------------------------------------------------

namespace {

bool alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Normalized text plus, for each output character, its source offset.
struct Normalized {
  std::string text;
  std::vector<std::size_t> origin;
};

Normalized normalize_with_origin(std::string_view s) {
  Normalized out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (alnum(s[i])) {
      out.text += static_cast<char>(std::tolower(static_cast<unsigned char>(s[i])));
      out.origin.push_back(i);
    } else if (!out.text.empty() && out.text.back() != ' ') {
      out.text += ' ';
      out.origin.push_back(i);
    }
  }
  if (!out.text.empty() && out.text.back() == ' ') {
    out.text.pop_back();
    out.origin.pop_back();
  }
  return out;
}

// Canonical id at [pos, pos+len) not embedded in a longer identifier.
bool id_boundary(std::string_view q, std::size_t pos, std::size_t len) {
  if (pos > 0 && (alnum(q[pos - 1]) || q[pos - 1] == '_' || q[pos - 1] == ':')) return false;
  const std::size_t end = pos + len;
  if (end < q.size()) {
    const char c = q[end];
    if (alnum(c) || c == '_' || c == ':') return false;
    if (c == '.' && end + 1 < q.size() && alnum(q[end + 1])) return false;
  }
  return true;
}

int method_rank(MatchMethod m) { return static_cast<int>(m); }

}  // namespace

std::string normalize_name(std::string_view text) { return normalize_with_origin(text).text; }

std::vector<std::string> node_names(const kg::KnowledgeGraph& graph, kg::NodeIndex n) {
  std::vector<std::string> names;
  auto add = [&](std::string s) {
    s = normalize_name(s);
    if (!s.empty() && std::find(names.begin(), names.end(), s) == names.end()) names.push_back(std::move(s));
  };
  add(graph.node(n).local);
  const std::string& text = graph.node_text(n);
  if (!text.empty()) {
    std::size_t stop = text.find(". ");
    if (stop == std::string::npos) stop = text.size();
    std::string name(trim(std::string_view(text).substr(0, stop)));
    if (!name.empty() && name.back() == '.') name.pop_back();
    add(name);
    const auto comma = name.find(", ");
    if (comma != std::string::npos && name.find(", ", comma + 2) == std::string::npos) {
      add(name.substr(comma + 2) + " " + name.substr(0, comma));
    }
  }
  return names;
}

std::vector<EntityMatch> link_entities(std::string_view query, const kg::KnowledgeGraph& graph,
                                       const embed::EmbeddingIndex* index, const embed::Embedder* embedder,
                                       const LinkOptions& options) {
  std::map<kg::NodeId, EntityMatch> best;
  auto offer = [&](EntityMatch m) {
    auto it = best.find(m.node);
    if (it == best.end()) {
      best.emplace(m.node, std::move(m));
      return;
    }
    const auto& cur = it->second;
    if (method_rank(m.method) < method_rank(cur.method) ||
        (m.method == cur.method && m.similarity > cur.similarity)) {
      it->second = std::move(m);
    }
  };

  for (kg::NodeIndex n = 0; n < graph.node_count(); ++n) {
    const std::string id = graph.node(n).str();
    for (auto pos = query.find(id); pos != std::string_view::npos; pos = query.find(id, pos + 1)) {
      if (id_boundary(query, pos, id.size())) {
        offer({id, graph.node(n), MatchMethod::exact_name, 1.0});
        break;
      }
    }
  }

  const Normalized nq = normalize_with_origin(query);
  const std::string padded = " " + nq.text + " ";
  for (kg::NodeIndex n = 0; n < graph.node_count(); ++n) {
    if (best.count(graph.node(n))) continue;
    for (const auto& name : node_names(graph, n)) {
      if (name.size() < options.min_name_length) continue;
      const auto pos = padded.find(" " + name + " ");
      if (pos == std::string::npos) continue;
      const std::size_t first = nq.origin[pos];
      const std::size_t last = nq.origin[pos + name.size() - 1];
      offer({std::string(query.substr(first, last + 1 - first)), graph.node(n), MatchMethod::normalized_name, 1.0});
      break;
    }
  }

  if (index && embedder && index->size() > 0 && !trim(query).empty()) {
    const auto q = embedder->embed(query);
    for (const auto& hit : index->search(q, options.search_top_n)) {
      if (hit.chunk->source != embed::SourceKind::kg_node || hit.similarity < options.min_similarity) continue;
      const auto n = graph.find(std::string_view(hit.chunk->source_id));
      if (!n) continue;
      offer({std::string(trim(query)), graph.node(*n), MatchMethod::vector_similarity, std::min(hit.similarity, 1.0)});
    }
  }

  std::vector<EntityMatch> out;
  for (auto& [id, m] : best) out.push_back(std::move(m));
  std::stable_sort(out.begin(), out.end(), [](const EntityMatch& a, const EntityMatch& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (a.method != b.method) return method_rank(a.method) < method_rank(b.method);
    return a.node < b.node;
  });
  return out;
}

// ---- JSON and rendering ---------------------------------------------------------

namespace {

json value_json(const cypher::Value& v) {
  switch (v.kind()) {
    case cypher::ValueKind::null: return nullptr;
    case cypher::ValueKind::boolean: return v.as_bool();
    case cypher::ValueKind::integer: return v.as_int();
    case cypher::ValueKind::real: return v.as_real();
    case cypher::ValueKind::string: return v.as_string();
    case cypher::ValueKind::list: {
      json arr = json::array();
      for (const auto& x : v.as_list()) arr.push_back(value_json(x));
      return arr;
    }
    default: return cypher::render_cell(v);
  }
}

json edges_json(const std::vector<explain::ScoredEdge>& edges) {
  json arr = json::array();
  for (const auto& e : edges) arr.push_back({{"head", e.head.str()}, {"tail", e.tail.str()}, {"score", e.score}});
  return arr;
}

}  // namespace

json to_json(const explain::Explanation& e) {
  return {{"head", e.head.str()},
          {"tail", e.tail.str()},
          {"predicted_probability", e.predicted_probability},
          {"top_k", edges_json(e.top_k)},
          {"edge_scores", edges_json(e.edge_scores)},
          {"tsv", explain::importance_tsv(e)},
          {"dot", explain::importance_dot(e)}};
}

json to_json(const Evidence& evidence) {
  return std::visit(
      [](const auto& e) -> json {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, CypherEvidence>) {
          json rows = json::array();
          for (const auto& row : e.table.rows) {
            json r = json::array();
            for (const auto& cell : row) r.push_back(value_json(cell));
            rows.push_back(std::move(r));
          }
          return {{"type", "cypher"}, {"cypher_query_used", e.query}, {"columns", e.table.columns}, {"rows", rows}};
        } else if constexpr (std::is_same_v<T, CitationEvidence>) {
          json chunks = json::array();
          for (const auto& id : e.chunks) {
            const auto parsed = embed::parse_section_chunk_id(id);
            chunks.push_back({{"id", id}, {"section", parsed.section}, {"chunk", parsed.index}});
          }
          return {{"type", "citation"},
                  {"pmid", e.pmid},
                  {"title", e.title},
                  {"article_type", corpus::to_string(e.article_type)},
                  {"score", e.score},
                  {"rationale", e.rationale},
                  {"chunks", chunks}};
        } else {
          json j{{"type", "prediction"},
                 {"id", e.id},
                 {"head", e.prediction.head.str()},
                 {"relation", e.prediction.relation},
                 {"tail", e.prediction.tail.str()},
                 {"probability", e.prediction.probability},
                 {"rank", e.prediction.rank},
                 {"artifacts", e.artifacts}};
          if (e.explanation) j["top_k"] = edges_json(e.explanation->top_k);
          return j;
        }
      },
      evidence);
}

json to_json(const AgentResponse& r) {
  json evidence = json::array();
  for (const auto& e : r.evidence) evidence.push_back(to_json(e));
  json trace = json::array();
  for (const auto& t : r.agent_trace) {
    trace.push_back({{"agent", t.agent}, {"input_digest", t.input_digest}, {"output_digest", t.output_digest}});
  }
  return {{"answer_text", r.answer_text}, {"evidence", evidence}, {"agent_trace", trace}};
}

std::string render_evidence(const Evidence& evidence) {
  return std::visit(
      [](const auto& e) -> std::string {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, CypherEvidence>) {
          return "cypher command used to access this information:\n\n```\n" + e.query + "\n```\n\nresult:\n" +
                 e.table.to_tsv();
        } else if constexpr (std::is_same_v<T, CitationEvidence>) {
          std::string out = "[PMID " + e.pmid + "] " + e.title + " (" + std::string(corpus::to_string(e.article_type)) +
                            ", score " + format_real(e.score) + ")\n";
          if (!e.chunks.empty()) out += "  chunks: " + join(e.chunks, ", ") + "\n";
          return out;
        } else {
          std::string out = "prediction " + e.id + ": (" + e.prediction.head.str() + ", " + e.prediction.tail.str() +
                            ") probability " + format_real(e.prediction.probability) + "\n";
          for (const auto& a : e.artifacts) out += "  saved " + a + "\n";
          return out;
        }
      },
      evidence);
}

// ---- pipeline ---------------------------------------------------------------------

namespace {

std::string system_prompt(const std::string& agent) {
  static const std::map<std::string, std::string> roles{
      {llm::kAgentCypherQuery, "You translate biomedical questions into Cypher queries over a knowledge graph."},
      {llm::kAgentQueryVerification, "You repair Cypher queries using validator diagnostics."},
      {llm::kAgentTextEvaluator, "You judge whether a publication is relevant to a research question."},
      {llm::kAgentReasoning, "You answer biomedical research questions using only the evidence provided."},
      {llm::kAgentSummarizer, "You write concise, faithful summaries."},
      {llm::kAgentPredictionInterpreter, "You interpret explained link predictions in a biomedical knowledge graph."}};
  const auto it = roles.find(agent);
  return it == roles.end() ? std::string() : it->second;
}

}  // namespace

Pipeline::Pipeline(const Resources& resources, llm::CallSink sink) : res_(resources), sink_(std::move(sink)) {
  if (!res_.graph || !res_.gateway || !res_.prompts) {
    throw InvalidArgument("pipeline needs a graph, a gateway, and prompts");
  }
}

std::string Pipeline::ask(const std::string& agent, const std::string& prompt,
                          const std::map<std::string, std::string>& bindings) {
  const std::string input = res_.prompts->render(prompt, bindings);
  const std::string output =
      res_.gateway->complete(agent, {{llm::Role::system, system_prompt(agent)}, {llm::Role::user, input}}, sink_);
  trace_.push_back({agent, input, output, digest_hex(input), digest_hex(output)});
  return output;
}

// ---- knowledge-graph path ---------------------------------------------------------

std::string schema_summary(const kg::KnowledgeGraph& graph) {
  std::string out = "Namespaces: " + join(graph.namespaces(), ", ") + "\nRelations:\n";
  for (const auto& rel : graph.relations()) {
    const auto edges = graph.edges_with_relation(rel);
    std::vector<std::string> samples;
    for (std::size_t i = 0; i < edges.size() && i < 3; ++i) {
      const auto& e = graph.edge(edges[i]);
      samples.push_back("(" + e.head.str() + ")-[:`" + rel + "`]->(" + e.tail.str() + ")");
    }
    out += "- `" + rel + "`: " + join(samples, "; ") + "\n";
  }
  return out;
}

std::string extract_query(std::string_view reply) {
  const auto fence = reply.find("```");
  if (fence == std::string_view::npos) return std::string(trim(reply));
  auto body_start = reply.find('\n', fence);
  if (body_start == std::string_view::npos) return std::string(trim(reply.substr(fence + 3)));
  ++body_start;
  const auto close = reply.find("```", body_start);
  return std::string(trim(reply.substr(body_start, close == std::string_view::npos ? reply.npos : close - body_start)));
}

namespace {

std::string entity_lines(const std::vector<EntityMatch>& entities) {
  if (entities.empty()) return "(none)";
  std::string out;
  for (const auto& m : entities) {
    out += "- \"" + m.query_span + "\" -> " + m.node.str() + " (" + std::string(to_string(m.method)) + ", " +
           format_real(m.similarity) + ")\n";
  }
  return out;
}

}  // namespace

CypherOutcome generate_verified_cypher(Pipeline& p, const std::string& question,
                                       const std::vector<EntityMatch>& entities, int max_attempts) {
  if (max_attempts < 1) throw InvalidArgument("max_attempts must be >= 1");
  const std::string schema = schema_summary(p.graph());
  std::vector<CypherAttempt> attempts;
  std::optional<CypherOutcome> executed;
  bool reformulated = false;

  std::string draft = extract_query(p.ask(llm::kAgentCypherQuery, "cypher_query",
                                          {{"question", question}, {"entities", entity_lines(entities)},
                                           {"schema", schema}}));
  for (int i = 0; i < max_attempts; ++i) {
    CypherAttempt attempt{draft, std::nullopt, std::nullopt};
    cypher::ResultTable table;
    const auto v = cypher::validate(draft);
    if (v.ok()) {
      try {
        table = cypher::run(draft, p.graph());
        attempt.rows = table.rows.size();
      } catch (const cypher::CypherError& e) {
        attempt.diagnostic = e.diagnostics().to_string();
      }
    } else {
      attempt.diagnostic = v.diagnostics->to_string();
    }
    attempts.push_back(attempt);
    const bool last = i + 1 == max_attempts;

    if (attempt.rows) {
      executed = CypherOutcome{draft, table, {}, reformulated};
      if (*attempt.rows > 0 || reformulated || last) break;
      reformulated = true;
      draft = extract_query(p.ask(llm::kAgentCypherQuery, "cypher_reformulate",
                                  {{"question", question}, {"query", draft}, {"schema", schema}}));
      continue;
    }
    if (last) break;
    draft = extract_query(p.ask(llm::kAgentQueryVerification, "query_verification",
                                {{"question", question},
                                 {"query", draft},
                                 {"diagnostics", *attempt.diagnostic},
                                 {"schema", schema}}));
  }
  if (!executed) {
    throw VerificationFailure("no valid Cypher query after " + std::to_string(attempts.size()) + " attempts",
                              std::move(attempts));
  }
  executed->attempts = std::move(attempts);
  executed->reformulated = reformulated;
  return *executed;
}

// ---- literature path --------------------------------------------------------------

namespace {

constexpr std::size_t kCandidateChunks = 50;
constexpr std::size_t kExcerptChars = 1200;

std::string excerpt(const corpus::Document& doc) {
  const corpus::Section* s = nullptr;
  for (const auto& sec : doc.sections) {
    if (corpus::classify_section(sec.name) == corpus::SectionClass::abstract) {
      s = &sec;
      break;
    }
  }
  if (!s && !doc.sections.empty()) s = &doc.sections.front();
  if (!s) return doc.title;
  return s->text.substr(0, kExcerptChars);
}

int type_rank(corpus::ArticleType t) {
  switch (t) {
    case corpus::ArticleType::original_contribution: return 0;
    case corpus::ArticleType::review: return 1;
    case corpus::ArticleType::clinical_case_report: return 2;
    case corpus::ArticleType::other: return 3;
  }
  return 3;
}

}  // namespace

std::vector<LiteratureHit> literature_search(Pipeline& p, const std::string& question, std::size_t top_docs) {
  const auto& res = p.resources();
  if (!res.doc_index || res.doc_index->size() == 0 || !res.corpus || !res.embedder) {
    throw InvalidArgument("the literature index is empty; build it before searching");
  }
  const auto q = res.embedder->embed(question);
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::string>> chunks;
  for (const auto& hit : res.doc_index->search(q, std::min(kCandidateChunks, res.doc_index->size()))) {
    if (hit.chunk->source != embed::SourceKind::doc_section) continue;
    const auto pmid = embed::parse_section_chunk_id(hit.chunk->source_id).pmid;
    auto& list = chunks[pmid];
    if (list.empty()) order.push_back(pmid);
    list.push_back(hit.chunk->source_id);
  }

  std::vector<LiteratureHit> ranked;
  for (const auto& pmid : order) {
    const auto* doc = res.corpus->find(pmid);
    if (!doc) continue;
    ranked.push_back({doc, embed::score_document(q, *doc, *res.doc_index, res.settings.weights), chunks[pmid], ""});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const LiteratureHit& a, const LiteratureHit& b) {
    if (a.score.score != b.score.score) return a.score.score > b.score.score;
    return a.document->pmid < b.document->pmid;
  });
  if (ranked.size() > top_docs) ranked.resize(top_docs);

  std::vector<LiteratureHit> kept;
  for (auto& hit : ranked) {
    const std::string reply = p.ask(llm::kAgentTextEvaluator, "text_evaluator",
                                    {{"question", question},
                                     {"pmid", hit.document->pmid},
                                     {"title", hit.document->title},
                                     {"excerpt", excerpt(*hit.document)}});
    const std::string line(trim(std::string_view(reply).substr(0, reply.find('\n'))));
    const std::string lower = to_lower_ascii(line);
    if (lower.rfind("irrelevant", 0) == 0 || lower.rfind("not relevant", 0) == 0) continue;
    const auto colon = line.find(':');
    hit.rationale = colon == std::string::npos ? line : std::string(trim(std::string_view(line).substr(colon + 1)));
    kept.push_back(std::move(hit));
  }
  return kept;
}

std::vector<LiteratureHit> group_by_article_type(std::vector<LiteratureHit> hits) {
  std::stable_sort(hits.begin(), hits.end(), [](const LiteratureHit& a, const LiteratureHit& b) {
    return type_rank(a.document->article_type) < type_rank(b.document->article_type);
  });
  return hits;
}

// ---- prediction path --------------------------------------------------------------

namespace {

std::string cypher_string(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'' || c == '\\') out += '\\';
    out += c;
  }
  return out + "'";
}

}  // namespace

CypherEvidence existing_relations(const kg::KnowledgeGraph& graph, const std::vector<kg::NodeId>& nodes) {
  std::vector<std::string> quoted;
  for (const auto& n : nodes) quoted.push_back(cypher_string(n.str()));
  const std::string list = "[" + join(quoted, ", ") + "]";
  CypherEvidence ev;
  ev.query = "MATCH (a)-[r]->(b)\nWHERE a.name IN " + list + " AND b.name IN " + list +
             "\nRETURN a.name AS head, r.type AS relation, b.name AS tail\nORDER BY head, relation, tail";
  ev.table = cypher::run(ev.query, graph);
  return ev;
}

Interpretation interpret_prediction(Pipeline& p, const linkpred::Prediction& prediction,
                                    const explain::Explanation& explanation) {
  if (prediction.head != explanation.head || prediction.tail != explanation.tail) {
    throw InvalidArgument("explanation targets (" + explanation.head.str() + ", " + explanation.tail.str() +
                          ") but the prediction is (" + prediction.head.str() + ", " + prediction.tail.str() + ")");
  }
  std::set<kg::NodeId> involved{prediction.head, prediction.tail};
  for (const auto& e : explanation.top_k) {
    involved.insert(e.head);
    involved.insert(e.tail);
  }
  Interpretation out;
  out.relations = existing_relations(p.graph(), {involved.begin(), involved.end()});
  const std::string probability = format_real(prediction.probability);
  out.text = "Predicted Probability\n\n(" + prediction.head.str() + ", " + prediction.tail.str() + "): " + probability +
             "\n";
  if (explanation.top_k.empty()) return out;

  std::string edges;
  for (const auto& e : explanation.top_k) {
    edges += "- (" + e.head.str() + ", " + e.tail.str() + "): " + format_real(e.score) + "\n";
  }
  std::string relations;
  for (const auto& row : out.relations.table.rows) {
    relations += "- " + cypher::render_cell(row[0]) + " -[" + cypher::render_cell(row[1]) + "]-> " +
                 cypher::render_cell(row[2]) + "\n";
  }
  if (relations.empty()) relations = "- none found\n";

  std::string prose;
  try {
    prose = std::string(trim(p.ask(llm::kAgentPredictionInterpreter, "prediction_interpreter",
                                   {{"head", prediction.head.str()},
                                    {"tail", prediction.tail.str()},
                                    {"probability", probability},
                                    {"edges", edges},
                                    {"relations", relations}})));
  } catch (const Error&) {
    out.fallback = true;
  }
  if (prose.empty()) {
    out.fallback = true;
    prose = "No interpreter output is available. The influential edges above carry the model's support for this "
            "link, and the existing relations below are taken directly from the knowledge graph.";
  }

  const auto& top = explanation.top_k.front();
  std::string reliability = "The model assigns this link a probability of " + probability;
  if (const auto* model = p.resources().model; model && model->calibrated) {
    reliability += " against a validation-selected decision threshold of " + format_real(model->threshold);
  }
  reliability += ". The strongest influential edge, (" + top.head.str() + ", " + top.tail.str() +
                 "), has a mask score of " + format_real(top.score) +
                 ". Mask scores measure how much an edge supports this prediction inside the model. They are not "
                 "experimental evidence, so the link remains a hypothesis for validation.";

  out.text += "\nInfluential Nodes and Paths\n\n" + edges + "\nPotential Biological Implications\n\n" + prose +
              "\n\nExisting relations among the involved nodes:\n" + relations +
              "\nStrength and Reliability of the Link Prediction\n\n" + reliability + "\n";
  return out;
}

std::vector<linkpred::CandidatePair> candidate_pairs(const kg::KnowledgeGraph& graph,
                                                     const std::vector<EntityMatch>& entities,
                                                     const PredictOptions& options) {
  std::set<kg::NodeId> drugs;
  std::set<kg::NodeId> diseases;
  for (const auto& m : entities) {
    if (m.node.ns == options.drug_namespace) drugs.insert(m.node);
    if (m.node.ns == options.disease_namespace) diseases.insert(m.node);
    if (m.node.ns != options.class_namespace) continue;
    for (const auto c : graph.nodes_in_namespace(options.class_namespace)) {
      if (graph.node(c).local.rfind(m.node.local, 0) != 0) continue;
      for (const auto e : graph.incident(c)) {
        const auto other = graph.edge_head(e) == c ? graph.edge_tail(e) : graph.edge_head(e);
        if (graph.node(other).ns == options.drug_namespace) drugs.insert(graph.node(other));
      }
    }
  }
  std::vector<linkpred::CandidatePair> pairs;
  for (const auto& d : drugs) {
    for (const auto& s : diseases) pairs.push_back({d.str(), s.str()});
  }
  return pairs;
}

// ---- routing ------------------------------------------------------------------------

std::string_view to_string(CommandKind k) {
  switch (k) {
    case CommandKind::query: return "query";
    case CommandKind::predict: return "predict";
    case CommandKind::search: return "search";
    case CommandKind::summarize: return "summarize";
    case CommandKind::chat: return "chat";
  }
  return "chat";
}

namespace {

std::string strip_quotes(std::string_view s) {
  s = trim(s);
  static const std::pair<std::string_view, std::string_view> kPairs[] = {
      {"\"", "\""}, {"'", "'"}, {"\xE2\x80\x9C", "\xE2\x80\x9D"}};
  for (const auto& [open, close] : kPairs) {
    if (s.size() >= open.size() + close.size() && s.substr(0, open.size()) == open &&
        s.substr(s.size() - close.size()) == close) {
      return std::string(trim(s.substr(open.size(), s.size() - open.size() - close.size())));
    }
  }
  return std::string(s);
}

}  // namespace

Command route(std::string_view input) {
  const std::string_view line = trim(input);
  std::size_t end = 0;
  while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
  const std::string keyword = to_lower_ascii(line.substr(0, end));
  const std::string rest = strip_quotes(line.substr(end));

  static const std::map<std::string, CommandKind> kKeywords{{"query", CommandKind::query},
                                                            {"predict", CommandKind::predict},
                                                            {"search", CommandKind::search},
                                                            {"summarize", CommandKind::summarize}};
  const auto it = kKeywords.find(keyword);
  if (it == kKeywords.end()) return {CommandKind::chat, std::string(line), std::nullopt};
  Command c{it->second, rest, std::nullopt};
  if (c.kind != CommandKind::summarize && c.payload.empty()) {
    c.usage_error = "usage: " + keyword + " <text>";
  }
  return c;
}

// ---- turn handlers --------------------------------------------------------------------

AgentResponse respond_query(Pipeline& p, const std::string& question) {
  const auto& res = p.resources();
  const auto entities = link_entities(question, p.graph(), res.kg_index, res.embedder, res.settings.linking);
  AgentResponse r;
  try {
    auto outcome = generate_verified_cypher(p, question, entities, res.settings.max_cypher_attempts);
    const std::string prose = p.ask(llm::kAgentReasoning, "query_answer",
                                    {{"question", question}, {"query", outcome.query},
                                     {"table", outcome.table.to_tsv()}});
    r.answer_text = "[Querying knowledge graph]\n\n" + std::string(trim(prose));
    r.evidence.push_back(CypherEvidence{outcome.query, outcome.table});
  } catch (const VerificationFailure& e) {
    const auto& last = e.attempts().back();
    r.answer_text = "[Querying knowledge graph]\n\nNo valid Cypher query could be produced after " +
                    std::to_string(e.attempts().size()) +
                    " attempts. Last diagnostic: " + last.diagnostic.value_or("none");
  }
  r.agent_trace = p.take_trace();
  return r;
}

AgentResponse respond_search(Pipeline& p, const std::string& question) {
  AgentResponse r;
  const auto hits = group_by_article_type(literature_search(p, question, p.resources().settings.top_docs));
  r.answer_text = "[Performing Literature Retrieval]\n\n";
  if (hits.empty()) {
    r.answer_text += "No relevant publications were found in the corpus for this question.";
    r.agent_trace = p.take_trace();
    return r;
  }

  std::map<corpus::ArticleType, std::size_t> counts;
  for (const auto& h : hits) ++counts[h.document->article_type];
  struct Label {
    std::string heading, plural, singular;
  };
  static const std::map<corpus::ArticleType, Label> kLabels{
      {corpus::ArticleType::original_contribution,
       {"Original Research Articles", "original research articles", "original research article"}},
      {corpus::ArticleType::review, {"Review Articles", "review articles", "review article"}},
      {corpus::ArticleType::clinical_case_report,
       {"Clinical Case Reports", "clinical case reports", "clinical case report"}},
      {corpus::ArticleType::other, {"Other Publications", "other publications", "other publication"}}};
  std::vector<std::string> parts;
  for (const auto& [type, n] : counts) {
    const auto& l = kLabels.at(type);
    parts.push_back(std::to_string(n) + " " + (n == 1 ? l.singular : l.plural));
  }
  r.answer_text += "Our system identified " + std::to_string(hits.size()) +
                   (hits.size() == 1 ? " publication" : " publications") + " relevant to the question (" +
                   join(parts, ", ") + ").\n";

  std::string evidence;
  std::optional<corpus::ArticleType> current;
  std::size_t number = 0;
  for (const auto& h : hits) {
    const auto type = h.document->article_type;
    if (current != type) {
      r.answer_text += "\n" + kLabels.at(type).heading + "\n\n";
      current = type;
      number = 0;
    }
    r.answer_text += std::to_string(++number) + ". " + h.document->title + " (PMID: " + h.document->pmid + ")\n";
    if (!h.rationale.empty()) r.answer_text += " - " + h.rationale + "\n";
    evidence += "- PMID " + h.document->pmid + " (" + kLabels.at(type).singular + "): " + h.document->title;
    if (!h.rationale.empty()) evidence += ". " + h.rationale;
    evidence += "\n";
    r.evidence.push_back(CitationEvidence{h.document->pmid, h.document->title, type, h.score.score, h.rationale,
                                          h.chunks});
  }
  const std::string synthesis =
      p.ask(llm::kAgentReasoning, "literature_synthesis", {{"question", question}, {"evidence", evidence}});
  r.answer_text += "\nSynthesis of Evidence\n\n" + std::string(trim(synthesis));
  r.agent_trace = p.take_trace();
  return r;
}

AgentResponse respond_predict(Pipeline& p, const std::string& request, const std::string& id_prefix) {
  const auto& res = p.resources();
  if (!res.model) {
    throw InvalidArgument("no link-prediction model is loaded; train one with 'hypokg train' and set "
                          "model_checkpoint in the configuration");
  }
  const auto& opts = res.settings.predict;
  const auto entities = link_entities(request, p.graph(), res.kg_index, res.embedder, res.settings.linking);
  const auto pairs = candidate_pairs(p.graph(), entities, opts);
  AgentResponse r;
  r.answer_text = "[Performing Explainable Link Prediction]\n\n";
  if (pairs.empty()) {
    r.answer_text += "Could not identify both a drug (or drug class) and a disease in the request. Name them by "
                     "identifier or by name, for example " + opts.drug_namespace + ":DB00335 and " +
                     opts.disease_namespace + ":D002313.";
    return r;
  }
  const auto run = linkpred::predict_candidates(*res.model, p.graph(), pairs, std::max<std::size_t>(opts.top_n, 1));
  const std::size_t excluded = static_cast<std::size_t>(
      std::count_if(run.table.begin(), run.table.end(), [](const auto& x) { return x.excluded_existing; }));
  r.answer_text += "Scored " + std::to_string(pairs.size()) + " candidate pairs; " + std::to_string(excluded) +
                   " already linked in the knowledge graph were excluded.\n";
  if (run.top.empty()) {
    r.answer_text += "Every candidate pair is already linked, so there is nothing new to predict.";
    return r;
  }
  r.answer_text += "\nTop predictions:\n";
  for (const auto& pred : run.top) {
    r.answer_text += std::to_string(pred.rank) + ". (" + pred.head.str() + ", " + pred.tail.str() +
                     "): predicted probability " + format_real(pred.probability) + "\n";
  }

  std::vector<Evidence> predictions;
  std::shared_ptr<const explain::Explanation> first;
  for (const auto& pred : run.top) {
    auto expl = std::make_shared<explain::Explanation>(
        explain::explain_edge(*res.model, p.graph(), pred.head, pred.tail, opts.explain_k, opts.explain));
    PredictionEvidence ev{id_prefix + "-" + std::to_string(pred.rank), pred, expl, {}};
    if (!opts.artifact_dir.empty()) ev.artifacts = explain::export_explanation(*expl, opts.artifact_dir);
    if (!first) first = expl;
    predictions.push_back(std::move(ev));
  }
  const auto interp = interpret_prediction(p, run.top.front(), *first);
  r.answer_text += "\nShowing the explanation for (" + run.top.front().head.str() + ", " +
                   run.top.front().tail.str() + ").\n\n" + interp.text;
  r.evidence = std::move(predictions);
  r.evidence.push_back(interp.relations);
  r.agent_trace = p.take_trace();
  return r;
}

AgentResponse respond_chat(Pipeline& p, const std::string& history, const std::string& message) {
  AgentResponse r;
  r.answer_text = std::string(trim(p.ask(llm::kAgentReasoning, "chat",
                                         {{"history", history.empty() ? "(none)" : history}, {"message", message}})));
  r.agent_trace = p.take_trace();
  return r;
}

SummaryOutput summarize_session(Pipeline& p, const std::vector<std::string>& turns, const std::string& out_dir,
                                const std::string& session_id, const std::string& timestamp) {
  if (turns.empty()) throw InvalidArgument("nothing to summarize: the session has no turns yet");
  std::string transcript = join(turns, "\n\n");
  const std::size_t budget = p.resources().settings.summary_budget_tokens;
  if (embed::token_count(transcript) > budget) {
    corpus::Document doc;
    doc.pmid = session_id;
    for (std::size_t i = 0; i < turns.size(); ++i) doc.sections.push_back({"Turn " + std::to_string(i + 1), turns[i]});
    transcript = corpus::hierarchical_summarize(
                     doc, [&](const std::string& text) { return p.ask(llm::kAgentSummarizer, "summarize_text", {{"text", text}}); },
                     budget)
                     .text;
  }
  SummaryOutput out;
  out.text = p.ask(llm::kAgentSummarizer, "session_summary", {{"transcript", transcript}});

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create directory '" + out_dir + "': " + ec.message());
  const auto base = std::filesystem::path(out_dir) / ("summary_" + session_id + "_" + timestamp);
  auto path = base;
  path += ".txt";
  for (int n = 2; std::filesystem::exists(path); ++n) {
    path = base;
    path += "_" + std::to_string(n) + ".txt";
  }
  write_file(path.string(), out.text);
  out.path = path.string();
  return out;
}

}  // namespace hypokg::agents
