#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "hypokg/corpus/corpus.hpp"
#include "hypokg/cypher/engine.hpp"
#include "hypokg/embed/index.hpp"
#include "hypokg/explain/explain.hpp"
#include "hypokg/kg/graph.hpp"
#include "hypokg/linkpred/gcn.hpp"
#include "hypokg/linkpred/predict.hpp"
#include "hypokg/llm/gateway.hpp"

namespace hypokg::agents {

// ---- entity linking -----------------------------------------------------------

enum class MatchMethod { exact_name, normalized_name, vector_similarity };

std::string_view to_string(MatchMethod m);

struct EntityMatch {
  std::string query_span;  // substring of the query text
  kg::NodeId node;
  MatchMethod method = MatchMethod::exact_name;
  double similarity = 1.0;
};

struct LinkOptions {
  double min_similarity = 0.35;
  std::size_t search_top_n = 20;
  std::size_t min_name_length = 3;  // shorter normalized names are ignored
};

/// Lowercases, maps non-alphanumerics to single spaces, and trims.
std::string normalize_name(std::string_view text);

/// Normalized names of a node: its local id, the description up to the first
/// sentence break, and for "Head, Modifier" names also "Modifier Head".
std::vector<std::string> node_names(const kg::KnowledgeGraph& graph, kg::NodeIndex n);

/// Exact canonical-id hits, then normalized-name hits on word boundaries,
/// then vector search over node chunks (when an index and embedder are
/// given). Deduplicated by node keeping the best method; sorted by
/// similarity descending, then method, then node id.
std::vector<EntityMatch> link_entities(std::string_view query, const kg::KnowledgeGraph& graph,
                                       const embed::EmbeddingIndex* index = nullptr,
                                       const embed::Embedder* embedder = nullptr, const LinkOptions& options = {});

// ---- responses ----------------------------------------------------------------

struct TraceEntry {
  std::string agent;
  std::string input;
  std::string output;
  std::string input_digest;
  std::string output_digest;
};

struct CypherEvidence {
  std::string query;
  cypher::ResultTable table;
};

struct CitationEvidence {
  std::string pmid;
  std::string title;
  corpus::ArticleType article_type = corpus::ArticleType::other;
  double score = 0.0;
  std::string rationale;
  std::vector<std::string> chunks;  // "pmid#section#index" ids
};

struct PredictionEvidence {
  std::string id;
  linkpred::Prediction prediction;
  std::shared_ptr<const explain::Explanation> explanation;
  std::vector<std::string> artifacts;  // exported files
};

using Evidence = std::variant<CypherEvidence, CitationEvidence, PredictionEvidence>;

struct AgentResponse {
  std::string answer_text;
  std::vector<Evidence> evidence;
  std::vector<TraceEntry> agent_trace;
};

nlohmann::json to_json(const Evidence& e);
/// {answer_text, evidence[], agent_trace: [{agent, input_digest, output_digest}]}.
nlohmann::json to_json(const AgentResponse& r);
nlohmann::json to_json(const explain::Explanation& e);

/// Evidence blocks as printed after an answer.
std::string render_evidence(const Evidence& e);

// ---- pipeline context -----------------------------------------------------------

struct PredictOptions {
  std::string drug_namespace = "DrugBank_Compound";
  std::string disease_namespace = "MeSH_Disease";
  std::string class_namespace = "ATC_Class";
  std::size_t top_n = 3;
  std::size_t explain_k = 10;
  explain::ExplainConfig explain;
  std::string artifact_dir;  // empty: explanations are not exported
};

struct PipelineSettings {
  LinkOptions linking;
  int max_cypher_attempts = 3;
  std::size_t top_docs = 5;
  embed::SectionWeights weights;
  std::size_t summary_budget_tokens = 2000;
  PredictOptions predict;
};

/// Shared read-only state for every pipeline.
struct Resources {
  const kg::KnowledgeGraph* graph = nullptr;
  const corpus::DocumentSet* corpus = nullptr;
  const embed::EmbeddingIndex* kg_index = nullptr;
  const embed::EmbeddingIndex* doc_index = nullptr;
  const embed::Embedder* embedder = nullptr;
  const linkpred::LinkModel* model = nullptr;
  const llm::Gateway* gateway = nullptr;
  const llm::PromptLibrary* prompts = nullptr;
  PipelineSettings settings;
};

/// One turn's view of the agents: renders prompts, calls the gateway, and
/// records every exchange in the trace.
class Pipeline {
 public:
  explicit Pipeline(const Resources& resources, llm::CallSink sink = {});

  const Resources& resources() const { return res_; }
  const kg::KnowledgeGraph& graph() const { return *res_.graph; }
  const std::vector<TraceEntry>& trace() const { return trace_; }
  std::vector<TraceEntry> take_trace() { return std::move(trace_); }

  /// Renders prompt `prompt` and sends it to `agent`.
  std::string ask(const std::string& agent, const std::string& prompt,
                  const std::map<std::string, std::string>& bindings);

 private:
  const Resources& res_;
  llm::CallSink sink_;
  std::vector<TraceEntry> trace_;
};

// ---- knowledge-graph path -------------------------------------------------------

/// Namespaces, relation names, and up to three sample triples per relation.
std::string schema_summary(const kg::KnowledgeGraph& graph);

/// Strips Markdown code fences and surrounding whitespace from an agent reply.
std::string extract_query(std::string_view reply);

struct CypherAttempt {
  std::string query;
  std::optional<std::string> diagnostic;  // validation or execution failure
  std::optional<std::size_t> rows;        // set when the query executed
};

struct CypherOutcome {
  std::string query;
  cypher::ResultTable table;
  std::vector<CypherAttempt> attempts;
  bool reformulated = false;
};

class VerificationFailure : public Error {
 public:
  VerificationFailure(const std::string& what, std::vector<CypherAttempt> attempts)
      : Error(what), attempts_(std::move(attempts)) {}
  const std::vector<CypherAttempt>& attempts() const { return attempts_; }

 private:
  std::vector<CypherAttempt> attempts_;
};

/// Draft, validate, repair with the verification agent, execute. An empty
/// result triggers one reformulation; if that is empty too, or fails, the last
/// executing query is returned. Throws VerificationFailure when no attempt
/// validates, InvalidArgument when max_attempts < 1.
CypherOutcome generate_verified_cypher(Pipeline& p, const std::string& question,
                                       const std::vector<EntityMatch>& entities, int max_attempts);

// ---- literature path ------------------------------------------------------------

struct LiteratureHit {
  const corpus::Document* document = nullptr;
  embed::DocumentScore score;
  std::vector<std::string> chunks;
  std::string rationale;
};

/// Candidates own a top-50 chunk; the best `top_docs` by weighted score go to
/// the text evaluator, and documents it labels irrelevant are dropped. The
/// result keeps rank order. Throws InvalidArgument when the index is empty.
std::vector<LiteratureHit> literature_search(Pipeline& p, const std::string& question, std::size_t top_docs);

/// Stable grouping: original contributions, reviews, case reports, other.
std::vector<LiteratureHit> group_by_article_type(std::vector<LiteratureHit> hits);

// ---- prediction path ------------------------------------------------------------

/// Directed edges among the given nodes, fetched with a generated query.
CypherEvidence existing_relations(const kg::KnowledgeGraph& graph, const std::vector<kg::NodeId>& nodes);

struct Interpretation {
  std::string text;
  CypherEvidence relations;
  bool fallback = false;  // interpreter failed; template-only prose
};

/// Sections: predicted probability, influential edges, implications,
/// reliability. With an empty top-k only the probability section is written.
Interpretation interpret_prediction(Pipeline& p, const linkpred::Prediction& prediction,
                                    const explain::Explanation& explanation);

/// (drugs) x (diseases) from linked entities; a drug class contributes every
/// drug linked to it or to a class beneath it.
std::vector<linkpred::CandidatePair> candidate_pairs(const kg::KnowledgeGraph& graph,
                                                     const std::vector<EntityMatch>& entities,
                                                     const PredictOptions& options);

// ---- routing and turns ----------------------------------------------------------

enum class CommandKind { query, predict, search, summarize, chat };

std::string_view to_string(CommandKind k);

struct Command {
  CommandKind kind = CommandKind::chat;
  std::string payload;
  std::optional<std::string> usage_error;
};

Command route(std::string_view input);

AgentResponse respond_query(Pipeline& p, const std::string& question);
AgentResponse respond_search(Pipeline& p, const std::string& question);
/// `id_prefix` makes prediction ids unique within a service.
AgentResponse respond_predict(Pipeline& p, const std::string& request, const std::string& id_prefix);
AgentResponse respond_chat(Pipeline& p, const std::string& history, const std::string& message);

struct SummaryOutput {
  std::string text;
  std::string path;
};

/// Summarizes a transcript into <out_dir>/summary_<id>_<timestamp>.txt. Long
/// transcripts are condensed turn by turn first. Throws InvalidArgument for an
/// empty transcript.
SummaryOutput summarize_session(Pipeline& p, const std::vector<std::string>& turns, const std::string& out_dir,
                                const std::string& session_id, const std::string& timestamp);

}  // namespace hypokg::agents
