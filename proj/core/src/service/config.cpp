#include <filesystem>
#include <fstream>

#include "hypokg/common/text.hpp"
#include "hypokg/kg/io.hpp"
#include "hypokg/service/service.hpp"

namespace hypokg::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (path.empty()) return path;
  fs::path p(path);
  if (p.is_relative() && !base_dir.empty()) p = fs::path(base_dir) / p;
  return p.lexically_normal().string();
}

std::string path_field(const json& j, const char* key, const std::string& base_dir) {
  if (!j.contains(key)) return {};
  if (!j[key].is_string()) throw FormatError(std::string("config: '") + key + "' must be a string");
  return resolve(base_dir, j[key].get<std::string>());
}

std::vector<std::string> path_list(const json& j, const char* key, const std::string& base_dir) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  const auto& v = j[key];
  if (v.is_string()) {
    out.push_back(resolve(base_dir, v.get<std::string>()));
  } else if (v.is_array()) {
    for (const auto& item : v) {
      if (!item.is_string()) throw FormatError(std::string("config: '") + key + "' entries must be strings");
      out.push_back(resolve(base_dir, item.get<std::string>()));
    }
  } else {
    throw FormatError(std::string("config: '") + key + "' must be a string or a list of strings");
  }
  return out;
}

template <typename T>
void read_number(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  if (!j[key].is_number()) throw FormatError(std::string("config: '") + key + "' must be a number");
  if constexpr (std::is_unsigned_v<T>) {
    if (j[key].get<double>() < 0) throw FormatError(std::string("config: '") + key + "' must be non-negative");
  }
  out = j[key].get<T>();
}

}  // namespace

ServiceConfig parse_config(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw FormatError("config: top level must be an object");
  ServiceConfig c;
  if (j.contains("graph")) {
    const auto& g = j["graph"];
    if (!g.is_object()) throw FormatError("config: 'graph' must be an object");
    c.kg_edges = path_list(g, "kg", base_dir);
    c.text_edges = path_list(g, "text", base_dir);
    c.node_text = path_field(g, "node_text", base_dir);
    c.node_features = path_field(g, "node_features", base_dir);
  }
  c.corpus = path_field(j, "corpus", base_dir);
  c.agents = path_field(j, "agents", base_dir);
  c.prompts = path_field(j, "prompts", base_dir);
  c.checkpoint = path_field(j, "checkpoint", base_dir);
  if (j.contains("log_dir")) c.log_dir = path_field(j, "log_dir", base_dir);
  if (j.contains("summary_dir")) c.summary_dir = path_field(j, "summary_dir", base_dir);

  if (j.contains("embedder")) {
    const auto& e = j["embedder"];
    c.embedder.kind = e.value("kind", c.embedder.kind);
    if (c.embedder.kind != "reference" && c.embedder.kind != "http") {
      throw FormatError("config: unknown embedder kind '" + c.embedder.kind + "'");
    }
    read_number(e, "dimension", c.embedder.dimension);
    c.embedder.url = e.value("url", "");
    c.embedder.model = e.value("model", "");
    c.embedder.api_key_file = path_field(e, "api_key_file", base_dir);
    if (c.embedder.kind == "http" && c.embedder.url.empty()) throw FormatError("config: http embedder needs a url");
  }
  if (j.contains("index")) {
    const auto& ix = j["index"];
    read_number(ix, "kg_chunk_size", c.chunk_sizes.kg);
    read_number(ix, "article_chunk_size", c.chunk_sizes.article);
    c.kg_index = path_field(ix, "kg", base_dir);
    c.doc_index = path_field(ix, "documents", base_dir);
  }
  if (j.contains("pipeline")) {
    const auto& p = j["pipeline"];
    auto& s = c.settings;
    read_number(p, "min_similarity", s.linking.min_similarity);
    read_number(p, "max_cypher_attempts", s.max_cypher_attempts);
    read_number(p, "top_docs", s.top_docs);
    read_number(p, "summary_budget_tokens", s.summary_budget_tokens);
    read_number(p, "top_n", s.predict.top_n);
    read_number(p, "explain_k", s.predict.explain_k);
    s.predict.artifact_dir = path_field(p, "artifact_dir", base_dir);
    if (p.contains("section_weights")) {
      const auto& w = p["section_weights"];
      read_number(w, "abstract", s.weights.abstract);
      read_number(w, "results", s.weights.results);
      read_number(w, "metadata", s.weights.metadata);
      read_number(w, "other", s.weights.other);
      s.weights.validate();
    }
    if (p.contains("explain")) {
      const auto& e = p["explain"];
      read_number(e, "lambda_size", s.predict.explain.lambda_size);
      read_number(e, "lambda_entropy", s.predict.explain.lambda_entropy);
      read_number(e, "iterations", s.predict.explain.iterations);
      read_number(e, "learning_rate", s.predict.explain.learning_rate);
    }
  }
  if (c.chunk_sizes.kg == 0 || c.chunk_sizes.article == 0) throw FormatError("config: chunk sizes must be positive");
  if (c.settings.max_cypher_attempts < 1) throw FormatError("config: max_cypher_attempts must be at least 1");
  return c;
}

ServiceConfig load_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
  return parse_config(j, fs::absolute(path).parent_path().string());
}

agents::Resources ServiceData::resources() const {
  agents::Resources r;
  r.graph = &graph;
  r.corpus = &corpus;
  r.kg_index = kg_index.get();
  r.doc_index = doc_index.get();
  r.embedder = embedder.get();
  r.model = model ? &*model : nullptr;
  r.gateway = gateway.get();
  r.prompts = &prompts;
  r.settings = settings;
  return r;
}

std::unique_ptr<ServiceData> load_data(const ServiceConfig& config) {
  std::vector<std::string> required = config.kg_edges;
  required.insert(required.end(), config.text_edges.begin(), config.text_edges.end());
  for (const auto* p : {&config.node_text, &config.node_features, &config.corpus, &config.agents, &config.prompts,
                        &config.checkpoint, &config.kg_index, &config.doc_index, &config.embedder.api_key_file}) {
    if (!p->empty()) required.push_back(*p);
  }
  for (const auto& p : required) {
    if (!fs::exists(p)) throw MissingDataFile(p);
  }
  if (config.kg_edges.empty() && config.text_edges.empty()) {
    throw InvalidArgument("config names no edge lists under 'graph'");
  }

  auto d = std::make_unique<ServiceData>();
  kg::GraphBuilder builder;
  for (const auto& p : config.kg_edges) kg::load_edge_list_into(builder, p, kg::Provenance::knowledge_base);
  for (const auto& p : config.text_edges) kg::load_edge_list_into(builder, p, kg::Provenance::text_mining);
  if (!config.node_features.empty()) kg::attach_node_features(builder, kg::load_node_features(config.node_features));
  if (!config.node_text.empty()) kg::attach_node_text(builder, kg::load_node_text(config.node_text));
  d->graph = builder.build();

  if (!config.corpus.empty()) d->corpus = corpus::load_corpus(config.corpus);

  const auto& e = config.embedder;
  if (e.kind == "http") {
    const std::string key = e.api_key_file.empty() ? std::string() : llm::read_api_key(e.api_key_file);
    d->embedder = std::make_unique<embed::HttpEmbedder>(e.url, e.model, key, e.dimension);
  } else {
    d->embedder = std::make_unique<embed::ReferenceEmbedder>(e.dimension);
  }

  auto load_or_build = [&](const std::string& path, auto build) {
    if (!path.empty()) {
      auto ix = std::make_unique<embed::EmbeddingIndex>(embed::EmbeddingIndex::load(path));
      if (ix->dimension() != d->embedder->dimension()) {
        throw FormatError(path + ": index dimension " + std::to_string(ix->dimension()) +
                          " differs from the embedder's " + std::to_string(d->embedder->dimension()));
      }
      return ix;
    }
    auto ix = std::make_unique<embed::EmbeddingIndex>(d->embedder->dimension());
    build(*ix);
    return ix;
  };
  d->kg_index = load_or_build(config.kg_index, [&](embed::EmbeddingIndex& ix) {
    embed::index_graph(ix, d->graph, *d->embedder, config.chunk_sizes.kg);
  });
  d->doc_index = load_or_build(config.doc_index, [&](embed::EmbeddingIndex& ix) {
    for (const auto& doc : d->corpus.documents) embed::index_document(ix, doc, *d->embedder, config.chunk_sizes.article);
  });

  if (!config.checkpoint.empty()) d->model = linkpred::load_checkpoint(config.checkpoint);
  d->prompts = config.prompts.empty() ? llm::PromptLibrary::defaults() : llm::PromptLibrary::load(config.prompts);
  d->gateway = std::make_unique<llm::Gateway>(config.agents.empty() ? llm::mock_agent_configs()
                                                                      : llm::load_agent_configs(config.agents));
  d->settings = config.settings;
  return d;
}

}  // namespace hypokg::service
