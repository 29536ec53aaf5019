#include "hypokg/embed/index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>

#include "hypokg/common/http.hpp"
#include "hypokg/common/text.hpp"
#include "hypokg/embed/tokenize.hpp"
#include "../common/binary.hpp"

namespace hypokg::embed {

std::string_view to_string(SourceKind k) {
  switch (k) {
    case SourceKind::kg_node: return "kg_node";
    case SourceKind::kg_edge: return "kg_edge";
    case SourceKind::doc_section: return "doc_section";
  }
  return "doc_section";
}

std::vector<TokenSpan> chunk_spans(std::size_t token_count, std::size_t size) {
  if (size < 1) throw InvalidArgument("chunk size must be at least 1");
  std::vector<TokenSpan> spans;
  for (std::size_t start = 0; start < token_count; start += size) {
    spans.push_back({start, std::min(token_count, start + size)});
  }
  return spans;
}

std::vector<Chunk> chunk(const std::vector<std::string>& tokens, std::size_t size, SourceKind source,
                         const std::string& source_id) {
  std::vector<Chunk> out;
  for (const auto& span : chunk_spans(tokens.size(), size)) {
    Chunk c;
    c.source = source;
    c.source_id = source_id;
    c.span = span;
    c.text = join(std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(span.start),
                                           tokens.begin() + static_cast<std::ptrdiff_t>(span.end)),
                  " ");
    out.push_back(std::move(c));
  }
  return out;
}

std::string section_chunk_id(std::string_view pmid, std::string_view section, std::size_t index) {
  return std::string(pmid) + "#" + std::string(section) + "#" + std::to_string(index);
}

SectionChunkId parse_section_chunk_id(std::string_view id) {
  const auto first = id.find('#');
  const auto last = id.rfind('#');
  if (first == std::string_view::npos || first == last) {
    throw FormatError("not a section chunk id: '" + std::string(id) + "'");
  }
  SectionChunkId out;
  out.pmid = std::string(id.substr(0, first));
  out.section = std::string(id.substr(first + 1, last - first - 1));
  double idx = 0;
  if (!parse_real(id.substr(last + 1), idx) || idx < 0) {
    throw FormatError("bad chunk index in '" + std::string(id) + "'");
  }
  out.index = static_cast<std::size_t>(idx);
  return out;
}

Vector embed_reference(std::string_view text, std::size_t d) {
  if (d < 8) throw InvalidArgument("embedding dimension must be at least 8");
  Vector v(d, 0.0);
  for (const auto& token : tokenize(text)) {
    const std::uint64_t h = fnv1a64(to_lower_ascii(token));
    const double sign = (h >> 63) != 0 ? -1.0 : 1.0;
    v[h % d] += sign;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

ReferenceEmbedder::ReferenceEmbedder(std::size_t d) : d_(d) {
  if (d < 8) throw InvalidArgument("embedding dimension must be at least 8");
}

HttpEmbedder::HttpEmbedder(std::string base_url, std::string model, std::string api_key, std::size_t dimension)
    : base_url_(std::move(base_url)), model_(std::move(model)), api_key_(std::move(api_key)), d_(dimension) {}

Vector HttpEmbedder::embed(std::string_view text) const {
  nlohmann::json req = {{"model", model_}, {"input", std::string(text)}};
  std::map<std::string, std::string> headers;
  if (!api_key_.empty()) headers["Authorization"] = "Bearer " + api_key_;
  const auto res = http_post(base_url_ + "/embeddings", req.dump(), headers);
  if (res.status < 200 || res.status >= 300) {
    throw Error("embedding service returned HTTP " + std::to_string(res.status) + ": " + res.body.substr(0, 200));
  }
  Vector v;
  try {
    v = nlohmann::json::parse(res.body).at("data").at(0).at("embedding").get<Vector>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("unexpected embedding response: ") + e.what());
  }
  if (v.size() != d_) {
    throw FormatError("embedding service returned dimension " + std::to_string(v.size()) + ", expected " +
                      std::to_string(d_));
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

double cosine(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw InvalidArgument("cosine: dimension mismatch");
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

EmbeddingIndex::EmbeddingIndex(std::size_t dimension) : d_(dimension) {
  if (dimension == 0) throw InvalidArgument("index dimension must be positive");
}

void EmbeddingIndex::add(Chunk chunk, Vector vector) {
  if (vector.size() != d_) {
    throw InvalidArgument("vector dimension " + std::to_string(vector.size()) + " does not match index dimension " +
                          std::to_string(d_));
  }
  for (double x : vector) {
    if (!std::isfinite(x)) throw InvalidArgument("embedding vectors must be finite");
  }
  if (chunk.source == SourceKind::doc_section) {
    by_document_[parse_section_chunk_id(chunk.source_id).pmid].push_back(chunks_.size());
  }
  chunks_.push_back(std::move(chunk));
  vectors_.push_back(std::move(vector));
}

std::vector<SearchHit> EmbeddingIndex::search(const Vector& query, std::size_t top_n) const {
  if (query.size() != d_) throw InvalidArgument("query dimension does not match index dimension");
  if (top_n < 1) throw InvalidArgument("top_n must be at least 1");
  std::vector<SearchHit> hits;
  hits.reserve(chunks_.size());
  for (std::size_t i = 0; i < chunks_.size(); ++i) hits.push_back({&chunks_[i], cosine(query, vectors_[i])});
  auto better = [](const SearchHit& a, const SearchHit& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (a.chunk->source_id != b.chunk->source_id) return a.chunk->source_id < b.chunk->source_id;
    if (a.chunk->span.start != b.chunk->span.start) return a.chunk->span.start < b.chunk->span.start;
    if (a.chunk->source != b.chunk->source) return a.chunk->source < b.chunk->source;
    return a.chunk->text < b.chunk->text;
  };
  const std::size_t n = std::min(top_n, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(n), hits.end(), better);
  hits.resize(n);
  return hits;
}

const std::vector<std::size_t>* EmbeddingIndex::document_entries(std::string_view pmid) const {
  auto it = by_document_.find(pmid);
  return it == by_document_.end() ? nullptr : &it->second;
}

namespace {

constexpr char kMagic[4] = {'R', 'G', 'I', 'X'};
constexpr char kTrailerMagic[4] = {'R', 'G', 'C', 'H'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

using binary::put_le;

void EmbeddingIndex::save(const std::string& path) const {
  std::string out(kMagic, 4);
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d_));
  put_le<std::uint64_t>(out, chunks_.size());
  for (std::size_t i = 0; i < chunks_.size(); ++i) {
    const auto& c = chunks_[i];
    if (c.source_id.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw InvalidArgument("chunk source id too long to persist: " + c.source_id.substr(0, 40));
    }
    out.push_back(static_cast<char>(c.source));
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(c.source_id.size()));
    out += c.source_id;
    for (double x : vectors_[i]) binary::put_f32(out, static_cast<float>(x));
  }
  out.append(kTrailerMagic, 4);
  for (const auto& c : chunks_) {
    put_le<std::uint64_t>(out, c.span.start);
    put_le<std::uint64_t>(out, c.span.end);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(c.text.size()));
    out += c.text;
  }
  write_file(path, out);
}

EmbeddingIndex EmbeddingIndex::load(const std::string& path) {
  binary::Reader in(read_file(path), path);
  if (in.bytes(4) != std::string(kMagic, 4)) throw FormatError(path + ": not an embedding index");
  const auto version = in.le<std::uint32_t>();
  if (version != kVersion) throw FormatError(path + ": unsupported index version " + std::to_string(version));
  EmbeddingIndex index(in.le<std::uint32_t>());
  const auto count = in.le<std::uint64_t>();
  std::vector<Chunk> chunks;
  std::vector<Vector> vectors;
  for (std::uint64_t r = 0; r < count; ++r) {
    Chunk c;
    const auto tag = in.le<std::uint8_t>();
    if (tag > 2) throw FormatError(path + ": bad source tag");
    c.source = static_cast<SourceKind>(tag);
    c.source_id = in.bytes(in.le<std::uint16_t>());
    Vector v(index.d_);
    for (auto& x : v) x = static_cast<double>(in.f32());
    chunks.push_back(std::move(c));
    vectors.push_back(std::move(v));
  }
  if (!in.at_end()) {
    if (in.bytes(4) != std::string(kTrailerMagic, 4)) throw FormatError(path + ": bad trailer");
    for (auto& c : chunks) {
      c.span.start = in.le<std::uint64_t>();
      c.span.end = in.le<std::uint64_t>();
      c.text = in.bytes(in.le<std::uint32_t>());
    }
  }
  for (std::size_t i = 0; i < chunks.size(); ++i) index.add(std::move(chunks[i]), std::move(vectors[i]));
  return index;
}

void index_graph(EmbeddingIndex& index, const kg::KnowledgeGraph& graph, const Embedder& embedder,
                 std::size_t chunk_size) {
  for (kg::NodeIndex n = 0; n < graph.node_count(); ++n) {
    const std::string id = graph.node(n).str();
    std::string text = id;
    if (!graph.node_text(n).empty()) text += " " + graph.node_text(n);
    for (auto& c : chunk(tokenize(text), chunk_size, SourceKind::kg_node, id)) {
      Vector v = embedder.embed(c.text);
      index.add(std::move(c), std::move(v));
    }
  }
  for (const auto& e : graph.edges()) {
    const std::string id = "(" + e.head.str() + ")-[:" + e.relation + "]->(" + e.tail.str() + ")";
    const std::string text = e.head.str() + " " + e.relation + " " + e.tail.str();
    for (auto& c : chunk(tokenize(text), chunk_size, SourceKind::kg_edge, id)) {
      Vector v = embedder.embed(c.text);
      index.add(std::move(c), std::move(v));
    }
  }
}

void index_document(EmbeddingIndex& index, const corpus::Document& doc, const Embedder& embedder,
                    std::size_t chunk_size) {
  auto add_section = [&](const std::string& name, const std::string& text) {
    std::size_t i = 0;
    for (const auto& span_chunk : chunk(tokenize(text), chunk_size, SourceKind::doc_section, "")) {
      Chunk c = span_chunk;
      c.source_id = section_chunk_id(doc.pmid, name, i++);
      Vector v = embedder.embed(c.text);
      index.add(std::move(c), std::move(v));
    }
  };
  for (const auto& s : doc.sections) add_section(s.name, s.text);
  if (!doc.title.empty() && !doc.section("Title")) add_section("Title", doc.title);
  for (const auto& [key, name] : corpus::metadata_sections()) {
    auto it = doc.metadata.find(key);
    if (it != doc.metadata.end() && !it->second.empty() && !doc.section(name)) add_section(name, it->second);
  }
}

void SectionWeights::validate() const {
  for (double w : {abstract, results, metadata, other}) {
    if (!(w >= 0.0)) throw InvalidArgument("section weights must be non-negative");
  }
  if (std::abs(abstract + results + metadata + other - 1.0) > 1e-9) {
    throw InvalidArgument("section weights must sum to 1");
  }
}

double SectionWeights::of(corpus::SectionClass c) const {
  switch (c) {
    case corpus::SectionClass::abstract: return abstract;
    case corpus::SectionClass::results: return results;
    case corpus::SectionClass::metadata: return metadata;
    case corpus::SectionClass::other: return other;
  }
  return other;
}

DocumentScore score_document(const Vector& query, const corpus::Document& doc, const EmbeddingIndex& index,
                             const SectionWeights& weights) {
  weights.validate();
  const auto* entries = index.document_entries(doc.pmid);
  if (!entries || entries->empty()) throw NotFound("document " + doc.pmid + " is not in the index");
  double best[4] = {0, 0, 0, 0};
  bool seen[4] = {false, false, false, false};
  for (auto i : *entries) {
    const auto cls = corpus::classify_section(parse_section_chunk_id(index.chunk_at(i).source_id).section);
    const auto k = static_cast<std::size_t>(cls);
    const double s = cosine(query, index.vector_at(i));
    if (!seen[k] || s > best[k]) best[k] = s;
    seen[k] = true;
  }
  DocumentScore out;
  out.abstract = best[0];
  out.results = best[1];
  out.metadata = best[2];
  out.other = best[3];
  out.score = weights.abstract * out.abstract + weights.results * out.results + weights.metadata * out.metadata +
              weights.other * out.other;
  return out;
}

}  // namespace hypokg::embed
