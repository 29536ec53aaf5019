#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "hypokg/corpus/corpus.hpp"
#include "hypokg/kg/graph.hpp"

namespace hypokg::embed {

using Vector = std::vector<double>;

enum class SourceKind : std::uint8_t { kg_node = 0, kg_edge = 1, doc_section = 2 };

std::string_view to_string(SourceKind k);

struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive
  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

struct Chunk {
  SourceKind source = SourceKind::doc_section;
  std::string source_id;
  TokenSpan span;
  std::string text;  // tokens joined by single spaces
  friend bool operator==(const Chunk&, const Chunk&) = default;
};

/// Consecutive windows of `size` tokens, the last possibly shorter.
/// Throws InvalidArgument when size < 1.
std::vector<TokenSpan> chunk_spans(std::size_t token_count, std::size_t size);
std::vector<Chunk> chunk(const std::vector<std::string>& tokens, std::size_t size, SourceKind source,
                         const std::string& source_id);

/// "pmid#section#index".
std::string section_chunk_id(std::string_view pmid, std::string_view section, std::size_t index);

struct SectionChunkId {
  std::string pmid;
  std::string section;
  std::size_t index = 0;
};
/// Inverse of section_chunk_id; the section may itself contain '#'.
SectionChunkId parse_section_chunk_id(std::string_view id);

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dimension() const = 0;
  virtual Vector embed(std::string_view text) const = 0;
};

constexpr std::size_t kDefaultDimension = 256;

/// Signed feature hashing of lowercased tokens, L2-normalized. Text without
/// tokens maps to the zero vector.
Vector embed_reference(std::string_view text, std::size_t d = kDefaultDimension);

class ReferenceEmbedder : public Embedder {
 public:
  explicit ReferenceEmbedder(std::size_t d = kDefaultDimension);
  std::size_t dimension() const override { return d_; }
  Vector embed(std::string_view text) const override { return embed_reference(text, d_); }

 private:
  std::size_t d_;
};

/// OpenAI-compatible POST {base_url}/embeddings. Respects the global network
/// switch; the returned vector is L2-normalized.
class HttpEmbedder : public Embedder {
 public:
  HttpEmbedder(std::string base_url, std::string model, std::string api_key, std::size_t dimension);
  std::size_t dimension() const override { return d_; }
  Vector embed(std::string_view text) const override;

 private:
  std::string base_url_;
  std::string model_;
  std::string api_key_;
  std::size_t d_;
};

double cosine(const Vector& a, const Vector& b);

struct SearchHit {
  const Chunk* chunk = nullptr;
  double similarity = 0.0;
};

/// Exact cosine index over chunks.
class EmbeddingIndex {
 public:
  explicit EmbeddingIndex(std::size_t dimension);

  std::size_t dimension() const { return d_; }
  std::size_t size() const { return chunks_.size(); }
  const Chunk& chunk_at(std::size_t i) const { return chunks_[i]; }
  const Vector& vector_at(std::size_t i) const { return vectors_[i]; }

  /// Throws InvalidArgument on dimension mismatch.
  void add(Chunk chunk, Vector vector);

  /// Similarity descending, ties by source_id, span, then text. Throws
  /// InvalidArgument on dimension mismatch or top_n < 1.
  std::vector<SearchHit> search(const Vector& query, std::size_t top_n) const;

  /// Entry indices of doc_section chunks belonging to `pmid`.
  const std::vector<std::size_t>* document_entries(std::string_view pmid) const;

  /// Header "RGIX", u32 version, u32 d, u64 count, then per record: u8 source
  /// tag, u16 id length, id bytes, d little-endian float32. A trailer holding
  /// spans and chunk text follows the records.
  void save(const std::string& path) const;
  static EmbeddingIndex load(const std::string& path);

 private:
  std::size_t d_;
  std::vector<Chunk> chunks_;
  std::vector<Vector> vectors_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_document_;
};

struct ChunkSizes {
  std::size_t kg = 20;
  std::size_t article = 500;
};

/// Adds one chunk series per node ("<id> <description>") and per edge
/// ("<head> <relation> <tail>").
void index_graph(EmbeddingIndex& index, const kg::KnowledgeGraph& graph, const Embedder& embedder,
                 std::size_t chunk_size = ChunkSizes{}.kg);

/// Adds chunks for every section plus Title/Journal/Keywords/MeSH
/// pseudo-sections taken from the document metadata.
void index_document(EmbeddingIndex& index, const corpus::Document& doc, const Embedder& embedder,
                    std::size_t chunk_size = ChunkSizes{}.article);

struct SectionWeights {
  double abstract = 0.7;
  double results = 0.1;
  double metadata = 0.1;
  double other = 0.1;

  /// Throws InvalidArgument unless non-negative and summing to 1 (1e-9).
  void validate() const;
  double of(corpus::SectionClass c) const;
};

struct DocumentScore {
  double score = 0.0;
  double abstract = 0.0;
  double results = 0.0;
  double metadata = 0.0;
  double other = 0.0;
};

/// Weighted sum of the best chunk cosine per section class (0 for classes
/// without chunks). Throws NotFound when the document has no indexed chunks.
DocumentScore score_document(const Vector& query, const corpus::Document& doc, const EmbeddingIndex& index,
                             const SectionWeights& weights = {});

}  // namespace hypokg::embed
