#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hypokg/common/error.hpp"

namespace hypokg::corpus {

enum class ArticleType { original_contribution, review, clinical_case_report, other };

std::string_view to_string(ArticleType t);
/// Accepts the enum spelling; FormatError otherwise.
ArticleType article_type_from_string(std::string_view s);

/// Infers the type from publication-type strings ("Review", "Case Reports",
/// "Journal Article"); review wins over case report over journal article.
ArticleType infer_article_type(const std::vector<std::string>& publication_types);

enum class SectionClass { abstract, results, metadata, other };

std::string_view to_string(SectionClass c);

/// Case-insensitive: contains "abstract" -> abstract; contains "result" ->
/// results; exactly one of title/authors/journal/keywords/mesh -> metadata;
/// anything else -> other.
SectionClass classify_section(std::string_view section_name);

struct Section {
  std::string name;
  std::string text;
  friend bool operator==(const Section&, const Section&) = default;
};

struct Document {
  std::string pmid;
  std::string title;
  ArticleType article_type = ArticleType::other;
  std::vector<Section> sections;  // input order, names verbatim
  std::map<std::string, std::string> metadata;

  const Section* section(std::string_view name) const;
  friend bool operator==(const Document&, const Document&) = default;
};

/// Metadata keys that become pseudo-sections for retrieval, with the section
/// name each is indexed under.
const std::vector<std::pair<std::string, std::string>>& metadata_sections();

/// Documents sorted by pmid.
struct DocumentSet {
  std::vector<Document> documents;
  std::size_t skipped_missing_pmid = 0;
  std::size_t skipped_duplicate = 0;

  std::size_t size() const { return documents.size(); }
  bool empty() const { return documents.empty(); }
  const Document* find(std::string_view pmid) const;
};

/// JSON array or JSON-lines of document records (schema in docs/corpus_schema.md).
/// Throws IoError when the file cannot be read or parsed.
DocumentSet load_corpus(const std::string& path);
DocumentSet parse_corpus(std::string_view text);

struct CorpusStats {
  std::size_t pmids = 0;
  std::size_t original_contributions = 0;
  std::size_t review_articles = 0;
  std::size_t clinical_case_reports = 0;
  std::size_t other = 0;
};

CorpusStats corpus_stats(const DocumentSet& docs);

/// One "label<TAB>count" line per field, in declaration order.
std::string format_stats(const CorpusStats& stats);

using Summarizer = std::function<std::string(const std::string&)>;

class SummarizerError : public Error {
 public:
  SummarizerError(std::string section, const std::string& what)
      : Error("summarizer failed on section '" + section + "': " + what), section_(std::move(section)) {}
  const std::string& section() const { return section_; }

 private:
  std::string section_;
};

struct SummaryResult {
  std::string text;
  bool truncated = false;
  int passes = 0;
};

constexpr std::size_t kSummaryThreshold = 500;
constexpr int kSummaryPassCap = 3;

/// Section texts joined by a blank line.
std::string full_text(const Document& doc);

/// Summarizes each section independently and concatenates, repeating until
/// the token count is at most `threshold_tokens` or the pass cap is reached
/// (then `truncated` is set).
SummaryResult hierarchical_summarize(const Document& doc, const Summarizer& summarizer,
                                     std::size_t threshold_tokens = kSummaryThreshold);

}  // namespace hypokg::corpus
