#include "hypokg/corpus/corpus.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <set>

#include "hypokg/common/text.hpp"
#include "hypokg/embed/tokenize.hpp"

namespace hypokg::corpus {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(ArticleType t) {
  switch (t) {
    case ArticleType::original_contribution: return "original_contribution";
    case ArticleType::review: return "review";
    case ArticleType::clinical_case_report: return "clinical_case_report";
    case ArticleType::other: return "other";
  }
  return "other";
}

ArticleType article_type_from_string(std::string_view s) {
  for (auto t : {ArticleType::original_contribution, ArticleType::review,
                 ArticleType::clinical_case_report, ArticleType::other}) {
    if (to_string(t) == s) return t;
  }
  throw FormatError("unknown article_type '" + std::string(s) + "'");
}

ArticleType infer_article_type(const std::vector<std::string>& publication_types) {
  bool review = false;
  bool case_report = false;
  bool journal_article = false;
  for (const auto& p : publication_types) {
    const std::string lower = to_lower_ascii(p);
    review = review || lower.find("review") != std::string::npos;
    case_report = case_report || lower.find("case report") != std::string::npos;
    journal_article = journal_article || lower.find("journal article") != std::string::npos;
  }
  if (review) return ArticleType::review;
  if (case_report) return ArticleType::clinical_case_report;
  if (journal_article) return ArticleType::original_contribution;
  return ArticleType::other;
}

std::string_view to_string(SectionClass c) {
  switch (c) {
    case SectionClass::abstract: return "abstract";
    case SectionClass::results: return "results";
    case SectionClass::metadata: return "metadata";
    case SectionClass::other: return "other";
  }
  return "other";
}

SectionClass classify_section(std::string_view section_name) {
  const std::string lower = to_lower_ascii(trim(section_name));
  if (lower.find("abstract") != std::string::npos) return SectionClass::abstract;
  if (lower.find("result") != std::string::npos) return SectionClass::results;
  for (std::string_view m : {"title", "authors", "journal", "keywords", "mesh"}) {
    if (lower == m) return SectionClass::metadata;
  }
  return SectionClass::other;
}

const Section* Document::section(std::string_view name) const {
  for (const auto& s : sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

const std::vector<std::pair<std::string, std::string>>& metadata_sections() {
  static const std::vector<std::pair<std::string, std::string>> kSections = {
      {"journal", "Journal"}, {"keywords", "Keywords"}, {"mesh", "MeSH"}};
  return kSections;
}

const Document* DocumentSet::find(std::string_view pmid) const {
  auto it = std::lower_bound(documents.begin(), documents.end(), pmid,
                             [](const Document& d, std::string_view p) { return d.pmid < p; });
  return it != documents.end() && it->pmid == pmid ? &*it : nullptr;
}

namespace {

std::string scalar_text(const ordered_json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return format_real(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_array()) {
    std::vector<std::string> parts;
    for (const auto& item : v) parts.push_back(scalar_text(item));
    return join(parts, "; ");
  }
  return {};
}

std::optional<Document> parse_record(const ordered_json& rec) {
  if (!rec.is_object() || !rec.contains("pmid")) return std::nullopt;
  Document doc;
  doc.pmid = std::string(trim(scalar_text(rec.at("pmid"))));
  if (doc.pmid.empty()) return std::nullopt;
  if (rec.contains("title")) doc.title = scalar_text(rec.at("title"));

  if (rec.contains("sections")) {
    const auto& sections = rec.at("sections");
    if (sections.is_object()) {
      for (const auto& [name, text] : sections.items()) doc.sections.push_back({name, scalar_text(text)});
    } else if (sections.is_array()) {
      for (const auto& s : sections) {
        if (s.is_object() && s.contains("name")) {
          doc.sections.push_back({scalar_text(s.at("name")), s.contains("text") ? scalar_text(s.at("text")) : ""});
        }
      }
    }
  }
  if (rec.contains("metadata") && rec.at("metadata").is_object()) {
    for (const auto& [key, value] : rec.at("metadata").items()) doc.metadata[key] = scalar_text(value);
  }

  std::vector<std::string> publication_types;
  if (rec.contains("publication_types")) {
    for (const auto& p : rec.at("publication_types")) publication_types.push_back(scalar_text(p));
  }
  if (auto it = doc.metadata.find("publication_type"); it != doc.metadata.end()) {
    publication_types.push_back(it->second);
  }
  if (rec.contains("article_type") && rec.at("article_type").is_string()) {
    doc.article_type = article_type_from_string(rec.at("article_type").get<std::string>());
  } else {
    doc.article_type = infer_article_type(publication_types);
  }
  return doc;
}

}  // namespace

DocumentSet parse_corpus(std::string_view text) {
  std::vector<ordered_json> records;
  const std::string_view body = trim(text);
  try {
    if (body.empty()) {
      // no records
    } else if (body.front() == '[') {
      for (auto& r : ordered_json::parse(body)) records.push_back(std::move(r));
    } else {
      for (const auto& line : split(body, '\n')) {
        const auto t = trim(line);
        if (!t.empty()) records.push_back(ordered_json::parse(t));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("corpus is not valid JSON: ") + e.what());
  }

  DocumentSet set;
  std::set<std::string> seen;
  for (const auto& rec : records) {
    std::optional<Document> doc;
    try {
      doc = parse_record(rec);
    } catch (const nlohmann::json::exception& e) {
      throw IoError(std::string("malformed corpus record: ") + e.what());
    }
    if (!doc) {
      ++set.skipped_missing_pmid;
      continue;
    }
    if (!seen.insert(doc->pmid).second) {
      ++set.skipped_duplicate;
      continue;
    }
    set.documents.push_back(std::move(*doc));
  }
  std::sort(set.documents.begin(), set.documents.end(),
            [](const Document& a, const Document& b) { return a.pmid < b.pmid; });
  return set;
}

DocumentSet load_corpus(const std::string& path) { return parse_corpus(read_file(path)); }

CorpusStats corpus_stats(const DocumentSet& docs) {
  CorpusStats s;
  s.pmids = docs.size();
  for (const auto& d : docs.documents) {
    switch (d.article_type) {
      case ArticleType::original_contribution: ++s.original_contributions; break;
      case ArticleType::review: ++s.review_articles; break;
      case ArticleType::clinical_case_report: ++s.clinical_case_reports; break;
      case ArticleType::other: ++s.other; break;
    }
  }
  return s;
}

std::string format_stats(const CorpusStats& s) {
  return "PMIDs\t" + std::to_string(s.pmids) + "\nOriginal contributions\t" +
         std::to_string(s.original_contributions) + "\nReview articles\t" + std::to_string(s.review_articles) +
         "\nClinical case reports\t" + std::to_string(s.clinical_case_reports) + "\nOther\t" +
         std::to_string(s.other) + "\n";
}

std::string full_text(const Document& doc) {
  std::vector<std::string> parts;
  for (const auto& s : doc.sections) parts.push_back(s.text);
  return join(parts, "\n\n");
}

SummaryResult hierarchical_summarize(const Document& doc, const Summarizer& summarizer,
                                     std::size_t threshold_tokens) {
  if (threshold_tokens == 0) throw InvalidArgument("hierarchical_summarize: threshold must be positive");
  std::vector<Section> sections = doc.sections;
  auto joined = [&] {
    std::vector<std::string> parts;
    for (const auto& s : sections) parts.push_back(s.text);
    return join(parts, "\n\n");
  };
  SummaryResult result;
  result.text = joined();
  while (embed::token_count(result.text) > threshold_tokens) {
    if (result.passes == kSummaryPassCap) {
      result.truncated = true;
      break;
    }
    for (auto& s : sections) {
      try {
        s.text = summarizer(s.text);
      } catch (const std::exception& e) {
        throw SummarizerError(s.name, e.what());
      }
    }
    ++result.passes;
    result.text = joined();
  }
  return result;
}

}  // namespace hypokg::corpus
