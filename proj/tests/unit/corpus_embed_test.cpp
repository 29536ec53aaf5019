#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hypokg/common/http.hpp"
#include "hypokg/common/text.hpp"
#include "hypokg/corpus/corpus.hpp"
#include "hypokg/embed/index.hpp"
#include "hypokg/embed/tokenize.hpp"
#include "support/fixtures.hpp"

namespace hypokg {
namespace {

using corpus::ArticleType;
using corpus::SectionClass;
using embed::Chunk;
using embed::EmbeddingIndex;
using embed::SourceKind;
using embed::Vector;

std::string words(std::size_t n, const std::string& stem = "w") {
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < n; ++i) parts.push_back(stem + std::to_string(i));
  return join(parts, " ");
}

// corpus

TEST(Corpus, EmptyArray) {
  auto set = corpus::parse_corpus("[]");
  EXPECT_EQ(set.size(), 0u);
  EXPECT_EQ(set.skipped_missing_pmid, 0u);
}

TEST(Corpus, MissingPmidIsSkippedAndCounted) {
  auto set = corpus::parse_corpus(R"([{"pmid": "1", "title": "a"}, {"title": "no id"}])");
  EXPECT_EQ(set.size(), 1u);
  EXPECT_EQ(set.skipped_missing_pmid, 1u);
}

TEST(Corpus, DuplicateKeepsFirst) {
  auto set = corpus::parse_corpus("{\"pmid\": 7, \"title\": \"first\"}\n{\"pmid\": \"7\", \"title\": \"second\"}\n");
  ASSERT_EQ(set.size(), 1u);
  EXPECT_EQ(set.skipped_duplicate, 1u);
  EXPECT_EQ(set.documents[0].title, "first");
}

TEST(Corpus, UnparseableIsIoError) {
  EXPECT_THROW(corpus::parse_corpus("[{\"pmid\": "), IoError);
  EXPECT_THROW(corpus::load_corpus("/nonexistent/corpus.json"), IoError);
}

TEST(Corpus, SectionOrderAndNamesPreserved) {
  auto set = corpus::parse_corpus(
      R"([{"pmid": "1", "sections": {"Zeta": "z", "Abstract": "a", "results  ": "r"}}])");
  const auto& s = set.documents[0].sections;
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].name, "Zeta");
  EXPECT_EQ(s[1].name, "Abstract");
  EXPECT_EQ(s[2].name, "results  ");
}

TEST(Corpus, SectionsAsArray) {
  auto set = corpus::parse_corpus(R"([{"pmid": "1", "sections": [{"name": "B", "text": "b"}, {"name": "A"}]}])");
  const auto& s = set.documents[0].sections;
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].name, "B");
  EXPECT_EQ(s[1].text, "");
}

TEST(Corpus, Q8FixtureSplit) {
  auto set = corpus::load_corpus(testing::data_path("corpus/q8_citations.json"));
  ASSERT_EQ(set.size(), 4u);
  for (const char* pmid : {"387170", "1625993", "9106603", "19567656"}) EXPECT_NE(set.find(pmid), nullptr) << pmid;
  auto stats = corpus::corpus_stats(set);
  EXPECT_EQ(stats.original_contributions, 2u);
  EXPECT_EQ(stats.clinical_case_reports, 2u);
  EXPECT_EQ(stats.review_articles, 0u);
  EXPECT_EQ(corpus::format_stats(stats),
            "PMIDs\t4\nOriginal contributions\t2\nReview articles\t0\nClinical case reports\t2\nOther\t0\n");
  EXPECT_EQ(set.find("387170")->metadata.at("mesh"), "Atenolol; Arrhythmias, Cardiac; Cardiomyopathies");
}

TEST(Corpus, OrderInsensitive) {
  const std::string a = R"({"pmid": "2", "title": "b"})";
  const std::string b = R"({"pmid": "1", "title": "a"})";
  const std::string c = R"({"pmid": "3", "article_type": "review"})";
  auto x = corpus::parse_corpus(a + "\n" + b + "\n" + c);
  auto y = corpus::parse_corpus(c + "\n" + a + "\n" + b);
  ASSERT_EQ(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(x.documents[i].pmid, y.documents[i].pmid);
    EXPECT_EQ(x.documents[i].title, y.documents[i].title);
    EXPECT_EQ(x.documents[i].article_type, y.documents[i].article_type);
  }
}

TEST(Corpus, ArticleTypeInference) {
  EXPECT_EQ(corpus::infer_article_type({"Journal Article", "Review"}), ArticleType::review);
  EXPECT_EQ(corpus::infer_article_type({"Case Reports", "Journal Article"}), ArticleType::clinical_case_report);
  EXPECT_EQ(corpus::infer_article_type({"Journal Article"}), ArticleType::original_contribution);
  EXPECT_EQ(corpus::infer_article_type({"Editorial"}), ArticleType::other);
  auto set = corpus::parse_corpus(R"([{"pmid": "1", "metadata": {"publication_type": "Review"}}])");
  EXPECT_EQ(set.documents[0].article_type, ArticleType::review);
  EXPECT_THROW(corpus::parse_corpus(R"([{"pmid": "1", "article_type": "poem"}])"), FormatError);
}

TEST(Corpus, ClassifySection) {
  EXPECT_EQ(corpus::classify_section("Abstract"), SectionClass::abstract);
  EXPECT_EQ(corpus::classify_section("Results and Discussion"), SectionClass::results);
  EXPECT_EQ(corpus::classify_section("Methods"), SectionClass::other);
  EXPECT_EQ(corpus::classify_section("MeSH"), SectionClass::metadata);
  EXPECT_EQ(corpus::classify_section("  TITLE "), SectionClass::metadata);
  EXPECT_EQ(corpus::classify_section("Title page"), SectionClass::other);
  EXPECT_EQ(corpus::classify_section("Graphical abstract results"), SectionClass::abstract);
  EXPECT_EQ(corpus::classify_section(""), SectionClass::other);
}

corpus::Document two_sections(std::size_t tokens_each) {
  corpus::Document d;
  d.pmid = "1";
  d.sections = {{"Abstract", words(tokens_each, "a")}, {"Methods", words(tokens_each, "m")}};
  return d;
}

std::string first_n(const std::string& text, std::size_t n) {
  auto toks = embed::tokenize(text);
  toks.resize(std::min(n, toks.size()));
  return join(toks, " ");
}

TEST(Summarize, ShortDocIsIdentity) {
  corpus::Document d;
  d.pmid = "1";
  d.sections = {{"Abstract", words(10)}};
  int calls = 0;
  auto r = corpus::hierarchical_summarize(d, [&](const std::string& s) {
    ++calls;
    return s;
  });
  EXPECT_EQ(r.text, words(10));
  EXPECT_EQ(r.passes, 0);
  EXPECT_FALSE(r.truncated);
  EXPECT_EQ(calls, 0);
}

TEST(Summarize, OnePassOfFirstFifty) {
  auto r = corpus::hierarchical_summarize(two_sections(400), [](const std::string& s) { return first_n(s, 50); });
  EXPECT_EQ(embed::token_count(r.text), 100u);
  EXPECT_EQ(r.passes, 1);
  EXPECT_FALSE(r.truncated);
}

TEST(Summarize, NonShrinkingTruncatesAfterCap) {
  int calls = 0;
  auto r = corpus::hierarchical_summarize(two_sections(400), [&](const std::string& s) {
    ++calls;
    return s;
  });
  EXPECT_TRUE(r.truncated);
  EXPECT_EQ(r.passes, corpus::kSummaryPassCap);
  EXPECT_EQ(calls, 2 * corpus::kSummaryPassCap);
}

TEST(Summarize, NonExpandingNeverGrows) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto d = two_sections(100 + rng.below(400));
    const auto before = embed::token_count(corpus::full_text(d));
    auto r = corpus::hierarchical_summarize(
        d, [&](const std::string& s) { return first_n(s, embed::token_count(s) * 3 / 4); }, 200);
    EXPECT_LE(embed::token_count(r.text), before);
  }
}

TEST(Summarize, FailureCarriesSection) {
  try {
    corpus::hierarchical_summarize(two_sections(400), [](const std::string& s) -> std::string {
      if (s.rfind("m0", 0) == 0) throw std::runtime_error("boom");
      return s;
    });
    FAIL();
  } catch (const corpus::SummarizerError& e) {
    EXPECT_EQ(e.section(), "Methods");
  }
  EXPECT_THROW(corpus::hierarchical_summarize(two_sections(1), [](const std::string& s) { return s; }, 0),
               InvalidArgument);
}

// tokenize and chunk

TEST(Tokenize, Examples) {
  EXPECT_TRUE(embed::tokenize("").empty());
  EXPECT_EQ(embed::tokenize("Atenolol (DB00335)"), (std::vector<std::string>{"Atenolol", "(", "DB00335", ")"}));
  EXPECT_EQ(embed::tokenize("a  b"), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(embed::tokenize("end. next,"), (std::vector<std::string>{"end", ".", "next", ","}));
  EXPECT_EQ(embed::tokenize("\"quoted\""), (std::vector<std::string>{"\"", "quoted", "\""}));
  EXPECT_EQ(embed::tokenize("D-2 x:y"), (std::vector<std::string>{"D-2", "x:y"}));
  EXPECT_EQ(embed::tokenize("..."), (std::vector<std::string>{".", ".", "."}));
}

TEST(Chunk, Windows) {
  auto sizes = [](std::size_t n, std::size_t size) {
    std::vector<std::size_t> out;
    for (auto s : embed::chunk_spans(n, size)) out.push_back(s.end - s.start);
    return out;
  };
  EXPECT_EQ(sizes(45, 20), (std::vector<std::size_t>{20, 20, 5}));
  EXPECT_EQ(sizes(5, 500), (std::vector<std::size_t>{5}));
  EXPECT_TRUE(sizes(0, 20).empty());
  EXPECT_THROW(embed::chunk_spans(3, 0), InvalidArgument);

  auto toks = embed::tokenize(words(45));
  auto chunks = embed::chunk(toks, 20, SourceKind::doc_section, "1#A#0");
  ASSERT_EQ(chunks.size(), 3u);
  std::size_t next = 0;
  std::vector<std::string> rebuilt;
  for (const auto& c : chunks) {
    EXPECT_EQ(c.span.start, next);
    next = c.span.end;
    for (auto& t : embed::tokenize(c.text)) rebuilt.push_back(t);
  }
  EXPECT_EQ(next, 45u);
  EXPECT_EQ(rebuilt, toks);
}

TEST(Chunk, SectionIds) {
  EXPECT_EQ(embed::section_chunk_id("123", "Results", 2), "123#Results#2");
  auto p = embed::parse_section_chunk_id("123#A#B#7");
  EXPECT_EQ(p.pmid, "123");
  EXPECT_EQ(p.section, "A#B");
  EXPECT_EQ(p.index, 7u);
  EXPECT_THROW(embed::parse_section_chunk_id("nohash"), FormatError);
  EXPECT_THROW(embed::parse_section_chunk_id("1#x#y"), FormatError);
}

// embed

TEST(Embed, Reference) {
  auto x = embed::embed_reference("x");
  EXPECT_DOUBLE_EQ(embed::cosine(x, embed::embed_reference("x")), 1.0);
  auto zero = embed::embed_reference("");
  EXPECT_TRUE(std::all_of(zero.begin(), zero.end(), [](double v) { return v == 0.0; }));
  EXPECT_NEAR(embed::cosine(embed::embed_reference("alpha beta"), embed::embed_reference("beta alpha")), 1.0, 1e-12);
  EXPECT_NEAR(embed::cosine(embed::embed_reference("Alpha"), embed::embed_reference("alpha")), 1.0, 1e-12);
  EXPECT_THROW(embed::embed_reference("x", 7), InvalidArgument);
  EXPECT_EQ(embed::embed_reference("x", 8).size(), 8u);
}

TEST(Embed, UnitNorm) {
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    auto v = embed::embed_reference(words(1 + rng.below(60), "t" + std::to_string(i)), 8 + rng.below(300));
    double n = 0;
    for (double x : v) n += x * x;
    EXPECT_NEAR(std::sqrt(n), 1.0, 1e-9);
  }
}

// Independent re-derivation of the hashing scheme.
TEST(Embed, BucketOracle) {
  const std::string tok = "atenolol";
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : tok) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  auto v = embed::embed_reference("ATENOLOL", 64);
  for (std::size_t i = 0; i < 64; ++i) {
    const double want = i == h % 64 ? ((h >> 63) ? -1.0 : 1.0) : 0.0;
    EXPECT_EQ(v[i], want) << i;
  }
}

TEST(Embed, HttpEmbedderRespectsNetworkSwitch) {
  set_network_enabled(false);
  embed::HttpEmbedder e("http://127.0.0.1:1", "m", "", 8);
  EXPECT_THROW(e.embed("x"), NetworkDisabled);
  set_network_enabled(true);
}

TEST(Embed, Cosine) {
  EXPECT_EQ(embed::cosine({0, 0}, {1, 0}), 0.0);
  EXPECT_NEAR(embed::cosine({1, 0}, {-2, 0}), -1.0, 1e-15);
  EXPECT_THROW(embed::cosine({1}, {1, 2}), InvalidArgument);
}

// index

Vector random_vector(Rng& rng, std::size_t d) {
  Vector v(d);
  for (auto& x : v) x = rng.normal();
  return v;
}

Chunk node_chunk(const std::string& id) { return Chunk{SourceKind::kg_node, id, {0, 1}, id}; }

TEST(Index, SearchMatchesBruteForce) {
  Rng rng(3);
  const std::size_t d = 16;
  EmbeddingIndex index(d);
  std::vector<Vector> vs;
  for (int i = 0; i < 100; ++i) {
    vs.push_back(random_vector(rng, d));
    index.add(node_chunk("N:" + std::to_string(i)), vs.back());
  }
  for (int q = 0; q < 20; ++q) {
    auto query = random_vector(rng, d);
    std::vector<std::pair<double, std::string>> oracle;
    for (int i = 0; i < 100; ++i) {
      double dot = 0, na = 0, nb = 0;
      for (std::size_t k = 0; k < d; ++k) {
        dot += query[k] * vs[i][k];
        na += query[k] * query[k];
        nb += vs[i][k] * vs[i][k];
      }
      oracle.push_back({-dot / std::sqrt(na * nb), "N:" + std::to_string(i)});
    }
    std::sort(oracle.begin(), oracle.end());
    auto hits = index.search(query, 100);
    ASSERT_EQ(hits.size(), 100u);
    for (int i = 0; i < 100; ++i) {
      EXPECT_EQ(hits[i].chunk->source_id, oracle[i].second);
      EXPECT_NEAR(hits[i].similarity, -oracle[i].first, 1e-12);
    }
    auto top7 = index.search(query, 7);
    ASSERT_EQ(top7.size(), 7u);
    for (int i = 0; i < 7; ++i) EXPECT_EQ(top7[i].chunk, hits[i].chunk);
  }
}

TEST(Index, SearchEdgeCases) {
  EmbeddingIndex empty(8);
  EXPECT_TRUE(empty.search(Vector(8, 1.0), 5).empty());
  EXPECT_THROW(empty.search(Vector(4, 1.0), 5), InvalidArgument);
  EXPECT_THROW(empty.search(Vector(8, 1.0), 0), InvalidArgument);
  EXPECT_THROW(empty.add(node_chunk("N:x"), Vector(4, 1.0)), InvalidArgument);

  EmbeddingIndex index(8);
  auto v = embed::embed_reference("self", 8);
  index.add(node_chunk("N:b"), embed::embed_reference("other", 8));
  index.add(node_chunk("N:a"), v);
  auto hits = index.search(v, 1);
  EXPECT_EQ(hits[0].chunk->source_id, "N:a");
  EXPECT_NEAR(hits[0].similarity, 1.0, 1e-12);
}

TEST(Index, TiesBreakBySourceId) {
  EmbeddingIndex index(8);
  Vector v(8, 0.0);
  v[0] = 1;
  for (const char* id : {"N:c", "N:a", "N:b"}) index.add(node_chunk(id), v);
  auto hits = index.search(v, 3);
  EXPECT_EQ(hits[0].chunk->source_id, "N:a");
  EXPECT_EQ(hits[1].chunk->source_id, "N:b");
  EXPECT_EQ(hits[2].chunk->source_id, "N:c");
}

TEST(Index, InsertOrderInsensitive) {
  Rng rng(8);
  std::vector<std::pair<Chunk, Vector>> entries;
  for (int i = 0; i < 40; ++i) {
    Vector v(8, 0.0);
    v[rng.below(3)] = 1.0;  // many exact ties
    entries.push_back({node_chunk("N:" + std::to_string(i)), v});
  }
  EmbeddingIndex a(8);
  for (auto& [c, v] : entries) a.add(c, v);
  rng.shuffle(entries);
  EmbeddingIndex b(8);
  for (auto& [c, v] : entries) b.add(c, v);
  for (int q = 0; q < 5; ++q) {
    auto query = random_vector(rng, 8);
    auto ha = a.search(query, 40);
    auto hb = b.search(query, 40);
    for (std::size_t i = 0; i < ha.size(); ++i) EXPECT_EQ(*ha[i].chunk, *hb[i].chunk);
  }
}

TEST(Index, SaveLoadRoundTrip) {
  testing::TempDir tmp;
  embed::ReferenceEmbedder embedder(32);
  EmbeddingIndex index(32);
  embed::index_graph(index, testing::query_fixture_graph(), embedder);
  auto docs = corpus::load_corpus(testing::data_path("corpus/q8_citations.json"));
  for (const auto& d : docs.documents) embed::index_document(index, d, embedder);
  index.save(tmp.file("idx.bin"));
  auto loaded = EmbeddingIndex::load(tmp.file("idx.bin"));
  ASSERT_EQ(loaded.size(), index.size());
  EXPECT_EQ(loaded.dimension(), 32u);
  for (std::size_t i = 0; i < index.size(); ++i) {
    EXPECT_EQ(loaded.chunk_at(i), index.chunk_at(i));
    for (std::size_t k = 0; k < 32; ++k) {
      EXPECT_EQ(loaded.vector_at(i)[k], static_cast<double>(static_cast<float>(index.vector_at(i)[k])));
    }
  }
  auto q = embedder.embed("atenolol arrhythmia");
  auto s1 = embed::score_document(q, *docs.find("387170"), index);
  auto s2 = embed::score_document(q, *docs.find("387170"), loaded);
  EXPECT_NEAR(s1.score, s2.score, 1e-6);
}

TEST(Index, FileHeaderLayout) {
  testing::TempDir tmp;
  EmbeddingIndex index(8);
  Vector v(8, 0.0);
  v[1] = 0.5;
  index.add(Chunk{SourceKind::kg_edge, "ab", {0, 1}, "t"}, v);
  index.save(tmp.file("i.bin"));
  const std::string raw = read_file(tmp.file("i.bin"));
  ASSERT_GE(raw.size(), 4u + 4 + 4 + 8 + 1 + 2 + 2 + 32);
  EXPECT_EQ(raw.substr(0, 4), "RGIX");
  auto u8 = [&](std::size_t i) { return static_cast<unsigned char>(raw[i]); };
  EXPECT_EQ(u8(4), 1);   // version
  EXPECT_EQ(u8(8), 8);   // d
  EXPECT_EQ(u8(12), 1);  // count
  EXPECT_EQ(u8(20), 1);  // kg_edge tag
  EXPECT_EQ(u8(21), 2);  // id length
  EXPECT_EQ(raw.substr(23, 2), "ab");
  // 0.5f = 0x3f000000, little-endian in the second float slot
  EXPECT_EQ(u8(25 + 4 + 3), 0x3f);
  EXPECT_EQ(u8(25 + 4 + 2), 0x00);
  EXPECT_THROW(EmbeddingIndex::load(tmp.write("bad.bin", "RGIX\x02")), FormatError);
  EXPECT_THROW(EmbeddingIndex::load(tmp.write("bad2.bin", "NOPE0000")), FormatError);
}

TEST(Index, GraphAndDocumentChunks) {
  auto g = testing::make_graph({{"DrugBank_Compound:DB00335", "-treats->", "MeSH_Disease:D002311"}});
  embed::ReferenceEmbedder embedder(16);
  EmbeddingIndex index(16);
  embed::index_graph(index, g, embedder);
  ASSERT_EQ(index.size(), 3u);
  EXPECT_EQ(index.chunk_at(2).source, SourceKind::kg_edge);
  EXPECT_EQ(index.chunk_at(2).source_id, "(DrugBank_Compound:DB00335)-[:-treats->]->(MeSH_Disease:D002311)");
  EXPECT_EQ(index.chunk_at(2).text, "DrugBank_Compound:DB00335 - treats - > MeSH_Disease:D002311");  // punctuation peeled

  corpus::Document d;
  d.pmid = "9";
  d.title = "T";
  d.sections = {{"Abstract", words(45)}};
  d.metadata = {{"journal", "J"}, {"year", "2000"}, {"mesh", "M"}};
  EmbeddingIndex di(16);
  embed::index_document(di, d, embedder, 20);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < di.size(); ++i) ids.push_back(di.chunk_at(i).source_id);
  EXPECT_EQ(ids, (std::vector<std::string>{"9#Abstract#0", "9#Abstract#1", "9#Abstract#2", "9#Title#0",
                                           "9#Journal#0", "9#MeSH#0"}));
  ASSERT_NE(di.document_entries("9"), nullptr);
  EXPECT_EQ(di.document_entries("9")->size(), 6u);
}

// score_document with hand-placed vectors so every s_c is exact.
struct ScoreFixture {
  EmbeddingIndex index{8};
  corpus::Document doc;
  ScoreFixture() { doc.pmid = "42"; }
  void put(const std::string& section, Vector v) {
    index.add(Chunk{SourceKind::doc_section, embed::section_chunk_id(doc.pmid, section, 0), {0, 1}, section},
              std::move(v));
  }
};

Vector axis(std::size_t i, double cos_with_e0 = 0.0) {
  Vector v(8, 0.0);
  v[i] = std::sqrt(1.0 - cos_with_e0 * cos_with_e0);
  v[0] = cos_with_e0;
  return v;
}

TEST(Score, WeightExamples) {
  const Vector q = axis(0, 1.0);
  {
    ScoreFixture f;
    f.put("Abstract", q);
    f.put("Results", axis(1));
    f.put("Journal", axis(2));
    f.put("Methods", axis(3));
    EXPECT_NEAR(embed::score_document(q, f.doc, f.index).score, 0.7, 1e-12);
  }
  for (double v : {-0.3, 0.2, 0.9}) {
    ScoreFixture f;
    f.put("Abstract", axis(1, v));
    f.put("Results", axis(2, v));
    f.put("MeSH", axis(3, v));
    f.put("Discussion", axis(4, v));
    EXPECT_NEAR(embed::score_document(q, f.doc, f.index).score, v, 1e-12);
  }
  {
    ScoreFixture f;
    f.put("Abstract", axis(1, 0.5));
    f.put("Results", q);
    f.put("Title", axis(2));
    f.put("Methods", axis(3));
    auto s = embed::score_document(q, f.doc, f.index);
    EXPECT_NEAR(s.score, 0.45, 1e-12);
    EXPECT_NEAR(s.abstract, 0.5, 1e-12);
    EXPECT_NEAR(s.results, 1.0, 1e-12);
  }
}

TEST(Score, MaxWithinClassAndMissingClassesAreZero) {
  const Vector q = axis(0, 1.0);
  ScoreFixture f;
  f.put("Abstract", axis(1, 0.2));
  f.index.add(Chunk{SourceKind::doc_section, "42#Abstract#1", {1, 2}, "x"}, axis(2, 0.6));
  auto s = embed::score_document(q, f.doc, f.index);
  EXPECT_NEAR(s.abstract, 0.6, 1e-12);
  EXPECT_NEAR(s.score, 0.42, 1e-12);
}

TEST(Score, Errors) {
  ScoreFixture f;
  EXPECT_THROW(embed::score_document(axis(0, 1.0), f.doc, f.index), NotFound);
  f.put("Abstract", axis(0, 1.0));
  embed::SectionWeights w{0.5, 0.1, 0.1, 0.1};
  EXPECT_THROW(embed::score_document(axis(0, 1.0), f.doc, f.index, w), InvalidArgument);
  EXPECT_NO_THROW(embed::SectionWeights{}.validate());
}

TEST(Score, AbstractMatchOutranksMethodsMatch) {
  embed::ReferenceEmbedder embedder;
  const std::string hit = "atenolol suppressed ventricular tachycardia in arrhythmogenic cardiomyopathy";
  const std::string filler = "patients were enrolled at two centres and followed for twelve months";
  corpus::Document a;
  a.pmid = "1";
  a.sections = {{"Abstract", hit}, {"Methods", filler}};
  corpus::Document m;
  m.pmid = "2";
  m.sections = {{"Abstract", filler}, {"Methods", hit}};
  EmbeddingIndex index(embedder.dimension());
  embed::index_document(index, a, embedder);
  embed::index_document(index, m, embedder);
  auto q = embedder.embed("atenolol ventricular tachycardia cardiomyopathy");
  EXPECT_GT(embed::score_document(q, a, index).score, embed::score_document(q, m, index).score);
}

}  // namespace
}  // namespace hypokg
