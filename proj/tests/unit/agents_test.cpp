#include <gtest/gtest.h>

#include <filesystem>

#include "hypokg/common/text.hpp"
#include "support/fixtures.hpp"
#include "support/world.hpp"

namespace hypokg::agents {
namespace {

using kg::NodeId;
using llm::MockScript;
using testing::World;

MockScript script(std::vector<MockScript::Rule> rules, std::string fallback = "OK") {
  MockScript s;
  s.rules = std::move(rules);
  s.fallback = std::move(fallback);
  return s;
}

// ---- linking ------------------------------------------------------------------

TEST(Link, ExactCanonicalId) {
  World w;
  auto m = link_entities("which drugs treat MeSH_Disease:D002312?", w.graph);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].node.str(), "MeSH_Disease:D002312");
  EXPECT_EQ(m[0].method, MatchMethod::exact_name);
  EXPECT_EQ(m[0].similarity, 1.0);
  EXPECT_EQ(m[0].query_span, "MeSH_Disease:D002312");
  EXPECT_TRUE(link_entities("MeSH_Disease:D0023120", w.graph).empty());
}

TEST(Link, NormalizedName) {
  World w;
  auto m = link_entities("Drugs for Dilated  cardiomyopathy?", w.graph);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].node.str(), "MeSH_Disease:D002311");
  EXPECT_EQ(m[0].method, MatchMethod::normalized_name);
  EXPECT_EQ(m[0].query_span, "Dilated  cardiomyopathy");
  EXPECT_EQ(normalize_name("  Cardiomyopathy,  Dilated. "), "cardiomyopathy dilated");

  auto both = link_entities("is METOPROLOL (DB00335) like DrugBank_Compound:DB00571", w.graph);
  ASSERT_EQ(both.size(), 2u);
  EXPECT_EQ(both[0].node.str(), "DrugBank_Compound:DB00571");
  EXPECT_EQ(both[0].method, MatchMethod::exact_name);
  EXPECT_EQ(both[1].node.str(), "DrugBank_Compound:DB00264");
  EXPECT_EQ(both[1].query_span, "METOPROLOL");
}

TEST(Link, GibberishIsEmpty) {
  World w;
  EXPECT_TRUE(link_entities("qzx vbnm plokij", w.graph, &w.kg_index, &w.embedder).empty());
  EXPECT_TRUE(link_entities("", w.graph, &w.kg_index, &w.embedder).empty());
}

TEST(Link, VectorMatchesStayInGraphAndSorted) {
  World w;
  LinkOptions loose;
  loose.min_similarity = 0.05;
  auto m = link_entities("selective beta adrenergic receptor blocker for ventricular dilatation", w.graph, &w.kg_index,
                         &w.embedder, loose);
  ASSERT_FALSE(m.empty());
  bool vector_seen = false;
  for (std::size_t i = 0; i < m.size(); ++i) {
    EXPECT_TRUE(w.graph.contains(m[i].node));
    EXPECT_GE(m[i].similarity, 0.05);
    EXPECT_LE(m[i].similarity, 1.0);
    if (m[i].method == MatchMethod::vector_similarity) vector_seen = true;
    if (i > 0) EXPECT_GE(m[i - 1].similarity, m[i].similarity);
  }
  EXPECT_TRUE(vector_seen);
}

// ---- cypher loop ------------------------------------------------------------------

const char* kValid = "MATCH (d:DrugBank_Compound)-[:`-treats->`]->(s:MeSH_Disease)\nRETURN d.name AS drug ORDER BY drug";
const char* kUnbound = "MATCH (d:DrugBank_Compound) RETURN x.name";
const char* kEmpty = "MATCH (d:DrugBank_Compound) WHERE d.name = 'none' RETURN d.name AS drug";

TEST(Cypher, ValidFirstTry) {
  World w(testing::scripted_agents({{llm::kAgentCypherQuery, script({}, std::string("```cypher\n") + kValid + "\n```")}}));
  auto res = w.resources();
  Pipeline p(res);
  auto out = generate_verified_cypher(p, "which drugs treat what", {}, 3);
  EXPECT_EQ(out.attempts.size(), 1u);
  EXPECT_EQ(out.query, kValid);
  EXPECT_EQ(out.table.rows.size(), 7u);
  EXPECT_EQ(out.table, cypher::run(out.query, w.graph));
  EXPECT_EQ(p.trace().size(), 1u);
}

TEST(Cypher, RepairAfterBindDiagnostic) {
  World w(testing::scripted_agents({{llm::kAgentCypherQuery, script({}, kUnbound)},
                                    {llm::kAgentQueryVerification, script({{"bind error", kValid}}, kUnbound)}}));
  auto res = w.resources();
  Pipeline p(res);
  auto out = generate_verified_cypher(p, "q", {}, 3);
  ASSERT_EQ(out.attempts.size(), 2u);
  EXPECT_TRUE(out.attempts[0].diagnostic);
  EXPECT_FALSE(out.attempts[0].rows);
  EXPECT_EQ(out.attempts[1].rows, 7u);
  EXPECT_EQ(p.trace()[1].agent, llm::kAgentQueryVerification);
  EXPECT_NE(p.trace()[1].input.find("bind error"), std::string::npos);
}

TEST(Cypher, ExhaustionCarriesTrace) {
  World w(testing::scripted_agents({{llm::kAgentCypherQuery, script({}, "MATCH (n RETURN n")},
                                    {llm::kAgentQueryVerification, script({}, kUnbound)}}));
  auto res = w.resources();
  Pipeline p(res);
  try {
    generate_verified_cypher(p, "q", {}, 3);
    FAIL() << "expected VerificationFailure";
  } catch (const VerificationFailure& e) {
    ASSERT_EQ(e.attempts().size(), 3u);
    for (const auto& a : e.attempts()) EXPECT_TRUE(a.diagnostic);
  }
  EXPECT_THROW(generate_verified_cypher(p, "q", {}, 0), InvalidArgument);
}

TEST(Cypher, EmptyResultReformulatesOnce) {
  World w(testing::scripted_agents({{llm::kAgentCypherQuery, script({{"returned no rows", kValid}}, kEmpty)}}));
  auto res = w.resources();
  Pipeline p(res);
  auto out = generate_verified_cypher(p, "q", {}, 3);
  EXPECT_TRUE(out.reformulated);
  EXPECT_EQ(out.attempts.size(), 2u);
  EXPECT_EQ(out.query, kValid);

  World stuck(testing::scripted_agents({{llm::kAgentCypherQuery, script({}, kEmpty)}}));
  auto res2 = stuck.resources();
  Pipeline p2(res2);
  auto empty = generate_verified_cypher(p2, "q", {}, 5);
  EXPECT_EQ(empty.attempts.size(), 2u);
  EXPECT_TRUE(empty.table.rows.empty());
  EXPECT_EQ(empty.query, kEmpty);
}

TEST(Cypher, Helpers) {
  EXPECT_EQ(extract_query("  MATCH (n) RETURN n  "), "MATCH (n) RETURN n");
  EXPECT_EQ(extract_query("Here:\n```cypher\nMATCH (n)\nRETURN n\n```\nDone"), "MATCH (n)\nRETURN n");
  World w;
  const auto schema = schema_summary(w.graph);
  EXPECT_NE(schema.find("Namespaces: ATC_Class"), std::string::npos);
  EXPECT_NE(schema.find("- `-treats->`: "), std::string::npos);
}

TEST(Query, EvidenceReexecutes) {
  World w(testing::scripted_agents({{llm::kAgentCypherQuery, script({}, kValid)},
                                    {llm::kAgentReasoning, script({}, "Six drugs treat these diseases.")}}));
  auto res = w.resources();
  Pipeline p(res);
  auto r = respond_query(p, "which drugs treat MeSH_Disease:D002312");
  EXPECT_EQ(r.answer_text, "[Querying knowledge graph]\n\nSix drugs treat these diseases.");
  ASSERT_EQ(r.evidence.size(), 1u);
  const auto& ev = std::get<CypherEvidence>(r.evidence[0]);
  EXPECT_EQ(cypher::run(ev.query, w.graph), ev.table);
  ASSERT_EQ(r.agent_trace.size(), 2u);
  EXPECT_NE(r.agent_trace[0].input.find("MeSH_Disease:D002312 (exact_name, 1)"), std::string::npos);
  EXPECT_EQ(r.agent_trace[0].input_digest, digest_hex(r.agent_trace[0].input));
  EXPECT_NE(r.agent_trace[1].input.find(ev.table.to_tsv()), std::string::npos);
}

// ---- literature -------------------------------------------------------------------

std::vector<std::string> pmids(const std::vector<LiteratureHit>& hits) {
  std::vector<std::string> out;
  for (const auto& h : hits) out.push_back(h.document->pmid);
  return out;
}

TEST(Literature, VerbatimAbstractRanksFirst) {
  World w(testing::scripted_agents({{llm::kAgentTextEvaluator, script({}, "relevant: on topic")}}));
  auto res = w.resources();
  Pipeline p(res);
  const auto* doc = w.corpus.find("1625993");
  auto hits = literature_search(p, doc->section("Abstract")->text, 4);
  ASSERT_EQ(hits.size(), 4u);
  EXPECT_EQ(hits[0].document->pmid, "1625993");
  EXPECT_EQ(hits[0].rationale, "on topic");
  for (std::size_t i = 1; i < hits.size(); ++i) EXPECT_GE(hits[i - 1].score.score, hits[i].score.score);
  EXPECT_FALSE(hits[0].chunks.empty());
  EXPECT_EQ(p.trace().size(), 4u);
}

TEST(Literature, EvaluatorDropsAndGroups) {
  World all(testing::scripted_agents({{llm::kAgentTextEvaluator, script({}, "relevant")}}));
  auto res = all.resources();
  Pipeline p(res);
  const std::string q = "atenolol ventricular arrhythmias cardiomyopathy";
  const auto ranked = pmids(literature_search(p, q, 4));
  ASSERT_EQ(ranked.size(), 4u);

  World some(testing::scripted_agents(
      {{llm::kAgentTextEvaluator, script({{"PMID " + ranked[1] + ":", "irrelevant: off topic"}}, "relevant: ok")}}));
  auto res2 = some.resources();
  Pipeline p2(res2);
  auto kept = literature_search(p2, q, 4);
  std::vector<std::string> expected = ranked;
  expected.erase(expected.begin() + 1);
  EXPECT_EQ(pmids(kept), expected);

  auto grouped = group_by_article_type(kept);
  for (std::size_t i = 1; i < grouped.size(); ++i) {
    EXPECT_LE(static_cast<int>(grouped[i - 1].document->article_type),
              static_cast<int>(grouped[i].document->article_type));
  }
}

TEST(Literature, SearchResponseLayout) {
  World w(testing::scripted_agents({{llm::kAgentTextEvaluator, script({}, "relevant: mentions atenolol")},
                                    {llm::kAgentReasoning, script({}, "Mixed support.")}}));
  auto res = w.resources();
  Pipeline p(res);
  auto r = respond_search(p, "atenolol arrhythmogenic cardiomyopathy");
  const auto orig = r.answer_text.find("Original Research Articles");
  const auto cases = r.answer_text.find("Clinical Case Reports");
  const auto synth = r.answer_text.find("Synthesis of Evidence\n\nMixed support.");
  ASSERT_NE(orig, std::string::npos);
  ASSERT_NE(cases, std::string::npos);
  ASSERT_NE(synth, std::string::npos);
  EXPECT_LT(orig, cases);
  EXPECT_LT(cases, synth);
  EXPECT_EQ(r.evidence.size(), 4u);
  EXPECT_NE(r.answer_text.find("(2 original research articles, 2 clinical case reports)"), std::string::npos);
  const std::string synthesis_input = r.agent_trace.back().input;
  for (const auto& e : r.evidence) {
    EXPECT_NE(synthesis_input.find("PMID " + std::get<CitationEvidence>(e).pmid), std::string::npos);
  }
}

TEST(Literature, EmptyIndexThrows) {
  World w;
  auto res = w.resources();
  embed::EmbeddingIndex empty(w.embedder.dimension());
  res.doc_index = &empty;
  Pipeline p(res);
  EXPECT_THROW(literature_search(p, "x", 3), InvalidArgument);
}

// ---- prediction ----------------------------------------------------------------------

explain::Explanation fixture_explanation(std::size_t k) {
  explain::Explanation e;
  e.head = NodeId::parse("DrugBank_Compound:DB00264");
  e.tail = NodeId::parse("MeSH_Disease:D002311");
  e.predicted_probability = 0.9828439950942993;
  e.top_k = {{NodeId::parse("DrugBank_Compound:DB00264"), NodeId::parse("UniProt:P08588"), 0.8301653861999512},
             {NodeId::parse("DrugBank_Compound:DB09999"), NodeId::parse("MeSH_Disease:D002311"), 0.564781904220581},
             {NodeId::parse("ATC_Class:C07"), NodeId::parse("DrugBank_Compound:DB00264"), 0.19364745914936066}};
  e.top_k.resize(std::min(k, e.top_k.size()));
  e.edge_scores = e.top_k;
  return e;
}

linkpred::Prediction fixture_prediction() {
  return {NodeId::parse("DrugBank_Compound:DB00264"), "predicted", NodeId::parse("MeSH_Disease:D002311"),
          0.9828439950942993, 1, false};
}

TEST(Interpret, SectionsInOrderWithExactScores) {
  MockScript echo = script({}, "ECHO {{input}}");
  World w(testing::scripted_agents({{llm::kAgentPredictionInterpreter, echo}}));
  auto res = w.resources();
  Pipeline p(res);
  auto out = interpret_prediction(p, fixture_prediction(), fixture_explanation(3));
  EXPECT_FALSE(out.fallback);
  const auto& t = out.text;
  std::size_t last = 0;
  for (const char* heading : {"Predicted Probability", "Influential Nodes and Paths", "Potential Biological Implications",
                              "Strength and Reliability of the Link Prediction"}) {
    const auto pos = t.find(heading);
    ASSERT_NE(pos, std::string::npos) << heading;
    EXPECT_GE(pos, last);
    last = pos;
  }
  for (const auto& e : fixture_explanation(3).top_k) {
    EXPECT_NE(t.find("(" + e.head.str() + ", " + e.tail.str() + "): " + format_real(e.score)), std::string::npos);
  }
  EXPECT_NE(t.find("0.9828439950942993"), std::string::npos);
  EXPECT_NE(t.find("ECHO Explain"), std::string::npos);
  // Existing relations come from the generated query and re-execute.
  EXPECT_EQ(cypher::run(out.relations.query, w.graph), out.relations.table);
  EXPECT_NE(t.find("- DrugBank_Compound:DB00264 -[-drug_targets_protein->]-> UniProt:P08588"), std::string::npos);
}

TEST(Interpret, EmptyTopKHasOnlyProbability) {
  World w;
  auto res = w.resources();
  Pipeline p(res);
  auto out = interpret_prediction(p, fixture_prediction(), fixture_explanation(0));
  EXPECT_EQ(out.text, "Predicted Probability\n\n(DrugBank_Compound:DB00264, MeSH_Disease:D002311): 0.9828439950942993\n");
  EXPECT_TRUE(p.trace().empty());
}

TEST(Interpret, FallsBackWithoutInterpreter) {
  auto configs = llm::mock_agent_configs();
  configs.erase(llm::kAgentPredictionInterpreter);
  World w(configs);
  auto res = w.resources();
  Pipeline p(res);
  auto out = interpret_prediction(p, fixture_prediction(), fixture_explanation(2));
  EXPECT_TRUE(out.fallback);
  EXPECT_NE(out.text.find("No interpreter output is available."), std::string::npos);
  EXPECT_NE(out.text.find("Strength and Reliability"), std::string::npos);
  auto wrong = fixture_prediction();
  wrong.tail = NodeId::parse("MeSH_Disease:D002312");
  EXPECT_THROW(interpret_prediction(p, wrong, fixture_explanation(2)), InvalidArgument);
}

TEST(Predict, CandidatePairsFromClassAndDisease) {
  World w;
  auto entities = link_entities("ATC_Class:C07 drugs for MeSH_Disease:D002311", w.graph);
  auto pairs = candidate_pairs(w.graph, entities, {});
  ASSERT_EQ(pairs.size(), 5u);
  EXPECT_EQ(pairs[0].head, "DrugBank_Compound:DB00187");
  EXPECT_EQ(pairs[0].tail, "MeSH_Disease:D002311");
  EXPECT_TRUE(candidate_pairs(w.graph, link_entities("MeSH_Disease:D002311", w.graph), {}).empty());
}

TEST(Predict, ExplainsTopPredictions) {
  World w;
  w.train_model(0, 200);
  w.settings.predict.top_n = 2;
  w.settings.predict.explain_k = 4;
  testing::TempDir tmp;
  w.settings.predict.artifact_dir = tmp.file("explanations");
  auto res = w.resources();
  Pipeline p(res);
  auto r = respond_predict(p, "beta blockers ATC_Class:C07 for dilated cardiomyopathy", "s1-t1");
  ASSERT_EQ(r.evidence.size(), 3u);
  const auto& first = std::get<PredictionEvidence>(r.evidence[0]);
  EXPECT_EQ(first.id, "s1-t1-1");
  EXPECT_EQ(first.prediction.tail.str(), "MeSH_Disease:D002311");
  ASSERT_TRUE(first.explanation);
  EXPECT_LE(first.explanation->top_k.size(), 4u);
  EXPECT_EQ(first.artifacts.size(), 2u);
  EXPECT_TRUE(std::filesystem::exists(first.artifacts[0]));
  EXPECT_EQ(std::get<PredictionEvidence>(r.evidence[1]).id, "s1-t1-2");
  EXPECT_TRUE(std::holds_alternative<CypherEvidence>(r.evidence[2]));
  EXPECT_NE(r.answer_text.find("[Performing Explainable Link Prediction]"), std::string::npos);
  EXPECT_NE(r.answer_text.find(format_real(first.prediction.probability)), std::string::npos);
  for (const auto& e : first.explanation->top_k) EXPECT_NE(r.answer_text.find(format_real(e.score)), std::string::npos);

  auto none = respond_predict(p, "nothing linkable here", "x");
  EXPECT_TRUE(none.evidence.empty());
  EXPECT_NE(none.answer_text.find("Could not identify"), std::string::npos);

  World untrained;
  auto res2 = untrained.resources();
  Pipeline p2(res2);
  EXPECT_THROW(respond_predict(p2, "ATC_Class:C07 MeSH_Disease:D002311", "x"), InvalidArgument);
}

// ---- routing and summary -----------------------------------------------------------

TEST(Route, Keywords) {
  auto q = route("query \"What example of drug?\"");
  EXPECT_EQ(q.kind, CommandKind::query);
  EXPECT_EQ(q.payload, "What example of drug?");
  EXPECT_FALSE(q.usage_error);

  auto s = route("summarize");
  EXPECT_EQ(s.kind, CommandKind::summarize);
  EXPECT_EQ(s.payload, "");
  EXPECT_FALSE(s.usage_error);

  auto c = route("hello there");
  EXPECT_EQ(c.kind, CommandKind::chat);
  EXPECT_EQ(c.payload, "hello there");

  EXPECT_EQ(route("PREDICT 'x y'").kind, CommandKind::predict);
  EXPECT_EQ(route("PREDICT 'x y'").payload, "x y");
  EXPECT_EQ(route("  search   \xE2\x80\x9Cquoted\xE2\x80\x9D ").payload, "quoted");
  EXPECT_TRUE(route("search").usage_error);
  EXPECT_TRUE(route("query \"\"").usage_error);
  EXPECT_EQ(route("queries are fun").kind, CommandKind::chat);
}

TEST(Summary, WritesTimestampedFiles) {
  World w(testing::scripted_agents({{llm::kAgentSummarizer, script({}, "SUMMARY")}}));
  auto res = w.resources();
  Pipeline p(res);
  testing::TempDir tmp;
  auto a = summarize_session(p, {"User: hi\nhello"}, tmp.path().string(), "s1", "20261019T120000Z");
  EXPECT_EQ(a.text, "SUMMARY");
  EXPECT_EQ(read_file(a.path), "SUMMARY");
  EXPECT_EQ(std::filesystem::path(a.path).filename(), "summary_s1_20261019T120000Z.txt");
  auto b = summarize_session(p, {"turn"}, tmp.path().string(), "s2", "20261019T120000Z");
  EXPECT_NE(a.path, b.path);
  auto again = summarize_session(p, {"turn"}, tmp.path().string(), "s1", "20261019T120000Z");
  EXPECT_NE(again.path, a.path);
  EXPECT_THROW(summarize_session(p, {}, tmp.path().string(), "s3", "t"), InvalidArgument);
}

TEST(Summary, LongTranscriptIsCondensedFirst) {
  World w(testing::scripted_agents({{llm::kAgentSummarizer, script({{"Summarize the following text", "short"}}, "FINAL")}}));
  w.settings.summary_budget_tokens = 20;
  auto res = w.resources();
  Pipeline p(res);
  testing::TempDir tmp;
  std::string long_turn;
  for (int i = 0; i < 40; ++i) long_turn += "word" + std::to_string(i) + " ";
  auto out = summarize_session(p, {long_turn, long_turn}, tmp.path().string(), "s", "t");
  EXPECT_EQ(out.text, "FINAL");
  ASSERT_EQ(p.trace().size(), 3u);
  EXPECT_NE(p.trace()[0].input.find("Summarize the following text"), std::string::npos);
  EXPECT_NE(p.trace()[2].input.find("short\n\nshort"), std::string::npos);
}

TEST(Json, ResponseShape) {
  AgentResponse r;
  r.answer_text = "a";
  r.evidence.push_back(CypherEvidence{"MATCH (n) RETURN n.name AS n LIMIT 1", {{"n"}, {{cypher::Value("x")}}, 0}});
  r.evidence.push_back(CitationEvidence{"1", "T", corpus::ArticleType::review, 0.5, "why", {"1#Abstract#0"}});
  r.agent_trace.push_back({"reasoning", "in", "out", digest_hex("in"), digest_hex("out")});
  const auto j = to_json(r);
  EXPECT_EQ(j["answer_text"], "a");
  EXPECT_EQ(j["evidence"][0]["cypher_query_used"], "MATCH (n) RETURN n.name AS n LIMIT 1");
  EXPECT_EQ(j["evidence"][0]["rows"][0][0], "x");
  EXPECT_EQ(j["evidence"][1]["chunks"][0]["section"], "Abstract");
  EXPECT_EQ(j["agent_trace"][0]["input_digest"], digest_hex("in"));
  EXPECT_FALSE(j["agent_trace"][0].contains("input"));
}

}  // namespace
}  // namespace hypokg::agents
