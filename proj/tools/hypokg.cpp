#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "hypokg/common/text.hpp"
#include "hypokg/corpus/corpus.hpp"
#include "hypokg/cypher/engine.hpp"
#include "hypokg/embed/index.hpp"
#include "hypokg/explain/explain.hpp"
#include "hypokg/kg/io.hpp"
#include "hypokg/kg/ops.hpp"
#include "hypokg/linkpred/gcn.hpp"
#include "hypokg/linkpred/predict.hpp"
#include "hypokg/service/service.hpp"

namespace fs = std::filesystem;
using namespace hypokg;

namespace {

kg::KnowledgeGraph load_graph(const std::string& path, const std::string& node_text = {},
                              const std::string& node_features = {}) {
  kg::GraphBuilder builder;
  const auto report = kg::load_edge_list_into(builder, path, kg::Provenance::knowledge_base);
  if (report.malformed) std::cerr << path << ": skipped " << report.malformed << " malformed lines\n";
  if (!node_features.empty()) kg::attach_node_features(builder, kg::load_node_features(node_features));
  if (!node_text.empty()) kg::attach_node_text(builder, kg::load_node_text(node_text));
  return builder.build();
}

std::string fixed4(double v) { return format_fixed(v, 4); }

std::string opt4(const std::optional<double>& v) { return v ? fixed4(*v) : std::string("n/a"); }

void print_summary(const kg::KnowledgeGraph& g) {
  const auto s = kg::graph_summary(g);
  bool weighted = false;
  for (const auto& e : g.edges()) weighted = weighted || e.weight.has_value();
  std::cout << "Summary of the Knowledge Graph:\n"
            << "Number of nodes: " << s.node_count << "\n"
            << "Number of edges: " << s.edge_count << "\n"
            << "Average node degree: " << format_fixed(s.average_degree, 2) << "\n"
            << "Number of node features: " << s.feature_dim << "\n"
            << "Contains isolated nodes: " << (s.has_isolated_nodes ? "True" : "False") << "\n"
            << "Contains self-loops: " << (s.has_self_loops ? "True" : "False") << "\n"
            << "Is undirected: True\n"
            << (weighted ? "Edge weights found.\n" : "No edge weights found.\n");
}

void print_metrics(const linkpred::TrainResult& r) {
  const auto& v = r.val;
  const auto& t = r.test;
  const double loss = r.loss_curve.empty() ? 0.0 : r.loss_curve.back();
  std::cout << "\nEpoch: " << r.loss_curve.size() << ", Loss: " << fixed4(loss) << "\n"
            << "Val Accuracy: " << fixed4(v.accuracy) << ", Test Accuracy: " << fixed4(t.accuracy) << "\n"
            << "Val Precision: " << fixed4(v.precision) << ", Test Precision: " << fixed4(t.precision) << "\n"
            << "Val Recall: " << fixed4(v.recall) << ", Test Recall: " << fixed4(t.recall) << "\n"
            << "Val F1 score: " << fixed4(v.f1) << ", Test F1 score: " << fixed4(t.f1) << "\n"
            << "Val ROC AUC: " << opt4(v.auroc) << ", Test ROC AUC: " << opt4(t.auroc) << "\n"
            << "Val AUPRC: " << opt4(v.auprc) << ", Test AUPRC: " << opt4(t.auprc) << "\n"
            << "Model training successful.\n"
            << "Optimal prediction threshold " << format_real(r.model.threshold) << " which achieved f1 "
            << format_real(v.f1) << "\n";
}

struct TrainFlags {
  int epochs = linkpred::TrainConfig{}.epochs;
  std::uint64_t seed = 0;
  int hidden = linkpred::TrainConfig{}.hidden;
  int out = linkpred::TrainConfig{}.out;
  double learning_rate = linkpred::TrainConfig{}.learning_rate;

  void add(CLI::App* app) {
    app->add_option("--epochs", epochs, "Training epochs")->check(CLI::NonNegativeNumber);
    app->add_option("--seed", seed, "Split, negative sampling and initialization seed");
    app->add_option("--hidden", hidden, "Hidden width")->check(CLI::PositiveNumber);
    app->add_option("--out-dim", out, "Embedding width")->check(CLI::PositiveNumber);
    app->add_option("--lr", learning_rate, "Learning rate")->check(CLI::PositiveNumber);
  }
  linkpred::TrainConfig config() const {
    linkpred::TrainConfig c;
    c.epochs = epochs;
    c.seed = seed;
    c.hidden = hidden;
    c.out = out;
    c.learning_rate = learning_rate;
    return c;
  }
};

std::vector<kg::NodeId> parse_seeds(const std::string& text) {
  std::vector<kg::NodeId> seeds;
  for (const auto& part : split(text, ',')) {
    const auto t = trim(part);
    if (!t.empty()) seeds.push_back(kg::NodeId::parse(t));
  }
  if (seeds.empty()) throw InvalidArgument("--disease names no node ids");
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-graph hypothesis exploration: graph tools, link prediction and the research assistant."};
  app.require_subcommand(0, 1);

  std::string config_path;
  bool serve = false;
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string log_dir;
  app.add_option("--config", config_path, "Service config (JSON)");
  app.add_flag("--serve", serve, "Serve the HTTP API instead of the REPL");
  app.add_option("--port", port, "HTTP port")->check(CLI::Range(0, 65535));
  app.add_option("--host", host, "HTTP bind address");
  app.add_option("--log-dir", log_dir, "Session log directory (default ./log)");

  // kg
  auto* kg_cmd = app.add_subcommand("kg", "Knowledge-graph files")->require_subcommand(1);
  auto* filter = kg_cmd->add_subcommand("filter", "Keep nodes within k hops of the seeds");
  int k = kg::kDefaultHops;
  std::string disease, input_file, output_file;
  filter->add_option("--k", k, "Hop count")->check(CLI::NonNegativeNumber);
  filter->add_option("--disease", disease, "Comma-separated seed node ids")->required();
  filter->add_option("--input_file", input_file, "Edge list")->required()->check(CLI::ExistingFile);
  filter->add_option("--output_file", output_file, "Filtered edge list")->required();

  auto* merge = kg_cmd->add_subcommand("merge", "Union of edge lists; the first input wins weight conflicts");
  std::vector<std::string> merge_inputs;
  std::string merge_output;
  merge->add_option("inputs", merge_inputs, "Edge lists")->required()->check(CLI::ExistingFile);
  merge->add_option("--output_file", merge_output, "Merged edge list")->required();

  auto* stats = kg_cmd->add_subcommand("stats", "Graph summary");
  std::string stats_input;
  stats->add_option("input_file", stats_input, "Edge list")->required()->check(CLI::ExistingFile);

  // cypher
  auto* cy = app.add_subcommand("cypher", "Run a Cypher query against an edge list; exit 2 on a diagnostic");
  std::string query, query_file, cy_graph, cy_text;
  auto* q_opt = cy->add_option("--query", query, "Query text");
  auto* f_opt = cy->add_option("--file", query_file, "Query file")->check(CLI::ExistingFile);
  q_opt->excludes(f_opt);
  cy->add_option("--graph", cy_graph, "Edge list")->required()->check(CLI::ExistingFile);
  cy->add_option("--node_text", cy_text, "Node descriptions")->check(CLI::ExistingFile);

  // corpus
  auto* corpus_cmd = app.add_subcommand("corpus", "Literature corpus")->require_subcommand(1);
  auto* cstats = corpus_cmd->add_subcommand("stats", "Counts by article type");
  std::string corpus_path;
  cstats->add_option("path", corpus_path, "Corpus JSON")->required()->check(CLI::ExistingFile);

  // index
  auto* index_cmd = app.add_subcommand("index", "Embedding index")->require_subcommand(1);
  auto* ibuild = index_cmd->add_subcommand("build", "Index graph nodes/edges or corpus sections");
  std::string ib_graph, ib_text, ib_corpus, ib_out;
  std::size_t ib_chunk = 0, dim = embed::kDefaultDimension;
  ibuild->add_option("--graph", ib_graph, "Edge list")->check(CLI::ExistingFile);
  ibuild->add_option("--node_text", ib_text, "Node descriptions")->check(CLI::ExistingFile);
  ibuild->add_option("--corpus", ib_corpus, "Corpus JSON")->check(CLI::ExistingFile);
  ibuild->add_option("--chunk-size", ib_chunk, "Tokens per chunk (default 20 for graphs, 500 for articles)");
  ibuild->add_option("--dimension", dim, "Reference embedding width")->check(CLI::PositiveNumber);
  ibuild->add_option("-o,--output", ib_out, "Index file")->required();
  auto* isearch = index_cmd->add_subcommand("search", "Nearest chunks to a text");
  std::string is_index, is_query;
  std::size_t is_top = 10;
  isearch->add_option("--index", is_index, "Index file")->required()->check(CLI::ExistingFile);
  isearch->add_option("--query", is_query, "Query text")->required();
  isearch->add_option("--top", is_top, "Hits to print")->check(CLI::PositiveNumber);

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the link predictor and save a checkpoint");
  std::string tr_input, tr_out, tr_features;
  TrainFlags tr_flags;
  train_cmd->add_option("-i,--input", tr_input, "Edge list")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--node_features", tr_features, "Node features")->check(CLI::ExistingFile);
  train_cmd->add_option("-o,--output", tr_out, "Checkpoint path")->required();
  tr_flags.add(train_cmd);

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Rank candidate pairs and explain the top predictions");
  std::string pairs_path, pr_input, pr_outdir = ".", checkpoint, pr_features;
  std::size_t top_n = 5, explain_k = 10;
  TrainFlags pr_flags;
  predict_cmd->add_option("-p", pairs_path, "Pairs file")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("-i", pr_input, "Edge list")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("-o", pr_outdir, "Output directory");
  predict_cmd->add_option("-n", top_n, "Predictions to report")->check(CLI::PositiveNumber);
  predict_cmd->add_option("-k", explain_k, "Edges per explanation (0 skips explanations)");
  predict_cmd->add_option("--checkpoint", checkpoint, "Use a saved model instead of training")
      ->check(CLI::ExistingFile);
  predict_cmd->add_option("--node_features", pr_features, "Node features")->check(CLI::ExistingFile);
  pr_flags.add(predict_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (filter->parsed()) {
      const auto g = load_graph(input_file);
      const auto out = kg::k_hop_filter(g, parse_seeds(disease), k);
      kg::save_edge_list(out, output_file);
      std::cout << "kept " << out.node_count() << " nodes and " << out.edge_count() << " edges\n";
      return 0;
    }
    if (merge->parsed()) {
      kg::GraphBuilder builder;
      std::size_t conflicts = 0;
      for (const auto& in : merge_inputs) {
        conflicts += kg::load_edge_list_into(builder, in, kg::Provenance::knowledge_base).weight_conflicts;
      }
      const auto g = builder.build();
      kg::save_edge_list(g, merge_output);
      if (conflicts) std::cerr << conflicts << " weight conflicts resolved in favour of the first input\n";
      std::cout << "merged " << g.node_count() << " nodes and " << g.edge_count() << " edges\n";
      return 0;
    }
    if (stats->parsed()) {
      print_summary(load_graph(stats_input));
      return 0;
    }
    if (cy->parsed()) {
      if (query.empty() && query_file.empty()) throw InvalidArgument("give --query or --file");
      const std::string text = query_file.empty() ? query : read_file(query_file);
      const auto v = cypher::validate(text);
      if (!v.ok()) {
        std::cerr << v.diagnostics->to_string() << '\n';
        return 2;
      }
      std::cout << cypher::run(text, load_graph(cy_graph, cy_text)).to_tsv();
      return 0;
    }
    if (cstats->parsed()) {
      std::cout << corpus::format_stats(corpus::corpus_stats(corpus::load_corpus(corpus_path)));
      return 0;
    }
    if (ibuild->parsed()) {
      if (ib_graph.empty() == ib_corpus.empty()) throw InvalidArgument("give exactly one of --graph or --corpus");
      embed::ReferenceEmbedder embedder(dim);
      embed::EmbeddingIndex index(dim);
      if (!ib_graph.empty()) {
        embed::index_graph(index, load_graph(ib_graph, ib_text), embedder, ib_chunk ? ib_chunk : embed::ChunkSizes{}.kg);
      } else {
        for (const auto& doc : corpus::load_corpus(ib_corpus).documents) {
          embed::index_document(index, doc, embedder, ib_chunk ? ib_chunk : embed::ChunkSizes{}.article);
        }
      }
      index.save(ib_out);
      std::cout << "indexed " << index.size() << " chunks\n";
      return 0;
    }
    if (isearch->parsed()) {
      const auto index = embed::EmbeddingIndex::load(is_index);
      embed::ReferenceEmbedder embedder(index.dimension());
      for (const auto& hit : index.search(embedder.embed(is_query), is_top)) {
        std::cout << format_fixed(hit.similarity, 4) << '\t' << embed::to_string(hit.chunk->source) << '\t'
                  << hit.chunk->source_id << '\t' << hit.chunk->text << '\n';
      }
      return 0;
    }
    if (train_cmd->parsed()) {
      const auto g = load_graph(tr_input, {}, tr_features);
      print_summary(g);
      const auto result = linkpred::train(g, tr_flags.config());
      print_metrics(result);
      linkpred::save_checkpoint(result.model, tr_out);
      std::cout << "Saved checkpoint " << tr_out << '\n';
      return 0;
    }
    if (predict_cmd->parsed()) {
      const auto g = load_graph(pr_input, {}, pr_features);
      print_summary(g);
      linkpred::LinkModel model;
      if (checkpoint.empty()) {
        auto result = linkpred::train(g, pr_flags.config());
        print_metrics(result);
        model = std::move(result.model);
      } else {
        model = linkpred::load_checkpoint(checkpoint);
        std::cout << "\nLoaded checkpoint " << checkpoint << "; prediction threshold "
                  << format_real(model.threshold) << '\n';
      }
      const auto run = linkpred::predict_candidates(model, g, linkpred::read_pairs(pairs_path), top_n);
      for (const auto& s : run.skipped) std::cerr << "skipped: " << s << '\n';
      fs::create_directories(pr_outdir);
      const auto csv = (fs::path(pr_outdir) / "prediction_results.csv").string();
      write_file(csv, linkpred::predictions_csv(run.table));
      for (const auto& p : run.top) {
        std::cout << "\nEdge: " << p.head.str() << "_" << p.tail.str() << "\n"
                  << "Predicted probability: " << format_real(p.probability) << '\n';
        if (explain_k == 0) continue;
        const auto expl = explain::explain_edge(model, g, p.head, p.tail, explain_k);
        for (const auto& e : expl.top_k) {
          std::cout << "('" << e.head.str() << "', '" << e.tail.str() << "') " << format_real(e.score) << '\n';
        }
        std::cout << "('" << p.head.str() << "', '" << p.tail.str() << "') 1.0\n";
        const auto files = explain::export_explanation(expl, pr_outdir);
        std::cout << "Saved to file\n";
        for (const auto& f : files) std::cout << f << '\n';
      }
      std::cout << "\nWrote " << csv << '\n';
      return 0;
    }

    // No subcommand: the research assistant.
    if (config_path.empty()) {
      std::cerr << "error: --config is required for the assistant (see --help)\n";
      return 1;
    }
    auto config = service::load_config(config_path);
    if (!log_dir.empty()) config.log_dir = log_dir;
    if (serve) return service::serve_http(config, host, port, std::cerr);
    return service::run_repl(config, std::cin, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
