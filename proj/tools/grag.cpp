// grag: command-line front end for indexing, querying, describing and
// evaluating text-attributed graph retrieval.
//
// Exit codes: 0 ok, 2 usage, 3 data error, 4 numeric error.

#include <cstdio>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "grag/ego_index.hpp"
#include "grag/embed.hpp"
#include "grag/error.hpp"
#include "grag/graph.hpp"
#include "grag/hashing.hpp"
#include "grag/io.hpp"
#include "grag/pipeline.hpp"
#include "grag/textualizer.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct EmbedderFlags {
    std::string kind = "hash";
    std::string endpoint;
    std::size_t dim = 64;
    std::string seed_tag = "grag";
    std::size_t batch_size = 64;
    std::size_t max_in_flight = 4;
    int retries = 2;
    int timeout_ms = 30000;
};

grag::EmbedderSpec to_spec(const EmbedderFlags& f) {
    grag::EmbedderSpec spec;
    spec.kind = f.kind;
    spec.dim = f.dim;
    spec.seed_tag = f.seed_tag;
    spec.remote.endpoint = f.endpoint;
    spec.remote.batch_size = f.batch_size;
    spec.remote.max_in_flight = f.max_in_flight;
    spec.remote.retries = f.retries;
    spec.remote.timeout = std::chrono::milliseconds(f.timeout_ms);
    return spec;
}

nlohmann::json spec_to_json(const grag::EmbedderSpec& spec) {
    if (spec.kind == "remote") return {{"kind", "remote"}, {"endpoint", spec.remote.endpoint}};
    return {{"kind", "hash"}, {"dim", spec.dim}, {"seed_tag", spec.seed_tag}};
}

grag::EmbedderSpec spec_from_header(const nlohmann::json& header, const EmbedderFlags& overrides,
                                    bool endpoint_given) {
    grag::EmbedderSpec spec = to_spec(overrides);
    spec.kind = header.value("kind", std::string("hash"));
    if (spec.kind == "hash") {
        spec.dim = header.value("dim", overrides.dim);
        spec.seed_tag = header.value("seed_tag", overrides.seed_tag);
    } else if (!endpoint_given) {
        spec.remote.endpoint = header.value("endpoint", std::string{});
    }
    return spec;
}

void add_embedder_tuning(CLI::App* cmd, EmbedderFlags& f) {
    cmd->add_option("--endpoint", f.endpoint, "Embedding sidecar URL (remote embedder)");
    cmd->add_option("--batch-size", f.batch_size, "Texts per /embed request")->check(CLI::PositiveNumber);
    cmd->add_option("--max-in-flight", f.max_in_flight, "Concurrent /embed requests")->check(CLI::PositiveNumber);
    cmd->add_option("--retries", f.retries, "Retries per failed request");
    cmd->add_option("--timeout-ms", f.timeout_ms, "Per-request timeout");
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
    } else {
        grag::write_file(path, content);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph retrieval-augmented generation: ego-graph index, retrieval and prompt bundles"};
    app.set_config("--config", "", "TOML/INI file mirroring the command-line flags");
    app.require_subcommand(1);

    // index
    std::string graph_path, edges_path, out_path, index_path;
    int hops = 2;
    unsigned workers = 0;
    EmbedderFlags emb;
    auto* index_cmd = app.add_subcommand("index", "Build the ego-graph index of a graph");
    index_cmd->add_option("--graph", graph_path, "Graph document (.json) or nodes .csv")->required();
    index_cmd->add_option("--edges", edges_path, "Edges .csv when --graph is a nodes .csv");
    index_cmd->add_option("--k", hops, "Ego-graph hop count")->required()->check(CLI::PositiveNumber);
    index_cmd->add_option("--embedder", emb.kind, "Embedding provider")
        ->required()
        ->check(CLI::IsMember({"hash", "remote"}));
    index_cmd->add_option("--dim", emb.dim, "Hash embedder dimension (>= 8)");
    index_cmd->add_option("--seed-tag", emb.seed_tag, "Hash embedder seed tag");
    index_cmd->add_option("--workers", workers, "Index build threads (0 = all cores)");
    index_cmd->add_option("--out", out_path, "Index file to write")->required();
    add_embedder_tuning(index_cmd, emb);

    // query
    std::string question, phi1, phi2, gnn, phi3;
    std::size_t top_n = 3, d_llm = 0;
    double prune_eps = 0.0;
    EmbedderFlags query_emb;
    auto* query_cmd = app.add_subcommand("query", "Retrieve and emit a prompt bundle for a question");
    query_cmd->add_option("--graph", graph_path, "Graph document")->required();
    query_cmd->add_option("--edges", edges_path, "Edges .csv when --graph is a nodes .csv");
    query_cmd->add_option("--index", index_path, "Index file built from the same graph")->required();
    query_cmd->add_option("--question", question, "Question text")->required();
    query_cmd->add_option("--top-n", top_n, "Ego-graphs to retrieve")->required()->check(CLI::PositiveNumber);
    query_cmd->add_option("--phi1", phi1, "Node scale head weights")->required()->check(CLI::ExistingFile);
    query_cmd->add_option("--phi2", phi2, "Edge scale head weights")->required()->check(CLI::ExistingFile);
    query_cmd->add_option("--gnn", gnn, "Graph encoder weights")->required()->check(CLI::ExistingFile);
    query_cmd->add_option("--phi3", phi3, "Token projection weights")->required()->check(CLI::ExistingFile);
    query_cmd->add_option("--d-llm", d_llm, "Graph token dimension")->required()->check(CLI::PositiveNumber);
    query_cmd->add_option("--prune-eps", prune_eps, "Drop entities with scale below this from descriptions");
    query_cmd->add_option("--out", out_path, "Bundle file to write")->required();
    add_embedder_tuning(query_cmd, query_emb);

    // describe
    long long center = 0;
    auto* describe_cmd = app.add_subcommand("describe", "Print the hierarchical description of an ego-graph");
    describe_cmd->add_option("--graph", graph_path, "Graph document")->required();
    describe_cmd->add_option("--edges", edges_path, "Edges .csv when --graph is a nodes .csv");
    describe_cmd->add_option("--center", center, "Center node id")->required();
    describe_cmd->add_option("--k", hops, "Hop count")->required()->check(CLI::PositiveNumber);
    describe_cmd->add_option("--out", out_path, "Write to a file instead of stdout");

    // parse
    std::string description_path;
    auto* parse_cmd = app.add_subcommand("parse", "Parse a description back into a graph document");
    parse_cmd->add_option("--description", description_path, "Description text file")
        ->required()
        ->check(CLI::ExistingFile);
    parse_cmd->add_option("--out", out_path, "Graph document to write")->required();

    // eval
    std::string pred_path, gold_path, metric_name;
    auto* eval_cmd = app.add_subcommand("eval", "Score predictions against gold answers");
    eval_cmd->add_option("--pred", pred_path, "Predictions JSONL")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--gold", gold_path, "Gold JSONL")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--metric", metric_name, "Metric")
        ->required()
        ->check(CLI::IsMember({"hit1", "f1", "recall", "acc"}));

    // stats
    std::string dataset_dir;
    auto* stats_cmd = app.add_subcommand("stats", "Average graph statistics of a dataset directory");
    stats_cmd->add_option("--dataset", dataset_dir, "Dataset directory")->required();

    // weights
    std::string weights_dir;
    std::size_t weights_dim = 64;
    std::uint64_t seed = 20240521;
    auto* weights_cmd = app.add_subcommand("weights", "Write seeded default weight files");
    weights_cmd->add_option("--dim", weights_dim, "Embedding dimension")->required()->check(CLI::PositiveNumber);
    weights_cmd->add_option("--d-llm", d_llm, "Graph token dimension")->required()->check(CLI::PositiveNumber);
    weights_cmd->add_option("--seed", seed, "Generator seed");
    weights_cmd->add_option("--out-dir", weights_dir, "Directory for phi1/phi2/gnn/phi3 .json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    auto load = [&] {
        return grag::load_graph(graph_path, edges_path.empty() ? std::nullopt
                                                                : std::optional<std::filesystem::path>(edges_path));
    };

    try {
        if (*index_cmd) {
            auto g = load();
            auto spec = to_spec(emb);
            if (spec.kind == "remote" && spec.remote.endpoint.empty()) {
                std::cerr << "grag index: --endpoint is required with --embedder remote\n";
                return kExitUsage;
            }
            grag::CachedEmbedder embedder(grag::make_embedder(spec));
            grag::BuildOptions opts;
            opts.workers = workers;
            opts.embedder_spec = spec_to_json(spec);
            auto index = grag::build_index(g, hops, embedder, opts);
            grag::persist_index(index, out_path);
            std::cerr << "indexed " << index.entries.size() << " ego-graphs (k=" << hops
                      << ", dim=" << index.header.dim << ")\n";
        } else if (*query_cmd) {
            auto g = load();
            std::string index_text = grag::read_file(index_path);
            auto index = grag::deserialize_index(index_text, &g);
            bool endpoint_given = query_cmd->count("--endpoint") > 0;
            auto spec = spec_from_header(index.header.embedder, query_emb, endpoint_given);
            grag::CachedEmbedder embedder(grag::make_embedder(spec));
            auto weights = grag::load_query_weights(phi1, phi2, gnn, phi3);
            grag::QueryConfig cfg;
            cfg.top_n = top_n;
            cfg.d_llm = d_llm;
            cfg.prune_eps = prune_eps;
            cfg.index_hash = grag::sha256_hex(index_text);
            auto bundle = grag::run_query(g, index, question, weights, cfg, embedder);
            grag::write_file(out_path, grag::bundle_to_json(bundle));
        } else if (*describe_cmd) {
            auto g = load();
            auto ego = grag::ego_graph(g, center, hops);
            write_output(out_path, grag::describe_subgraph(g, ego).text);
        } else if (*parse_cmd) {
            std::string text = grag::read_file(description_path);
            auto to_doc = [](const grag::DescribedGraph& d) {
                nlohmann::json doc;
                doc["root"] = d.root;
                auto& nodes = doc["nodes"] = nlohmann::json::array();
                for (const auto& [id, t] : d.nodes) nodes.push_back({{"id", id}, {"text", t}});
                auto& edges = doc["edges"] = nlohmann::json::array();
                for (const auto& e : d.edges) edges.push_back({{"src", e.src}, {"dst", e.dst}, {"text", e.text}});
                return doc;
            };
            nlohmann::json out;
            if (text.starts_with("SUBGRAPH ")) {
                out["sections"] = nlohmann::json::array();
                for (const auto& s : grag::parse_retrieval(text)) {
                    out["sections"].push_back(
                        {{"rank", s.rank}, {"center", s.center}, {"score", s.score}, {"graph", to_doc(s.graph)}});
                }
            } else {
                out = to_doc(grag::parse_description(text));
            }
            write_output(out_path, out.dump(2) + "\n");
        } else if (*eval_cmd) {
            auto join = grag::load_eval_files(pred_path, gold_path);
            for (const auto& id : join.unmatched_gold) {
                std::cerr << "warning: gold record '" << id << "' has no prediction\n";
            }
            double score = grag::compute_metric(join.records, grag::parse_metric(metric_name));
            std::cout << metric_name << " " << grag::format_double(score) << " (" << join.records.size()
                      << " records)\n";
        } else if (*stats_cmd) {
            auto stats = grag::dataset_stats(dataset_dir);
            char line[256];
            std::snprintf(line, sizeof(line), "{\"graphs\": %zu, \"mean_nodes\": %.4f, \"mean_edges\": %.4f}\n",
                          stats.graphs, stats.mean_nodes, stats.mean_edges);
            std::cout << line;
        } else if (*weights_cmd) {
            grag::write_default_weights(weights_dir, weights_dim, d_llm, seed);
        }
    } catch (const grag::Error& e) {
        std::cerr << "grag: " << grag::to_string(e.kind()) << ": " << e.what() << "\n";
        return e.kind() == grag::ErrorKind::Numeric ? kExitNumeric : kExitData;
    } catch (const std::exception& e) {
        std::cerr << "grag: " << e.what() << "\n";
        return kExitData;
    }
    return 0;
}
