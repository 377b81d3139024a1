#pragma once
// End-to-end query: embed the question, rank ego-graphs, merge and scale
// them, describe them as text, encode them as a graph token, and bundle the
// result for an LLM client.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "grag/ego_index.hpp"
#include "grag/embed.hpp"
#include "grag/graph.hpp"
#include "grag/mlp.hpp"
#include "grag/soft_prompt.hpp"

namespace grag {

struct QueryWeights {
    MlpWeights node_head;   // phi1
    MlpWeights edge_head;   // phi2
    GnnWeights encoder;
    MlpWeights projection;  // phi3
    // Content hashes by role ("phi1", "phi2", "gnn", "phi3").
    std::map<std::string, std::string> hashes;
};

// Reads the four weight files and records their SHA-256.
QueryWeights load_query_weights(const std::filesystem::path& phi1, const std::filesystem::path& phi2,
                                const std::filesystem::path& gnn, const std::filesystem::path& phi3);

struct QueryConfig {
    std::size_t top_n = 3;
    std::size_t d_llm = 0;
    double prune_eps = 0.0;
    std::string index_hash;  // optional content hash of the index file
};

struct Provenance {
    std::string index_fingerprint;
    std::string index_hash;
    int hops = 0;
    std::size_t top_n = 0;
    std::string template_version;
    std::string embedder;
    std::map<std::string, std::string> weight_hashes;
};

struct RetrievedRef {
    std::size_t rank;
    NodeId center;
    double score;
};

struct PromptBundle {
    std::string query;
    std::string hard_prompt;
    std::vector<double> graph_token;
    std::size_t d_llm = 0;
    std::vector<RetrievedRef> retrieved;
    Provenance provenance;
};

std::string render_hard_prompt(const std::string& question, const std::string& description);

// Errors carry the failing stage name; a fingerprint mismatch aborts before
// anything is embedded.
PromptBundle run_query(const TextGraph& graph, const EgoIndex& index, const std::string& question,
                       const QueryWeights& weights, const QueryConfig& cfg, Embedder& embedder);

// Floats are written with 17 significant digits.
std::string bundle_to_json(const PromptBundle& bundle);

// Files the `weights` command writes: phi1.json, phi2.json, gnn.json, phi3.json.
void write_default_weights(const std::filesystem::path& dir, std::size_t dim, std::size_t d_llm,
                           std::uint64_t seed);

enum class Metric { Hit1, F1, Recall, Acc };
Metric parse_metric(const std::string& name);

struct EvalRecord {
    std::string id;
    std::vector<std::string> prediction;
    std::vector<std::string> gold;
};

// Lowercase (ASCII), trim, collapse internal whitespace runs to one space.
std::string normalize_answer(std::string_view answer);

double compute_metric(const std::vector<EvalRecord>& records, Metric metric);

struct EvalJoin {
    std::vector<EvalRecord> records;       // ascending by id
    std::vector<std::string> unmatched_gold;  // gold ids without a prediction
};

// JSONL: predictions {"id":..,"prediction":[..] or ".."}, gold
// {"id":..,"gold":[..] or ".."}. Errors on duplicate ids and on predictions
// whose id has no gold record.
EvalJoin join_eval_records(std::string_view pred_jsonl, std::string_view gold_jsonl);
EvalJoin load_eval_files(const std::filesystem::path& pred, const std::filesystem::path& gold);

struct DatasetStats {
    std::size_t graphs = 0;
    double mean_nodes = 0.0;
    double mean_edges = 0.0;
};

// A directory of `nodes/*.csv` with matching `edges/*.csv`, or of `*.json`
// graph documents.
DatasetStats dataset_stats(const std::filesystem::path& dir);

} // namespace grag
