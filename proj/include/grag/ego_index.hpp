#pragma once
// Offline index of one pooled embedding per K-hop ego-graph, with exact
// full-scan cosine ranking.
//
// File format (UTF-8, LF):
//   line 1: {"magic":"GRAGIDX","version":1,"dim":d,"k":K,"fingerprint":hex,
//            "entries":n,"embedder":{...}}
//   then n lines, ascending by center:
//            {"center":id,"nodes":c,"edges":c,"z":[17-significant-digit floats]}

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "grag/embed.hpp"
#include "grag/graph.hpp"

namespace grag {

inline constexpr const char* kIndexMagic = "GRAGIDX";
inline constexpr int kIndexVersion = 1;

struct EgoIndexEntry {
    NodeId center = 0;
    int hops = 0;
    Embedding z;
    std::size_t node_count = 0;
    std::size_t edge_count = 0;

    bool operator==(const EgoIndexEntry&) const = default;
};

struct EgoIndexHeader {
    int version = kIndexVersion;
    std::size_t dim = 0;
    int hops = 0;
    std::string fingerprint;
    std::size_t entry_count = 0;
    // Enough to rebuild the query-side embedder; empty object when unknown.
    nlohmann::json embedder = nlohmann::json::object();

    bool operator==(const EgoIndexHeader&) const = default;
};

struct EgoIndex {
    EgoIndexHeader header;
    std::vector<EgoIndexEntry> entries;  // ascending by center

    bool operator==(const EgoIndex&) const = default;
};

struct RankedSubgraph {
    EgoIndexEntry entry;
    double score = 0.0;
    std::size_t rank = 0;  // 1-based
};

struct BuildOptions {
    // 0 = std::thread::hardware_concurrency().
    unsigned workers = 0;
    // Recorded in the index header.
    nlohmann::json embedder_spec = nlohmann::json::object();
};

EgoIndex build_index(const TextGraph& g, int hops, Embedder& embedder,
                     const BuildOptions& options = {});

std::string serialize_index(const EgoIndex& index);
// Errors: Version (bad magic or version), Truncated (missing entries or a
// cut-off line), Parse (malformed entry), FingerprintMismatch (when `graph`
// is given and differs from the indexed one).
EgoIndex deserialize_index(std::string_view text, const TextGraph* graph = nullptr);

void persist_index(const EgoIndex& index, const std::filesystem::path& path);
EgoIndex load_index(const std::filesystem::path& path, const TextGraph* graph = nullptr);

// dot(a, b) / sqrt(|a|^2 |b|^2), clamped to [-1, 1]; 0 when either norm is 0.
double cosine(const Embedding& a, const Embedding& b);

// min(n, |entries|) best entries by (score desc, center asc).
std::vector<RankedSubgraph> rank_top_n(const EgoIndex& index, const Embedding& query, std::size_t n);

} // namespace grag
