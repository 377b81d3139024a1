#pragma once
// Query-conditioned soft pruning: every node and edge of the merged top-N
// ego-graphs gets a relevance scale in (0, 1) from a sigmoid-headed MLP over
// |z_text - z_query|.

#include <map>
#include <string>
#include <vector>

#include "grag/ego_index.hpp"
#include "grag/embed.hpp"
#include "grag/graph.hpp"
#include "grag/mlp.hpp"

namespace grag {

struct RelevanceScales {
    std::map<NodeId, double> node_alpha;
    std::map<EdgeId, double> edge_alpha;

    bool operator==(const RelevanceScales&) const = default;
};

struct PrunedSubgraph {
    Subgraph sub;
    RelevanceScales scales;
    std::string query_hash;  // hex FNV-1a of the query text
};

// |z - query| componentwise.
Embedding elementwise_distance(const Embedding& z, const Embedding& query);

// Scale heads default shape: d -> d/2 (relu) -> 1 (sigmoid).
MlpWeights default_scale_head(std::size_t dim, std::uint64_t seed);

// Throws Error{InvalidArgument} unless the head maps `dim` to a single
// sigmoid output.
void check_scale_head(const MlpWeights& head, std::size_t dim, const char* name);

RelevanceScales relevance_scales(const TextGraph& g, const Subgraph& sub, const Embedding& query,
                                 const MlpWeights& node_head, const MlpWeights& edge_head,
                                 Embedder& embedder);

// Union of the ego-graphs of the ranked centers with scales over the union.
PrunedSubgraph merge_pruned(const std::vector<RankedSubgraph>& ranked, const TextGraph& g, int hops,
                            const std::string& query_text, const Embedding& query,
                            const MlpWeights& node_head, const MlpWeights& edge_head,
                            Embedder& embedder);

} // namespace grag
