#pragma once
// Graph view: a relevance-scaled attention message-passing encoder over the
// pruned subgraph, mean readout, and projection to one LLM-sized token.
//
// Per layer and head, for node v and every message source u in N(v) + {v}:
//   m_u   = W_nbr (a_u h_u) + W_edge (a_uv z_uv)     (self term: no edge part)
//   l_u   = LeakyReLU(att . [W_self (a_v h_v) || m_u])
//   h'_v  = sum_u softmax(l)_u m_u
// Heads are concatenated between layers and averaged at the last one.
// Parallel edges each send their own message; direction is ignored.
//
// Weight file:
//   {"node_dim":d,"edge_dim":d,"hidden":h,
//    "layers":[{"heads":[{"w_self":[[..]],"w_nbr":[[..]],"w_edge":[[..]],"a":[..],"slope":0.2}]}]}

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include <nlohmann/json.hpp>

#include "grag/graph.hpp"
#include "grag/mlp.hpp"
#include "grag/pruner.hpp"

namespace grag {

struct GnnHead {
    Matrix w_self;  // hidden x in
    Matrix w_nbr;   // hidden x in
    Matrix w_edge;  // hidden x edge_dim
    std::vector<double> attention;  // 2 * hidden
    double slope = 0.2;

    bool operator==(const GnnHead&) const = default;
};

struct GnnLayer {
    std::vector<GnnHead> heads;

    bool operator==(const GnnLayer&) const = default;
};

struct GnnWeights {
    std::size_t node_dim = 0;
    std::size_t edge_dim = 0;
    std::size_t hidden = 0;
    std::vector<GnnLayer> layers;

    // Input width of layer l: node_dim, then heads(l-1) * hidden.
    std::size_t input_dim(std::size_t layer) const;
    std::size_t output_dim() const { return hidden; }
    // Throws Error{DimensionMismatch} describing the first bad shape.
    void validate() const;
    bool operator==(const GnnWeights&) const = default;
};

GnnWeights gnn_from_json(const nlohmann::json& doc);
nlohmann::json gnn_to_json(const GnnWeights& w);
GnnWeights load_gnn(const std::filesystem::path& path);

// Desk-scale default: 2 layers, 2 heads, hidden 64.
GnnWeights random_gnn(std::uint64_t seed, std::size_t node_dim, std::size_t edge_dim,
                      std::size_t hidden = 64, std::size_t layers = 2, std::size_t heads = 2);

using NodeStates = std::map<NodeId, std::vector<double>>;

struct GnnInput {
    const TextGraph& graph;
    const Subgraph& sub;
    const std::map<NodeId, Embedding>& node_features;
    const std::map<EdgeId, Embedding>& edge_features;
    // nullptr runs the unscaled pass.
    const RelevanceScales* scales = nullptr;
};

// Messages into a node are reduced in a canonical order (sorted by value),
// so relabeling nodes permutes the output exactly.
NodeStates gnn_forward(const GnnInput& input, const GnnWeights& weights);

// Mean of the states in ascending node-id order.
std::vector<double> readout(const NodeStates& states);

struct GraphToken {
    std::vector<double> values;
};

GraphToken project_token(const std::vector<double>& pooled, const MlpWeights& projection,
                         std::size_t d_llm);

} // namespace grag
