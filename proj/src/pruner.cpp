#include "grag/pruner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "grag/error.hpp"
#include "grag/hashing.hpp"

namespace grag {

namespace {

// Sigmoid saturates to exactly 0 or 1 in double precision; scales stay in
// the open interval.
double open_unit(double v) {
    constexpr double lo = std::numeric_limits<double>::denorm_min();
    const double hi = std::nextafter(1.0, 0.0);
    return std::min(std::max(v, lo), hi);
}

double head_scalar(const MlpWeights& head, const Embedding& z, const Embedding& query) {
    auto y = mlp_forward(head, elementwise_distance(z, query).values);
    return open_unit(y.at(0));
}

} // namespace

Embedding elementwise_distance(const Embedding& z, const Embedding& query) {
    if (z.dim() != query.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "elementwise_distance: dims " + std::to_string(z.dim()) +
                                                      " and " + std::to_string(query.dim()));
    }
    Embedding out(z.dim());
    for (std::size_t i = 0; i < z.dim(); ++i) out[i] = std::fabs(z[i] - query[i]);
    return out;
}

MlpWeights default_scale_head(std::size_t dim, std::uint64_t seed) {
    return random_mlp(seed, {dim, std::max<std::size_t>(1, dim / 2), 1}, Activation::Relu,
                      Activation::Sigmoid);
}

void check_scale_head(const MlpWeights& head, std::size_t dim, const char* name) {
    if (head.input_dim != dim) {
        throw Error(ErrorKind::DimensionMismatch, std::string(name) + " expects input dim " +
                                                      std::to_string(head.input_dim) + ", embeddings have " +
                                                      std::to_string(dim));
    }
    if (head.layers.empty() || head.layers.back().act != Activation::Sigmoid) {
        throw Error(ErrorKind::InvalidArgument, std::string(name) + " must end in a sigmoid layer");
    }
    if (head.output_dim() != 1) {
        throw Error(ErrorKind::InvalidArgument, std::string(name) + " must produce one output, not " +
                                                    std::to_string(head.output_dim()));
    }
}

RelevanceScales relevance_scales(const TextGraph& g, const Subgraph& sub, const Embedding& query,
                                 const MlpWeights& node_head, const MlpWeights& edge_head,
                                 Embedder& embedder) {
    check_scale_head(node_head, query.dim(), "node scale head");
    check_scale_head(edge_head, query.dim(), "edge scale head");

    std::vector<std::string> texts;
    texts.reserve(sub.nodes().size() + sub.edges().size());
    for (NodeId n : sub.nodes()) texts.push_back(g.node_text(n));
    for (EdgeId e : sub.edges()) texts.push_back(g.edge(e).text);
    auto z = embedder.embed(texts);

    RelevanceScales scales;
    std::size_t i = 0;
    for (NodeId n : sub.nodes()) {
        try {
            scales.node_alpha.emplace(n, head_scalar(node_head, z[i++], query));
        } catch (const Error& e) {
            rethrow_with_context(e, "node " + std::to_string(n));
        }
    }
    for (EdgeId e : sub.edges()) {
        try {
            scales.edge_alpha.emplace(e, head_scalar(edge_head, z[i++], query));
        } catch (const Error& err) {
            rethrow_with_context(err, "edge " + std::to_string(e));
        }
    }
    return scales;
}

PrunedSubgraph merge_pruned(const std::vector<RankedSubgraph>& ranked, const TextGraph& g, int hops,
                            const std::string& query_text, const Embedding& query,
                            const MlpWeights& node_head, const MlpWeights& edge_head,
                            Embedder& embedder) {
    if (ranked.empty()) throw Error(ErrorKind::InvalidArgument, "merge of an empty ranking");
    std::vector<Subgraph> parts;
    parts.reserve(ranked.size());
    for (const auto& r : ranked) parts.push_back(ego_graph(g, r.entry.center, hops));

    PrunedSubgraph out;
    out.sub = union_subgraphs(parts);
    out.scales = relevance_scales(g, out.sub, query, node_head, edge_head, embedder);
    out.query_hash = hex64(fnv1a64(query_text));
    return out;
}

} // namespace grag
