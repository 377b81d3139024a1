#include "grag/pipeline.hpp"

#include "grag/error.hpp"
#include "grag/hashing.hpp"
#include "grag/io.hpp"
#include "grag/pruner.hpp"
#include "grag/textualizer.hpp"

namespace grag {

namespace {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        rethrow_with_context(e, std::string("stage ") + name);
    }
}

} // namespace

QueryWeights load_query_weights(const std::filesystem::path& phi1, const std::filesystem::path& phi2,
                                const std::filesystem::path& gnn, const std::filesystem::path& phi3) {
    QueryWeights w;
    w.node_head = load_mlp(phi1);
    w.edge_head = load_mlp(phi2);
    w.encoder = load_gnn(gnn);
    w.projection = load_mlp(phi3);
    w.hashes["phi1"] = sha256_hex(read_file(phi1));
    w.hashes["phi2"] = sha256_hex(read_file(phi2));
    w.hashes["gnn"] = sha256_hex(read_file(gnn));
    w.hashes["phi3"] = sha256_hex(read_file(phi3));
    return w;
}

std::string render_hard_prompt(const std::string& question, const std::string& description) {
    std::string body = description;
    while (!body.empty() && body.back() == '\n') body.pop_back();
    return "Question: " + question + "\n\nRetrieved graph context:\n" + body + "\n\nAnswer:";
}

PromptBundle run_query(const TextGraph& graph, const EgoIndex& index, const std::string& question,
                       const QueryWeights& weights, const QueryConfig& cfg, Embedder& embedder) {
    if (graph.fingerprint() != index.header.fingerprint) {
        throw Error(ErrorKind::FingerprintMismatch,
                    "stage index: index fingerprint " + index.header.fingerprint +
                        " does not match the graph (" + graph.fingerprint() + ")");
    }
    if (cfg.d_llm == 0) throw Error(ErrorKind::InvalidArgument, "stage config: d_llm must be >= 1");
    const int hops = index.header.hops;

    Embedding query = stage("embed-query", [&] {
        Embedding z = embedder.embed_one(question);
        require_finite(z, "query embedding");
        return z;
    });
    auto ranked = stage("rank", [&] { return rank_top_n(index, query, cfg.top_n); });
    PrunedSubgraph pruned = stage("prune", [&] {
        return merge_pruned(ranked, graph, hops, question, query, weights.node_head, weights.edge_head,
                            embedder);
    });
    std::string description = stage("describe", [&] {
        DescribeOptions opts;
        opts.scales = &pruned.scales;
        opts.prune_eps = cfg.prune_eps;
        return describe_retrieval(ranked, graph, hops, opts);
    });
    GraphToken token = stage("encode", [&] {
        std::vector<std::string> texts;
        for (NodeId n : pruned.sub.nodes()) texts.push_back(graph.node_text(n));
        for (EdgeId e : pruned.sub.edges()) texts.push_back(graph.edge(e).text);
        auto z = embedder.embed(texts);
        std::map<NodeId, Embedding> node_features;
        std::map<EdgeId, Embedding> edge_features;
        std::size_t i = 0;
        for (NodeId n : pruned.sub.nodes()) node_features.emplace(n, std::move(z[i++]));
        for (EdgeId e : pruned.sub.edges()) edge_features.emplace(e, std::move(z[i++]));
        GnnInput input{graph, pruned.sub, node_features, edge_features, &pruned.scales};
        auto states = gnn_forward(input, weights.encoder);
        return project_token(readout(states), weights.projection, cfg.d_llm);
    });

    PromptBundle bundle;
    bundle.query = question;
    bundle.hard_prompt = render_hard_prompt(question, description);
    bundle.graph_token = std::move(token.values);
    bundle.d_llm = cfg.d_llm;
    for (const auto& r : ranked) bundle.retrieved.push_back({r.rank, r.entry.center, r.score});
    bundle.provenance.index_fingerprint = index.header.fingerprint;
    bundle.provenance.index_hash = cfg.index_hash;
    bundle.provenance.hops = hops;
    bundle.provenance.top_n = cfg.top_n;
    bundle.provenance.template_version = kTemplateVersion;
    bundle.provenance.embedder = embedder.identity();
    bundle.provenance.weight_hashes = weights.hashes;
    return bundle;
}

std::string bundle_to_json(const PromptBundle& b) {
    std::string out = "{\n";
    out += "  \"query\": " + json_quote(b.query) + ",\n";
    out += "  \"hard_prompt\": " + json_quote(b.hard_prompt) + ",\n";
    out += "  \"d_llm\": " + std::to_string(b.d_llm) + ",\n";
    out += "  \"graph_token\": [";
    for (std::size_t i = 0; i < b.graph_token.size(); ++i) {
        if (i) out += ", ";
        out += format_double(b.graph_token[i]);
    }
    out += "],\n  \"retrieved\": [";
    for (std::size_t i = 0; i < b.retrieved.size(); ++i) {
        const auto& r = b.retrieved[i];
        if (i) out += ", ";
        out += "{\"rank\": " + std::to_string(r.rank) + ", \"center\": " + std::to_string(r.center) +
               ", \"score\": " + format_double(r.score) + "}";
    }
    const auto& p = b.provenance;
    out += "],\n  \"provenance\": {\n";
    out += "    \"index_fingerprint\": " + json_quote(p.index_fingerprint) + ",\n";
    out += "    \"index_hash\": " + json_quote(p.index_hash) + ",\n";
    out += "    \"k\": " + std::to_string(p.hops) + ",\n";
    out += "    \"n\": " + std::to_string(p.top_n) + ",\n";
    out += "    \"template_version\": " + json_quote(p.template_version) + ",\n";
    out += "    \"embedder\": " + json_quote(p.embedder) + ",\n";
    out += "    \"weights\": {";
    bool first = true;
    for (const auto& [role, hash] : p.weight_hashes) {
        out += first ? "" : ", ";
        out += json_quote(role) + ": " + json_quote(hash);
        first = false;
    }
    out += "}\n  }\n}\n";
    return out;
}

void write_default_weights(const std::filesystem::path& dir, std::size_t dim, std::size_t d_llm,
                           std::uint64_t seed) {
    std::filesystem::create_directories(dir);
    const auto encoder = random_gnn(seed + 2, dim, dim);
    write_file(dir / "phi1.json", mlp_to_json(default_scale_head(dim, seed)).dump() + "\n");
    write_file(dir / "phi2.json", mlp_to_json(default_scale_head(dim, seed + 1)).dump() + "\n");
    write_file(dir / "gnn.json", gnn_to_json(encoder).dump() + "\n");
    const auto projection =
        random_mlp(seed + 3, {encoder.output_dim(), d_llm}, Activation::Identity, Activation::Identity);
    write_file(dir / "phi3.json", mlp_to_json(projection).dump() + "\n");
}

} // namespace grag
