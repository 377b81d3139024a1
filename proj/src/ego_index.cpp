#include "grag/ego_index.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>
#include <unordered_map>

#include "grag/error.hpp"
#include "grag/io.hpp"

namespace grag {

namespace {

constexpr std::size_t kEmbedChunk = 512;

// Embedding table for every node and edge text, filled center by center so
// a failing embedder call can be attributed to a center id.
struct TextEmbeddings {
    std::vector<Embedding> table;
    std::vector<std::size_t> node_slot;  // by node position
    std::vector<std::size_t> edge_slot;  // by edge id
};

TextEmbeddings embed_graph_texts(const TextGraph& g, const std::vector<std::size_t>& centers,
                                 Embedder& embedder) {
    constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
    TextEmbeddings out;
    out.node_slot.assign(g.node_count(), kUnset);
    out.edge_slot.assign(g.edge_count(), kUnset);

    std::unordered_map<std::string_view, std::size_t> slot_of_text;
    std::vector<std::string> pending;
    std::vector<std::size_t> pending_owner;  // center position introducing each text

    auto slot_for = [&](const std::string& text, std::size_t owner) {
        auto [it, inserted] = slot_of_text.emplace(text, slot_of_text.size());
        if (inserted) {
            pending.push_back(text);
            pending_owner.push_back(owner);
        }
        return it->second;
    };

    auto flush = [&] {
        if (pending.empty()) return;
        std::vector<Embedding> fresh;
        try {
            fresh = embedder.embed(pending);
            if (fresh.size() != pending.size()) {
                throw Error(ErrorKind::Protocol, "embedder returned " + std::to_string(fresh.size()) +
                                                     " vectors for " +
                                                     std::to_string(pending.size()) + " texts");
            }
        } catch (const Error& e) {
            // Retry text by text to name the center whose texts fail.
            for (std::size_t i = 0; i < pending.size(); ++i) {
                try {
                    embedder.embed_one(pending[i]);
                } catch (const Error& inner) {
                    rethrow_with_context(inner, "embedding ego-graph of center " +
                                                    std::to_string(g.nodes()[pending_owner[i]].id));
                }
            }
            rethrow_with_context(e, "embedding graph texts");
        }
        for (auto& v : fresh) out.table.push_back(std::move(v));
        pending.clear();
        pending_owner.clear();
    };

    for (std::size_t pos : centers) {
        out.node_slot[pos] = slot_for(g.nodes()[pos].text, pos);
        for (const auto& nb : g.incident(pos)) {
            if (out.edge_slot[nb.edge] == kUnset) {
                out.edge_slot[nb.edge] = slot_for(g.edge(nb.edge).text, pos);
            }
        }
        if (pending.size() >= kEmbedChunk) flush();
    }
    flush();

    const std::size_t dim = out.table.empty() ? 0 : out.table.front().dim();
    for (std::size_t i = 0; i < out.table.size(); ++i) {
        if (out.table[i].dim() != dim || dim == 0) {
            throw Error(ErrorKind::DimensionMismatch,
                        "embedder produced inconsistent dimensions (" + std::to_string(dim) + " vs " +
                            std::to_string(out.table[i].dim()) + ")");
        }
        require_finite(out.table[i], "text embedding");
    }
    return out;
}

std::string entry_line(const EgoIndexEntry& e) {
    std::string line = "{\"center\":" + std::to_string(e.center) +
                       ",\"nodes\":" + std::to_string(e.node_count) +
                       ",\"edges\":" + std::to_string(e.edge_count) + ",\"z\":[";
    for (std::size_t i = 0; i < e.z.dim(); ++i) {
        if (i) line.push_back(',');
        line += format_double(e.z[i]);
    }
    line += "]}";
    return line;
}

} // namespace

EgoIndex build_index(const TextGraph& g, int hops, Embedder& embedder, const BuildOptions& options) {
    if (hops < 1) throw Error(ErrorKind::InvalidArgument, "hop count must be >= 1");

    std::vector<std::size_t> centers(g.node_count());
    std::iota(centers.begin(), centers.end(), std::size_t{0});
    std::sort(centers.begin(), centers.end(),
              [&g](std::size_t a, std::size_t b) { return g.nodes()[a].id < g.nodes()[b].id; });

    const TextEmbeddings texts = embed_graph_texts(g, centers, embedder);

    EgoIndex index;
    index.header.dim = texts.table.empty() ? embedder.dim() : texts.table.front().dim();
    index.header.hops = hops;
    index.header.fingerprint = g.fingerprint();
    index.header.entry_count = centers.size();
    index.header.embedder = options.embedder_spec;
    index.entries.resize(centers.size());

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(centers.size());
    auto worker = [&] {
        std::vector<const Embedding*> members;
        for (std::size_t i = next++; i < centers.size(); i = next++) {
            try {
                const NodeId center = g.nodes()[centers[i]].id;
                Subgraph ego = ego_graph(g, center, hops);
                members.clear();
                for (NodeId n : ego.nodes()) members.push_back(&texts.table[texts.node_slot[g.position(n)]]);
                for (EdgeId e : ego.edges()) members.push_back(&texts.table[texts.edge_slot[e]]);
                auto& entry = index.entries[i];
                entry.center = center;
                entry.hops = hops;
                entry.z = pool_mean(std::span<const Embedding* const>(members));
                entry.node_count = ego.nodes().size();
                entry.edge_count = ego.edges().size();
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    unsigned workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, centers.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const Error& e) {
            rethrow_with_context(e, "center " + std::to_string(g.nodes()[centers[i]].id));
        }
    }
    return index;
}

std::string serialize_index(const EgoIndex& index) {
    nlohmann::json header = {
        {"magic", kIndexMagic},
        {"version", index.header.version},
        {"dim", index.header.dim},
        {"k", index.header.hops},
        {"fingerprint", index.header.fingerprint},
        {"entries", index.entries.size()},
        {"embedder", index.header.embedder},
    };
    std::string out = header.dump();
    out.push_back('\n');
    for (const auto& e : index.entries) {
        out += entry_line(e);
        out.push_back('\n');
    }
    return out;
}

EgoIndex deserialize_index(std::string_view text, const TextGraph* graph) {
    std::vector<std::string_view> lines;
    bool last_terminated = true;
    for (std::size_t start = 0; start < text.size();) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) {
            lines.push_back(text.substr(start));
            last_terminated = false;
            break;
        }
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    if (lines.empty()) throw Error(ErrorKind::Truncated, "index file is empty");

    EgoIndex index;
    try {
        auto header = nlohmann::json::parse(lines[0]);
        if (!header.is_object() || header.value("magic", std::string{}) != kIndexMagic) {
            throw Error(ErrorKind::Version, "not a GRAGIDX index file (bad magic)");
        }
        int version = header.at("version").get<int>();
        if (version != kIndexVersion) {
            throw Error(ErrorKind::Version, "unsupported index version " + std::to_string(version));
        }
        index.header.version = version;
        index.header.dim = header.at("dim").get<std::size_t>();
        index.header.hops = header.at("k").get<int>();
        index.header.fingerprint = header.at("fingerprint").get<std::string>();
        index.header.entry_count = header.at("entries").get<std::size_t>();
        index.header.embedder = header.value("embedder", nlohmann::json::object());
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorKind::Version, "index header line is not a GRAGIDX header");
    }

    if (graph && graph->fingerprint() != index.header.fingerprint) {
        throw Error(ErrorKind::FingerprintMismatch,
                    "index was built for graph " + index.header.fingerprint + ", given graph is " +
                        graph->fingerprint());
    }

    const std::size_t available = lines.size() - 1;
    if (available < index.header.entry_count ||
        (available == index.header.entry_count && !last_terminated)) {
        throw Error(ErrorKind::Truncated, "index declares " + std::to_string(index.header.entry_count) +
                                              " entries but the file ends early");
    }
    if (available > index.header.entry_count) {
        throw Error(ErrorKind::Parse, "index has trailing data after " +
                                          std::to_string(index.header.entry_count) + " entries");
    }

    index.entries.reserve(index.header.entry_count);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        std::string where = "index line " + std::to_string(i + 1);
        EgoIndexEntry entry;
        try {
            auto row = nlohmann::json::parse(lines[i]);
            entry.center = row.at("center").get<NodeId>();
            entry.hops = index.header.hops;
            entry.node_count = row.at("nodes").get<std::size_t>();
            entry.edge_count = row.at("edges").get<std::size_t>();
            entry.z = Embedding(row.at("z").get<std::vector<double>>());
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::Parse, where + ": " + e.what());
        }
        if (entry.z.dim() != index.header.dim) {
            throw Error(ErrorKind::Parse, where + ": z has dim " + std::to_string(entry.z.dim()) +
                                              ", header says " + std::to_string(index.header.dim));
        }
        if (entry.node_count < 1) throw Error(ErrorKind::Parse, where + ": node count must be >= 1");
        if (!index.entries.empty() && index.entries.back().center >= entry.center) {
            throw Error(ErrorKind::Parse, where + ": centers must be strictly ascending");
        }
        index.entries.push_back(std::move(entry));
    }
    if (graph) {
        for (const auto& e : index.entries) {
            if (!graph->contains(e.center)) {
                throw Error(ErrorKind::FingerprintMismatch,
                            "index center " + std::to_string(e.center) + " is not in the graph");
            }
        }
    }
    return index;
}

void persist_index(const EgoIndex& index, const std::filesystem::path& path) {
    write_file(path, serialize_index(index));
}

EgoIndex load_index(const std::filesystem::path& path, const TextGraph* graph) {
    return deserialize_index(read_file(path), graph);
}

double cosine(const Embedding& a, const Embedding& b) {
    if (a.dim() != b.dim()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "cosine: dims " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    double c = dot / std::sqrt(na * nb);
    return std::clamp(c, -1.0, 1.0);
}

std::vector<RankedSubgraph> rank_top_n(const EgoIndex& index, const Embedding& query, std::size_t n) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "top-n must be >= 1");
    if (query.dim() != index.header.dim) {
        throw Error(ErrorKind::DimensionMismatch, "query dim " + std::to_string(query.dim()) +
                                                      " does not match index dim " +
                                                      std::to_string(index.header.dim));
    }
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(index.entries.size());
    for (std::size_t i = 0; i < index.entries.size(); ++i) {
        scored.emplace_back(cosine(query, index.entries[i].z), i);
    }
    auto better = [&index](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return index.entries[a.second].center < index.entries[b.second].center;
    };
    const std::size_t take = std::min(n, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), better);

    std::vector<RankedSubgraph> out;
    out.reserve(take);
    for (std::size_t r = 0; r < take; ++r) {
        out.push_back({index.entries[scored[r].second], scored[r].first, r + 1});
    }
    return out;
}

} // namespace grag
