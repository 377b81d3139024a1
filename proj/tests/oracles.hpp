#pragma once
// Test-only reference computations. Nothing here calls into the code paths
// it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "grag/graph.hpp"

namespace grag::testing {

using Wide = boost::multiprecision::cpp_bin_float_50;

// ---- random inputs -------------------------------------------------------

inline const std::vector<std::string>& vocabulary() {
    static const std::vector<std::string> words = {
        "solar",   "flare",   "sunspot", "corona", "plasma", "magnetic", "field",   "forecast",
        "deep",    "learning", "graph",  "neural", "citation", "paper", "network", "model",
        "wind",    "storm",   "earth",   "orbit",  "satellite", "radio", "burst",  "cycle",
        "physics", "data",    "survey",  "method", "energy", "particle", "wave",    "emission"};
    return words;
}

inline std::string random_phrase(std::mt19937_64& rng, int min_words = 1, int max_words = 4,
                                 std::size_t vocab = 32) {
    std::uniform_int_distribution<int> count(min_words, max_words);
    std::uniform_int_distribution<std::size_t> pick(0, std::min(vocab, vocabulary().size()) - 1);
    std::string out;
    for (int i = count(rng); i > 0; --i) {
        if (!out.empty()) out += ' ';
        out += vocabulary()[pick(rng)];
    }
    return out;
}

// Texts that stress the description escaping: brackets, backslashes,
// newlines, arrows, empty strings, multi-byte UTF-8, carriage returns.
inline std::string random_nasty_text(std::mt19937_64& rng) {
    static const std::vector<std::string> pieces = {
        "]", "[", "\\", "\n", "\\n", "\\]", "-->", "<--", "--[", "]--", " ", "  ", "#7", "(#3)",
        "NODE 1.1", "CROSS: #1", "\xc3\xa9t\xc3\xa9", "\xe5\x9b\xbe", "\r", "\t", "a", "b", "relation"};
    std::uniform_int_distribution<int> count(0, 6);
    std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
    std::string out;
    for (int i = count(rng); i > 0; --i) out += pieces[pick(rng)];
    return out;
}

struct RandomGraphOptions {
    std::size_t min_nodes = 1;
    std::size_t max_nodes = 30;
    double edge_factor = 1.5;     // extra edges per node beyond the spanning tree
    bool connected = true;
    bool self_loops = false;
    bool parallel = false;
    bool sparse_ids = false;      // non-contiguous, shuffled node ids
    bool nasty_text = false;
    std::size_t vocab = 32;
    std::size_t max_edges = std::numeric_limits<std::size_t>::max();
};

inline TextGraph random_graph(std::mt19937_64& rng, const RandomGraphOptions& opt) {
    std::uniform_int_distribution<std::size_t> size(opt.min_nodes, opt.max_nodes);
    const std::size_t n = size(rng);
    std::vector<NodeId> ids(n);
    if (opt.sparse_ids) {
        std::set<NodeId> used;
        std::uniform_int_distribution<NodeId> id_dist(0, static_cast<NodeId>(n * 10 + 10));
        for (auto& id : ids) {
            do { id = id_dist(rng); } while (!used.insert(id).second);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<NodeId>(i);
    }
    std::shuffle(ids.begin(), ids.end(), rng);

    auto text = [&] { return opt.nasty_text ? random_nasty_text(rng) : random_phrase(rng, 1, 4, opt.vocab); };
    std::vector<NodeRecord> nodes;
    for (NodeId id : ids) nodes.push_back({id, text()});

    std::vector<EdgeRecord> edges;
    std::set<std::pair<NodeId, NodeId>> seen;
    auto add = [&](std::size_t a, std::size_t b) {
        if (edges.size() >= opt.max_edges) return;
        std::bernoulli_distribution flip(0.5);
        if (flip(rng)) std::swap(a, b);
        edges.push_back({ids[a], ids[b], text(), edges.size()});
        seen.insert({std::min(ids[a], ids[b]), std::max(ids[a], ids[b])});
    };
    if (opt.connected) {
        for (std::size_t i = 1; i < n; ++i) {
            std::uniform_int_distribution<std::size_t> parent(0, i - 1);
            add(parent(rng), i);
        }
    }
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    const auto extra = static_cast<std::size_t>(opt.edge_factor * static_cast<double>(n));
    for (std::size_t k = 0; k < extra; ++k) {
        std::size_t a = pick(rng), b = pick(rng);
        if (a == b && !opt.self_loops) continue;
        if (!opt.parallel && seen.count({std::min(ids[a], ids[b]), std::max(ids[a], ids[b])})) continue;
        add(a, b);
    }
    return TextGraph(std::move(nodes), std::move(edges));
}

// ---- graph oracles -------------------------------------------------------

// All-pairs undirected hop distances by Floyd-Warshall; index = position.
inline std::vector<std::vector<long>> floyd_warshall(const TextGraph& g) {
    const std::size_t n = g.node_count();
    const long inf = std::numeric_limits<long>::max() / 4;
    std::vector<std::vector<long>> d(n, std::vector<long>(n, inf));
    std::map<NodeId, std::size_t> pos;
    for (std::size_t i = 0; i < n; ++i) pos[g.nodes()[i].id] = i;
    for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
    for (const auto& e : g.edges()) {
        std::size_t a = pos[e.src], b = pos[e.dst];
        if (a != b) d[a][b] = d[b][a] = 1;
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
    return d;
}

inline std::vector<EdgeId> edges_within(const TextGraph& g, const std::set<NodeId>& nodes) {
    std::vector<EdgeId> out;
    for (const auto& e : g.edges()) {
        if (nodes.count(e.src) && nodes.count(e.dst)) out.push_back(e.id);
    }
    return out;
}

// ---- hashing oracle ------------------------------------------------------

// Reference FNV-1a 64 written byte by byte from the published constants.
inline std::uint64_t reference_fnv1a(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// ---- extended precision --------------------------------------------------

inline Wide wide_dot(const std::vector<double>& a, const std::vector<double>& b) {
    Wide s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += Wide(a[i]) * Wide(b[i]);
    return s;
}

inline double wide_cosine(const std::vector<double>& a, const std::vector<double>& b) {
    Wide na = wide_dot(a, a), nb = wide_dot(b, b);
    if (na == 0 || nb == 0) return 0.0;
    return static_cast<double>(wide_dot(a, b) / boost::multiprecision::sqrt(na * nb));
}

inline std::vector<Wide> wide_vector(const std::vector<double>& x) {
    return std::vector<Wide>(x.begin(), x.end());
}

struct WideLayer {
    std::vector<std::vector<double>> w;
    std::vector<double> b;
    std::string act;
};

inline std::vector<double> wide_mlp(const std::vector<WideLayer>& layers, const std::vector<double>& x) {
    std::vector<Wide> y = wide_vector(x);
    for (const auto& layer : layers) {
        std::vector<Wide> next(layer.w.size());
        for (std::size_t r = 0; r < layer.w.size(); ++r) {
            Wide acc = Wide(layer.b[r]);
            for (std::size_t c = 0; c < y.size(); ++c) acc += Wide(layer.w[r][c]) * y[c];
            if (layer.act == "relu") acc = acc > 0 ? acc : Wide(0);
            if (layer.act == "sigmoid") acc = 1 / (1 + boost::multiprecision::exp(-acc));
            next[r] = acc;
        }
        y = std::move(next);
    }
    std::vector<double> out;
    for (const auto& v : y) out.push_back(static_cast<double>(v));
    return out;
}

// ---- metric oracle -------------------------------------------------------

inline std::string oracle_normalize(const std::string& s) {
    std::string lowered;
    for (char c : s) lowered += (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c;
    std::vector<std::string> words;
    std::string cur;
    for (char c : lowered) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) words.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) words.push_back(cur);
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) out += (i ? " " : "") + words[i];
    return out;
}

struct OracleScores {
    double hit1 = 0, recall = 0, f1 = 0;
};

inline OracleScores oracle_metrics(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
    std::set<std::string> p, g;
    for (const auto& x : pred) p.insert(oracle_normalize(x));
    for (const auto& x : gold) g.insert(oracle_normalize(x));
    std::vector<std::string> both;
    std::set_intersection(p.begin(), p.end(), g.begin(), g.end(), std::back_inserter(both));
    OracleScores s;
    s.hit1 = (!pred.empty() && g.count(oracle_normalize(pred[0]))) ? 1.0 : 0.0;
    s.recall = static_cast<double>(both.size()) / static_cast<double>(g.size());
    if (!p.empty() && !both.empty()) {
        double prec = static_cast<double>(both.size()) / static_cast<double>(p.size());
        s.f1 = 2 * prec * s.recall / (prec + s.recall);
    }
    return s;
}

// ---- relabeling ----------------------------------------------------------

// A copy of `g` whose node ids are mapped through `perm` and whose node and
// edge records are stored in shuffled order. `edge_map[old] = new`.
struct Relabeled {
    TextGraph graph;
    std::map<NodeId, NodeId> perm;
    std::vector<EdgeId> edge_map;
};

inline Relabeled relabel(const TextGraph& g, std::mt19937_64& rng) {
    Relabeled r;
    std::vector<NodeId> fresh;
    std::set<NodeId> used;
    std::uniform_int_distribution<NodeId> id_dist(0, static_cast<NodeId>(g.node_count() * 20 + 20));
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        NodeId id;
        do { id = id_dist(rng); } while (!used.insert(id).second);
        fresh.push_back(id);
    }
    for (std::size_t i = 0; i < g.node_count(); ++i) r.perm[g.nodes()[i].id] = fresh[i];

    std::vector<NodeRecord> nodes;
    for (const auto& n : g.nodes()) nodes.push_back({r.perm[n.id], n.text});
    std::shuffle(nodes.begin(), nodes.end(), rng);

    std::vector<std::size_t> order(g.edge_count());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    r.edge_map.assign(g.edge_count(), 0);
    std::vector<EdgeRecord> edges;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& e = g.edge(order[k]);
        edges.push_back({r.perm[e.src], r.perm[e.dst], e.text, k});
        r.edge_map[order[k]] = k;
    }
    r.graph = TextGraph(std::move(nodes), std::move(edges));
    return r;
}

} // namespace grag::testing
