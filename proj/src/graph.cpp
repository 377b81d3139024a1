#include "grag/graph.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <iterator>

#include <nlohmann/json.hpp>

#include "grag/error.hpp"
#include "grag/hashing.hpp"
#include "grag/io.hpp"

namespace grag {

namespace {

std::atomic<std::uint64_t> g_next_uid{1};

template <typename T>
void sort_unique(std::vector<T>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

const nlohmann::json& require_field(const nlohmann::json& obj, const char* key,
                                    const std::string& where) {
    if (!obj.is_object()) throw Error(ErrorKind::Parse, where + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw Error(ErrorKind::Parse, where + ": missing field '" + key + "'");
    }
    return *it;
}

NodeId require_id(const nlohmann::json& obj, const char* key, const std::string& where) {
    const auto& v = require_field(obj, key, where);
    if (!v.is_number_integer()) {
        throw Error(ErrorKind::Parse, where + ": field '" + key + "' must be an integer");
    }
    return v.get<NodeId>();
}

std::string require_text(const nlohmann::json& obj, const std::string& where) {
    const auto& v = require_field(obj, "text", where);
    if (!v.is_string()) throw Error(ErrorKind::Parse, where + ": field 'text' must be a string");
    return v.get<std::string>();
}

NodeId parse_csv_id(const std::string& field, const std::string& where) {
    std::size_t used = 0;
    long long value = 0;
    try {
        value = std::stoll(field, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != field.size()) {
        throw Error(ErrorKind::Parse, where + ": '" + field + "' is not an integer id");
    }
    return value;
}

} // namespace

TextGraph::TextGraph(std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), uid_(g_next_uid++) {
    position_.reserve(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].id < 0) {
            throw Error(ErrorKind::Referential,
                        "node at position " + std::to_string(i) + " has negative id " +
                            std::to_string(nodes_[i].id));
        }
        if (!position_.emplace(nodes_[i].id, i).second) {
            throw Error(ErrorKind::Referential, "duplicate node id " + std::to_string(nodes_[i].id));
        }
    }
    adjacency_.resize(nodes_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        auto& edge = edges_[e];
        edge.id = e;
        auto s = position_.find(edge.src);
        auto d = position_.find(edge.dst);
        if (s == position_.end() || d == position_.end()) {
            NodeId missing = s == position_.end() ? edge.src : edge.dst;
            throw Error(ErrorKind::Referential, "edge " + std::to_string(e) + " (" +
                                                    std::to_string(edge.src) + " -> " +
                                                    std::to_string(edge.dst) +
                                                    ") references unknown node " +
                                                    std::to_string(missing));
        }
        adjacency_[s->second].push_back({d->second, e});
        if (d->second != s->second) adjacency_[d->second].push_back({s->second, e});
    }
    for (auto& list : adjacency_) {
        std::sort(list.begin(), list.end(), [this](const Neighbor& a, const Neighbor& b) {
            NodeId ia = nodes_[a.pos].id;
            NodeId ib = nodes_[b.pos].id;
            return ia != ib ? ia < ib : a.edge < b.edge;
        });
    }
}

std::size_t TextGraph::position(NodeId id) const {
    auto it = position_.find(id);
    if (it == position_.end()) throw Error(ErrorKind::NotFound, "unknown node " + std::to_string(id));
    return it->second;
}

std::string TextGraph::canonical_document() const {
    nlohmann::json doc;
    auto& ns = doc["nodes"] = nlohmann::json::array();
    for (const auto& n : nodes_) ns.push_back({{"id", n.id}, {"text", n.text}});
    auto& es = doc["edges"] = nlohmann::json::array();
    for (const auto& e : edges_) es.push_back({{"src", e.src}, {"dst", e.dst}, {"text", e.text}});
    return doc.dump();
}

std::string TextGraph::fingerprint() const { return sha256_hex(canonical_document()); }

Subgraph::Subgraph(std::uint64_t parent, std::vector<NodeId> nodes, std::vector<EdgeId> edges,
                   std::optional<NodeId> center, std::optional<int> hops)
    : parent_(parent),
      nodes_(std::move(nodes)),
      edges_(std::move(edges)),
      center_(center),
      hops_(hops) {
    sort_unique(nodes_);
    sort_unique(edges_);
}

bool Subgraph::contains_node(NodeId id) const {
    return std::binary_search(nodes_.begin(), nodes_.end(), id);
}

bool Subgraph::contains_edge(EdgeId id) const {
    return std::binary_search(edges_.begin(), edges_.end(), id);
}

TextGraph parse_graph_json(std::string_view document) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::Parse, "graph document line " +
                                          std::to_string(line_of_offset(document, e.byte)) +
                                          ": " + e.what());
    }
    const auto& nodes = require_field(doc, "nodes", "graph document");
    const auto& edges = require_field(doc, "edges", "graph document");
    if (!nodes.is_array()) throw Error(ErrorKind::Parse, "graph document: 'nodes' must be an array");
    if (!edges.is_array()) throw Error(ErrorKind::Parse, "graph document: 'edges' must be an array");

    std::vector<NodeRecord> node_records;
    node_records.reserve(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        std::string where = "nodes[" + std::to_string(i) + "]";
        node_records.push_back({require_id(nodes[i], "id", where), require_text(nodes[i], where)});
    }
    std::vector<EdgeRecord> edge_records;
    edge_records.reserve(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        std::string where = "edges[" + std::to_string(i) + "]";
        edge_records.push_back({require_id(edges[i], "src", where), require_id(edges[i], "dst", where),
                                require_text(edges[i], where), i});
    }
    return TextGraph(std::move(node_records), std::move(edge_records));
}

TextGraph parse_graph_csv(std::string_view nodes_csv, std::string_view edges_csv) {
    auto node_rows = parse_csv(nodes_csv);
    auto edge_rows = parse_csv(edges_csv);
    if (node_rows.empty()) throw Error(ErrorKind::Parse, "nodes csv: missing header line");
    if (edge_rows.empty()) throw Error(ErrorKind::Parse, "edges csv: missing header line");

    auto column = [](const CsvRecord& header, const std::string& name, const char* file) {
        auto it = std::find(header.fields.begin(), header.fields.end(), name);
        if (it == header.fields.end()) {
            throw Error(ErrorKind::Parse,
                        std::string(file) + " csv line 1: missing column '" + name + "'");
        }
        return static_cast<std::size_t>(std::distance(header.fields.begin(), it));
    };
    const std::size_t id_col = column(node_rows[0], "node_id", "nodes");
    const std::size_t attr_col = column(node_rows[0], "node_attr", "nodes");
    const std::size_t src_col = column(edge_rows[0], "src", "edges");
    const std::size_t eattr_col = column(edge_rows[0], "edge_attr", "edges");
    const std::size_t dst_col = column(edge_rows[0], "dst", "edges");

    auto field = [](const CsvRecord& row, std::size_t col, const char* file) -> const std::string& {
        if (col >= row.fields.size()) {
            throw Error(ErrorKind::Parse, std::string(file) + " csv line " + std::to_string(row.line) +
                                              ": expected at least " + std::to_string(col + 1) +
                                              " fields");
        }
        return row.fields[col];
    };

    std::vector<NodeRecord> nodes;
    for (std::size_t r = 1; r < node_rows.size(); ++r) {
        const auto& row = node_rows[r];
        std::string where = "nodes csv line " + std::to_string(row.line);
        nodes.push_back({parse_csv_id(field(row, id_col, "nodes"), where), field(row, attr_col, "nodes")});
    }
    std::vector<EdgeRecord> edges;
    for (std::size_t r = 1; r < edge_rows.size(); ++r) {
        const auto& row = edge_rows[r];
        std::string where = "edges csv line " + std::to_string(row.line);
        edges.push_back({parse_csv_id(field(row, src_col, "edges"), where),
                         parse_csv_id(field(row, dst_col, "edges"), where),
                         field(row, eattr_col, "edges"), r - 1});
    }
    return TextGraph(std::move(nodes), std::move(edges));
}

TextGraph load_graph(const std::filesystem::path& path,
                     const std::optional<std::filesystem::path>& edges_csv) {
    if (path.extension() != ".csv") return parse_graph_json(read_file(path));

    std::filesystem::path edges_path;
    if (edges_csv) {
        edges_path = *edges_csv;
    } else {
        // nodes/<name>.csv pairs with edges/<name>.csv
        edges_path = path.parent_path().parent_path() / "edges" / path.filename();
        if (path.parent_path().filename() != "nodes" || !std::filesystem::exists(edges_path)) {
            throw Error(ErrorKind::NotFound, "no edges csv found for " + path.string());
        }
    }
    return parse_graph_csv(read_file(path), read_file(edges_path));
}

std::vector<NodeId> k_hop_neighborhood(const TextGraph& g, NodeId center, int hops) {
    if (hops < 1) throw Error(ErrorKind::InvalidArgument, "hop count must be >= 1");
    const std::size_t start = g.position(center);

    // Sparse distance map keeps each call proportional to the neighborhood
    // size rather than |V|.
    std::unordered_map<std::size_t, int> depth;
    depth.emplace(start, 0);
    std::deque<std::size_t> frontier{start};
    while (!frontier.empty()) {
        std::size_t pos = frontier.front();
        frontier.pop_front();
        int d = depth[pos];
        if (d == hops) continue;
        for (const auto& nb : g.incident(pos)) {
            if (depth.emplace(nb.pos, d + 1).second) frontier.push_back(nb.pos);
        }
    }
    std::vector<NodeId> out;
    out.reserve(depth.size());
    for (const auto& [pos, d] : depth) out.push_back(g.nodes()[pos].id);
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

std::vector<EdgeId> induced_edges(const TextGraph& g, const std::vector<NodeId>& sorted_nodes) {
    std::vector<EdgeId> edges;
    for (NodeId id : sorted_nodes) {
        for (const auto& nb : g.incident(g.position(id))) {
            // Each edge is collected from its smaller endpoint only.
            NodeId other = g.nodes()[nb.pos].id;
            if (other < id) continue;
            if (std::binary_search(sorted_nodes.begin(), sorted_nodes.end(), other)) {
                edges.push_back(nb.edge);
            }
        }
    }
    return edges;
}

} // namespace

Subgraph ego_graph(const TextGraph& g, NodeId center, int hops) {
    auto nodes = k_hop_neighborhood(g, center, hops);
    auto edges = induced_edges(g, nodes);
    return Subgraph(g.uid(), std::move(nodes), std::move(edges), center, hops);
}

Subgraph induced_subgraph(const TextGraph& g, std::vector<NodeId> nodes) {
    sort_unique(nodes);
    for (NodeId id : nodes) g.position(id);
    auto edges = induced_edges(g, nodes);
    return Subgraph(g.uid(), std::move(nodes), std::move(edges));
}

Subgraph union_subgraphs(const std::vector<Subgraph>& parts) {
    if (parts.empty()) throw Error(ErrorKind::InvalidArgument, "union of an empty subgraph list");
    const std::uint64_t parent = parts.front().parent();
    std::vector<NodeId> nodes;
    std::vector<EdgeId> edges;
    for (const auto& p : parts) {
        if (p.parent() != parent) {
            throw Error(ErrorKind::InvalidArgument, "union of subgraphs from different graphs");
        }
        nodes.insert(nodes.end(), p.nodes().begin(), p.nodes().end());
        edges.insert(edges.end(), p.edges().begin(), p.edges().end());
    }
    return Subgraph(parent, std::move(nodes), std::move(edges));
}

} // namespace grag
