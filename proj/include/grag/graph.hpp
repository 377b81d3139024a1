#pragma once
// Text-attributed directed multigraph plus the subgraph operations the
// retrieval stages are built from (K-hop neighborhoods, induced ego-graphs,
// unions).
//
// Node ids are the ids given by the source document; internally every node
// also has a dense position (document order) used for adjacency.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace grag {

using NodeId = std::int64_t;
using EdgeId = std::size_t;

struct NodeRecord {
    NodeId id;
    std::string text;
};

struct EdgeRecord {
    NodeId src;
    NodeId dst;
    std::string text;
    EdgeId id;  // index in the owning graph's edge list
};

struct Neighbor {
    std::size_t pos;  // dense position of the neighbor node
    EdgeId edge;
};

class TextGraph {
public:
    TextGraph() = default;

    // Validates ids (unique, non-negative) and edge endpoints; throws
    // Error{Referential} naming the offending edge.
    TextGraph(std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges);

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    const std::vector<NodeRecord>& nodes() const { return nodes_; }
    const std::vector<EdgeRecord>& edges() const { return edges_; }
    const EdgeRecord& edge(EdgeId e) const { return edges_.at(e); }

    bool contains(NodeId id) const { return position_.count(id) != 0; }
    // Throws Error{NotFound}.
    std::size_t position(NodeId id) const;
    const NodeRecord& node(NodeId id) const { return nodes_[position(id)]; }
    const std::string& node_text(NodeId id) const { return node(id).text; }

    // Undirected incidence list of the node at `pos`, ascending by
    // (neighbor id, edge id). Self-loops appear once.
    const std::vector<Neighbor>& incident(std::size_t pos) const { return adjacency_[pos]; }

    // Identity shared by all copies of one constructed graph.
    std::uint64_t uid() const { return uid_; }

    // Canonical JSON document (see load_graph) and its SHA-256 hex digest.
    std::string canonical_document() const;
    std::string fingerprint() const;

private:
    std::vector<NodeRecord> nodes_;
    std::vector<EdgeRecord> edges_;
    std::unordered_map<NodeId, std::size_t> position_;
    std::vector<std::vector<Neighbor>> adjacency_;
    std::uint64_t uid_ = 0;
};

class Subgraph {
public:
    Subgraph() = default;
    // `nodes` and `edges` are sorted and deduplicated on construction.
    Subgraph(std::uint64_t parent, std::vector<NodeId> nodes, std::vector<EdgeId> edges,
             std::optional<NodeId> center = std::nullopt, std::optional<int> hops = std::nullopt);

    std::uint64_t parent() const { return parent_; }
    const std::vector<NodeId>& nodes() const { return nodes_; }
    const std::vector<EdgeId>& edges() const { return edges_; }
    std::optional<NodeId> center() const { return center_; }
    std::optional<int> hops() const { return hops_; }

    bool contains_node(NodeId id) const;
    bool contains_edge(EdgeId id) const;

    // Same parent and same id sets; center/hops are metadata.
    bool same_elements(const Subgraph& other) const {
        return parent_ == other.parent_ && nodes_ == other.nodes_ && edges_ == other.edges_;
    }
    bool operator==(const Subgraph&) const = default;

private:
    std::uint64_t parent_ = 0;
    std::vector<NodeId> nodes_;
    std::vector<EdgeId> edges_;
    std::optional<NodeId> center_;
    std::optional<int> hops_;
};

// JSON graph document: {"nodes":[{"id","text"}...],"edges":[{"src","dst","text"}...]}.
TextGraph parse_graph_json(std::string_view document);
// GraphQA-style CSV pair: nodes `node_id,node_attr`, edges `src,edge_attr,dst`.
TextGraph parse_graph_csv(std::string_view nodes_csv, std::string_view edges_csv);

// Loads a `.json` document, or a nodes CSV whose edges file is given
// explicitly or found next to it (`nodes/3.csv` -> `edges/3.csv`).
TextGraph load_graph(const std::filesystem::path& path,
                     const std::optional<std::filesystem::path>& edges_csv = std::nullopt);

// Nodes at undirected distance <= hops from center, ascending by id.
std::vector<NodeId> k_hop_neighborhood(const TextGraph& g, NodeId center, int hops);

// Induced subgraph on k_hop_neighborhood(g, center, hops).
Subgraph ego_graph(const TextGraph& g, NodeId center, int hops);

// Induced subgraph on an arbitrary node set.
Subgraph induced_subgraph(const TextGraph& g, std::vector<NodeId> nodes);

Subgraph union_subgraphs(const std::vector<Subgraph>& parts);

} // namespace grag
