#pragma once
// Lossless hierarchical text descriptions of subgraphs.
//
// A subgraph is split into a BFS spanning tree rooted at its center plus the
// residual edges the tree does not use. The tree is rendered pre-order as a
// nested list; residual edges follow as CROSS lines:
//
//   NODE 1 (#7) [solar flares]
//     NODE 1.1 (#3) [flare forecasting] <--[cites]--
//       NODE 1.1.1 (#9) [sunspots] --[mentions]-->
//     NODE 1.2 (#4) [coronal mass ejection] <--[cites]--
//   CROSS: #3 --[cites]--> #4
//
// `<--[r]--` means the parent points at this node, `--[r]-->` means this node
// points at its parent. Inside brackets `\`, `]` and newline are escaped as
// `\\`, `\]` and `\n`. Indentation is two spaces per depth.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "grag/ego_index.hpp"
#include "grag/graph.hpp"
#include "grag/pruner.hpp"

namespace grag {

inline constexpr const char* kTemplateVersion = "grag-hier-v1";

enum class Orientation { Out, In };  // relative to the parent

struct TreeChild {
    NodeId node;
    EdgeId edge;
    Orientation orientation;

    bool operator==(const TreeChild&) const = default;
};

struct TreeView {
    NodeId root = 0;
    std::map<NodeId, std::vector<TreeChild>> children;

    std::size_t edge_count() const;
    bool operator==(const TreeView&) const = default;
};

struct ResidualEdges {
    std::vector<EdgeId> edges;  // ascending

    bool operator==(const ResidualEdges&) const = default;
};

struct HierDescription {
    std::string text;
    TreeView tree;
    ResidualEdges residual;
    std::string template_version = kTemplateVersion;
};

struct EdgeTriple {
    NodeId src;
    NodeId dst;
    std::string text;

    auto operator<=>(const EdgeTriple&) const = default;
};

// What a description carries: node ids with texts and the edge multiset.
struct DescribedGraph {
    NodeId root = 0;
    std::map<NodeId, std::string> nodes;
    std::vector<EdgeTriple> edges;  // sorted

    bool operator==(const DescribedGraph&) const = default;
};

struct DescribedSection {
    std::size_t rank = 0;
    NodeId center = 0;
    double score = 0.0;
    DescribedGraph graph;
};

std::string escape_text(std::string_view text);

// BFS from `root` over the subgraph's edges ignoring direction, expanding
// neighbors by ascending (neighbor id, edge id). Throws Error{InvalidArgument}
// listing nodes unreachable from root.
std::pair<TreeView, ResidualEdges> split_bfs(const Subgraph& sub, const TextGraph& g, NodeId root);

std::string render_description(const TreeView& tree, const ResidualEdges& residual,
                               const TextGraph& g);

// split_bfs + render_description rooted at `root` (default: sub's center).
HierDescription describe_subgraph(const TextGraph& g, const Subgraph& sub,
                                  std::optional<NodeId> root = std::nullopt);

// Errors: Parse with line number and expected token; Semantic for duplicate
// node ids or CROSS lines naming undeclared nodes.
DescribedGraph parse_description(std::string_view text);

// Splits a multi-section retrieval description and parses each section.
std::vector<DescribedSection> parse_retrieval(std::string_view text);

// The content a description of (g, sub) must reproduce.
DescribedGraph described_view(const TextGraph& g, const Subgraph& sub, NodeId root);

// Optional hard drop for the text view: removes edges and non-center nodes
// whose scale is below `eps`, then keeps what is still reachable from the
// center. Nodes or edges without a scale are kept.
Subgraph hard_drop(const TextGraph& g, const Subgraph& ego, const RelevanceScales& scales, double eps);

struct DescribeOptions {
    const RelevanceScales* scales = nullptr;
    double prune_eps = 0.0;  // <= 0 disables hard drop
};

// One `SUBGRAPH k (center #id, score s)` section per ranked ego-graph, in
// rank order, sections separated by a blank line.
std::string describe_retrieval(const std::vector<RankedSubgraph>& ranked, const TextGraph& g,
                               int hops, const DescribeOptions& options = {});

} // namespace grag
