#include "grag/textualizer.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <deque>
#include <set>
#include <unordered_map>

#include "grag/error.hpp"

namespace grag {

std::size_t TreeView::edge_count() const {
    std::size_t n = 0;
    for (const auto& [node, kids] : children) n += kids.size();
    return n;
}

std::string escape_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case ']': out += "\\]"; break;
            case '\n': out += "\\n"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::pair<TreeView, ResidualEdges> split_bfs(const Subgraph& sub, const TextGraph& g, NodeId root) {
    if (!sub.contains_node(root)) {
        throw Error(ErrorKind::NotFound, "root " + std::to_string(root) + " is not in the subgraph");
    }
    TreeView tree;
    tree.root = root;
    std::set<NodeId> visited{root};
    std::vector<bool> used(g.edge_count(), false);
    std::deque<NodeId> frontier{root};

    while (!frontier.empty()) {
        NodeId v = frontier.front();
        frontier.pop_front();
        for (const auto& nb : g.incident(g.position(v))) {
            if (!sub.contains_edge(nb.edge)) continue;
            NodeId u = g.nodes()[nb.pos].id;
            if (!visited.insert(u).second) continue;
            const auto& e = g.edge(nb.edge);
            Orientation o = (e.src == v && e.dst == u) ? Orientation::Out : Orientation::In;
            tree.children[v].push_back({u, nb.edge, o});
            used[nb.edge] = true;
            frontier.push_back(u);
        }
    }

    if (visited.size() != sub.nodes().size()) {
        std::string missing;
        for (NodeId n : sub.nodes()) {
            if (visited.count(n)) continue;
            if (!missing.empty()) missing += ", ";
            missing += std::to_string(n);
        }
        throw Error(ErrorKind::InvalidArgument,
                    "subgraph is not connected from " + std::to_string(root) + "; unreachable: " + missing);
    }

    ResidualEdges residual;
    for (EdgeId e : sub.edges()) {
        if (!used[e]) residual.edges.push_back(e);
    }
    return {std::move(tree), std::move(residual)};
}

std::string render_description(const TreeView& tree, const ResidualEdges& residual,
                               const TextGraph& g) {
    struct Frame {
        NodeId node;
        std::string label;
        std::size_t depth;
        const TreeChild* via;
    };
    std::string out;
    std::vector<Frame> stack{{tree.root, "1", 0, nullptr}};
    while (!stack.empty()) {
        Frame f = std::move(stack.back());
        stack.pop_back();

        out.append(2 * f.depth, ' ');
        out += "NODE " + f.label + " (#" + std::to_string(f.node) + ") [" +
               escape_text(g.node_text(f.node)) + "]";
        if (f.via) {
            const std::string rel = escape_text(g.edge(f.via->edge).text);
            out += f.via->orientation == Orientation::Out ? " <--[" + rel + "]--" : " --[" + rel + "]-->";
        }
        out.push_back('\n');

        auto it = tree.children.find(f.node);
        if (it == tree.children.end()) continue;
        const auto& kids = it->second;
        for (std::size_t i = kids.size(); i-- > 0;) {
            stack.push_back({kids[i].node, f.label + "." + std::to_string(i + 1), f.depth + 1, &kids[i]});
        }
    }
    for (EdgeId id : residual.edges) {
        const auto& e = g.edge(id);
        out += "CROSS: #" + std::to_string(e.src) + " --[" + escape_text(e.text) + "]--> #" +
               std::to_string(e.dst) + "\n";
    }
    return out;
}

HierDescription describe_subgraph(const TextGraph& g, const Subgraph& sub, std::optional<NodeId> root) {
    NodeId r;
    if (root) {
        r = *root;
    } else if (sub.center()) {
        r = *sub.center();
    } else if (!sub.nodes().empty()) {
        r = sub.nodes().front();
    } else {
        throw Error(ErrorKind::InvalidArgument, "cannot describe an empty subgraph");
    }
    auto [tree, residual] = split_bfs(sub, g, r);
    HierDescription d;
    d.text = render_description(tree, residual, g);
    d.tree = std::move(tree);
    d.residual = std::move(residual);
    return d;
}

namespace {

class LineCursor {
public:
    LineCursor(std::string_view line, std::size_t number) : line_(line), number_(number) {}

    [[noreturn]] void fail(const std::string& expected) const {
        throw Error(ErrorKind::Parse, "line " + std::to_string(number_) + ", column " +
                                          std::to_string(pos_ + 1) + ": expected " + expected);
    }

    bool at_end() const { return pos_ == line_.size(); }
    bool peek(std::string_view token) const { return line_.substr(pos_).starts_with(token); }

    void expect(std::string_view token) {
        if (!peek(token)) fail("'" + std::string(token) + "'");
        pos_ += token.size();
    }

    bool accept(std::string_view token) {
        if (!peek(token)) return false;
        pos_ += token.size();
        return true;
    }

    std::int64_t integer(const char* what) {
        std::int64_t value = 0;
        const char* begin = line_.data() + pos_;
        const char* end = line_.data() + line_.size();
        if (begin == end || !(*begin == '-' || (*begin >= '0' && *begin <= '9'))) fail(what);
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc()) fail(what);
        pos_ += static_cast<std::size_t>(ptr - begin);
        return value;
    }

    double decimal(const char* what) {
        std::size_t start = pos_;
        while (pos_ < line_.size() && std::string_view("+-.0123456789eEinfa").find(line_[pos_]) != std::string_view::npos) ++pos_;
        std::string token(line_.substr(start, pos_ - start));
        char* endp = nullptr;
        double v = std::strtod(token.c_str(), &endp);
        if (token.empty() || endp != token.c_str() + token.size()) {
            pos_ = start;
            fail(what);
        }
        return v;
    }

    // Bracketed text body; the opening '[' is already consumed. Consumes the
    // closing ']'.
    std::string text() {
        std::string out;
        while (pos_ < line_.size()) {
            char c = line_[pos_++];
            if (c == ']') return out;
            if (c != '\\') {
                out.push_back(c);
                continue;
            }
            if (pos_ == line_.size()) fail("escape sequence after '\\'");
            char esc = line_[pos_++];
            switch (esc) {
                case '\\': out.push_back('\\'); break;
                case ']': out.push_back(']'); break;
                case 'n': out.push_back('\n'); break;
                default: --pos_; fail("one of '\\\\', '\\]', '\\n'");
            }
        }
        fail("']'");
    }

    std::size_t indent() {
        while (pos_ < line_.size() && line_[pos_] == ' ') ++pos_;
        return pos_;
    }

    std::string_view until(char stop) {
        auto end = line_.find(stop, pos_);
        if (end == std::string_view::npos) end = line_.size();
        auto out = line_.substr(pos_, end - pos_);
        pos_ = end;
        return out;
    }

private:
    std::string_view line_;
    std::size_t number_;
    std::size_t pos_ = 0;
};

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

DescribedGraph parse_lines(const std::vector<std::string_view>& lines, std::size_t first,
                           std::size_t last, std::size_t line_offset) {
    struct Open {
        NodeId id;
        std::string label;
        std::size_t kids = 0;
    };
    DescribedGraph out;
    std::vector<Open> path;
    bool seen_root = false;
    bool in_cross = false;

    for (std::size_t i = first; i < last; ++i) {
        const std::size_t number = i + 1 + line_offset;
        std::string_view line = lines[i];
        if (line.empty()) continue;
        LineCursor cur(line, number);

        if (cur.accept("CROSS: #")) {
            if (!seen_root) cur.fail("a NODE line before CROSS lines");
            in_cross = true;
            NodeId src = cur.integer("source node id");
            cur.expect(" --[");
            std::string rel = cur.text();
            cur.expect("--> #");
            NodeId dst = cur.integer("target node id");
            if (!cur.at_end()) cur.fail("end of line");
            for (NodeId n : {src, dst}) {
                if (!out.nodes.count(n)) {
                    throw Error(ErrorKind::Semantic, "line " + std::to_string(number) +
                                                         ": CROSS line references undeclared node #" +
                                                         std::to_string(n));
                }
            }
            out.edges.push_back({src, dst, std::move(rel)});
            continue;
        }

        std::size_t spaces = cur.indent();
        if (in_cross) cur.fail("'CROSS: #' (NODE lines must precede the CROSS section)");
        if (spaces % 2 != 0) cur.fail("an even indentation");
        const std::size_t depth = spaces / 2;
        cur.expect("NODE ");
        std::string label(cur.until(' '));

        if (depth == 0) {
            if (seen_root) cur.fail("indentation (only one root node per description)");
            if (label != "1") cur.fail("root label '1'");
            path.clear();
        } else {
            if (!seen_root || depth > path.size()) {
                throw Error(ErrorKind::Parse, "line " + std::to_string(number) + ": indentation jumps to depth " +
                                                  std::to_string(depth) + " under depth " +
                                                  std::to_string(path.empty() ? 0 : path.size() - 1));
            }
            path.resize(depth);
            std::string expected = path.back().label + "." + std::to_string(path.back().kids + 1);
            if (label != expected) cur.fail("label '" + expected + "'");
        }

        cur.expect(" (#");
        NodeId id = cur.integer("node id");
        cur.expect(") [");
        std::string text = cur.text();
        if (out.nodes.count(id)) {
            throw Error(ErrorKind::Semantic, "line " + std::to_string(number) + ": duplicate node #" +
                                                 std::to_string(id));
        }
        out.nodes.emplace(id, std::move(text));

        if (depth == 0) {
            if (!cur.at_end()) cur.fail("end of line");
            out.root = id;
            seen_root = true;
        } else {
            NodeId parent = path.back().id;
            if (cur.accept(" <--[")) {
                std::string rel = cur.text();
                cur.expect("--");
                out.edges.push_back({parent, id, std::move(rel)});
            } else if (cur.accept(" --[")) {
                std::string rel = cur.text();
                cur.expect("-->");
                out.edges.push_back({id, parent, std::move(rel)});
            } else {
                cur.fail("' <--[' or ' --[' (edge to parent)");
            }
            if (!cur.at_end()) cur.fail("end of line");
            path.back().kids++;
        }
        path.push_back({id, label, 0});
    }
    if (!seen_root) {
        throw Error(ErrorKind::Parse, "line " + std::to_string(first + 1 + line_offset) +
                                          ": expected 'NODE 1' (empty description)");
    }
    std::sort(out.edges.begin(), out.edges.end());
    return out;
}

} // namespace

DescribedGraph parse_description(std::string_view text) {
    auto lines = split_lines(text);
    return parse_lines(lines, 0, lines.size(), 0);
}

std::vector<DescribedSection> parse_retrieval(std::string_view text) {
    auto lines = split_lines(text);
    std::vector<DescribedSection> sections;
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].starts_with("SUBGRAPH ")) starts.push_back(i);
    }
    for (std::size_t i = 0; i < lines.size() && (starts.empty() || i < starts.front()); ++i) {
        if (!lines[i].empty()) {
            throw Error(ErrorKind::Parse, "line " + std::to_string(i + 1) + ": expected 'SUBGRAPH '");
        }
    }
    for (std::size_t s = 0; s < starts.size(); ++s) {
        const std::size_t head = starts[s];
        const std::size_t end = s + 1 < starts.size() ? starts[s + 1] : lines.size();
        LineCursor cur(lines[head], head + 1);
        DescribedSection section;
        cur.expect("SUBGRAPH ");
        section.rank = static_cast<std::size_t>(cur.integer("section number"));
        cur.expect(" (center #");
        section.center = cur.integer("center node id");
        cur.expect(", score ");
        section.score = cur.decimal("score");
        cur.expect(")");
        if (!cur.at_end()) cur.fail("end of line");
        section.graph = parse_lines(lines, head + 1, end, 0);
        if (section.graph.root != section.center) {
            throw Error(ErrorKind::Semantic, "line " + std::to_string(head + 1) + ": section center #" +
                                                 std::to_string(section.center) + " but root is #" +
                                                 std::to_string(section.graph.root));
        }
        sections.push_back(std::move(section));
    }
    return sections;
}

DescribedGraph described_view(const TextGraph& g, const Subgraph& sub, NodeId root) {
    DescribedGraph out;
    out.root = root;
    for (NodeId n : sub.nodes()) out.nodes.emplace(n, g.node_text(n));
    for (EdgeId e : sub.edges()) {
        const auto& edge = g.edge(e);
        out.edges.push_back({edge.src, edge.dst, edge.text});
    }
    std::sort(out.edges.begin(), out.edges.end());
    return out;
}

Subgraph hard_drop(const TextGraph& g, const Subgraph& ego, const RelevanceScales& scales, double eps) {
    const NodeId center = ego.center().value_or(ego.nodes().empty() ? 0 : ego.nodes().front());
    auto below = [eps](const auto& map, auto key) {
        auto it = map.find(key);
        return it != map.end() && it->second < eps;
    };
    std::set<NodeId> kept_nodes;
    for (NodeId n : ego.nodes()) {
        if (n == center || !below(scales.node_alpha, n)) kept_nodes.insert(n);
    }
    std::vector<EdgeId> kept_edges;
    for (EdgeId e : ego.edges()) {
        const auto& edge = g.edge(e);
        if (below(scales.edge_alpha, e)) continue;
        if (kept_nodes.count(edge.src) && kept_nodes.count(edge.dst)) kept_edges.push_back(e);
    }

    // Keep only the part still connected to the center.
    std::unordered_map<NodeId, std::vector<std::pair<NodeId, EdgeId>>> adj;
    for (EdgeId e : kept_edges) {
        const auto& edge = g.edge(e);
        adj[edge.src].push_back({edge.dst, e});
        adj[edge.dst].push_back({edge.src, e});
    }
    std::set<NodeId> reached{center};
    std::deque<NodeId> frontier{center};
    while (!frontier.empty()) {
        NodeId v = frontier.front();
        frontier.pop_front();
        for (const auto& [u, e] : adj[v]) {
            if (reached.insert(u).second) frontier.push_back(u);
        }
    }
    std::vector<EdgeId> edges;
    for (EdgeId e : kept_edges) {
        if (reached.count(g.edge(e).src)) edges.push_back(e);
    }
    return Subgraph(ego.parent(), std::vector<NodeId>(reached.begin(), reached.end()), std::move(edges),
                    center, ego.hops());
}

std::string describe_retrieval(const std::vector<RankedSubgraph>& ranked, const TextGraph& g,
                               int hops, const DescribeOptions& options) {
    if (ranked.empty()) throw Error(ErrorKind::InvalidArgument, "nothing retrieved to describe");
    std::string out;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        const auto& r = ranked[i];
        Subgraph ego = ego_graph(g, r.entry.center, hops);
        if (options.scales && options.prune_eps > 0.0) {
            ego = hard_drop(g, ego, *options.scales, options.prune_eps);
        }
        char score[64];
        std::snprintf(score, sizeof(score), "%.6f", r.score);
        if (i) out.push_back('\n');
        out += "SUBGRAPH " + std::to_string(i + 1) + " (center #" + std::to_string(r.entry.center) +
               ", score " + score + ")\n";
        out += describe_subgraph(g, ego, r.entry.center).text;
    }
    return out;
}

} // namespace grag
