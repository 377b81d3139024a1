#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "grag/error.hpp"
#include "grag/graph.hpp"
#include "oracles.hpp"

using namespace grag;
namespace gt = grag::testing;

namespace {

TextGraph path_graph(int n) {
    std::vector<NodeRecord> nodes;
    std::vector<EdgeRecord> edges;
    for (int i = 0; i < n; ++i) nodes.push_back({i, "n" + std::to_string(i)});
    for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, "next", static_cast<EdgeId>(i)});
    return TextGraph(nodes, edges);
}

TextGraph triangle() {
    return TextGraph({{0, "a"}, {1, "b"}, {2, "c"}},
                     {{0, 1, "r", 0}, {0, 2, "r", 1}, {1, 2, "r", 2}});
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::Io;
}

} // namespace

TEST(LoadGraph, TwoNodeDocument) {
    auto g = parse_graph_json(R"({"nodes":[{"id":0,"text":"a"},{"id":1,"text":"b"}],
                                  "edges":[{"src":0,"dst":1,"text":"r"}]})");
    EXPECT_EQ(g.node_count(), 2u);
    EXPECT_EQ(g.edge_count(), 1u);
    EXPECT_EQ(g.edge(0).text, "r");
}

TEST(LoadGraph, DanglingEndpointNamesEdge) {
    try {
        parse_graph_json(R"({"nodes":[{"id":0,"text":"a"}],"edges":[{"src":0,"dst":9,"text":"r"}]})");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Referential);
        EXPECT_NE(std::string(e.what()).find("9"), std::string::npos);
    }
}

TEST(LoadGraph, MalformedDocumentReportsLine) {
    try {
        parse_graph_json("{\"nodes\":[\n{\"id\":0,\n\"text\":}]}");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Parse);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(LoadGraph, WrongFieldTypeNamesField) {
    try {
        parse_graph_json(R"({"nodes":[{"id":"x","text":"a"}],"edges":[]})");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Parse);
        EXPECT_NE(std::string(e.what()).find("nodes[0]: field 'id'"), std::string::npos) << e.what();
    }
}

TEST(LoadGraph, DuplicateIdRejected) {
    EXPECT_EQ(kind_of([] { TextGraph({{1, "a"}, {1, "b"}}, {}); }), ErrorKind::Referential);
}

TEST(LoadGraph, CsvPairWithQuotedFields) {
    auto g = parse_graph_csv("node_id,node_attr\n0,\"solar, flares\"\n1,\"say \"\"hi\"\"\"\n",
                             "src,edge_attr,dst\n0,causes,1\n1,\"multi\nline\",0\n");
    ASSERT_EQ(g.node_count(), 2u);
    EXPECT_EQ(g.node_text(0), "solar, flares");
    EXPECT_EQ(g.node_text(1), "say \"hi\"");
    ASSERT_EQ(g.edge_count(), 2u);
    EXPECT_EQ(g.edge(1).text, "multi\nline");
    EXPECT_EQ(g.edge(1).src, 1);
}

TEST(LoadGraph, CsvDirectoryConvention) {
    auto dir = std::filesystem::temp_directory_path() / "grag_graph_csv";
    std::filesystem::create_directories(dir / "nodes");
    std::filesystem::create_directories(dir / "edges");
    std::ofstream(dir / "nodes" / "3.csv") << "node_id,node_attr\n0,a\n1,b\n";
    std::ofstream(dir / "edges" / "3.csv") << "src,edge_attr,dst\n0,r,1\n";
    auto g = load_graph(dir / "nodes" / "3.csv");
    EXPECT_EQ(g.node_count(), 2u);
    EXPECT_EQ(g.edge_count(), 1u);
    std::filesystem::remove_all(dir);
}

TEST(LoadGraph, MissingFileIsIoError) {
    EXPECT_EQ(kind_of([] { load_graph("/nonexistent/graph.json"); }), ErrorKind::Io);
}

TEST(LoadGraph, FingerprintTracksContent) {
    auto a = triangle();
    auto b = triangle();
    EXPECT_EQ(a.fingerprint(), b.fingerprint());
    EXPECT_NE(a.uid(), b.uid());
    auto c = TextGraph({{0, "a"}, {1, "b"}, {2, "c"}}, {{0, 1, "r", 0}, {0, 2, "r", 1}, {2, 1, "r", 2}});
    EXPECT_NE(a.fingerprint(), c.fingerprint());
    EXPECT_EQ(a.fingerprint().size(), 64u);
}

TEST(KHop, PathCenterZeroTwoHops) {
    auto g = path_graph(4);
    EXPECT_EQ(k_hop_neighborhood(g, 0, 2), (std::vector<NodeId>{0, 1, 2}));
}

TEST(KHop, IsolatedNode) {
    TextGraph g({{7, "alone"}, {8, "other"}}, {});
    for (int k = 1; k <= 4; ++k) EXPECT_EQ(k_hop_neighborhood(g, 7, k), (std::vector<NodeId>{7}));
}

TEST(KHop, Errors) {
    auto g = path_graph(3);
    EXPECT_EQ(kind_of([&] { k_hop_neighborhood(g, 42, 1); }), ErrorKind::NotFound);
    EXPECT_EQ(kind_of([&] { k_hop_neighborhood(g, 0, 0); }), ErrorKind::InvalidArgument);
}

TEST(KHop, DirectionIgnored) {
    TextGraph g({{0, "a"}, {1, "b"}, {2, "c"}}, {{1, 0, "r", 0}, {2, 1, "r", 1}});
    EXPECT_EQ(k_hop_neighborhood(g, 0, 2), (std::vector<NodeId>{0, 1, 2}));
}

TEST(KHop, MatchesFloydWarshallOracle) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        gt::RandomGraphOptions opt;
        opt.max_nodes = 30;
        opt.connected = trial % 2 == 0;
        opt.edge_factor = 0.8;
        opt.sparse_ids = true;
        opt.self_loops = true;
        opt.parallel = true;
        auto g = gt::random_graph(rng, opt);
        auto dist = gt::floyd_warshall(g);
        for (std::size_t c = 0; c < g.node_count(); ++c) {
            for (int k = 1; k <= 3; ++k) {
                std::vector<NodeId> expect;
                for (std::size_t j = 0; j < g.node_count(); ++j)
                    if (dist[c][j] <= k) expect.push_back(g.nodes()[j].id);
                std::sort(expect.begin(), expect.end());
                EXPECT_EQ(k_hop_neighborhood(g, g.nodes()[c].id, k), expect);
            }
        }
    }
}

TEST(KHop, Monotone) {
    std::mt19937_64 rng(12);
    auto g = gt::random_graph(rng, {.max_nodes = 40, .edge_factor = 0.5});
    for (const auto& n : g.nodes()) {
        for (int k = 1; k < 5; ++k) {
            auto a = k_hop_neighborhood(g, n.id, k);
            auto b = k_hop_neighborhood(g, n.id, k + 1);
            EXPECT_TRUE(std::includes(b.begin(), b.end(), a.begin(), a.end()));
        }
    }
}

TEST(EgoGraph, TriangleAndPath) {
    auto t = triangle();
    auto s = ego_graph(t, 0, 1);
    EXPECT_EQ(s.nodes(), (std::vector<NodeId>{0, 1, 2}));
    EXPECT_EQ(s.edges(), (std::vector<EdgeId>{0, 1, 2}));
    EXPECT_EQ(s.center(), std::optional<NodeId>(0));
    EXPECT_EQ(s.hops(), std::optional<int>(1));

    auto p = path_graph(4);
    auto e = ego_graph(p, 0, 2);
    EXPECT_EQ(e.nodes(), (std::vector<NodeId>{0, 1, 2}));
    EXPECT_EQ(e.edges(), (std::vector<EdgeId>{0, 1}));
}

TEST(EgoGraph, MatchesEdgeFilterOracle) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 30; ++trial) {
        auto g = gt::random_graph(rng, {.max_nodes = 40, .edge_factor = 1.0, .self_loops = true,
                                        .parallel = true, .sparse_ids = true});
        for (const auto& n : g.nodes()) {
            auto sub = ego_graph(g, n.id, 1 + trial % 2);
            std::set<NodeId> members(sub.nodes().begin(), sub.nodes().end());
            EXPECT_EQ(sub.edges(), gt::edges_within(g, members));
            EXPECT_LE(sub.nodes().size(), g.node_count());
        }
    }
}

TEST(EgoGraph, LargeKCoversComponent) {
    std::mt19937_64 rng(14);
    auto g = gt::random_graph(rng, {.min_nodes = 20, .max_nodes = 20, .edge_factor = 0.3, .connected = false});
    auto dist = gt::floyd_warshall(g);
    for (std::size_t c = 0; c < g.node_count(); ++c) {
        std::size_t reach = 0;
        for (auto d : dist[c]) reach += d < 1000 ? 1 : 0;
        EXPECT_EQ(ego_graph(g, g.nodes()[c].id, 25).nodes().size(), reach);
    }
}

TEST(Union, IdempotentAndDisjoint) {
    auto g = path_graph(4);
    auto a = ego_graph(g, 0, 1);
    auto u = union_subgraphs({a, a});
    EXPECT_TRUE(u.same_elements(a));
    EXPECT_FALSE(u.center().has_value());

    auto left = induced_subgraph(g, {0, 1});
    auto right = induced_subgraph(g, {2, 3});
    auto both = union_subgraphs({left, right});
    EXPECT_EQ(both.nodes(), (std::vector<NodeId>{0, 1, 2, 3}));
    EXPECT_EQ(both.edges(), (std::vector<EdgeId>{0, 2}));
}

TEST(Union, Errors) {
    auto g = path_graph(3);
    auto h = path_graph(3);
    EXPECT_EQ(kind_of([] { union_subgraphs({}); }), ErrorKind::InvalidArgument);
    EXPECT_EQ(kind_of([&] { union_subgraphs({ego_graph(g, 0, 1), ego_graph(h, 0, 1)}); }),
              ErrorKind::InvalidArgument);
}

TEST(Union, SetUnionOracleAndAlgebra) {
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 20; ++trial) {
        auto g = gt::random_graph(rng, {.max_nodes = 50, .edge_factor = 0.6, .sparse_ids = true});
        std::vector<Subgraph> parts;
        std::set<NodeId> nodes;
        std::set<EdgeId> edges;
        std::uniform_int_distribution<std::size_t> pick(0, g.node_count() - 1);
        for (int i = 0; i < 5; ++i) {
            parts.push_back(ego_graph(g, g.nodes()[pick(rng)].id, 2));
            nodes.insert(parts.back().nodes().begin(), parts.back().nodes().end());
            edges.insert(parts.back().edges().begin(), parts.back().edges().end());
        }
        auto u = union_subgraphs(parts);
        EXPECT_EQ(u.nodes(), std::vector<NodeId>(nodes.begin(), nodes.end()));
        EXPECT_EQ(u.edges(), std::vector<EdgeId>(edges.begin(), edges.end()));

        auto rev = parts;
        std::reverse(rev.begin(), rev.end());
        EXPECT_TRUE(union_subgraphs(rev).same_elements(u));
        auto left = union_subgraphs({union_subgraphs({parts[0], parts[1]}), parts[2]});
        auto right = union_subgraphs({parts[0], union_subgraphs({parts[1], parts[2]})});
        EXPECT_TRUE(left.same_elements(right));
    }
}
