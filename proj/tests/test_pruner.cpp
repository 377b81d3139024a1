#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "grag/error.hpp"
#include "grag/mlp.hpp"
#include "grag/pruner.hpp"
#include "oracles.hpp"
#include "wide_mlp.hpp"

using namespace grag;
namespace gt = grag::testing;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::Io;
}

MlpWeights zero_head(std::size_t dim) {
    MlpWeights w;
    w.input_dim = dim;
    w.layers.push_back({Matrix(1, dim), {0.0}, Activation::Sigmoid});
    return w;
}

} // namespace

TEST(ElementwiseDistance, Examples) {
    Embedding z({1, 0}), q({0, 1});
    EXPECT_EQ(elementwise_distance(z, q), Embedding({1, 1}));
    EXPECT_EQ(elementwise_distance(z, z), Embedding(2));
    EXPECT_EQ(kind_of([&] { elementwise_distance(z, Embedding(3)); }), ErrorKind::DimensionMismatch);
}

TEST(ElementwiseDistance, ComponentwiseOracle) {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> n(0, 1);
    for (int t = 0; t < 100; ++t) {
        Embedding a(17), b(17);
        for (std::size_t i = 0; i < 17; ++i) {
            a[i] = n(rng);
            b[i] = n(rng);
        }
        auto d = elementwise_distance(a, b);
        for (std::size_t i = 0; i < 17; ++i) {
            gt::Wide diff = gt::Wide(a[i]) - gt::Wide(b[i]);
            EXPECT_NEAR(d[i], static_cast<double>(diff < 0 ? -diff : diff), 1e-15);
        }
    }
}

TEST(Mlp, ZeroWeightsSigmoidIsHalf) {
    auto w = zero_head(5);
    EXPECT_EQ(mlp_forward(w, {1, -2, 3, 4, 5}), std::vector<double>{0.5});
}

TEST(Mlp, IdentityLayer) {
    MlpWeights w;
    w.input_dim = 3;
    w.layers.push_back({Matrix::identity(3), {0, 0, 0}, Activation::Identity});
    std::vector<double> x = {0.1, -7.5, 3e10};
    EXPECT_EQ(mlp_forward(w, x), x);
}

TEST(Mlp, ExtendedPrecisionOracle) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto w = random_mlp(seed, {12, 9, 4}, Activation::Relu, seed % 2 ? Activation::Sigmoid : Activation::Identity);
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> n(0, 2);
        std::vector<double> x(12);
        for (auto& v : x) v = n(rng);
        auto got = mlp_forward(w, x);
        auto want = gt::wide_mlp(gt::wide_layers(w), x);
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-10);
    }
}

TEST(Mlp, Errors) {
    auto w = random_mlp(1, {4, 3, 1}, Activation::Relu, Activation::Sigmoid);
    EXPECT_EQ(kind_of([&] { mlp_forward(w, {1, 2, 3}); }), ErrorKind::DimensionMismatch);

    MlpWeights big;
    big.input_dim = 1;
    Matrix m(1, 1);
    m(0, 0) = 1e300;
    big.layers.push_back({m, {0}, Activation::Identity});
    big.layers.push_back({m, {0}, Activation::Identity});
    try {
        mlp_forward(big, {1e300});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Numeric);
        EXPECT_NE(std::string(e.what()).find("layer 0"), std::string::npos) << e.what();
    }

    MlpWeights broken = w;
    broken.layers[1].w = Matrix(1, 5);
    EXPECT_EQ(kind_of([&] { broken.validate(); }), ErrorKind::DimensionMismatch);
}

TEST(Mlp, JsonRoundTrip) {
    auto w = random_mlp(7, {6, 3, 2}, Activation::Relu, Activation::Sigmoid);
    EXPECT_EQ(mlp_from_json(nlohmann::json::parse(mlp_to_json(w).dump())), w);

    auto path = std::filesystem::temp_directory_path() / "grag_mlp.json";
    std::ofstream(path) << mlp_to_json(w).dump();
    EXPECT_EQ(load_mlp(path), w);
    std::ofstream(path) << R"({"input_dim":2,"layers":[{"w":[[1,2]],"b":[0],"act":"tanh"}]})";
    EXPECT_EQ(kind_of([&] { load_mlp(path); }), ErrorKind::Parse);
    std::ofstream(path) << R"({"input_dim":2,"layers":[{"w":[[1,2],[3]],"b":[0,0],"act":"relu"}]})";
    EXPECT_EQ(kind_of([&] { load_mlp(path); }), ErrorKind::Parse);
    std::filesystem::remove(path);
}

TEST(Mlp, RandomIsSeeded) {
    EXPECT_EQ(random_mlp(5, {8, 4, 1}, Activation::Relu, Activation::Sigmoid),
              random_mlp(5, {8, 4, 1}, Activation::Relu, Activation::Sigmoid));
    EXPECT_NE(random_mlp(5, {8, 4, 1}, Activation::Relu, Activation::Sigmoid),
              random_mlp(6, {8, 4, 1}, Activation::Relu, Activation::Sigmoid));
    auto w = random_mlp(5, {16, 4}, Activation::Relu, Activation::Identity);
    for (double v : w.layers[0].w.data) EXPECT_LE(std::fabs(v), 0.25);
}

TEST(ScaleHead, DefaultShapeAndChecks) {
    auto h = default_scale_head(32, 9);
    ASSERT_EQ(h.layers.size(), 2u);
    EXPECT_EQ(h.layers[0].w.rows, 16u);
    EXPECT_EQ(h.layers[0].act, Activation::Relu);
    EXPECT_EQ(h.layers[1].act, Activation::Sigmoid);
    EXPECT_NO_THROW(check_scale_head(h, 32, "phi1"));
    EXPECT_EQ(kind_of([&] { check_scale_head(h, 16, "phi1"); }), ErrorKind::DimensionMismatch);
    auto no_sigmoid = random_mlp(1, {32, 1}, Activation::Relu, Activation::Identity);
    EXPECT_EQ(kind_of([&] { check_scale_head(no_sigmoid, 32, "phi1"); }), ErrorKind::InvalidArgument);
    auto wide = random_mlp(1, {32, 2}, Activation::Relu, Activation::Sigmoid);
    EXPECT_EQ(kind_of([&] { check_scale_head(wide, 32, "phi1"); }), ErrorKind::InvalidArgument);
}

TEST(RelevanceScales, ZeroHeadsGiveHalf) {
    std::mt19937_64 rng(42);
    auto g = gt::random_graph(rng, {.max_nodes = 20});
    HashEmbedder e(16, "p");
    auto sub = ego_graph(g, g.nodes()[0].id, 2);
    auto s = relevance_scales(g, sub, e.embed_one("question"), zero_head(16), zero_head(16), e);
    EXPECT_EQ(s.node_alpha.size(), sub.nodes().size());
    EXPECT_EQ(s.edge_alpha.size(), sub.edges().size());
    for (auto [id, a] : s.node_alpha) EXPECT_EQ(a, 0.5);
    for (auto [id, a] : s.edge_alpha) EXPECT_EQ(a, 0.5);
}

TEST(RelevanceScales, IdenticalTextsIdenticalScale) {
    TextGraph g({{0, "same text"}, {1, "same text"}, {2, "other"}}, {{0, 1, "r", 0}, {1, 2, "r", 1}});
    HashEmbedder e(16, "p");
    auto sub = ego_graph(g, 1, 1);
    auto s = relevance_scales(g, sub, e.embed_one("query words"), default_scale_head(16, 1),
                              default_scale_head(16, 2), e);
    EXPECT_EQ(s.node_alpha.at(0), s.node_alpha.at(1));
    EXPECT_EQ(s.edge_alpha.at(0), s.edge_alpha.at(1));
}

TEST(RelevanceScales, OpenIntervalUnderSaturation) {
    TextGraph g({{0, "a"}}, {});
    HashEmbedder e(8, "p");
    auto head = zero_head(8);
    head.layers[0].b[0] = 1000.0;
    auto s = relevance_scales(g, induced_subgraph(g, {0}), e.embed_one("b"), head, head, e);
    EXPECT_LT(s.node_alpha.at(0), 1.0);
    head.layers[0].b[0] = -1000.0;
    s = relevance_scales(g, induced_subgraph(g, {0}), e.embed_one("b"), head, head, e);
    EXPECT_GT(s.node_alpha.at(0), 0.0);
}

TEST(RelevanceScales, RecomputeOracle) {
    std::mt19937_64 rng(43);
    for (int t = 0; t < 10; ++t) {
        auto g = gt::random_graph(rng, {.max_nodes = 40, .edge_factor = 1.0, .parallel = true});
        HashEmbedder e(24, "p");
        auto phi1 = default_scale_head(24, 100 + t);
        auto phi2 = default_scale_head(24, 200 + t);
        auto q = e.embed_one(gt::random_phrase(rng));
        auto sub = ego_graph(g, g.nodes()[0].id, 2);
        auto s = relevance_scales(g, sub, q, phi1, phi2, e);
        auto oracle = [&](const MlpWeights& head, const std::string& text) {
            auto z = hash_embed(text, 24, "p");
            std::vector<double> d(24);
            for (std::size_t i = 0; i < 24; ++i) d[i] = std::fabs(z[i] - q[i]);
            return gt::wide_mlp(gt::wide_layers(head), d)[0];
        };
        for (NodeId n : sub.nodes()) EXPECT_NEAR(s.node_alpha.at(n), oracle(phi1, g.node_text(n)), 1e-10);
        for (EdgeId id : sub.edges()) EXPECT_NEAR(s.edge_alpha.at(id), oracle(phi2, g.edge(id).text), 1e-10);
    }
}

TEST(MergePruned, SingleAndOverlap) {
    TextGraph g({{0, "a"}, {1, "b"}, {2, "c"}, {3, "d"}}, {{0, 1, "r", 0}, {1, 2, "r", 1}, {2, 3, "r", 2}});
    HashEmbedder e(16, "m");
    auto idx = build_index(g, 1, e);
    auto q = e.embed_one("a");
    auto phi1 = default_scale_head(16, 1), phi2 = default_scale_head(16, 2);

    auto one = rank_top_n(idx, q, 1);
    auto p1 = merge_pruned(one, g, 1, "a", q, phi1, phi2, e);
    EXPECT_TRUE(p1.sub.same_elements(ego_graph(g, one[0].entry.center, 1)));
    EXPECT_EQ(p1.query_hash.size(), 16u);

    std::vector<RankedSubgraph> two = {{idx.entries[1], 0.5, 1}, {idx.entries[2], 0.4, 2}};
    auto p2 = merge_pruned(two, g, 1, "a", q, phi1, phi2, e);
    EXPECT_EQ(p2.sub.nodes(), (std::vector<NodeId>{0, 1, 2, 3}));
    EXPECT_EQ(p2.scales.node_alpha.size(), 4u);
    std::reverse(two.begin(), two.end());
    auto p3 = merge_pruned(two, g, 1, "a", q, phi1, phi2, e);
    EXPECT_EQ(p3.scales, p2.scales);

    EXPECT_EQ(kind_of([&] { merge_pruned({}, g, 1, "a", q, phi1, phi2, e); }), ErrorKind::InvalidArgument);
}

TEST(MergePruned, TopFiveSetOracle) {
    std::mt19937_64 rng(44);
    auto g = gt::random_graph(rng, {.min_nodes = 50, .max_nodes = 50, .edge_factor = 0.5, .sparse_ids = true});
    HashEmbedder e(32, "m");
    auto idx = build_index(g, 2, e);
    auto q = e.embed_one("solar flare forecast");
    auto ranked = rank_top_n(idx, q, 5);
    auto p = merge_pruned(ranked, g, 2, "solar flare forecast", q, default_scale_head(32, 1),
                          default_scale_head(32, 2), e);

    auto dist = gt::floyd_warshall(g);
    std::map<NodeId, std::size_t> pos;
    for (std::size_t i = 0; i < g.node_count(); ++i) pos[g.nodes()[i].id] = i;
    std::set<NodeId> nodes;
    std::set<EdgeId> edges;
    for (const auto& r : ranked) {
        std::set<NodeId> ego;
        for (std::size_t j = 0; j < g.node_count(); ++j)
            if (dist[pos[r.entry.center]][j] <= 2) ego.insert(g.nodes()[j].id);
        nodes.insert(ego.begin(), ego.end());
        for (EdgeId id : gt::edges_within(g, ego)) edges.insert(id);
    }
    EXPECT_EQ(p.sub.nodes(), std::vector<NodeId>(nodes.begin(), nodes.end()));
    EXPECT_EQ(p.sub.edges(), std::vector<EdgeId>(edges.begin(), edges.end()));
    EXPECT_EQ(p.scales.node_alpha.size(), nodes.size());
    EXPECT_EQ(p.scales.edge_alpha.size(), edges.size());
}
