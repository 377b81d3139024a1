#include "grag/soft_prompt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "grag/error.hpp"
#include "grag/io.hpp"

namespace grag {

std::size_t GnnWeights::input_dim(std::size_t layer) const {
    return layer == 0 ? node_dim : layers[layer - 1].heads.size() * hidden;
}

void GnnWeights::validate() const {
    auto shape_error = [](std::size_t l, std::size_t h, const std::string& what) {
        throw Error(ErrorKind::DimensionMismatch,
                    "gnn layer " + std::to_string(l) + " head " + std::to_string(h) + ": " + what);
    };
    if (layers.empty()) throw Error(ErrorKind::DimensionMismatch, "gnn has no layers");
    if (hidden == 0) throw Error(ErrorKind::DimensionMismatch, "gnn hidden size is 0");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (layers[l].heads.empty()) {
            throw Error(ErrorKind::DimensionMismatch, "gnn layer " + std::to_string(l) + " has no heads");
        }
        const std::size_t in = input_dim(l);
        for (std::size_t h = 0; h < layers[l].heads.size(); ++h) {
            const auto& head = layers[l].heads[h];
            auto check = [&](const Matrix& m, std::size_t cols, const char* name) {
                if (m.rows != hidden || m.cols != cols) {
                    shape_error(l, h, std::string(name) + " is " + std::to_string(m.rows) + "x" +
                                          std::to_string(m.cols) + ", expected " + std::to_string(hidden) +
                                          "x" + std::to_string(cols));
                }
            };
            check(head.w_self, in, "w_self");
            check(head.w_nbr, in, "w_nbr");
            check(head.w_edge, edge_dim, "w_edge");
            if (head.attention.size() != 2 * hidden) {
                shape_error(l, h, "attention vector has " + std::to_string(head.attention.size()) +
                                      " entries, expected " + std::to_string(2 * hidden));
            }
        }
    }
}

GnnWeights gnn_from_json(const nlohmann::json& doc) {
    GnnWeights w;
    try {
        w.node_dim = doc.at("node_dim").get<std::size_t>();
        w.edge_dim = doc.at("edge_dim").get<std::size_t>();
        w.hidden = doc.at("hidden").get<std::size_t>();
        const auto& layers = doc.at("layers");
        for (std::size_t l = 0; l < layers.size(); ++l) {
            GnnLayer layer;
            const auto& heads = layers[l].at("heads");
            for (std::size_t h = 0; h < heads.size(); ++h) {
                std::string where = "layers[" + std::to_string(l) + "].heads[" + std::to_string(h) + "]";
                GnnHead head;
                head.w_self = matrix_from_json(heads[h].at("w_self"), where + ".w_self");
                head.w_nbr = matrix_from_json(heads[h].at("w_nbr"), where + ".w_nbr");
                head.w_edge = matrix_from_json(heads[h].at("w_edge"), where + ".w_edge");
                head.attention = heads[h].at("a").get<std::vector<double>>();
                head.slope = heads[h].value("slope", 0.2);
                layer.heads.push_back(std::move(head));
            }
            w.layers.push_back(std::move(layer));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("gnn weight file: ") + e.what());
    }
    w.validate();
    return w;
}

nlohmann::json gnn_to_json(const GnnWeights& w) {
    nlohmann::json doc;
    doc["node_dim"] = w.node_dim;
    doc["edge_dim"] = w.edge_dim;
    doc["hidden"] = w.hidden;
    auto& layers = doc["layers"] = nlohmann::json::array();
    for (const auto& layer : w.layers) {
        auto heads = nlohmann::json::array();
        for (const auto& head : layer.heads) {
            heads.push_back({{"w_self", matrix_to_json(head.w_self)},
                             {"w_nbr", matrix_to_json(head.w_nbr)},
                             {"w_edge", matrix_to_json(head.w_edge)},
                             {"a", head.attention},
                             {"slope", head.slope}});
        }
        layers.push_back({{"heads", std::move(heads)}});
    }
    return doc;
}

GnnWeights load_gnn(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
    }
    try {
        return gnn_from_json(doc);
    } catch (const Error& e) {
        rethrow_with_context(e, path.string());
    }
}

GnnWeights random_gnn(std::uint64_t seed, std::size_t node_dim, std::size_t edge_dim, std::size_t hidden,
                      std::size_t layers, std::size_t heads) {
    WeightRng rng(seed);
    GnnWeights w;
    w.node_dim = node_dim;
    w.edge_dim = edge_dim;
    w.hidden = hidden;
    w.layers.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in = w.input_dim(l);
        for (std::size_t h = 0; h < heads; ++h) {
            GnnHead head;
            head.w_self = random_matrix(rng, hidden, in);
            head.w_nbr = random_matrix(rng, hidden, in);
            head.w_edge = random_matrix(rng, hidden, edge_dim);
            const double bound = 1.0 / std::sqrt(static_cast<double>(2 * hidden));
            head.attention.resize(2 * hidden);
            for (double& a : head.attention) a = rng.uniform(-bound, bound);
            w.layers[l].heads.push_back(std::move(head));
        }
    }
    return w;
}

namespace {

struct Incidence {
    std::size_t source;  // index into the subgraph's node list
    std::size_t edge;    // index into the subgraph's edge list
};

std::vector<double> scaled(const std::vector<double>& x, double alpha, bool apply) {
    if (!apply) return x;
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = alpha * x[i];
    return out;
}

void add_into(std::vector<double>& acc, const std::vector<double>& x) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += x[i];
}

double dot(const double* a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace

NodeStates gnn_forward(const GnnInput& input, const GnnWeights& weights) {
    weights.validate();
    const auto& g = input.graph;
    const auto& sub = input.sub;
    const std::vector<NodeId>& nodes = sub.nodes();
    const std::vector<EdgeId>& edges = sub.edges();
    const bool apply_scales = input.scales != nullptr;

    auto node_index = [&nodes](NodeId id) {
        return static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), id) - nodes.begin());
    };

    std::vector<std::vector<double>> state(nodes.size());
    std::vector<double> node_alpha(nodes.size(), 1.0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        auto it = input.node_features.find(nodes[i]);
        if (it == input.node_features.end()) {
            throw Error(ErrorKind::InvalidArgument, "missing feature for node " + std::to_string(nodes[i]));
        }
        if (it->second.dim() != weights.node_dim) {
            throw Error(ErrorKind::DimensionMismatch, "node " + std::to_string(nodes[i]) + " feature has dim " +
                                                          std::to_string(it->second.dim()) + ", encoder expects " +
                                                          std::to_string(weights.node_dim));
        }
        state[i] = it->second.values;
        if (apply_scales) {
            auto a = input.scales->node_alpha.find(nodes[i]);
            if (a == input.scales->node_alpha.end()) {
                throw Error(ErrorKind::InvalidArgument, "missing scale for node " + std::to_string(nodes[i]));
            }
            node_alpha[i] = a->second;
        }
    }

    std::vector<std::vector<double>> edge_feature(edges.size());
    std::vector<double> edge_alpha(edges.size(), 1.0);
    std::vector<std::vector<Incidence>> incoming(nodes.size());
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const EdgeId e = edges[k];
        auto it = input.edge_features.find(e);
        if (it == input.edge_features.end()) {
            throw Error(ErrorKind::InvalidArgument, "missing feature for edge " + std::to_string(e));
        }
        if (it->second.dim() != weights.edge_dim) {
            throw Error(ErrorKind::DimensionMismatch, "edge " + std::to_string(e) + " feature has dim " +
                                                          std::to_string(it->second.dim()) + ", encoder expects " +
                                                          std::to_string(weights.edge_dim));
        }
        edge_feature[k] = it->second.values;
        if (apply_scales) {
            auto a = input.scales->edge_alpha.find(e);
            if (a == input.scales->edge_alpha.end()) {
                throw Error(ErrorKind::InvalidArgument, "missing scale for edge " + std::to_string(e));
            }
            edge_alpha[k] = a->second;
        }
        const auto& rec = g.edge(e);
        if (!sub.contains_node(rec.src) || !sub.contains_node(rec.dst)) {
            throw Error(ErrorKind::Referential, "edge " + std::to_string(e) + " leaves the subgraph");
        }
        const std::size_t s = node_index(rec.src);
        const std::size_t d = node_index(rec.dst);
        incoming[d].push_back({s, k});
        if (s != d) incoming[s].push_back({d, k});
    }

    const std::size_t hidden = weights.hidden;
    for (std::size_t l = 0; l < weights.layers.size(); ++l) {
        const auto& layer = weights.layers[l];
        const bool last = l + 1 == weights.layers.size();
        const std::size_t width = last ? hidden : hidden * layer.heads.size();
        std::vector<std::vector<double>> next(nodes.size(), std::vector<double>(width, 0.0));

        std::vector<std::vector<double>> scaled_state(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            scaled_state[i] = scaled(state[i], node_alpha[i], apply_scales);
        }

        for (std::size_t h = 0; h < layer.heads.size(); ++h) {
            const auto& head = layer.heads[h];
            auto numeric_fail = [&](const std::string& what) {
                throw Error(ErrorKind::Numeric,
                            "gnn layer " + std::to_string(l) + " head " + std::to_string(h) + ": " + what);
            };

            std::vector<std::vector<double>> from_node(nodes.size());
            std::vector<std::vector<double>> query(nodes.size());
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                from_node[i] = matvec(head.w_nbr, scaled_state[i]);
                query[i] = matvec(head.w_self, scaled_state[i]);
            }
            std::vector<std::vector<double>> from_edge(edges.size());
            for (std::size_t k = 0; k < edges.size(); ++k) {
                from_edge[k] = matvec(head.w_edge, scaled(edge_feature[k], edge_alpha[k], apply_scales));
            }

            struct Message {
                std::vector<double> value;
                double logit;
            };
            std::vector<Message> messages;
            for (std::size_t v = 0; v < nodes.size(); ++v) {
                messages.clear();
                messages.push_back({from_node[v], 0.0});
                for (const auto& inc : incoming[v]) {
                    std::vector<double> m = from_node[inc.source];
                    add_into(m, from_edge[inc.edge]);
                    messages.push_back({std::move(m), 0.0});
                }
                const double query_term = dot(head.attention.data(), query[v]);
                for (auto& msg : messages) {
                    double z = query_term + dot(head.attention.data() + hidden, msg.value);
                    msg.logit = z > 0.0 ? z : head.slope * z;
                }
                std::sort(messages.begin(), messages.end(), [](const Message& a, const Message& b) {
                    if (a.value != b.value) {
                        return std::lexicographical_compare(a.value.begin(), a.value.end(), b.value.begin(),
                                                            b.value.end());
                    }
                    return a.logit < b.logit;
                });

                double max_logit = messages.front().logit;
                for (const auto& msg : messages) max_logit = std::max(max_logit, msg.logit);
                double denom = 0.0;
                for (auto& msg : messages) {
                    msg.logit = std::exp(msg.logit - max_logit);
                    denom += msg.logit;
                }
                std::vector<double> out(hidden, 0.0);
                for (const auto& msg : messages) {
                    const double w = msg.logit / denom;
                    for (std::size_t i = 0; i < hidden; ++i) out[i] += w * msg.value[i];
                }
                for (std::size_t i = 0; i < hidden; ++i) {
                    if (!std::isfinite(out[i])) numeric_fail("non-finite state for node " + std::to_string(nodes[v]));
                }
                if (last) {
                    for (std::size_t i = 0; i < hidden; ++i) next[v][i] += out[i];
                } else {
                    std::copy(out.begin(), out.end(), next[v].begin() + static_cast<std::ptrdiff_t>(h * hidden));
                }
            }
        }
        if (last) {
            const double heads = static_cast<double>(layer.heads.size());
            for (auto& row : next) {
                for (double& x : row) x /= heads;
            }
        }
        state = std::move(next);
    }

    NodeStates out;
    for (std::size_t i = 0; i < nodes.size(); ++i) out.emplace(nodes[i], std::move(state[i]));
    return out;
}

std::vector<double> readout(const NodeStates& states) {
    if (states.empty()) throw Error(ErrorKind::InvalidArgument, "readout of an empty state map");
    const std::size_t dim = states.begin()->second.size();
    std::vector<double> sum(dim, 0.0);
    for (const auto& [id, s] : states) {
        if (s.size() != dim) {
            throw Error(ErrorKind::DimensionMismatch, "readout: node " + std::to_string(id) + " state has dim " +
                                                          std::to_string(s.size()));
        }
        add_into(sum, s);
    }
    const double n = static_cast<double>(states.size());
    for (double& x : sum) x /= n;
    return sum;
}

GraphToken project_token(const std::vector<double>& pooled, const MlpWeights& projection,
                         std::size_t d_llm) {
    if (projection.input_dim != pooled.size()) {
        throw Error(ErrorKind::DimensionMismatch, "projection expects input dim " +
                                                      std::to_string(projection.input_dim) + ", pooled state has " +
                                                      std::to_string(pooled.size()));
    }
    if (projection.output_dim() != d_llm) {
        throw Error(ErrorKind::DimensionMismatch, "projection outputs dim " +
                                                      std::to_string(projection.output_dim()) +
                                                      ", d_llm is " + std::to_string(d_llm));
    }
    return GraphToken{mlp_forward(projection, pooled)};
}

} // namespace grag
