#include "grag/mlp.hpp"

#include <cmath>

#include "grag/error.hpp"
#include "grag/io.hpp"

namespace grag {

const char* to_string(Activation act) {
    switch (act) {
        case Activation::Relu: return "relu";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Identity: return "identity";
    }
    return "identity";
}

Activation parse_activation(std::string_view name) {
    if (name == "relu") return Activation::Relu;
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "identity") return Activation::Identity;
    throw Error(ErrorKind::Parse, "unknown activation '" + std::string(name) + "'");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::vector<double> matvec(const Matrix& m, const std::vector<double>& x) {
    if (x.size() != m.cols) {
        throw Error(ErrorKind::DimensionMismatch, "matvec: matrix has " + std::to_string(m.cols) +
                                                      " columns, vector has " +
                                                      std::to_string(x.size()) + " entries");
    }
    std::vector<double> y(m.rows, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double* row = m.data.data() + r * m.cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
    return y;
}

Matrix matrix_from_json(const nlohmann::json& rows, std::string_view where) {
    if (!rows.is_array()) throw Error(ErrorKind::Parse, std::string(where) + ": expected a matrix");
    Matrix m;
    m.rows = rows.size();
    m.cols = m.rows ? rows[0].size() : 0;
    m.data.reserve(m.rows * m.cols);
    for (std::size_t r = 0; r < m.rows; ++r) {
        if (!rows[r].is_array() || rows[r].size() != m.cols) {
            throw Error(ErrorKind::Parse, std::string(where) + ": row " + std::to_string(r) +
                                              " has a different length");
        }
        for (const auto& v : rows[r]) {
            if (!v.is_number()) {
                throw Error(ErrorKind::Parse, std::string(where) + ": non-numeric entry in row " +
                                                  std::to_string(r));
            }
            m.data.push_back(v.get<double>());
        }
    }
    return m;
}

nlohmann::json matrix_to_json(const Matrix& m) {
    auto rows = nlohmann::json::array();
    for (std::size_t r = 0; r < m.rows; ++r) {
        rows.push_back(std::vector<double>(m.data.begin() + static_cast<std::ptrdiff_t>(r * m.cols),
                                           m.data.begin() + static_cast<std::ptrdiff_t>((r + 1) * m.cols)));
    }
    return rows;
}

void MlpWeights::validate() const {
    std::size_t in = input_dim;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        if (layer.w.cols != in) {
            throw Error(ErrorKind::DimensionMismatch, "layer " + std::to_string(l) + " expects input dim " +
                                                          std::to_string(layer.w.cols) + ", previous output is " +
                                                          std::to_string(in));
        }
        if (layer.b.size() != layer.w.rows) {
            throw Error(ErrorKind::DimensionMismatch, "layer " + std::to_string(l) + " bias has " +
                                                          std::to_string(layer.b.size()) + " entries for " +
                                                          std::to_string(layer.w.rows) + " outputs");
        }
        in = layer.w.rows;
    }
}

MlpWeights mlp_from_json(const nlohmann::json& doc) {
    MlpWeights w;
    try {
        w.input_dim = doc.at("input_dim").get<std::size_t>();
        const auto& layers = doc.at("layers");
        for (std::size_t l = 0; l < layers.size(); ++l) {
            std::string where = "layers[" + std::to_string(l) + "]";
            DenseLayer layer;
            layer.w = matrix_from_json(layers[l].at("w"), where + ".w");
            layer.b = layers[l].at("b").get<std::vector<double>>();
            layer.act = parse_activation(layers[l].value("act", std::string("identity")));
            w.layers.push_back(std::move(layer));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("mlp weight file: ") + e.what());
    }
    w.validate();
    return w;
}

nlohmann::json mlp_to_json(const MlpWeights& w) {
    nlohmann::json doc;
    doc["input_dim"] = w.input_dim;
    auto& layers = doc["layers"] = nlohmann::json::array();
    for (const auto& layer : w.layers) {
        layers.push_back({{"w", matrix_to_json(layer.w)}, {"b", layer.b}, {"act", to_string(layer.act)}});
    }
    return doc;
}

MlpWeights load_mlp(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
    }
    try {
        return mlp_from_json(doc);
    } catch (const Error& e) {
        rethrow_with_context(e, path.string());
    }
}

std::vector<double> mlp_forward(const MlpWeights& w, const std::vector<double>& x) {
    if (x.size() != w.input_dim) {
        throw Error(ErrorKind::DimensionMismatch, "mlp input has dim " + std::to_string(x.size()) +
                                                      ", weights expect " + std::to_string(w.input_dim));
    }
    std::vector<double> y = x;
    for (std::size_t l = 0; l < w.layers.size(); ++l) {
        const auto& layer = w.layers[l];
        y = matvec(layer.w, y);
        for (std::size_t i = 0; i < y.size(); ++i) {
            double v = y[i] + layer.b[i];
            switch (layer.act) {
                case Activation::Relu: v = v > 0.0 ? v : 0.0; break;
                case Activation::Sigmoid: v = 1.0 / (1.0 + std::exp(-v)); break;
                case Activation::Identity: break;
            }
            if (!std::isfinite(v)) {
                throw Error(ErrorKind::Numeric, "mlp layer " + std::to_string(l) +
                                                    ": non-finite activation at unit " + std::to_string(i));
            }
            y[i] = v;
        }
    }
    return y;
}

std::uint64_t WeightRng::next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double WeightRng::uniform(double lo, double hi) {
    double unit = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * unit;
}

Matrix random_matrix(WeightRng& rng, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    const double bound = cols ? 1.0 / std::sqrt(static_cast<double>(cols)) : 1.0;
    for (double& v : m.data) v = rng.uniform(-bound, bound);
    return m;
}

MlpWeights random_mlp(std::uint64_t seed, const std::vector<std::size_t>& dims, Activation hidden,
                      Activation last) {
    if (dims.size() < 2) throw Error(ErrorKind::InvalidArgument, "mlp needs at least input and output dims");
    WeightRng rng(seed);
    MlpWeights w;
    w.input_dim = dims.front();
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        DenseLayer layer;
        layer.w = random_matrix(rng, dims[l + 1], dims[l]);
        layer.b.resize(dims[l + 1]);
        const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
        for (double& b : layer.b) b = rng.uniform(-bound, bound);
        layer.act = (l + 2 == dims.size()) ? last : hidden;
        w.layers.push_back(std::move(layer));
    }
    return w;
}

} // namespace grag
