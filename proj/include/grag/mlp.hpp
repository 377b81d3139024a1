#pragma once
// Dense feed-forward stacks used for the relevance-scale heads and the
// graph-token projection, plus the JSON weight-file format they share:
//   {"input_dim":d,"layers":[{"w":[[...]...],"b":[...],"act":"relu|sigmoid|identity"}...]}

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace grag {

enum class Activation { Relu, Sigmoid, Identity };

const char* to_string(Activation act);
Activation parse_activation(std::string_view name);

// Row-major out x in matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    bool operator==(const Matrix&) const = default;

    static Matrix identity(std::size_t n);
};

// y = M x. Throws Error{DimensionMismatch}.
std::vector<double> matvec(const Matrix& m, const std::vector<double>& x);

Matrix matrix_from_json(const nlohmann::json& rows, std::string_view where);
nlohmann::json matrix_to_json(const Matrix& m);

struct DenseLayer {
    Matrix w;
    std::vector<double> b;
    Activation act = Activation::Identity;

    bool operator==(const DenseLayer&) const = default;
};

struct MlpWeights {
    std::size_t input_dim = 0;
    std::vector<DenseLayer> layers;

    std::size_t output_dim() const { return layers.empty() ? input_dim : layers.back().w.rows; }
    // Throws Error{DimensionMismatch} when layer shapes do not chain.
    void validate() const;
    bool operator==(const MlpWeights&) const = default;
};

MlpWeights mlp_from_json(const nlohmann::json& doc);
nlohmann::json mlp_to_json(const MlpWeights& w);
MlpWeights load_mlp(const std::filesystem::path& path);

// y_l = act_l(W_l y_{l-1} + b_l). Errors: DimensionMismatch on input dim,
// Numeric naming the layer when an activation is non-finite.
std::vector<double> mlp_forward(const MlpWeights& w, const std::vector<double>& x);

// Deterministic pseudorandom weights: uniform in +-1/sqrt(fan_in) drawn from
// a splitmix64 stream so the same seed gives the same file everywhere.
class WeightRng {
public:
    explicit WeightRng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next_u64();
    double uniform(double lo, double hi);

private:
    std::uint64_t state_;
};

Matrix random_matrix(WeightRng& rng, std::size_t rows, std::size_t cols);

// Shape: dims[0] -> dims[1] -> ... with `hidden` activation between and
// `last` on the output layer.
MlpWeights random_mlp(std::uint64_t seed, const std::vector<std::size_t>& dims,
                      Activation hidden, Activation last);

} // namespace grag
