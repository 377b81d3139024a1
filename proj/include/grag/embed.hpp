#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace grag {

struct Embedding {
    std::vector<double> values;

    Embedding() = default;
    explicit Embedding(std::vector<double> v) : values(std::move(v)) {}
    explicit Embedding(std::size_t dim) : values(dim, 0.0) {}

    std::size_t dim() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
    bool operator==(const Embedding&) const = default;
};

// Throws Error{Numeric} if any entry is NaN or infinite.
void require_finite(const Embedding& v, std::string_view what);

// Lowercased tokens of `text`: maximal runs of ASCII letters/digits and
// non-ASCII bytes (so UTF-8 words stay whole).
std::vector<std::string> hash_tokens(std::string_view text);

// Signed feature hashing of the tokens into `dim` buckets, L2-normalized.
Embedding hash_embed(std::string_view text, std::size_t dim, std::string_view seed_tag);

// Componentwise mean. Inputs are summed in lexicographic order of their
// values, so any permutation of `vectors` gives a bitwise-equal result.
Embedding pool_mean(std::span<const Embedding> vectors);
Embedding pool_mean(std::span<const Embedding* const> vectors);

class Embedder {
public:
    virtual ~Embedder() = default;

    // Stable description of the provider (kind, model, dim, seed).
    virtual std::string identity() const = 0;
    virtual std::size_t dim() = 0;
    // One vector per text, in input order.
    virtual std::vector<Embedding> embed(std::span<const std::string> texts) = 0;

    Embedding embed_one(const std::string& text);
};

class HashEmbedder final : public Embedder {
public:
    // Throws Error{InvalidArgument} when dim < 8.
    HashEmbedder(std::size_t dim, std::string seed_tag);

    std::string identity() const override;
    std::size_t dim() override { return dim_; }
    std::vector<Embedding> embed(std::span<const std::string> texts) override;

    const std::string& seed_tag() const { return seed_tag_; }

private:
    std::size_t dim_;
    std::string seed_tag_;
};

struct RemoteEmbedderConfig {
    std::string endpoint;  // e.g. http://127.0.0.1:8080
    std::size_t batch_size = 64;
    std::size_t max_in_flight = 4;
    std::chrono::milliseconds timeout{30000};
    int retries = 2;
};

// Client for the sidecar protocol: GET {endpoint}/info -> {"dim","model"},
// POST {endpoint}/embed {"texts":[...]} -> {"embeddings":[[...]...]}.
class RemoteEmbedder final : public Embedder {
public:
    explicit RemoteEmbedder(RemoteEmbedderConfig cfg);

    std::string identity() const override;
    // Fetched from /info on first use.
    std::size_t dim() override;
    std::vector<Embedding> embed(std::span<const std::string> texts) override;

    const std::string& model() const { return model_; }

private:
    void fetch_info();
    std::vector<Embedding> post_batch(std::span<const std::string> texts) const;

    RemoteEmbedderConfig cfg_;
    std::string scheme_host_port_;
    std::string base_path_;
    std::size_t dim_ = 0;
    std::string model_;
};

// Memoizes another embedder by text. Reads are concurrent; misses are
// embedded in one batch and inserted under an exclusive lock.
class CachedEmbedder final : public Embedder {
public:
    explicit CachedEmbedder(std::shared_ptr<Embedder> inner) : inner_(std::move(inner)) {}

    std::string identity() const override { return inner_->identity(); }
    std::size_t dim() override { return inner_->dim(); }
    std::vector<Embedding> embed(std::span<const std::string> texts) override;

    std::size_t cached() const;
    std::size_t inner_calls() const { return inner_calls_; }

private:
    std::shared_ptr<Embedder> inner_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, Embedding> cache_;
    std::size_t inner_calls_ = 0;
};

struct EmbedderSpec {
    std::string kind = "hash";  // hash | remote
    std::size_t dim = 64;
    std::string seed_tag = "grag";
    RemoteEmbedderConfig remote;
};

std::shared_ptr<Embedder> make_embedder(const EmbedderSpec& spec);

} // namespace grag
