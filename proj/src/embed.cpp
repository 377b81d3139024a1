#include "grag/embed.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "grag/error.hpp"
#include "grag/hashing.hpp"

namespace grag {

void require_finite(const Embedding& v, std::string_view what) {
    for (std::size_t i = 0; i < v.dim(); ++i) {
        if (!std::isfinite(v[i])) {
            throw Error(ErrorKind::Numeric, std::string(what) + ": non-finite value at index " +
                                                std::to_string(i));
        }
    }
}

std::vector<std::string> hash_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        bool word = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || (c >= 'A' && c <= 'Z') ||
                    c >= 0x80;
        if (word) {
            current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

Embedding hash_embed(std::string_view text, std::size_t dim, std::string_view seed_tag) {
    if (dim < 8) throw Error(ErrorKind::InvalidArgument, "hash embedder dim must be >= 8");
    Embedding out(dim);
    const std::uint64_t seeded = fnv1a64(seed_tag);
    for (const auto& token : hash_tokens(text)) {
        std::uint64_t h = fnv1a64(token, seeded);
        std::size_t bucket = static_cast<std::size_t>(h % dim);
        out[bucket] += ((h >> 32) % 2 == 0) ? 1.0 : -1.0;
    }
    double norm2 = 0.0;
    for (double x : out.values) norm2 += x * x;
    if (norm2 > 0.0) {
        double norm = std::sqrt(norm2);
        for (double& x : out.values) x /= norm;
    }
    return out;
}

Embedding pool_mean(std::span<const Embedding* const> vectors) {
    if (vectors.empty()) throw Error(ErrorKind::InvalidArgument, "pool_mean of an empty list");
    const std::size_t dim = vectors.front()->dim();
    for (const Embedding* v : vectors) {
        if (v->dim() != dim) {
            throw Error(ErrorKind::DimensionMismatch, "pool_mean: dims " + std::to_string(dim) +
                                                          " and " + std::to_string(v->dim()));
        }
    }
    std::vector<const Embedding*> order(vectors.begin(), vectors.end());
    std::sort(order.begin(), order.end(), [](const Embedding* a, const Embedding* b) {
        return std::lexicographical_compare(a->values.begin(), a->values.end(), b->values.begin(),
                                            b->values.end());
    });
    Embedding sum(dim);
    for (const Embedding* v : order) {
        for (std::size_t i = 0; i < dim; ++i) sum[i] += (*v)[i];
    }
    const double n = static_cast<double>(order.size());
    for (double& x : sum.values) x /= n;
    return sum;
}

Embedding pool_mean(std::span<const Embedding> vectors) {
    std::vector<const Embedding*> ptrs;
    ptrs.reserve(vectors.size());
    for (const auto& v : vectors) ptrs.push_back(&v);
    return pool_mean(std::span<const Embedding* const>(ptrs));
}

Embedding Embedder::embed_one(const std::string& text) {
    auto out = embed(std::span<const std::string>(&text, 1));
    return std::move(out.at(0));
}

HashEmbedder::HashEmbedder(std::size_t dim, std::string seed_tag)
    : dim_(dim), seed_tag_(std::move(seed_tag)) {
    if (dim_ < 8) throw Error(ErrorKind::InvalidArgument, "hash embedder dim must be >= 8");
}

std::string HashEmbedder::identity() const {
    return "hash:dim=" + std::to_string(dim_) + ":seed=" + seed_tag_;
}

std::vector<Embedding> HashEmbedder::embed(std::span<const std::string> texts) {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(hash_embed(t, dim_, seed_tag_));
    return out;
}

std::vector<Embedding> CachedEmbedder::embed(std::span<const std::string> texts) {
    std::vector<Embedding> out(texts.size());
    std::vector<std::string> missing;
    {
        std::shared_lock lock(mutex_);
        for (std::size_t i = 0; i < texts.size(); ++i) {
            auto it = cache_.find(texts[i]);
            if (it != cache_.end()) {
                out[i] = it->second;
            } else {
                missing.push_back(texts[i]);
            }
        }
    }
    if (missing.empty()) return out;

    std::sort(missing.begin(), missing.end());
    missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
    auto fresh = inner_->embed(missing);
    if (fresh.size() != missing.size()) {
        throw Error(ErrorKind::Protocol, "embedder returned " + std::to_string(fresh.size()) +
                                             " vectors for " + std::to_string(missing.size()) +
                                             " texts");
    }
    std::unique_lock lock(mutex_);
    ++inner_calls_;
    for (std::size_t i = 0; i < missing.size(); ++i) cache_.emplace(missing[i], std::move(fresh[i]));
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (out[i].dim() == 0) out[i] = cache_.at(texts[i]);
    }
    return out;
}

std::size_t CachedEmbedder::cached() const {
    std::shared_lock lock(mutex_);
    return cache_.size();
}

std::shared_ptr<Embedder> make_embedder(const EmbedderSpec& spec) {
    if (spec.kind == "hash") return std::make_shared<HashEmbedder>(spec.dim, spec.seed_tag);
    if (spec.kind == "remote") return std::make_shared<RemoteEmbedder>(spec.remote);
    throw Error(ErrorKind::InvalidArgument, "unknown embedder kind '" + spec.kind + "'");
}

} // namespace grag
