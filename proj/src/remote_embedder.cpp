#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "grag/embed.hpp"
#include "grag/error.hpp"

namespace grag {

namespace {

// Splits "http://host:port/prefix" into ("http://host:port", "/prefix").
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorKind::InvalidArgument, "endpoint must start with http:// : " + endpoint);
    }
    auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {endpoint, ""};
    std::string path = endpoint.substr(path_start);
    while (!path.empty() && path.back() == '/') path.pop_back();
    return {endpoint.substr(0, path_start), path};
}

httplib::Client make_client(const std::string& host, std::chrono::milliseconds timeout) {
    httplib::Client client(host);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    return client;
}

} // namespace

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.batch_size < 1) throw Error(ErrorKind::InvalidArgument, "batch size must be >= 1");
    if (cfg_.max_in_flight < 1) cfg_.max_in_flight = 1;
    if (cfg_.retries < 0) cfg_.retries = 0;
    std::tie(scheme_host_port_, base_path_) = split_endpoint(cfg_.endpoint);
}

std::string RemoteEmbedder::identity() const {
    return "remote:" + cfg_.endpoint + ":model=" + model_;
}

std::size_t RemoteEmbedder::dim() {
    if (dim_ == 0) fetch_info();
    return dim_;
}

void RemoteEmbedder::fetch_info() {
    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
        auto client = make_client(scheme_host_port_, cfg_.timeout);
        auto res = client.Get(base_path_ + "/info");
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            throw Error(ErrorKind::Transport, "GET /info returned HTTP " + std::to_string(res->status));
        }
        try {
            auto body = nlohmann::json::parse(res->body);
            long long dim = body.at("dim").get<long long>();
            if (dim <= 0) throw Error(ErrorKind::Protocol, "/info reported dim " + std::to_string(dim));
            dim_ = static_cast<std::size_t>(dim);
            model_ = body.value("model", std::string{});
            return;
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::Protocol, std::string("malformed /info response: ") + e.what());
        }
    }
    throw Error(ErrorKind::Transport, "GET /info failed after " + std::to_string(cfg_.retries + 1) +
                                          " attempts: " + last_error);
}

std::vector<Embedding> RemoteEmbedder::post_batch(std::span<const std::string> texts) const {
    nlohmann::json request;
    request["texts"] = std::vector<std::string>(texts.begin(), texts.end());
    const std::string payload = request.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
        auto client = make_client(scheme_host_port_, cfg_.timeout);
        auto res = client.Post(base_path_ + "/embed", payload, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw Error(ErrorKind::Transport, "POST /embed returned HTTP " + std::to_string(res->status));
        }
        std::vector<Embedding> out;
        try {
            auto body = nlohmann::json::parse(res->body);
            for (const auto& row : body.at("embeddings")) {
                out.emplace_back(row.get<std::vector<double>>());
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::Protocol, std::string("malformed /embed response: ") + e.what());
        }
        if (out.size() != texts.size()) {
            throw Error(ErrorKind::Protocol, "/embed returned " + std::to_string(out.size()) +
                                                 " vectors for " + std::to_string(texts.size()) +
                                                 " texts");
        }
        for (const auto& v : out) {
            if (v.dim() != dim_) {
                throw Error(ErrorKind::Protocol, "/embed returned a vector of dim " +
                                                     std::to_string(v.dim()) + ", expected " +
                                                     std::to_string(dim_));
            }
            require_finite(v, "/embed response");
        }
        return out;
    }
    throw Error(ErrorKind::Transport, "POST /embed failed after " +
                                          std::to_string(cfg_.retries + 1) + " attempts: " + last_error);
}

std::vector<Embedding> RemoteEmbedder::embed(std::span<const std::string> texts) {
    if (texts.empty()) return {};
    dim();

    const std::size_t batches = (texts.size() + cfg_.batch_size - 1) / cfg_.batch_size;
    std::vector<std::vector<Embedding>> results(batches);
    std::vector<std::exception_ptr> errors(batches);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t b = next++; b < batches; b = next++) {
            std::size_t begin = b * cfg_.batch_size;
            std::size_t count = std::min(cfg_.batch_size, texts.size() - begin);
            try {
                results[b] = post_batch(texts.subspan(begin, count));
            } catch (...) {
                errors[b] = std::current_exception();
            }
        }
    };
    const std::size_t workers = std::min(cfg_.max_in_flight, batches);
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < workers; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (auto& batch : results) {
        for (auto& v : batch) out.push_back(std::move(v));
    }
    return out;
}

} // namespace grag
