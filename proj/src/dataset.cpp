#include <algorithm>
#include <filesystem>

#include "grag/error.hpp"
#include "grag/graph.hpp"
#include "grag/pipeline.hpp"

namespace grag {

namespace fs = std::filesystem;

namespace {

std::vector<fs::path> files_with_extension(const fs::path& dir, const std::string& ext) {
    std::vector<fs::path> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ext) out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

DatasetStats dataset_stats(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(ErrorKind::NotFound, "dataset directory " + dir.string() + " not found");

    std::vector<std::pair<fs::path, std::optional<fs::path>>> graphs;
    if (fs::is_directory(dir / "nodes")) {
        for (auto& nodes : files_with_extension(dir / "nodes", ".csv")) {
            fs::path edges = dir / "edges" / nodes.filename();
            if (!fs::exists(edges)) {
                throw Error(ErrorKind::NotFound, "no edges file for " + nodes.string());
            }
            graphs.emplace_back(nodes, edges);
        }
    } else {
        for (auto& doc : files_with_extension(dir, ".json")) graphs.emplace_back(doc, std::nullopt);
    }
    if (graphs.empty()) throw Error(ErrorKind::NotFound, "no graphs found under " + dir.string());

    DatasetStats stats;
    double nodes = 0.0, edges = 0.0;
    for (const auto& [path, edge_path] : graphs) {
        try {
            TextGraph g = load_graph(path, edge_path);
            nodes += static_cast<double>(g.node_count());
            edges += static_cast<double>(g.edge_count());
        } catch (const Error& e) {
            rethrow_with_context(e, path.string());
        }
    }
    stats.graphs = graphs.size();
    stats.mean_nodes = nodes / static_cast<double>(graphs.size());
    stats.mean_edges = edges / static_cast<double>(graphs.size());
    return stats;
}

} // namespace grag
