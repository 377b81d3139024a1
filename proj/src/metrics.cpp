#include <algorithm>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "grag/error.hpp"
#include "grag/io.hpp"
#include "grag/pipeline.hpp"

namespace grag {

namespace {

std::set<std::string> normalized_set(const std::vector<std::string>& answers) {
    std::set<std::string> out;
    for (const auto& a : answers) out.insert(normalize_answer(a));
    return out;
}

std::size_t intersection_size(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::size_t n = 0;
    for (const auto& x : a) n += b.count(x);
    return n;
}

double record_score(const EvalRecord& r, Metric metric) {
    if (r.gold.empty()) throw Error(ErrorKind::InvalidArgument, "record '" + r.id + "' has no gold answers");
    const auto gold = normalized_set(r.gold);
    switch (metric) {
        case Metric::Hit1:
            return !r.prediction.empty() && gold.count(normalize_answer(r.prediction.front())) ? 1.0 : 0.0;
        case Metric::Recall: {
            auto pred = normalized_set(r.prediction);
            return static_cast<double>(intersection_size(pred, gold)) / static_cast<double>(gold.size());
        }
        case Metric::F1: {
            auto pred = normalized_set(r.prediction);
            if (pred.empty()) return 0.0;
            const double hit = static_cast<double>(intersection_size(pred, gold));
            if (hit == 0.0) return 0.0;
            const double precision = hit / static_cast<double>(pred.size());
            const double recall = hit / static_cast<double>(gold.size());
            return 2.0 * precision * recall / (precision + recall);
        }
        case Metric::Acc:
            if (r.prediction.size() != 1) {
                throw Error(ErrorKind::InvalidArgument, "acc needs exactly one prediction for record '" +
                                                            r.id + "', got " +
                                                            std::to_string(r.prediction.size()));
            }
            return gold.count(normalize_answer(r.prediction.front())) ? 1.0 : 0.0;
    }
    return 0.0;
}

std::vector<std::string> answers_field(const nlohmann::json& row, const char* key, const std::string& where) {
    auto it = row.find(key);
    if (it == row.end()) throw Error(ErrorKind::Parse, where + ": missing field '" + key + "'");
    if (it->is_string()) return {it->get<std::string>()};
    if (it->is_array()) {
        std::vector<std::string> out;
        for (const auto& v : *it) {
            if (!v.is_string()) throw Error(ErrorKind::Parse, where + ": '" + key + "' must hold strings");
            out.push_back(v.get<std::string>());
        }
        return out;
    }
    throw Error(ErrorKind::Parse, where + ": '" + key + "' must be a string or an array of strings");
}

std::map<std::string, std::vector<std::string>> read_jsonl(std::string_view text, const char* key,
                                                           const char* file) {
    std::map<std::string, std::vector<std::string>> out;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

        std::string where = std::string(file) + " line " + std::to_string(line_no);
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorKind::Parse, where + ": " + e.what());
        }
        if (!row.is_object() || !row.contains("id")) throw Error(ErrorKind::Parse, where + ": missing field 'id'");
        std::string id = row["id"].is_string() ? row["id"].get<std::string>() : row["id"].dump();
        if (!out.emplace(id, answers_field(row, key, where)).second) {
            throw Error(ErrorKind::Semantic, where + ": duplicate id '" + id + "'");
        }
    }
    return out;
}

} // namespace

std::string normalize_answer(std::string_view answer) {
    std::string out;
    bool pending_space = false;
    for (char ch : answer) {
        auto c = static_cast<unsigned char>(ch);
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
    }
    return out;
}

Metric parse_metric(const std::string& name) {
    if (name == "hit1") return Metric::Hit1;
    if (name == "f1") return Metric::F1;
    if (name == "recall") return Metric::Recall;
    if (name == "acc") return Metric::Acc;
    throw Error(ErrorKind::InvalidArgument, "unknown metric '" + name + "'");
}

double compute_metric(const std::vector<EvalRecord>& records, Metric metric) {
    if (records.empty()) throw Error(ErrorKind::InvalidArgument, "no records to score");
    double total = 0.0;
    for (const auto& r : records) total += record_score(r, metric);
    return total / static_cast<double>(records.size());
}

EvalJoin join_eval_records(std::string_view pred_jsonl, std::string_view gold_jsonl) {
    auto preds = read_jsonl(pred_jsonl, "prediction", "predictions");
    auto golds = read_jsonl(gold_jsonl, "gold", "gold");

    std::string missing;
    for (const auto& [id, _] : preds) {
        if (golds.count(id)) continue;
        if (!missing.empty()) missing += ", ";
        missing += id;
    }
    if (!missing.empty()) {
        throw Error(ErrorKind::Referential, "predictions without gold records: " + missing);
    }
    EvalJoin join;
    for (auto& [id, gold] : golds) {
        auto it = preds.find(id);
        if (it == preds.end()) {
            join.unmatched_gold.push_back(id);
            continue;
        }
        join.records.push_back({id, std::move(it->second), std::move(gold)});
    }
    return join;
}

EvalJoin load_eval_files(const std::filesystem::path& pred, const std::filesystem::path& gold) {
    return join_eval_records(read_file(pred), read_file(gold));
}

} // namespace grag
