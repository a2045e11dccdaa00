#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdvol/rational.hpp"
#include "qdvol/spectral.hpp"

namespace qdvol {

/// On-disk F-table cache: one JSON document per curve, big integers as
/// decimal strings.  Files with a foreign schema version or curve are
/// ignored with a warning; malformed or tampered files are rejected whole
/// (no partial merge).
struct CacheFile {
    static constexpr int kSchemaVersion = 1;

    struct Entry {
        int g;
        int n;
        std::vector<int> k;
        std::string num;
        std::string den;
    };

    std::string curve_a;
    int curve_b = 2;
    std::vector<Entry> entries;

    enum class LoadStatus { loaded, missing, version_mismatch, curve_mismatch, rejected };

    struct LoadResult {
        LoadStatus status;
        std::string message;
        size_t entries_loaded = 0;
    };

    static std::filesystem::path file_in(const std::filesystem::path& dir) {
        return dir / "qdvol-cache.json";
    }

    /// Parses and validates `path` and merges matching entries into the
    /// session memo.  Validation failures reject the file atomically.
    static LoadResult load_into(const std::filesystem::path& path, TrSession& session) {
        std::error_code ec;
        if (!std::filesystem::exists(path, ec)) return {LoadStatus::missing, "no cache file", 0};
        std::ifstream in(path);
        if (!in) return {LoadStatus::rejected, "cannot open cache file", 0};
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::exception& e) {
            return {LoadStatus::rejected, std::string("cache parse failure: ") + e.what(), 0};
        }
        try {
            if (!doc.is_object() || !doc.contains("schema_version") || !doc.contains("curve") ||
                !doc.contains("entries"))
                return {LoadStatus::rejected, "cache missing required fields", 0};
            if (doc["schema_version"].get<int>() != kSchemaVersion)
                return {LoadStatus::version_mismatch,
                        "cache schema_version " + doc["schema_version"].dump() + " ignored", 0};
            const auto& curve = doc["curve"];
            std::string a = curve.at("a").get<std::string>();
            int b = curve.at("b").get<int>();
            if (a != session.curve().a.str() || b != session.curve().b)
                return {LoadStatus::curve_mismatch,
                        "cache for curve [" + a + "," + std::to_string(b) + "] ignored", 0};

            // validate everything before merging anything
            std::vector<std::tuple<int, int, std::vector<int>, ExactScalar>> staged;
            for (const auto& e : doc["entries"]) {
                int g = e.at("g").get<int>();
                int n = e.at("n").get<int>();
                std::vector<int> k = e.at("k").get<std::vector<int>>();
                if (g < 0 || n < 0 || static_cast<int>(k.size()) != n)
                    return {LoadStatus::rejected, "cache entry with malformed (g,n,k)", 0};
                for (int x : k)
                    if (x < 0) return {LoadStatus::rejected, "cache entry with negative index", 0};
                ExactScalar v;
                try {
                    v = ExactScalar::from_strings(e.at("num").get<std::string>(),
                                                  e.at("den").get<std::string>());
                } catch (const domain_error&) {
                    return {LoadStatus::rejected, "cache entry with invalid rational", 0};
                }
                staged.emplace_back(g, n, std::move(k), v);
            }
            for (auto& [g, n, k, v] : staged) session.preload_entry(g, n, std::move(k), v);
            return {LoadStatus::loaded, "", staged.size()};
        } catch (const nlohmann::json::exception& e) {
            return {LoadStatus::rejected, std::string("cache structure failure: ") + e.what(), 0};
        }
    }

    /// Writes every entry known to the session (merged with any valid
    /// matching file already at `path`) atomically via rename.
    static void save(const std::filesystem::path& path, const TrSession& session) {
        std::map<std::tuple<int, int, std::vector<int>>, ExactScalar> merged;
        // keep entries already on disk if they validate and match the curve
        {
            TrSession scratch(session.curve());
            if (load_into(path, scratch).status == LoadStatus::loaded)
                for (const auto& e : scratch.snapshot_all_entries())
                    merged[{e.g, e.n, e.k}] = e.value;
        }
        for (const auto& e : session.snapshot_all_entries()) merged[{e.g, e.n, e.k}] = e.value;

        nlohmann::json doc;
        doc["schema_version"] = kSchemaVersion;
        doc["curve"] = {{"a", session.curve().a.str()}, {"b", session.curve().b}};
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& [key, v] : merged) {
            nlohmann::json e;
            e["g"] = std::get<0>(key);
            e["n"] = std::get<1>(key);
            e["k"] = std::get<2>(key);
            e["num"] = v.numerator().get_str();
            e["den"] = v.denominator().get_str();
            entries.push_back(std::move(e));
        }
        doc["entries"] = std::move(entries);

        if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
        std::filesystem::path tmp = path;
        tmp += ".tmp";
        {
            std::ofstream out(tmp);
            out << doc.dump(1) << "\n";
        }
        std::filesystem::rename(tmp, path);
    }
};

}  // namespace qdvol
