#include <atomic>
#include <filesystem>
#include <set>
#include <sstream>
#include <thread>

#include "dora/bench.hpp"
#include "dora/sampling.hpp"

namespace dora {

ComplexityLevel classify_complexity(std::size_t n_gamma) {
    if (n_gamma == 0) return ComplexityLevel::Unclassified;
    if (n_gamma <= 5000) return ComplexityLevel::L1;
    if (n_gamma <= 10000) return ComplexityLevel::L2;
    if (n_gamma <= 50000) return ComplexityLevel::L3;
    return ComplexityLevel::L4;
}

const char* level_name(ComplexityLevel level) {
    switch (level) {
        case ComplexityLevel::L1: return "L1";
        case ComplexityLevel::L2: return "L2";
        case ComplexityLevel::L3: return "L3";
        case ComplexityLevel::L4: return "L4";
        default: return "Unclassified";
    }
}

BenchManifest build_manifest(const std::vector<std::string>& mesh_paths, double tau_deg,
                             const std::string& dataset_tag, int jobs) {
    BenchManifest manifest;
    manifest.dataset_tag = dataset_tag;
    manifest.tau_deg = tau_deg;

    std::vector<std::string> unique_paths;
    std::set<std::string> seen;
    for (const std::string& p : mesh_paths) {
        if (!seen.insert(p).second) {
            manifest.warnings.push_back("duplicate path skipped: " + p);
            continue;
        }
        unique_paths.push_back(p);
    }

    struct Slot {
        bool ok = false;
        BenchEntry entry;
        std::string error;
    };
    std::vector<Slot> slots(unique_paths.size());

    auto work = [&](std::size_t i) {
        const std::string& path = unique_paths[i];
        Slot& slot = slots[i];
        try {
            TriangleMesh mesh = load_mesh(path);
            SalientEdgeSet set = detect_salient_edges(mesh, tau_deg);
            slot.entry.id = std::filesystem::path(path).stem().string();
            slot.entry.path = path;
            slot.entry.n_gamma = set.count();
            slot.entry.level = classify_complexity(set.count());
            slot.ok = true;
        } catch (const std::exception& e) {
            slot.error = e.what();
        }
    };

    if (jobs <= 1 || unique_paths.size() <= 1) {
        for (std::size_t i = 0; i < unique_paths.size(); ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        int count = std::min<int>(jobs, static_cast<int>(unique_paths.size()));
        for (int t = 0; t < count; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < unique_paths.size(); i = next++) work(i);
            });
        for (auto& t : pool) t.join();
    }

    std::set<std::string> ids;
    for (std::size_t i = 0; i < unique_paths.size(); ++i) {
        if (!slots[i].ok) {
            manifest.rejects.push_back({unique_paths[i], slots[i].error});
            continue;
        }
        BenchEntry entry = slots[i].entry;
        // stems can collide between directories; disambiguate with a suffix
        std::string id = entry.id;
        int suffix = 1;
        while (!ids.insert(id).second) id = entry.id + "_" + std::to_string(++suffix);
        entry.id = id;
        manifest.entries.push_back(entry);
    }
    return manifest;
}

BenchReport aggregate_report(const BenchManifest& manifest, const std::vector<MetricRow>& rows) {
    std::map<std::string, ComplexityLevel> level_by_id;
    for (const BenchEntry& e : manifest.entries) level_by_id[e.id] = e.level;

    BenchReport report;
    report.rows = rows;
    std::map<ComplexityLevel, std::vector<const MetricRow*>> grouped;
    for (const MetricRow& row : rows) {
        auto it = level_by_id.find(row.id);
        if (it == level_by_id.end())
            throw std::invalid_argument("aggregate_report: unknown mesh id " + row.id);
        if (it->second == ComplexityLevel::Unclassified) continue;
        grouped[it->second].push_back(&row);
    }
    for (const auto& [level, members] : grouped) {
        LevelAggregate agg;
        agg.mesh_count = members.size();
        for (const MetricRow* row : members) {
            agg.fscore_001_x100 += row->fscore_001 * 100.0;
            agg.fscore_0005_x100 += row->fscore_0005 * 100.0;
            agg.chamfer_x10000 += row->chamfer * 10000.0;
            agg.sne_x100 += row->sne * 100.0;
        }
        double n = static_cast<double>(members.size());
        agg.fscore_001_x100 /= n;
        agg.fscore_0005_x100 /= n;
        agg.chamfer_x10000 /= n;
        agg.sne_x100 /= n;
        report.levels[level] = agg;
    }
    return report;
}

nlohmann::json manifest_to_json(const BenchManifest& manifest) {
    nlohmann::json j;
    j["dataset_tag"] = manifest.dataset_tag;
    j["tau_deg"] = manifest.tau_deg;
    j["entries"] = nlohmann::json::array();
    std::map<std::string, std::size_t> level_counts;
    for (const BenchEntry& e : manifest.entries) {
        j["entries"].push_back({{"id", e.id},
                                {"path", e.path},
                                {"n_gamma", e.n_gamma},
                                {"level", level_name(e.level)}});
        ++level_counts[level_name(e.level)];
    }
    j["level_counts"] = level_counts;
    j["rejects"] = nlohmann::json::array();
    for (const BenchReject& r : manifest.rejects)
        j["rejects"].push_back({{"path", r.path}, {"reason", r.reason}});
    j["warnings"] = manifest.warnings;
    return j;
}

nlohmann::json report_to_json(const BenchReport& report) {
    nlohmann::json j;
    j["levels"] = nlohmann::json::object();
    for (const auto& [level, agg] : report.levels) {
        j["levels"][level_name(level)] = {{"mesh_count", agg.mesh_count},
                                          {"fscore_001_x100", agg.fscore_001_x100},
                                          {"fscore_0005_x100", agg.fscore_0005_x100},
                                          {"chamfer_x10000", agg.chamfer_x10000},
                                          {"sne_x100", agg.sne_x100}};
    }
    j["rows"] = nlohmann::json::array();
    for (const MetricRow& row : report.rows)
        j["rows"].push_back({{"id", row.id},
                             {"fscore_001", row.fscore_001},
                             {"fscore_0005", row.fscore_0005},
                             {"chamfer", row.chamfer},
                             {"sne", row.sne}});
    return j;
}

std::string report_to_text(const BenchReport& report) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-14s %6s %18s %19s %12s %11s\n", "Level", "Count",
                  "F-score(0.01)x100", "F-score(0.005)x100", "CDx10000", "SNEx100");
    out << line;
    for (const auto& [level, agg] : report.levels) {
        std::snprintf(line, sizeof(line), "%-14s %6zu %18.3f %19.3f %12.3f %11.3f\n",
                      level_name(level), agg.mesh_count, agg.fscore_001_x100,
                      agg.fscore_0005_x100, agg.chamfer_x10000, agg.sne_x100);
        out << line;
    }
    return out.str();
}

}  // namespace dora
