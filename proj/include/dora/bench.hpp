#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace dora {

enum class ComplexityLevel { L1, L2, L3, L4, Unclassified };

// Interval mapping on the salient-edge count: L1 = (0, 5000],
// L2 = (5000, 10000], L3 = (10000, 50000], L4 = (50000, inf);
// zero edges means Unclassified.
ComplexityLevel classify_complexity(std::size_t n_gamma);

const char* level_name(ComplexityLevel level);

struct BenchEntry {
    std::string id;
    std::string path;
    std::size_t n_gamma = 0;
    ComplexityLevel level = ComplexityLevel::Unclassified;
};

struct BenchReject {
    std::string path;
    std::string reason;
};

struct BenchManifest {
    std::string dataset_tag;
    double tau_deg = 30.0;
    std::vector<BenchEntry> entries;
    std::vector<BenchReject> rejects;
    std::vector<std::string> warnings;
};

// Loads each mesh, counts salient edges at tau, classifies. Load failures
// land in rejects; duplicate paths produce one entry plus a warning.
BenchManifest build_manifest(const std::vector<std::string>& mesh_paths, double tau_deg = 30.0,
                             const std::string& dataset_tag = "", int jobs = 1);

struct MetricRow {
    std::string id;
    double fscore_001 = 0.0;   // raw [0,1]
    double fscore_0005 = 0.0;  // raw [0,1]
    double chamfer = 0.0;      // raw distance
    double sne = 0.0;          // raw MSE
};

struct LevelAggregate {
    std::size_t mesh_count = 0;
    // scaled the way the report columns are labeled
    double fscore_001_x100 = 0.0;
    double fscore_0005_x100 = 0.0;
    double chamfer_x10000 = 0.0;
    double sne_x100 = 0.0;
};

struct BenchReport {
    std::map<ComplexityLevel, LevelAggregate> levels;
    std::vector<MetricRow> rows;
};

// Per-level arithmetic means of the per-mesh rows, with the standard
// scale factors (F-score x100, CD x10000, SNE x100). Unclassified meshes
// are excluded from aggregates. Throws on rows whose id is not in the
// manifest.
BenchReport aggregate_report(const BenchManifest& manifest, const std::vector<MetricRow>& rows);

nlohmann::json manifest_to_json(const BenchManifest& manifest);
nlohmann::json report_to_json(const BenchReport& report);
std::string report_to_text(const BenchReport& report);

}  // namespace dora
