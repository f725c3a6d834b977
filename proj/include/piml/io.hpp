#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "piml/domain.hpp"
#include "piml/pipeline.hpp"
#include "piml/report.hpp"

namespace piml::io {

/// Shortest decimal string that parses back to exactly `v` (std::to_chars).
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Curve CSV: header `strain,stress_mpa`, one point per line, LF endings.
// ---------------------------------------------------------------------------

void write_curve_csv(const std::filesystem::path& path, const StressStrainCurve& curve);

/// Throws DataError naming the file and line on any malformed content.
StressStrainCurve read_curve_csv(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Dataset manifest JSON
// ---------------------------------------------------------------------------

struct ManifestEntry {
    Sample sample;           // curve populated on read; ignored by write
    std::string curve_path;  // relative to the manifest's directory
};

struct Manifest {
    MaterialId material = MaterialId::Nylon;
    nlohmann::ordered_json generator;  // optional provenance block; may be null
    std::vector<ManifestEntry> entries;
};

/// Writes the manifest JSON only; curve CSVs are written separately.
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Parses the manifest and loads every referenced curve CSV (paths resolved
/// relative to the manifest's directory). Throws DataError on any defect.
Manifest read_manifest(const std::filesystem::path& path);

/// Convenience: manifest -> samples with curves attached.
std::vector<Sample> load_samples(const std::filesystem::path& manifest_path,
                                 MaterialId* material = nullptr);

/// Constitutive parameter (de)serialization, shared by manifests and
/// generator-provenance blocks.
nlohmann::ordered_json constitutive_to_json(const ConstitutiveParams& p);
ConstitutiveParams constitutive_from_json(const nlohmann::ordered_json& j);

// ---------------------------------------------------------------------------
// Experiment report JSON
// ---------------------------------------------------------------------------

nlohmann::ordered_json report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::ordered_json& j);

void write_report(const std::filesystem::path& path, const ExperimentReport& report);
ExperimentReport read_report(const std::filesystem::path& path);

/// Predicted-vs-actual CSV (`strain,actual_mpa,predicted_mpa`) for plotting.
void write_prediction_csv(const std::filesystem::path& path, const SamplePrediction& pred);

// ---------------------------------------------------------------------------
// Trained-model JSON (the `train` / `predict` subcommand exchange format)
// ---------------------------------------------------------------------------

nlohmann::ordered_json trained_fold_to_json(const TrainedFold& fold);
TrainedFold trained_fold_from_json(const nlohmann::ordered_json& j);

void write_model(const std::filesystem::path& path, const TrainedFold& fold);
TrainedFold read_model(const std::filesystem::path& path);

}  // namespace piml::io
