#include "piml/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>

#include "piml/constitutive.hpp"
#include "piml/io.hpp"
#include "piml/rng.hpp"

namespace piml {

namespace {

std::vector<ProcessParameters> grid_rows(const char* name1, const char* name2,
                                         const std::vector<double>& col1,
                                         const std::vector<double>& col2) {
    std::vector<ProcessParameters> rows;
    rows.reserve(col1.size() * col2.size());
    for (double v1 : col1) {
        for (double v2 : col2) {
            rows.push_back(ProcessParameters{{name1, name2}, {v1, v2}});
        }
    }
    return rows;
}

std::vector<ProcessParameters> listed_rows(const char* name1, const char* name2,
                                           const std::vector<std::array<double, 2>>& pairs) {
    std::vector<ProcessParameters> rows;
    rows.reserve(pairs.size());
    for (const auto& p : pairs) {
        rows.push_back(ProcessParameters{{name1, name2}, {p[0], p[1]}});
    }
    return rows;
}

std::vector<ProcessParameters> build_doe(MaterialId id) {
    switch (id) {
        case MaterialId::Nylon:
            return grid_rows("print_temperature_c", "print_speed_mm_s",
                             {220, 230, 240, 250, 260}, {10, 20, 30, 40, 50});
        case MaterialId::CfAbs:
            return grid_rows("print_temperature_c", "print_speed_mm_s",
                             {200, 220, 240, 260, 280}, {10, 30, 50, 70, 90});
        case MaterialId::AlSi10Mg:
            return listed_rows(
                "laser_power_w", "scanning_speed_mm_s",
                {{60, 250},   {160, 250},  {160, 800},  {260, 250},  {260, 800},
                 {260, 1350}, {360, 250},  {360, 800},  {360, 1350}, {360, 1900},
                 {460, 250},  {460, 800},  {460, 1350}, {460, 1900}, {460, 2450},
                 {110, 250},  {110, 500},  {160, 500},  {260, 500},  {360, 500},
                 {460, 500},  {210, 250},  {210, 500},  {210, 800},  {210, 1100},
                 {260, 1100}, {360, 1100}, {460, 1100}});
        case MaterialId::Ti6Al4V:
            return listed_rows(
                "laser_power_w", "scanning_speed_mm_s",
                {{275, 800}, {275, 760},  {275, 720}, {275, 680}, {275, 640},
                 {275, 600}, {275, 840},  {275, 880}, {275, 920}, {275, 960},
                 {275, 1000}, {175, 800}, {195, 800}, {215, 800}, {235, 800},
                 {255, 800}, {295, 800},  {315, 800}, {335, 800}, {355, 800},
                 {375, 800}, {135, 400},  {205, 600}, {345, 1000}, {415, 1200},
                 {485, 1400}, {500, 1480}, {155, 400}, {235, 600}, {395, 1000},
                 {475, 1200}, {500, 1290}, {115, 400}, {175, 600}, {295, 1000},
                 {355, 1200}, {475, 1600}, {75, 400},  {115, 600}, {195, 1000},
                 {235, 1200}, {315, 1600}});
    }
    throw DataError("unknown material id");
}

const char* kTruthNames[4] = {"E", "eps_y", "plastic1", "plastic2"};

}  // namespace

const std::vector<ProcessParameters>& doe_table(MaterialId id) {
    static const std::vector<ProcessParameters> nylon = build_doe(MaterialId::Nylon);
    static const std::vector<ProcessParameters> cfabs = build_doe(MaterialId::CfAbs);
    static const std::vector<ProcessParameters> alsi = build_doe(MaterialId::AlSi10Mg);
    static const std::vector<ProcessParameters> ti = build_doe(MaterialId::Ti6Al4V);
    switch (id) {
        case MaterialId::Nylon: return nylon;
        case MaterialId::CfAbs: return cfabs;
        case MaterialId::AlSi10Mg: return alsi;
        case MaterialId::Ti6Al4V: return ti;
    }
    throw DataError("unknown material id");
}

TruthMap TruthMap::defaults_for(MaterialId id) {
    TruthMap map;
    map.material = id;
    switch (id) {
        case MaterialId::Nylon:
            map.base = {1200.0, 0.025, 0.0, VocePlastic{12.0, 60.0}};
            break;
        case MaterialId::CfAbs:
            map.base = {2500.0, 0.018, 0.0, VocePlastic{15.0, 90.0}};
            break;
        case MaterialId::AlSi10Mg:
            map.base = {70000.0, 0.0035, 0.0, HollomonPlastic{450.0, 0.35}};
            break;
        case MaterialId::Ti6Al4V:
            map.base = {110000.0, 0.008, 0.0, HollomonPlastic{900.0, 0.30}};
            break;
    }
    map.base.sigma_y = map.base.E * map.base.eps_y;
    // Mild, sign-varied couplings; worst-case factors stay in [0.86, 1.14]
    // and metal hardening exponents stay below 1 across the whole DOE box.
    map.sensitivity = {{{+0.06, -0.04},    // E
                        {+0.04, -0.05},    // eps_y
                        {+0.08, -0.06},    // a | K
                        {-0.05, +0.04}}};  // b | n
    const auto& rows = doe_table(id);
    map.param_lo = {rows[0].values[0], rows[0].values[1]};
    map.param_hi = map.param_lo;
    for (const auto& row : rows) {
        for (int c = 0; c < 2; ++c) {
            map.param_lo[c] = std::min(map.param_lo[c], row.values[c]);
            map.param_hi[c] = std::max(map.param_hi[c], row.values[c]);
        }
    }
    if (material_class(id) == MaterialClass::Polymer) {
        map.grid = {0.08, 160};
    } else {
        map.grid = {0.02, 100};
    }
    return map;
}

TruthMap TruthMap::constant(MaterialId id) {
    TruthMap map = defaults_for(id);
    map.sensitivity = {};
    return map;
}

ConstitutiveParams truth_params(const ProcessParameters& params, const TruthMap& map) {
    if (params.values.size() != 2) {
        throw DataError("truth_params: expected 2 process parameters, got " +
                        std::to_string(params.values.size()));
    }
    double norm[2];
    for (int c = 0; c < 2; ++c) {
        const double lo = map.param_lo[c];
        const double hi = map.param_hi[c];
        if (!(hi > lo)) throw DataError("truth_params: degenerate DOE range");
        norm[c] = 2.0 * (params.values[c] - lo) / (hi - lo) - 1.0;
        if (std::abs(norm[c]) > 1.0 + 1e-9) {
            std::cerr << "warning: process parameter " << c + 1 << " = "
                      << params.values[c] << " lies outside the DOE range ["
                      << lo << ", " << hi << "]; extrapolating\n";
        }
    }
    double factors[4];
    for (int i = 0; i < 4; ++i) {
        factors[i] = 1.0 + map.sensitivity[i][0] * norm[0] + map.sensitivity[i][1] * norm[1];
        if (!(factors[i] > 0.0)) {
            throw DataError(std::string("truth_params: sensitivity coefficients drive ") +
                            kTruthNames[i] + " non-positive (factor " +
                            std::to_string(factors[i]) + ")");
        }
    }
    ConstitutiveParams truth;
    truth.E = map.base.E * factors[0];
    truth.eps_y = map.base.eps_y * factors[1];
    truth.sigma_y = truth.E * truth.eps_y;
    if (const auto* voce = std::get_if<VocePlastic>(&map.base.plastic)) {
        truth.plastic = VocePlastic{voce->a * factors[2], voce->b * factors[3]};
    } else {
        const auto& holl = std::get<HollomonPlastic>(map.base.plastic);
        const double n = holl.n * factors[3];
        if (n > 1.0) {
            throw DataError("truth_params: hardening exponent n = " + std::to_string(n) +
                            " exceeds 1 (plastic2 coefficient too large)");
        }
        truth.plastic = HollomonPlastic{holl.K * factors[2], n};
    }
    return truth;
}

Sample synthesize_curve(const ConstitutiveParams& truth, MaterialId material,
                        const GridSpec& grid, double noise_std, std::uint64_t seed) {
    if (grid.points < 4 || !(grid.max_strain > 0.0)) {
        throw DataError("synthesize_curve: grid needs max_strain > 0 and >= 4 points");
    }
    if (noise_std < 0.0) throw DataError("synthesize_curve: noise_std must be >= 0");
    const MaterialClass cls = material_class(material);
    Sample sample;
    sample.material = material;
    sample.curve.strain.reserve(static_cast<std::size_t>(grid.points));
    sample.curve.stress.reserve(static_cast<std::size_t>(grid.points));
    Rng rng(seed);
    for (int i = 1; i <= grid.points; ++i) {
        const double eps = grid.max_strain * static_cast<double>(i) /
                           static_cast<double>(grid.points);
        double sigma = piecewise_stress(truth, cls, eps);
        if (noise_std > 0.0) {
            sigma *= 1.0 + noise_std * rng.normal();
            if (sigma < 0.0) sigma = 0.0;
        }
        sample.curve.strain.push_back(eps);
        sample.curve.stress.push_back(sigma);
    }
    sample.truth_yield = YieldPoint{truth.eps_y, truth.sigma_y};
    sample.truth_params = truth;
    return sample;
}

std::vector<Sample> generate_samples(const TruthMap& map, double noise_std,
                                     std::uint64_t seed) {
    const auto& rows = doe_table(map.material);
    const std::string stem = material_name(map.material);
    std::vector<Sample> samples;
    samples.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const ConstitutiveParams truth = truth_params(rows[r], map);
        Sample sample = synthesize_curve(truth, map.material, map.grid, noise_std,
                                         derive_seed(seed, r));
        char id[16];
        std::snprintf(id, sizeof id, "-%03zu", r + 1);
        sample.id = stem + id;
        sample.params = rows[r];
        samples.push_back(std::move(sample));
    }
    return samples;
}

std::filesystem::path generate_dataset(const TruthMap& map, double noise_std,
                                       std::uint64_t seed,
                                       const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    io::Manifest manifest;
    manifest.material = map.material;
    manifest.generator = nlohmann::ordered_json{
        {"noise_std", noise_std},
        {"seed", seed},
        {"max_strain", map.grid.max_strain},
        {"grid_points", map.grid.points},
        {"base", io::constitutive_to_json(map.base)},
        {"sensitivity", map.sensitivity},
        {"param_lo", map.param_lo},
        {"param_hi", map.param_hi}};
    for (Sample& sample : generate_samples(map, noise_std, seed)) {
        const std::string curve_path = sample.id + ".csv";
        io::write_curve_csv(out_dir / curve_path, sample.curve);
        manifest.entries.push_back(io::ManifestEntry{std::move(sample), curve_path});
    }
    const std::filesystem::path manifest_path = out_dir / "manifest.json";
    io::write_manifest(manifest_path, manifest);
    return manifest_path;
}

}  // namespace piml
