#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "piml/domain.hpp"

namespace piml {

/// Uniform strain grid eps_i = max_strain * i / points, i = 1..points.
/// Defaults: polymers 0.08 over 160 points, metals 0.02 over 100 points.
struct GridSpec {
    double max_strain = 0.08;
    int points = 160;
};

/// Ground-truth generator for one material: constitutive parameters vary
/// linearly with the process parameters normalized to [-1, 1] over the DOE
/// bounding box. Every downstream accuracy check is relative to the truths
/// this map records into each Sample, never to external tables.
struct TruthMap {
    MaterialId material = MaterialId::Nylon;
    ConstitutiveParams base;  // at the DOE-range center; sigma_y = E * eps_y
    /// Rows: E, eps_y, plastic1 (a|K), plastic2 (b|n). Columns: the two
    /// process parameters. Entry (i,j) is the relative swing of parameter i
    /// when normalized parameter j moves from 0 to +1.
    std::array<std::array<double, 2>, 4> sensitivity{};
    std::array<double, 2> param_lo{};  // DOE bounding box, per column
    std::array<double, 2> param_hi{};
    GridSpec grid;
    double noise_std = 0.0;  // default multiplicative noise for the CLI

    /// Declared test-fixture bases: Nylon E=1200 MPa, eps_y=0.025, a=12, b=60;
    /// CF-ABS 2500/0.018/15/90; AlSi10Mg 70000/0.0035/K=450/n=0.35;
    /// Ti6Al4V 110000/0.008/K=900/n=0.30. Nonzero default sensitivities.
    static TruthMap defaults_for(MaterialId id);

    /// defaults_for with all sensitivities zeroed: every DOE row shares the
    /// base parameters (the constitutive baseline is then exact).
    static TruthMap constant(MaterialId id);
};

/// The published design-of-experiments rows, verbatim: Nylon and CF-ABS 25
/// rows (print temperature degC, print speed mm/s), AlSi10Mg 28 and Ti6Al4V
/// 42 rows (laser power W, scanning speed mm/s).
const std::vector<ProcessParameters>& doe_table(MaterialId id);

/// Applies the sensitivity model at one DOE point. Throws DataError when a
/// parameter is driven non-positive (naming it) or a metal hardening
/// exponent exceeds 1; warns on stderr when extrapolating outside the box.
ConstitutiveParams truth_params(const ProcessParameters& params, const TruthMap& map);

/// Evaluates the piecewise law on the grid, applies multiplicative noise
/// sigma * (1 + N(0, noise_std)) from the given seed, clamps stress at 0,
/// and records truth_yield/truth_params. id and params are left empty.
Sample synthesize_curve(const ConstitutiveParams& truth, MaterialId material,
                        const GridSpec& grid, double noise_std, std::uint64_t seed);

/// One Sample per DOE row; ids "<material>-001".., per-row derived seeds.
std::vector<Sample> generate_samples(const TruthMap& map, double noise_std,
                                     std::uint64_t seed);

/// Writes one curve CSV per DOE row plus manifest.json (with a generator
/// provenance block) into out_dir; returns the manifest path.
std::filesystem::path generate_dataset(const TruthMap& map, double noise_std,
                                       std::uint64_t seed,
                                       const std::filesystem::path& out_dir);

}  // namespace piml
