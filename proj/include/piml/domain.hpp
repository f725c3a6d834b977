#pragma once

#include <cstdint>
#include <stdexcept>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace piml {

/// Validation / malformed-input failures (CLI exit code 2).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical failures: NaN losses, fatal non-convergence (CLI exit code 3).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Materials
// ---------------------------------------------------------------------------

/// Polymer selects the Voce plastic law, Metal the Hollomon law.
enum class MaterialClass { Polymer, Metal };

/// The four benchmark datasets. Sequence-length defaults and DOE tables are
/// keyed by dataset, not just by class.
enum class MaterialId { Nylon, CfAbs, AlSi10Mg, Ti6Al4V };

MaterialClass material_class(MaterialId id);
std::string material_name(MaterialId id);
MaterialId material_from_name(const std::string& name);

// ---------------------------------------------------------------------------
// Core value types
// ---------------------------------------------------------------------------

/// Exactly two process parameters per sample (validated, not enforced by the
/// type, so malformed inputs can be reported rather than rejected at parse).
/// Polymers: print temperature (degC), print speed (mm/s).
/// Metals: laser power (W), scanning speed (mm/s).
struct ProcessParameters {
    std::vector<std::string> names;
    std::vector<double> values;
};

/// Paired strain/stress record. Strain is a dimensionless fraction
/// (0.01 == 1%), stress is MPa, everywhere in this codebase.
struct StressStrainCurve {
    std::vector<double> strain;
    std::vector<double> stress;

    std::size_t size() const { return strain.size(); }
    bool empty() const { return strain.empty(); }
};

struct YieldPoint {
    double eps_y = 0.0;
    double sigma_y = 0.0;
};

/// Elastic/plastic split of a curve. `elastic` holds the points with
/// strain < eps_y, `plastic` the points with strain >= eps_y; concatenating
/// them reproduces the source curve point for point.
struct SegmentedCurve {
    StressStrainCurve elastic;
    StressStrainCurve plastic;
    std::size_t boundary_index = 0;
};

struct ElasticVars {
    double E = 0.0;  // MPa
};
struct VocePlastic {
    double a = 0.0;  // saturation stress amplitude, MPa
    double b = 0.0;  // hardening rate, dimensionless
};
struct HollomonPlastic {
    double K = 0.0;  // strength coefficient, MPa
    double n = 0.0;  // hardening exponent in (0, 1]
};

/// Per-time-step law parameters emitted by a model head.
using PhysicsVariables = std::variant<ElasticVars, VocePlastic, HollomonPlastic>;

using PlasticLaw = std::variant<VocePlastic, HollomonPlastic>;

/// Per-sample fitted constitutive parameter set (five scalars total).
struct ConstitutiveParams {
    double E = 0.0;
    double eps_y = 0.0;
    double sigma_y = 0.0;
    PlasticLaw plastic;
};

struct Sample {
    std::string id;
    MaterialId material = MaterialId::Nylon;
    ProcessParameters params;
    StressStrainCurve curve;
    // Present iff the sample is synthetic.
    std::optional<YieldPoint> truth_yield;
    std::optional<ConstitutiveParams> truth_params;
};

// ---------------------------------------------------------------------------
// Model configuration
// ---------------------------------------------------------------------------

struct ModelConfig {
    int hidden_units = 32;
    double learning_rate = 0.01;
    int batch_size = 1;
    int epochs = 10;
    int seq_len_elastic = 2;
    int seq_len_plastic = 10;
    double alpha_aux = 0.1;
    int ridge_degree = 2;
    double ridge_penalty = 1.0;
    std::uint64_t seed = 0;

    /// Per-dataset sequence lengths: elastic 2/2/5/10 and plastic 10/10/5/10
    /// for Nylon, CF-ABS, AlSi10Mg, Ti6Al4V respectively.
    static ModelConfig defaults_for(MaterialId id);
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Returns one human-readable string per violated invariant; empty means the
/// sample is well formed. Violations are data, not failures.
std::vector<std::string> validate_sample(const Sample& sample);

}  // namespace piml
