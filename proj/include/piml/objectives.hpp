#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "piml/autodiff.hpp"
#include "piml/domain.hpp"
#include "piml/lstm.hpp"

namespace piml {

/// The six comparison rows: four sequence-model variants plus two non-ML
/// baselines.
enum class ArchitectureMode {
    NonSegmental,
    SegmentalPlain,
    LossBased,
    ActivationBased,
    ConstitutiveBaseline,
    RidgeBaseline,
};

/// CLI spellings: non-segmental, segmental, loss-piml, activation-piml,
/// constitutive, ridge.
std::string mode_name(ArchitectureMode mode);
ArchitectureMode mode_from_name(const std::string& name);

bool is_sequence_mode(ArchitectureMode mode);

/// Which law a region model is constrained by.
enum class LawKind { Elastic, Voce, Hollomon };

LawKind law_for(Region region, MaterialClass material_class);

/// Raw head width: 1 stress output for plain modes, stress + physics
/// variables for the loss-based mode, physics variables only for the
/// activation-based mode.
int head_outputs(ArchitectureMode mode, LawKind law);

/// Value-level snapshot of one objective evaluation. The identity
/// total == data_loss + lambda_physics * physics_loss + aux_loss holds
/// exactly (same floating-point association as the graph).
struct LossBreakdown {
    double data_loss = 0.0;
    double physics_loss = 0.0;
    double aux_loss = 0.0;
    double lambda_physics = 1.0;
    double total = 0.0;
};

/// Node ids of the constrained physics variables: E | (a, b) | (K, n).
struct PhysicsVarIds {
    Tape::NodeId first = -1;
    Tape::NodeId second = -1;
};

/// Positivity transforms from raw head outputs, scaled by training-set
/// statistics so a unit raw output lands near physical magnitudes:
/// E = (stress_scale / strain_scale) * softplus(raw0);
/// a = stress_scale * softplus(raw0), b = 100 * softplus(raw1);
/// K = stress_scale * softplus(raw0), n = logistic(raw1).
PhysicsVarIds constrain_physics_vars(Tape& tape, LawKind law,
                                     const std::vector<Tape::NodeId>& raws,
                                     std::size_t first_raw,
                                     const NormalizationStats& stats);

/// Mean squared error (1/N) * sum (pred - actual)^2 over aligned sequences
/// (normalized stress units). Throws DataError on length mismatch or empty.
Tape::NodeId data_loss(Tape& tape, const std::vector<Tape::NodeId>& pred,
                       const std::vector<double>& actual);

/// Law value in MPa at one raw strain, with graph-valued physics variables
/// and a constant yield point: E*eps | sigma_y + a(1 - e^{-b(eps-eps_y)}) |
/// sigma_y + K*(max(eps-eps_y, clamp))^n. Plastic laws require yield.
Tape::NodeId law_stress(Tape& tape, LawKind law, const PhysicsVarIds& phys,
                        double target_strain, const YieldPoint* yield);

/// Mean squared residual between the model's stress outputs and the law
/// evaluated at each step's own physics variables, in normalized units:
/// (1/N) * sum (pred_norm - law_mpa/stress_scale)^2.
Tape::NodeId physics_residual_loss(Tape& tape, LawKind law,
                                   const std::vector<Tape::NodeId>& pred_norm,
                                   const std::vector<PhysicsVarIds>& phys,
                                   const std::vector<double>& target_strains,
                                   const YieldPoint* yield,
                                   const NormalizationStats& stats);

/// alpha * (lambda - 1)^2, the pull keeping the physics weight near 1.
Tape::NodeId auxiliary_loss(Tape& tape, Tape::NodeId lambda, double alpha);

/// Hard-constrained stress: the law evaluated at the head's physics
/// variables (an alias of law_stress, named for the architecture).
Tape::NodeId activation_stress(Tape& tape, LawKind law, const PhysicsVarIds& phys,
                               double target_strain, const YieldPoint* yield);

/// The law's value at zero plastic strain with the same step's variables
/// (sigma_y for Voce, sigma_y + K*clamp^n for Hollomon): the floor every
/// activation-based prediction provably sits on or above. -1 for Elastic.
Tape::NodeId activation_floor(Tape& tape, LawKind law, const PhysicsVarIds& phys,
                              const YieldPoint* yield);

// ---------------------------------------------------------------------------
// Whole-objective assembly
// ---------------------------------------------------------------------------

/// Node ids of one assembled training objective over a window batch.
struct ObjectiveGraph {
    Tape::NodeId total = -1;
    Tape::NodeId data = -1;
    Tape::NodeId physics = -1;  // -1 unless loss-based
    Tape::NodeId aux = -1;      // -1 unless loss-based
    Tape::NodeId lambda = -1;   // trainable weight param node; -1 unless loss-based
    std::vector<Tape::NodeId> pred_stress_mpa;  // per window
};

/// Builds the full objective on a fresh tape: registers the LSTM parameters
/// (node id == weight index), for the loss-based mode appends one trailing
/// lambda parameter, unrolls every window, and assembles the mode's loss:
/// plain modes and the activation-based mode minimize pure MSE (the latter
/// through the law); the loss-based mode minimizes
/// data + lambda * physics + alpha (lambda - 1)^2.
/// Plastic laws require `yield`; `layout.head_outputs` must equal
/// head_outputs(mode, law).
ObjectiveGraph build_objective(Tape& tape, ArchitectureMode mode, LawKind law,
                               const LstmLayout& layout,
                               const std::vector<Window>& batch,
                               const YieldPoint* yield,
                               const NormalizationStats& stats, double alpha);

/// Component values after evaluate(); fills the exact Eq-1 identity.
LossBreakdown read_breakdown(const Tape& tape, const ObjectiveGraph& graph);

/// Number of trainable weights for the mode (LSTM parameters plus the
/// loss-based lambda), and the initial weight vector (lambda starts at 1).
std::vector<double> init_objective_params(ArchitectureMode mode, const LstmLayout& layout,
                                          std::uint64_t seed);

// ---------------------------------------------------------------------------
// Inference
// ---------------------------------------------------------------------------

struct WindowPrediction {
    double stress_mpa = 0.0;
    /// Activation-based plastic laws only: the same step's law floor;
    /// stress_mpa - floor_mpa >= 0 by construction. NaN otherwise.
    double floor_mpa = 0.0;
    bool has_floor = false;
};

/// Runs one window through the trained model and returns the raw-unit stress
/// prediction (head output rescaled, or the activation law value).
WindowPrediction predict_window(Tape& tape, ArchitectureMode mode, LawKind law,
                                const LstmLayout& layout, const Window& window,
                                const YieldPoint* yield, const NormalizationStats& stats,
                                const std::vector<double>& weights);

// ---------------------------------------------------------------------------
// Gradient checking across all objective variants
// ---------------------------------------------------------------------------

struct ObjectiveCheck {
    std::string name;
    double max_rel_error = 0.0;
};

/// Finite-difference check of every trainable objective (loss-based and
/// activation-based, each with all three laws, plus the plain data-driven
/// objective) on a 4-unit LSTM over length-3 windows built from the seed.
std::vector<ObjectiveCheck> run_gradient_checks(std::uint64_t seed);

}  // namespace piml
