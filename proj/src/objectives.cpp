#include "piml/objectives.hpp"

#include <algorithm>
#include <cmath>

#include "piml/constitutive.hpp"
#include "piml/rng.hpp"

namespace piml {

std::string mode_name(ArchitectureMode mode) {
    switch (mode) {
        case ArchitectureMode::NonSegmental: return "non-segmental";
        case ArchitectureMode::SegmentalPlain: return "segmental";
        case ArchitectureMode::LossBased: return "loss-piml";
        case ArchitectureMode::ActivationBased: return "activation-piml";
        case ArchitectureMode::ConstitutiveBaseline: return "constitutive";
        case ArchitectureMode::RidgeBaseline: return "ridge";
    }
    return "?";
}

ArchitectureMode mode_from_name(const std::string& name) {
    if (name == "non-segmental") return ArchitectureMode::NonSegmental;
    if (name == "segmental") return ArchitectureMode::SegmentalPlain;
    if (name == "loss-piml") return ArchitectureMode::LossBased;
    if (name == "activation-piml") return ArchitectureMode::ActivationBased;
    if (name == "constitutive") return ArchitectureMode::ConstitutiveBaseline;
    if (name == "ridge") return ArchitectureMode::RidgeBaseline;
    throw DataError("unknown mode '" + name +
                    "' (expected non-segmental | segmental | loss-piml | "
                    "activation-piml | constitutive | ridge)");
}

bool is_sequence_mode(ArchitectureMode mode) {
    switch (mode) {
        case ArchitectureMode::NonSegmental:
        case ArchitectureMode::SegmentalPlain:
        case ArchitectureMode::LossBased:
        case ArchitectureMode::ActivationBased:
            return true;
        case ArchitectureMode::ConstitutiveBaseline:
        case ArchitectureMode::RidgeBaseline:
            return false;
    }
    return false;
}

LawKind law_for(Region region, MaterialClass material_class) {
    if (region != Region::Plastic) return LawKind::Elastic;
    return material_class == MaterialClass::Polymer ? LawKind::Voce : LawKind::Hollomon;
}

int head_outputs(ArchitectureMode mode, LawKind law) {
    const int nvars = law == LawKind::Elastic ? 1 : 2;
    switch (mode) {
        case ArchitectureMode::NonSegmental:
        case ArchitectureMode::SegmentalPlain:
            return 1;
        case ArchitectureMode::LossBased:
            return 1 + nvars;
        case ArchitectureMode::ActivationBased:
            return nvars;
        case ArchitectureMode::ConstitutiveBaseline:
        case ArchitectureMode::RidgeBaseline:
            break;
    }
    throw DataError("head_outputs: mode has no network head");
}

PhysicsVarIds constrain_physics_vars(Tape& tape, LawKind law,
                                     const std::vector<Tape::NodeId>& raws,
                                     std::size_t first_raw,
                                     const NormalizationStats& stats) {
    const std::size_t needed = law == LawKind::Elastic ? 1 : 2;
    if (raws.size() < first_raw + needed) {
        throw DataError("constrain_physics_vars: head too narrow for the law");
    }
    if (!(stats.stress_scale > 0.0) || !(stats.strain_scale > 0.0)) {
        throw DataError("constrain_physics_vars: scales must be positive");
    }
    PhysicsVarIds phys;
    switch (law) {
        case LawKind::Elastic:
            phys.first = tape.mul(tape.constant(stats.stress_scale / stats.strain_scale),
                                  tape.softplus(raws[first_raw]));
            break;
        case LawKind::Voce:
            phys.first = tape.mul(tape.constant(stats.stress_scale),
                                  tape.softplus(raws[first_raw]));
            phys.second = tape.mul(tape.constant(100.0), tape.softplus(raws[first_raw + 1]));
            break;
        case LawKind::Hollomon:
            phys.first = tape.mul(tape.constant(stats.stress_scale),
                                  tape.softplus(raws[first_raw]));
            phys.second = tape.logistic(raws[first_raw + 1]);
            break;
    }
    return phys;
}

Tape::NodeId data_loss(Tape& tape, const std::vector<Tape::NodeId>& pred,
                       const std::vector<double>& actual) {
    if (pred.size() != actual.size()) {
        throw DataError("data_loss: prediction/actual length mismatch");
    }
    if (pred.empty()) throw DataError("data_loss: empty batch");
    Tape::NodeId sum = -1;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const Tape::NodeId sq = tape.square(tape.sub(pred[i], tape.constant(actual[i])));
        sum = i == 0 ? sq : tape.add(sum, sq);
    }
    return tape.div(sum, tape.constant(static_cast<double>(pred.size())));
}

Tape::NodeId law_stress(Tape& tape, LawKind law, const PhysicsVarIds& phys,
                        double target_strain, const YieldPoint* yield) {
    if (law == LawKind::Elastic) {
        return tape.mul(phys.first, tape.constant(target_strain));
    }
    if (yield == nullptr) {
        throw DataError("law_stress: plastic laws need a yield point");
    }
    const double delta = std::max(target_strain - yield->eps_y, 0.0);
    if (law == LawKind::Voce) {
        // sigma_y + a * (1 - exp(-b * delta))
        const Tape::NodeId decay =
            tape.exp(tape.neg(tape.mul(phys.second, tape.constant(delta))));
        return tape.add(tape.constant(yield->sigma_y),
                        tape.mul(phys.first, tape.sub(tape.constant(1.0), decay)));
    }
    // Hollomon: sigma_y + K * u^n, u clamped exactly as the scalar law.
    const double u = std::max(delta, kPlasticStrainClamp);
    return tape.add(tape.constant(yield->sigma_y),
                    tape.mul(phys.first, tape.pow(tape.constant(u), phys.second)));
}

Tape::NodeId physics_residual_loss(Tape& tape, LawKind law,
                                   const std::vector<Tape::NodeId>& pred_norm,
                                   const std::vector<PhysicsVarIds>& phys,
                                   const std::vector<double>& target_strains,
                                   const YieldPoint* yield,
                                   const NormalizationStats& stats) {
    if (pred_norm.size() != phys.size() || pred_norm.size() != target_strains.size()) {
        throw DataError("physics_residual_loss: sequence lengths differ");
    }
    if (pred_norm.empty()) throw DataError("physics_residual_loss: empty batch");
    const Tape::NodeId scale = tape.constant(stats.stress_scale);
    Tape::NodeId sum = -1;
    for (std::size_t i = 0; i < pred_norm.size(); ++i) {
        const Tape::NodeId law_norm =
            tape.div(law_stress(tape, law, phys[i], target_strains[i], yield), scale);
        const Tape::NodeId sq = tape.square(tape.sub(pred_norm[i], law_norm));
        sum = i == 0 ? sq : tape.add(sum, sq);
    }
    return tape.div(sum, tape.constant(static_cast<double>(pred_norm.size())));
}

Tape::NodeId auxiliary_loss(Tape& tape, Tape::NodeId lambda, double alpha) {
    if (alpha < 0.0) throw DataError("auxiliary_loss: alpha must be >= 0");
    return tape.mul(tape.constant(alpha),
                    tape.square(tape.sub(lambda, tape.constant(1.0))));
}

Tape::NodeId activation_stress(Tape& tape, LawKind law, const PhysicsVarIds& phys,
                               double target_strain, const YieldPoint* yield) {
    return law_stress(tape, law, phys, target_strain, yield);
}

Tape::NodeId activation_floor(Tape& tape, LawKind law, const PhysicsVarIds& phys,
                              const YieldPoint* yield) {
    if (law == LawKind::Elastic) return -1;
    if (yield == nullptr) {
        throw DataError("activation_floor: plastic laws need a yield point");
    }
    if (law == LawKind::Voce) return tape.constant(yield->sigma_y);
    return tape.add(tape.constant(yield->sigma_y),
                    tape.mul(phys.first,
                             tape.pow(tape.constant(kPlasticStrainClamp), phys.second)));
}

ObjectiveGraph build_objective(Tape& tape, ArchitectureMode mode, LawKind law,
                               const LstmLayout& layout,
                               const std::vector<Window>& batch,
                               const YieldPoint* yield,
                               const NormalizationStats& stats, double alpha) {
    if (!is_sequence_mode(mode)) {
        throw DataError("build_objective: mode has no trainable objective");
    }
    if (layout.head_outputs != head_outputs(mode, law)) {
        throw DataError("build_objective: head width does not match mode/law");
    }
    if (batch.empty()) throw DataError("build_objective: empty window batch");
    if (!(stats.stress_scale > 0.0)) {
        throw DataError("build_objective: stress scale must be positive");
    }
    register_params(tape, layout);
    ObjectiveGraph graph;
    if (mode == ArchitectureMode::LossBased) graph.lambda = tape.param();

    const double scale = stats.stress_scale;
    std::vector<Tape::NodeId> pred_norm;
    std::vector<PhysicsVarIds> phys;
    std::vector<double> strains, actual_norm;
    pred_norm.reserve(batch.size());
    graph.pred_stress_mpa.reserve(batch.size());
    for (const Window& window : batch) {
        const auto hidden = lstm_forward(tape, layout, window.inputs);
        const auto raws = dense_head(tape, layout, hidden);
        switch (mode) {
            case ArchitectureMode::NonSegmental:
            case ArchitectureMode::SegmentalPlain:
                pred_norm.push_back(raws[0]);
                graph.pred_stress_mpa.push_back(tape.mul(raws[0], tape.constant(scale)));
                break;
            case ArchitectureMode::LossBased:
                pred_norm.push_back(raws[0]);
                graph.pred_stress_mpa.push_back(tape.mul(raws[0], tape.constant(scale)));
                phys.push_back(constrain_physics_vars(tape, law, raws, 1, stats));
                break;
            case ArchitectureMode::ActivationBased: {
                const PhysicsVarIds p = constrain_physics_vars(tape, law, raws, 0, stats);
                const Tape::NodeId stress =
                    activation_stress(tape, law, p, window.target_strain, yield);
                graph.pred_stress_mpa.push_back(stress);
                pred_norm.push_back(tape.div(stress, tape.constant(scale)));
                phys.push_back(p);
                break;
            }
            default:
                break;
        }
        strains.push_back(window.target_strain);
        actual_norm.push_back(window.target_stress / scale);
    }

    graph.data = data_loss(tape, pred_norm, actual_norm);
    if (mode == ArchitectureMode::LossBased) {
        graph.physics =
            physics_residual_loss(tape, law, pred_norm, phys, strains, yield, stats);
        graph.aux = auxiliary_loss(tape, graph.lambda, alpha);
        graph.total = tape.add(tape.add(graph.data, tape.mul(graph.lambda, graph.physics)),
                               graph.aux);
    } else {
        graph.total = graph.data;
    }
    return graph;
}

LossBreakdown read_breakdown(const Tape& tape, const ObjectiveGraph& graph) {
    LossBreakdown b;
    b.data_loss = tape.value(graph.data);
    if (graph.lambda >= 0) {
        b.physics_loss = tape.value(graph.physics);
        b.aux_loss = tape.value(graph.aux);
        b.lambda_physics = tape.value(graph.lambda);
    }
    b.total = (b.data_loss + b.lambda_physics * b.physics_loss) + b.aux_loss;
    return b;
}

std::vector<double> init_objective_params(ArchitectureMode mode, const LstmLayout& layout,
                                          std::uint64_t seed) {
    std::vector<double> weights = init_params(layout, seed);
    if (mode == ArchitectureMode::LossBased) weights.push_back(1.0);
    return weights;
}

WindowPrediction predict_window(Tape& tape, ArchitectureMode mode, LawKind law,
                                const LstmLayout& layout, const Window& window,
                                const YieldPoint* yield, const NormalizationStats& stats,
                                const std::vector<double>& weights) {
    tape.clear();
    register_params(tape, layout);
    const auto hidden = lstm_forward(tape, layout, window.inputs);
    const auto raws = dense_head(tape, layout, hidden);
    WindowPrediction out;
    if (mode == ArchitectureMode::ActivationBased) {
        const PhysicsVarIds phys = constrain_physics_vars(tape, law, raws, 0, stats);
        const Tape::NodeId stress =
            activation_stress(tape, law, phys, window.target_strain, yield);
        const Tape::NodeId floor = activation_floor(tape, law, phys, yield);
        tape.evaluate(floor >= 0 ? floor : stress, weights);
        out.stress_mpa = tape.value(stress);
        if (floor >= 0) {
            out.floor_mpa = tape.value(floor);
            out.has_floor = true;
        }
    } else {
        const double norm = tape.evaluate(raws[0], weights);
        out.stress_mpa = norm * stats.stress_scale;
    }
    return out;
}

std::vector<ObjectiveCheck> run_gradient_checks(std::uint64_t seed) {
    struct Combo {
        const char* name;
        ArchitectureMode mode;
        LawKind law;
    };
    const Combo combos[] = {
        {"loss-piml/hooke", ArchitectureMode::LossBased, LawKind::Elastic},
        {"loss-piml/voce", ArchitectureMode::LossBased, LawKind::Voce},
        {"loss-piml/hollomon", ArchitectureMode::LossBased, LawKind::Hollomon},
        {"activation-piml/hooke", ArchitectureMode::ActivationBased, LawKind::Elastic},
        {"activation-piml/voce", ArchitectureMode::ActivationBased, LawKind::Voce},
        {"activation-piml/hollomon", ArchitectureMode::ActivationBased, LawKind::Hollomon},
        {"plain/mse", ArchitectureMode::SegmentalPlain, LawKind::Elastic},
    };

    NormalizationStats stats;
    stats.stress_scale = 200.0;
    stats.strain_scale = 0.02;
    const YieldPoint yield{0.004, 120.0};

    std::vector<ObjectiveCheck> results;
    std::uint64_t combo_index = 0;
    for (const Combo& combo : combos) {
        Rng rng(derive_seed(seed, 1000 + combo_index));
        std::vector<Window> batch;
        for (int w = 0; w < 3; ++w) {
            Window window;
            for (int step = 0; step < 3; ++step) {
                window.inputs.push_back({rng.normal(), rng.normal(), rng.normal()});
            }
            // Strains beyond the yield so Voce/Hollomon see positive
            // plastic strain; stresses at a physical scale.
            window.target_strain = yield.eps_y + 0.002 * (w + 1) + 0.0005 * rng.u01();
            window.target_stress = 100.0 + 60.0 * rng.u01();
            window.region = Region::Plastic;
            batch.push_back(std::move(window));
        }
        const LstmLayout layout{4, kInputWidth, head_outputs(combo.mode, combo.law)};
        std::vector<double> weights =
            init_objective_params(combo.mode, layout, derive_seed(seed, combo_index));
        if (combo.mode == ArchitectureMode::LossBased) {
            weights.back() = 1.2;  // move lambda off the aux-loss minimum
        }
        Tape tape;
        const ObjectiveGraph graph = build_objective(
            tape, combo.mode, combo.law, layout, batch, &yield, stats, 0.1);
        results.push_back(
            ObjectiveCheck{combo.name, grad_check(tape, graph.total, weights)});
        ++combo_index;
    }
    return results;
}

}  // namespace piml
