#include "piml/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iostream>
#include <limits>
#include <numeric>

#include "piml/constitutive.hpp"
#include "piml/rng.hpp"

namespace piml {

namespace {

// Stream ids for deriving the independent per-fold seed chains.
constexpr std::uint64_t kStreamInit = 1;
constexpr std::uint64_t kStreamWhole = 11;
constexpr std::uint64_t kStreamElastic = 12;
constexpr std::uint64_t kStreamPlastic = 13;
constexpr std::uint64_t kStreamEpochBase = 1000;

struct TrainEntry {
    const Sample* sample = nullptr;
    const YieldPoint* yield = nullptr;  // the sample's actual yield
    std::size_t window_index = 0;       // ordinal within the sample's region
    Window window;
};

YieldPoint actual_yield(const Sample& sample) {
    if (sample.truth_yield) return *sample.truth_yield;
    return extract_yield_point(sample.curve);
}

RegionModel train_region(ArchitectureMode mode, LawKind law, Region region,
                         const std::vector<TrainEntry>& entries,
                         const NormalizationStats& stats, const ModelConfig& config,
                         std::uint64_t region_seed) {
    if (entries.empty()) {
        throw DataError(std::string("train_fold: no ") + region_name(region) +
                        " training windows (regions too short for the sequence "
                        "length?)");
    }
    if (config.epochs < 1) throw DataError("train_fold: epochs must be >= 1");
    const LstmLayout layout{config.hidden_units, kInputWidth, head_outputs(mode, law)};
    std::vector<double> weights =
        init_objective_params(mode, layout, derive_seed(region_seed, kStreamInit));

    OptimizerState opt;
    opt.learning_rate = config.learning_rate;
    const std::size_t batch =
        static_cast<std::size_t>(std::max(1, config.batch_size));

    LossTrace trace;
    trace.region = region_name(region);

    Tape tape;
    std::vector<Window> one_window(1);
    std::vector<double> grad_accum(weights.size(), 0.0);
    std::vector<std::size_t> order(entries.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        // The lambda trace samples the value entering the epoch, so entry 0
        // is the 1.0 initialization by construction.
        const double lambda_start =
            mode == ArchitectureMode::LossBased ? weights.back() : 1.0;
        Rng shuffler(derive_seed(region_seed, kStreamEpochBase + static_cast<std::uint64_t>(epoch)));
        shuffler.shuffle(order);

        double sum_data = 0.0, sum_physics = 0.0, sum_aux = 0.0, sum_total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t count = std::min(batch, order.size() - start);
            std::fill(grad_accum.begin(), grad_accum.end(), 0.0);
            for (std::size_t j = 0; j < count; ++j) {
                const TrainEntry& entry = entries[order[start + j]];
                tape.clear();
                one_window[0] = entry.window;
                const ObjectiveGraph graph =
                    build_objective(tape, mode, law, layout, one_window, entry.yield,
                                    stats, config.alpha_aux);
                const Tape::EvalResult result =
                    tape.evaluate_with_gradients(graph.total, weights);
                if (!std::isfinite(result.value)) {
                    throw NumericError(
                        "train_fold: non-finite loss at epoch " + std::to_string(epoch) +
                        " on sample " + entry.sample->id + " (" + region_name(region) +
                        " window " + std::to_string(entry.window_index) + ")");
                }
                const LossBreakdown parts = read_breakdown(tape, graph);
                sum_data += parts.data_loss;
                sum_physics += parts.physics_loss;
                sum_aux += parts.aux_loss;
                sum_total += parts.total;
                const double inv = 1.0 / static_cast<double>(count);
                for (std::size_t i = 0; i < weights.size(); ++i) {
                    grad_accum[i] += result.gradients[i] * inv;
                }
            }
            adam_step(weights, grad_accum, opt);
        }
        const double inv_n = 1.0 / static_cast<double>(order.size());
        trace.data.push_back(sum_data * inv_n);
        trace.physics.push_back(sum_physics * inv_n);
        trace.aux.push_back(sum_aux * inv_n);
        trace.total.push_back(sum_total * inv_n);
        trace.lambda.push_back(lambda_start);
    }

    RegionModel model;
    model.region = region;
    model.law = law;
    model.layout = layout;
    model.weights = std::move(weights);
    model.trace = std::move(trace);
    return model;
}

/// Stresses for one region's sub-grid: an analytic anchor at index 0, then
/// one model evaluation per remaining grid point. The activation mode's
/// plastic anchor is the hardening law at the first strain, evaluated
/// through the same all-padding window the training scheme implies.
std::vector<double> predict_region(const TrainedFold& trained, const RegionModel& model,
                                   const ProcessParameters& params,
                                   const std::vector<double>& region_grid, int seq_len,
                                   const YieldPoint* yield, double plain_anchor,
                                   double* min_margin, Tape& tape) {
    std::vector<double> out;
    if (region_grid.empty()) return out;
    out.reserve(region_grid.size());

    const bool activation = trained.mode == ArchitectureMode::ActivationBased;
    const auto note_margin = [&](const WindowPrediction& pred) {
        if (pred.has_floor && min_margin != nullptr) {
            *min_margin = std::min(*min_margin, pred.stress_mpa - pred.floor_mpa);
        }
    };

    if (activation && model.region == Region::Plastic) {
        StressStrainCurve anchor_curve;
        anchor_curve.strain = {region_grid.front(), region_grid.front()};
        anchor_curve.stress = {0.0, 0.0};
        const auto anchor_windows =
            build_windows(anchor_curve, params, seq_len, trained.stats, model.region);
        const WindowPrediction pred =
            predict_window(tape, trained.mode, model.law, model.layout,
                           anchor_windows.front(), yield, trained.stats, model.weights);
        note_margin(pred);
        out.push_back(pred.stress_mpa);
    } else {
        out.push_back(plain_anchor);
    }
    if (region_grid.size() == 1) return out;

    StressStrainCurve grid_curve;
    grid_curve.strain = region_grid;
    grid_curve.stress.assign(region_grid.size(), 0.0);
    const auto windows =
        build_windows(grid_curve, params, seq_len, trained.stats, model.region);
    for (const Window& window : windows) {
        const WindowPrediction pred =
            predict_window(tape, trained.mode, model.law, model.layout, window, yield,
                           trained.stats, model.weights);
        note_margin(pred);
        out.push_back(pred.stress_mpa);
    }
    return out;
}

}  // namespace

FoldPlan make_folds(const std::vector<std::string>& sample_ids, int k,
                    std::uint64_t seed) {
    if (k < 2) throw DataError("make_folds: need k >= 2, got " + std::to_string(k));
    if (sample_ids.size() < static_cast<std::size_t>(k)) {
        throw DataError("make_folds: " + std::to_string(sample_ids.size()) +
                        " samples cannot fill " + std::to_string(k) + " folds");
    }
    std::vector<std::size_t> order(sample_ids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);
    FoldPlan plan;
    plan.k = k;
    plan.assignments.assign(sample_ids.size(), 0);
    for (std::size_t i = 0; i < order.size(); ++i) {
        plan.assignments[order[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    }
    return plan;
}

std::vector<std::size_t> fold_training_indices(const FoldPlan& plan, int fold) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < plan.assignments.size(); ++i) {
        if (plan.assignments[i] == fold) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> fold_test_indices(const FoldPlan& plan, int fold) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < plan.assignments.size(); ++i) {
        if (plan.assignments[i] != fold) out.push_back(i);
    }
    return out;
}

SegmentedCurve segment_curve(const StressStrainCurve& curve, double eps_py) {
    if (curve.size() < 2) throw DataError("segment_curve: need at least 2 points");
    if (!(eps_py > curve.strain.front() && eps_py < curve.strain.back())) {
        throw DataError("segment_curve: eps_py " + std::to_string(eps_py) +
                        " lies outside the curve's open strain range (" +
                        std::to_string(curve.strain.front()) + ", " +
                        std::to_string(curve.strain.back()) + ")");
    }
    const auto it =
        std::lower_bound(curve.strain.begin(), curve.strain.end(), eps_py);
    const std::size_t boundary =
        static_cast<std::size_t>(it - curve.strain.begin());
    SegmentedCurve seg;
    seg.boundary_index = boundary;
    seg.elastic.strain.assign(curve.strain.begin(), curve.strain.begin() + boundary);
    seg.elastic.stress.assign(curve.stress.begin(), curve.stress.begin() + boundary);
    seg.plastic.strain.assign(curve.strain.begin() + boundary, curve.strain.end());
    seg.plastic.stress.assign(curve.stress.begin() + boundary, curve.stress.end());
    return seg;
}

TrainedFold train_fold(const std::vector<const Sample*>& train, MaterialId material,
                       ArchitectureMode mode, const ModelConfig& config,
                       std::uint64_t fold_seed) {
    if (train.size() < 2) {
        throw DataError("train_fold: need at least 2 training samples, got " +
                        std::to_string(train.size()));
    }
    const MaterialClass cls = material_class(material);
    TrainedFold out;
    out.mode = mode;
    out.material = material;
    out.config = config;

    if (mode == ArchitectureMode::ConstitutiveBaseline) {
        std::vector<ConstitutiveParams> fits;
        fits.reserve(train.size());
        for (const Sample* s : train) {
            fits.push_back(fit_constitutive_params(s->curve, cls).params);
        }
        out.mean_params = mean_constitutive_model(fits);
        return out;
    }
    if (mode == ArchitectureMode::RidgeBaseline) {
        out.curve_ridge = fit_curve_ridge(train);
        return out;
    }

    std::vector<const StressStrainCurve*> curves;
    std::vector<const ProcessParameters*> param_ptrs;
    for (const Sample* s : train) {
        curves.push_back(&s->curve);
        param_ptrs.push_back(&s->params);
    }
    out.stats = compute_normalization(curves, param_ptrs);

    std::vector<YieldPoint> yields;
    yields.reserve(train.size());
    for (const Sample* s : train) yields.push_back(actual_yield(*s));

    if (mode == ArchitectureMode::NonSegmental) {
        std::vector<TrainEntry> entries;
        for (std::size_t i = 0; i < train.size(); ++i) {
            auto windows = build_windows(train[i]->curve, train[i]->params,
                                         config.seq_len_plastic, out.stats,
                                         Region::Whole);
            for (std::size_t w = 0; w < windows.size(); ++w) {
                entries.push_back({train[i], nullptr, w, std::move(windows[w])});
            }
        }
        out.whole = train_region(mode, LawKind::Elastic, Region::Whole, entries,
                                 out.stats, config, derive_seed(fold_seed, kStreamWhole));
        return out;
    }

    // Segmental sequence modes: yield models on the actual training yields,
    // then per-region training with each curve segmented by its OWN yield.
    std::vector<std::vector<double>> param_rows;
    std::vector<double> eps_targets, sigma_targets;
    for (std::size_t i = 0; i < train.size(); ++i) {
        param_rows.push_back(train[i]->params.values);
        eps_targets.push_back(yields[i].eps_y);
        sigma_targets.push_back(yields[i].sigma_y);
    }
    out.yield = fit_yield_models(param_rows, eps_targets, sigma_targets,
                                 config.ridge_degree, config.ridge_penalty);

    std::vector<TrainEntry> elastic_entries, plastic_entries;
    for (std::size_t i = 0; i < train.size(); ++i) {
        const SegmentedCurve seg = segment_curve(train[i]->curve, yields[i].eps_y);
        auto ewin = build_windows(seg.elastic, train[i]->params, config.seq_len_elastic,
                                  out.stats, Region::Elastic);
        for (std::size_t w = 0; w < ewin.size(); ++w) {
            elastic_entries.push_back({train[i], &yields[i], w, std::move(ewin[w])});
        }
        auto pwin = build_windows(seg.plastic, train[i]->params, config.seq_len_plastic,
                                  out.stats, Region::Plastic);
        for (std::size_t w = 0; w < pwin.size(); ++w) {
            plastic_entries.push_back({train[i], &yields[i], w, std::move(pwin[w])});
        }
    }
    out.elastic = train_region(mode, LawKind::Elastic, Region::Elastic, elastic_entries,
                               out.stats, config,
                               derive_seed(fold_seed, kStreamElastic));
    out.plastic = train_region(mode, law_for(Region::Plastic, cls), Region::Plastic,
                               plastic_entries, out.stats, config,
                               derive_seed(fold_seed, kStreamPlastic));
    return out;
}

PredictionDetail predict_sample_detail(const TrainedFold& trained,
                                       const ProcessParameters& params,
                                       const std::vector<double>& strain_grid) {
    if (strain_grid.empty()) {
        throw DataError("predict_sample: empty strain grid");
    }
    if (params.values.size() + 1 != static_cast<std::size_t>(kInputWidth)) {
        throw DataError("predict_sample: expected " +
                        std::to_string(kInputWidth - 1) + " process parameters, got " +
                        std::to_string(params.values.size()));
    }
    PredictionDetail detail;
    detail.curve.strain = strain_grid;
    const MaterialClass cls = material_class(trained.material);

    switch (trained.mode) {
        case ArchitectureMode::ConstitutiveBaseline: {
            if (!trained.mean_params) {
                throw DataError("predict_sample: fold carries no constitutive model");
            }
            detail.curve.stress.reserve(strain_grid.size());
            for (const double eps : strain_grid) {
                detail.curve.stress.push_back(
                    piecewise_stress(*trained.mean_params, cls, eps));
            }
            detail.predicted_yield =
                YieldPoint{trained.mean_params->eps_y, trained.mean_params->sigma_y};
            break;
        }
        case ArchitectureMode::RidgeBaseline: {
            if (!trained.curve_ridge) {
                throw DataError("predict_sample: fold carries no ridge model");
            }
            detail.curve =
                evaluate_curve_ridge(*trained.curve_ridge, params, strain_grid);
            break;
        }
        case ArchitectureMode::NonSegmental: {
            if (!trained.whole) {
                throw DataError("predict_sample: fold carries no whole-curve model");
            }
            Tape tape;
            detail.curve.stress = predict_region(
                trained, *trained.whole, params, strain_grid,
                trained.config.seq_len_plastic, nullptr, 0.0, nullptr, tape);
            break;
        }
        default: {
            if (!trained.yield || !trained.elastic || !trained.plastic) {
                throw DataError("predict_sample: fold carries no segmental models");
            }
            const YieldPoint yield = predict_yield(*trained.yield, params);
            detail.predicted_yield = yield;
            Tape tape;
            double min_margin = std::numeric_limits<double>::infinity();
            const bool inside = yield.eps_y > strain_grid.front() &&
                                yield.eps_y < strain_grid.back();
            if (!inside) {
                std::cerr << "[warn] predict_sample: predicted yield strain "
                          << yield.eps_y
                          << " lies outside the strain grid; using the elastic "
                             "model over the whole grid\n";
                detail.curve.stress = predict_region(
                    trained, *trained.elastic, params, strain_grid,
                    trained.config.seq_len_elastic, &yield, 0.0, &min_margin, tape);
            } else {
                const auto split = std::lower_bound(strain_grid.begin(),
                                                    strain_grid.end(), yield.eps_y);
                const std::vector<double> elastic_grid(strain_grid.begin(), split);
                const std::vector<double> plastic_grid(split, strain_grid.end());
                detail.curve.stress = predict_region(
                    trained, *trained.elastic, params, elastic_grid,
                    trained.config.seq_len_elastic, &yield, 0.0, &min_margin, tape);
                const std::vector<double> plastic_stress = predict_region(
                    trained, *trained.plastic, params, plastic_grid,
                    trained.config.seq_len_plastic, &yield, yield.sigma_y, &min_margin,
                    tape);
                detail.curve.stress.insert(detail.curve.stress.end(),
                                           plastic_stress.begin(),
                                           plastic_stress.end());
            }
            if (std::isfinite(min_margin)) detail.min_physics_margin_mpa = min_margin;
            break;
        }
    }

    for (const double s : detail.curve.stress) {
        if (!std::isfinite(s)) {
            throw NumericError("predict_sample: non-finite predicted stress");
        }
    }
    if (detail.curve.stress.size() != strain_grid.size()) {
        throw NumericError("predict_sample: prediction length mismatch");
    }
    return detail;
}

StressStrainCurve predict_sample(const TrainedFold& trained, MaterialId material,
                                 ArchitectureMode mode, const ProcessParameters& params,
                                 const std::vector<double>& strain_grid) {
    if (material != trained.material || mode != trained.mode) {
        throw DataError("predict_sample: material/mode do not match the trained fold");
    }
    return predict_sample_detail(trained, params, strain_grid).curve;
}

SampleMetrics compute_sample_metrics(const Sample& sample,
                                     const StressStrainCurve& predicted, int fold) {
    if (predicted.size() != sample.curve.size()) {
        throw DataError("compute_sample_metrics: predicted/actual length mismatch for " +
                        sample.id);
    }
    const YieldPoint yield = actual_yield(sample);
    const SegmentedCurve actual_seg = segment_curve(sample.curve, yield.eps_y);
    const std::size_t boundary = actual_seg.boundary_index;

    SampleMetrics m;
    m.sample_id = sample.id;
    m.fold = fold;
    m.mape_whole = mape(sample.curve.stress, predicted.stress);
    const std::vector<double> pred_elastic(predicted.stress.begin(),
                                           predicted.stress.begin() + boundary);
    const std::vector<double> pred_plastic(predicted.stress.begin() + boundary,
                                           predicted.stress.end());
    m.mape_elastic = mape(actual_seg.elastic.stress, pred_elastic);
    m.mape_plastic = mape(actual_seg.plastic.stress, pred_plastic);
    m.r2 = r_squared(sample.curve.stress, predicted.stress);

    const double e_actual = youngs_modulus(sample.curve, yield.eps_y);
    const double e_predicted = youngs_modulus(predicted, yield.eps_y);
    m.youngs_modulus_error_pct = std::abs(e_predicted - e_actual) / e_actual * 100.0;
    const double uts_actual = ultimate_tensile_strength(sample.curve);
    const double uts_predicted = ultimate_tensile_strength(predicted);
    m.uts_error_pct = std::abs(uts_predicted - uts_actual) / uts_actual * 100.0;
    return m;
}

ExperimentReport run_cross_validation(const std::vector<Sample>& samples,
                                      MaterialId material, ArchitectureMode mode,
                                      const ModelConfig& config, int k, int jobs) {
    std::vector<std::string> ids;
    ids.reserve(samples.size());
    for (const Sample& s : samples) ids.push_back(s.id);
    const FoldPlan plan = make_folds(ids, k, config.seed);

    ExperimentReport report;
    report.config = nlohmann::ordered_json{
        {"material", material_name(material)},
        {"mode", mode_name(mode)},
        {"folds", k},
        {"hidden_units", config.hidden_units},
        {"learning_rate", config.learning_rate},
        {"batch_size", config.batch_size},
        {"epochs", config.epochs},
        {"seq_len_elastic", config.seq_len_elastic},
        {"seq_len_plastic", config.seq_len_plastic},
        {"alpha_aux", config.alpha_aux},
        {"ridge_degree", config.ridge_degree},
        {"ridge_penalty", config.ridge_penalty},
        {"seed", config.seed},
    };
    report.per_fold.resize(static_cast<std::size_t>(k));
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(k));

    const int workers = std::max(1, jobs);
#pragma omp parallel for num_threads(workers) schedule(dynamic, 1) if (workers > 1)
    for (int f = 0; f < k; ++f) {
        try {
            std::vector<const Sample*> train;
            for (const std::size_t i : fold_training_indices(plan, f)) {
                train.push_back(&samples[i]);
            }
            const TrainedFold trained =
                train_fold(train, material, mode, config,
                           derive_seed(config.seed, static_cast<std::uint64_t>(f)));

            FoldResult result;
            result.fold = f;
            for (const RegionModel* model :
                 {trained.elastic ? &*trained.elastic : nullptr,
                  trained.plastic ? &*trained.plastic : nullptr,
                  trained.whole ? &*trained.whole : nullptr}) {
                if (model != nullptr) result.loss_traces.push_back(model->trace);
            }
            if (mode == ArchitectureMode::LossBased) {
                double sum = 0.0;
                int count = 0;
                for (const auto* model : {&*trained.elastic, &*trained.plastic}) {
                    sum += model->weights.back();
                    ++count;
                }
                result.lambda_avg = sum / count;
            }

            for (const std::size_t i : fold_test_indices(plan, f)) {
                const Sample& sample = samples[i];
                const PredictionDetail detail =
                    predict_sample_detail(trained, sample.params, sample.curve.strain);
                result.samples.push_back(
                    compute_sample_metrics(sample, detail.curve, f));
                SamplePrediction prediction;
                prediction.sample_id = sample.id;
                prediction.strain = sample.curve.strain;
                prediction.actual_mpa = sample.curve.stress;
                prediction.predicted_mpa = detail.curve.stress;
                prediction.predicted_yield = detail.predicted_yield;
                prediction.physics_margin_mpa = detail.min_physics_margin_mpa;
                result.predictions.push_back(std::move(prediction));
            }
            report.per_fold[static_cast<std::size_t>(f)] = std::move(result);
        } catch (...) {
            failures[static_cast<std::size_t>(f)] = std::current_exception();
        }
    }
    for (const std::exception_ptr& failure : failures) {
        if (failure) std::rethrow_exception(failure);
    }

    std::vector<SampleMetrics> all;
    for (const FoldResult& fr : report.per_fold) {
        all.insert(all.end(), fr.samples.begin(), fr.samples.end());
    }
    report.aggregates = build_metric_report(std::move(all)).aggregates;
    return report;
}

}  // namespace piml
