#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "piml/domain.hpp"
#include "piml/lstm.hpp"
#include "piml/metrics.hpp"
#include "piml/objectives.hpp"
#include "piml/report.hpp"
#include "piml/ridge.hpp"

namespace piml {

/// Disjoint, balanced (sizes differ by at most 1) assignment of samples to k
/// folds. Fold f's samples are the TRAINING set of run f; everything else is
/// that run's test set (the inverted 20/80 protocol).
struct FoldPlan {
    int k = 0;
    std::vector<int> assignments;  // parallel to the id list make_folds received
};

/// Deterministic shuffle by seed, then round-robin assignment. Requires
/// k >= 2 and at least k samples.
FoldPlan make_folds(const std::vector<std::string>& sample_ids, int k,
                    std::uint64_t seed);

/// Indices (into the original sample list) of fold `fold`'s training set, in
/// original order.
std::vector<std::size_t> fold_training_indices(const FoldPlan& plan, int fold);
std::vector<std::size_t> fold_test_indices(const FoldPlan& plan, int fold);

/// Splits at the first index whose strain >= eps_py: elastic = points before
/// it, plastic = points from it onward. eps_py must lie strictly inside the
/// curve's strain range so both regions are non-empty.
SegmentedCurve segment_curve(const StressStrainCurve& curve, double eps_py);

/// One trained LSTM (weights include the trailing lambda for the loss-based
/// mode) plus its per-epoch loss trace.
struct RegionModel {
    Region region = Region::Whole;
    LawKind law = LawKind::Elastic;
    LstmLayout layout;
    std::vector<double> weights;
    LossTrace trace;
};

/// Everything a fold learns from its training samples. Only the fields the
/// mode needs are populated; all of them are functions of the training set
/// alone, so test information cannot leak in by construction.
struct TrainedFold {
    ArchitectureMode mode = ArchitectureMode::SegmentalPlain;
    MaterialId material = MaterialId::Nylon;
    ModelConfig config;
    std::optional<YieldModels> yield;          // segmental sequence modes
    NormalizationStats stats;                  // sequence modes
    std::optional<RegionModel> elastic;        // segmental sequence modes
    std::optional<RegionModel> plastic;        // segmental sequence modes
    std::optional<RegionModel> whole;          // non-segmental mode
    std::optional<ConstitutiveParams> mean_params;  // constitutive baseline
    std::optional<RidgeModel> curve_ridge;          // pointwise ridge baseline
};

/// Trains one fold: fits the yield ridge models on the training samples'
/// actual yields (recorded truth when present, else extract_yield_point),
/// segments every training curve by its OWN actual yield, then trains the
/// region models for config.epochs epochs at batch size 1 with a
/// deterministic epoch-seeded shuffle of all (sample, window) pairs.
/// Baseline modes skip network training and fit their closed-form models
/// instead. A non-finite loss aborts with a diagnostic naming the epoch and
/// sample.
TrainedFold train_fold(const std::vector<const Sample*>& train, MaterialId material,
                       ArchitectureMode mode, const ModelConfig& config,
                       std::uint64_t fold_seed);

/// A predicted curve plus the side information the report records: the
/// predicted yield point (segmental sequence modes) and the minimum
/// activation-mode plastic margin stress_minus_floor over the grid.
struct PredictionDetail {
    StressStrainCurve curve;
    std::optional<YieldPoint> predicted_yield;
    std::optional<double> min_physics_margin_mpa;
};

/// Predicts the stress at every grid strain. Sequence modes predict the
/// yield point first, split the grid there, and run the elastic/plastic
/// models over their sub-grids with analytic anchors at each region's first
/// point (elastic: 0; plastic: predicted sigma_py, or the hardening-law value
/// for the activation mode). A predicted yield strain outside the open grid
/// range falls back to the elastic model over the whole grid with a logged
/// warning.
PredictionDetail predict_sample_detail(const TrainedFold& trained,
                                       const ProcessParameters& params,
                                       const std::vector<double>& strain_grid);

/// Curve-only convenience wrapper; material/mode must match the TrainedFold.
StressStrainCurve predict_sample(const TrainedFold& trained, MaterialId material,
                                 ArchitectureMode mode, const ProcessParameters& params,
                                 const std::vector<double>& strain_grid);

/// Per-sample error metrics against the recorded curve; the elastic/plastic
/// split of the metric regions uses the sample's actual yield.
SampleMetrics compute_sample_metrics(const Sample& sample,
                                     const StressStrainCurve& predicted, int fold);

/// Runs the full k-fold protocol: per fold, train on the fold's samples and
/// predict/score every remaining sample on its own strain grid; aggregate
/// mean +/- 95% CI over all (fold, sample) pairs. Folds run concurrently
/// when jobs > 1; results land in preallocated per-fold slots so the report
/// is byte-identical for any job count.
ExperimentReport run_cross_validation(const std::vector<Sample>& samples,
                                      MaterialId material, ArchitectureMode mode,
                                      const ModelConfig& config, int k = 5,
                                      int jobs = 1);

}  // namespace piml
