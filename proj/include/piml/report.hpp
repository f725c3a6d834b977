#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "piml/domain.hpp"
#include "piml/metrics.hpp"

namespace piml {

/// Per-epoch objective components for one trained region model. Vectors that
/// do not apply to the mode (e.g. `physics` for a plain data-driven model)
/// stay empty; populated vectors hold exactly `epochs` entries.
struct LossTrace {
    std::string region;  // "whole" | "elastic" | "plastic"
    std::vector<double> data;
    std::vector<double> physics;
    std::vector<double> aux;
    std::vector<double> total;
    std::vector<double> lambda;  // per-epoch physics weight, loss-based only
};

/// Predicted-vs-actual pairing for one test sample, kept so reports can be
/// rendered to plot-ready CSVs without re-running the experiment.
struct SamplePrediction {
    std::string sample_id;
    std::vector<double> strain;
    std::vector<double> actual_mpa;
    std::vector<double> predicted_mpa;
    std::optional<YieldPoint> predicted_yield;
    /// Activation-architecture only: min over plastic grid points of
    /// sigma_p - (law floor at zero plastic strain). Non-negative by
    /// construction; recorded so the hard guarantee is auditable.
    std::optional<double> physics_margin_mpa;
};

struct FoldResult {
    int fold = 0;
    /// Mean of the trained models' final physics weights (loss-based mode).
    std::optional<double> lambda_avg;
    std::vector<SampleMetrics> samples;
    std::vector<LossTrace> loss_traces;
    std::vector<SamplePrediction> predictions;
};

struct ExperimentReport {
    nlohmann::ordered_json config;  // resolved material/mode/model settings
    std::vector<FoldResult> per_fold;
    std::map<std::string, MetricAggregate> aggregates;
};

inline bool operator==(const LossTrace& x, const LossTrace& y) {
    return x.region == y.region && x.data == y.data && x.physics == y.physics &&
           x.aux == y.aux && x.total == y.total && x.lambda == y.lambda;
}

inline bool operator==(const YieldPoint& x, const YieldPoint& y) {
    return x.eps_y == y.eps_y && x.sigma_y == y.sigma_y;
}

inline bool operator==(const SamplePrediction& x, const SamplePrediction& y) {
    return x.sample_id == y.sample_id && x.strain == y.strain &&
           x.actual_mpa == y.actual_mpa && x.predicted_mpa == y.predicted_mpa &&
           x.predicted_yield == y.predicted_yield &&
           x.physics_margin_mpa == y.physics_margin_mpa;
}

inline bool operator==(const SampleMetrics& x, const SampleMetrics& y) {
    return x.sample_id == y.sample_id && x.fold == y.fold &&
           x.mape_whole == y.mape_whole && x.mape_elastic == y.mape_elastic &&
           x.mape_plastic == y.mape_plastic && x.r2 == y.r2 &&
           x.youngs_modulus_error_pct == y.youngs_modulus_error_pct &&
           x.uts_error_pct == y.uts_error_pct;
}

inline bool operator==(const MetricAggregate& x, const MetricAggregate& y) {
    return x.mean == y.mean && x.stddev == y.stddev &&
           x.half_width == y.half_width && x.n == y.n;
}

inline bool operator==(const FoldResult& x, const FoldResult& y) {
    return x.fold == y.fold && x.lambda_avg == y.lambda_avg &&
           x.samples == y.samples && x.loss_traces == y.loss_traces &&
           x.predictions == y.predictions;
}

inline bool operator==(const ExperimentReport& x, const ExperimentReport& y) {
    return x.config == y.config && x.per_fold == y.per_fold &&
           x.aggregates == y.aggregates;
}

}  // namespace piml
