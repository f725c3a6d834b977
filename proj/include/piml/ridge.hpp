#pragma once

#include <string>
#include <vector>

#include "piml/domain.hpp"
#include "piml/linalg.hpp"

namespace piml {

/// All monomials of total degree <= degree over the inputs, constant term
/// first, then graded lexicographic order: for d=2, degree=2 the layout is
/// [1, x1, x2, x1^2, x1*x2, x2^2].
std::vector<double> polynomial_features(const std::vector<double>& x, int degree);

/// Number of monomials of total degree <= degree in d variables.
std::size_t polynomial_feature_count(std::size_t d, int degree);

/// Ridge regression over a prebuilt feature matrix whose first column is the
/// constant 1. Non-intercept columns are standardized internally and the
/// penalty never touches the intercept, so the fit is scale-free and the
/// intercept equals mean(y) exactly.
struct RidgeModel {
    int degree = 0;           // 0 when fitted on a caller-built matrix
    std::size_t input_arity = 0;
    double penalty = 0.0;
    std::vector<double> feature_mean;  // per non-intercept feature column
    std::vector<double> feature_std;
    std::vector<double> weights;       // intercept first
    std::string target_name;

    /// Prediction from a raw feature row (same layout as the training X).
    double predict_features(const std::vector<double>& features) const;
    /// Prediction from raw inputs; featurizes with the stored degree.
    double predict(const std::vector<double>& x) const;
};

/// Solves (Z^T Z + penalty * I') w = Z^T y with Z the standardized feature
/// matrix and I' the identity with a zero in the intercept slot. Throws
/// DataError when the system is singular (advising penalty > 0).
RidgeModel ridge_fit(const Matrix& x, const std::vector<double>& y, double penalty,
                     int degree = 0, std::size_t input_arity = 0,
                     std::string target_name = "");

/// Convenience: polynomial expansion of raw input rows, then ridge_fit.
RidgeModel ridge_fit_poly(const std::vector<std::vector<double>>& inputs,
                          const std::vector<double>& y, int degree, double penalty,
                          std::string target_name = "");

// ---------------------------------------------------------------------------
// Yield-point regression (framework step 1)
// ---------------------------------------------------------------------------

/// Separate ridge models for yield strain and yield stress plus the
/// training-derived positivity floors (10% of each target's training
/// minimum).
struct YieldModels {
    RidgeModel eps_model;
    RidgeModel sigma_model;
    double eps_floor = 0.0;
    double sigma_floor = 0.0;
};

/// Fits both yield models on the training samples' process parameters.
/// Throws DataError on empty/ragged inputs.
YieldModels fit_yield_models(const std::vector<std::vector<double>>& params,
                             const std::vector<double>& eps_y,
                             const std::vector<double>& sigma_y, int degree,
                             double penalty);

/// Predicted yield point, clamped below by the stored floors.
YieldPoint predict_yield(const YieldModels& models, const ProcessParameters& params);

// ---------------------------------------------------------------------------
// Pointwise whole-curve ridge baseline
// ---------------------------------------------------------------------------

/// Pools rows (strain, param1, param2) -> stress over all training curves
/// and fits one ridge polynomial.
RidgeModel fit_curve_ridge(const std::vector<const Sample*>& train, int degree = 3,
                           double penalty = 1.0);

/// Stress predicted independently at each grid strain from a fitted
/// pointwise model.
StressStrainCurve evaluate_curve_ridge(const RidgeModel& model,
                                       const ProcessParameters& test_params,
                                       const std::vector<double>& strain_grid);

/// fit_curve_ridge followed by evaluate_curve_ridge.
StressStrainCurve ridge_curve_baseline(const std::vector<const Sample*>& train,
                                       const ProcessParameters& test_params,
                                       const std::vector<double>& strain_grid,
                                       int degree = 3, double penalty = 1.0);

}  // namespace piml
