#pragma once

#include <vector>

#include "piml/domain.hpp"

namespace piml {

/// Plastic-strain clamp inside hollomon_stress: (eps - eps_y) is floored at
/// delta so the value and d/d(eps) stay finite at the segment boundary.
constexpr double kPlasticStrainClamp = 1e-12;

/// Tunables of extract_yield_point. The window/deviation defaults are stated
/// choices, overridable because experimental practice varies.
struct YieldExtractionConfig {
    double window_fraction = 0.2;     // leading share of points used to fit E0
    double deviation_fraction = 0.02; // relative departure from the E0 line
    double offset_strain = 0.002;     // fallback: 0.2%-offset intersection
};

/// Linear-elastic stress E * eps. Requires E > 0, eps >= 0.
double hooke_stress(double E, double eps);

/// Saturating-exponential hardening sigma_y + a * (1 - e^{-b (eps - eps_y)}).
/// Requires a > 0, b > 0, eps >= eps_y.
double voce_stress(const YieldPoint& yield, double a, double b, double eps);

/// Power-law hardening sigma_y + K * (eps - eps_y)^n with the plastic strain
/// clamped below by kPlasticStrainClamp. Requires K > 0, 0 < n <= 1,
/// eps >= eps_y.
double hollomon_stress(const YieldPoint& yield, double K, double n, double eps);

/// Hooke branch below eps_y, the class-appropriate plastic law at and above
/// it. Continuous at eps_y iff sigma_y == E * eps_y.
double piecewise_stress(const ConstitutiveParams& params, MaterialClass material,
                        double eps);

/// Fits the initial modulus E0 over the leading window, then returns the
/// first point whose stress departs from the E0 line by more than the
/// configured fraction; falls back to the offset-line intersection. Throws
/// DataError when the curve has < 8 points or appears fully elastic.
YieldPoint extract_yield_point(const StressStrainCurve& curve,
                               const YieldExtractionConfig& cfg = {});

struct FitResult {
    ConstitutiveParams params;
    double residual_rms = 0.0;  // RMS of plastic-segment residuals, MPa
    int iterations = 0;
    bool converged = false;
};

/// Per-sample nonlinear least squares: E from a through-origin fit over the
/// clearly-elastic leading points, then Levenberg-Marquardt over
/// (eps_y, a, b) or (eps_y, K, n) in log space with sigma_y tied to
/// E * eps_y, warm-started from extract_yield_point. Non-convergence after
/// 200 iterations returns converged=false with the best parameters found.
FitResult fit_constitutive_params(const StressStrainCurve& curve,
                                  MaterialClass material,
                                  const YieldExtractionConfig& cfg = {});

/// Arithmetic mean of each of the five parameters. All fits must carry the
/// same plastic law; throws DataError on an empty or mixed list.
ConstitutiveParams mean_constitutive_model(const std::vector<ConstitutiveParams>& fits);

}  // namespace piml
