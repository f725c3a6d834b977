#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "piml/domain.hpp"

namespace piml {

/// Mean absolute percentage error, |y - yhat| / y * 100 averaged over points.
/// Points with |actual| <= 1e-9 MPa are excluded (near-zero stresses would
/// dominate the mean); the number excluded is written to `excluded` when
/// given. Throws DataError on length mismatch or when every point is excluded.
double mape(const std::vector<double>& actual, const std::vector<double>& predicted,
            std::size_t* excluded = nullptr);

/// Coefficient of determination 1 - SS_res / SS_tot (may be negative).
/// Throws DataError for fewer than 2 points or constant `actual`.
double r_squared(const std::vector<double>& actual, const std::vector<double>& predicted);

/// Regularized incomplete beta function I_x(a, b), a,b > 0, x in [0, 1].
double incomplete_beta(double a, double b, double x);

/// CDF of Student's t distribution with `df` degrees of freedom.
double student_t_cdf(double t, double df);

/// Two-sided critical value t* with CDF(t*) = 1 - (1 - level)/2, found by
/// bisection on the CDF to absolute tolerance 1e-10.
double student_t_critical(double df, double level = 0.95);

/// Sample mean and t-based confidence half-width t* s / sqrt(n) with the
/// n-1 standard deviation. Throws DataError for n < 2.
struct ConfidenceInterval {
    double mean = 0.0;
    double half_width = 0.0;
};
ConfidenceInterval confidence_interval(const std::vector<double>& values,
                                       double level = 0.95);

/// Least-squares slope through the origin over points with strain < eps_y.
/// Throws DataError when fewer than 2 such points exist.
double youngs_modulus(const StressStrainCurve& curve, double eps_y);

/// Maximum stress on the curve. Throws DataError on an empty curve.
double ultimate_tensile_strength(const StressStrainCurve& curve);

// ---------------------------------------------------------------------------
// Cross-validation reporting containers
// ---------------------------------------------------------------------------

/// One evaluated test sample within one fold.
struct SampleMetrics {
    std::string sample_id;
    int fold = 0;
    double mape_whole = 0.0;
    double mape_elastic = 0.0;
    double mape_plastic = 0.0;
    double r2 = 0.0;
    double youngs_modulus_error_pct = 0.0;
    double uts_error_pct = 0.0;
};

struct MetricAggregate {
    double mean = 0.0;
    double stddev = 0.0;      // n-1 denominator; 0 when n < 2
    double half_width = 0.0;  // 95% t-interval half-width; 0 when n < 2
    std::size_t n = 0;
};

/// Mean/spread summary of a metric across sample records.
MetricAggregate aggregate_metric(const std::vector<double>& values);

struct MetricReport {
    std::vector<SampleMetrics> samples;
    std::map<std::string, MetricAggregate> aggregates;
};

/// Builds the aggregate table (keys: mape_whole, mape_elastic, mape_plastic,
/// r2, youngs_modulus_error_pct, uts_error_pct) from per-sample records.
MetricReport build_metric_report(std::vector<SampleMetrics> samples);

}  // namespace piml
