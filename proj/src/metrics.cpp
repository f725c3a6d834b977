#include "piml/metrics.hpp"

#include <cmath>
#include <cstdint>

namespace piml {

namespace {

constexpr double kStressFloor = 1e-9;  // MPa; excludes near-zero denominators

double sample_mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_stddev(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/// Continued-fraction kernel for the incomplete beta (modified Lentz method).
double beta_cf(double a, double b, double x) {
    constexpr double kTiny = 1e-300;
    constexpr int kMaxIter = 500;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 3e-16) return h;
    }
    throw NumericError("incomplete_beta: continued fraction did not converge");
}

}  // namespace

double mape(const std::vector<double>& actual, const std::vector<double>& predicted,
            std::size_t* excluded) {
    if (actual.size() != predicted.size()) {
        throw DataError("mape: length mismatch");
    }
    double sum = 0.0;
    std::size_t used = 0, skipped = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (std::fabs(actual[i]) <= kStressFloor) {
            ++skipped;
            continue;
        }
        sum += std::fabs(actual[i] - predicted[i]) / actual[i];
        ++used;
    }
    if (excluded) *excluded = skipped;
    if (used == 0) throw DataError("mape: every point fell below the stress floor");
    return 100.0 * sum / static_cast<double>(used);
}

double r_squared(const std::vector<double>& actual, const std::vector<double>& predicted) {
    if (actual.size() != predicted.size()) {
        throw DataError("r_squared: length mismatch");
    }
    if (actual.size() < 2) throw DataError("r_squared: need at least 2 points");
    const double mean = sample_mean(actual);
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
        ss_tot += (actual[i] - mean) * (actual[i] - mean);
    }
    if (ss_tot == 0.0) throw DataError("r_squared: actual sequence is constant");
    return 1.0 - ss_res / ss_tot;
}

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw DataError("incomplete_beta: a, b must be > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cf(a, b, x) / a;
    }
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
    if (!(df > 0.0)) throw DataError("student_t_cdf: df must be > 0");
    if (t == 0.0) return 0.5;
    const double x = df / (df + t * t);
    const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, x);
    return t > 0.0 ? 1.0 - tail : tail;
}

double student_t_critical(double df, double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw DataError("student_t_critical: level must lie in (0, 1)");
    }
    const double target = 1.0 - (1.0 - level) / 2.0;
    double lo = 0.0, hi = 1.0;
    while (student_t_cdf(hi, df) < target) {
        hi *= 2.0;
        if (hi > 1e10) throw NumericError("student_t_critical: bracket blew up");
    }
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        (student_t_cdf(mid, df) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

ConfidenceInterval confidence_interval(const std::vector<double>& values, double level) {
    if (values.size() < 2) throw DataError("confidence_interval: need n >= 2");
    const double mean = sample_mean(values);
    const double s = sample_stddev(values, mean);
    const double tstar = student_t_critical(static_cast<double>(values.size() - 1), level);
    return {mean, tstar * s / std::sqrt(static_cast<double>(values.size()))};
}

double youngs_modulus(const StressStrainCurve& curve, double eps_y) {
    double num = 0.0, den = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (curve.strain[i] < eps_y) {
            num += curve.stress[i] * curve.strain[i];
            den += curve.strain[i] * curve.strain[i];
            ++count;
        }
    }
    if (count < 2) throw DataError("youngs_modulus: need >= 2 points below eps_y");
    if (den == 0.0) throw NumericError("youngs_modulus: degenerate strain values");
    return num / den;
}

double ultimate_tensile_strength(const StressStrainCurve& curve) {
    if (curve.empty()) throw DataError("ultimate_tensile_strength: empty curve");
    double best = curve.stress[0];
    for (double s : curve.stress) best = std::max(best, s);
    return best;
}

MetricAggregate aggregate_metric(const std::vector<double>& values) {
    MetricAggregate agg;
    agg.n = values.size();
    if (values.empty()) return agg;
    agg.mean = sample_mean(values);
    agg.stddev = sample_stddev(values, agg.mean);
    if (values.size() >= 2) {
        agg.half_width = confidence_interval(values).half_width;
    }
    return agg;
}

MetricReport build_metric_report(std::vector<SampleMetrics> samples) {
    MetricReport report;
    report.samples = std::move(samples);
    const std::size_t n = report.samples.size();
    std::vector<double> col(n);
    const auto fill = [&](const std::string& key, auto member) {
        for (std::size_t i = 0; i < n; ++i) col[i] = report.samples[i].*member;
        report.aggregates[key] = aggregate_metric(col);
    };
    fill("mape_whole", &SampleMetrics::mape_whole);
    fill("mape_elastic", &SampleMetrics::mape_elastic);
    fill("mape_plastic", &SampleMetrics::mape_plastic);
    fill("r2", &SampleMetrics::r2);
    fill("youngs_modulus_error_pct", &SampleMetrics::youngs_modulus_error_pct);
    fill("uts_error_pct", &SampleMetrics::uts_error_pct);
    return report;
}

}  // namespace piml
