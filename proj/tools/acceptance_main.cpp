// Acceptance gate for the whole pipeline: ten independent criteria, one
// [PASS]/[FAIL] line each, nonzero exit when any fails. Criteria with a
// runtime budget report elapsed wall time and fail when over budget.
//
// The expensive part (criteria 5/6/7/9) is a single shared sweep: 5-fold CV
// for every ML mode on all four materials' noisy synthetic datasets, run
// single-threaded so the stated budgets are honest.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "piml/constitutive.hpp"
#include "piml/io.hpp"
#include "piml/metrics.hpp"
#include "piml/objectives.hpp"
#include "piml/pipeline.hpp"
#include "piml/rng.hpp"
#include "piml/synthdata.hpp"

using namespace piml;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Gate {
    int failures = 0;

    void record(int id, const std::string& label, bool pass,
                const std::string& detail) {
        std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << id << ": "
                  << label;
        if (!detail.empty()) std::cout << " (" << detail << ")";
        std::cout << "\n" << std::flush;
        if (!pass) ++failures;
    }
};

std::string fmt(double v, int precision = 4) {
    std::ostringstream out;
    out.precision(precision);
    out << std::fixed << v;
    return out.str();
}

const std::vector<MaterialId> kMaterials = {MaterialId::Nylon, MaterialId::CfAbs,
                                            MaterialId::AlSi10Mg,
                                            MaterialId::Ti6Al4V};

// --------------------------------------------------------------------------
// 1. Gradient fidelity across all objectives, seeds 1..3.
// --------------------------------------------------------------------------
void criterion_gradients(Gate& gate) {
    const auto start = Clock::now();
    double worst = 0.0;
    std::string worst_name;
    std::size_t checks = 0;
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        for (const ObjectiveCheck& c : run_gradient_checks(seed)) {
            ++checks;
            if (c.max_rel_error > worst) {
                worst = c.max_rel_error;
                worst_name = c.name + " @seed " + std::to_string(seed);
            }
        }
    }
    const double elapsed = seconds_since(start);
    const bool pass = worst < 1e-4 && elapsed < 30.0;
    std::ostringstream detail;
    detail << checks << " checks, worst rel err " << worst << " [" << worst_name
           << "], " << fmt(elapsed, 1) << "s";
    gate.record(1, "objective gradients match finite differences", pass,
                detail.str());
}

// --------------------------------------------------------------------------
// 2. NLS recovery of generator truth at each material's DOE-center point.
// --------------------------------------------------------------------------
void criterion_nls_recovery(Gate& gate) {
    const auto start = Clock::now();
    bool pass = true;
    std::ostringstream detail;
    for (MaterialId id : kMaterials) {
        const TruthMap map = TruthMap::defaults_for(id);
        const Sample sample =
            synthesize_curve(map.base, id, map.grid, /*noise_std=*/0.0, /*seed=*/1);
        const FitResult fit = fit_constitutive_params(sample.curve, material_class(id));
        auto rel = [](double got, double want) {
            return std::abs(got - want) / std::abs(want);
        };
        double err = rel(fit.params.E, map.base.E);
        if (material_class(id) == MaterialClass::Polymer) {
            const auto& got = std::get<VocePlastic>(fit.params.plastic);
            const auto& want = std::get<VocePlastic>(map.base.plastic);
            err = std::max({err, rel(got.a, want.a), rel(got.b, want.b)});
        } else {
            const auto& got = std::get<HollomonPlastic>(fit.params.plastic);
            const auto& want = std::get<HollomonPlastic>(map.base.plastic);
            err = std::max({err, rel(got.K, want.K), rel(got.n, want.n)});
        }
        if (!(err < 1e-3) || !fit.converged) pass = false;
        detail << material_name(id) << " err " << err << (fit.converged ? "" : " (!)")
               << "; ";
    }
    const double elapsed = seconds_since(start);
    if (elapsed >= 5.0) pass = false;
    detail << fmt(elapsed, 2) << "s";
    gate.record(2, "constitutive fit recovers truth at DOE centers", pass,
                detail.str());
}

// --------------------------------------------------------------------------
// 3. Constitutive baseline on constant-truth noiseless data: < 1% MAPE.
// --------------------------------------------------------------------------
void criterion_constitutive_cv(Gate& gate) {
    const auto start = Clock::now();
    bool pass = true;
    std::ostringstream detail;
    for (MaterialId id : kMaterials) {
        const TruthMap map = TruthMap::constant(id);
        const auto samples = generate_samples(map, /*noise_std=*/0.0, /*seed=*/0);
        const ExperimentReport report = run_cross_validation(
            samples, id, ArchitectureMode::ConstitutiveBaseline,
            ModelConfig::defaults_for(id), /*k=*/5, /*jobs=*/1);
        const double mape = report.aggregates.at("mape_whole").mean;
        if (!(mape < 1.0)) pass = false;
        detail << material_name(id) << " " << fmt(mape) << "%; ";
    }
    const double elapsed = seconds_since(start);
    if (elapsed >= 30.0) pass = false;
    detail << fmt(elapsed, 1) << "s";
    gate.record(3, "constitutive baseline < 1% MAPE on constant-truth data", pass,
                detail.str());
}

// --------------------------------------------------------------------------
// 4. Activation-based mode learns noiseless AlSi10Mg to < 5% MAPE.
// --------------------------------------------------------------------------
void criterion_activation_learnability(Gate& gate) {
    const auto start = Clock::now();
    const TruthMap map = TruthMap::defaults_for(MaterialId::AlSi10Mg);
    const auto samples = generate_samples(map, /*noise_std=*/0.0, /*seed=*/0);
    const ModelConfig config = ModelConfig::defaults_for(MaterialId::AlSi10Mg);
    const ExperimentReport report =
        run_cross_validation(samples, MaterialId::AlSi10Mg,
                             ArchitectureMode::ActivationBased, config, 5, 1);
    const double mape = report.aggregates.at("mape_whole").mean;
    const double elapsed = seconds_since(start);
    const bool pass = mape < 5.0 && elapsed < 300.0;
    gate.record(4, "activation mode < 5% MAPE on noiseless AlSi10Mg", pass,
                std::to_string(samples.size()) + " samples, mean whole MAPE " +
                    fmt(mape) + "%, " + fmt(elapsed, 1) + "s");
}

// --------------------------------------------------------------------------
// Shared sweep for criteria 5/6/7/9: all ML modes, all materials, 2% noise.
// --------------------------------------------------------------------------
struct SweepResult {
    // material -> mode -> report
    std::map<MaterialId, std::map<ArchitectureMode, ExperimentReport>> reports;
    double elapsed = 0.0;
};

SweepResult run_noisy_sweep() {
    const std::vector<ArchitectureMode> modes = {
        ArchitectureMode::ActivationBased, ArchitectureMode::LossBased,
        ArchitectureMode::SegmentalPlain, ArchitectureMode::RidgeBaseline};
    SweepResult result;
    const auto start = Clock::now();
    for (MaterialId id : kMaterials) {
        const TruthMap map = TruthMap::defaults_for(id);
        const auto samples = generate_samples(map, /*noise_std=*/0.02, /*seed=*/42);
        for (ArchitectureMode mode : modes) {
            result.reports[id][mode] = run_cross_validation(
                samples, id, mode, ModelConfig::defaults_for(id), 5, /*jobs=*/1);
            std::cout << "  [sweep] " << material_name(id) << " / " << mode_name(mode)
                      << ": mean whole MAPE "
                      << fmt(result.reports[id][mode].aggregates.at("mape_whole").mean)
                      << "%\n"
                      << std::flush;
        }
    }
    result.elapsed = seconds_since(start);
    return result;
}

// 5. Every loss-based fold keeps its average physics weight within [0.9, 1.1].
void criterion_lambda(Gate& gate, const SweepResult& sweep) {
    bool pass = true;
    double lo = 1.0, hi = 1.0;
    std::size_t folds = 0;
    for (const auto& [id, by_mode] : sweep.reports) {
        const ExperimentReport& report = by_mode.at(ArchitectureMode::LossBased);
        for (const FoldResult& fold : report.per_fold) {
            if (!fold.lambda_avg.has_value()) {
                pass = false;
                continue;
            }
            ++folds;
            lo = std::min(lo, *fold.lambda_avg);
            hi = std::max(hi, *fold.lambda_avg);
            if (!(*fold.lambda_avg >= 0.9 && *fold.lambda_avg <= 1.1)) pass = false;
        }
    }
    if (folds != kMaterials.size() * 5) pass = false;
    gate.record(5, "loss-based physics weight stays in [0.9, 1.1]", pass,
                std::to_string(folds) + " folds, range [" + fmt(lo) + ", " + fmt(hi) +
                    "]");
}

// 6. Mode ordering: activation <= loss < plain, ridge worst, on >= 3 materials.
void criterion_ordering(Gate& gate, const SweepResult& sweep) {
    int satisfied = 0;
    std::ostringstream detail;
    for (MaterialId id : kMaterials) {
        const auto& by_mode = sweep.reports.at(id);
        auto mape = [&](ArchitectureMode mode) {
            return by_mode.at(mode).aggregates.at("mape_whole").mean;
        };
        const double act = mape(ArchitectureMode::ActivationBased);
        const double loss = mape(ArchitectureMode::LossBased);
        const double plain = mape(ArchitectureMode::SegmentalPlain);
        const double ridge = mape(ArchitectureMode::RidgeBaseline);
        const bool ok =
            act <= loss && loss < plain && ridge > act && ridge > loss && ridge > plain;
        if (ok) ++satisfied;
        detail << material_name(id) << (ok ? " ok" : " MISS") << " [act " << fmt(act)
               << " <= loss " << fmt(loss) << " < plain " << fmt(plain) << ", ridge "
               << fmt(ridge) << "]; ";
    }
    const bool pass = satisfied >= 3 && sweep.elapsed < 1800.0;
    detail << satisfied << "/4 materials, sweep " << fmt(sweep.elapsed, 1) << "s";
    gate.record(6, "noisy-data MAPE ordering across modes", pass, detail.str());
}

// 7. Hard physical-consistency guarantee: no activation prediction below the
//    hardening-law floor anywhere on the plastic grid.
void criterion_physics_floor(Gate& gate, const SweepResult& sweep) {
    std::size_t predictions = 0, with_margin = 0, violations = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& [id, by_mode] : sweep.reports) {
        const ExperimentReport& report = by_mode.at(ArchitectureMode::ActivationBased);
        for (const FoldResult& fold : report.per_fold) {
            for (const SamplePrediction& pred : fold.predictions) {
                ++predictions;
                if (!pred.physics_margin_mpa.has_value()) continue;
                ++with_margin;
                worst = std::min(worst, *pred.physics_margin_mpa);
                if (*pred.physics_margin_mpa < 0.0) ++violations;
            }
        }
    }
    const bool pass = predictions > 0 && with_margin == predictions && violations == 0;
    gate.record(7, "activation predictions never fall below the law floor", pass,
                std::to_string(predictions) + " predictions, min margin " +
                    fmt(worst, 6) + " MPa, " + std::to_string(violations) +
                    " violations");
}

// --------------------------------------------------------------------------
// 8. Metric implementations vs brute-force oracles.
// --------------------------------------------------------------------------
void criterion_metric_oracles(Gate& gate) {
    const auto start = Clock::now();
    Rng rng(20260814);
    double worst = 0.0;
    bool pass = true;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.below(40));
        std::vector<double> actual(n), predicted(n);
        for (std::size_t i = 0; i < n; ++i) {
            actual[i] = rng.uniform(0.5, 400.0);
            predicted[i] = actual[i] * (1.0 + 0.1 * rng.normal());
        }
        // Brute-force MAPE with the same near-zero exclusion rule.
        double abs_sum = 0.0;
        std::size_t kept = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(actual[i]) <= 1e-9) continue;
            abs_sum += std::abs(actual[i] - predicted[i]) / std::abs(actual[i]);
            ++kept;
        }
        worst = std::max(worst, std::abs(mape(actual, predicted) -
                                         100.0 * abs_sum / static_cast<double>(kept)));

        // Brute-force R^2 (guard the constant-actual degenerate case).
        double mean = 0.0;
        for (double a : actual) mean += a;
        mean /= static_cast<double>(n);
        double ss_res = 0.0, ss_tot = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
            ss_tot += (actual[i] - mean) * (actual[i] - mean);
        }
        if (ss_tot > 0.0) {
            worst = std::max(worst, std::abs(r_squared(actual, predicted) -
                                             (1.0 - ss_res / ss_tot)));
        }

        // Brute-force t-interval half-width.
        double var = 0.0;
        for (double a : actual) var += (a - mean) * (a - mean);
        var /= static_cast<double>(n - 1);
        const double tstar = student_t_critical(static_cast<double>(n - 1), 0.95);
        const double want = tstar * std::sqrt(var / static_cast<double>(n));
        const ConfidenceInterval ci = confidence_interval(actual, 0.95);
        worst = std::max(worst, std::abs(ci.mean - mean));
        worst = std::max(worst, std::abs(ci.half_width - want));
    }
    if (!(worst < 1e-12)) pass = false;

    const double t4 = student_t_critical(4.0, 0.95);
    if (!(std::abs(t4 - 2.776) < 1e-3)) pass = false;

    const double elapsed = seconds_since(start);
    if (elapsed >= 5.0) pass = false;
    std::ostringstream detail;
    detail << "1000 trials, worst abs diff " << worst << ", t*(df=4) = " << fmt(t4, 4)
           << ", " << fmt(elapsed, 2) << "s";
    gate.record(8, "metrics match brute-force oracles", pass, detail.str());
}

// --------------------------------------------------------------------------
// 9. Determinism: repeated CV runs and a 4-way parallel run serialize to the
//    exact same bytes as the sweep's single-threaded report.
// --------------------------------------------------------------------------
void criterion_determinism(Gate& gate, const SweepResult& sweep) {
    const MaterialId id = MaterialId::AlSi10Mg;
    const TruthMap map = TruthMap::defaults_for(id);
    const auto samples = generate_samples(map, /*noise_std=*/0.02, /*seed=*/42);
    const ModelConfig config = ModelConfig::defaults_for(id);
    const std::string reference =
        io::report_to_json(sweep.reports.at(id).at(ArchitectureMode::ActivationBased))
            .dump(2);
    const std::string serial =
        io::report_to_json(run_cross_validation(
                               samples, id, ArchitectureMode::ActivationBased, config,
                               5, /*jobs=*/1))
            .dump(2);
    const std::string parallel =
        io::report_to_json(run_cross_validation(
                               samples, id, ArchitectureMode::ActivationBased, config,
                               5, /*jobs=*/4))
            .dump(2);
    const bool pass = serial == reference && parallel == reference;
    gate.record(9, "report JSON byte-identical across reruns and --jobs 4", pass,
                std::to_string(reference.size()) + " bytes, serial rerun " +
                    (serial == reference ? "match" : "MISMATCH") + ", jobs=4 " +
                    (parallel == reference ? "match" : "MISMATCH"));
}

// --------------------------------------------------------------------------
// 10. Fold plans: 20% training folds with balanced remainders.
// --------------------------------------------------------------------------
void criterion_fold_plans(Gate& gate) {
    auto sizes_for = [](std::size_t n, std::uint64_t seed) {
        std::vector<std::string> ids(n);
        for (std::size_t i = 0; i < n; ++i) ids[i] = "s" + std::to_string(i);
        const FoldPlan plan = make_folds(ids, 5, seed);
        std::vector<std::size_t> sizes(5, 0);
        for (int fold : plan.assignments) ++sizes[static_cast<std::size_t>(fold)];
        std::sort(sizes.begin(), sizes.end(), std::greater<>());
        return sizes;
    };
    bool pass = true;
    for (std::uint64_t seed : {0ULL, 1ULL, 42ULL}) {
        if (sizes_for(25, seed) != std::vector<std::size_t>{5, 5, 5, 5, 5}) pass = false;
        if (sizes_for(28, seed) != std::vector<std::size_t>{6, 6, 6, 5, 5}) pass = false;
        if (sizes_for(42, seed) != std::vector<std::size_t>{9, 9, 8, 8, 8}) pass = false;
    }
    gate.record(10, "fold plans are 20% training splits with balanced sizes", pass,
                "25 -> 5x5, 28 -> {6,6,6,5,5}, 42 -> {9,9,8,8,8} across seeds "
                "{0,1,42}");
}

}  // namespace

int main() {
    std::cout << "acceptance suite: 10 criteria\n" << std::flush;
    Gate gate;
    try {
        criterion_gradients(gate);
        criterion_nls_recovery(gate);
        criterion_constitutive_cv(gate);
        criterion_activation_learnability(gate);
        const SweepResult sweep = run_noisy_sweep();
        criterion_lambda(gate, sweep);
        criterion_ordering(gate, sweep);
        criterion_physics_floor(gate, sweep);
        criterion_metric_oracles(gate);
        criterion_determinism(gate, sweep);
        criterion_fold_plans(gate);
    } catch (const std::exception& e) {
        std::cerr << "acceptance suite aborted: " << e.what() << "\n";
        return 1;
    }
    if (gate.failures > 0) {
        std::cout << gate.failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all criteria passed\n";
    return 0;
}
