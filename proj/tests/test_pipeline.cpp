#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "piml/pipeline.hpp"
#include "piml/rng.hpp"
#include "piml/synthdata.hpp"

using namespace piml;

namespace {

std::vector<std::string> fake_ids(std::size_t n) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("s" + std::to_string(i));
    return ids;
}

std::multiset<std::size_t> fold_sizes(const FoldPlan& plan) {
    std::map<int, std::size_t> counts;
    for (const int f : plan.assignments) ++counts[f];
    std::multiset<std::size_t> sizes;
    for (const auto& [fold, count] : counts) sizes.insert(count);
    return sizes;
}

/// Small-network configuration so the training-path tests stay fast.
ModelConfig tiny_config(MaterialId id, int epochs, std::uint64_t seed) {
    ModelConfig config = ModelConfig::defaults_for(id);
    config.hidden_units = 4;
    config.epochs = epochs;
    config.seq_len_elastic = 2;
    config.seq_len_plastic = 4;
    config.seed = seed;
    return config;
}

std::vector<const Sample*> first_n(const std::vector<Sample>& samples, std::size_t n) {
    std::vector<const Sample*> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(&samples[i]);
    return out;
}

}  // namespace

TEST_CASE("make_folds balances, partitions, and is seed-deterministic") {
    SUBCASE("training-set sizes for the three dataset shapes") {
        CHECK(fold_sizes(make_folds(fake_ids(25), 5, 3)) ==
              std::multiset<std::size_t>{5, 5, 5, 5, 5});
        CHECK(fold_sizes(make_folds(fake_ids(28), 5, 3)) ==
              std::multiset<std::size_t>{5, 5, 6, 6, 6});
        CHECK(fold_sizes(make_folds(fake_ids(42), 5, 3)) ==
              std::multiset<std::size_t>{8, 8, 8, 9, 9});
    }
    SUBCASE("every sample lands in exactly one fold") {
        const FoldPlan plan = make_folds(fake_ids(28), 5, 11);
        REQUIRE(plan.assignments.size() == 28);
        std::size_t covered = 0;
        for (int f = 0; f < plan.k; ++f) {
            const auto train = fold_training_indices(plan, f);
            const auto test = fold_test_indices(plan, f);
            CHECK(train.size() + test.size() == 28);
            covered += train.size();
            for (const std::size_t i : train) CHECK(plan.assignments[i] == f);
            for (const std::size_t i : test) CHECK(plan.assignments[i] != f);
        }
        CHECK(covered == 28);
    }
    SUBCASE("seed determinism and sensitivity") {
        const auto a = make_folds(fake_ids(42), 5, 7);
        const auto b = make_folds(fake_ids(42), 5, 7);
        const auto c = make_folds(fake_ids(42), 5, 8);
        CHECK(a.assignments == b.assignments);
        CHECK(a.assignments != c.assignments);
    }
    SUBCASE("preconditions") {
        CHECK_THROWS_AS(make_folds(fake_ids(10), 1, 0), DataError);
        CHECK_THROWS_AS(make_folds(fake_ids(4), 5, 0), DataError);
    }
}

TEST_CASE("segment_curve boundary rules") {
    StressStrainCurve curve;
    for (int i = 1; i <= 10; ++i) {
        curve.strain.push_back(0.001 * i);
        curve.stress.push_back(10.0 * i);
    }
    SUBCASE("eps_py below the second point leaves one elastic point") {
        const SegmentedCurve seg = segment_curve(curve, 0.0015);
        CHECK(seg.boundary_index == 1);
        CHECK(seg.elastic.size() == 1);
        CHECK(seg.plastic.size() == 9);
    }
    SUBCASE("an exact grid hit goes to the plastic side") {
        const SegmentedCurve seg = segment_curve(curve, 0.005);
        CHECK(seg.boundary_index == 4);
        CHECK(seg.plastic.strain.front() == 0.005);
        CHECK(seg.elastic.strain.back() == 0.004);
    }
    SUBCASE("concatenation restores the original curve") {
        Rng rng(19);
        for (int trial = 0; trial < 50; ++trial) {
            const double eps =
                rng.uniform(std::nextafter(curve.strain.front(), 1.0),
                            curve.strain.back());
            const SegmentedCurve seg = segment_curve(curve, eps);
            StressStrainCurve merged = seg.elastic;
            merged.strain.insert(merged.strain.end(), seg.plastic.strain.begin(),
                                 seg.plastic.strain.end());
            merged.stress.insert(merged.stress.end(), seg.plastic.stress.begin(),
                                 seg.plastic.stress.end());
            CHECK(merged.strain == curve.strain);
            CHECK(merged.stress == curve.stress);
            CHECK(seg.elastic.size() >= 1);
            CHECK(seg.plastic.size() >= 1);
        }
    }
    SUBCASE("eps_py outside the open range is rejected") {
        CHECK_THROWS_AS(segment_curve(curve, 0.001), DataError);
        CHECK_THROWS_AS(segment_curve(curve, 0.010), DataError);
        CHECK_THROWS_AS(segment_curve(curve, 0.5), DataError);
    }
}

TEST_CASE("constitutive-baseline fold carries only the mean model and recovers truth") {
    const TruthMap map = TruthMap::constant(MaterialId::AlSi10Mg);
    const auto samples = generate_samples(map, 0.0, 1);
    const ModelConfig config = tiny_config(MaterialId::AlSi10Mg, 2, 3);
    const TrainedFold fold =
        train_fold(first_n(samples, 2), MaterialId::AlSi10Mg,
                   ArchitectureMode::ConstitutiveBaseline, config, 0);

    REQUIRE(fold.mean_params.has_value());
    CHECK_FALSE(fold.yield.has_value());
    CHECK_FALSE(fold.elastic.has_value());
    CHECK_FALSE(fold.plastic.has_value());
    CHECK_FALSE(fold.whole.has_value());
    CHECK_FALSE(fold.curve_ridge.has_value());

    // A constant generator makes the mean equal each sample's own fit, so the
    // prediction reproduces any sample's curve almost exactly.
    const auto& truth = *samples[0].truth_params;
    CHECK(fold.mean_params->E == doctest::Approx(truth.E).epsilon(1e-3));
    CHECK(fold.mean_params->eps_y == doctest::Approx(truth.eps_y).epsilon(1e-3));

    const auto detail =
        predict_sample_detail(fold, samples[5].params, samples[5].curve.strain);
    CHECK(detail.curve.strain == samples[5].curve.strain);
    const SampleMetrics m = compute_sample_metrics(samples[5], detail.curve, 0);
    CHECK(m.mape_whole < 0.5);
    REQUIRE(detail.predicted_yield.has_value());
    CHECK(detail.predicted_yield->eps_y == fold.mean_params->eps_y);
}

TEST_CASE("segmental-plain training populates both regions and learns") {
    const TruthMap map = TruthMap::defaults_for(MaterialId::Nylon);
    const auto samples = generate_samples(map, 0.0, 2);
    const ModelConfig config = tiny_config(MaterialId::Nylon, 3, 9);
    const TrainedFold fold =
        train_fold(first_n(samples, 4), MaterialId::Nylon,
                   ArchitectureMode::SegmentalPlain, config, 77);

    REQUIRE(fold.elastic.has_value());
    REQUIRE(fold.plastic.has_value());
    REQUIRE(fold.yield.has_value());
    CHECK_FALSE(fold.whole.has_value());
    CHECK_FALSE(fold.mean_params.has_value());

    for (const RegionModel* model : {&*fold.elastic, &*fold.plastic}) {
        CHECK(model->weights.size() == model->layout.total_params());
        const LossTrace& t = model->trace;
        CHECK(t.data.size() == 3);
        CHECK(t.physics.size() == 3);
        CHECK(t.aux.size() == 3);
        CHECK(t.total.size() == 3);
        CHECK(t.lambda.size() == 3);
        for (const double v : t.physics) CHECK(v == 0.0);
        for (const double v : t.lambda) CHECK(v == 1.0);
        CHECK(t.total.back() < t.total.front());
    }
    CHECK(fold.elastic->trace.region == "elastic");
    CHECK(fold.plastic->trace.region == "plastic");
    CHECK(fold.plastic->law == LawKind::Voce);
}

TEST_CASE("loss-based training starts its lambda trace at 1 and reduces the loss") {
    const TruthMap map = TruthMap::defaults_for(MaterialId::Nylon);
    const auto samples = generate_samples(map, 0.0, 2);
    const ModelConfig config = tiny_config(MaterialId::Nylon, 3, 10);
    const TrainedFold fold = train_fold(first_n(samples, 3), MaterialId::Nylon,
                                        ArchitectureMode::LossBased, config, 5);
    for (const RegionModel* model : {&*fold.elastic, &*fold.plastic}) {
        CHECK(model->trace.lambda.front() == 1.0);
        CHECK(model->trace.total.back() < model->trace.total.front());
        CHECK(std::isfinite(model->weights.back()));
        // The trailing parameter is the lambda; it moved off its init.
        CHECK(model->weights.size() == model->layout.total_params() + 1);
    }
}

TEST_CASE("non-segmental training uses a single whole-curve model") {
    const TruthMap map = TruthMap::defaults_for(MaterialId::AlSi10Mg);
    const auto samples = generate_samples(map, 0.0, 4);
    const ModelConfig config = tiny_config(MaterialId::AlSi10Mg, 2, 21);
    const TrainedFold fold = train_fold(first_n(samples, 3), MaterialId::AlSi10Mg,
                                        ArchitectureMode::NonSegmental, config, 1);
    REQUIRE(fold.whole.has_value());
    CHECK_FALSE(fold.elastic.has_value());
    CHECK_FALSE(fold.plastic.has_value());
    CHECK_FALSE(fold.yield.has_value());
    CHECK(fold.whole->trace.region == "whole");
    CHECK(fold.whole->trace.data.size() == 2);

    const auto detail =
        predict_sample_detail(fold, samples[10].params, samples[10].curve.strain);
    CHECK(detail.curve.stress.size() == samples[10].curve.size());
    CHECK_FALSE(detail.predicted_yield.has_value());
    CHECK(detail.curve.stress.front() == 0.0);
}

TEST_CASE("train_fold validates its inputs") {
    const TruthMap map = TruthMap::defaults_for(MaterialId::Nylon);
    const auto samples = generate_samples(map, 0.0, 2);
    const ModelConfig config = tiny_config(MaterialId::Nylon, 1, 0);
    CHECK_THROWS_AS(train_fold(first_n(samples, 1), MaterialId::Nylon,
                               ArchitectureMode::SegmentalPlain, config, 0),
                    DataError);

    // Curves whose elastic region has a single point produce no elastic
    // windows, which is a hard error for segmental training.
    std::vector<Sample> tiny(2);
    for (std::size_t i = 0; i < tiny.size(); ++i) {
        tiny[i].id = "tiny-" + std::to_string(i);
        tiny[i].material = MaterialId::Nylon;
        tiny[i].params.names = {"print_temperature_c", "print_speed_mm_s"};
        tiny[i].params.values = {230.0 + static_cast<double>(i), 20.0};
        tiny[i].curve.strain = {0.001, 0.002, 0.003, 0.004};
        tiny[i].curve.stress = {1.0, 1.5, 1.8, 2.0};
        tiny[i].truth_yield = YieldPoint{0.0015, 1.2};
    }
    CHECK_THROWS_WITH_AS(train_fold({&tiny[0], &tiny[1]}, MaterialId::Nylon,
                                    ArchitectureMode::SegmentalPlain, config, 0),
                         doctest::Contains("elastic"), DataError);
}

TEST_CASE("predict_sample grid passthrough, anchors, and yield fallback") {
    const TruthMap map = TruthMap::defaults_for(MaterialId::Nylon);
    const auto samples = generate_samples(map, 0.0, 6);
    const ModelConfig config = tiny_config(MaterialId::Nylon, 2, 13);
    const TrainedFold fold = train_fold(first_n(samples, 3), MaterialId::Nylon,
                                        ArchitectureMode::SegmentalPlain, config, 2);

    SUBCASE("output strain grid is the requested grid, bit for bit") {
        const auto& grid = samples[7].curve.strain;
        const StressStrainCurve curve = predict_sample(
            fold, MaterialId::Nylon, ArchitectureMode::SegmentalPlain,
            samples[7].params, grid);
        CHECK(curve.strain == grid);
        CHECK(curve.stress.size() == grid.size());
        for (const double s : curve.stress) CHECK(std::isfinite(s));
        CHECK(curve.stress.front() == 0.0);  // elastic anchor
    }
    SUBCASE("plain plastic anchor equals the predicted yield stress") {
        const auto detail =
            predict_sample_detail(fold, samples[7].params, samples[7].curve.strain);
        REQUIRE(detail.predicted_yield.has_value());
        const auto& grid = samples[7].curve.strain;
        const auto split = std::lower_bound(grid.begin(), grid.end(),
                                            detail.predicted_yield->eps_y);
        REQUIRE(split != grid.begin());
        REQUIRE(split != grid.end());
        const std::size_t boundary = static_cast<std::size_t>(split - grid.begin());
        CHECK(detail.curve.stress[boundary] == detail.predicted_yield->sigma_y);
        CHECK_FALSE(detail.min_physics_margin_mpa.has_value());
    }
    SUBCASE("a yield prediction outside the grid falls back to the elastic model") {
        std::vector<double> shallow_grid;
        for (int i = 1; i <= 12; ++i) shallow_grid.push_back(1e-4 * i);
        const auto detail =
            predict_sample_detail(fold, samples[7].params, shallow_grid);
        CHECK(detail.curve.stress.size() == shallow_grid.size());
        for (const double s : detail.curve.stress) CHECK(std::isfinite(s));
        REQUIRE(detail.predicted_yield.has_value());
        CHECK(detail.predicted_yield->eps_y > shallow_grid.back());
    }
    SUBCASE("material/mode mismatches are rejected") {
        CHECK_THROWS_AS(predict_sample(fold, MaterialId::CfAbs,
                                       ArchitectureMode::SegmentalPlain,
                                       samples[7].params, samples[7].curve.strain),
                        DataError);
        CHECK_THROWS_AS(predict_sample(fold, MaterialId::Nylon,
                                       ArchitectureMode::LossBased, samples[7].params,
                                       samples[7].curve.strain),
                        DataError);
    }
}

TEST_CASE("activation predictions sit above the predicted yield with a recorded margin") {
    const TruthMap map = TruthMap::defaults_for(MaterialId::Nylon);
    const auto samples = generate_samples(map, 0.0, 6);
    const ModelConfig config = tiny_config(MaterialId::Nylon, 2, 29);
    const TrainedFold fold = train_fold(first_n(samples, 3), MaterialId::Nylon,
                                        ArchitectureMode::ActivationBased, config, 3);
    const auto detail =
        predict_sample_detail(fold, samples[9].params, samples[9].curve.strain);
    REQUIRE(detail.predicted_yield.has_value());
    REQUIRE(detail.min_physics_margin_mpa.has_value());
    CHECK(*detail.min_physics_margin_mpa >= 0.0);

    const auto& grid = samples[9].curve.strain;
    const auto split = std::lower_bound(grid.begin(), grid.end(),
                                        detail.predicted_yield->eps_y);
    REQUIRE(split != grid.end());
    const std::size_t boundary = static_cast<std::size_t>(split - grid.begin());
    // Every plastic point, including the anchored first one, clears sigma_py.
    for (std::size_t i = boundary; i < detail.curve.stress.size(); ++i) {
        CHECK(detail.curve.stress[i] > detail.predicted_yield->sigma_y);
    }
    CHECK(detail.curve.stress.front() == 0.0);
}

TEST_CASE("compute_sample_metrics on a perfect prediction") {
    const TruthMap map = TruthMap::defaults_for(MaterialId::Ti6Al4V);
    const auto samples = generate_samples(map, 0.0, 3);
    const SampleMetrics m = compute_sample_metrics(samples[2], samples[2].curve, 4);
    CHECK(m.sample_id == samples[2].id);
    CHECK(m.fold == 4);
    CHECK(m.mape_whole == 0.0);
    CHECK(m.mape_elastic == 0.0);
    CHECK(m.mape_plastic == 0.0);
    CHECK(m.r2 == 1.0);
    CHECK(m.youngs_modulus_error_pct == 0.0);
    CHECK(m.uts_error_pct == 0.0);
}

TEST_CASE("constitutive cross-validation is generator-consistent and bookkeeps rows") {
    const TruthMap map = TruthMap::constant(MaterialId::AlSi10Mg);
    const auto samples = generate_samples(map, 0.0, 5);
    ModelConfig config = ModelConfig::defaults_for(MaterialId::AlSi10Mg);
    config.seed = 11;
    const ExperimentReport report =
        run_cross_validation(samples, MaterialId::AlSi10Mg,
                             ArchitectureMode::ConstitutiveBaseline, config);

    REQUIRE(report.per_fold.size() == 5);
    std::size_t rows = 0;
    for (const FoldResult& fold : report.per_fold) {
        CHECK(fold.loss_traces.empty());
        CHECK_FALSE(fold.lambda_avg.has_value());
        CHECK(fold.samples.size() == fold.predictions.size());
        rows += fold.samples.size();
    }
    // 28 samples in training folds of {6,6,6,5,5} leave 22..23 test rows each.
    CHECK(rows == 5 * 28 - 28);
    CHECK(report.aggregates.at("mape_whole").n == rows);
    CHECK(report.aggregates.at("mape_whole").mean < 1.0);
    CHECK(report.aggregates.at("r2").mean > 0.99);
}

TEST_CASE("cross-validation is deterministic and job-count independent") {
    const TruthMap map = TruthMap::defaults_for(MaterialId::AlSi10Mg);
    const auto samples = generate_samples(map, 0.02, 42);
    const ModelConfig config = tiny_config(MaterialId::AlSi10Mg, 2, 42);
    const auto serial_a =
        run_cross_validation(samples, MaterialId::AlSi10Mg,
                             ArchitectureMode::SegmentalPlain, config, 5, 1);
    const auto serial_b =
        run_cross_validation(samples, MaterialId::AlSi10Mg,
                             ArchitectureMode::SegmentalPlain, config, 5, 1);
    const auto threaded =
        run_cross_validation(samples, MaterialId::AlSi10Mg,
                             ArchitectureMode::SegmentalPlain, config, 5, 3);
    CHECK(serial_a == serial_b);
    CHECK(serial_a == threaded);
}

TEST_CASE("training state is a function of the training fold only") {
    const TruthMap map = TruthMap::defaults_for(MaterialId::AlSi10Mg);
    auto baseline = generate_samples(map, 0.0, 8);
    auto mutated = baseline;
    for (double& s : mutated[0].curve.stress) s *= 1.3;

    const ModelConfig config = tiny_config(MaterialId::AlSi10Mg, 2, 7);
    std::vector<std::string> ids;
    for (const auto& s : baseline) ids.push_back(s.id);
    const FoldPlan plan = make_folds(ids, 5, config.seed);
    const int mutated_fold = plan.assignments[0];

    const auto ra = run_cross_validation(baseline, MaterialId::AlSi10Mg,
                                         ArchitectureMode::SegmentalPlain, config);
    const auto rb = run_cross_validation(mutated, MaterialId::AlSi10Mg,
                                         ArchitectureMode::SegmentalPlain, config);
    for (int f = 0; f < 5; ++f) {
        const auto& fa = ra.per_fold[static_cast<std::size_t>(f)];
        const auto& fb = rb.per_fold[static_cast<std::size_t>(f)];
        if (f == mutated_fold) {
            // The mutated sample trains this fold, so its state must change.
            CHECK_FALSE(fa.loss_traces == fb.loss_traces);
        } else {
            // The mutated sample is only ever *tested* here: bit-identical
            // training state, and identical predictions for everyone else.
            CHECK(fa.loss_traces == fb.loss_traces);
            REQUIRE(fa.predictions.size() == fb.predictions.size());
            for (std::size_t i = 0; i < fa.predictions.size(); ++i) {
                if (fa.predictions[i].sample_id == baseline[0].id) continue;
                CHECK(fa.predictions[i] == fb.predictions[i]);
            }
        }
    }
}

TEST_CASE("loss-based cross-validation records per-fold lambda averages") {
    const TruthMap map = TruthMap::defaults_for(MaterialId::AlSi10Mg);
    const auto samples = generate_samples(map, 0.0, 15);
    const ModelConfig config = tiny_config(MaterialId::AlSi10Mg, 2, 19);
    const auto report = run_cross_validation(samples, MaterialId::AlSi10Mg,
                                             ArchitectureMode::LossBased, config);
    for (const FoldResult& fold : report.per_fold) {
        REQUIRE(fold.lambda_avg.has_value());
        CHECK(std::isfinite(*fold.lambda_avg));
        REQUIRE(fold.loss_traces.size() == 2);
        for (const LossTrace& trace : fold.loss_traces) {
            CHECK(trace.lambda.front() == 1.0);
            CHECK(trace.data.size() == 2);
        }
        for (const SamplePrediction& p : fold.predictions) {
            CHECK(p.predicted_yield.has_value());
        }
    }
}
