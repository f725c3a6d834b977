#include "piml/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "piml/constitutive.hpp"
#include "piml/io.hpp"
#include "piml/pipeline.hpp"
#include "piml/rng.hpp"
#include "piml/synthdata.hpp"

namespace piml {

namespace {

namespace fs = std::filesystem;

/// PIML_OUT_DIR overrides where outputs land when no explicit path is given.
fs::path default_output_dir() {
    if (const char* env = std::getenv("PIML_OUT_DIR"); env != nullptr && *env != '\0') {
        return fs::path(env);
    }
    return fs::path(".");
}

/// Every subcommand prints the fully resolved configuration it ran with, so
/// a run is reproducible from its own output.
class ConfigEcho {
public:
    explicit ConfigEcho(std::string subcommand) {
        add("subcommand", std::move(subcommand));
    }
    void add(const std::string& key, const std::string& value) {
        lines_.push_back("  " + key + " = " + value);
    }
    void add(const std::string& key, const char* value) { add(key, std::string(value)); }
    void add(const std::string& key, double value) { add(key, io::format_double(value)); }
    void add(const std::string& key, int value) { add(key, std::to_string(value)); }
    void add(const std::string& key, std::uint64_t value) { add(key, std::to_string(value)); }
    void print() const {
        std::cout << "config:\n";
        for (const std::string& line : lines_) std::cout << line << "\n";
    }

private:
    std::vector<std::string> lines_;
};

/// The ModelConfig knobs shared by `train` and `cv`. Defaults are resolved
/// per material after the manifest is read, so only flags the user actually
/// set override them.
struct ConfigFlags {
    int hidden_units = 0;
    double learning_rate = 0.0;
    int batch_size = 0;
    int epochs = 0;
    int seq_len_elastic = 0;
    int seq_len_plastic = 0;
    double alpha_aux = 0.0;
    int ridge_degree = 0;
    double ridge_penalty = 0.0;
    std::uint64_t seed = 0;

    CLI::Option* o_hidden = nullptr;
    CLI::Option* o_lr = nullptr;
    CLI::Option* o_batch = nullptr;
    CLI::Option* o_epochs = nullptr;
    CLI::Option* o_seq_e = nullptr;
    CLI::Option* o_seq_p = nullptr;
    CLI::Option* o_alpha = nullptr;
    CLI::Option* o_rdeg = nullptr;
    CLI::Option* o_rpen = nullptr;
    CLI::Option* o_seed = nullptr;

    void attach(CLI::App* cmd) {
        o_hidden = cmd->add_option("--hidden", hidden_units, "LSTM hidden units");
        o_lr = cmd->add_option("--lr", learning_rate, "Adam learning rate");
        o_batch = cmd->add_option("--batch", batch_size, "windows per optimizer step");
        o_epochs = cmd->add_option("--epochs", epochs, "training epochs");
        o_seq_e = cmd->add_option("--seq-elastic", seq_len_elastic,
                                  "elastic-region window length");
        o_seq_p = cmd->add_option("--seq-plastic", seq_len_plastic,
                                  "plastic-region window length");
        o_alpha = cmd->add_option("--alpha", alpha_aux,
                                  "auxiliary loss weight on (lambda-1)^2");
        o_rdeg = cmd->add_option("--ridge-degree", ridge_degree,
                                 "yield-model polynomial degree");
        o_rpen = cmd->add_option("--ridge-penalty", ridge_penalty,
                                 "yield-model ridge penalty");
        o_seed = cmd->add_option("--seed", seed, "master RNG seed");
    }

    ModelConfig resolve(MaterialId material) const {
        ModelConfig config = ModelConfig::defaults_for(material);
        if (o_hidden->count() > 0) config.hidden_units = hidden_units;
        if (o_lr->count() > 0) config.learning_rate = learning_rate;
        if (o_batch->count() > 0) config.batch_size = batch_size;
        if (o_epochs->count() > 0) config.epochs = epochs;
        if (o_seq_e->count() > 0) config.seq_len_elastic = seq_len_elastic;
        if (o_seq_p->count() > 0) config.seq_len_plastic = seq_len_plastic;
        if (o_alpha->count() > 0) config.alpha_aux = alpha_aux;
        if (o_rdeg->count() > 0) config.ridge_degree = ridge_degree;
        if (o_rpen->count() > 0) config.ridge_penalty = ridge_penalty;
        if (o_seed->count() > 0) config.seed = seed;
        return config;
    }
};

void echo_model_config(ConfigEcho& echo, const ModelConfig& config) {
    echo.add("hidden_units", config.hidden_units);
    echo.add("learning_rate", config.learning_rate);
    echo.add("batch_size", config.batch_size);
    echo.add("epochs", config.epochs);
    echo.add("seq_len_elastic", config.seq_len_elastic);
    echo.add("seq_len_plastic", config.seq_len_plastic);
    echo.add("alpha_aux", config.alpha_aux);
    echo.add("ridge_degree", config.ridge_degree);
    echo.add("ridge_penalty", config.ridge_penalty);
    echo.add("seed", config.seed);
}

std::string fixed4(double v) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(4);
    out << v;
    return out.str();
}

void render_report_text(const ExperimentReport& report) {
    std::cout << "run: ";
    if (report.config.is_object()) {
        bool first = true;
        for (const auto& [key, value] : report.config.items()) {
            if (!first) std::cout << ", ";
            first = false;
            std::cout << key << "="
                      << (value.is_string() ? value.get<std::string>() : value.dump());
        }
    }
    std::cout << "\n\n";
    std::cout << "metric                          mean        std    ci95+/-      n\n";
    for (const auto& [name, agg] : report.aggregates) {
        std::cout << name;
        for (std::size_t i = name.size(); i < 28; ++i) std::cout << ' ';
        std::cout << std::setw(10) << fixed4(agg.mean) << " " << std::setw(10)
                  << fixed4(agg.stddev) << " " << std::setw(10)
                  << fixed4(agg.half_width) << " " << std::setw(6) << agg.n << "\n";
    }
    bool any_lambda = false;
    for (const FoldResult& fold : report.per_fold) {
        if (fold.lambda_avg) any_lambda = true;
    }
    if (any_lambda) {
        std::cout << "\nper-fold average lambda_physics:\n";
        for (const FoldResult& fold : report.per_fold) {
            if (fold.lambda_avg) {
                std::cout << "  fold " << fold.fold << ": " << fixed4(*fold.lambda_avg)
                          << "\n";
            }
        }
    }
}

void write_report_curves(const ExperimentReport& report, const fs::path& dir) {
    std::size_t written = 0;
    for (const FoldResult& fold : report.per_fold) {
        for (const SamplePrediction& prediction : fold.predictions) {
            const fs::path path =
                dir / (prediction.sample_id + "_fold" + std::to_string(fold.fold) +
                       ".csv");
            io::write_prediction_csv(path, prediction);
            ++written;
        }
    }
    std::cout << "wrote " << written << " prediction CSV(s) to " << dir.string()
              << "\n";
}

// ---------------------------------------------------------------------------
// Subcommand bodies (invoked from inside CLI11 parse; errors propagate as
// DataError / NumericError and are mapped to exit codes by dispatch).
// ---------------------------------------------------------------------------

int run_synth(const std::string& material_name_arg, const fs::path& out_dir,
              std::uint64_t seed, double noise, bool constant) {
    const MaterialId material = material_from_name(material_name_arg);
    const TruthMap map =
        constant ? TruthMap::constant(material) : TruthMap::defaults_for(material);
    ConfigEcho echo("synth");
    echo.add("material", material_name(material));
    echo.add("out", out_dir.string());
    echo.add("seed", seed);
    echo.add("noise", noise);
    echo.add("constant", constant ? "true" : "false");
    echo.print();
    const fs::path manifest = generate_dataset(map, noise, seed, out_dir);
    std::cout << "wrote " << manifest.string() << " (" << doe_table(material).size()
              << " samples)\n";
    return 0;
}

int run_fit_constitutive(const fs::path& curve_path, const std::string& material_arg,
                         const fs::path& out_path, bool have_out) {
    const MaterialId material = material_from_name(material_arg);
    ConfigEcho echo("fit-constitutive");
    echo.add("curve", curve_path.string());
    echo.add("material", material_name(material));
    if (have_out) echo.add("out", out_path.string());
    echo.print();

    const StressStrainCurve curve = io::read_curve_csv(curve_path);
    const FitResult fit = fit_constitutive_params(curve, material_class(material));
    std::cout << "fit: " << io::constitutive_to_json(fit.params).dump() << "\n";
    std::cout << "residual_rms_mpa = " << io::format_double(fit.residual_rms)
              << ", iterations = " << fit.iterations
              << ", converged = " << (fit.converged ? "true" : "false") << "\n";
    if (!fit.converged) {
        std::cerr << "[warn] fit did not converge; parameters are the best found\n";
    }
    if (have_out) {
        nlohmann::ordered_json j = io::constitutive_to_json(fit.params);
        j["residual_rms_mpa"] = fit.residual_rms;
        j["converged"] = fit.converged;
        std::ofstream out(out_path);
        if (!out) throw DataError(out_path.string() + ": cannot open for writing");
        out << j.dump(2) << "\n";
        std::cout << "wrote " << out_path.string() << "\n";
    }
    return 0;
}

int run_train(const fs::path& data, const std::string& mode_arg,
              const ConfigFlags& flags, const fs::path& out_path) {
    const ArchitectureMode mode = mode_from_name(mode_arg);
    MaterialId material = MaterialId::Nylon;
    const std::vector<Sample> samples = io::load_samples(data, &material);
    const ModelConfig config = flags.resolve(material);

    ConfigEcho echo("train");
    echo.add("data", data.string());
    echo.add("material", material_name(material));
    echo.add("mode", mode_name(mode));
    echo.add("out", out_path.string());
    echo_model_config(echo, config);
    echo.print();

    std::vector<const Sample*> train;
    train.reserve(samples.size());
    for (const Sample& s : samples) train.push_back(&s);
    const TrainedFold fold =
        train_fold(train, material, mode, config, derive_seed(config.seed, 0));
    io::write_model(out_path, fold);
    std::cout << "wrote " << out_path.string() << "\n";
    return 0;
}

int run_predict(const fs::path& model_path, const fs::path& data,
                const std::vector<std::string>& ids, const fs::path& out_dir) {
    const TrainedFold fold = io::read_model(model_path);
    MaterialId material = MaterialId::Nylon;
    const std::vector<Sample> samples = io::load_samples(data, &material);
    if (material != fold.material) {
        throw DataError("predict: model was trained on " +
                        std::string(material_name(fold.material)) +
                        " but the manifest holds " + material_name(material));
    }

    ConfigEcho echo("predict");
    echo.add("model", model_path.string());
    echo.add("data", data.string());
    echo.add("out_dir", out_dir.string());
    echo.add("mode", mode_name(fold.mode));
    echo.print();

    std::size_t matched = 0;
    for (const Sample& sample : samples) {
        if (!ids.empty() &&
            std::find(ids.begin(), ids.end(), sample.id) == ids.end()) {
            continue;
        }
        ++matched;
        const PredictionDetail detail =
            predict_sample_detail(fold, sample.params, sample.curve.strain);
        SamplePrediction prediction;
        prediction.sample_id = sample.id;
        prediction.strain = sample.curve.strain;
        prediction.actual_mpa = sample.curve.stress;
        prediction.predicted_mpa = detail.curve.stress;
        prediction.predicted_yield = detail.predicted_yield;
        prediction.physics_margin_mpa = detail.min_physics_margin_mpa;
        io::write_prediction_csv(out_dir / (sample.id + ".csv"), prediction);
        const SampleMetrics metrics = compute_sample_metrics(sample, detail.curve, 0);
        std::cout << sample.id << ": mape_whole = " << fixed4(metrics.mape_whole)
                  << "%, r2 = " << fixed4(metrics.r2) << "\n";
    }
    if (matched == 0) throw DataError("predict: no manifest samples matched --ids");
    std::cout << "wrote " << matched << " prediction CSV(s) to " << out_dir.string()
              << "\n";
    return 0;
}

int run_cv(const fs::path& data, const std::string& mode_arg, const ConfigFlags& flags,
           int folds, int jobs, const fs::path& report_path,
           const fs::path& curves_dir, bool have_curves_dir) {
    const ArchitectureMode mode = mode_from_name(mode_arg);
    MaterialId material = MaterialId::Nylon;
    const std::vector<Sample> samples = io::load_samples(data, &material);
    const ModelConfig config = flags.resolve(material);

    ConfigEcho echo("cv");
    echo.add("data", data.string());
    echo.add("material", material_name(material));
    echo.add("mode", mode_name(mode));
    echo.add("folds", folds);
    echo.add("jobs", jobs);
    echo.add("report", report_path.string());
    if (have_curves_dir) echo.add("curves_dir", curves_dir.string());
    echo_model_config(echo, config);
    echo.print();

    const ExperimentReport report =
        run_cross_validation(samples, material, mode, config, folds, jobs);
    io::write_report(report_path, report);
    std::cout << "wrote " << report_path.string() << "\n\n";
    render_report_text(report);
    if (have_curves_dir) write_report_curves(report, curves_dir);
    return 0;
}

int run_gradcheck(std::uint64_t seed) {
    ConfigEcho echo("gradcheck");
    echo.add("seed", seed);
    echo.print();
    const auto checks = run_gradient_checks(seed);
    bool all_ok = true;
    for (const ObjectiveCheck& check : checks) {
        std::cout << check.name;
        for (std::size_t i = check.name.size(); i < 28; ++i) std::cout << ' ';
        std::ostringstream value;
        value << std::scientific;
        value.precision(3);
        value << check.max_rel_error;
        std::cout << value.str()
                  << (check.max_rel_error < 1e-4 ? "  ok" : "  FAIL") << "\n";
        if (!(check.max_rel_error < 1e-4)) all_ok = false;
    }
    if (!all_ok) {
        std::cerr << "error: gradient check exceeded the 1e-4 tolerance\n";
        return 3;
    }
    return 0;
}

int run_report(const fs::path& report_path, const fs::path& curves_dir,
               bool have_curves_dir) {
    const ExperimentReport report = io::read_report(report_path);
    render_report_text(report);
    if (have_curves_dir) write_report_curves(report, curves_dir);
    return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"stress-strain curve prediction for additively manufactured "
                 "polymers and metals"};
    app.name("piml");
    app.require_subcommand(1);
    int rc = 0;

    // --- synth ---------------------------------------------------------
    auto* synth = app.add_subcommand(
        "synth", "Generate a synthetic dataset (manifest + curve CSVs)");
    std::string synth_material;
    fs::path synth_out = default_output_dir();
    std::uint64_t synth_seed = 0;
    double synth_noise = 0.0;
    bool synth_constant = false;
    synth->add_option("--material", synth_material,
                      "nylon | cf-abs | alsi10mg | ti6al4v")
        ->required();
    synth->add_option("--out", synth_out, "output directory");
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--noise", synth_noise,
                      "multiplicative noise standard deviation");
    synth->add_flag("--constant", synth_constant,
                    "remove all process-parameter sensitivity");
    synth->callback([&] {
        rc = run_synth(synth_material, synth_out, synth_seed, synth_noise,
                       synth_constant);
    });

    // --- fit-constitutive ----------------------------------------------
    auto* fitc = app.add_subcommand(
        "fit-constitutive", "Fit the two-regime hardening model to one curve CSV");
    fs::path fitc_curve;
    std::string fitc_material;
    fs::path fitc_out;
    fitc->add_option("--curve", fitc_curve, "curve CSV path")->required();
    fitc->add_option("--material", fitc_material,
                     "nylon | cf-abs | alsi10mg | ti6al4v")
        ->required();
    auto* fitc_out_opt = fitc->add_option("--out", fitc_out, "parameter JSON path");
    fitc->callback([&] {
        rc = run_fit_constitutive(fitc_curve, fitc_material, fitc_out,
                                  fitc_out_opt->count() > 0);
    });

    // --- train -----------------------------------------------------------
    auto* train = app.add_subcommand(
        "train", "Train one model on every sample of a manifest");
    fs::path train_data;
    std::string train_mode;
    fs::path train_out = default_output_dir() / "model.json";
    ConfigFlags train_flags;
    train->add_option("--data", train_data, "dataset manifest JSON")->required();
    train
        ->add_option("--mode", train_mode,
                     "non-segmental | segmental | loss-piml | activation-piml | "
                     "constitutive | ridge")
        ->required();
    train->add_option("--out", train_out, "model JSON path");
    train_flags.attach(train);
    train->callback([&] { rc = run_train(train_data, train_mode, train_flags, train_out); });

    // --- predict ---------------------------------------------------------
    auto* predict = app.add_subcommand(
        "predict", "Predict manifest samples with a trained model");
    fs::path predict_model;
    fs::path predict_data;
    fs::path predict_out = default_output_dir() / "predictions";
    std::vector<std::string> predict_ids;
    predict->add_option("--model", predict_model, "model JSON from `train`")
        ->required();
    predict->add_option("--data", predict_data, "dataset manifest JSON")->required();
    predict->add_option("--out-dir", predict_out, "prediction CSV directory");
    predict->add_option("--ids", predict_ids,
                        "comma-separated sample ids (default: all)")
        ->delimiter(',');
    predict->callback(
        [&] { rc = run_predict(predict_model, predict_data, predict_ids, predict_out); });

    // --- cv --------------------------------------------------------------
    auto* cv = app.add_subcommand(
        "cv", "k-fold cross-validation (train on each fold, test on the rest)");
    fs::path cv_data;
    std::string cv_mode;
    int cv_folds = 5;
    int cv_jobs = 1;
    fs::path cv_report = default_output_dir() / "report.json";
    fs::path cv_curves_dir;
    ConfigFlags cv_flags;
    cv->add_option("--data", cv_data, "dataset manifest JSON")->required();
    cv->add_option("--mode", cv_mode,
                   "non-segmental | segmental | loss-piml | activation-piml | "
                   "constitutive | ridge")
        ->required();
    cv->add_option("--folds", cv_folds, "number of folds");
    cv->add_option("--jobs", cv_jobs, "folds trained concurrently");
    cv->add_option("--report", cv_report, "report JSON path");
    auto* cv_curves_opt = cv->add_option("--curves-dir", cv_curves_dir,
                                         "also write per-sample prediction CSVs");
    cv_flags.attach(cv);
    cv->callback([&] {
        rc = run_cv(cv_data, cv_mode, cv_flags, cv_folds, cv_jobs, cv_report,
                    cv_curves_dir, cv_curves_opt->count() > 0);
    });

    // --- gradcheck ---------------------------------------------------------
    auto* gradcheck = app.add_subcommand(
        "gradcheck", "Finite-difference check of every training objective");
    std::uint64_t gradcheck_seed = 1;
    gradcheck->add_option("--seed", gradcheck_seed, "randomization seed");
    gradcheck->callback([&] { rc = run_gradcheck(gradcheck_seed); });

    // --- report ------------------------------------------------------------
    auto* report = app.add_subcommand(
        "report", "Render a report JSON as text (and optionally prediction CSVs)");
    fs::path report_path;
    fs::path report_curves_dir;
    report->add_option("--report", report_path, "report JSON path")->required();
    auto* report_curves_opt = report->add_option(
        "--curves-dir", report_curves_dir, "also write per-sample prediction CSVs");
    report->callback([&] {
        rc = run_report(report_path, report_curves_dir, report_curves_opt->count() > 0);
    });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}

}  // namespace piml
