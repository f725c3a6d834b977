#include "piml/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace piml::io {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
    throw DataError(path.string() + ": " + what);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(path, "cannot open for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) fail(path, "write failed");
}

double parse_double_field(const std::filesystem::path& path, std::size_t line_no,
                          std::string_view field) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        fail(path, "line " + std::to_string(line_no) + ": malformed number '" +
                       std::string(field) + "'");
    }
    return value;
}

ordered_json yield_to_json(const YieldPoint& y) {
    return ordered_json{{"eps_y", y.eps_y}, {"sigma_y_mpa", y.sigma_y}};
}

YieldPoint yield_from_json(const ordered_json& j) {
    return YieldPoint{j.at("eps_y").get<double>(), j.at("sigma_y_mpa").get<double>()};
}

}  // namespace

nlohmann::ordered_json constitutive_to_json(const ConstitutiveParams& p) {
    ordered_json j{{"e_mpa", p.E}, {"eps_y", p.eps_y}, {"sigma_y_mpa", p.sigma_y}};
    if (const auto* voce = std::get_if<VocePlastic>(&p.plastic)) {
        j["law"] = "voce";
        j["a_mpa"] = voce->a;
        j["b"] = voce->b;
    } else {
        const auto& holl = std::get<HollomonPlastic>(p.plastic);
        j["law"] = "hollomon";
        j["k_mpa"] = holl.K;
        j["n"] = holl.n;
    }
    return j;
}

ConstitutiveParams constitutive_from_json(const nlohmann::ordered_json& j) {
    ConstitutiveParams p;
    p.E = j.at("e_mpa").get<double>();
    p.eps_y = j.at("eps_y").get<double>();
    p.sigma_y = j.at("sigma_y_mpa").get<double>();
    const auto law = j.at("law").get<std::string>();
    if (law == "voce") {
        p.plastic = VocePlastic{j.at("a_mpa").get<double>(), j.at("b").get<double>()};
    } else if (law == "hollomon") {
        p.plastic = HollomonPlastic{j.at("k_mpa").get<double>(), j.at("n").get<double>()};
    } else {
        throw DataError("unknown plastic law '" + law + "'");
    }
    return p;
}

namespace {

ordered_json metrics_to_json(const SampleMetrics& m) {
    return ordered_json{{"sample_id", m.sample_id},
                        {"fold", m.fold},
                        {"mape_whole", m.mape_whole},
                        {"mape_elastic", m.mape_elastic},
                        {"mape_plastic", m.mape_plastic},
                        {"r2", m.r2},
                        {"youngs_modulus_error_pct", m.youngs_modulus_error_pct},
                        {"uts_error_pct", m.uts_error_pct}};
}

SampleMetrics metrics_from_json(const ordered_json& j) {
    SampleMetrics m;
    m.sample_id = j.at("sample_id").get<std::string>();
    m.fold = j.at("fold").get<int>();
    m.mape_whole = j.at("mape_whole").get<double>();
    m.mape_elastic = j.at("mape_elastic").get<double>();
    m.mape_plastic = j.at("mape_plastic").get<double>();
    m.r2 = j.at("r2").get<double>();
    m.youngs_modulus_error_pct = j.at("youngs_modulus_error_pct").get<double>();
    m.uts_error_pct = j.at("uts_error_pct").get<double>();
    return m;
}

ordered_json trace_to_json(const LossTrace& t) {
    return ordered_json{{"region", t.region}, {"data", t.data},
                        {"physics", t.physics}, {"aux", t.aux},
                        {"total", t.total},    {"lambda", t.lambda}};
}

LossTrace trace_from_json(const ordered_json& j) {
    LossTrace t;
    t.region = j.at("region").get<std::string>();
    t.data = j.at("data").get<std::vector<double>>();
    t.physics = j.at("physics").get<std::vector<double>>();
    t.aux = j.at("aux").get<std::vector<double>>();
    t.total = j.at("total").get<std::vector<double>>();
    t.lambda = j.at("lambda").get<std::vector<double>>();
    return t;
}

ordered_json prediction_to_json(const SamplePrediction& p) {
    ordered_json j{{"sample_id", p.sample_id},
                   {"strain", p.strain},
                   {"actual_mpa", p.actual_mpa},
                   {"predicted_mpa", p.predicted_mpa}};
    if (p.predicted_yield) j["predicted_yield"] = yield_to_json(*p.predicted_yield);
    if (p.physics_margin_mpa) j["physics_margin_mpa"] = *p.physics_margin_mpa;
    return j;
}

SamplePrediction prediction_from_json(const ordered_json& j) {
    SamplePrediction p;
    p.sample_id = j.at("sample_id").get<std::string>();
    p.strain = j.at("strain").get<std::vector<double>>();
    p.actual_mpa = j.at("actual_mpa").get<std::vector<double>>();
    p.predicted_mpa = j.at("predicted_mpa").get<std::vector<double>>();
    if (j.contains("predicted_yield")) p.predicted_yield = yield_from_json(j.at("predicted_yield"));
    if (j.contains("physics_margin_mpa")) p.physics_margin_mpa = j.at("physics_margin_mpa").get<double>();
    return p;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;  // a 64-byte buffer always suffices for double
    return std::string(buf, ptr);
}

void write_curve_csv(const std::filesystem::path& path, const StressStrainCurve& curve) {
    if (curve.strain.size() != curve.stress.size()) {
        fail(path, "refusing to write curve with mismatched strain/stress lengths");
    }
    std::string text = "strain,stress_mpa\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
        text += format_double(curve.strain[i]);
        text += ',';
        text += format_double(curve.stress[i]);
        text += '\n';
    }
    write_text_file(path, text);
}

StressStrainCurve read_curve_csv(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    StressStrainCurve curve;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string_view line(text.data() + pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = eol + 1;
        ++line_no;
        if (line_no == 1) {
            if (line != "strain,stress_mpa") {
                fail(path, "expected header 'strain,stress_mpa', got '" + std::string(line) + "'");
            }
            continue;
        }
        if (line.empty()) continue;  // tolerate a trailing blank line
        const std::size_t comma = line.find(',');
        if (comma == std::string_view::npos) {
            fail(path, "line " + std::to_string(line_no) + ": expected 'strain,stress'");
        }
        curve.strain.push_back(parse_double_field(path, line_no, line.substr(0, comma)));
        curve.stress.push_back(parse_double_field(path, line_no, line.substr(comma + 1)));
    }
    if (line_no == 0) fail(path, "empty file");
    return curve;
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
    ordered_json j;
    j["material"] = material_name(manifest.material);
    if (!manifest.generator.is_null()) j["generator"] = manifest.generator;
    ordered_json samples = ordered_json::array();
    for (const auto& entry : manifest.entries) {
        const Sample& s = entry.sample;
        ordered_json js;
        js["id"] = s.id;
        ordered_json params = ordered_json::object();
        for (std::size_t i = 0; i < s.params.names.size() && i < s.params.values.size(); ++i) {
            params[s.params.names[i]] = s.params.values[i];
        }
        js["params"] = std::move(params);
        js["curve_path"] = entry.curve_path;
        if (s.truth_yield) js["truth_yield"] = yield_to_json(*s.truth_yield);
        if (s.truth_params) js["truth_params"] = constitutive_to_json(*s.truth_params);
        samples.push_back(std::move(js));
    }
    j["samples"] = std::move(samples);
    write_text_file(path, j.dump(2) + "\n");
}

Manifest read_manifest(const std::filesystem::path& path) {
    ordered_json j;
    try {
        j = ordered_json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        fail(path, std::string("invalid JSON: ") + e.what());
    }
    Manifest manifest;
    try {
        manifest.material = material_from_name(j.at("material").get<std::string>());
        if (j.contains("generator")) manifest.generator = j.at("generator");
        for (const auto& js : j.at("samples")) {
            ManifestEntry entry;
            Sample& s = entry.sample;
            s.id = js.at("id").get<std::string>();
            s.material = manifest.material;
            for (const auto& [name, value] : js.at("params").items()) {
                s.params.names.push_back(name);
                s.params.values.push_back(value.get<double>());
            }
            entry.curve_path = js.at("curve_path").get<std::string>();
            if (js.contains("truth_yield")) s.truth_yield = yield_from_json(js.at("truth_yield"));
            if (js.contains("truth_params")) s.truth_params = constitutive_from_json(js.at("truth_params"));
            manifest.entries.push_back(std::move(entry));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(path, std::string("bad manifest structure: ") + e.what());
    }
    const auto base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    for (auto& entry : manifest.entries) {
        entry.sample.curve = read_curve_csv(base_dir / entry.curve_path);
    }
    return manifest;
}

std::vector<Sample> load_samples(const std::filesystem::path& manifest_path, MaterialId* material) {
    Manifest manifest = read_manifest(manifest_path);
    if (material != nullptr) *material = manifest.material;
    std::vector<Sample> samples;
    samples.reserve(manifest.entries.size());
    for (auto& entry : manifest.entries) samples.push_back(std::move(entry.sample));
    return samples;
}

nlohmann::ordered_json report_to_json(const ExperimentReport& report) {
    ordered_json j;
    j["config"] = report.config;
    ordered_json folds = ordered_json::array();
    for (const auto& fold : report.per_fold) {
        ordered_json jf;
        jf["fold"] = fold.fold;
        if (fold.lambda_avg) jf["lambda_avg"] = *fold.lambda_avg;
        ordered_json samples = ordered_json::array();
        for (const auto& m : fold.samples) samples.push_back(metrics_to_json(m));
        jf["samples"] = std::move(samples);
        ordered_json traces = ordered_json::array();
        for (const auto& t : fold.loss_traces) traces.push_back(trace_to_json(t));
        jf["loss_traces"] = std::move(traces);
        ordered_json preds = ordered_json::array();
        for (const auto& p : fold.predictions) preds.push_back(prediction_to_json(p));
        jf["predictions"] = std::move(preds);
        folds.push_back(std::move(jf));
    }
    j["per_fold"] = std::move(folds);
    ordered_json aggregates = ordered_json::object();
    for (const auto& [name, agg] : report.aggregates) {
        aggregates[name] = ordered_json{{"mean", agg.mean},
                                        {"std", agg.stddev},
                                        {"ci_half_width", agg.half_width},
                                        {"n", agg.n}};
    }
    j["aggregates"] = std::move(aggregates);
    return j;
}

ExperimentReport report_from_json(const nlohmann::ordered_json& j) {
    ExperimentReport report;
    report.config = j.at("config");
    for (const auto& jf : j.at("per_fold")) {
        FoldResult fold;
        fold.fold = jf.at("fold").get<int>();
        if (jf.contains("lambda_avg")) fold.lambda_avg = jf.at("lambda_avg").get<double>();
        for (const auto& jm : jf.at("samples")) fold.samples.push_back(metrics_from_json(jm));
        for (const auto& jt : jf.at("loss_traces")) fold.loss_traces.push_back(trace_from_json(jt));
        for (const auto& jp : jf.at("predictions")) fold.predictions.push_back(prediction_from_json(jp));
        report.per_fold.push_back(std::move(fold));
    }
    for (const auto& [name, ja] : j.at("aggregates").items()) {
        MetricAggregate agg;
        agg.mean = ja.at("mean").get<double>();
        agg.stddev = ja.at("std").get<double>();
        agg.half_width = ja.at("ci_half_width").get<double>();
        agg.n = ja.at("n").get<std::size_t>();
        report.aggregates.emplace(name, agg);
    }
    return report;
}

void write_report(const std::filesystem::path& path, const ExperimentReport& report) {
    write_text_file(path, report_to_json(report).dump(2) + "\n");
}

ExperimentReport read_report(const std::filesystem::path& path) {
    try {
        return report_from_json(ordered_json::parse(read_text_file(path)));
    } catch (const nlohmann::json::exception& e) {
        fail(path, std::string("invalid report JSON: ") + e.what());
    }
}

void write_prediction_csv(const std::filesystem::path& path, const SamplePrediction& pred) {
    std::string text = "strain,actual_mpa,predicted_mpa\n";
    for (std::size_t i = 0; i < pred.strain.size(); ++i) {
        text += format_double(pred.strain[i]);
        text += ',';
        text += i < pred.actual_mpa.size() ? format_double(pred.actual_mpa[i]) : std::string();
        text += ',';
        text += i < pred.predicted_mpa.size() ? format_double(pred.predicted_mpa[i]) : std::string();
        text += '\n';
    }
    write_text_file(path, text);
}

namespace {

const char* law_name(LawKind law) {
    switch (law) {
        case LawKind::Elastic: return "elastic";
        case LawKind::Voce: return "voce";
        case LawKind::Hollomon: return "hollomon";
    }
    throw DataError("law_name: unknown law");
}

LawKind law_from_name(const std::string& name) {
    if (name == "elastic") return LawKind::Elastic;
    if (name == "voce") return LawKind::Voce;
    if (name == "hollomon") return LawKind::Hollomon;
    throw DataError("unknown hardening law '" + name + "'");
}

Region region_from_name(const std::string& name) {
    if (name == "elastic") return Region::Elastic;
    if (name == "plastic") return Region::Plastic;
    if (name == "whole") return Region::Whole;
    throw DataError("unknown region '" + name + "'");
}

ordered_json model_config_to_json(const ModelConfig& c) {
    return ordered_json{
        {"hidden_units", c.hidden_units},
        {"learning_rate", c.learning_rate},
        {"batch_size", c.batch_size},
        {"epochs", c.epochs},
        {"seq_len_elastic", c.seq_len_elastic},
        {"seq_len_plastic", c.seq_len_plastic},
        {"alpha_aux", c.alpha_aux},
        {"ridge_degree", c.ridge_degree},
        {"ridge_penalty", c.ridge_penalty},
        {"seed", c.seed},
    };
}

ModelConfig model_config_from_json(const ordered_json& j) {
    ModelConfig c;
    c.hidden_units = j.at("hidden_units").get<int>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.batch_size = j.at("batch_size").get<int>();
    c.epochs = j.at("epochs").get<int>();
    c.seq_len_elastic = j.at("seq_len_elastic").get<int>();
    c.seq_len_plastic = j.at("seq_len_plastic").get<int>();
    c.alpha_aux = j.at("alpha_aux").get<double>();
    c.ridge_degree = j.at("ridge_degree").get<int>();
    c.ridge_penalty = j.at("ridge_penalty").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

ordered_json ridge_model_to_json(const RidgeModel& m) {
    return ordered_json{
        {"degree", m.degree},          {"input_arity", m.input_arity},
        {"penalty", m.penalty},        {"feature_mean", m.feature_mean},
        {"feature_std", m.feature_std}, {"weights", m.weights},
        {"target_name", m.target_name},
    };
}

RidgeModel ridge_model_from_json(const ordered_json& j) {
    RidgeModel m;
    m.degree = j.at("degree").get<int>();
    m.input_arity = j.at("input_arity").get<std::size_t>();
    m.penalty = j.at("penalty").get<double>();
    m.feature_mean = j.at("feature_mean").get<std::vector<double>>();
    m.feature_std = j.at("feature_std").get<std::vector<double>>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.target_name = j.at("target_name").get<std::string>();
    return m;
}

ordered_json stats_to_json(const NormalizationStats& s) {
    return ordered_json{
        {"mean", std::vector<double>(s.mean.begin(), s.mean.end())},
        {"stddev", std::vector<double>(s.stddev.begin(), s.stddev.end())},
        {"stress_scale", s.stress_scale},
        {"strain_scale", s.strain_scale},
    };
}

NormalizationStats stats_from_json(const ordered_json& j) {
    NormalizationStats s;
    const auto mean = j.at("mean").get<std::vector<double>>();
    const auto stddev = j.at("stddev").get<std::vector<double>>();
    if (mean.size() != s.mean.size() || stddev.size() != s.stddev.size()) {
        throw DataError("normalization stats must have " +
                        std::to_string(s.mean.size()) + " feature columns");
    }
    std::copy(mean.begin(), mean.end(), s.mean.begin());
    std::copy(stddev.begin(), stddev.end(), s.stddev.begin());
    s.stress_scale = j.at("stress_scale").get<double>();
    s.strain_scale = j.at("strain_scale").get<double>();
    return s;
}

ordered_json region_model_to_json(const RegionModel& m) {
    return ordered_json{
        {"region", region_name(m.region)},
        {"law", law_name(m.law)},
        {"hidden_units", m.layout.hidden},
        {"head_outputs", m.layout.head_outputs},
        {"weights", m.weights},
        {"trace", trace_to_json(m.trace)},
    };
}

RegionModel region_model_from_json(const ordered_json& j) {
    RegionModel m;
    m.region = region_from_name(j.at("region").get<std::string>());
    m.law = law_from_name(j.at("law").get<std::string>());
    m.layout = LstmLayout{j.at("hidden_units").get<int>(), kInputWidth,
                          j.at("head_outputs").get<int>()};
    m.weights = j.at("weights").get<std::vector<double>>();
    m.trace = trace_from_json(j.at("trace"));
    return m;
}

ordered_json yield_models_to_json(const YieldModels& y) {
    return ordered_json{
        {"eps_model", ridge_model_to_json(y.eps_model)},
        {"sigma_model", ridge_model_to_json(y.sigma_model)},
        {"eps_floor", y.eps_floor},
        {"sigma_floor", y.sigma_floor},
    };
}

YieldModels yield_models_from_json(const ordered_json& j) {
    YieldModels y;
    y.eps_model = ridge_model_from_json(j.at("eps_model"));
    y.sigma_model = ridge_model_from_json(j.at("sigma_model"));
    y.eps_floor = j.at("eps_floor").get<double>();
    y.sigma_floor = j.at("sigma_floor").get<double>();
    return y;
}

}  // namespace

nlohmann::ordered_json trained_fold_to_json(const TrainedFold& fold) {
    ordered_json j{
        {"mode", mode_name(fold.mode)},
        {"material", material_name(fold.material)},
        {"config", model_config_to_json(fold.config)},
    };
    if (is_sequence_mode(fold.mode)) j["stats"] = stats_to_json(fold.stats);
    if (fold.yield) j["yield"] = yield_models_to_json(*fold.yield);
    if (fold.elastic) j["elastic"] = region_model_to_json(*fold.elastic);
    if (fold.plastic) j["plastic"] = region_model_to_json(*fold.plastic);
    if (fold.whole) j["whole"] = region_model_to_json(*fold.whole);
    if (fold.mean_params) j["mean_params"] = constitutive_to_json(*fold.mean_params);
    if (fold.curve_ridge) j["curve_ridge"] = ridge_model_to_json(*fold.curve_ridge);
    return j;
}

TrainedFold trained_fold_from_json(const nlohmann::ordered_json& j) {
    TrainedFold fold;
    fold.mode = mode_from_name(j.at("mode").get<std::string>());
    fold.material = material_from_name(j.at("material").get<std::string>());
    fold.config = model_config_from_json(j.at("config"));
    if (j.contains("stats")) fold.stats = stats_from_json(j.at("stats"));
    if (j.contains("yield")) fold.yield = yield_models_from_json(j.at("yield"));
    if (j.contains("elastic")) fold.elastic = region_model_from_json(j.at("elastic"));
    if (j.contains("plastic")) fold.plastic = region_model_from_json(j.at("plastic"));
    if (j.contains("whole")) fold.whole = region_model_from_json(j.at("whole"));
    if (j.contains("mean_params")) {
        fold.mean_params = constitutive_from_json(j.at("mean_params"));
    }
    if (j.contains("curve_ridge")) {
        fold.curve_ridge = ridge_model_from_json(j.at("curve_ridge"));
    }
    return fold;
}

void write_model(const std::filesystem::path& path, const TrainedFold& fold) {
    write_text_file(path, trained_fold_to_json(fold).dump(2) + "\n");
}

TrainedFold read_model(const std::filesystem::path& path) {
    try {
        return trained_fold_from_json(ordered_json::parse(read_text_file(path)));
    } catch (const nlohmann::json::exception& e) {
        fail(path, std::string("invalid model JSON: ") + e.what());
    }
}

}  // namespace piml::io
