#include "piml/ridge.hpp"

#include <algorithm>
#include <cmath>

namespace piml {

namespace {

void append_monomials(const std::vector<double>& x, std::size_t start, int degree_left,
                      double product, std::vector<double>& out) {
    if (degree_left == 0) {
        out.push_back(product);
        return;
    }
    for (std::size_t i = start; i < x.size(); ++i) {
        append_monomials(x, i, degree_left - 1, product * x[i], out);
    }
}

}  // namespace

std::vector<double> polynomial_features(const std::vector<double>& x, int degree) {
    if (degree < 1) throw DataError("polynomial_features: degree must be >= 1");
    std::vector<double> out;
    out.reserve(polynomial_feature_count(x.size(), degree));
    out.push_back(1.0);
    for (int g = 1; g <= degree; ++g) append_monomials(x, 0, g, 1.0, out);
    return out;
}

std::size_t polynomial_feature_count(std::size_t d, int degree) {
    // C(d + degree, degree)
    std::size_t count = 1;
    for (int i = 1; i <= degree; ++i) {
        count = count * (d + static_cast<std::size_t>(i)) / static_cast<std::size_t>(i);
    }
    return count;
}

double RidgeModel::predict_features(const std::vector<double>& features) const {
    double acc = weights[0];
    for (std::size_t j = 1; j < weights.size(); ++j) {
        acc += weights[j] * (features[j] - feature_mean[j - 1]) / feature_std[j - 1];
    }
    return acc;
}

double RidgeModel::predict(const std::vector<double>& x) const {
    if (degree < 1) throw DataError("RidgeModel::predict: model lacks a stored degree");
    if (x.size() != input_arity) throw DataError("RidgeModel::predict: input arity mismatch");
    return predict_features(polynomial_features(x, degree));
}

RidgeModel ridge_fit(const Matrix& x, const std::vector<double>& y, double penalty,
                     int degree, std::size_t input_arity, std::string target_name) {
    if (x.rows == 0 || x.rows != y.size()) {
        throw DataError("ridge_fit: empty system or row/target mismatch");
    }
    if (penalty < 0.0) throw DataError("ridge_fit: penalty must be >= 0");
    const std::size_t n = x.rows, p = x.cols;

    RidgeModel model;
    model.degree = degree;
    model.input_arity = input_arity;
    model.penalty = penalty;
    model.target_name = std::move(target_name);
    model.feature_mean.assign(p > 0 ? p - 1 : 0, 0.0);
    model.feature_std.assign(p > 0 ? p - 1 : 0, 1.0);

    // Standardize the non-intercept columns; constant columns keep std 1 so
    // their centered values are exactly zero.
    Matrix z = x;
    for (std::size_t j = 1; j < p; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += x(i, j);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) var += (x(i, j) - mean) * (x(i, j) - mean);
        double sd = std::sqrt(var / static_cast<double>(n));
        if (sd == 0.0) sd = 1.0;
        model.feature_mean[j - 1] = mean;
        model.feature_std[j - 1] = sd;
        for (std::size_t i = 0; i < n; ++i) z(i, j) = (x(i, j) - mean) / sd;
    }

    Matrix a = gram(z);
    for (std::size_t j = 1; j < p; ++j) a(j, j) += penalty;  // intercept unpenalized
    std::vector<double> rhs = mat_t_vec(z, y);
    try {
        model.weights = solve_dense(a, rhs);
    } catch (const std::runtime_error&) {
        throw DataError("ridge_fit: singular system; use penalty > 0");
    }
    return model;
}

RidgeModel ridge_fit_poly(const std::vector<std::vector<double>>& inputs,
                          const std::vector<double>& y, int degree, double penalty,
                          std::string target_name) {
    if (inputs.empty()) throw DataError("ridge_fit_poly: no input rows");
    const std::size_t arity = inputs.front().size();
    const std::size_t p = polynomial_feature_count(arity, degree);
    Matrix x(inputs.size(), p);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (inputs[i].size() != arity) throw DataError("ridge_fit_poly: ragged inputs");
        std::vector<double> f = polynomial_features(inputs[i], degree);
        for (std::size_t j = 0; j < p; ++j) x(i, j) = f[j];
    }
    return ridge_fit(x, y, penalty, degree, arity, std::move(target_name));
}

YieldModels fit_yield_models(const std::vector<std::vector<double>>& params,
                             const std::vector<double>& eps_y,
                             const std::vector<double>& sigma_y, int degree,
                             double penalty) {
    if (params.empty() || params.size() != eps_y.size() ||
        params.size() != sigma_y.size()) {
        throw DataError("fit_yield_models: inconsistent training rows");
    }
    YieldModels m;
    m.eps_model = ridge_fit_poly(params, eps_y, degree, penalty, "yield_strain");
    m.sigma_model = ridge_fit_poly(params, sigma_y, degree, penalty, "yield_stress");
    m.eps_floor = 0.1 * *std::min_element(eps_y.begin(), eps_y.end());
    m.sigma_floor = 0.1 * *std::min_element(sigma_y.begin(), sigma_y.end());
    return m;
}

YieldPoint predict_yield(const YieldModels& models, const ProcessParameters& params) {
    YieldPoint y;
    y.eps_y = std::max(models.eps_model.predict(params.values), models.eps_floor);
    y.sigma_y = std::max(models.sigma_model.predict(params.values), models.sigma_floor);
    return y;
}

RidgeModel fit_curve_ridge(const std::vector<const Sample*>& train, int degree,
                           double penalty) {
    if (train.empty()) throw DataError("fit_curve_ridge: no training samples");
    std::vector<std::vector<double>> rows;
    std::vector<double> stresses;
    for (const Sample* s : train) {
        for (std::size_t i = 0; i < s->curve.size(); ++i) {
            rows.push_back({s->curve.strain[i], s->params.values[0], s->params.values[1]});
            stresses.push_back(s->curve.stress[i]);
        }
    }
    return ridge_fit_poly(rows, stresses, degree, penalty, "stress_pointwise");
}

StressStrainCurve evaluate_curve_ridge(const RidgeModel& model,
                                       const ProcessParameters& test_params,
                                       const std::vector<double>& strain_grid) {
    StressStrainCurve out;
    out.strain = strain_grid;
    out.stress.reserve(strain_grid.size());
    for (double eps : strain_grid) {
        out.stress.push_back(
            model.predict({eps, test_params.values[0], test_params.values[1]}));
    }
    return out;
}

StressStrainCurve ridge_curve_baseline(const std::vector<const Sample*>& train,
                                       const ProcessParameters& test_params,
                                       const std::vector<double>& strain_grid,
                                       int degree, double penalty) {
    return evaluate_curve_ridge(fit_curve_ridge(train, degree, penalty), test_params,
                                strain_grid);
}

}  // namespace piml
