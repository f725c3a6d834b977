#include "piml/autodiff.hpp"

#include <cmath>

namespace piml {

namespace {

constexpr std::size_t kNodeCeiling = 10'000'000;  // runaway-graph guard

double softplus_val(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double logistic_val(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                    : std::exp(x) / (1.0 + std::exp(x));
}

[[noreturn]] void domain_fail(const char* what, Tape::NodeId id) {
    throw NumericError(std::string("autodiff: ") + what + " at node " +
                       std::to_string(id));
}

}  // namespace

Tape::NodeId Tape::push(Op op, NodeId a, NodeId b, double aux) {
    if (ops_.size() >= kNodeCeiling) {
        throw NumericError("autodiff: graph node ceiling (1e7) exceeded");
    }
    ops_.push_back(op);
    a_.push_back(a);
    b_.push_back(b);
    aux_.push_back(aux);
    return static_cast<NodeId>(ops_.size() - 1);
}

double Tape::evaluate(NodeId root, const std::vector<double>& bindings) {
    if (static_cast<int>(bindings.size()) < num_params_) {
        throw DataError("autodiff: unbound parameter (bindings too short)");
    }
    const std::size_t n = static_cast<std::size_t>(root) + 1;
    vals_.resize(ops_.size());
    const Op* ops = ops_.data();
    const NodeId* a = a_.data();
    const NodeId* b = b_.data();
    const double* aux = aux_.data();
    double* v = vals_.data();
    for (std::size_t i = 0; i < n; ++i) {
        const NodeId ia = a[i];
        switch (ops[i]) {
            case Op::Const:
            case Op::Input:
                v[i] = aux[i];
                break;
            case Op::Param:
                v[i] = bindings[static_cast<std::size_t>(ia)];
                break;
            case Op::Add:
                v[i] = v[ia] + v[b[i]];
                break;
            case Op::Sub:
                v[i] = v[ia] - v[b[i]];
                break;
            case Op::Mul:
                v[i] = v[ia] * v[b[i]];
                break;
            case Op::Div:
                if (v[b[i]] == 0.0) domain_fail("division by zero", static_cast<NodeId>(i));
                v[i] = v[ia] / v[b[i]];
                break;
            case Op::Neg:
                v[i] = -v[ia];
                break;
            case Op::Exp:
                v[i] = std::exp(v[ia]);
                break;
            case Op::Ln:
                if (!(v[ia] > 0.0)) domain_fail("ln of non-positive value", static_cast<NodeId>(i));
                v[i] = std::log(v[ia]);
                break;
            case Op::Pow:
                if (!(v[ia] > 0.0)) domain_fail("pow with non-positive base", static_cast<NodeId>(i));
                v[i] = std::pow(v[ia], v[b[i]]);
                break;
            case Op::Tanh:
                v[i] = std::tanh(v[ia]);
                break;
            case Op::Logistic:
                v[i] = logistic_val(v[ia]);
                break;
            case Op::Softplus:
                v[i] = softplus_val(v[ia]);
                break;
            case Op::Square:
                v[i] = v[ia] * v[ia];
                break;
        }
    }
    return v[root];
}

double Tape::gradient(NodeId root, const std::vector<double>& bindings,
                      std::vector<double>& grad_out) {
    const double value = evaluate(root, bindings);
    adj_.assign(ops_.size(), 0.0);
    grad_out.assign(static_cast<std::size_t>(num_params_), 0.0);
    const Op* ops = ops_.data();
    const NodeId* a = a_.data();
    const NodeId* b = b_.data();
    const double* v = vals_.data();
    double* adj = adj_.data();
    adj[root] = 1.0;
    for (std::size_t i = static_cast<std::size_t>(root) + 1; i-- > 0;) {
        const double w = adj[i];
        if (w == 0.0) continue;
        const NodeId ia = a[i];
        switch (ops[i]) {
            case Op::Const:
            case Op::Input:
                break;
            case Op::Param:
                grad_out[static_cast<std::size_t>(ia)] += w;
                break;
            case Op::Add:
                adj[ia] += w;
                adj[b[i]] += w;
                break;
            case Op::Sub:
                adj[ia] += w;
                adj[b[i]] -= w;
                break;
            case Op::Mul:
                adj[ia] += w * v[b[i]];
                adj[b[i]] += w * v[ia];
                break;
            case Op::Div:
                adj[ia] += w / v[b[i]];
                adj[b[i]] -= w * v[i] / v[b[i]];
                break;
            case Op::Neg:
                adj[ia] -= w;
                break;
            case Op::Exp:
                adj[ia] += w * v[i];
                break;
            case Op::Ln:
                adj[ia] += w / v[ia];
                break;
            case Op::Pow:
                adj[ia] += w * v[b[i]] * v[i] / v[ia];
                adj[b[i]] += w * v[i] * std::log(v[ia]);
                break;
            case Op::Tanh:
                adj[ia] += w * (1.0 - v[i] * v[i]);
                break;
            case Op::Logistic:
                adj[ia] += w * v[i] * (1.0 - v[i]);
                break;
            case Op::Softplus:
                adj[ia] += w * logistic_val(v[ia]);
                break;
            case Op::Square:
                adj[ia] += w * 2.0 * v[ia];
                break;
        }
    }
    return value;
}

Tape::EvalResult Tape::evaluate_with_gradients(NodeId root,
                                               const std::vector<double>& bindings) {
    EvalResult result;
    result.value = gradient(root, bindings, result.gradients);
    return result;
}

void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               OptimizerState& state) {
    if (params.size() != grads.size()) {
        throw DataError("adam_step: parameter/gradient length mismatch");
    }
    if (state.m.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    if (state.m.size() != params.size()) {
        throw DataError("adam_step: optimizer state sized for a different model");
    }
    for (double g : grads) {
        if (!std::isfinite(g)) throw NumericError("adam_step: non-finite gradient");
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.eps);
    }
}

double grad_check(Tape& tape, Tape::NodeId root, const std::vector<double>& bindings,
                  double h) {
    if (!(h > 0.0)) throw DataError("grad_check: h must be > 0");
    std::vector<double> analytic;
    tape.gradient(root, bindings, analytic);
    std::vector<double> probe = bindings;
    double worst = 0.0;
    for (int p = 0; p < tape.num_params(); ++p) {
        const double saved = probe[static_cast<std::size_t>(p)];
        probe[static_cast<std::size_t>(p)] = saved + h;
        const double fp = tape.evaluate(root, probe);
        probe[static_cast<std::size_t>(p)] = saved - h;
        const double fm = tape.evaluate(root, probe);
        probe[static_cast<std::size_t>(p)] = saved;
        const double numeric = (fp - fm) / (2.0 * h);
        const double denom = std::max({std::fabs(analytic[static_cast<std::size_t>(p)]),
                                       std::fabs(numeric), 1e-8});
        worst = std::max(worst, std::fabs(analytic[static_cast<std::size_t>(p)] - numeric) / denom);
    }
    return worst;
}

}  // namespace piml
