#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "piml/domain.hpp"

namespace piml {

/// Node kinds of the scalar computation graph.
enum class Op : std::uint8_t {
    Const,
    Param,
    Input,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Exp,
    Ln,
    Pow,
    Tanh,
    Logistic,
    Softplus,
    Square,
};

/// Append-only tape of scalar expressions in topological (creation) order.
///
/// Training rebuilds the graph per window (define-by-run, batch size 1);
/// `clear()` keeps the allocated capacity so the rebuild is cheap. Parameter
/// nodes carry stable indices 0..num_params-1 assigned in creation order and
/// read their values from the bindings vector passed at evaluation time, so
/// one graph can be evaluated at many parameter settings (used heavily by the
/// finite-difference gradient checker).
///
/// A tape is single-threaded; independent tapes may run on different threads.
class Tape {
public:
    using NodeId = std::int32_t;

    // -- construction ------------------------------------------------------
    NodeId constant(double v) { return push(Op::Const, -1, -1, v); }
    NodeId input(double v) { return push(Op::Input, -1, -1, v); }
    /// New trainable parameter slot; reads bindings[index] when evaluated.
    NodeId param() {
        NodeId id = push(Op::Param, num_params_, -1, 0.0);
        ++num_params_;
        return id;
    }

    NodeId add(NodeId a, NodeId b) { return push(Op::Add, a, b, 0.0); }
    NodeId sub(NodeId a, NodeId b) { return push(Op::Sub, a, b, 0.0); }
    NodeId mul(NodeId a, NodeId b) { return push(Op::Mul, a, b, 0.0); }
    NodeId div(NodeId a, NodeId b) { return push(Op::Div, a, b, 0.0); }
    NodeId neg(NodeId a) { return push(Op::Neg, a, -1, 0.0); }
    NodeId exp(NodeId a) { return push(Op::Exp, a, -1, 0.0); }
    /// Natural log; evaluation requires a strictly positive argument.
    NodeId ln(NodeId a) { return push(Op::Ln, a, -1, 0.0); }
    /// base^exponent; evaluation requires base > 0 (the adjoint needs ln base).
    NodeId pow(NodeId base, NodeId exponent) { return push(Op::Pow, base, exponent, 0.0); }
    NodeId tanh(NodeId a) { return push(Op::Tanh, a, -1, 0.0); }
    NodeId logistic(NodeId a) { return push(Op::Logistic, a, -1, 0.0); }
    NodeId softplus(NodeId a) { return push(Op::Softplus, a, -1, 0.0); }
    NodeId square(NodeId a) { return push(Op::Square, a, -1, 0.0); }

    // -- evaluation --------------------------------------------------------
    /// Forward pass; returns the value at `root`. Values for all nodes are
    /// cached and readable through value() afterwards.
    double evaluate(NodeId root, const std::vector<double>& bindings);

    struct EvalResult {
        double value = 0.0;
        std::vector<double> gradients;  // one entry per parameter index
    };
    /// Forward + reverse pass. Parameters not reachable from `root` get
    /// gradient 0. Throws DataError if bindings are shorter than the
    /// parameter count and NumericError on domain violations (naming the
    /// offending node).
    EvalResult evaluate_with_gradients(NodeId root, const std::vector<double>& bindings);

    /// Same as above but reuses caller-owned gradient storage.
    double gradient(NodeId root, const std::vector<double>& bindings,
                    std::vector<double>& grad_out);

    double value(NodeId id) const { return vals_[static_cast<std::size_t>(id)]; }
    Op op(NodeId id) const { return ops_[static_cast<std::size_t>(id)]; }
    std::size_t size() const { return ops_.size(); }
    int num_params() const { return num_params_; }

    /// Drops all nodes but keeps capacity for the next window's graph.
    void clear() {
        ops_.clear();
        a_.clear();
        b_.clear();
        aux_.clear();
        vals_.clear();
        adj_.clear();
        num_params_ = 0;
    }

private:
    NodeId push(Op op, NodeId a, NodeId b, double aux);

    std::vector<Op> ops_;
    std::vector<NodeId> a_, b_;  // operands; Param stores its index in a_
    std::vector<double> aux_;    // Const/Input payloads
    std::vector<double> vals_;
    std::vector<double> adj_;
    int num_params_ = 0;
};

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

/// Adam moments + hyperparameters. Moment vectors are lazily sized on the
/// first step.
struct OptimizerState {
    std::vector<double> m;  // first moment
    std::vector<double> v;  // second moment
    std::int64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double learning_rate = 0.01;
};

/// One bias-corrected Adam update, in place. Throws NumericError on a
/// non-finite gradient (training must abort loudly, not drift on NaNs).
void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               OptimizerState& state);

// ---------------------------------------------------------------------------
// Gradient checking
// ---------------------------------------------------------------------------

/// Compares reverse-mode gradients against central differences
/// (f(x+h) - f(x-h)) / 2h per parameter and returns the maximum relative
/// error with denominator max(|analytic|, |numeric|, 1e-8).
double grad_check(Tape& tape, Tape::NodeId root, const std::vector<double>& bindings,
                  double h = 1e-5);

}  // namespace piml
