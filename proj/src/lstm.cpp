#include "piml/lstm.hpp"

#include <cmath>
#include <iostream>

#include "piml/rng.hpp"

namespace piml {

namespace {

enum Gate { kForget = 0, kInput = 1, kCandidate = 2, kOutput = 3 };

}  // namespace

const char* region_name(Region region) {
    switch (region) {
        case Region::Elastic: return "elastic";
        case Region::Plastic: return "plastic";
        case Region::Whole: return "whole";
    }
    return "?";
}

NormalizationStats compute_normalization(
    const std::vector<const StressStrainCurve*>& curves,
    const std::vector<const ProcessParameters*>& params) {
    if (curves.size() != params.size()) {
        throw DataError("compute_normalization: curve/parameter list length mismatch");
    }
    NormalizationStats stats;
    std::array<double, kInputWidth> sum{{0.0, 0.0, 0.0}};
    std::array<double, kInputWidth> sum_sq{{0.0, 0.0, 0.0}};
    double max_abs_stress = 0.0;
    double max_strain = 0.0;
    std::size_t n = 0;
    for (std::size_t s = 0; s < curves.size(); ++s) {
        const StressStrainCurve& curve = *curves[s];
        if (params[s]->values.size() < 2) {
            throw DataError("compute_normalization: sample needs 2 process parameters");
        }
        const double p1 = params[s]->values[0];
        const double p2 = params[s]->values[1];
        for (std::size_t i = 0; i < curve.size(); ++i) {
            const double row[kInputWidth] = {curve.strain[i], p1, p2};
            for (int f = 0; f < kInputWidth; ++f) {
                sum[f] += row[f];
                sum_sq[f] += row[f] * row[f];
            }
            max_abs_stress = std::max(max_abs_stress, std::abs(curve.stress[i]));
            max_strain = std::max(max_strain, curve.strain[i]);
            ++n;
        }
    }
    if (n == 0) throw DataError("compute_normalization: no points");
    for (int f = 0; f < kInputWidth; ++f) {
        stats.mean[f] = sum[f] / static_cast<double>(n);
        const double var = sum_sq[f] / static_cast<double>(n) - stats.mean[f] * stats.mean[f];
        stats.stddev[f] = var > 0.0 ? std::sqrt(var) : 1.0;
        if (stats.stddev[f] == 0.0) stats.stddev[f] = 1.0;
    }
    stats.stress_scale = max_abs_stress > 0.0 ? max_abs_stress : 1.0;
    stats.strain_scale = max_strain > 0.0 ? max_strain : 1.0;
    return stats;
}

std::vector<Window> build_windows(const StressStrainCurve& region_curve,
                                  const ProcessParameters& params, int n,
                                  const NormalizationStats& stats, Region region) {
    if (n < 1) throw DataError("build_windows: sequence length must be >= 1");
    if (params.values.size() < 2) {
        throw DataError("build_windows: sample needs 2 process parameters");
    }
    const std::size_t len = region_curve.size();
    if (len < 2) {
        std::cerr << "warning: " << region_name(region) << " region with " << len
                  << " point(s) yields no training windows\n";
        return {};
    }
    auto normalized_row = [&](std::size_t i) {
        return std::array<double, kInputWidth>{
            (region_curve.strain[i] - stats.mean[0]) / stats.stddev[0],
            (params.values[0] - stats.mean[1]) / stats.stddev[1],
            (params.values[1] - stats.mean[2]) / stats.stddev[2]};
    };
    std::vector<Window> windows;
    windows.reserve(len - 1);
    // Conceptual left-padding: padded[j] = row(max(0, j - (n-1))); window k
    // spans padded[k .. k+n-1] and predicts original index k+1.
    for (std::size_t k = 0; k + 1 < len; ++k) {
        Window w;
        w.inputs.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const std::ptrdiff_t j =
                static_cast<std::ptrdiff_t>(k) + i - (n - 1);
            w.inputs.push_back(normalized_row(j > 0 ? static_cast<std::size_t>(j) : 0));
        }
        w.target_strain = region_curve.strain[k + 1];
        w.target_stress = region_curve.stress[k + 1];
        w.region = region;
        windows.push_back(std::move(w));
    }
    return windows;
}

std::vector<double> init_params(const LstmLayout& layout, std::uint64_t seed) {
    std::vector<double> values(static_cast<std::size_t>(layout.total_params()), 0.0);
    Rng rng(seed);
    const double cell_bound = 1.0 / std::sqrt(static_cast<double>(layout.input_width + layout.hidden));
    const double head_bound = 1.0 / std::sqrt(static_cast<double>(layout.hidden));
    for (int gate = 0; gate < 4; ++gate) {
        for (int r = 0; r < layout.hidden; ++r) {
            for (int c = 0; c < layout.input_width; ++c) {
                values[static_cast<std::size_t>(layout.w(gate, r, c))] =
                    rng.uniform(-cell_bound, cell_bound);
            }
        }
        for (int r = 0; r < layout.hidden; ++r) {
            for (int c = 0; c < layout.hidden; ++c) {
                values[static_cast<std::size_t>(layout.u(gate, r, c))] =
                    rng.uniform(-cell_bound, cell_bound);
            }
        }
        for (int r = 0; r < layout.hidden; ++r) {
            values[static_cast<std::size_t>(layout.bias(gate, r))] =
                gate == kForget ? 1.0 : 0.0;
        }
    }
    for (int o = 0; o < layout.head_outputs; ++o) {
        for (int c = 0; c < layout.hidden; ++c) {
            values[static_cast<std::size_t>(layout.head_w(o, c))] =
                rng.uniform(-head_bound, head_bound);
        }
        values[static_cast<std::size_t>(layout.head_b(o))] = 0.0;
    }
    return values;
}

void register_params(Tape& tape, const LstmLayout& layout) {
    if (tape.size() != 0) {
        throw DataError("register_params: tape must be fresh so node id == param index");
    }
    for (int i = 0; i < layout.total_params(); ++i) tape.param();
}

std::vector<Tape::NodeId> lstm_forward(
    Tape& tape, const LstmLayout& layout,
    const std::vector<std::array<double, kInputWidth>>& rows) {
    const int H = layout.hidden;
    // Node id of parameter i is i (register_params contract).
    auto pid = [](int i) { return static_cast<Tape::NodeId>(i); };
    std::vector<Tape::NodeId> h, c;  // empty means the zero initial state
    std::vector<Tape::NodeId> x(static_cast<std::size_t>(layout.input_width));
    std::vector<Tape::NodeId> pre(static_cast<std::size_t>(H));
    std::array<std::vector<Tape::NodeId>, 4> gates;
    for (const auto& row : rows) {
        for (int f = 0; f < layout.input_width; ++f) {
            x[static_cast<std::size_t>(f)] = tape.input(row[static_cast<std::size_t>(f)]);
        }
        for (int gate = 0; gate < 4; ++gate) {
            auto& out = gates[static_cast<std::size_t>(gate)];
            out.resize(static_cast<std::size_t>(H));
            for (int r = 0; r < H; ++r) {
                Tape::NodeId acc = pid(layout.bias(gate, r));
                for (int f = 0; f < layout.input_width; ++f) {
                    acc = tape.add(acc, tape.mul(pid(layout.w(gate, r, f)),
                                                 x[static_cast<std::size_t>(f)]));
                }
                if (!h.empty()) {
                    for (int k = 0; k < H; ++k) {
                        acc = tape.add(acc, tape.mul(pid(layout.u(gate, r, k)),
                                                     h[static_cast<std::size_t>(k)]));
                    }
                }
                pre[static_cast<std::size_t>(r)] = acc;
            }
            for (int r = 0; r < H; ++r) {
                const auto id = pre[static_cast<std::size_t>(r)];
                out[static_cast<std::size_t>(r)] =
                    gate == kCandidate ? tape.tanh(id) : tape.logistic(id);
            }
        }
        std::vector<Tape::NodeId> c_next(static_cast<std::size_t>(H));
        std::vector<Tape::NodeId> h_next(static_cast<std::size_t>(H));
        for (int r = 0; r < H; ++r) {
            const auto ri = static_cast<std::size_t>(r);
            Tape::NodeId retained = tape.mul(gates[kInput][ri], gates[kCandidate][ri]);
            if (!c.empty()) {
                retained = tape.add(tape.mul(gates[kForget][ri], c[ri]), retained);
            }
            c_next[ri] = retained;
            h_next[ri] = tape.mul(gates[kOutput][ri], tape.tanh(retained));
        }
        c = std::move(c_next);
        h = std::move(h_next);
    }
    if (h.empty()) throw DataError("lstm_forward: empty input window");
    return h;
}

std::vector<Tape::NodeId> dense_head(Tape& tape, const LstmLayout& layout,
                                     const std::vector<Tape::NodeId>& hidden) {
    if (static_cast<int>(hidden.size()) != layout.hidden) {
        throw DataError("dense_head: hidden width mismatch");
    }
    auto pid = [](int i) { return static_cast<Tape::NodeId>(i); };
    std::vector<Tape::NodeId> out(static_cast<std::size_t>(layout.head_outputs));
    for (int o = 0; o < layout.head_outputs; ++o) {
        Tape::NodeId acc = pid(layout.head_b(o));
        for (int c = 0; c < layout.hidden; ++c) {
            acc = tape.add(acc, tape.mul(pid(layout.head_w(o, c)),
                                         hidden[static_cast<std::size_t>(c)]));
        }
        out[static_cast<std::size_t>(o)] = acc;
    }
    return out;
}

}  // namespace piml
