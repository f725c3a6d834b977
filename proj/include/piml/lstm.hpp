#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "piml/autodiff.hpp"
#include "piml/domain.hpp"

namespace piml {

/// Input row layout: [strain, process param 1, process param 2].
constexpr int kInputWidth = 3;

enum class Region { Elastic, Plastic, Whole };

const char* region_name(Region region);

/// Flat parameter indexing for one LSTM cell plus its dense head. Parameters
/// are ordered gate-major (forget, input, candidate, output); within a gate:
/// input weights W (hidden x input_width, row-major), recurrent weights U
/// (hidden x hidden), biases; the head (outputs x hidden weights, then output
/// biases) comes last. A parameter's flat index equals both its position in
/// the weight vector and its tape parameter index.
struct LstmLayout {
    int hidden = 32;
    int input_width = kInputWidth;
    int head_outputs = 1;

    int gate_stride() const { return hidden * (input_width + hidden + 1); }
    int cell_params() const { return 4 * gate_stride(); }
    int head_params() const { return head_outputs * (hidden + 1); }
    int total_params() const { return cell_params() + head_params(); }

    int w(int gate, int row, int col) const {
        return gate * gate_stride() + row * input_width + col;
    }
    int u(int gate, int row, int col) const {
        return gate * gate_stride() + hidden * input_width + row * hidden + col;
    }
    int bias(int gate, int row) const {
        return gate * gate_stride() + hidden * (input_width + hidden) + row;
    }
    int head_w(int out, int col) const { return cell_params() + out * hidden + col; }
    int head_b(int out) const { return cell_params() + head_outputs * hidden + out; }
};

/// Per-feature z-score statistics plus the training-set scale factors used to
/// keep losses and physics variables O(1) across polymer/metal magnitudes.
/// Always computed from training-fold data only.
struct NormalizationStats {
    std::array<double, kInputWidth> mean{{0.0, 0.0, 0.0}};
    std::array<double, kInputWidth> stddev{{1.0, 1.0, 1.0}};
    double stress_scale = 1.0;  // max |stress| over training region points
    double strain_scale = 1.0;  // max strain over training region points
};

/// Pools every point of the given region curves (with each curve's process
/// parameters repeated per point) into per-feature mean/std, max |stress|,
/// and max strain. Zero spreads and zero scales are replaced by 1.
NormalizationStats compute_normalization(
    const std::vector<const StressStrainCurve*>& curves,
    const std::vector<const ProcessParameters*>& params);

/// One training/inference step: n normalized input rows predicting the stress
/// at the strain immediately after the window (raw units kept for the physics
/// transforms and reporting).
struct Window {
    std::vector<std::array<double, kInputWidth>> inputs;
    double target_strain = 0.0;  // raw
    double target_stress = 0.0;  // raw MPa
    Region region = Region::Whole;
};

/// Left-pads the region by repeating its first row (n-1) times, then emits
/// one window per target index 1..len-1, never crossing the region boundary.
/// Regions with fewer than 2 points yield an empty list (warned, not fatal).
std::vector<Window> build_windows(const StressStrainCurve& region_curve,
                                  const ProcessParameters& params, int n,
                                  const NormalizationStats& stats, Region region);

/// Uniform +-1/sqrt(fan_in) weights (fan_in = input_width + hidden for the
/// cell, hidden for the head), forget-gate biases 1.0, every other bias 0,
/// fully determined by the seed.
std::vector<double> init_params(const LstmLayout& layout, std::uint64_t seed);

/// Creates the layout's parameter nodes on a fresh tape, in flat order, so
/// that node id == parameter index == weight-vector position. Must be the
/// first nodes pushed after Tape::clear().
void register_params(Tape& tape, const LstmLayout& layout);

/// Unrolls the standard recurrence (gates via logistic, candidate via tanh,
/// zero initial hidden/cell state) over baked input rows; returns the final
/// hidden-state node ids.
std::vector<Tape::NodeId> lstm_forward(
    Tape& tape, const LstmLayout& layout,
    const std::vector<std::array<double, kInputWidth>>& rows);

/// Affine map from the final hidden state to head_outputs raw node ids; any
/// nonlinearity is applied by the objective, not here.
std::vector<Tape::NodeId> dense_head(Tape& tape, const LstmLayout& layout,
                                     const std::vector<Tape::NodeId>& hidden);

}  // namespace piml
