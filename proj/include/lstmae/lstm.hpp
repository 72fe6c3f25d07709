#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lstmae/core_math.hpp"

namespace lstmae {

// Gate order used for every per-gate array below.
enum Gate : std::size_t { forget = 0, input = 1, candidate = 2, output = 3 };
inline constexpr std::size_t gate_count = 4;

// Weights act on the concatenation [h_{t-1}, x_t]; hidden columns come first.
struct LstmLayerParams {
    std::size_t input_size = 0;
    std::size_t hidden_size = 0;
    std::array<Matrix, gate_count> weights;  // hidden x (hidden + input)
    std::array<Vector, gate_count> biases;   // hidden

    static LstmLayerParams zeros(std::size_t input_size, std::size_t hidden_size);
    // Glorot-uniform weights, zero biases.
    static LstmLayerParams glorot(std::size_t input_size, std::size_t hidden_size, Rng& rng);

    std::size_t concat_size() const noexcept { return hidden_size + input_size; }
    std::size_t parameter_count() const noexcept { return gate_count * hidden_size * (concat_size() + 1); }

    // Throws a shape error if any tensor disagrees with input_size/hidden_size.
    void validate() const;
    void set_zero();

    // Flat views in a fixed order: W_f, W_i, W_c, W_o, b_f, b_i, b_c, b_o.
    std::vector<std::span<double>> tensors();
    std::vector<std::span<const double>> tensors() const;

    bool operator==(const LstmLayerParams&) const = default;
};

struct LstmStepState {
    Vector hidden;
    Vector cell;

    static LstmStepState zeros(std::size_t hidden_size) {
        return {Vector(hidden_size, 0.0), Vector(hidden_size, 0.0)};
    }
};

// Everything the backward pass needs from one forward step.
struct LstmStepCache {
    Vector concat;  // [h_{t-1}, x_t]
    std::array<Vector, gate_count> activations;  // f, i, c~, o
    Vector cell_prev;
    Vector cell;
    Vector cell_tanh;
};

struct LstmStepResult {
    LstmStepState state;
    LstmStepCache cache;
};

LstmStepResult lstm_step(const LstmLayerParams& params, const LstmStepState& prev,
                         std::span<const double> x);

#ifdef LSTMAE_TEST_HOOKS
// Replaces the computed forget/input/output gate activations.
struct GateOverride {
    std::optional<Vector> forget;
    std::optional<Vector> input;
    std::optional<Vector> output;
};

LstmStepResult lstm_step_with_override(const LstmLayerParams& params, const LstmStepState& prev,
                                       std::span<const double> x, const GateOverride& gates);
#endif

struct LstmForwardResult {
    // [H_1..H_T] with return_sequences, otherwise just [H_T].
    std::vector<Vector> outputs;
    std::vector<LstmStepCache> caches;
    LstmStepState final_state;
};

LstmForwardResult lstm_forward(const LstmLayerParams& params, std::span<const Vector> inputs,
                               const LstmStepState& initial, bool return_sequences);

struct LstmBackwardResult {
    LstmLayerParams param_grads;
    std::vector<Vector> input_grads;
    LstmStepState initial_state_grads;
};

// grad_outputs holds either one gradient per timestep or a single gradient
// for the final hidden state (the return_sequences = false case).
LstmBackwardResult lstm_backward(const LstmLayerParams& params, std::span<const LstmStepCache> caches,
                                 std::span<const Vector> grad_outputs);

// Same as lstm_backward but adds parameter gradients into `param_grads`
// and writes input gradients into `input_grads`. Returns the h0/c0 gradients.
LstmStepState lstm_backward_accumulate(const LstmLayerParams& params,
                                       std::span<const LstmStepCache> caches,
                                       std::span<const Vector> grad_outputs,
                                       LstmLayerParams& param_grads,
                                       std::vector<Vector>& input_grads);

} // namespace lstmae
