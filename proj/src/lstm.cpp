#include "lstmae/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>

namespace lstmae {

LstmLayerParams LstmLayerParams::zeros(std::size_t input_size, std::size_t hidden_size) {
    if (input_size == 0 || hidden_size == 0) {
        fail(ErrorKind::shape, "LSTM layer needs nonzero sizes, got input " + std::to_string(input_size) +
                                   " hidden " + std::to_string(hidden_size));
    }
    LstmLayerParams p;
    p.input_size = input_size;
    p.hidden_size = hidden_size;
    for (std::size_t g = 0; g < gate_count; ++g) {
        p.weights[g] = Matrix(hidden_size, hidden_size + input_size);
        p.biases[g] = Vector(hidden_size, 0.0);
    }
    return p;
}

LstmLayerParams LstmLayerParams::glorot(std::size_t input_size, std::size_t hidden_size, Rng& rng) {
    LstmLayerParams p = zeros(input_size, hidden_size);
    for (auto& w : p.weights) w = glorot_init(hidden_size, hidden_size + input_size, rng);
    return p;
}

void LstmLayerParams::validate() const {
    for (std::size_t g = 0; g < gate_count; ++g) {
        if (weights[g].rows() != hidden_size || weights[g].cols() != concat_size()) {
            fail(ErrorKind::shape, "LSTM gate " + std::to_string(g) + " weight is " + weights[g].shape_string() +
                                       ", expected " + std::to_string(hidden_size) + "x" +
                                       std::to_string(concat_size()));
        }
        if (biases[g].size() != hidden_size) {
            fail(ErrorKind::shape, "LSTM gate " + std::to_string(g) + " bias has length " +
                                       std::to_string(biases[g].size()) + ", expected " +
                                       std::to_string(hidden_size));
        }
    }
}

void LstmLayerParams::set_zero() {
    for (auto& w : weights) std::fill(w.data().begin(), w.data().end(), 0.0);
    for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
}

std::vector<std::span<double>> LstmLayerParams::tensors() {
    std::vector<std::span<double>> out;
    for (auto& w : weights) out.emplace_back(w.data());
    for (auto& b : biases) out.emplace_back(b);
    return out;
}

std::vector<std::span<const double>> LstmLayerParams::tensors() const {
    std::vector<std::span<const double>> out;
    for (const auto& w : weights) out.emplace_back(w.data());
    for (const auto& b : biases) out.emplace_back(b);
    return out;
}

namespace {

struct NoOverride {};

template <typename Override>
LstmStepResult step_impl(const LstmLayerParams& params, const LstmStepState& prev,
                         std::span<const double> x, const Override& gates) {
    const std::size_t hidden = params.hidden_size;
    if (x.size() != params.input_size) {
        fail(ErrorKind::shape, "LSTM input has length " + std::to_string(x.size()) + ", expected " +
                                   std::to_string(params.input_size));
    }
    if (prev.hidden.size() != hidden || prev.cell.size() != hidden) {
        fail(ErrorKind::shape, "LSTM state has sizes " + std::to_string(prev.hidden.size()) + "/" +
                                   std::to_string(prev.cell.size()) + ", expected " + std::to_string(hidden));
    }

    LstmStepResult result;
    LstmStepCache& cache = result.cache;
    cache.concat.reserve(params.concat_size());
    cache.concat.assign(prev.hidden.begin(), prev.hidden.end());
    cache.concat.insert(cache.concat.end(), x.begin(), x.end());

    for (std::size_t g = 0; g < gate_count; ++g) {
        Vector pre = params.biases[g];
        matvec_accumulate(params.weights[g], cache.concat, pre);
        cache.activations[g] = (g == Gate::candidate) ? tanh(pre) : sigmoid(pre);
    }

    if constexpr (!std::is_same_v<Override, NoOverride>) {
        if (gates.forget) cache.activations[Gate::forget] = *gates.forget;
        if (gates.input) cache.activations[Gate::input] = *gates.input;
        if (gates.output) cache.activations[Gate::output] = *gates.output;
    }

    const Vector& f = cache.activations[Gate::forget];
    const Vector& i = cache.activations[Gate::input];
    const Vector& c_tilde = cache.activations[Gate::candidate];
    const Vector& o = cache.activations[Gate::output];

    cache.cell_prev = prev.cell;
    cache.cell.resize(hidden);
    cache.cell_tanh.resize(hidden);
    result.state.hidden.resize(hidden);
    for (std::size_t k = 0; k < hidden; ++k) {
        cache.cell[k] = f[k] * prev.cell[k] + i[k] * c_tilde[k];
        cache.cell_tanh[k] = std::tanh(cache.cell[k]);
        result.state.hidden[k] = o[k] * cache.cell_tanh[k];
    }
    result.state.cell = cache.cell;
    return result;
}

} // namespace

LstmStepResult lstm_step(const LstmLayerParams& params, const LstmStepState& prev,
                         std::span<const double> x) {
    return step_impl(params, prev, x, NoOverride{});
}

#ifdef LSTMAE_TEST_HOOKS
LstmStepResult lstm_step_with_override(const LstmLayerParams& params, const LstmStepState& prev,
                                       std::span<const double> x, const GateOverride& gates) {
    return step_impl(params, prev, x, gates);
}
#endif

LstmForwardResult lstm_forward(const LstmLayerParams& params, std::span<const Vector> inputs,
                               const LstmStepState& initial, bool return_sequences) {
    if (inputs.empty()) fail(ErrorKind::empty_input, "lstm_forward needs at least one timestep");

    LstmForwardResult result;
    result.caches.reserve(inputs.size());
    if (return_sequences) result.outputs.reserve(inputs.size());

    LstmStepState state = initial;
    for (const Vector& x : inputs) {
        LstmStepResult step = lstm_step(params, state, x);
        state = std::move(step.state);
        result.caches.push_back(std::move(step.cache));
        if (return_sequences) result.outputs.push_back(state.hidden);
    }
    if (!return_sequences) result.outputs.push_back(state.hidden);
    result.final_state = std::move(state);
    return result;
}

LstmStepState lstm_backward_accumulate(const LstmLayerParams& params,
                                       std::span<const LstmStepCache> caches,
                                       std::span<const Vector> grad_outputs,
                                       LstmLayerParams& param_grads,
                                       std::vector<Vector>& input_grads) {
    const std::size_t steps = caches.size();
    const std::size_t hidden = params.hidden_size;
    if (steps == 0) fail(ErrorKind::empty_input, "lstm_backward needs at least one cached step");
    const bool per_step = grad_outputs.size() == steps;
    if (!per_step && grad_outputs.size() != 1) {
        fail(ErrorKind::shape, "lstm_backward got " + std::to_string(grad_outputs.size()) +
                                   " output gradients for " + std::to_string(steps) + " steps");
    }
    for (const Vector& g : grad_outputs) {
        if (g.size() != hidden) {
            fail(ErrorKind::shape, "output gradient has length " + std::to_string(g.size()) + ", expected " +
                                       std::to_string(hidden));
        }
    }
    for (const LstmStepCache& c : caches) {
        if (c.concat.size() != params.concat_size() || c.cell.size() != hidden) {
            fail(ErrorKind::shape, "LSTM cache does not match layer of hidden size " + std::to_string(hidden));
        }
    }
    if (param_grads.hidden_size != hidden || param_grads.input_size != params.input_size) {
        fail(ErrorKind::shape, "gradient accumulator does not match LSTM layer shape");
    }

    input_grads.assign(steps, Vector(params.input_size, 0.0));

    Vector dh_next(hidden, 0.0);
    Vector dc_next(hidden, 0.0);
    std::array<Vector, gate_count> dpre;
    for (auto& d : dpre) d.resize(hidden);
    Vector dconcat(params.concat_size());

    for (std::size_t t = steps; t-- > 0;) {
        const LstmStepCache& c = caches[t];
        const Vector& f = c.activations[Gate::forget];
        const Vector& i = c.activations[Gate::input];
        const Vector& c_tilde = c.activations[Gate::candidate];
        const Vector& o = c.activations[Gate::output];

        for (std::size_t k = 0; k < hidden; ++k) {
            double dh = dh_next[k];
            if (per_step) {
                dh += grad_outputs[t][k];
            } else if (t == steps - 1) {
                dh += grad_outputs[0][k];
            }
            const double dc = dc_next[k] + dh * o[k] * (1.0 - c.cell_tanh[k] * c.cell_tanh[k]);
            dpre[Gate::output][k] = dh * c.cell_tanh[k] * o[k] * (1.0 - o[k]);
            dpre[Gate::input][k] = dc * c_tilde[k] * i[k] * (1.0 - i[k]);
            dpre[Gate::candidate][k] = dc * i[k] * (1.0 - c_tilde[k] * c_tilde[k]);
            dpre[Gate::forget][k] = dc * c.cell_prev[k] * f[k] * (1.0 - f[k]);
            dc_next[k] = dc * f[k];
        }

        std::fill(dconcat.begin(), dconcat.end(), 0.0);
        for (std::size_t g = 0; g < gate_count; ++g) {
            outer_accumulate(param_grads.weights[g], dpre[g], c.concat);
            for (std::size_t k = 0; k < hidden; ++k) param_grads.biases[g][k] += dpre[g][k];
            matvec_transposed_accumulate(params.weights[g], dpre[g], dconcat);
        }
        std::copy(dconcat.begin(), dconcat.begin() + static_cast<std::ptrdiff_t>(hidden), dh_next.begin());
        std::copy(dconcat.begin() + static_cast<std::ptrdiff_t>(hidden), dconcat.end(), input_grads[t].begin());
    }
    return {std::move(dh_next), std::move(dc_next)};
}

LstmBackwardResult lstm_backward(const LstmLayerParams& params, std::span<const LstmStepCache> caches,
                                 std::span<const Vector> grad_outputs) {
    LstmBackwardResult result;
    result.param_grads = LstmLayerParams::zeros(params.input_size, params.hidden_size);
    result.initial_state_grads =
        lstm_backward_accumulate(params, caches, grad_outputs, result.param_grads, result.input_grads);
    return result;
}

} // namespace lstmae
