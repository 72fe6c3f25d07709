#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lstmae/core_math.hpp"
#include "lstmae/lstm.hpp"
#include "lstmae/windowing.hpp"

namespace lstmae {

// Encoder unit counts, outermost first; the last entry is the latent size.
// The decoder mirrors them in reverse. Tags look like "1x16" or "3x128-64-16".
struct Architecture {
    std::vector<std::size_t> units{16};

    static Architecture parse(std::string_view tag);
    std::string tag() const;
    std::size_t latent_size() const { return units.back(); }

    bool operator==(const Architecture&) const = default;
};

struct ModelParameters {
    std::vector<LstmLayerParams> encoder;
    std::vector<LstmLayerParams> decoder;
    Matrix head_weight;  // features x decoder hidden
    Vector head_bias;    // features

    ModelParameters zeros_like() const;
    void set_zero();

    std::vector<std::span<double>> tensors();
    std::vector<std::span<const double>> tensors() const;
    // Same order as tensors(), e.g. "encoder.0.W_f", "head.bias".
    std::vector<std::string> tensor_names() const;

    bool operator==(const ModelParameters&) const = default;
};

struct SeqAutoencoderModel {
    Architecture architecture;
    std::size_t timesteps = 10;
    std::size_t features = 1;
    double dropout_rate = 0.2;
    std::uint64_t seed = 0;
    ModelParameters params;

    // Glorot-initialized model for the given architecture.
    static SeqAutoencoderModel create(const Architecture& arch, std::size_t timesteps, std::size_t features,
                                      double dropout_rate, std::uint64_t seed);

    // Checks that layer sizes chain encoder -> latent -> decoder -> head and
    // agree with the architecture tag.
    void validate() const;

    bool operator==(const SeqAutoencoderModel&) const = default;
};

struct TrainConfig {
    double learning_rate = 0.001;
    double dropout = 0.2;
    std::size_t batch_size = 64;
    std::size_t epochs = 30;
    double validation_fraction = 0.10;
    std::uint64_t seed = 42;

    void validate() const;
};

struct EpochLoss {
    double train_loss = 0.0;
    std::optional<double> val_loss;  // absent when the validation split is empty
};

struct TrainTrace {
    std::vector<EpochLoss> epochs;
    bool operator==(const TrainTrace& other) const;
};

struct TrainResult {
    SeqAutoencoderModel model;
    TrainTrace trace;
};

// T x m reconstruction. With train_mode set, inverted dropout is applied to the
// latent vector and to the decoder output sequence using masks drawn from rng.
Matrix forward(const SeqAutoencoderModel& model, const Matrix& window, bool train_mode, Rng& rng);
// Inference path: no dropout.
Matrix reconstruct(const SeqAutoencoderModel& model, const Matrix& window);

// Mean absolute error over all T x m entries.
double reconstruction_mae(const Matrix& reconstruction, const Matrix& window);

// Runs one forward pass and adds scale * d(MAE)/d(params) into grads.
// Returns the window's MAE.
double mae_loss_and_gradient(const SeqAutoencoderModel& model, const Matrix& window, bool train_mode, Rng& rng,
                             ModelParameters& grads, double scale = 1.0);

// Mini-batch Adam on mean per-window MAE. The final validation_fraction of
// windows (chronological tail) is held out and scored without dropout.
TrainResult train(SeqAutoencoderModel model, const WindowSet& windows, const TrainConfig& cfg);

inline constexpr int model_format_version = 1;

std::string serialize_model(const SeqAutoencoderModel& model);
SeqAutoencoderModel deserialize_model(std::string_view text);
void save_model(const SeqAutoencoderModel& model, const std::filesystem::path& path);
SeqAutoencoderModel load_model(const std::filesystem::path& path);

} // namespace lstmae
