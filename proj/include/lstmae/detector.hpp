#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lstmae/metrics.hpp"
#include "lstmae/pipeline.hpp"
#include "lstmae/seq_autoencoder.hpp"
#include "lstmae/windowing.hpp"

namespace lstmae {

// Maps a T x m window to its reconstruction. Must be safe to call
// concurrently when used with more than one thread.
using Reconstructor = std::function<Matrix(const Matrix&)>;

Reconstructor model_reconstructor(const SeqAutoencoderModel& model);

// Reconstructs every window; threads > 1 splits the windows into contiguous
// chunks, results land in window order.
std::vector<Matrix> reconstruct_windows(const Reconstructor& reconstructor, const WindowSet& windows,
                                        std::size_t threads = 1);

PointLossVector score_windows(const Reconstructor& reconstructor, const WindowSet& windows,
                              std::size_t threads = 1);

struct Threshold {
    double eta = 0.0;  // normalized units
    std::size_t training_points = 0;
    std::string model_fingerprint;
    std::size_t window_len = 0;
};

// Hex FNV-1a digest of the serialized model.
std::string model_fingerprint(const SeqAutoencoderModel& model);

// eta = max per-point loss over the windows' source points.
Threshold fit_threshold(const Reconstructor& reconstructor, const WindowSet& train_windows, std::size_t threads = 1);
Threshold fit_threshold(const SeqAutoencoderModel& model, const WindowSet& train_windows, std::size_t threads = 1);

// verdict(p) = 1 iff loss(p) > eta.
std::vector<int> classify(std::span<const double> losses, double eta);

struct DetectionReport {
    std::vector<Timestamp> timestamps;
    std::vector<double> values;  // raw units
    PointLossVector loss;
    double eta = 0.0;
    std::vector<int> verdicts;
    std::optional<std::vector<int>> labels;
    std::optional<ConfusionCounts> confusion;

    std::size_t flagged() const;
};

// Scale, window, reconstruct, score and compare against eta.
DetectionReport detect(const Reconstructor& reconstructor, const Threshold& threshold, const TimeSeries& series,
                       const ScalerParams& scaler, std::size_t window_len, std::size_t threads = 1);
DetectionReport detect(const SeqAutoencoderModel& model, const Threshold& threshold, const TimeSeries& series,
                       const ScalerParams& scaler, std::size_t threads = 1);

// `timestamp,value,loss,verdict[,label]`
void write_report_csv(const DetectionReport& report, const std::filesystem::path& path);
// Reads a report file back; eta is not stored per row, so the caller supplies it.
DetectionReport read_report_csv(const std::filesystem::path& path, double eta);

} // namespace lstmae
