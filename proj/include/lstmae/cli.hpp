#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lstmae/detector.hpp"
#include "lstmae/metrics.hpp"
#include "lstmae/pipeline.hpp"
#include "lstmae/seq_autoencoder.hpp"

namespace lstmae {

struct RunConfig {
    std::filesystem::path input;
    std::filesystem::path model;  // defaults to <out>/model.json
    std::filesystem::path out = "out";
    std::filesystem::path truth;  // optional ground-truth index file for evaluate/sweep

    TrainConfig train;
    std::size_t window = 10;
    double sigma_k = 2.0;
    Architecture arch;
    bool strict_nan = false;

    std::optional<Timestamp> split;
    double split_fraction = 0.75;

    std::vector<std::size_t> sweep_windows{10, 20};
    std::vector<Architecture> sweep_archs{Architecture{}};

    SyntheticProfile synth;
    std::size_t parallel_windows = 1;

    std::uint64_t seed() const noexcept { return train.seed; }
    std::filesystem::path model_path() const { return model.empty() ? out / "model.json" : model; }
};

// Applies one `key = value` setting; unknown keys and bad values are config errors.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);
// Flat key-value file: one `key = value` per line, '#' starts a comment.
void load_config_file(RunConfig& cfg, const std::filesystem::path& path);
std::vector<std::string> config_keys();

// Exit status for a failure kind: 2 config, 3 data, 4 internal.
int exit_code_for(ErrorKind kind);

struct PreprocessSummary {
    CleanReport clean;
    std::size_t train_kept = 0;
    std::size_t train_dropped = 0;
    std::size_t test_rows = 0;
    std::size_t test_anomalies = 0;
    Timestamp split = 0;
    SigmaRule rule;
    ScalerParams scaler;
};

struct EvaluationSummary {
    ConfusionCounts counts;
    ClassificationMetrics metrics;
    std::optional<RocCurve> roc;
};

struct SweepRow {
    std::size_t window = 0;
    Architecture arch;
    double eta = 0.0;
    EvaluationSummary eval;
};

void cmd_synth(const RunConfig& cfg, std::ostream& log);
PreprocessSummary cmd_preprocess(const RunConfig& cfg, std::ostream& log);
TrainTrace cmd_train(const RunConfig& cfg, std::ostream& log);
DetectionReport cmd_detect(const RunConfig& cfg, std::ostream& log);
EvaluationSummary cmd_evaluate(const RunConfig& cfg, std::ostream& log);
std::vector<SweepRow> cmd_sweep(const RunConfig& cfg, std::ostream& log);

// Full command-line entry point; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace lstmae
