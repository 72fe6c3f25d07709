#include <gtest/gtest.h>

#include <sstream>

#include "lstmae/cli.hpp"
#include "lstmae/timeseries_csv.hpp"
#include "oracles.hpp"

namespace lstmae {
namespace {

using testing::error_kind_of;
using testing::read_file;
using testing::write_file;

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string small_series_csv(std::size_t n, std::size_t duplicates) {
    std::string text = "timestamp,value\n";
    for (std::size_t i = 0; i < n; ++i) {
        const std::string line =
            format_timestamp(1514764800 + static_cast<Timestamp>(i) * 60) + "," + std::to_string(400 + (i * 37) % 100) + "\n";
        text += line;
        if (i < duplicates) text += line;
    }
    return text;
}

TEST(Config, DefaultsMatchPaperConfiguration) {
    const RunConfig cfg;
    EXPECT_EQ(cfg.window, 10u);
    EXPECT_EQ(cfg.sigma_k, 2.0);
    EXPECT_EQ(cfg.arch.tag(), "1x16");
    EXPECT_EQ(cfg.train.learning_rate, 0.001);
    EXPECT_EQ(cfg.train.dropout, 0.2);
    EXPECT_EQ(cfg.train.batch_size, 64u);
    EXPECT_EQ(cfg.train.epochs, 30u);
    EXPECT_EQ(cfg.train.validation_fraction, 0.10);
    EXPECT_EQ(cfg.sweep_windows, (std::vector<std::size_t>{10, 20}));
}

TEST(Config, FileParsing) {
    testing::TempDir dir("cfg");
    write_file(dir / "run.cfg", "# comment\nwindow = 20\n  arch=2x64-16  # trailing\n\nsweep_windows = 5, 10\nstrict_nan = true\n");
    RunConfig cfg;
    load_config_file(cfg, dir / "run.cfg");
    EXPECT_EQ(cfg.window, 20u);
    EXPECT_EQ(cfg.arch.tag(), "2x64-16");
    EXPECT_EQ(cfg.sweep_windows, (std::vector<std::size_t>{5, 10}));
    EXPECT_TRUE(cfg.strict_nan);
}

TEST(Config, BadKeysAndValuesAreConfigErrors) {
    RunConfig cfg;
    EXPECT_EQ(error_kind_of([&] { apply_setting(cfg, "windwo", "10"); }), ErrorKind::config);
    EXPECT_EQ(error_kind_of([&] { apply_setting(cfg, "window", "ten"); }), ErrorKind::config);
    EXPECT_EQ(error_kind_of([&] { apply_setting(cfg, "window", "0"); }), ErrorKind::config);
    EXPECT_EQ(error_kind_of([&] { apply_setting(cfg, "arch", "2x16"); }), ErrorKind::config);
    EXPECT_EQ(error_kind_of([&] { apply_setting(cfg, "split", "not a time"); }), ErrorKind::config);
    testing::TempDir dir("cfg");
    write_file(dir / "bad.cfg", "window 10\n");
    const auto msg = testing::error_message_of([&] { load_config_file(cfg, dir / "bad.cfg"); });
    EXPECT_NE(msg.find(":1:"), std::string::npos) << msg;
}

TEST(ExitCodes, DistinctPerFailureClass) {
    EXPECT_EQ(exit_code_for(ErrorKind::config), 2);
    EXPECT_EQ(exit_code_for(ErrorKind::parse), 3);
    EXPECT_EQ(exit_code_for(ErrorKind::insufficient_data), 3);
    EXPECT_EQ(exit_code_for(ErrorKind::invariant), 4);
}

TEST(Cli, UsageErrorsExitWithConfigCode) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"synth", "--arch", "9x9"}).code, 2);
    EXPECT_EQ(run({"synth", "--no-such-flag", "1"}).code, 2);
}

TEST(Cli, HelpListsEveryConfigKey) {
    const auto r = run({"train", "--help"});
    EXPECT_EQ(r.code, 0);
    for (auto key : config_keys()) {
        std::replace(key.begin(), key.end(), '_', '-');
        EXPECT_NE(r.out.find("--" + key), std::string::npos) << key;
    }
    EXPECT_NE(r.out.find("--config"), std::string::npos);
}

TEST(Cli, MissingHeaderIsParseErrorNamingHeader) {
    testing::TempDir dir("cli");
    write_file(dir / "in.csv", "2018-01-01T00:00:00,5\n");
    const auto r = run({"preprocess", "--input", (dir / "in.csv").string(), "--out", dir.path().string()});
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("timestamp,value"), std::string::npos) << r.err;
}

TEST(Cli, MissingInputIsDataError) {
    testing::TempDir dir("cli");
    const auto r = run({"preprocess", "--input", (dir / "absent.csv").string(), "--out", dir.path().string()});
    EXPECT_EQ(r.code, 3);
}

TEST(Cli, TenDuplicatesReported) {
    testing::TempDir dir("cli");
    write_file(dir / "in.csv", small_series_csv(200, 10));
    RunConfig cfg;
    cfg.input = dir / "in.csv";
    cfg.out = dir.path();
    std::ostringstream log;
    const auto summary = cmd_preprocess(cfg, log);
    EXPECT_EQ(summary.clean.duplicates_removed, 10u);
    EXPECT_NE(log.str().find("duplicates removed:        10"), std::string::npos) << log.str();
    EXPECT_EQ(summary.clean.input_rows, 210u);
    EXPECT_EQ(summary.clean.input_rows, summary.clean.duplicates_removed + summary.clean.invalid_timestamp_removed +
                                            summary.clean.missing_values_dropped + summary.train_kept +
                                            summary.train_dropped + summary.test_rows);
}

TEST(Cli, FlagsOverrideConfigFile) {
    testing::TempDir dir("cli");
    write_file(dir / "run.cfg", "out = " + (dir / "from_config").string() + "\nsynth_length = 300\n");
    const auto r = run({"synth", "--config", (dir / "run.cfg").string(), "--out", (dir / "from_flag").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(std::filesystem::exists(dir / "from_flag" / "synth.csv"));
    EXPECT_FALSE(std::filesystem::exists(dir / "from_config"));
    EXPECT_EQ(read_series_csv(dir / "from_flag" / "synth.csv").size(), 300u);
}

TEST(Cli, UnknownConfigKeyIsConfigError) {
    testing::TempDir dir("cli");
    write_file(dir / "run.cfg", "colour = blue\n");
    EXPECT_EQ(run({"synth", "--config", (dir / "run.cfg").string()}).code, 2);
}

TEST(Cli, PipelineIsByteDeterministic) {
    auto pipeline = [](const std::filesystem::path& out) {
        const std::vector<std::string> common{"--out", out.string(), "--synth-length", "800", "--window", "5",
                                              "--epochs", "2", "--arch", "1x4", "--seed", "9"};
        for (const char* cmd : {"synth", "preprocess", "train", "detect", "evaluate"}) {
            std::vector<std::string> args{cmd};
            args.insert(args.end(), common.begin(), common.end());
            if (std::string(cmd) == "preprocess") {
                args.push_back("--input");
                args.push_back((out / "synth.csv").string());
            }
            if (std::string(cmd) == "evaluate") {
                args.push_back("--truth");
                args.push_back((out / "synth_anomalies.csv").string());
            }
            const auto r = run(args);
            ASSERT_EQ(r.code, 0) << cmd << ": " << r.err;
        }
    };
    testing::TempDir a("det_a"), b("det_b");
    pipeline(a.path());
    pipeline(b.path());
    for (const char* f : {"synth.csv", "synth_anomalies.csv", "train.csv", "test.csv", "scaler.json", "model.json",
                          "train_trace.csv", "report.csv", "threshold.json", "metrics.json", "roc.csv"}) {
        ASSERT_TRUE(std::filesystem::exists(a / f)) << f;
        EXPECT_EQ(read_file(a / f), read_file(b / f)) << f;
    }
    const auto trace = read_file(a / "train_trace.csv");
    EXPECT_EQ(trace.substr(0, trace.find('\n')), "epoch,train_loss,val_loss");
}

TEST(Cli, SweepEmitsOneRowPerConfiguration) {
    testing::TempDir dir("sweep");
    RunConfig cfg;
    cfg.out = dir.path();
    cfg.synth.length = 800;
    cfg.train.epochs = 1;
    cfg.sweep_windows = {4, 6};
    cfg.sweep_archs = {Architecture::parse("1x3"), Architecture::parse("2x4-3")};
    std::ostringstream log;
    cmd_synth(cfg, log);
    cfg.input = dir / "synth.csv";
    cmd_preprocess(cfg, log);
    const auto rows = cmd_sweep(cfg, log);
    ASSERT_EQ(rows.size(), 4u);
    const auto csv = read_file(dir / "sweep.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "window,architecture,eta,tp,tn,fp,fn,accuracy,precision,recall,f1,auc");
}

} // namespace
} // namespace lstmae
