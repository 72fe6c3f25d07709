#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lstmae/cli.hpp"
#include "lstmae/timeseries_csv.hpp"

namespace lstmae {

namespace {

using nlohmann::json;

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
    out << text;
    if (!out) fail(ErrorKind::io, "failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorKind::malformed_file, path.string() + ": " + e.what());
    }
}

template <typename T>
T json_field(const json& doc, const char* key, const std::filesystem::path& path) {
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(ErrorKind::malformed_file, path.string() + ": field '" + key + "': " + e.what());
    }
}

void ensure_out_dir(const RunConfig& cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    if (ec) fail(ErrorKind::io, "cannot create output directory " + cfg.out.string() + ": " + ec.message());
}

json metric_json(const Metric& m) { return m ? json(*m) : json(nullptr); }

ScalerParams read_scaler(const RunConfig& cfg) {
    const auto path = cfg.out / "scaler.json";
    const json doc = read_json(path);
    ScalerParams s;
    s.mean = json_field<double>(doc, "mean", path);
    s.stddev = json_field<double>(doc, "stddev", path);
    if (!(s.stddev > 0.0)) fail(ErrorKind::degenerate_scale, path.string() + ": stddev must be positive");
    return s;
}

std::set<Timestamp> read_truth(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open " + path.string());
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line) || (line != "index,timestamp" && line != "index,timestamp\r")) {
        fail(ErrorKind::parse, path.string() + ":1: expected header index,timestamp");
    }
    std::set<Timestamp> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        const auto ts = comma == std::string::npos ? std::nullopt : parse_timestamp(std::string_view(line).substr(comma + 1));
        if (!ts) fail(ErrorKind::parse, path.string() + ":" + std::to_string(line_no) + ": bad row '" + line + "'");
        out.insert(*ts);
    }
    return out;
}

std::vector<double> scaled_values(const TimeSeries& s, const ScalerParams& scaler) {
    return apply_scaler(scaler, s.values);
}

EvaluationSummary evaluate_report(const DetectionReport& report, const std::filesystem::path& truth) {
    std::vector<int> labels;
    if (!truth.empty()) {
        const auto anomalies = read_truth(truth);
        labels.reserve(report.timestamps.size());
        for (Timestamp ts : report.timestamps) labels.push_back(anomalies.count(ts) ? 1 : 0);
    } else if (report.labels) {
        labels = *report.labels;
    } else {
        fail(ErrorKind::validation, "report has no labels and no ground-truth file was given");
    }
    EvaluationSummary s;
    s.counts = confusion(labels, report.verdicts);
    s.metrics = prf1_accuracy(s.counts);
    const bool both_classes = s.counts.tp + s.counts.fn > 0 && s.counts.tn + s.counts.fp > 0;
    if (both_classes) s.roc = roc_auc(labels, report.loss);
    return s;
}

json evaluation_json(const EvaluationSummary& s) {
    json doc;
    doc["tp"] = s.counts.tp;
    doc["tn"] = s.counts.tn;
    doc["fp"] = s.counts.fp;
    doc["fn"] = s.counts.fn;
    doc["precision"] = metric_json(s.metrics.precision);
    doc["recall"] = metric_json(s.metrics.recall);
    doc["fpr"] = metric_json(s.metrics.fpr);
    doc["f1"] = metric_json(s.metrics.f1);
    doc["accuracy"] = metric_json(s.metrics.accuracy);
    doc["auc"] = s.roc ? json(s.roc->auc) : json(nullptr);
    doc["percent"] = {{"accuracy", format_percent(s.metrics.accuracy)},
                      {"precision", format_percent(s.metrics.precision)},
                      {"recall", format_percent(s.metrics.recall)},
                      {"f1", format_percent(s.metrics.f1)}};
    return doc;
}

void print_metrics(const EvaluationSummary& s, std::ostream& log) {
    log << "TP " << s.counts.tp << "  TN " << s.counts.tn << "  FP " << s.counts.fp << "  FN " << s.counts.fn << '\n'
        << "accuracy  " << format_percent(s.metrics.accuracy) << '\n'
        << "precision " << format_percent(s.metrics.precision) << '\n'
        << "recall    " << format_percent(s.metrics.recall) << '\n'
        << "f1        " << format_percent(s.metrics.f1) << '\n'
        << "auc       " << (s.roc ? format_double(s.roc->auc) : std::string("undefined")) << '\n';
}

struct TrainedDetector {
    SeqAutoencoderModel model;
    TrainTrace trace;
    Threshold threshold;
    std::size_t train_flagged = 0;
};

SeqAutoencoderModel train_model(const RunConfig& cfg, const TimeSeries& train, const ScalerParams& scaler,
                                std::size_t window, const Architecture& arch, TrainTrace& trace) {
    const WindowSet windows = make_windows(scaled_values(train, scaler), window);
    auto model = SeqAutoencoderModel::create(arch, window, 1, cfg.train.dropout, cfg.seed());
    auto result = lstmae::train(std::move(model), windows, cfg.train);
    trace = std::move(result.trace);
    return std::move(result.model);
}

// Threshold from the training windows, then a re-detection pass over the same
// data, which must flag nothing.
std::pair<Threshold, std::size_t> fit_and_check(const RunConfig& cfg, const SeqAutoencoderModel& model,
                                                const TimeSeries& train, const ScalerParams& scaler) {
    const WindowSet windows = make_windows(scaled_values(train, scaler), model.timesteps);
    Threshold threshold = fit_threshold(model, windows, cfg.parallel_windows);
    const auto train_report = detect(model, threshold, train, scaler, cfg.parallel_windows);
    const std::size_t flagged = train_report.flagged();
    if (flagged != 0) {
        fail(ErrorKind::invariant, std::to_string(flagged) + " training points exceed the threshold fitted on them");
    }
    return {threshold, flagged};
}

} // namespace

void cmd_synth(const RunConfig& cfg, std::ostream& log) {
    ensure_out_dir(cfg);
    const SyntheticSeries synth = generate_synthetic(cfg.synth, cfg.seed());
    write_series_csv(synth.series, cfg.out / "synth.csv");

    std::ostringstream truth;
    truth << "index,timestamp\n";
    for (std::size_t i : synth.anomaly_indices) {
        truth << i << ',' << format_timestamp(synth.series.timestamps[i]) << '\n';
    }
    write_text(cfg.out / "synth_anomalies.csv", truth.str());
    log << "wrote " << synth.series.size() << " points with " << synth.anomaly_indices.size()
        << " injected anomalies to " << (cfg.out / "synth.csv").string() << '\n';
}

PreprocessSummary cmd_preprocess(const RunConfig& cfg, std::ostream& log) {
    if (cfg.input.empty()) fail(ErrorKind::config, "preprocess needs --input");
    ensure_out_dir(cfg);
    const auto records = read_records_csv(cfg.input);
    const CleanResult cleaned = clean(records, cfg.strict_nan);
    const TimeSeries& series = cleaned.series;

    Timestamp split;
    if (cfg.split) {
        split = *cfg.split;
    } else {
        const auto idx = static_cast<std::size_t>(std::floor(static_cast<double>(series.size()) * cfg.split_fraction));
        split = series.timestamps[std::min(idx, series.size() - 1)];
    }
    const TrainTestSplit parts = build_train_test(series, split, cfg.sigma_k);
    const ScalerParams scaler = fit_scaler(parts.train.values);

    PreprocessSummary s;
    s.clean = cleaned.report;
    s.train_kept = parts.train.size();
    s.train_dropped = parts.train_dropped;
    s.test_rows = parts.test.size();
    s.test_anomalies = static_cast<std::size_t>(std::count(parts.test.labels->begin(), parts.test.labels->end(), 1));
    s.split = split;
    s.rule = parts.rule;
    s.scaler = scaler;

    write_series_csv(parts.train, cfg.out / "train.csv");
    write_series_csv(parts.test, cfg.out / "test.csv");
    write_json(cfg.out / "scaler.json", json{{"mean", scaler.mean}, {"stddev", scaler.stddev}});
    json summary;
    summary["input_rows"] = s.clean.input_rows;
    summary["duplicates_removed"] = s.clean.duplicates_removed;
    summary["invalid_timestamp_removed"] = s.clean.invalid_timestamp_removed;
    summary["missing_values_zeroed"] = s.clean.missing_values_zeroed;
    summary["missing_values_dropped"] = s.clean.missing_values_dropped;
    summary["cleaned_rows"] = s.clean.output_rows;
    summary["split"] = format_timestamp(split);
    summary["sigma_rule"] = {{"mean", parts.rule.mean}, {"sigma", parts.rule.sigma}, {"k", parts.rule.k},
                             {"lower", parts.rule.lower()}, {"upper", parts.rule.upper()}};
    summary["train_kept"] = s.train_kept;
    summary["train_dropped"] = s.train_dropped;
    summary["test_rows"] = s.test_rows;
    summary["test_anomalies"] = s.test_anomalies;
    write_json(cfg.out / "preprocess_summary.json", summary);

    log << "input rows:                " << s.clean.input_rows << '\n'
        << "duplicates removed:        " << s.clean.duplicates_removed << '\n'
        << "invalid timestamps removed:" << ' ' << s.clean.invalid_timestamp_removed << '\n'
        << "missing values set to 0:   " << s.clean.missing_values_zeroed << '\n'
        << "missing values dropped:    " << s.clean.missing_values_dropped << '\n'
        << "split at:                  " << format_timestamp(split) << '\n'
        << "normal band:               [" << format_double(parts.rule.lower()) << ", "
        << format_double(parts.rule.upper()) << "]\n"
        << "train rows kept:           " << s.train_kept << '\n'
        << "train rows outside band:   " << s.train_dropped << '\n'
        << "test rows:                 " << s.test_rows << " (" << s.test_anomalies << " labeled anomalous)\n";
    return s;
}

TrainTrace cmd_train(const RunConfig& cfg, std::ostream& log) {
    ensure_out_dir(cfg);
    const TimeSeries train = read_series_csv(cfg.out / "train.csv");
    const ScalerParams scaler = read_scaler(cfg);
    TrainTrace trace;
    const auto model = train_model(cfg, train, scaler, cfg.window, cfg.arch, trace);
    save_model(model, cfg.model_path());

    std::ostringstream csv;
    csv << "epoch,train_loss,val_loss\n";
    for (std::size_t e = 0; e < trace.epochs.size(); ++e) {
        const auto& ep = trace.epochs[e];
        csv << e + 1 << ',' << format_double(ep.train_loss) << ','
            << (ep.val_loss ? format_double(*ep.val_loss) : std::string()) << '\n';
    }
    write_text(cfg.out / "train_trace.csv", csv.str());
    if (!trace.epochs.empty()) {
        log << "trained " << trace.epochs.size() << " epochs, final train loss "
            << format_double(trace.epochs.back().train_loss) << '\n';
    }
    log << "model written to " << cfg.model_path().string() << '\n';
    return trace;
}

DetectionReport cmd_detect(const RunConfig& cfg, std::ostream& log) {
    ensure_out_dir(cfg);
    const SeqAutoencoderModel model = load_model(cfg.model_path());
    const TimeSeries train = read_series_csv(cfg.out / "train.csv");
    const TimeSeries test = read_series_csv(cfg.out / "test.csv");
    const ScalerParams scaler = read_scaler(cfg);

    const auto [threshold, train_flagged] = fit_and_check(cfg, model, train, scaler);
    DetectionReport report = detect(model, threshold, test, scaler, cfg.parallel_windows);
    write_report_csv(report, cfg.out / "report.csv");

    const json threshold_doc = {{"eta", threshold.eta},
                                {"training_points", threshold.training_points},
                                {"model_fingerprint", threshold.model_fingerprint},
                                {"window_len", threshold.window_len}};
    write_json(cfg.out / "threshold.json", threshold_doc);

    json summary;
    summary["threshold"] = threshold_doc;
    summary["test_points"] = report.loss.size();
    summary["flagged"] = report.flagged();
    summary["train_points"] = train.size();
    summary["train_flagged"] = train_flagged;
    if (report.confusion) {
        EvaluationSummary eval;
        eval.counts = *report.confusion;
        eval.metrics = prf1_accuracy(eval.counts);
        summary["labels"] = evaluation_json(eval);
    }
    write_json(cfg.out / "report_summary.json", summary);

    log << "threshold eta = " << format_double(threshold.eta) << " (max training loss over " << train.size()
        << " points)\n"
        << "flagged " << report.flagged() << " of " << report.loss.size() << " test points; " << train_flagged
        << " of " << train.size() << " training points\n";
    return report;
}

EvaluationSummary cmd_evaluate(const RunConfig& cfg, std::ostream& log) {
    const auto threshold_path = cfg.out / "threshold.json";
    const double eta = json_field<double>(read_json(threshold_path), "eta", threshold_path);
    const DetectionReport report = read_report_csv(cfg.out / "report.csv", eta);
    const EvaluationSummary s = evaluate_report(report, cfg.truth);

    json doc = evaluation_json(s);
    doc["eta"] = eta;
    doc["label_source"] = cfg.truth.empty() ? std::string("sigma_rule") : cfg.truth.filename().string();
    write_json(cfg.out / "metrics.json", doc);

    if (s.roc) {
        std::ostringstream csv;
        csv << "threshold,fpr,tpr\n";
        for (const RocPoint& p : s.roc->points) {
            csv << (std::isinf(p.threshold) ? std::string("inf") : format_double(p.threshold)) << ','
                << format_double(p.fpr) << ',' << format_double(p.tpr) << '\n';
        }
        csv << "# auc=" << format_double(s.roc->auc) << '\n';
        write_text(cfg.out / "roc.csv", csv.str());
    }
    print_metrics(s, log);
    return s;
}

std::vector<SweepRow> cmd_sweep(const RunConfig& cfg, std::ostream& log) {
    ensure_out_dir(cfg);
    const TimeSeries train = read_series_csv(cfg.out / "train.csv");
    const TimeSeries test = read_series_csv(cfg.out / "test.csv");
    const ScalerParams scaler = read_scaler(cfg);

    std::vector<SweepRow> rows;
    std::ostringstream csv;
    csv << "window,architecture,eta,tp,tn,fp,fn,accuracy,precision,recall,f1,auc\n";
    for (std::size_t window : cfg.sweep_windows) {
        for (const Architecture& arch : cfg.sweep_archs) {
            TrainTrace trace;
            const auto model = train_model(cfg, train, scaler, window, arch, trace);
            const auto [threshold, train_flagged] = fit_and_check(cfg, model, train, scaler);
            const DetectionReport report = detect(model, threshold, test, scaler, cfg.parallel_windows);

            SweepRow row{window, arch, threshold.eta, evaluate_report(report, cfg.truth)};
            const auto& m = row.eval.metrics;
            csv << window << ',' << arch.tag() << ',' << format_double(row.eta) << ',' << row.eval.counts.tp << ','
                << row.eval.counts.tn << ',' << row.eval.counts.fp << ',' << row.eval.counts.fn << ','
                << format_percent(m.accuracy) << ',' << format_percent(m.precision) << ',' << format_percent(m.recall)
                << ',' << format_percent(m.f1) << ','
                << (row.eval.roc ? format_double(row.eval.roc->auc) : std::string("undefined")) << '\n';
            log << "T=" << window << " arch=" << arch.tag() << " f1=" << format_percent(m.f1)
                << " accuracy=" << format_percent(m.accuracy) << '\n';
            rows.push_back(std::move(row));
        }
    }
    write_text(cfg.out / "sweep.csv", csv.str());
    return rows;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"LSTM autoencoder anomaly detection for univariate time series", "lstmae"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::map<std::string, std::string> flag_values;
    bool strict_nan = false;

    const std::vector<std::pair<std::string, std::string>> listed = {
        {"input", "Input CSV (timestamp,value[,label])"},
        {"model", "Model file path (default <out>/model.json)"},
        {"out", "Output directory"},
        {"window", "Sliding window length T"},
        {"epochs", "Training epochs"},
        {"seed", "Seed for every random stream"},
        {"sigma_k", "Sigma multiplier of the normal band"},
        {"arch", "Architecture: 1x16, 2x64-16 or 3x128-64-16"},
    };

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "Flat key = value configuration file");
        for (const auto& key : config_keys()) {
            if (key == "strict_nan") continue;
            std::string flag = key;
            std::replace(flag.begin(), flag.end(), '_', '-');
            std::string help = "Config key " + key;
            for (const auto& [k, h] : listed) {
                if (k == key) help = h;
            }
            sub->add_option("--" + flag, flag_values[key], help);
        }
        sub->add_flag("--strict-nan", strict_nan, "Drop rows with a missing value instead of zeroing them");
    };

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"synth", "Generate a synthetic series with injected spikes"},
        {"preprocess", "Clean, split, label and fit the scaler"},
        {"train", "Train the autoencoder on the training split"},
        {"detect", "Fit the threshold and score the test split"},
        {"evaluate", "Confusion counts, metrics and ROC for a report"},
        {"sweep", "Compare window lengths and architectures"},
    };
    for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) load_config_file(cfg, config_path);
        for (const auto& [key, value] : flag_values) {
            CLI::App* sub = app.get_subcommands().front();
            std::string flag = key;
            std::replace(flag.begin(), flag.end(), '_', '-');
            if (sub->count("--" + flag) > 0) apply_setting(cfg, key, value);
        }
        if (strict_nan) cfg.strict_nan = true;

        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "synth") {
            cmd_synth(cfg, out);
        } else if (name == "preprocess") {
            cmd_preprocess(cfg, out);
        } else if (name == "train") {
            cmd_train(cfg, out);
        } else if (name == "detect") {
            cmd_detect(cfg, out);
        } else if (name == "evaluate") {
            cmd_evaluate(cfg, out);
        } else if (name == "sweep") {
            cmd_sweep(cfg, out);
        }
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 4;
    }
    return 0;
}

} // namespace lstmae
