#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "magshape/cli.hpp"
#include "magshape/config.hpp"
#include "magshape/core/error.hpp"
#include "magshape/core/hash.hpp"
#include "magshape/core/strings.hpp"
#include "magshape/eval_stats.hpp"
#include "magshape/field_synth.hpp"
#include "magshape/io/calibration.hpp"
#include "magshape/io/dataset_io.hpp"
#include "magshape/io/frames.hpp"
#include "magshape/learn/learning_curve.hpp"
#include "magshape/learn/model_io.hpp"
#include "magshape/net/stream.hpp"
#include "magshape/pipeline.hpp"

namespace magshape::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

struct Log {
    bool json = false;

    void info(const std::string& msg) const { emit("info", msg); }
    void warn(const std::string& msg) const { emit("warn", msg); }

    void emit(const char* level, const std::string& msg) const {
        if (json) {
            ordered_json j{{"level", level}, {"msg", msg}};
            std::cerr << j.dump() << '\n';
        } else {
            std::cerr << '[' << level << "] " << msg << '\n';
        }
    }
};

// shared flags: --config / --seed / --output
struct CommonOpts {
    std::string config_path;
    std::string output_dir;
    uint64_t seed = 0;
    bool seed_given = false;
    bool log_json = false;

    Config resolve() const {
        Config cfg = config_path.empty() ? Config{} : Config::load(config_path);
        if (seed_given) {
            cfg.seed = seed;
            cfg.seed_set = true;
        }
        if (!output_dir.empty()) cfg.output_dir = output_dir;
        return cfg;
    }
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "Config file (JSON)");
    cmd->add_option("--seed", opts.seed, "Master seed (overrides the config)")
        ->each([&opts](const std::string&) { opts.seed_given = true; });
    cmd->add_option("--output", opts.output_dir, "Output directory");
    cmd->add_flag("--log-json", opts.log_json, "Machine-readable JSON logs on stderr");
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_data("cannot write " + path.string());
    out << content;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_data("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void dump_json(const fs::path& path, const ordered_json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_data("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

// ---- gen-data ----------------------------------------------------------

int cmd_gen_data(const CommonOpts& common) {
    Log log{common.log_json};
    Config cfg = common.resolve();
    const uint64_t seed = cfg.require_seed();
    const fs::path out_dir = cfg.output_dir;
    fs::create_directories(out_dir);

    ReconstructOptions opts = cfg.reconstruct_options();
    GeneratedDataset gen =
        generate_dataset(cfg.grid, cfg.synth, opts, cfg.frame_mode, seed, out_dir);
    if (gen.data.rows() == 0)
        log.warn("generated dataset is empty (duration or frame rate too small)");

    const fs::path dataset_path = out_dir / "dataset.csv";
    io::write_dataset_csv(dataset_path, gen.data);

    ordered_json manifest;
    manifest["seed"] = seed;
    manifest["n_scenarios"] = gen.scenarios.size();
    manifest["frames_per_scenario"] = cfg.grid.frames_per_scenario();
    manifest["rows"] = gen.data.rows();
    manifest["frame_mode"] = (cfg.frame_mode == FrameMode::Strain) ? "strain" : "wl";
    manifest["synth"] = {{"gain_per_mm_mT", cfg.synth.gain_per_mm_mT},
                         {"corner_freq_hz", cfg.synth.corner_freq_hz},
                         {"phase_lag_rad_per_hz", cfg.synth.phase_lag_rad_per_hz},
                         {"distance_exponent", cfg.synth.distance_exponent},
                         {"ref_distance_mm", cfg.synth.ref_distance_mm},
                         {"noise_ustrain", cfg.synth.noise_ustrain}};
    manifest["grid"] = {{"amplitudes_mT", cfg.grid.amplitudes_mT},
                        {"frequencies_hz", cfg.grid.frequencies_hz},
                        {"distances_mm", cfg.grid.distances_mm},
                        {"frame_rate_hz", cfg.grid.frame_rate_hz},
                        {"duration_s", cfg.grid.duration_s}};
    ordered_json files = ordered_json::array();
    auto add_file = [&](const fs::path& p) {
        const std::string content = read_file(p);
        files.push_back({{"name", p.filename().string()},
                         {"bytes", content.size()},
                         {"fnv1a64", fnv1a64_hex(content)}});
    };
    add_file(dataset_path);
    for (const auto& sc : gen.scenarios) add_file(out_dir / sc.frame_file);
    manifest["files"] = files;
    dump_json(out_dir / "manifest.json", manifest);

    log.info("gen-data: " + std::to_string(gen.data.rows()) + " rows over " +
             std::to_string(gen.scenarios.size()) + " scenarios -> " + out_dir.string());
    return 0;
}

// ---- reconstruct -------------------------------------------------------

int cmd_reconstruct(const CommonOpts& common, const std::string& frames_file,
                    bool emit_centerlines) {
    Log log{common.log_json};
    Config cfg = common.resolve();
    ReconstructOptions opts = cfg.reconstruct_options();
    const fs::path out_dir = cfg.output_dir;
    fs::create_directories(out_dir);

    std::ifstream in(frames_file);
    if (!in) throw_data("cannot open frames file: " + std::string(frames_file));

    std::ofstream curves(out_dir / "curves.csv", std::ios::binary);
    if (!curves) throw_data("cannot write curves.csv");
    io::write_recon_csv_header(curves);

    size_t ok = 0, malformed = 0, non_finite = 0;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto frame = io::parse_frame_line(line, opts.geometry.n_gratings, opts.geometry.n_cores());
        if (!frame) {
            ++malformed;
            log.warn("skipping malformed frame at line " + std::to_string(line_no));
            continue;
        }
        if (!frame->values.allFinite()) {
            ++non_finite;
            log.warn("skipping non-finite frame at line " + std::to_string(line_no));
            continue;
        }
        FrameResult res = reconstruct_frame(*frame, opts);
        io::write_recon_csv_row(curves, ok, frame->timestamp_s, res.fit.curve, res.fit.rmse_mm);
        if (emit_centerlines) {
            char name[48];
            std::snprintf(name, sizeof(name), "centerline_%05zu.csv", ok);
            std::ofstream cl(out_dir / name, std::ios::binary);
            io::write_centerline_csv(cl, res.robot);
        }
        ++ok;
    }
    if (ok == 0 && malformed + non_finite > 0)
        throw_data("no frame matched the configured geometry; calibration mismatch?");
    std::cout << "frames ok=" << ok << " skipped_malformed=" << malformed
              << " skipped_non_finite=" << non_finite << '\n';
    return 0;
}

// ---- fit-bezier ----------------------------------------------------------

int cmd_fit_bezier(const CommonOpts& common, const std::string& input, bool uniform,
                   double target_length, bool no_rescale) {
    Config cfg = common.resolve();
    const fs::path out_dir = cfg.output_dir;
    fs::create_directories(out_dir);

    auto pts = io::read_centerline_csv(input);
    if (pts.size() < 4) throw_data("fit-bezier: centerline needs at least 4 points");
    std::vector<double> params = uniform ? uniform_params(pts.size()) : chord_length_params(pts);

    std::optional<double> target;
    if (!no_rescale) {
        if (target_length > 0.0) {
            target = target_length;
        } else {
            double chord = 0.0;  // polyline arc length of the raw points
            for (size_t i = 1; i < pts.size(); ++i) chord += (pts[i] - pts[i - 1]).norm();
            target = chord;
        }
    }
    FitResult fit = fit_fixed_endpoints(pts, params, target);

    std::ofstream out(out_dir / "curve.csv", std::ios::binary);
    io::write_curve_csv_header(out);
    io::write_curve_csv_row(out, fit.curve);
    std::cout << "fit rmse_mm=" << fmt_double_sig(fit.rmse_mm, 6)
              << " max_err_mm=" << fmt_double_sig(fit.max_err_mm, 6)
              << " scale=" << fmt_double_sig(fit.scale_applied, 6) << '\n';
    return 0;
}

// ---- train ---------------------------------------------------------------

learn::Dataset load_split_dataset(const fs::path& dataset_path, const Config& cfg, uint64_t seed,
                                  bool with_val) {
    learn::Dataset data = io::read_dataset_csv(dataset_path);
    learn::SplitRatios ratios{cfg.learn.train_ratio, 0.0, cfg.learn.test_ratio};
    learn::assign_splits(data, ratios, seed);
    if (with_val) learn::subsplit_train_val(data, cfg.learn.val_fraction, seed);
    return data;
}

int cmd_train(const CommonOpts& common, const std::string& kind, const std::string& dataset_path) {
    Log log{common.log_json};
    Config cfg = common.resolve();
    const uint64_t seed = cfg.require_seed();
    const fs::path out_dir = cfg.output_dir;
    fs::create_directories(out_dir);

    const auto t0 = Clock::now();
    fs::path model_path;
    if (kind == "forest") {
        learn::Dataset data = load_split_dataset(dataset_path, cfg, seed, false);
        learn::ForestModel model = learn::train_forest(data, cfg.learn.forest, seed);
        model_path = out_dir / "forest.json";
        learn::save_forest(model, model_path);
    } else if (kind == "net") {
        learn::Dataset data = load_split_dataset(dataset_path, cfg, seed, true);
        auto net_cfg = cfg.learn.net;
        net_cfg.target_scale_mm = cfg.robot_length_mm;
        learn::NetModel model = learn::train_net_lm(data, net_cfg, seed);
        model_path = out_dir / "net.json";
        learn::save_net(model, model_path);
    } else {
        throw_usage("train: kind must be 'forest' or 'net'");
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();

    // timing lives next to the model, not inside it: model files stay
    // byte-identical across runs of equal seed
    fs::path stats_path = model_path;
    stats_path.replace_extension(".stats.json");
    ordered_json stats{{"kind", kind},
                       {"train_seconds", seconds},
                       {"dataset", fs::path(dataset_path).filename().string()}};
    dump_json(stats_path, stats);

    log.info("train " + kind + ": " + model_path.string() + " (" + fmt_double_sig(seconds, 3) +
             " s)");
    std::cout << model_path.string() << '\n';
    return 0;
}

// ---- predict ---------------------------------------------------------------

int cmd_predict(const CommonOpts& common, const std::string& model_path,
                const std::string& dataset_path) {
    Config cfg = common.resolve();
    const fs::path out_dir = cfg.output_dir;
    fs::create_directories(out_dir);

    learn::AnyModel model = learn::load_model(model_path);
    learn::Dataset data = io::read_dataset_csv(dataset_path);
    Eigen::MatrixXd pred = learn::predict_any(model, data.features);
    io::write_prediction_csv(out_dir / "predictions.csv", pred);
    return 0;
}

// ---- evaluate ---------------------------------------------------------------

ordered_json metrics_to_json(const stats::MetricsTable& table) {
    ordered_json per_output = ordered_json::array();
    for (size_t c = 0; c < table.per_output.size(); ++c) {
        const auto& m = table.per_output[c];
        ordered_json row{{"name", learn::Dataset::kTargetNames[c]},
                         {"rmse_mm", m.rmse},
                         {"max_err_mm", m.max_abs_err}};
        if (m.r2_defined)
            row["r2"] = m.r2;
        else
            row["r2"] = nullptr;  // zero-variance truth column
        per_output.push_back(row);
    }
    ordered_json j;
    j["per_output"] = per_output;
    j["per_point_rmse_mm"] = table.per_point_rmse;
    j["overall"] = {{"rmse_mm", table.overall_rmse},
                    {"r2", table.overall_r2_defined ? ordered_json(table.overall_r2) : nullptr},
                    {"max_err_mm", table.overall_max}};
    return j;
}

std::string metrics_to_text(const stats::MetricsTable& a, const stats::MetricsTable* b,
                            const std::string& name_a, const std::string& name_b) {
    std::ostringstream os;
    auto row = [&](const std::string& label, const stats::OutputMetrics& m) {
        char buf[128];
        if (m.r2_defined)
            std::snprintf(buf, sizeof(buf), " %7.3f %7.3f %8.3f", m.rmse, m.r2, m.max_abs_err);
        else
            std::snprintf(buf, sizeof(buf), " %7.3f %7s %8.3f", m.rmse, "--", m.max_abs_err);
        os << label << buf;
    };
    os << "Points   |";
    os << " " << name_a << " (RMSE mm /R2 /Max mm)";
    if (b) os << "  ||  " << name_b << " (RMSE mm /R2 /Max mm)";
    os << '\n';
    for (size_t c = 0; c < a.per_output.size(); ++c) {
        os << learn::Dataset::kTargetNames[c] << "  |";
        row("", a.per_output[c]);
        if (b) {
            os << "  ||";
            row("", b->per_output[c]);
        }
        os << '\n';
    }
    os << "Overall  |";
    char buf[128];
    std::snprintf(buf, sizeof(buf), " %7.3f %7.3f %8.3f", a.overall_rmse, a.overall_r2,
                  a.overall_max);
    os << buf;
    if (b) {
        std::snprintf(buf, sizeof(buf), "  || %7.3f %7.3f %8.3f", b->overall_rmse, b->overall_r2,
                      b->overall_max);
        os << buf;
    }
    os << '\n';
    return os.str();
}

int cmd_evaluate(const CommonOpts& common, const std::string& model_path,
                 const std::string& dataset_path, const std::string& baseline_path, int n_mc,
                 int bins) {
    Log log{common.log_json};
    Config cfg = common.resolve();
    const uint64_t seed = cfg.require_seed();
    const fs::path out_dir = cfg.output_dir;
    fs::create_directories(out_dir);

    learn::AnyModel model = learn::load_model(model_path);
    const bool is_net = learn::model_kind(model) == "net";
    learn::Dataset data = load_split_dataset(dataset_path, cfg, seed, is_net);

    const auto test_rows = data.rows_with(learn::Split::Test);
    if (test_rows.empty()) throw_data("evaluate: no test rows under the configured split");
    learn::Dataset test = data.subset(test_rows);

    const auto t0 = Clock::now();
    Eigen::MatrixXd pred = learn::predict_any(model, test.features);
    const double predict_seconds = std::chrono::duration<double>(Clock::now() - t0).count();

    stats::MetricsTable table = stats::compute_metrics(pred, test.targets);
    stats::Histogram hist = stats::error_histogram(pred, test.targets, bins);

    ordered_json report;
    // file names only: reports stay byte-identical across runs in different
    // directories
    report["model"] = {{"file", fs::path(model_path).filename().string()},
                       {"kind", learn::model_kind(model)}};
    report["dataset"] = fs::path(dataset_path).filename().string();
    report["n_test"] = test_rows.size();
    report["metrics"] = metrics_to_json(table);

    // Pearson correlations over all outputs pooled (reported per split)
    auto pooled_pearson = [&](learn::Split s) -> ordered_json {
        auto rows = data.rows_with(s);
        if (rows.empty()) return nullptr;
        learn::Dataset sub = data.subset(rows);
        Eigen::MatrixXd p = learn::predict_any(model, sub.features);
        std::vector<double> xs, ys;
        xs.reserve(static_cast<size_t>(p.size()));
        for (Eigen::Index r = 0; r < p.rows(); ++r)
            for (Eigen::Index c = 0; c < p.cols(); ++c) {
                xs.push_back(p(r, c));
                ys.push_back(sub.targets(r, c));
            }
        return stats::pearson_r(xs, ys);
    };
    report["pearson_r"] = {{"train", pooled_pearson(learn::Split::Train)},
                           {"val", pooled_pearson(learn::Split::Val)},
                           {"test", pooled_pearson(learn::Split::Test)}};

    std::string text;
    std::string hist_csv = "output,bin_lo,bin_hi,count\n";
    for (size_t c = 0; c < hist.counts.size(); ++c)
        for (size_t b = 0; b < hist.counts[c].size(); ++b)
            hist_csv += std::string(learn::Dataset::kTargetNames[c]) + "," +
                        fmt_double(hist.edges[b]) + "," + fmt_double(hist.edges[b + 1]) + "," +
                        std::to_string(hist.counts[c][b]) + "\n";

    double baseline_train_seconds = -1.0, baseline_predict_seconds = -1.0;
    if (!baseline_path.empty()) {
        learn::AnyModel baseline = learn::load_model(baseline_path);
        const auto tb = Clock::now();
        Eigen::MatrixXd base_pred = learn::predict_any(baseline, test.features);
        baseline_predict_seconds = std::chrono::duration<double>(Clock::now() - tb).count();

        stats::MetricsTable base_table = stats::compute_metrics(base_pred, test.targets);
        stats::RmseReduction red = stats::rmse_reduction(base_table, table);
        auto errs_base = stats::per_sample_total_errors(base_pred, test.targets);
        auto errs_model = stats::per_sample_total_errors(pred, test.targets);
        stats::ComparisonReport cmp = stats::compare_models(errs_base, errs_model, n_mc, seed);

        report["baseline"] = {{"file", fs::path(baseline_path).filename().string()},
                              {"kind", learn::model_kind(baseline)}};
        report["baseline_metrics"] = metrics_to_json(base_table);
        report["rmse_reduction_pct"] = {{"per_point", red.per_point_pct},
                                        {"overall", red.overall_pct}};
        report["comparison"] = {
            {"per_sample_total_error",
             {{"baseline", {{"mean", cmp.mean_a}, {"sd", cmp.sd_a}, {"n", cmp.n_a}}},
              {"model", {{"mean", cmp.mean_b}, {"sd", cmp.sd_b}, {"n", cmp.n_b}}}}},
            {"lilliefors",
             {{"baseline", {{"d", cmp.lilliefors_a.d}, {"p", cmp.lilliefors_a.p}}},
              {"model", {{"d", cmp.lilliefors_b.d}, {"p", cmp.lilliefors_b.p}}},
              {"n_mc", n_mc}}},
            {"levene", {{"w", cmp.levene.w}, {"p", cmp.levene.p}}},
            {"welch", {{"t", cmp.welch.t}, {"df", cmp.welch.df}, {"p", cmp.welch.p}}}};
        text = metrics_to_text(base_table, &table, "baseline", "model");

        fs::path base_stats = fs::path(baseline_path).replace_extension(".stats.json");
        if (fs::exists(base_stats)) {
            auto js = nlohmann::json::parse(read_file(base_stats), nullptr, false);
            if (!js.is_discarded()) baseline_train_seconds = js.value("train_seconds", -1.0);
        }
    } else {
        text = metrics_to_text(table, nullptr, "model", "");
    }

    dump_json(out_dir / "report.json", report);
    write_text_file(out_dir / "report.txt", text);
    write_text_file(out_dir / "histogram.csv", hist_csv);

    // volatile numbers go to their own file so report.json stays reproducible
    double train_seconds = -1.0;
    fs::path model_stats = fs::path(model_path).replace_extension(".stats.json");
    if (fs::exists(model_stats)) {
        auto js = nlohmann::json::parse(read_file(model_stats), nullptr, false);
        if (!js.is_discarded()) train_seconds = js.value("train_seconds", -1.0);
    }
    ordered_json timing;
    timing["model"] = {{"train_seconds", train_seconds},
                       {"predict_seconds_total", predict_seconds},
                       {"predict_seconds_per_sample",
                        predict_seconds / static_cast<double>(test_rows.size())},
                       {"n_samples", test_rows.size()}};
    if (!baseline_path.empty())
        timing["baseline"] = {{"train_seconds", baseline_train_seconds},
                              {"predict_seconds_total", baseline_predict_seconds},
                              {"predict_seconds_per_sample",
                               baseline_predict_seconds / static_cast<double>(test_rows.size())},
                              {"n_samples", test_rows.size()}};
    dump_json(out_dir / "timing.json", timing);

    log.info("evaluate: overall rmse_mm=" + fmt_double_sig(table.overall_rmse, 6));
    std::cout << text;
    return 0;
}

// ---- importance ----------------------------------------------------------

int cmd_importance(const CommonOpts& common, const std::string& model_path,
                   const std::string& dataset_path) {
    Config cfg = common.resolve();
    const uint64_t seed = cfg.require_seed();
    const fs::path out_dir = cfg.output_dir;
    fs::create_directories(out_dir);

    learn::AnyModel any = learn::load_model(model_path);
    const auto* forest = std::get_if<learn::ForestModel>(&any);
    if (!forest) throw_usage("importance: requires a forest model");

    learn::Dataset data = load_split_dataset(dataset_path, cfg, seed, false);
    learn::ImportanceResult imp = learn::feature_importance(*forest, data, seed);

    auto table_json = [&](const Eigen::MatrixXd& m) {
        ordered_json rows = ordered_json::array();
        for (Eigen::Index o = 0; o < m.rows(); ++o) {
            ordered_json row;
            row["output"] = learn::Dataset::kTargetNames[static_cast<size_t>(o)];
            for (Eigen::Index f = 0; f < m.cols(); ++f)
                row[learn::Dataset::kFeatureNames[static_cast<size_t>(f)]] = m(o, f);
            rows.push_back(row);
        }
        return rows;
    };
    ordered_json j;
    j["method"] = "out-of-bag permutation";
    j["permutation_pct"] = table_json(imp.permutation_pct);
    j["impurity_pct"] = table_json(imp.impurity_pct);
    ordered_json degen = ordered_json::array();
    for (size_t o = 0; o < imp.degenerate.size(); ++o)
        if (imp.degenerate[o]) degen.push_back(learn::Dataset::kTargetNames[o]);
    j["degenerate_outputs"] = degen;
    dump_json(out_dir / "importance.json", j);

    std::string csv = "output";
    for (auto* n : learn::Dataset::kFeatureNames) csv += std::string(",") + n;
    csv += "\n";
    for (Eigen::Index o = 0; o < imp.permutation_pct.rows(); ++o) {
        csv += learn::Dataset::kTargetNames[static_cast<size_t>(o)];
        for (Eigen::Index f = 0; f < imp.permutation_pct.cols(); ++f)
            csv += "," + fmt_double_sig(imp.permutation_pct(o, f), 6);
        csv += "\n";
    }
    write_text_file(out_dir / "importance.csv", csv);
    return 0;
}

// ---- learning-curve -------------------------------------------------------

int cmd_learning_curve(const CommonOpts& common, const std::string& dataset_path,
                       std::vector<double> fractions, const std::string& kind) {
    Config cfg = common.resolve();
    const uint64_t seed = cfg.require_seed();
    const fs::path out_dir = cfg.output_dir;
    fs::create_directories(out_dir);
    if (fractions.empty()) fractions = {0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0};

    learn::Dataset data = load_split_dataset(dataset_path, cfg, seed, false);

    learn::TrainPredictFn fn;
    if (kind == "forest") {
        fn = [&](const learn::Dataset& sub, const Eigen::MatrixXd& xt) {
            return learn::train_forest(sub, cfg.learn.forest, seed).predict(xt);
        };
    } else if (kind == "net") {
        fn = [&](const learn::Dataset& sub, const Eigen::MatrixXd& xt) {
            learn::Dataset with_val = sub;
            learn::subsplit_train_val(with_val, cfg.learn.val_fraction, seed);
            auto net_cfg = cfg.learn.net;
            net_cfg.target_scale_mm = cfg.robot_length_mm;
            return learn::train_net_lm(with_val, net_cfg, seed).predict(xt);
        };
    } else {
        throw_usage("learning-curve: kind must be 'forest' or 'net'");
    }

    auto points = learn::learning_curve(data, fractions, seed, fn);
    std::string csv = "fraction,n_rows,test_rmse_mm\n";
    for (const auto& p : points)
        csv += fmt_double(p.fraction) + "," + std::to_string(p.n_rows) + "," +
               fmt_double(p.test_rmse) + "\n";
    write_text_file(out_dir / "learning_curve.csv", csv);
    std::cout << csv;
    return 0;
}

// ---- replay-server / stream-client -----------------------------------------

int cmd_replay_server(const CommonOpts& common, const std::string& frames_file, double rate,
                      const std::string& address, int port, double serve_seconds) {
    Log log{common.log_json};
    if (rate <= 0.0) throw_usage("replay-server: rate must be positive");
    auto lines = net::read_lines(frames_file);
    net::ReplayServer server(address, port, std::move(lines), rate);
    server.start();
    log.info("replay-server: listening on " + address + ":" + std::to_string(server.port()));
    std::cout << "listening " << address << ":" << server.port() << std::endl;
    if (serve_seconds > 0.0) {
        std::this_thread::sleep_for(std::chrono::duration<double>(serve_seconds));
        server.stop();
    } else {
        for (;;) std::this_thread::sleep_for(std::chrono::seconds(3600));
    }
    return 0;
}

int cmd_stream_client(const CommonOpts& common, const std::string& address, int port) {
    Log log{common.log_json};
    Config cfg = common.resolve();
    ReconstructOptions opts = cfg.reconstruct_options();
    const fs::path out_dir = cfg.output_dir;
    fs::create_directories(out_dir);

    std::ofstream out(out_dir / "curves.csv", std::ios::binary);
    if (!out) throw_data("cannot write curves.csv");
    auto stats = net::run_stream_client(address, port, opts, out, cfg.network.max_retries);
    std::cout << "frames ok=" << stats.frames_ok << " skipped=" << stats.skipped
              << " reconnects=" << stats.reconnects << " completed=" << (stats.completed ? 1 : 0)
              << '\n';
    log.info("stream-client: " + std::to_string(stats.frames_ok) + " frames");
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"FBG shape sensing, Bezier encoding and field-to-shape learning pipeline"};
    app.require_subcommand(1);

    CommonOpts common;
    int exit_code = 0;
    std::function<void()> action;

    // gen-data
    {
        auto* cmd = app.add_subcommand("gen-data", "Generate the synthetic dataset and frame files");
        add_common(cmd, common);
        cmd->callback([&] { action = [&] { exit_code = cmd_gen_data(common); }; });
    }
    // reconstruct
    {
        auto* cmd = app.add_subcommand("reconstruct", "Batch frames -> centerlines -> curves");
        add_common(cmd, common);
        auto frames = std::make_shared<std::string>();
        auto centerlines = std::make_shared<bool>(false);
        cmd->add_option("--frames", *frames, "Frames file (NDJSON)")->required();
        cmd->add_flag("--emit-centerlines", *centerlines, "Write per-frame centerline CSVs");
        cmd->callback([&, frames, centerlines] {
            action = [&, frames, centerlines] {
                exit_code = cmd_reconstruct(common, *frames, *centerlines);
            };
        });
    }
    // fit-bezier
    {
        auto* cmd = app.add_subcommand("fit-bezier", "Fit one cubic to a centerline CSV");
        add_common(cmd, common);
        auto input = std::make_shared<std::string>();
        auto uniform = std::make_shared<bool>(false);
        auto target = std::make_shared<double>(0.0);
        auto no_rescale = std::make_shared<bool>(false);
        cmd->add_option("--input", *input, "Centerline CSV (idx,x_mm,y_mm,z_mm)")->required();
        cmd->add_flag("--uniform-params", *uniform, "Uniform instead of chord-length parameters");
        cmd->add_option("--target-length", *target, "Rescale the fit to this arc length (mm)");
        cmd->add_flag("--no-rescale", *no_rescale, "Skip the constant-length rescale");
        cmd->callback([&, input, uniform, target, no_rescale] {
            action = [&, input, uniform, target, no_rescale] {
                exit_code = cmd_fit_bezier(common, *input, *uniform, *target, *no_rescale);
            };
        });
    }
    // train
    {
        auto* cmd = app.add_subcommand("train", "Train a forest or net on a dataset CSV");
        add_common(cmd, common);
        auto kind = std::make_shared<std::string>();
        auto dataset = std::make_shared<std::string>();
        cmd->add_option("kind", *kind, "forest|net")->required();
        cmd->add_option("--dataset", *dataset, "Dataset CSV")->required();
        cmd->callback([&, kind, dataset] {
            action = [&, kind, dataset] { exit_code = cmd_train(common, *kind, *dataset); };
        });
    }
    // predict
    {
        auto* cmd = app.add_subcommand("predict", "Predict control points for dataset features");
        add_common(cmd, common);
        auto model = std::make_shared<std::string>();
        auto dataset = std::make_shared<std::string>();
        cmd->add_option("--model", *model, "Model JSON")->required();
        cmd->add_option("--input", *dataset, "Dataset CSV")->required();
        cmd->callback([&, model, dataset] {
            action = [&, model, dataset] { exit_code = cmd_predict(common, *model, *dataset); };
        });
    }
    // evaluate
    {
        auto* cmd = app.add_subcommand("evaluate", "Metrics, histograms and model comparison");
        add_common(cmd, common);
        auto model = std::make_shared<std::string>();
        auto dataset = std::make_shared<std::string>();
        auto baseline = std::make_shared<std::string>();
        auto n_mc = std::make_shared<int>(10000);
        auto bins = std::make_shared<int>(40);
        cmd->add_option("--model", *model, "Model JSON")->required();
        cmd->add_option("--dataset", *dataset, "Dataset CSV")->required();
        cmd->add_option("--baseline", *baseline, "Baseline model JSON for the comparison battery");
        cmd->add_option("--mc", *n_mc, "Monte Carlo resamples for Lilliefors p-values");
        cmd->add_option("--bins", *bins, "Histogram bins");
        cmd->callback([&, model, dataset, baseline, n_mc, bins] {
            action = [&, model, dataset, baseline, n_mc, bins] {
                exit_code = cmd_evaluate(common, *model, *dataset, *baseline, *n_mc, *bins);
            };
        });
    }
    // importance
    {
        auto* cmd = app.add_subcommand("importance", "Permutation feature importance (forest)");
        add_common(cmd, common);
        auto model = std::make_shared<std::string>();
        auto dataset = std::make_shared<std::string>();
        cmd->add_option("--model", *model, "Forest model JSON")->required();
        cmd->add_option("--dataset", *dataset, "Dataset CSV")->required();
        cmd->callback([&, model, dataset] {
            action = [&, model, dataset] { exit_code = cmd_importance(common, *model, *dataset); };
        });
    }
    // learning-curve
    {
        auto* cmd = app.add_subcommand("learning-curve", "Test RMSE over nested training subsets");
        add_common(cmd, common);
        auto dataset = std::make_shared<std::string>();
        auto fractions = std::make_shared<std::vector<double>>();
        auto kind = std::make_shared<std::string>("forest");
        cmd->add_option("--dataset", *dataset, "Dataset CSV")->required();
        cmd->add_option("--fractions", *fractions, "Training fractions in (0, 1]");
        cmd->add_option("--kind", *kind, "forest|net");
        cmd->callback([&, dataset, fractions, kind] {
            action = [&, dataset, fractions, kind] {
                exit_code = cmd_learning_curve(common, *dataset, *fractions, *kind);
            };
        });
    }
    // replay-server
    {
        auto* cmd = app.add_subcommand("replay-server", "Replay a frames file over TCP at a fixed rate");
        add_common(cmd, common);
        auto frames = std::make_shared<std::string>();
        auto rate = std::make_shared<double>(30.0);
        auto address = std::make_shared<std::string>("127.0.0.1");
        auto port = std::make_shared<int>(7071);
        auto serve_s = std::make_shared<double>(0.0);
        cmd->add_option("--frames", *frames, "Frames file (NDJSON)")->required();
        cmd->add_option("--rate", *rate, "Frames per second");
        cmd->add_option("--address", *address, "Bind address");
        cmd->add_option("--port", *port, "Bind port (0 = ephemeral)");
        cmd->add_option("--serve-seconds", *serve_s, "Stop after this long (0 = run forever)");
        cmd->callback([&, frames, rate, address, port, serve_s] {
            action = [&, frames, rate, address, port, serve_s] {
                exit_code = cmd_replay_server(common, *frames, *rate, *address, *port, *serve_s);
            };
        });
    }
    // stream-client
    {
        auto* cmd = app.add_subcommand("stream-client", "Consume a frame stream and reconstruct online");
        add_common(cmd, common);
        auto address = std::make_shared<std::string>("127.0.0.1");
        auto port = std::make_shared<int>(7071);
        cmd->add_option("--address", *address, "Server address");
        cmd->add_option("--port", *port, "Server port");
        cmd->callback([&, address, port] {
            action = [&, address, port] { exit_code = cmd_stream_client(common, *address, *port); };
        });
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (action) action();
        return exit_code;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace magshape::cli
