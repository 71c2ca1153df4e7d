#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "magshape/cli.hpp"
#include "magshape/core/strings.hpp"
#include "magshape/field_synth.hpp"
#include "magshape/io/dataset_io.hpp"
#include "magshape/io/frames.hpp"
#include "magshape/learn/model_io.hpp"
#include "magshape/net/stream.hpp"

using namespace magshape;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& sub) const { return (path / sub).string(); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_small_config(const fs::path& path, const fs::path& out_dir) {
    std::ofstream out(path);
    out << R"({
      "seed": 4242,
      "output_dir": ")" << out_dir.string() << R"(",
      "grid": {"amplitudes_mT": [6, 14], "frequencies_hz": [0.2, 1.0],
               "distances_mm": [100], "duration_s": 0.2},
      "learn": {"trees": 8, "min_leaf": 2, "mtry": 2, "max_epochs": 4, "hidden": [8]}
    })";
}

}  // namespace

TEST_CASE("cli: usage errors exit with code 2") {
    CHECK(cli::run({"no-such-command"}) == 2);
    CHECK(cli::run({}) == 2);
    // seed is mandatory
    TempDir dir("magshape_cli_seedless");
    CHECK(cli::run({"gen-data", "--output", dir / "out"}) == 2);
}

TEST_CASE("cli: missing inputs exit with code 3") {
    TempDir dir("magshape_cli_missing");
    CHECK(cli::run({"reconstruct", "--frames", dir / "nope.ndjson", "--seed", "1"}) == 3);
    CHECK(cli::run({"train", "forest", "--dataset", dir / "nope.csv", "--seed", "1"}) == 3);
}

TEST_CASE("cli: gen-data is deterministic and writes a manifest") {
    TempDir dir("magshape_cli_gen");
    fs::path cfg = dir.path / "config.json";

    write_small_config(cfg, dir.path / "run_a");
    REQUIRE(cli::run({"gen-data", "--config", cfg.string()}) == 0);
    write_small_config(cfg, dir.path / "run_b");
    REQUIRE(cli::run({"gen-data", "--config", cfg.string()}) == 0);

    CHECK(slurp(dir.path / "run_a" / "dataset.csv") == slurp(dir.path / "run_b" / "dataset.csv"));
    // manifests agree except for no fields at all (same content, same hashes)
    CHECK(slurp(dir.path / "run_a" / "manifest.json") == slurp(dir.path / "run_b" / "manifest.json"));
    CHECK(fs::exists(dir.path / "run_a" / "manifest.json"));

    auto data = io::read_dataset_csv(dir.path / "run_a" / "dataset.csv");
    CHECK(data.rows() == 2 * 2 * 6);  // 4 scenarios x 6 frames
}

TEST_CASE("cli: gen-data with zero duration warns and exits 0") {
    TempDir dir("magshape_cli_gen0");
    fs::path cfg = dir.path / "config.json";
    {
        std::ofstream out(cfg);
        out << R"({"seed": 1, "output_dir": ")" << (dir.path / "out").string()
            << R"(", "grid": {"duration_s": 0.0}})";
    }
    CHECK(cli::run({"gen-data", "--config", cfg.string()}) == 0);
    auto data = io::read_dataset_csv(dir.path / "out" / "dataset.csv");
    CHECK(data.rows() == 0);
}

TEST_CASE("cli: reconstruct on zero-strain frames gives a straight robot") {
    TempDir dir("magshape_cli_recon");
    auto geom = SensorGeometry::standard();
    FbgFrame f;
    f.values = Eigen::MatrixXd::Zero(geom.n_gratings, geom.n_cores());
    std::vector<FbgFrame> frames = {f, f};
    io::write_frames_file(dir.path / "frames.ndjson", frames);

    REQUIRE(cli::run({"reconstruct", "--frames", dir / "frames.ndjson", "--output", dir / "out",
                      "--seed", "1"}) == 0);
    auto lines = slurp(dir.path / "out" / "curves.csv");
    // collinear control points on +z: p1z = 40/3, p3z = 40
    CHECK(lines.find("13.33333333333") != std::string::npos);
    CHECK(lines.find(",40,") != std::string::npos);

    // control points: x and y all zero
    std::istringstream is(lines);
    std::string header, row;
    std::getline(is, header);
    std::getline(is, row);
    auto fields = split(row, ',');
    REQUIRE(fields.size() == 15);
    for (int p = 0; p < 4; ++p) {
        CHECK(*parse_double(fields[static_cast<size_t>(2 + 3 * p)]) == doctest::Approx(0.0));
        CHECK(*parse_double(fields[static_cast<size_t>(3 + 3 * p)]) == doctest::Approx(0.0));
    }
}

TEST_CASE("cli: reconstruct skips bad frames and keeps count") {
    TempDir dir("magshape_cli_skip");
    auto geom = SensorGeometry::standard();
    FbgFrame f;
    f.values = Eigen::MatrixXd::Zero(geom.n_gratings, geom.n_cores());
    {
        std::ofstream out(dir.path / "frames.ndjson");
        out << io::frame_to_line(f) << '\n';
        out << "botched line\n";
        out << io::frame_to_line(f) << '\n';
    }
    REQUIRE(cli::run({"reconstruct", "--frames", dir / "frames.ndjson", "--output", dir / "out",
                      "--seed", "1"}) == 0);
    std::string curves = slurp(dir.path / "out" / "curves.csv");
    int rows = 0;
    for (char c : curves)
        if (c == '\n') ++rows;
    CHECK(rows == 3);  // header + 2 frames
}

TEST_CASE("cli: reconstruct aborts when nothing matches the geometry") {
    TempDir dir("magshape_cli_allbad");
    {
        std::ofstream out(dir.path / "frames.ndjson");
        out << "junk\n{\"t\":0}\n";
    }
    CHECK(cli::run({"reconstruct", "--frames", dir / "frames.ndjson", "--output", dir / "out",
                    "--seed", "1"}) == 3);
}

TEST_CASE("cli: full train/predict/evaluate/importance round trip on a small run") {
    TempDir dir("magshape_cli_train");
    fs::path cfg = dir.path / "config.json";
    write_small_config(cfg, dir.path / "out");
    REQUIRE(cli::run({"gen-data", "--config", cfg.string()}) == 0);
    const std::string dataset = (dir.path / "out" / "dataset.csv").string();

    REQUIRE(cli::run({"train", "forest", "--dataset", dataset, "--config", cfg.string()}) == 0);
    const std::string model = (dir.path / "out" / "forest.json").string();
    CHECK(fs::exists(dir.path / "out" / "forest.stats.json"));

    REQUIRE(cli::run({"predict", "--model", model, "--input", dataset, "--config", cfg.string()}) ==
            0);
    auto preds = io::read_prediction_csv(dir.path / "out" / "predictions.csv");
    CHECK(preds.rows() == 24);

    REQUIRE(cli::run({"evaluate", "--model", model, "--dataset", dataset, "--config", cfg.string(),
                      "--mc", "50"}) == 0);
    CHECK(fs::exists(dir.path / "out" / "report.json"));
    CHECK(fs::exists(dir.path / "out" / "report.txt"));
    CHECK(fs::exists(dir.path / "out" / "histogram.csv"));
    // timing fields present and positive
    auto timing = nlohmann::json::parse(slurp(dir.path / "out" / "timing.json"));
    CHECK(timing.at("model").at("train_seconds").get<double>() > 0.0);
    CHECK(timing.at("model").at("predict_seconds_per_sample").get<double>() > 0.0);

    REQUIRE(cli::run({"importance", "--model", model, "--dataset", dataset, "--config",
                      cfg.string()}) == 0);
    CHECK(fs::exists(dir.path / "out" / "importance.json"));
    CHECK(fs::exists(dir.path / "out" / "importance.csv"));
}

TEST_CASE("cli: memorization sanity with a permissive forest") {
    TempDir dir("magshape_cli_memorize");
    fs::path cfg = dir.path / "config.json";
    {
        std::ofstream out(cfg);
        out << R"({
          "seed": 77, "output_dir": ")" << (dir.path / "out").string() << R"(",
          "grid": {"amplitudes_mT": [10, 14], "frequencies_hz": [0.2, 0.6],
                   "distances_mm": [100], "duration_s": 0.4},
          "synth": {"noise_ustrain": 0.0},
          "learn": {"trees": 1, "min_leaf": 1, "mtry": 5,
                    "train_ratio": 1.0, "test_ratio": 0.0}
        })";
    }
    REQUIRE(cli::run({"gen-data", "--config", cfg.string()}) == 0);
    const std::string dataset = (dir.path / "out" / "dataset.csv").string();
    REQUIRE(cli::run({"train", "forest", "--dataset", dataset, "--config", cfg.string()}) == 0);

    auto model = learn::load_forest(dir.path / "out" / "forest.json");
    auto data = io::read_dataset_csv(dataset);
    Eigen::MatrixXd pred = model.predict(data.features);
    double rmse = std::sqrt((pred - data.targets).squaredNorm() /
                            static_cast<double>(pred.size()));
    // bootstrap keeps this from being exactly zero (out-of-bag rows fall into
    // neighbor leaves); near-zero here means far below the mm-scale deflections
    double spread = (data.targets.colwise().maxCoeff() - data.targets.colwise().minCoeff()).maxCoeff();
    CHECK(rmse < 0.1);
    CHECK(rmse < 0.05 * spread);
}

TEST_CASE("cli: fit-bezier on an exported centerline") {
    TempDir dir("magshape_cli_fit");
    {
        std::ofstream out(dir.path / "centerline.csv");
        out << "idx,x_mm,y_mm,z_mm\n";
        for (int i = 0; i < 5; ++i) out << i << ",0,0," << 10 * i << "\n";
    }
    REQUIRE(cli::run({"fit-bezier", "--input", dir / "centerline.csv", "--output", dir / "out",
                      "--seed", "1"}) == 0);
    auto curve = slurp(dir.path / "out" / "curve.csv");
    CHECK(curve.find("p0x") != std::string::npos);
    CHECK(curve.find("40") != std::string::npos);
}

TEST_CASE("cli: learning-curve emits one row per fraction") {
    TempDir dir("magshape_cli_curve");
    fs::path cfg = dir.path / "config.json";
    write_small_config(cfg, dir.path / "out");
    REQUIRE(cli::run({"gen-data", "--config", cfg.string()}) == 0);
    REQUIRE(cli::run({"learning-curve", "--dataset", dir / "out/dataset.csv", "--config",
                      cfg.string(), "--fractions", "0.5", "1.0"}) == 0);
    auto csv = slurp(dir.path / "out" / "learning_curve.csv");
    int lines = 0;
    for (char c : csv)
        if (c == '\n') ++lines;
    CHECK(lines == 3);  // header + 2 fractions
}

TEST_CASE("cli: default grid produces the 70 scenario files") {
    TempDir dir("magshape_cli_fullgrid");
    REQUIRE(cli::run({"gen-data", "--seed", "11", "--output", dir / "out"}) == 0);
    size_t frame_files = 0;
    for (const auto& e : fs::directory_iterator(dir.path / "out"))
        if (e.path().extension() == ".ndjson") ++frame_files;
    CHECK(frame_files == 70);
    CHECK(fs::exists(dir.path / "out" / "dataset.csv"));
    CHECK(fs::exists(dir.path / "out" / "manifest.json"));
    auto data = io::read_dataset_csv(dir.path / "out" / "dataset.csv");
    CHECK(data.rows() == 5110);  // 70 scenarios x 73 frames
}

TEST_CASE("cli: config referencing a missing calibration file is a usage error") {
    TempDir dir("magshape_cli_badcal");
    fs::path cfg = dir.path / "config.json";
    {
        std::ofstream out(cfg);
        out << R"({"seed": 1, "calibration": "/nonexistent/cal.json"})";
    }
    CHECK(cli::run({"gen-data", "--config", cfg.string(), "--output", dir / "out"}) == 2);
}

TEST_CASE("cli: evaluate with a baseline emits the comparison battery") {
    TempDir dir("magshape_cli_baseline");
    fs::path cfg = dir.path / "config.json";
    {
        std::ofstream out(cfg);
        out << R"({
          "seed": 99, "output_dir": ")" << (dir.path / "out").string() << R"(",
          "grid": {"amplitudes_mT": [6, 10, 14], "frequencies_hz": [0.2, 0.6],
                   "distances_mm": [100], "duration_s": 1.0},
          "learn": {"trees": 12, "min_leaf": 3, "mtry": 2, "max_epochs": 5,
                    "hidden": [8], "patience": 5}
        })";
    }
    REQUIRE(cli::run({"gen-data", "--config", cfg.string()}) == 0);
    const std::string dataset = (dir.path / "out" / "dataset.csv").string();
    REQUIRE(cli::run({"train", "forest", "--dataset", dataset, "--config", cfg.string()}) == 0);
    REQUIRE(cli::run({"train", "net", "--dataset", dataset, "--config", cfg.string()}) == 0);
    REQUIRE(cli::run({"evaluate", "--model", (dir.path / "out" / "forest.json").string(),
                      "--baseline", (dir.path / "out" / "net.json").string(), "--dataset", dataset,
                      "--config", cfg.string(), "--mc", "60"}) == 0);
    auto report = slurp(dir.path / "out" / "report.json");
    CHECK(report.find("\"welch\"") != std::string::npos);
    CHECK(report.find("\"levene\"") != std::string::npos);
    CHECK(report.find("\"lilliefors\"") != std::string::npos);
    CHECK(report.find("rmse_reduction_pct") != std::string::npos);
    auto timing = nlohmann::json::parse(slurp(dir.path / "out" / "timing.json"));
    CHECK(timing.at("baseline").at("train_seconds").get<double>() > 0.0);
    CHECK(timing.at("baseline").at("predict_seconds_per_sample").get<double>() > 0.0);
}

TEST_CASE("cli: learning-curve runs the net trainer on a small set") {
    TempDir dir("magshape_cli_curve_net");
    fs::path cfg = dir.path / "config.json";
    {
        std::ofstream out(cfg);
        out << R"({
          "seed": 7, "output_dir": ")" << (dir.path / "out").string() << R"(",
          "grid": {"amplitudes_mT": [6, 14], "frequencies_hz": [0.2, 1.0],
                   "distances_mm": [100], "duration_s": 0.8},
          "learn": {"max_epochs": 3, "hidden": [6], "patience": 3}
        })";
    }
    REQUIRE(cli::run({"gen-data", "--config", cfg.string()}) == 0);
    REQUIRE(cli::run({"learning-curve", "--dataset", dir / "out/dataset.csv", "--config",
                      cfg.string(), "--kind", "net", "--fractions", "1.0"}) == 0);
    auto csv = slurp(dir.path / "out" / "learning_curve.csv");
    CHECK(csv.find("1,") != std::string::npos);
}

TEST_CASE("cli: stream-client consumes an in-process replay server") {
    TempDir dir("magshape_cli_stream");
    auto geom = SensorGeometry::standard();
    FbgFrame f;
    f.values = Eigen::MatrixXd::Zero(geom.n_gratings, geom.n_cores());
    std::vector<std::string> lines(5, io::frame_to_line(f));
    net::ReplayServer server("127.0.0.1", 0, lines, 500.0);
    server.start();
    REQUIRE(cli::run({"stream-client", "--address", "127.0.0.1", "--port",
                      std::to_string(server.port()), "--output", dir / "out", "--seed", "1"}) == 0);
    server.stop();
    auto csv = slurp(dir.path / "out" / "curves.csv");
    int rows = 0;
    for (char c : csv)
        if (c == '\n') ++rows;
    CHECK(rows == 6);  // header + 5 frames
}

TEST_CASE("cli: replay-server serves for a bounded time and exits cleanly") {
    TempDir dir("magshape_cli_replay");
    auto geom = SensorGeometry::standard();
    FbgFrame f;
    f.values = Eigen::MatrixXd::Zero(geom.n_gratings, geom.n_cores());
    io::write_frames_file(dir.path / "frames.ndjson", {f, f});
    CHECK(cli::run({"replay-server", "--frames", dir / "frames.ndjson", "--rate", "100", "--port",
                    "0", "--serve-seconds", "0.2", "--seed", "1"}) == 0);
}

TEST_CASE("cli: reconstruct emits per-frame centerlines when asked") {
    TempDir dir("magshape_cli_centerlines");
    auto geom = SensorGeometry::standard();
    FbgFrame f;
    f.values = Eigen::MatrixXd::Zero(geom.n_gratings, geom.n_cores());
    io::write_frames_file(dir.path / "frames.ndjson", {f, f});
    REQUIRE(cli::run({"reconstruct", "--frames", dir / "frames.ndjson", "--output", dir / "out",
                      "--emit-centerlines", "--seed", "1"}) == 0);
    CHECK(fs::exists(dir.path / "out" / "centerline_00000.csv"));
    CHECK(fs::exists(dir.path / "out" / "centerline_00001.csv"));
    auto pts = io::read_centerline_csv(dir.path / "out" / "centerline_00001.csv");
    CHECK(pts.size() == 5);
}

TEST_CASE("cli: replay-server rejects rate 0 with a usage error") {
    TempDir dir("magshape_cli_rate");
    {
        std::ofstream out(dir.path / "frames.ndjson");
        out << "{}\n";
    }
    CHECK(cli::run({"replay-server", "--frames", dir / "frames.ndjson", "--rate", "0", "--seed",
                    "1"}) == 2);
}
