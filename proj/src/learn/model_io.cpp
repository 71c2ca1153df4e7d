#include "magshape/learn/model_io.hpp"

#include <fstream>
#include <json.hpp>

#include "magshape/core/error.hpp"
#include "magshape/core/rng.hpp"
#include "magshape/core/strings.hpp"

namespace magshape::learn {

namespace {

using nlohmann::json;

// streaming array writers keep the multi-megabyte forest dumps cheap
void write_int_array(std::ofstream& out, const char* key, const auto& values) {
    out << '"' << key << "\":[";
    bool first = true;
    for (auto v : values) {
        if (!first) out << ',';
        first = false;
        out << static_cast<long long>(v);  // uint8_t would stream as a character
    }
    out << ']';
}

void write_double_array(std::ofstream& out, const char* key, const auto& values) {
    out << '"' << key << "\":[";
    bool first = true;
    for (double v : values) {
        if (!first) out << ',';
        first = false;
        out << fmt_double(v);
    }
    out << ']';
}

json parse_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_data("cannot open model file: " + path.string());
    json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw_data("model file is not valid JSON: " + path.string());
    return j;
}

void check_header(const json& j, const std::string& kind, const std::filesystem::path& path) {
    if (!j.is_object() || j.value("kind", "") != kind)
        throw_data("model file kind mismatch (wanted " + kind + "): " + path.string());
    if (j.value("version", -1) != kModelFormatVersion)
        throw_data("unsupported model schema version in " + path.string());
}

std::vector<double> as_doubles(const json& arr) {
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& v : arr) out.push_back(v.get<double>());
    return out;
}

std::vector<int> as_ints(const json& arr) {
    std::vector<int> out;
    out.reserve(arr.size());
    for (const auto& v : arr) out.push_back(v.get<int>());
    return out;
}

}  // namespace

void save_forest(const ForestModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_data("cannot write model file: " + path.string());

    out << "{\"kind\":\"forest\",\"version\":" << kModelFormatVersion;
    out << ",\"seed\":" << model.seed;
    out << ",\"config\":{\"trees\":" << model.config.trees << ",\"min_leaf\":" << model.config.min_leaf
        << ",\"mtry\":" << model.config.mtry << "}";
    out << ",\"n_features\":" << model.n_features << ",\"n_outputs\":" << model.n_outputs << ',';
    write_int_array(out, "train_rows", model.train_rows);
    out << ',';
    write_double_array(out, "target_min", model.target_min);
    out << ',';
    write_double_array(out, "target_max", model.target_max);
    out << ",\"forests\":[";
    for (size_t o = 0; o < model.forests.size(); ++o) {
        if (o) out << ',';
        out << '[';
        for (size_t t = 0; t < model.forests[o].size(); ++t) {
            if (t) out << ',';
            const auto& nodes = model.forests[o][t].nodes;
            std::vector<int> f, l, r;
            std::vector<double> thr, val;
            f.reserve(nodes.size());
            for (const auto& n : nodes) {
                f.push_back(n.feature);
                thr.push_back(n.threshold);
                l.push_back(n.left);
                r.push_back(n.right);
                val.push_back(n.value);
            }
            out << '{';
            write_int_array(out, "f", f);
            out << ',';
            write_double_array(out, "t", thr);
            out << ',';
            write_int_array(out, "l", l);
            out << ',';
            write_int_array(out, "r", r);
            out << ',';
            write_double_array(out, "v", val);
            out << '}';
        }
        out << ']';
    }
    out << "]}";
    if (!out) throw_data("short write on model file: " + path.string());
}

ForestModel load_forest(const std::filesystem::path& path) {
    json j = parse_file(path);
    check_header(j, "forest", path);

    ForestModel model;
    model.seed = j.at("seed").get<uint64_t>();
    model.config.trees = j.at("config").at("trees").get<int>();
    model.config.min_leaf = j.at("config").at("min_leaf").get<int>();
    model.config.mtry = j.at("config").at("mtry").get<int>();
    model.n_features = j.at("n_features").get<int>();
    model.n_outputs = j.at("n_outputs").get<int>();
    model.train_rows = as_ints(j.at("train_rows"));

    auto tmin = as_doubles(j.at("target_min"));
    auto tmax = as_doubles(j.at("target_max"));
    model.target_min = Eigen::Map<Eigen::VectorXd>(tmin.data(), static_cast<Eigen::Index>(tmin.size()));
    model.target_max = Eigen::Map<Eigen::VectorXd>(tmax.data(), static_cast<Eigen::Index>(tmax.size()));

    const auto& forests = j.at("forests");
    if (static_cast<int>(forests.size()) != model.n_outputs)
        throw_data("model file: forest count mismatch");
    const int m = static_cast<int>(model.train_rows.size());

    model.forests.resize(forests.size());
    for (size_t o = 0; o < forests.size(); ++o) {
        const auto& trees = forests[o];
        model.forests[o].resize(trees.size());
        for (size_t t = 0; t < trees.size(); ++t) {
            const auto& tj = trees[t];
            auto f = as_ints(tj.at("f"));
            auto thr = as_doubles(tj.at("t"));
            auto l = as_ints(tj.at("l"));
            auto r = as_ints(tj.at("r"));
            auto val = as_doubles(tj.at("v"));
            if (f.size() != thr.size() || f.size() != l.size() || f.size() != r.size() ||
                f.size() != val.size())
                throw_data("model file: ragged tree arrays");
            RegressionTree& tree = model.forests[o][t];
            tree.nodes.resize(f.size());
            for (size_t i = 0; i < f.size(); ++i)
                tree.nodes[i] = {f[i], thr[i], l[i], r[i], val[i]};

            // out-of-bag rows re-derived from the per-tree stream
            Rng rng(tree_stream_seed(model.seed, static_cast<int>(o), static_cast<int>(t)));
            std::vector<int> rows = bootstrap_rows(rng, m);
            std::vector<uint8_t> in_bag(static_cast<size_t>(m), 0);
            for (int row : rows) in_bag[static_cast<size_t>(row)] = 1;
            for (int row = 0; row < m; ++row)
                if (!in_bag[static_cast<size_t>(row)]) tree.oob_rows.push_back(row);
        }
    }
    return model;
}

void save_net(const NetModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_data("cannot write model file: " + path.string());

    out << "{\"kind\":\"net\",\"version\":" << kModelFormatVersion << ',';
    write_int_array(out, "layer_sizes", model.layer_sizes);
    out << ",\"weights\":[";
    for (size_t l = 0; l < model.weights.size(); ++l) {
        if (l) out << ',';
        std::vector<double> flat;
        flat.reserve(static_cast<size_t>(model.weights[l].size()));
        for (Eigen::Index i = 0; i < model.weights[l].rows(); ++i)
            for (Eigen::Index jx = 0; jx < model.weights[l].cols(); ++jx)
                flat.push_back(model.weights[l](i, jx));
        out << '{';
        write_double_array(out, "w", flat);
        out << '}';
    }
    out << "],\"biases\":[";
    for (size_t l = 0; l < model.biases.size(); ++l) {
        if (l) out << ',';
        out << '{';
        write_double_array(out, "b", model.biases[l]);
        out << '}';
    }
    out << "],\"normalizer\":{";
    write_double_array(out, "mean", model.normalizer.mean);
    out << ',';
    write_double_array(out, "stddev", model.normalizer.stddev);
    out << ',';
    write_int_array(out, "constant", model.normalizer.constant);
    out << ",\"target_scale_mm\":" << fmt_double(model.normalizer.target_scale_mm) << "},";
    write_double_array(out, "train_mse_trace", model.train_mse_trace);
    out << ',';
    write_double_array(out, "val_mse_trace", model.val_mse_trace);
    out << '}';
    if (!out) throw_data("short write on model file: " + path.string());
}

NetModel load_net(const std::filesystem::path& path) {
    json j = parse_file(path);
    check_header(j, "net", path);

    NetModel model;
    model.layer_sizes = as_ints(j.at("layer_sizes"));
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (weights.size() + 1 != model.layer_sizes.size() || biases.size() != weights.size())
        throw_data("model file: layer count mismatch");

    for (size_t l = 0; l < weights.size(); ++l) {
        const int in = model.layer_sizes[l];
        const int out_sz = model.layer_sizes[l + 1];
        auto flat = as_doubles(weights[l].at("w"));
        if (static_cast<int>(flat.size()) != in * out_sz)
            throw_data("model file: weight matrix size mismatch");
        Eigen::MatrixXd w(out_sz, in);
        for (int i = 0; i < out_sz; ++i)
            for (int jx = 0; jx < in; ++jx) w(i, jx) = flat[static_cast<size_t>(i * in + jx)];
        model.weights.push_back(std::move(w));

        auto b = as_doubles(biases[l].at("b"));
        if (static_cast<int>(b.size()) != out_sz) throw_data("model file: bias size mismatch");
        model.biases.push_back(
            Eigen::Map<Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())));
    }

    const auto& nz = j.at("normalizer");
    auto mean = as_doubles(nz.at("mean"));
    auto sd = as_doubles(nz.at("stddev"));
    model.normalizer.mean = Eigen::Map<Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    model.normalizer.stddev = Eigen::Map<Eigen::VectorXd>(sd.data(), static_cast<Eigen::Index>(sd.size()));
    for (const auto& c : nz.at("constant")) model.normalizer.constant.push_back(c.get<uint8_t>());
    model.normalizer.target_scale_mm = nz.at("target_scale_mm").get<double>();
    model.train_mse_trace = as_doubles(j.at("train_mse_trace"));
    model.val_mse_trace = as_doubles(j.at("val_mse_trace"));
    return model;
}

AnyModel load_model(const std::filesystem::path& path) {
    json j = parse_file(path);
    const std::string kind = j.value("kind", "");
    if (kind == "forest") return load_forest(path);
    if (kind == "net") return load_net(path);
    throw_data("unknown model kind '" + kind + "' in " + path.string());
}

std::string model_kind(const AnyModel& model) {
    return std::holds_alternative<ForestModel>(model) ? "forest" : "net";
}

Eigen::MatrixXd predict_any(const AnyModel& model, const Eigen::MatrixXd& features) {
    if (const auto* forest = std::get_if<ForestModel>(&model)) return forest->predict(features);
    return std::get<NetModel>(model).predict(features);
}

}  // namespace magshape::learn
