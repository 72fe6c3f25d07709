#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "lstmae/seq_autoencoder.hpp"

namespace lstmae {

namespace {

constexpr std::string_view format_name = "lstmae-model";

void append_double(std::string& out, double v) {
    if (!std::isfinite(v)) fail(ErrorKind::invariant, "cannot serialize non-finite model parameter");
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    if (ec != std::errc{}) fail(ErrorKind::invariant, "double formatting failed");
    out.append(buf, ptr);
}

std::string json_string(std::string_view s) {
    // Names and tags here never contain characters that need escaping.
    return "\"" + std::string(s) + "\"";
}

struct TensorShape {
    std::size_t rows;
    std::size_t cols;
};

std::vector<TensorShape> tensor_shapes(const ModelParameters& params) {
    std::vector<TensorShape> out;
    auto add_layer = [&](const LstmLayerParams& l) {
        for (const auto& w : l.weights) out.push_back({w.rows(), w.cols()});
        for (const auto& b : l.biases) out.push_back({1, b.size()});
    };
    for (const auto& l : params.encoder) add_layer(l);
    for (const auto& l : params.decoder) add_layer(l);
    out.push_back({params.head_weight.rows(), params.head_weight.cols()});
    out.push_back({1, params.head_bias.size()});
    return out;
}

template <typename T>
T required(const nlohmann::json& doc, const char* key) {
    if (!doc.contains(key)) fail(ErrorKind::malformed_file, std::string("model file lacks field '") + key + "'");
    try {
        return doc.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::malformed_file, std::string("model file field '") + key + "': " + e.what());
    }
}

} // namespace

std::string serialize_model(const SeqAutoencoderModel& model) {
    model.validate();
    std::string out;
    out += "{\n";
    out += "  \"format\": " + json_string(format_name) + ",\n";
    out += "  \"version\": " + std::to_string(model_format_version) + ",\n";
    out += "  \"architecture\": " + json_string(model.architecture.tag()) + ",\n";
    out += "  \"timesteps\": " + std::to_string(model.timesteps) + ",\n";
    out += "  \"features\": " + std::to_string(model.features) + ",\n";
    out += "  \"dropout\": ";
    append_double(out, model.dropout_rate);
    out += ",\n";
    out += "  \"dropout_placement\": \"encoder_output,decoder_output\",\n";
    out += "  \"seed\": " + std::to_string(model.seed) + ",\n";
    out += "  \"tensors\": [\n";

    const auto names = model.params.tensor_names();
    const auto shapes = tensor_shapes(model.params);
    const auto data = model.params.tensors();
    for (std::size_t t = 0; t < data.size(); ++t) {
        out += "    {\"name\": " + json_string(names[t]) + ", \"shape\": [" + std::to_string(shapes[t].rows) + ", " +
               std::to_string(shapes[t].cols) + "], \"data\": [";
        for (std::size_t i = 0; i < data[t].size(); ++i) {
            if (i) out += ", ";
            append_double(out, data[t][i]);
        }
        out += "]}";
        out += t + 1 < data.size() ? ",\n" : "\n";
    }
    out += "  ]\n}\n";
    return out;
}

SeqAutoencoderModel deserialize_model(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorKind::malformed_file, std::string("model file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) fail(ErrorKind::malformed_file, "model file is not a JSON object");
    if (required<std::string>(doc, "format") != format_name) {
        fail(ErrorKind::malformed_file, "not an lstmae model file");
    }
    const int version = required<int>(doc, "version");
    if (version != model_format_version) {
        fail(ErrorKind::version, "model file version " + std::to_string(version) + " is not supported (expected " +
                                     std::to_string(model_format_version) + ")");
    }

    Architecture arch;
    try {
        arch = Architecture::parse(required<std::string>(doc, "architecture"));
    } catch (const Error& e) {
        fail(ErrorKind::malformed_file, e.what());
    }
    const auto timesteps = required<std::size_t>(doc, "timesteps");
    const auto features = required<std::size_t>(doc, "features");
    const auto dropout = required<double>(doc, "dropout");
    const auto seed = required<std::uint64_t>(doc, "seed");
    if (timesteps == 0 || features == 0 || !(dropout >= 0.0 && dropout < 1.0)) {
        fail(ErrorKind::malformed_file, "model file metadata out of range");
    }

    SeqAutoencoderModel model = SeqAutoencoderModel::create(arch, timesteps, features, dropout, seed);

    std::map<std::string, const nlohmann::json*> by_name;
    const auto& tensors = doc.contains("tensors") ? doc.at("tensors") : nlohmann::json();
    if (!tensors.is_array()) fail(ErrorKind::malformed_file, "model file lacks a tensor list");
    for (const auto& t : tensors) {
        if (!t.is_object() || !t.contains("name") || !t.at("name").is_string()) {
            fail(ErrorKind::malformed_file, "tensor entry without a name");
        }
        by_name[t.at("name").get<std::string>()] = &t;
    }

    const auto names = model.params.tensor_names();
    const auto shapes = tensor_shapes(model.params);
    auto views = model.params.tensors();
    if (by_name.size() != names.size()) {
        fail(ErrorKind::shape, "model file has " + std::to_string(by_name.size()) + " tensors, architecture " +
                                   arch.tag() + " needs " + std::to_string(names.size()));
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
        const auto it = by_name.find(names[i]);
        if (it == by_name.end()) fail(ErrorKind::shape, "model file lacks tensor " + names[i]);
        const auto& entry = *it->second;
        std::vector<std::size_t> shape;
        std::vector<double> values;
        try {
            shape = entry.at("shape").get<std::vector<std::size_t>>();
            values = entry.at("data").get<std::vector<double>>();
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::malformed_file, "tensor " + names[i] + ": " + e.what());
        }
        if (shape.size() != 2 || shape[0] != shapes[i].rows || shape[1] != shapes[i].cols) {
            fail(ErrorKind::shape, "tensor " + names[i] + " has the wrong shape for architecture " + arch.tag());
        }
        if (values.size() != views[i].size()) {
            fail(ErrorKind::shape, "tensor " + names[i] + " holds " + std::to_string(values.size()) +
                                       " values, shape needs " + std::to_string(views[i].size()));
        }
        std::copy(values.begin(), values.end(), views[i].begin());
    }
    model.validate();
    return model;
}

void save_model(const SeqAutoencoderModel& model, const std::filesystem::path& path) {
    const std::string text = serialize_model(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
    out << text;
    if (!out) fail(ErrorKind::io, "failed writing " + path.string());
}

SeqAutoencoderModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open model file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_model(buf.str());
}

} // namespace lstmae
