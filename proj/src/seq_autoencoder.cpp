#include "lstmae/seq_autoencoder.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

namespace lstmae {

Architecture Architecture::parse(std::string_view tag) {
    auto bad = [&](const std::string& why) -> Architecture {
        fail(ErrorKind::config, "invalid architecture '" + std::string(tag) + "': " + why +
                                    " (expected e.g. 1x16, 2x64-16, 3x128-64-16)");
    };
    const auto x = tag.find('x');
    if (x == std::string_view::npos || x == 0) return bad("missing layer count");

    std::size_t layers = 0;
    auto [ptr, ec] = std::from_chars(tag.data(), tag.data() + x, layers);
    if (ec != std::errc{} || ptr != tag.data() + x || layers == 0) return bad("bad layer count");

    Architecture arch;
    arch.units.clear();
    std::string_view rest = tag.substr(x + 1);
    while (true) {
        const auto dash = rest.find('-');
        const std::string_view part = rest.substr(0, dash);
        std::size_t u = 0;
        auto [p, e] = std::from_chars(part.data(), part.data() + part.size(), u);
        if (part.empty() || e != std::errc{} || p != part.data() + part.size() || u == 0) {
            return bad("bad unit count '" + std::string(part) + "'");
        }
        arch.units.push_back(u);
        if (dash == std::string_view::npos) break;
        rest = rest.substr(dash + 1);
    }
    if (arch.units.size() != layers) {
        return bad(std::to_string(layers) + " layers declared but " + std::to_string(arch.units.size()) +
                   " unit counts given");
    }
    return arch;
}

std::string Architecture::tag() const {
    std::string out = std::to_string(units.size()) + "x";
    for (std::size_t i = 0; i < units.size(); ++i) {
        if (i) out += '-';
        out += std::to_string(units[i]);
    }
    return out;
}

ModelParameters ModelParameters::zeros_like() const {
    ModelParameters z = *this;
    z.set_zero();
    return z;
}

void ModelParameters::set_zero() {
    for (auto& l : encoder) l.set_zero();
    for (auto& l : decoder) l.set_zero();
    std::fill(head_weight.data().begin(), head_weight.data().end(), 0.0);
    std::fill(head_bias.begin(), head_bias.end(), 0.0);
}

std::vector<std::span<double>> ModelParameters::tensors() {
    std::vector<std::span<double>> out;
    for (auto& l : encoder) {
        auto t = l.tensors();
        out.insert(out.end(), t.begin(), t.end());
    }
    for (auto& l : decoder) {
        auto t = l.tensors();
        out.insert(out.end(), t.begin(), t.end());
    }
    out.emplace_back(head_weight.data());
    out.emplace_back(head_bias);
    return out;
}

std::vector<std::span<const double>> ModelParameters::tensors() const {
    std::vector<std::span<const double>> out;
    for (const auto& l : encoder) {
        auto t = l.tensors();
        out.insert(out.end(), t.begin(), t.end());
    }
    for (const auto& l : decoder) {
        auto t = l.tensors();
        out.insert(out.end(), t.begin(), t.end());
    }
    out.emplace_back(head_weight.data());
    out.emplace_back(head_bias);
    return out;
}

std::vector<std::string> ModelParameters::tensor_names() const {
    static constexpr const char* suffixes[] = {"W_f", "W_i", "W_c", "W_o", "b_f", "b_i", "b_c", "b_o"};
    std::vector<std::string> out;
    for (std::size_t l = 0; l < encoder.size(); ++l) {
        for (const char* s : suffixes) out.push_back("encoder." + std::to_string(l) + "." + s);
    }
    for (std::size_t l = 0; l < decoder.size(); ++l) {
        for (const char* s : suffixes) out.push_back("decoder." + std::to_string(l) + "." + s);
    }
    out.emplace_back("head.weight");
    out.emplace_back("head.bias");
    return out;
}

SeqAutoencoderModel SeqAutoencoderModel::create(const Architecture& arch, std::size_t timesteps,
                                                std::size_t features, double dropout_rate, std::uint64_t seed) {
    if (arch.units.empty()) fail(ErrorKind::config, "architecture needs at least one layer");
    if (timesteps == 0 || features == 0) fail(ErrorKind::config, "timesteps and features must be at least 1");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
        fail(ErrorKind::config, "dropout rate must be in [0, 1), got " + std::to_string(dropout_rate));
    }

    SeqAutoencoderModel model;
    model.architecture = arch;
    model.timesteps = timesteps;
    model.features = features;
    model.dropout_rate = dropout_rate;
    model.seed = seed;

    Rng rng(Rng::sub_seed(seed, "init"));
    std::size_t in = features;
    for (std::size_t u : arch.units) {
        model.params.encoder.push_back(LstmLayerParams::glorot(in, u, rng));
        in = u;
    }
    // Decoder consumes the repeated latent vector and mirrors the encoder.
    for (auto it = arch.units.rbegin(); it != arch.units.rend(); ++it) {
        model.params.decoder.push_back(LstmLayerParams::glorot(in, *it, rng));
        in = *it;
    }
    model.params.head_weight = glorot_init(features, in, rng);
    model.params.head_bias = Vector(features, 0.0);
    return model;
}

void SeqAutoencoderModel::validate() const {
    const auto& p = params;
    if (architecture.units.empty()) fail(ErrorKind::shape, "architecture has no layers");
    if (p.encoder.size() != architecture.units.size() || p.decoder.size() != architecture.units.size()) {
        fail(ErrorKind::shape, "architecture " + architecture.tag() + " needs " +
                                   std::to_string(architecture.units.size()) + " encoder and decoder layers, got " +
                                   std::to_string(p.encoder.size()) + " and " + std::to_string(p.decoder.size()));
    }
    if (timesteps == 0 || features == 0) fail(ErrorKind::shape, "timesteps and features must be at least 1");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail(ErrorKind::shape, "dropout rate must be in [0, 1)");

    std::size_t in = features;
    auto check_layer = [&](const LstmLayerParams& layer, std::size_t units, const std::string& name) {
        layer.validate();
        if (layer.input_size != in) {
            fail(ErrorKind::shape, name + " expects input size " + std::to_string(layer.input_size) +
                                       " but receives " + std::to_string(in));
        }
        if (layer.hidden_size != units) {
            fail(ErrorKind::shape, name + " has " + std::to_string(layer.hidden_size) + " units, architecture " +
                                       architecture.tag() + " says " + std::to_string(units));
        }
        in = layer.hidden_size;
    };
    for (std::size_t l = 0; l < p.encoder.size(); ++l) {
        check_layer(p.encoder[l], architecture.units[l], "encoder layer " + std::to_string(l));
    }
    for (std::size_t l = 0; l < p.decoder.size(); ++l) {
        check_layer(p.decoder[l], architecture.units[architecture.units.size() - 1 - l],
                    "decoder layer " + std::to_string(l));
    }
    if (p.head_weight.rows() != features || p.head_weight.cols() != in) {
        fail(ErrorKind::shape, "head weight is " + p.head_weight.shape_string() + ", expected " +
                                   std::to_string(features) + "x" + std::to_string(in));
    }
    if (p.head_bias.size() != features) fail(ErrorKind::shape, "head bias length differs from feature count");
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail(ErrorKind::config, "learning rate must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0)) fail(ErrorKind::config, "dropout must be in [0, 1)");
    if (batch_size == 0) fail(ErrorKind::config, "batch size must be at least 1");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
        fail(ErrorKind::config, "validation fraction must be in [0, 1)");
    }
}

bool TrainTrace::operator==(const TrainTrace& other) const {
    if (epochs.size() != other.epochs.size()) return false;
    for (std::size_t i = 0; i < epochs.size(); ++i) {
        if (epochs[i].train_loss != other.epochs[i].train_loss || epochs[i].val_loss != other.epochs[i].val_loss) {
            return false;
        }
    }
    return true;
}

namespace {

struct ForwardTrace {
    std::vector<LstmForwardResult> encoder;
    Vector latent_mask;                   // empty when dropout is off
    std::vector<LstmForwardResult> decoder;
    std::vector<Vector> decoder_mask;     // empty when dropout is off
    std::vector<Vector> head_inputs;      // decoder outputs after dropout
    Matrix output;
};

Vector dropout_mask(std::size_t n, double rate, Rng& rng) {
    Vector mask(n);
    const double keep_scale = 1.0 / (1.0 - rate);
    for (double& v : mask) v = rng.bernoulli(rate) ? 0.0 : keep_scale;
    return mask;
}

void check_window(const SeqAutoencoderModel& model, const Matrix& window) {
    if (window.rows() != model.timesteps || window.cols() != model.features) {
        fail(ErrorKind::shape, "window is " + window.shape_string() + ", model expects " +
                                   std::to_string(model.timesteps) + "x" + std::to_string(model.features));
    }
}

void run_forward(const SeqAutoencoderModel& model, const Matrix& window, bool train_mode, Rng& rng,
                 ForwardTrace& trace) {
    check_window(model, window);
    const auto& p = model.params;
    const bool use_dropout = train_mode && model.dropout_rate > 0.0;
    const std::size_t steps = model.timesteps;

    std::vector<Vector> seq(steps);
    for (std::size_t t = 0; t < steps; ++t) seq[t].assign(window.row(t).begin(), window.row(t).end());

    trace.encoder.clear();
    for (std::size_t l = 0; l < p.encoder.size(); ++l) {
        const bool last = l + 1 == p.encoder.size();
        trace.encoder.push_back(
            lstm_forward(p.encoder[l], seq, LstmStepState::zeros(p.encoder[l].hidden_size), !last));
        seq = trace.encoder.back().outputs;
    }

    Vector latent = seq.front();
    trace.latent_mask.clear();
    if (use_dropout) {
        trace.latent_mask = dropout_mask(latent.size(), model.dropout_rate, rng);
        for (std::size_t k = 0; k < latent.size(); ++k) latent[k] *= trace.latent_mask[k];
    }

    seq.assign(steps, latent);
    trace.decoder.clear();
    for (const auto& layer : p.decoder) {
        trace.decoder.push_back(lstm_forward(layer, seq, LstmStepState::zeros(layer.hidden_size), true));
        seq = trace.decoder.back().outputs;
    }

    trace.decoder_mask.clear();
    if (use_dropout) {
        for (auto& h : seq) {
            trace.decoder_mask.push_back(dropout_mask(h.size(), model.dropout_rate, rng));
            for (std::size_t k = 0; k < h.size(); ++k) h[k] *= trace.decoder_mask.back()[k];
        }
    }
    trace.head_inputs = std::move(seq);

    trace.output = Matrix(steps, model.features);
    for (std::size_t t = 0; t < steps; ++t) {
        auto row = trace.output.row(t);
        std::copy(p.head_bias.begin(), p.head_bias.end(), row.begin());
        matvec_accumulate(p.head_weight, trace.head_inputs[t], row);
    }
}

} // namespace

Matrix forward(const SeqAutoencoderModel& model, const Matrix& window, bool train_mode, Rng& rng) {
    ForwardTrace trace;
    run_forward(model, window, train_mode, rng, trace);
    return std::move(trace.output);
}

Matrix reconstruct(const SeqAutoencoderModel& model, const Matrix& window) {
    Rng unused(0);
    return forward(model, window, false, unused);
}

double reconstruction_mae(const Matrix& reconstruction, const Matrix& window) {
    if (reconstruction.rows() != window.rows() || reconstruction.cols() != window.cols()) {
        fail(ErrorKind::shape, "reconstruction " + reconstruction.shape_string() + " vs window " +
                                   window.shape_string());
    }
    const auto a = reconstruction.data();
    const auto b = window.data();
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
    return sum / static_cast<double>(a.size());
}

double mae_loss_and_gradient(const SeqAutoencoderModel& model, const Matrix& window, bool train_mode, Rng& rng,
                             ModelParameters& grads, double scale) {
    ForwardTrace trace;
    run_forward(model, window, train_mode, rng, trace);
    const auto& p = model.params;
    const std::size_t steps = model.timesteps;
    const std::size_t m = model.features;
    const double per_entry = scale / static_cast<double>(steps * m);

    // Head.
    std::vector<Vector> grad_seq(steps, Vector(p.head_weight.cols(), 0.0));
    Vector dy(m);
    for (std::size_t t = 0; t < steps; ++t) {
        for (std::size_t f = 0; f < m; ++f) {
            const double diff = trace.output(t, f) - window(t, f);
            dy[f] = diff > 0.0 ? per_entry : (diff < 0.0 ? -per_entry : 0.0);
            grads.head_bias[f] += dy[f];
        }
        outer_accumulate(grads.head_weight, dy, trace.head_inputs[t]);
        matvec_transposed_accumulate(p.head_weight, dy, grad_seq[t]);
        if (!trace.decoder_mask.empty()) {
            for (std::size_t k = 0; k < grad_seq[t].size(); ++k) grad_seq[t][k] *= trace.decoder_mask[t][k];
        }
    }

    // Decoder, last layer first.
    std::vector<Vector> input_grads;
    for (std::size_t l = p.decoder.size(); l-- > 0;) {
        lstm_backward_accumulate(p.decoder[l], trace.decoder[l].caches, grad_seq, grads.decoder[l], input_grads);
        grad_seq = std::move(input_grads);
    }

    // RepeatVector: the latent fed every decoder step, so its gradient is the sum.
    Vector dlatent(p.encoder.back().hidden_size, 0.0);
    for (const Vector& g : grad_seq) {
        for (std::size_t k = 0; k < dlatent.size(); ++k) dlatent[k] += g[k];
    }
    if (!trace.latent_mask.empty()) {
        for (std::size_t k = 0; k < dlatent.size(); ++k) dlatent[k] *= trace.latent_mask[k];
    }

    grad_seq.assign(1, std::move(dlatent));
    for (std::size_t l = p.encoder.size(); l-- > 0;) {
        lstm_backward_accumulate(p.encoder[l], trace.encoder[l].caches, grad_seq, grads.encoder[l], input_grads);
        grad_seq = std::move(input_grads);
    }

    return reconstruction_mae(trace.output, window);
}

TrainResult train(SeqAutoencoderModel model, const WindowSet& windows, const TrainConfig& cfg) {
    cfg.validate();
    model.validate();
    if (windows.empty()) fail(ErrorKind::empty_input, "training needs at least one window");
    if (windows.window_len() != model.timesteps || windows.features() != model.features) {
        fail(ErrorKind::shape, "windows are " + std::to_string(windows.window_len()) + "x" +
                                   std::to_string(windows.features()) + ", model expects " +
                                   std::to_string(model.timesteps) + "x" + std::to_string(model.features));
    }

    TrainResult result;
    if (cfg.epochs == 0) {
        result.model = std::move(model);
        return result;
    }
    model.dropout_rate = cfg.dropout;

    const std::size_t total = windows.count();
    const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(total) * cfg.validation_fraction));
    const std::size_t n_train = total - n_val;
    if (n_train == 0) fail(ErrorKind::empty_input, "validation split leaves no training windows");

    std::vector<Matrix> cached(total);
    for (std::size_t i = 0; i < total; ++i) cached[i] = windows.window(i);

    ModelParameters grads = model.params.zeros_like();
    std::vector<std::size_t> sizes;
    for (const auto& t : model.params.tensors()) sizes.push_back(t.size());
    AdamState adam = AdamState::for_sizes(sizes);

    Rng shuffle_rng(Rng::sub_seed(cfg.seed, "shuffle"));
    Rng dropout_rng(Rng::sub_seed(cfg.seed, "dropout"));

    std::vector<std::size_t> order(n_train);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = n_train; i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);

        double epoch_sum = 0.0;
        for (std::size_t begin = 0; begin < n_train; begin += cfg.batch_size) {
            const std::size_t end = std::min(begin + cfg.batch_size, n_train);
            const double scale = 1.0 / static_cast<double>(end - begin);
            grads.set_zero();
            for (std::size_t b = begin; b < end; ++b) {
                epoch_sum += mae_loss_and_gradient(model, cached[order[b]], true, dropout_rng, grads, scale);
            }
            const auto param_views = model.params.tensors();
            const auto grad_mut = grads.tensors();
            std::vector<std::span<const double>> grad_views(grad_mut.begin(), grad_mut.end());
            adam_step(param_views, grad_views, adam, cfg.learning_rate);
        }

        EpochLoss loss;
        loss.train_loss = epoch_sum / static_cast<double>(n_train);
        if (n_val > 0) {
            double val_sum = 0.0;
            for (std::size_t i = n_train; i < total; ++i) val_sum += reconstruction_mae(reconstruct(model, cached[i]), cached[i]);
            loss.val_loss = val_sum / static_cast<double>(n_val);
        }
        result.trace.epochs.push_back(loss);
    }
    result.model = std::move(model);
    return result;
}

} // namespace lstmae
