#include "lstmae/core_math.hpp"

#include <cmath>

namespace lstmae {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::shape: return "shape";
    case ErrorKind::empty_input: return "empty_input";
    case ErrorKind::insufficient_data: return "insufficient_data";
    case ErrorKind::malformed_file: return "malformed_file";
    case ErrorKind::version: return "version";
    case ErrorKind::degenerate_scale: return "degenerate_scale";
    case ErrorKind::degenerate_labels: return "degenerate_labels";
    case ErrorKind::empty_series: return "empty_series";
    case ErrorKind::empty_split: return "empty_split";
    case ErrorKind::validation: return "validation";
    case ErrorKind::parse: return "parse";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
    case ErrorKind::invariant: return "invariant";
    }
    return "unknown";
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        fail(ErrorKind::shape, "matrix data has " + std::to_string(data_.size()) +
                                   " values, expected " + shape_string());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols()) fail(ErrorKind::shape, "ragged rows in Matrix::from_rows");
        for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
    }
    return m;
}

std::string Matrix::shape_string() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        fail(ErrorKind::shape, "matmul shape mismatch: " + a.shape_string() + " * " + b.shape_string());
    }
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto out_row = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            const auto b_row = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
        }
    }
    return out;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
    Vector y(a.rows(), 0.0);
    matvec_accumulate(a, x, y);
    return y;
}

void matvec_accumulate(const Matrix& a, std::span<const double> x, std::span<double> y) {
    if (a.cols() != x.size() || a.rows() != y.size()) {
        fail(ErrorKind::shape, "matvec shape mismatch: " + a.shape_string() + " * " +
                                   std::to_string(x.size()) + " -> " + std::to_string(y.size()));
    }
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const auto row = a.row(r);
        double sum = 0.0;
        for (std::size_t c = 0; c < row.size(); ++c) sum += row[c] * x[c];
        y[r] += sum;
    }
}

void matvec_transposed_accumulate(const Matrix& a, std::span<const double> x, std::span<double> y) {
    if (a.rows() != x.size() || a.cols() != y.size()) {
        fail(ErrorKind::shape, "transposed matvec shape mismatch: " + a.shape_string() + "^T * " +
                                   std::to_string(x.size()) + " -> " + std::to_string(y.size()));
    }
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const double xr = x[r];
        if (xr == 0.0) continue;
        const auto row = a.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) y[c] += row[c] * xr;
    }
}

void outer_accumulate(Matrix& a, std::span<const double> u, std::span<const double> v) {
    if (a.rows() != u.size() || a.cols() != v.size()) {
        fail(ErrorKind::shape, "outer product shape mismatch: " + std::to_string(u.size()) + "x" +
                                   std::to_string(v.size()) + " into " + a.shape_string());
    }
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const double ur = u[r];
        if (ur == 0.0) continue;
        auto row = a.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) row[c] += ur * v[c];
    }
}

double sigmoid(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Vector sigmoid(std::span<const double> x) {
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = sigmoid(x[i]);
    return out;
}

Vector tanh(std::span<const double> x) {
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::tanh(x[i]);
    return out;
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) fail(ErrorKind::config, "Rng::below called with n = 0");
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
        v = engine_();
    } while (v >= limit);
    return v % n;
}

double Rng::normal() {
    // Box-Muller; u1 is shifted off zero so log() stays finite.
    const double u1 = (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t Rng::sub_seed(std::uint64_t seed, std::string_view name) {
    // FNV-1a over the name, folded into the seed with a splitmix64 finalizer.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : name) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::uint64_t z = seed ^ h;
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Matrix glorot_init(std::size_t rows, std::size_t cols, Rng& rng) {
    if (rows == 0 || cols == 0) {
        fail(ErrorKind::shape, "glorot_init needs nonzero dimensions, got " + std::to_string(rows) +
                                   "x" + std::to_string(cols));
    }
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.uniform(-limit, limit);
    return m;
}

AdamState AdamState::for_sizes(std::span<const std::size_t> sizes) {
    AdamState state;
    for (std::size_t n : sizes) {
        state.first_moment.emplace_back(n, 0.0);
        state.second_moment.emplace_back(n, 0.0);
    }
    return state;
}

void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads,
               AdamState& state,
               double learning_rate) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
        params.size() != state.second_moment.size()) {
        fail(ErrorKind::shape, "adam_step: " + std::to_string(params.size()) + " parameter tensors, " +
                                   std::to_string(grads.size()) + " gradient tensors, " +
                                   std::to_string(state.first_moment.size()) + " moment tensors");
    }
    for (std::size_t t = 0; t < params.size(); ++t) {
        if (params[t].size() != grads[t].size() || params[t].size() != state.first_moment[t].size()) {
            fail(ErrorKind::shape, "adam_step: tensor " + std::to_string(t) + " has " +
                                       std::to_string(params[t].size()) + " parameters but " +
                                       std::to_string(grads[t].size()) + " gradients");
        }
    }

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);

    for (std::size_t k = 0; k < params.size(); ++k) {
        auto& m = state.first_moment[k];
        auto& v = state.second_moment[k];
        auto p = params[k];
        auto g = grads[k];
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            p[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

} // namespace lstmae
