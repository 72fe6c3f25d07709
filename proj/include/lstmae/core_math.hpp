#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lstmae/error.hpp"

namespace lstmae {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    std::string shape_string() const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);

// y = A x
Vector matvec(const Matrix& a, std::span<const double> x);
// y += A x
void matvec_accumulate(const Matrix& a, std::span<const double> x, std::span<double> y);
// y += A^T x
void matvec_transposed_accumulate(const Matrix& a, std::span<const double> x, std::span<double> y);
// A += u v^T
void outer_accumulate(Matrix& a, std::span<const double> u, std::span<const double> v);

double sigmoid(double x) noexcept;
Vector sigmoid(std::span<const double> x);
Vector tanh(std::span<const double> x);

// Seeded generator with a platform-independent draw sequence: mt19937_64 is
// fully specified by the standard, and the real-valued conversions below are
// done by hand instead of through std::*_distribution.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() { return engine_(); }
    // Uniform in [0, 1) with 53 bits of resolution.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);
    double normal();
    bool bernoulli(double p) { return uniform() < p; }

    // Independent stream for a named purpose ("init", "dropout", ...).
    static std::uint64_t sub_seed(std::uint64_t seed, std::string_view name);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

Matrix glorot_init(std::size_t rows, std::size_t cols, Rng& rng);

struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t step = 0;
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;

    // Zeroed moments for parameter tensors of the given element counts.
    static AdamState for_sizes(std::span<const std::size_t> sizes);
};

// One bias-corrected Adam update applied in place to every tensor.
void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads,
               AdamState& state,
               double learning_rate);

} // namespace lstmae
