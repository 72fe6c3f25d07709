#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lstmae/core_math.hpp"

namespace lstmae {

// Stride-1 windows of length T over an N-point series of m-feature points.
// Window i covers source points [i, i + T).
class WindowSet {
public:
    WindowSet() = default;
    WindowSet(std::vector<double> points, std::size_t features, std::size_t window_len);

    std::size_t source_len() const noexcept { return source_len_; }
    std::size_t window_len() const noexcept { return window_len_; }
    std::size_t features() const noexcept { return features_; }
    std::size_t count() const noexcept { return empty() ? 0 : source_len_ - window_len_ + 1; }
    bool empty() const noexcept { return source_len_ == 0; }

    std::size_t start(std::size_t window) const noexcept { return window; }
    // Number of windows containing source point p.
    std::size_t coverage(std::size_t p) const noexcept;

    // T x m values of window i, row-major.
    std::span<const double> window_data(std::size_t i) const noexcept {
        return {points_.data() + i * features_, window_len_ * features_};
    }
    Matrix window(std::size_t i) const;

    std::span<const double> points() const noexcept { return points_; }

    // Windows [first, first + n) as a new set over the matching slice of points.
    WindowSet slice(std::size_t first, std::size_t n) const;

private:
    std::size_t source_len_ = 0;
    std::size_t window_len_ = 0;
    std::size_t features_ = 0;
    std::vector<double> points_;
};

using PointLossVector = std::vector<double>;

// `points` holds N x m values row-major.
WindowSet make_windows(std::span<const double> points, std::size_t features, std::size_t window_len);
inline WindowSet make_windows(std::span<const double> series, std::size_t window_len) {
    return make_windows(series, 1, window_len);
}

// loss(p) = mean over windows covering p of the feature-averaged |x_hat - x|.
// The denominator is the coverage count, so exactly reconstructed points are
// still averaged correctly.
PointLossVector per_point_loss(const WindowSet& windows, std::span<const Matrix> reconstructions);

} // namespace lstmae
