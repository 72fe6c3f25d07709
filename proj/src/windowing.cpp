#include "lstmae/windowing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lstmae {

WindowSet::WindowSet(std::vector<double> points, std::size_t features, std::size_t window_len)
    : window_len_(window_len), features_(features), points_(std::move(points)) {
    if (features_ == 0 || window_len_ == 0) {
        fail(ErrorKind::shape, "window length and feature count must be at least 1");
    }
    if (points_.size() % features_ != 0) {
        fail(ErrorKind::shape, std::to_string(points_.size()) + " values do not divide into points of " +
                                   std::to_string(features_) + " features");
    }
    source_len_ = points_.size() / features_;
    if (source_len_ < window_len_) {
        fail(ErrorKind::insufficient_data, "series of length " + std::to_string(source_len_) +
                                               " is shorter than window length " + std::to_string(window_len_));
    }
}

std::size_t WindowSet::coverage(std::size_t p) const noexcept {
    if (p >= source_len_) return 0;
    return std::min({p + 1, window_len_, source_len_ - p, count()});
}

Matrix WindowSet::window(std::size_t i) const {
    const auto data = window_data(i);
    return Matrix(window_len_, features_, std::vector<double>(data.begin(), data.end()));
}

WindowSet WindowSet::slice(std::size_t first, std::size_t n) const {
    if (n == 0 || first + n > count()) {
        fail(ErrorKind::shape, "window slice [" + std::to_string(first) + ", " + std::to_string(first + n) +
                                   ") outside " + std::to_string(count()) + " windows");
    }
    const auto begin = points_.begin() + static_cast<std::ptrdiff_t>(first * features_);
    const auto end = begin + static_cast<std::ptrdiff_t>((n + window_len_ - 1) * features_);
    return WindowSet(std::vector<double>(begin, end), features_, window_len_);
}

WindowSet make_windows(std::span<const double> points, std::size_t features, std::size_t window_len) {
    return WindowSet(std::vector<double>(points.begin(), points.end()), features, window_len);
}

PointLossVector per_point_loss(const WindowSet& windows, std::span<const Matrix> reconstructions) {
    if (reconstructions.size() != windows.count()) {
        fail(ErrorKind::shape, std::to_string(reconstructions.size()) + " reconstructions for " +
                                   std::to_string(windows.count()) + " windows");
    }
    const std::size_t m = windows.features();
    const std::size_t t_len = windows.window_len();
    std::vector<double> sum(windows.source_len(), 0.0);

    for (std::size_t w = 0; w < windows.count(); ++w) {
        const Matrix& rec = reconstructions[w];
        if (rec.rows() != t_len || rec.cols() != m) {
            fail(ErrorKind::shape, "reconstruction " + std::to_string(w) + " is " + rec.shape_string() +
                                       ", expected " + std::to_string(t_len) + "x" + std::to_string(m));
        }
        const auto x = windows.window_data(w);
        for (std::size_t k = 0; k < t_len; ++k) {
            double err = 0.0;
            for (std::size_t f = 0; f < m; ++f) err += std::abs(rec(k, f) - x[k * m + f]);
            sum[windows.start(w) + k] += err / static_cast<double>(m);
        }
    }

    for (std::size_t p = 0; p < sum.size(); ++p) sum[p] /= static_cast<double>(windows.coverage(p));
    return sum;
}

} // namespace lstmae
