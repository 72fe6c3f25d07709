#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "lstmae/core_math.hpp"
#include "oracles.hpp"

namespace lstmae {
namespace {

using testing::error_kind_of;

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
    Matrix m(r, c);
    for (auto& x : m.data()) x = rng.uniform(-2.0, 2.0);
    return m;
}

Matrix triple_loop(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            out(i, j) = s;
        }
    return out;
}

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
    const Matrix m = Matrix::from_rows({{1, 2}, {3, 4}});
    EXPECT_EQ(matmul(Matrix::identity(2), m), m);
}

TEST(Matmul, RowTimesColumn) {
    const Matrix out = matmul(Matrix::from_rows({{1, 2}}), Matrix::from_rows({{3}, {4}}));
    ASSERT_EQ(out.rows(), 1u);
    ASSERT_EQ(out.cols(), 1u);
    EXPECT_EQ(out(0, 0), 11.0);
}

TEST(Matmul, MatchesTripleLoopOracle) {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix a = random_matrix(3, 4, rng);
        const Matrix b = random_matrix(4, 2, rng);
        const Matrix got = matmul(a, b);
        const Matrix want = triple_loop(a, b);
        for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got.data()[i], want.data()[i], 1e-12);
    }
}

TEST(Matmul, ShapeMismatchNamesBothShapes) {
    const auto msg = testing::error_message_of([] { matmul(Matrix(2, 3), Matrix(2, 3)); });
    EXPECT_NE(msg.find("2x3"), std::string::npos) << msg;
    EXPECT_EQ(error_kind_of([] { matmul(Matrix(2, 3), Matrix(2, 3)); }), ErrorKind::shape);
}

TEST(Matmul, AssociativeOnRandomTriples) {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t p = 1 + rng.below(5), q = 1 + rng.below(5), r = 1 + rng.below(5), s = 1 + rng.below(5);
        const Matrix a = random_matrix(p, q, rng), b = random_matrix(q, r, rng), c = random_matrix(r, s, rng);
        const Matrix left = matmul(matmul(a, b), c);
        const Matrix right = matmul(a, matmul(b, c));
        for (std::size_t i = 0; i < left.size(); ++i) {
            EXPECT_LE(testing::relative_error(left.data()[i], right.data()[i], 1e-12), 1e-9);
        }
    }
}

TEST(Matrix, DataConstructorChecksLength) {
    EXPECT_EQ(error_kind_of([] { Matrix(2, 2, std::vector<double>{1, 2, 3}); }), ErrorKind::shape);
}

TEST(Matvec, AgreesWithMatmul) {
    Rng rng(3);
    const Matrix a = random_matrix(3, 5, rng);
    const Matrix x = random_matrix(5, 1, rng);
    const Vector y = matvec(a, x.data());
    const Matrix want = matmul(a, x);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(y[i], want(i, 0), 1e-12);

    Vector yt(5, 1.0);
    matvec_transposed_accumulate(a, y, yt);
    for (std::size_t j = 0; j < 5; ++j) {
        double s = 1.0;
        for (std::size_t i = 0; i < 3; ++i) s += a(i, j) * y[i];
        EXPECT_NEAR(yt[j], s, 1e-12);
    }
}

TEST(Sigmoid, Examples) {
    EXPECT_EQ(sigmoid(0.0), 0.5);
    const Vector zero{0.0};
    EXPECT_EQ(lstmae::tanh(zero)[0], 0.0);
    const double tiny = sigmoid(-50.0);
    EXPECT_GT(tiny, 0.0);
    EXPECT_LE(tiny, 1e-20);
    EXPECT_FALSE(std::isnan(sigmoid(-1000.0)));
    EXPECT_FALSE(std::isnan(sigmoid(1000.0)));
    EXPECT_EQ(sigmoid(1000.0), 1.0);
}

TEST(Sigmoid, ComplementIdentity) {
    Rng rng(17);
    for (int i = 0; i < 2000; ++i) {
        const double x = rng.uniform(-30.0, 30.0);
        EXPECT_NEAR(sigmoid(x) + sigmoid(-x), 1.0, 1e-12) << x;
    }
}

TEST(Sigmoid, TanhIdentity) {
    Rng rng(19);
    for (int i = 0; i < 2000; ++i) {
        const double x = rng.uniform(-15.0, 15.0);
        EXPECT_NEAR(std::tanh(x), 2.0 * sigmoid(2.0 * x) - 1.0, 1e-12) << x;
    }
}

TEST(Glorot, SingleEntryBound) {
    Rng rng(1);
    const Matrix m = glorot_init(1, 1, rng);
    EXPECT_LE(std::abs(m(0, 0)), std::sqrt(3.0));
}

TEST(Glorot, SquareBound) {
    Rng rng(2);
    const Matrix m = glorot_init(4, 4, rng);
    for (double v : m.data()) EXPECT_LE(std::abs(v), std::sqrt(6.0 / 8.0));
}

TEST(Glorot, DeterministicPerSeed) {
    Rng a(99), b(99);
    EXPECT_EQ(glorot_init(7, 3, a), glorot_init(7, 3, b));
}

TEST(Glorot, ZeroDimensionRejected) {
    Rng rng(1);
    EXPECT_EQ(error_kind_of([&] { glorot_init(0, 3, rng); }), ErrorKind::shape);
}

TEST(Rng, ReproducibleStream) {
    Rng a(123456789), b(123456789);
    for (int i = 0; i < 10000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
    Rng c(7), d(7);
    for (int i = 0; i < 10000; ++i) {
        ASSERT_EQ(c.uniform(), d.uniform());
        ASSERT_EQ(c.normal(), d.normal());
    }
}

TEST(Rng, UniformRangeAndMoments) {
    Rng rng(8);
    double sum = 0.0, sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    EXPECT_NEAR(sum / n, 0.0, 0.05);
    EXPECT_NEAR(sq / n, 1.0, 0.05);
}

TEST(Rng, BelowStaysInRange) {
    Rng rng(4);
    for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.below(7), 7u);
    EXPECT_EQ(error_kind_of([&] { rng.below(0); }), ErrorKind::config);
}

TEST(Rng, SubSeedsDifferByName) {
    EXPECT_NE(Rng::sub_seed(42, "init"), Rng::sub_seed(42, "dropout"));
    EXPECT_NE(Rng::sub_seed(42, "init"), Rng::sub_seed(43, "init"));
    EXPECT_EQ(Rng::sub_seed(42, "shuffle"), Rng::sub_seed(42, "shuffle"));
}

void step(std::vector<double>& w, const std::vector<double>& g, AdamState& s, double lr) {
    const std::span<double> p[] = {std::span<double>(w)};
    const std::span<const double> gr[] = {std::span<const double>(g)};
    adam_step(p, gr, s, lr);
}

TEST(Adam, FirstStepMovesByLearningRate) {
    std::vector<double> w{0.5};
    const std::size_t sizes[] = {1};
    auto s = AdamState::for_sizes(sizes);
    step(w, {1.0}, s, 0.01);
    EXPECT_NEAR(w[0], 0.5 - 0.01, 1e-9);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> w(1 + rng.below(6));
        for (auto& x : w) x = rng.uniform(-5.0, 5.0);
        const auto before = w;
        const std::size_t sizes[] = {w.size()};
        auto s = AdamState::for_sizes(sizes);
        const std::vector<double> zero(w.size(), 0.0);
        for (int i = 0; i < 50; ++i) step(w, zero, s, rng.uniform(1e-4, 1.0));
        EXPECT_EQ(w, before);
        EXPECT_EQ(s.step, 50u);
    }
}

TEST(Adam, MomentsDecayUnderZeroGradient) {
    std::vector<double> w{0.3, -2.0};
    const std::size_t sizes[] = {2};
    auto s = AdamState::for_sizes(sizes);
    step(w, {1.0, -1.0}, s, 0.1);
    double m_prev = std::abs(s.first_moment[0][0]);
    double v_prev = s.second_moment[0][0];
    for (int i = 0; i < 10; ++i) {
        step(w, {0.0, 0.0}, s, 0.1);
        EXPECT_LT(std::abs(s.first_moment[0][0]), m_prev);
        EXPECT_LT(s.second_moment[0][0], v_prev);
        m_prev = std::abs(s.first_moment[0][0]);
        v_prev = s.second_moment[0][0];
    }
}

TEST(Adam, DescendsQuadraticLikeReferenceLoop) {
    // Scalar reference Adam written out longhand.
    double w_ref = 1.0, m = 0.0, v = 0.0;
    for (int t = 1; t <= 100; ++t) {
        const double g = 2.0 * w_ref;
        m = 0.9 * m + 0.1 * g;
        v = 0.999 * v + 0.001 * g * g;
        const double mh = m / (1.0 - std::pow(0.9, t));
        const double vh = v / (1.0 - std::pow(0.999, t));
        w_ref -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
    }

    std::vector<double> w{1.0};
    const std::size_t sizes[] = {1};
    auto s = AdamState::for_sizes(sizes);
    for (int t = 0; t < 100; ++t) step(w, {2.0 * w[0]}, s, 0.1);
    EXPECT_NEAR(w[0], w_ref, 1e-12);
    EXPECT_LT(std::abs(w[0]), 0.5);
}

TEST(Adam, ShapeMismatchRejected) {
    std::vector<double> w{1.0, 2.0};
    std::vector<double> g{1.0};
    const std::size_t sizes[] = {2};
    auto s = AdamState::for_sizes(sizes);
    EXPECT_EQ(error_kind_of([&] { step(w, g, s, 0.1); }), ErrorKind::shape);
}

} // namespace
} // namespace lstmae
