#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "qmc/huber.hpp"

using qmc::HuberParams;

TEST_CASE("translated Huber values")
{
    const HuberParams p(1.0, 3.0);
    CHECK(qmc::huber_translated(p, 3.0) == -0.25);
    CHECK(qmc::huber_translated(p, 3.5) == 0.0);
    CHECK(qmc::huber_translated(p, 4.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(qmc::huber_translated(p, 1.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(qmc::huber_translated(p, std::nan("")), qmc::DomainError);
    CHECK_THROWS_AS(HuberParams(0.0, 1.0), qmc::DomainError);
}

TEST_CASE("Huber derivative table")
{
    const HuberParams p(1.0, 3.0);
    CHECK(qmc::huber_derivative(p, 3.0) == 0.0);
    CHECK(qmc::huber_derivative(p, 5.0) == 1.0);
    CHECK(qmc::huber_derivative(p, 3.5) == 1.0);
    CHECK(qmc::huber_derivative(p, 2.5) == -1.0);
    CHECK(qmc::huber_derivative(p, -7.0) == -1.0);
    CHECK(qmc::huber_derivative(p, 3.2) == doctest::Approx(0.4));
}

TEST_CASE("Huber branches meet at the bounds")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> gd(0.1, 3.0), md(-5.0, 5.0);
    for (int t = 0; t < 200; ++t) {
        const double g = gd(rng), m = md(rng);
        const HuberParams p(g, m);
        for (double b : {m - g / 2, m + g / 2}) {
            // Quadratic branch evaluated at the boundary vs the linear formula.
            const double quad = (b - m) * (b - m) - g * g / 4;
            const double lin = g * (std::abs(b - m) - g / 4) - g * g / 4;
            CHECK(std::abs(quad - lin) <= 1e-12 * std::max(1.0, g * g));
            CHECK(std::abs(qmc::huber_translated(p, b)) <= 1e-12 * std::max(1.0, g * g));
            CHECK(std::abs(std::abs(2 * (b - m)) - g) <= 1e-12 * std::max(1.0, g));
        }
    }
}

TEST_CASE("Huber sign contract and chord convexity")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    const HuberParams p(0.8, 0.3);
    for (int t = 0; t < 1000; ++t) {
        const double x = u(rng);
        const double h = qmc::huber_translated(p, x);
        if (std::abs(x - 0.3) < 0.4) {
            CHECK(h < 0.0);
        } else if (std::abs(x - 0.3) > 0.4) {
            CHECK(h > 0.0);
        }
        double a = u(rng), b = u(rng), c = u(rng);
        if (a > b) std::swap(a, b);
        if (b > c) std::swap(b, c);
        if (a > b) std::swap(a, b);
        if (c - a < 1e-9) continue;
        const double w = (c - b) / (c - a);
        const double chord = w * qmc::huber_translated(p, a) + (1 - w) * qmc::huber_translated(p, c);
        CHECK(qmc::huber_translated(p, b) <= chord + 1e-12);
    }
}

TEST_CASE("huber_sum bounds and scalar-loop oracle")
{
    const auto s = qmc::QuantizationScheme::uniform(1.0, 1.0, 5);
    std::vector<qmc::Observation> ten;
    for (std::size_t k = 0; k < 10; ++k) {
        ten.push_back({k / 4, k % 4, k % 5});
    }
    const qmc::ObservedMatrix obs(3, 4, ten, s);
    qmc::DenseMatrix x = obs.zero_filled();
    CHECK(qmc::huber_sum(x, obs) == doctest::Approx(-2.5).epsilon(1e-15));
    for (const auto& o : ten) {
        x(o.row, o.col) += (o.level % 2 ? 0.5 : -0.5);
    }
    CHECK(std::abs(qmc::huber_sum(x, obs)) <= 1e-15);

    std::mt19937_64 rng(21);
    const qmc::ObservedMatrix six(4, 4, {{0, 0, 1}, {0, 3, 4}, {1, 2, 2}, {2, 1, 0}, {3, 3, 3}, {3, 0, 2}}, s);
    for (int t = 0; t < 20; ++t) {
        const oracle::Mat r = 3.0 * oracle::gaussian(4, 4, rng).array() + 3.0;
        CHECK(std::abs(qmc::huber_sum(r, six) - oracle::huber_sum_loop(r, six)) <= 1e-12);
    }
}

TEST_CASE("huber_gradient matches finite differences and is zero off the mask")
{
    const auto s = qmc::QuantizationScheme::uniform(1.0, 1.0, 5);
    const qmc::ObservedMatrix one(2, 2, {{1, 0, 2}}, s);
    qmc::DenseMatrix x = one.zero_filled();
    CHECK(qmc::huber_gradient(x, one).isZero());
    x(1, 0) = 3.0 + 1.0;
    qmc::DenseMatrix expect = qmc::DenseMatrix::Zero(2, 2);
    expect(1, 0) = 1.0;
    CHECK(qmc::huber_gradient(x, one) == expect);

    std::mt19937_64 rng(8);
    std::vector<qmc::Observation> obs;
    std::uniform_int_distribution<std::size_t> lvl(0, 4);
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 0; j < 5; ++j) {
            if ((i + 2 * j) % 3) obs.push_back({i, j, lvl(rng)});
        }
    }
    const qmc::ObservedMatrix big(6, 5, obs, s);
    for (int t = 0; t < 10; ++t) {
        const oracle::Mat r = 1.5 * oracle::gaussian(6, 5, rng).array() + 3.0;
        const auto fd = oracle::finite_difference_gradient(
            [&](const oracle::Mat& m) { return oracle::huber_sum_loop(m, big); }, r, 1e-5 * s.gap());
        const auto an = qmc::huber_gradient(r, big);
        CHECK((an - fd).norm() <= 1e-6 * std::max(1.0, fd.norm()));
        for (std::size_t i = 0; i < 6; ++i) {
            for (std::size_t j = 0; j < 5; ++j) {
                if ((i + 2 * j) % 3 == 0) CHECK(an(i, j) == 0.0);
            }
        }
    }
}

TEST_CASE("Huber kernels are scalar-generic")
{
    const HuberParams p(1.0, 3.0);
    CHECK(qmc::huber_translated(p, 4.5f) == doctest::Approx(1.0f));
    const auto s = qmc::QuantizationScheme::uniform(1.0, 1.0, 5);
    const qmc::ObservedMatrix obs(1, 2, {{0, 1, 2}}, s);
    Eigen::MatrixXf x(1, 2);
    x << 0.f, 3.25f;
    CHECK(qmc::huber_gradient(x, obs)(0, 1) == doctest::Approx(0.5f));
}
