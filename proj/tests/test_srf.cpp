#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "qmc/srf.hpp"

using oracle::Mat;
using oracle::Vec;
using qmc::SrfParams;

TEST_CASE("thin SVD reconstructs with orthonormal factors")
{
    std::mt19937_64 rng(1);
    for (auto [r, c] : {std::pair{7, 4}, std::pair{3, 9}, std::pair{5, 5}}) {
        const Mat x = oracle::gaussian(r, c, rng);
        const auto svd = qmc::thin_svd(x);
        const auto k = std::min(r, c);
        CHECK(svd.singular_values.size() == k);
        for (Eigen::Index i = 1; i < k; ++i) {
            CHECK(svd.singular_values(i - 1) >= svd.singular_values(i));
        }
        CHECK((svd.left_vectors.transpose() * svd.left_vectors - Mat::Identity(k, k)).norm() < 1e-10);
        CHECK((svd.right_vectors.transpose() * svd.right_vectors - Mat::Identity(k, k)).norm() < 1e-10);
        const Mat back = svd.left_vectors * svd.singular_values.asDiagonal() *
                         svd.right_vectors.transpose();
        CHECK((back - x).norm() <= 1e-10 * x.norm());
    }
    Mat bad = Mat::Zero(2, 2);
    bad(0, 1) = std::nan("");
    CHECK_THROWS_AS(qmc::thin_svd(bad), qmc::DomainError);
}

TEST_CASE("srf_value examples")
{
    CHECK(qmc::srf_value(Mat::Zero(4, 3), SrfParams(0.3)) == 0.0);
    CHECK(qmc::srf_value(Mat::Zero(1, 6), SrfParams(5.0)) == 0.0);
    Mat d = Mat::Zero(3, 3);
    d(0, 0) = 1000;
    CHECK(std::abs(qmc::srf_value(d, SrfParams(1.0)) - 1.0) <= 1e-10);

    std::mt19937_64 rng(2);
    for (int t = 0; t < 10; ++t) {
        const Mat x = oracle::gaussian(5, 4, rng);
        CHECK(std::abs(qmc::srf_value(x, SrfParams(0.7)) - oracle::srf_eig(x, 0.7)) <= 1e-10);
    }
    CHECK_THROWS_AS(SrfParams(0.0), qmc::DomainError);
    CHECK_THROWS_AS(SrfParams(-1.0), qmc::DomainError);
}

TEST_CASE("srf_value approaches the rank as delta shrinks")
{
    std::mt19937_64 rng(3);
    for (Eigen::Index rank = 1; rank <= 4; ++rank) {
        Vec s = Vec::Zero(4);
        s.head(rank) = oracle::spread_singular_values(rank, 0.5, 3.0, rng);
        const Mat x = oracle::with_singular_values(6, 5, Vec(s.head(rank)), rng);
        const double smallest = s(rank - 1);
        CHECK(std::abs(qmc::srf_value(x, SrfParams(smallest / 10)) - static_cast<double>(rank)) <= 1e-6);
    }
}

TEST_CASE("srf_value invariants: range, orthogonal invariance, monotone in delta")
{
    std::mt19937_64 rng(4);
    for (int t = 0; t < 20; ++t) {
        const Mat x = oracle::gaussian(6, 4, rng);
        const Mat q = oracle::random_orthonormal(6, 6, rng);
        const Mat p = oracle::random_orthonormal(4, 4, rng);
        const double v = qmc::srf_value(x, SrfParams(1.1));
        CHECK(v >= 0.0);
        CHECK(v <= 4.0);
        CHECK(std::abs(qmc::srf_value(Mat(q * x * p.transpose()), SrfParams(1.1)) - v) <= 1e-8);
        double prev = qmc::srf_value(x, SrfParams(0.01));
        for (double d = 0.02; d < 100; d *= 1.7) {
            const double cur = qmc::srf_value(x, SrfParams(d));
            CHECK(cur <= prev + 1e-15);
            prev = cur;
        }
    }
}

TEST_CASE("srf_gradient closed forms")
{
    Mat one(1, 1);
    one << 2.0;
    CHECK(qmc::srf_gradient(one, SrfParams(1.0))(0, 0) == doctest::Approx(-2.0 * std::exp(-2.0)).epsilon(1e-14));
    one << -2.0;
    CHECK(qmc::srf_gradient(one, SrfParams(1.0))(0, 0) == doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-14));
    CHECK(qmc::srf_gradient(Mat::Zero(3, 2), SrfParams(0.5)).isZero());
}

TEST_CASE("srf_gradient matches finite differences of the smoothed rank")
{
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        const Vec s = oracle::spread_singular_values(4, 0.4, 3.0, rng);
        const Mat x = oracle::with_singular_values(6, 4, s, rng);
        const double delta = 1.3;
        const double h = 1e-5 * std::max(1.0, s(0));
        // G_δ is the gradient of F_δ = n - SRF.
        const Mat fd = -oracle::finite_difference_gradient(
            [&](const Mat& m) { return oracle::srf_eig(m, delta); }, x, h);
        const Mat an = qmc::srf_gradient(x, SrfParams(delta));
        CHECK((an - fd).norm() <= 1e-5 * fd.norm());
    }
}

TEST_CASE("frobenius_limit_gap shrinks at the Taylor rate")
{
    Mat one(1, 1);
    one << 1.0;
    const double expect = std::abs((1 - std::exp(-1.0 / 200)) - 1.0 / 200) / (1.0 / 200);
    CHECK(qmc::frobenius_limit_gap(one, 10.0) == doctest::Approx(expect).epsilon(1e-9));

    std::mt19937_64 rng(6);
    for (int t = 0; t < 5; ++t) {
        Mat x = oracle::gaussian(5, 4, rng);
        x /= qmc::singular_values(x)(0);
        const double g100 = qmc::frobenius_limit_gap(x, 100.0);
        const double g1000 = qmc::frobenius_limit_gap(x, 1000.0);
        CHECK(g100 <= 1e-3);
        CHECK(g1000 <= 1e-5);
        CHECK(g100 / g1000 == doctest::Approx(100.0).epsilon(0.02));
    }
    CHECK_THROWS_AS(qmc::frobenius_limit_gap(Mat::Zero(2, 2), 1.0), qmc::DomainError);
}

TEST_CASE("numerical rank")
{
    std::mt19937_64 rng(7);
    Vec s(3);
    s << 5.0, 2.0, 1.0;
    const Mat x = oracle::with_singular_values(8, 6, s, rng);
    CHECK(qmc::numerical_rank(x, 1e-3) == 3);
    CHECK(qmc::numerical_rank(Mat::Zero(3, 3), 1e-3) == 0);
}
