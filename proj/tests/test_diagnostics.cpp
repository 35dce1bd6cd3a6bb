#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "qmc/diagnostics.hpp"
#include "qmc/srf.hpp"

using oracle::Mat;
using oracle::Vec;
using qmc::ObservedMatrix;
using qmc::QuantizationScheme;

namespace {

// Seeded 2×2 instance with singular values (3, 1) and all four entries observed.
struct Instance2x2 {
    Mat x_star;
    ObservedMatrix obs;
};

Instance2x2 make_2x2(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    Vec s(2);
    s << 3.0, 1.0;
    Mat x = oracle::with_singular_values(2, 2, s, rng);
    const auto scheme = QuantizationScheme::uniform(-4.0, 1.0, 9);
    std::vector<qmc::Observation> obs;
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            obs.push_back({i, j, scheme.quantize(x(static_cast<Eigen::Index>(i),
                                                   static_cast<Eigen::Index>(j)))});
        }
    }
    return {x, ObservedMatrix(2, 2, obs, scheme)};
}

}  // namespace

TEST_CASE("lambda window examples")
{
    const auto w = qmc::lambda_window(2, 10.0, 4, 1.0, 0.01);
    CHECK(std::abs(w.lower - 2.0 / 9.25) <= 1e-12);
    CHECK(std::abs(w.upper - 4.0 / 4.01) <= 1e-12);
    CHECK(w.feasible);

    CHECK_THROWS_AS(qmc::lambda_window(1, 0.75, 4, 1.0, 0.01), qmc::AssumptionError);

    const auto bad = qmc::lambda_window(5, 2.0, 4, 1.0, 0.01);
    CHECK(bad.lower == doctest::Approx(4.0).epsilon(1e-14));
    CHECK_FALSE(bad.feasible);

    CHECK_THROWS_AS(qmc::lambda_window(0, 10.0, 4, 1.0, 0.01), qmc::DomainError);
    CHECK_THROWS_AS(qmc::lambda_window(2, 10.0, 4, -1.0, 0.01), qmc::DomainError);
}

TEST_CASE("lambda window bounds are monotone")
{
    double prev = INFINITY;
    for (double gap : {5.0, 8.0, 13.0, 40.0, 1e3}) {
        const auto w = qmc::lambda_window(3, gap, 10, 1.0, 0.1);
        CHECK(w.lower > 0.0);
        CHECK(w.lower < prev);
        prev = w.lower;
    }
    prev = INFINITY;
    for (std::size_t omega : {1, 2, 5, 20, 100}) {
        const auto w = qmc::lambda_window(1, 1e4, omega, 0.5, 0.1);
        CHECK(w.upper < prev);
        prev = w.upper;
    }
}

TEST_CASE("objective hessian is symmetric")
{
    std::mt19937_64 rng(11);
    const auto scheme = QuantizationScheme::uniform(-2.0, 1.0, 5);
    for (int t = 0; t < 5; ++t) {
        Vec s = oracle::spread_singular_values(3, 0.5, 3.0, rng);
        const Mat x = oracle::with_singular_values(4, 3, s, rng);
        const ObservedMatrix obs(4, 3, {{0, 0, 1}, {1, 2, 3}, {3, 1, 2}}, scheme);
        const Mat h = qmc::objective_hessian(x, obs, 1.3, 0.5);
        REQUIRE(h.rows() == 12);
        CHECK((h - h.transpose()).norm() <= 1e-5 * h.norm());
    }
}

TEST_CASE("convexity probe regimes")
{
    const auto inst = make_2x2(21);
    const Vec sv = oracle::singular_values_eig(inst.x_star);

    SUBCASE("large delta holds")
    {
        const auto r = qmc::convexity_probe(inst.x_star, inst.obs, 100 * sv(0), 0.5, 0.5, 50, 1);
        CHECK(r.condition_holds);
        CHECK(r.min_eigenvalue_found >= -1e-6);
        CHECK(r.sample_points + r.skipped_points == 50);
    }
    SUBCASE("small delta without Huber fails")
    {
        // Far from the origin in units of δ the SRF is flat, so the failure
        // shows up at samples with a singular value within a few δ of zero.
        const double delta = sv(1) / 100;
        const auto r = qmc::convexity_probe(inst.x_star, inst.obs, delta, 0.0, 2 * sv(1), 500, 1);
        CHECK_FALSE(r.condition_holds);
        CHECK(r.min_eigenvalue_found < -1e-6);
    }
    SUBCASE("zero radius probes only the centre")
    {
        const auto r = qmc::convexity_probe(inst.x_star, inst.obs, sv(0), 0.3, 0.0, 1, 1);
        CHECK(r.sample_points == 1);
        const Mat h = qmc::objective_hessian(inst.x_star, inst.obs, sv(0), 0.3);
        const Mat sym = 0.5 * (h + h.transpose());
        Eigen::SelfAdjointEigenSolver<Mat> es(sym);
        CHECK(r.min_eigenvalue_found == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-9));
    }
    SUBCASE("repeated singular values are skipped")
    {
        const Mat id = Mat::Identity(2, 2);
        const auto r = qmc::convexity_probe(id, inst.obs, 1.0, 0.3, 0.0, 1, 1);
        CHECK(r.skipped_points == 1);
        CHECK(r.sample_points == 0);
    }
    SUBCASE("capacity cap")
    {
        const auto scheme = QuantizationScheme::uniform(0.0, 1.0, 3);
        const ObservedMatrix big(9, 8, {{0, 0, 1}}, scheme);
        CHECK_THROWS_AS(qmc::convexity_probe(Mat::Zero(9, 8), big, 1.0, 1.0, 0.1, 1, 1),
                        qmc::CapacityError);
    }
    SUBCASE("probe is deterministic")
    {
        const auto a = qmc::convexity_probe(inst.x_star, inst.obs, sv(1), 0.2, 1.0, 20, 7);
        const auto b = qmc::convexity_probe(inst.x_star, inst.obs, sv(1), 0.2, 1.0, 20, 7);
        CHECK(a.min_eigenvalue_found == b.min_eigenvalue_found);
        CHECK(a.condition_holds == b.condition_holds);
    }
}

TEST_CASE("suggest_delta")
{
    const auto inst = make_2x2(21);

    SUBCASE("returned delta passes the probe and the trace is monotone")
    {
        const auto s = qmc::suggest_delta_traced(inst.x_star, inst.obs, 0.5, 0.5, 20, 3);
        CHECK(qmc::convexity_probe(inst.x_star, inst.obs, s.delta, 0.5, 0.5, 20, 3).condition_holds);
        // Any probed δ at or above a passing one must pass too.
        for (const auto& [d1, ok1] : s.trace) {
            if (!ok1) continue;
            for (const auto& [d2, ok2] : s.trace) {
                if (d2 >= d1) CHECK(ok2);
            }
        }
    }
    SUBCASE("larger regularization allows a smaller delta")
    {
        double prev = INFINITY;
        for (double lambda : {0.1, 1.0, 10.0, 100.0}) {
            const double d = qmc::suggest_delta(inst.x_star, inst.obs, lambda, 0.05, 10, 5);
            CHECK(d <= prev);
            prev = d;
        }
    }
    SUBCASE("without Huber the returned delta still passes its own probe")
    {
        const auto s0 = qmc::suggest_delta_traced(inst.x_star, inst.obs, 0.0, 0.5, 20, 3);
        CHECK(qmc::convexity_probe(inst.x_star, inst.obs, s0.delta, 0.0, 0.5, 20, 3).condition_holds);
    }
}
