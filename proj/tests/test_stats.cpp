#include <doctest.h>

#include <cmath>
#include <vector>

#include "emblens/error.hpp"
#include "emblens/stats.hpp"

using namespace emblens;

namespace {

// Standardize to zero mean, unit sample norm.
std::vector<double> standardized(std::vector<double> v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double& x : v) {
        x -= mean;
        ss += x * x;
    }
    const double scale = std::sqrt(ss);
    for (double& x : v) x /= scale;
    return v;
}

} // namespace

TEST_SUITE("stats") {

TEST_CASE("perfect linearity gives r=1 and vanishing p") {
    std::vector<double> x, y;
    for (int i = 0; i < 10; ++i) {
        x.push_back(i);
        y.push_back(2.0 * i + 1.0);
    }
    const auto result = pearson(x, y);
    CHECK(result.r == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(result.p < 1e-12);
}

TEST_CASE("r = 0.4438 at n = 20 sits on the two-sided 0.05 boundary") {
    // Build sequences whose sample correlation is exactly the target: mix a
    // standardized ramp with a standardized vector orthogonal to it.
    const double target_r = 0.4438;
    std::vector<double> ramp, quad;
    for (int i = 0; i < 20; ++i) {
        ramp.push_back(i);
        quad.push_back(static_cast<double>(i) * i);
    }
    const auto x = standardized(ramp);
    auto z = standardized(quad);
    double proj = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) proj += z[i] * x[i];
    for (std::size_t i = 0; i < z.size(); ++i) z[i] -= proj * x[i];
    z = standardized(z);

    std::vector<double> y(20);
    const double mix = std::sqrt(1.0 - target_r * target_r);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = target_r * x[i] + mix * z[i];

    const auto result = pearson(x, y);
    CHECK(result.r == doctest::Approx(target_r).epsilon(1e-12));
    CHECK(result.p == doctest::Approx(0.05).epsilon(0.02)); // |p - 0.05| well under 1e-3
    CHECK(std::fabs(result.p - 0.05) < 1e-3);
}

TEST_CASE("antisymmetric x against symmetric y gives r = 0") {
    std::vector<double> x, y;
    for (int i = -3; i <= 3; ++i) {
        x.push_back(i);
        y.push_back(static_cast<double>(i) * i);
    }
    const auto result = pearson(x, y);
    CHECK(result.r == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("pearson is symmetric and affine-invariant") {
    const std::vector<double> x = {0.3, 1.7, 2.2, 4.8, 5.1, 6.0};
    const std::vector<double> y = {9.1, 4.2, 5.5, 1.0, 2.2, 0.4};
    const auto xy = pearson(x, y);
    const auto yx = pearson(y, x);
    CHECK(xy.r == doctest::Approx(yx.r).epsilon(1e-12));
    CHECK(xy.p == doctest::Approx(yx.p).epsilon(1e-12));

    std::vector<double> x_affine;
    for (double v : x) x_affine.push_back(3.5 * v - 11.0);
    const auto transformed = pearson(x_affine, y);
    CHECK(transformed.r == doctest::Approx(xy.r).epsilon(1e-12));
    CHECK(transformed.p == doctest::Approx(xy.p).epsilon(1e-12));
}

TEST_CASE("pearson rejects constant or short input") {
    const std::vector<double> constant = {1.0, 1.0, 1.0, 1.0};
    const std::vector<double> ramp = {1.0, 2.0, 3.0, 4.0};
    CHECK_THROWS_AS(pearson(constant, ramp), Error);
    const std::vector<double> two = {1.0, 2.0};
    CHECK_THROWS_AS(pearson(two, two), Error);
}

TEST_CASE("p decreases monotonically in |r| for fixed n") {
    const double df = 10.0;
    double prev = 1.1;
    for (double r = 0.0; r < 0.999; r += 0.05) {
        const double t = r * std::sqrt(df / (1.0 - r * r));
        const double p = student_t_two_sided(t, df);
        CHECK(p < prev + 1e-15);
        prev = p;
    }
}

TEST_CASE("incomplete beta matches closed forms") {
    // I_x(1, 1) = x.
    CHECK(incomplete_beta(1.0, 1.0, 0.37) == doctest::Approx(0.37).epsilon(1e-12));
    // I_x(2, 1) = x^2.
    CHECK(incomplete_beta(2.0, 1.0, 0.6) == doctest::Approx(0.36).epsilon(1e-12));
    // Symmetry: I_x(a, b) = 1 - I_{1-x}(b, a).
    const double v = incomplete_beta(2.5, 4.0, 0.3);
    CHECK(v == doctest::Approx(1.0 - incomplete_beta(4.0, 2.5, 0.7)).epsilon(1e-10));
    // Student-t with df=1 is a Cauchy: two-sided p at t=1 is exactly 0.5.
    CHECK(student_t_two_sided(1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-8));
}

} // TEST_SUITE
