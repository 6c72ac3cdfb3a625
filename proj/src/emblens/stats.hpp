#ifndef EMBLENS_STATS_HPP
#define EMBLENS_STATS_HPP

#include <cstddef>
#include <span>

namespace emblens {

// Regularized incomplete beta function I_x(a, b), Lentz continued fraction.
double incomplete_beta(double a, double b, double x);

// Two-sided tail probability of the Student-t distribution with df degrees
// of freedom: P(|T| >= |t|).
double student_t_two_sided(double t, double df);

struct PearsonResult {
    double r = 0.0;
    double p = 1.0;
    std::size_t n = 0;
};

// Pearson correlation with the two-sided p-value from
// t = r * sqrt((n-2) / (1 - r^2)) under Student-t with n-2 df.
// Requires n >= 3 and both sequences non-constant.
PearsonResult pearson(std::span<const double> x, std::span<const double> y);

} // namespace emblens

#endif
