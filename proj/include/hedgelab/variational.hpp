#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace hedgelab::varopt {

// Increasing convex piecewise-linear function on [0,1] with y(0) = 0 and
// first slope a/2; the admissible class of the reduced variational problem.
struct ConvexPL {
    std::vector<double> knots;   // u_0 = 0 < ... < u_m = 1
    std::vector<double> values;  // y at the knots

    std::size_t segments() const { return knots.empty() ? 0 : knots.size() - 1; }
    double slope(std::size_t i) const {
        return (values[i + 1] - values[i]) / (knots[i + 1] - knots[i]);
    }
    void validate(double a_val) const;
};

// eta_a[y] = int_0^1 (y(u) + gamma + (2 gamma / a)(u-1) y'(u))^2 du, evaluated
// segment by segment in closed form (the integrand is linear in u on each
// segment, so no quadrature error).
double eta_functional(const ConvexPL& y, double a_val, double gamma);

// Closed form of int_v^1 (w + z(u-v) + gamma + beta(u-1) z)^2 du.
double eta_segment(double v, double w, double z, double beta, double gamma);

// Interior knot and scale of the optimal profile in the 1 < a/gamma < 2 case:
// u0 = 4 gamma (a-gamma) / (a (4 gamma - a)),
// r  = (a gamma/(2 gamma - a)) (1-u0)^(2 - a/(2 gamma)).
std::pair<double, double> case3_knot(double a_val, double gamma);

// Derivative identity of the tail objective: central finite difference of the
// composite form in z against the factored rational expression. Returns
// (lhs, rhs) for comparison.
std::pair<double, double> case3_tail_derivative_check(double u, double y_val, double z,
                                                      double a_val, double gamma);

struct BruteForceResult {
    double min_value = 0.0;
    ConvexPL minimizer;
    std::string case_tag;
};

// Projected coordinate descent over nonnegative slope increments added to the
// base slope a/2 (every such profile is admissible by construction), with
// random restarts. Knots are uniform over the head of [0,1] with a geometric
// ladder toward u = 1, plus the case3_knot knot when 1 < a/gamma < 2.
BruteForceResult brute_force_min(double a_val, double gamma, int m, int iters,
                                 std::uint64_t seed = 7, int restarts = 20);

std::string eta_case_tag(double a_val, double gamma);

}  // namespace hedgelab::varopt
