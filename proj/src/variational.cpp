#include "hedgelab/variational.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hedgelab/rng.hpp"

namespace hedgelab::varopt {

void ConvexPL::validate(double a_val) const {
    if (knots.size() < 2 || knots.size() != values.size())
        throw std::invalid_argument("ConvexPL: need matching knots and values");
    if (knots.front() != 0.0 || knots.back() != 1.0)
        throw std::invalid_argument("ConvexPL: knots must run from 0 to 1");
    if (values.front() != 0.0) throw std::invalid_argument("ConvexPL: y(0) must be 0");
    for (std::size_t i = 0; i + 1 < knots.size(); ++i)
        if (!(knots[i + 1] > knots[i]))
            throw std::invalid_argument("ConvexPL: knots must be strictly increasing");
    const double s0 = slope(0);
    if (std::fabs(s0 - 0.5 * a_val) > 1e-9 * (1.0 + std::fabs(a_val)))
        throw std::invalid_argument("ConvexPL: first slope must equal a/2");
    double prev = s0;
    for (std::size_t i = 1; i + 1 < knots.size(); ++i) {
        const double si = slope(i);
        if (si < prev - 1e-9 * (1.0 + std::fabs(prev)))
            throw std::invalid_argument("ConvexPL: slopes must be nondecreasing");
        if (!(si > 0.0)) throw std::invalid_argument("ConvexPL: slopes must be positive");
        prev = si;
    }
}

namespace {

// int over one segment [p,q] of (y(u) + gamma + beta (u-1) z)^2 with the
// integrand linear in u: exact two-endpoint quadratic rule.
inline double segment_value(double p, double q, double y_p, double z, double beta,
                            double gamma) {
    const double w0 = y_p + gamma + beta * z * (p - 1.0);
    const double w1 = y_p + z * (q - p) + gamma + beta * z * (q - 1.0);
    return (q - p) * (w0 * w0 + w0 * w1 + w1 * w1) / 3.0;
}

}  // namespace

double eta_functional(const ConvexPL& y, double a_val, double gamma) {
    y.validate(a_val);
    if (!(a_val > 0.0)) throw std::invalid_argument("eta_functional: a must be positive");
    const double beta = 2.0 * gamma / a_val;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < y.knots.size(); ++i)
        acc += segment_value(y.knots[i], y.knots[i + 1], y.values[i], y.slope(i), beta, gamma);
    return acc;
}

double eta_segment(double v, double w, double z, double beta, double gamma) {
    if (!(v < 1.0)) throw std::invalid_argument("eta_segment: v must be < 1");
    const double q = beta * beta - beta + 1.0;  // always positive
    const double one_minus_v = 1.0 - v;
    const double lead = z + 1.5 * (1.0 - beta) / q * (gamma + w) / one_minus_v;
    const double term1 = q / 3.0 * one_minus_v * one_minus_v * one_minus_v * lead * lead;
    const double term2 = (beta + 1.0) * (beta + 1.0) / (4.0 * q) * (gamma + w) * (gamma + w) *
                         one_minus_v;
    return term1 + term2;
}

std::pair<double, double> case3_knot(double a_val, double gamma) {
    if (!(gamma > 0.0) || !(a_val / gamma > 1.0) || !(a_val / gamma < 2.0))
        throw std::invalid_argument("case3_knot: requires 1 < a/gamma < 2 with gamma > 0");
    const double u0 = 4.0 * gamma * (a_val - gamma) / (a_val * (4.0 * gamma - a_val));
    const double r = a_val * gamma / (2.0 * gamma - a_val) *
                     std::pow(1.0 - u0, 2.0 - 0.5 * a_val / gamma);
    return {u0, r};
}

std::pair<double, double> case3_tail_derivative_check(double u, double y_val, double z,
                                                      double a_val, double gamma) {
    const double g = gamma;
    const double a = a_val;
    if (!(g > 0.0) || !(a / g > 1.0) || !(a / g < 2.0))
        throw std::invalid_argument("case3_tail_derivative_check: requires 1 < a/gamma < 2");
    if (!(z >= 0.5 * a))
        throw std::invalid_argument("case3_tail_derivative_check: requires z >= a/2");

    auto v_of = [&](double zz) {
        return 2.0 * g / (4.0 * g - a) + (2.0 * g - a) * (u - (g + y_val) / zz) / (4.0 * g - a);
    };
    const double v = v_of(z);
    if (!(v > u && v < 1.0))
        throw std::invalid_argument("case3_tail_derivative_check: v(z) must lie in (u,1)");

    // composite tail objective as a function of z
    auto obj = [&](double zz) {
        const double vz = v_of(zz);
        const double omv = 1.0 - vz;
        const double c1 = 16.0 * g * g * g * (a - g) * zz * zz * omv * omv * omv /
                          (a * a * (2.0 * g - a) * (2.0 * g - a));
        const double f = 1.0 + 2.0 * g / a;
        const double c2 = f * f / 3.0 * zz * zz * (vz * vz * vz - u * u * u);
        const double mixed = g + y_val - zz * (u + 2.0 * g / a);
        const double c3 = f * zz * mixed * (vz * vz - u * u);
        const double c4 = (vz - u) * mixed * mixed;
        return c1 + c2 + c3 + c4;
    };

    const double step = 1e-6 * z;
    const double lhs = (obj(z + step) - obj(z - step)) / (2.0 * step);

    const double p = g + y_val;
    const double f1 = 4.0 * g * z * (1.0 - u) + (2.0 * g - a) * p;
    const double f2 = 2.0 * g * z * (1.0 - u) - (2.0 * g - a) * p;
    const double rhs = f1 * f2 * f2 / (3.0 * z * z * a * a * (4.0 * g - a));
    return {lhs, rhs};
}

std::string eta_case_tag(double a_val, double gamma) {
    if (gamma == 0.0) return "gamma_zero";
    const double ratio = a_val / gamma;
    if (ratio <= -2.0) return "ratio_le_minus_2";
    if (ratio < 1.0) return "ratio_in_minus2_1";
    if (ratio == 1.0) return "a_equals_gamma";
    if (ratio < 2.0) return "ratio_in_1_2";
    return "ratio_ge_2";
}

namespace {

std::vector<double> build_knots(double a_val, double gamma, int m) {
    // Uniform head plus a geometric ladder of knots 1 - delta approaching
    // u = 1. The ladder depth and the head/ladder split adapt to how steep
    // the optimal profile is: unbounded power-law profiles (gamma > 0 with
    // a/gamma < 1, or a = gamma) need a deep sparse ladder, bounded ones a
    // shallow dense ladder.
    const double ratio = gamma != 0.0 ? a_val / gamma : 1e9;
    int m_tail;
    double delta_min;
    if (gamma > 0.0 && ratio < 1.0 + 1e-12) {  // unbounded profiles, incl. a = gamma
        m_tail = std::max(2, m * 7 / 8);
        delta_min = 0.4 * std::pow(2.0, -16);
    } else if (gamma != 0.0 && ratio > 1.0 && ratio < 2.0) {
        m_tail = std::max(2, m * 5 / 8);
        delta_min = 1e-8;
    } else {
        m_tail = std::max(2, m * 5 / 8);
        delta_min = 1e-4;
    }
    const int m_head = m - m_tail;
    const double delta0 = 0.4;
    std::vector<double> knots;
    knots.reserve(static_cast<std::size_t>(m) + 1);
    for (int i = 0; i <= m_head; ++i)
        knots.push_back((1.0 - delta0) * static_cast<double>(i) / static_cast<double>(m_head));
    const double rho = std::pow(delta_min / delta0, 1.0 / static_cast<double>(m_tail - 1));
    for (int k = 1; k < m_tail; ++k) knots.push_back(1.0 - delta0 * std::pow(rho, k));
    knots.push_back(1.0);

    if (gamma != 0.0 && ratio > 1.0 && ratio < 2.0) {
        const double u0 = case3_knot(a_val, gamma).first;
        // replace the nearest interior knot by u0
        std::size_t best = 1;
        double best_d = 2.0;
        for (std::size_t i = 1; i + 1 < knots.size(); ++i) {
            const double d = std::fabs(knots[i] - u0);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        knots[best] = u0;
        std::sort(knots.begin(), knots.end());
    }
    return knots;
}

// eta as a function of the nonnegative slope increments d (slopes are
// a/2 + cumulative sums); quadratic and convex in d, so each coordinate
// admits an exact line search with analytically computed coefficients.
class IncrementObjective {
public:
    IncrementObjective(std::vector<double> knots, double a_val, double gamma)
        : knots_(std::move(knots)), a_(a_val), beta_(2.0 * gamma / a_val), gamma_(gamma) {
        const std::size_t m = knots_.size() - 1;
        // A[j] = int_{u_{j+1}}^1 phi_j^2 du with phi_j(u) = (u - u_{j+1}) + beta (u - 1)
        quad_coef_.resize(m - 1, 0.0);
        for (std::size_t j = 0; j + 1 < m; ++j) {
            const double u_star = knots_[j + 1];
            double acc = 0.0;
            for (std::size_t i = j + 1; i < m; ++i)
                acc += simpson_exact(knots_[i], knots_[i + 1],
                                     [&](double u) { return phi(u, u_star) * phi(u, u_star); });
            quad_coef_[j] = acc;
        }
    }

    std::size_t dim() const { return knots_.size() - 2; }  // increments after segment 0

    double value(const std::vector<double>& d) const {
        double acc = 0.0;
        double slope = 0.5 * a_;
        double y = 0.0;
        for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
            if (i > 0) slope += d[i - 1];
            acc += segment_value(knots_[i], knots_[i + 1], y, slope, beta_, gamma_);
            y += slope * (knots_[i + 1] - knots_[i]);
        }
        return acc;
    }

    // exact minimizer over coordinate j given the current curve: eta(d_j + t)
    // = eta(d_j) + B t + A t^2 with A = quad_coef_[j]
    double coordinate_step(const std::vector<double>& d, std::size_t j) const {
        const std::size_t m = knots_.size() - 1;
        const double u_star = knots_[j + 1];
        double slope = 0.5 * a_;
        double y = 0.0;
        double b_lin = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (i > 0) slope += d[i - 1];
            const double p = knots_[i], q = knots_[i + 1];
            if (i >= j + 1) {
                const double w_p = y + gamma_ + beta_ * slope * (p - 1.0);
                const double w_q =
                    y + slope * (q - p) + gamma_ + beta_ * slope * (q - 1.0);
                const double f_p = phi(p, u_star), f_q = phi(q, u_star);
                const double w_m = 0.5 * (w_p + w_q), f_m = 0.5 * (f_p + f_q);
                b_lin += (q - p) / 6.0 * (w_p * f_p + 4.0 * w_m * f_m + w_q * f_q);
            }
            y += slope * (q - p);
        }
        const double a_quad = quad_coef_[j];
        return a_quad > 0.0 ? -b_lin / a_quad : 0.0;  // B = 2 b_lin, t* = -B/(2A)
    }

    ConvexPL to_curve(const std::vector<double>& d) const {
        ConvexPL y;
        y.knots = knots_;
        y.values.resize(knots_.size());
        y.values[0] = 0.0;
        double slope = 0.5 * a_;
        for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
            if (i > 0) slope += d[i - 1];
            y.values[i + 1] = y.values[i] + slope * (knots_[i + 1] - knots_[i]);
        }
        return y;
    }

private:
    double phi(double u, double u_star) const { return (u - u_star) + beta_ * (u - 1.0); }

    template <class F>
    static double simpson_exact(double p, double q, const F& f) {
        return (q - p) / 6.0 * (f(p) + 4.0 * f(0.5 * (p + q)) + f(q));
    }

    std::vector<double> knots_;
    double a_, beta_, gamma_;
    std::vector<double> quad_coef_;
};

}  // namespace

BruteForceResult brute_force_min(double a_val, double gamma, int m, int iters,
                                 std::uint64_t seed, int restarts) {
    if (!(a_val > 0.0)) throw std::invalid_argument("brute_force_min: a must be positive");
    if (m < 8) throw std::invalid_argument("brute_force_min: need m >= 8 segments");
    if (iters < 1000) throw std::invalid_argument("brute_force_min: need iters >= 1000");

    const IncrementObjective obj(build_knots(a_val, gamma, m), a_val, gamma);
    const std::size_t dim = obj.dim();

    double best_val = 1e300;
    std::vector<double> best_d;

    num::PathRng rng(seed, 0);
    std::vector<double> d(dim, 0.0);
    for (int restart = 0; restart < restarts; ++restart) {
        if (restart == 0) {
            std::fill(d.begin(), d.end(), 0.0);  // the linear profile y = a u / 2
        } else {
            // random steepening, log-uniform scale per restart; the optimal
            // tail slopes can reach delta_min^(-a/2gamma - 1), so the scale
            // range is wide
            const double scale = a_val * std::pow(10.0, -2.0 + 18.0 * rng.next_uniform());
            for (auto& v : d) v = scale * rng.next_uniform();
        }
        double cur = obj.value(d);
        const int sweeps = std::max(1, iters / static_cast<int>(dim ? dim : 1));
        for (int sweep = 0; sweep < sweeps; ++sweep) {
            double rel_moved = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                const double d0 = d[j];
                double t = obj.coordinate_step(d, j);
                if (d0 + t < 0.0) t = -d0;  // project onto d_j >= 0
                if (t == 0.0) continue;
                d[j] = d0 + t;
                rel_moved = std::max(rel_moved, std::fabs(t) / (1.0 + std::fabs(d0)));
            }
            if (rel_moved < 1e-13) break;
        }
        cur = obj.value(d);
        if (cur < best_val) {
            best_val = cur;
            best_d = d;
        }
    }

    BruteForceResult res;
    res.min_value = best_val;
    res.minimizer = obj.to_curve(best_d);
    res.case_tag = eta_case_tag(a_val, gamma);
    return res;
}

}  // namespace hedgelab::varopt
