#include "hedgelab/asymptotics.hpp"

#include <cmath>
#include <stdexcept>

#include "hedgelab/rootfind.hpp"

namespace hedgelab::asymp {

namespace {
constexpr double kPi = 3.141592653589793;
constexpr double kExpCap = 50.0;  // cap on the n^2 exponent in the outer radius
}  // namespace

double eta_leland(double alpha) {
    if (alpha < 0.0) throw std::invalid_argument("eta_leland: alpha must be >= 0");
    return (alpha * alpha + 2.0 * alpha) / kPi + 1.0 - 2.0 / kPi;
}

double eta_hitting(double alpha) {
    if (alpha < 0.0) throw std::invalid_argument("eta_hitting: alpha must be >= 0");
    return (alpha + 2.0) * (alpha + 2.0) / 6.0;
}

double eta_simple(double alpha) {
    if (alpha < 0.0) throw std::invalid_argument("eta_simple: alpha must be >= 0");
    return (alpha + 2.0) * (alpha + 2.0) / 12.0;
}

double eta_one(double x) {
    return (4.0 / 3.0) * (x + 2.0) * (x + 2.0) * (x - 1.0) / (x * x * x * (4.0 - x));
}

double eta_two(double x) { return (x + 2.0) * (x + 2.0) / 12.0; }

double eta_dagger(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("eta_dagger: x must be finite");
    if (x <= -2.0) return eta_two(x);
    if (x <= 1.0) return 0.0;
    if (x < 2.0) return eta_one(x);
    return eta_two(x);
}

double eta_star(double a_val, double gamma) {
    if (!(a_val > 0.0)) throw std::invalid_argument("eta_star: a must be positive");
    if (gamma == 0.0) return a_val * a_val / 12.0;
    return gamma * gamma * eta_dagger(a_val / gamma);
}

double drift_delta(double curv_abs, double lambda_val, double a_val, double alpha) {
    if (!(a_val > 0.0)) throw std::invalid_argument("drift_delta: a must be positive");
    if (!(alpha > 0.0)) throw std::invalid_argument("drift_delta: alpha must be positive");
    return lambda_val * curv_abs * curv_abs / a_val - curv_abs / alpha;
}

double pures_bandwidth(double alpha, double lambda_val, double curv_abs, double eps) {
    if (!(alpha > 0.0)) throw std::invalid_argument("pures_bandwidth: alpha must be positive");
    if (lambda_val < 0.0 || curv_abs < 0.0 || eps < 0.0)
        throw std::invalid_argument("pures_bandwidth: inputs must be >= 0");
    return 0.5 * alpha * lambda_val * curv_abs + eps;
}

DerivedDensities derived_densities_at(double b_val, const std::function<double(double)>& c_abs,
                                      const std::vector<double>& breakpoints,
                                      const num::QuadOptions& opt) {
    if (!(b_val > 0.0)) throw std::invalid_argument("derived_densities: b must be positive");

    auto cum_c = std::make_shared<num::CumulativeIntegral>(c_abs, 0.0, b_val, opt, breakpoints);
    if (!cum_c->converged())
        throw std::runtime_error("derived_densities: quadrature of c did not converge, gap " +
                                 std::to_string(cum_c->worst_gap()));

    auto g_abs = [cum_c](double x) { return std::exp(-2.0 * cum_c->value(x)); };
    auto cum_g = std::make_shared<num::CumulativeIntegral>(g_abs, 0.0, b_val, opt, breakpoints);
    if (!cum_g->converged())
        throw std::runtime_error("derived_densities: quadrature of g did not converge, gap " +
                                 std::to_string(cum_g->worst_gap()));

    DerivedDensities dd;
    dd.b_val = b_val;
    dd.a = 2.0 * cum_g->total();

    dd.g = [cum_c, b_val](double x) {
        const double ax = std::fabs(x);
        return std::exp(-2.0 * cum_c->value(std::min(ax, b_val)));
    };
    const double a_val = dd.a;
    const num::QuadOptions tail_opt = opt;
    dd.h = [cum_c, cum_g, a_val, b_val, tail_opt](double x) {
        const double ax = std::fabs(x);
        if (ax == 0.0) return 0.0;
        const double xa = std::min(ax, b_val);
        double t = cum_g->total() - cum_g->value(xa);
        // recompute small tails forward so h keeps relative accuracy near b
        if (t < 1e-6 * cum_g->total()) t = cum_g->tail(xa, tail_opt);
        const double gx = std::exp(-2.0 * cum_c->value(xa));
        const double h_pos = (2.0 / a_val) * t / gx - 1.0;
        return x > 0.0 ? h_pos : -h_pos;
    };
    return dd;
}

DerivedDensities derived_densities(const ControlFunctions& ctrl, double s, double t,
                                   const num::QuadOptions& opt) {
    const double b_val = ctrl.b(s, t);
    auto c_abs = [&ctrl, s, t](double x) { return ctrl.c(x, s, t); };
    return derived_densities_at(b_val, c_abs, ctrl.x_breakpoints, opt);
}

EtaResult eta_bc_at(double b_val, const std::function<double(double)>& c_abs, double gamma,
                    const std::vector<double>& breakpoints, const num::QuadOptions& opt) {
    const DerivedDensities dd = derived_densities_at(b_val, c_abs, breakpoints, opt);
    auto integrand = [&dd, gamma](double x) {
        const double w = x - gamma * dd.h(x);
        return w * w * dd.g(x);
    };
    const num::QuadResult qr = num::integrate_adaptive(integrand, 0.0, b_val, opt, breakpoints);
    if (!qr.converged)
        throw std::runtime_error("eta_bc: quadrature did not converge, gap " +
                                 std::to_string(qr.worst_gap));
    EtaResult res;
    res.value = 2.0 / dd.a * qr.value;
    return res;
}

EtaResult eta_bc(const ControlFunctions& ctrl, double gamma, double s, double t,
                 const num::QuadOptions& opt) {
    const double b_val = ctrl.b(s, t);
    auto c_abs = [&ctrl, s, t](double x) { return ctrl.c(x, s, t); };
    return eta_bc_at(b_val, c_abs, gamma, ctrl.x_breakpoints, opt);
}

double OptimalControls::c_abs(double x_abs) const {
    if (coef == 0.0) return 0.0;
    if (x_abs < l || x_abs >= r) return 0.0;
    return coef / (gamma + psi * x_abs);
}

ControlFunctions OptimalControls::controls() const {
    ControlFunctions ctrl;
    const OptimalControls self = *this;
    ctrl.b = [self](double, double) { return self.b; };
    ctrl.c = [self](double x, double, double) { return self.c_abs(std::fabs(x)); };
    if (coef != 0.0) {
        if (l > 0.0) ctrl.x_breakpoints.push_back(l);
        ctrl.x_breakpoints.push_back(r);
    }
    return ctrl;
}

ControlFunctions OptimalControls::smoothed_controls(double ramp_frac) const {
    ControlFunctions ctrl;
    const OptimalControls self = *this;
    ctrl.b = [self](double, double) { return self.b; };
    if (coef == 0.0) {
        ctrl.c = [](double, double, double) { return 0.0; };
        return ctrl;
    }
    const double w = ramp_frac * r;
    ctrl.c = [self, w](double x, double, double) {
        const double ax = std::fabs(x);
        double ramp = 1.0;
        if (self.l > 0.0) {
            if (ax < self.l) return 0.0;
            ramp = std::min(ramp, (ax - self.l) / w);
        }
        if (ax >= self.r) return 0.0;
        ramp = std::min(ramp, (self.r - ax) / w);
        ramp = std::min(ramp, 1.0);
        return ramp * self.coef / (self.gamma + self.psi * ax);
    };
    if (l > 0.0) {
        ctrl.x_breakpoints.push_back(l);
        ctrl.x_breakpoints.push_back(l + w);
    }
    ctrl.x_breakpoints.push_back(r - w);
    ctrl.x_breakpoints.push_back(r);
    return ctrl;
}

OptimalControls optimal_controls(double a_val, double gamma, int n) {
    if (!(a_val > 0.0)) throw std::invalid_argument("optimal_controls: a must be positive");
    if (n < 2) throw std::invalid_argument("optimal_controls: n must be >= 2");

    OptimalControls oc;
    oc.a = a_val;
    oc.gamma = gamma;
    oc.n = n;

    // gamma -> 0 limit taken analytically
    if (std::fabs(gamma) < 1e-12 * a_val) {
        oc.gamma = 0.0;
        oc.b = 0.5 * a_val;
        oc.case_tag = "gamma_zero";
        return oc;
    }

    const double ratio = a_val / gamma;
    if (ratio <= -2.0 || ratio >= 2.0) {
        oc.b = 0.5 * a_val;
        oc.case_tag = ratio <= -2.0 ? "ratio_le_minus_2" : "ratio_ge_2";
        return oc;
    }

    const bool degenerate_ratio = std::fabs(a_val - gamma) <= 1e-12 * std::fabs(a_val);
    if (!degenerate_ratio && std::fabs(ratio - 1.0) < 1.0 / n)
        throw std::invalid_argument(
            "optimal_controls: n too small near the a = gamma boundary (branch with a/gamma ~ 1 "
            "needs n > 1/|a/gamma - 1|)");

    const double psi = degenerate_ratio ? 1.0 - 1.0 / n : 1.0;
    const double l =
        (gamma > 0.0 && a_val > gamma) ? 2.0 * gamma * (a_val - gamma) / (4.0 * gamma - a_val)
                                       : 0.0;
    const double pos_2g_a = std::max(2.0 * gamma - a_val, 0.0);
    const double neg_2g_a = std::max(-(2.0 * gamma + a_val), 0.0);
    const double blow = std::exp(std::min(static_cast<double>(n) * n, kExpCap));
    const double shrink =
        std::fabs(gamma) * std::pow(std::min(1.0 - 1.0 / n, neg_2g_a), 1.0 / n);
    const double r = l + pos_2g_a * blow + shrink;

    oc.psi = psi;
    oc.l = l;
    oc.r = r;
    oc.b = r + (gamma + psi * r) / (gamma + psi * l) * (0.5 * a_val - l);
    oc.coef = (a_val * psi + 2.0 * gamma) / (2.0 * (a_val - 2.0 * l));
    if (degenerate_ratio)
        oc.case_tag = "a_equals_gamma";
    else if (ratio < 1.0)
        oc.case_tag = "ratio_in_minus2_1";
    else
        oc.case_tag = "ratio_in_1_2";
    return oc;
}

double a_star(double gamma, double lambda_val, double risk_aversion) {
    if (gamma == 0.0) throw std::invalid_argument("a_star: gamma must be nonzero");
    if (!(risk_aversion > 0.0)) throw std::invalid_argument("a_star: A must be positive");
    if (!(lambda_val > 0.0))
        throw std::invalid_argument("a_star: lambda must be positive, otherwise no minimizer");
    const double ag = std::fabs(gamma);
    auto objective = [&](double a) {
        return ag / a + risk_aversion * lambda_val * ag * eta_dagger(a / gamma);
    };
    const auto [lo, hi] = num::bracket_min(objective, ag / 100.0);
    return num::golden_min(objective, lo, hi, 1e-12);
}

}  // namespace hedgelab::asymp
