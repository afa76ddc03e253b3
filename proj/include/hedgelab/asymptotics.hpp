#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hedgelab/quadrature.hpp"

namespace hedgelab::asymp {

// Asymptotic error-variance coefficients of the discrete strategies.
double eta_leland(double alpha);   // (1/pi) a^2 + (2/pi) a + 1 - 2/pi
double eta_hitting(double alpha);  // (a+2)^2 / 6
double eta_simple(double alpha);   // (a+2)^2 / 12, zero-drift reflecting band

// Minimal variance profile eta_dagger and its two closed-form branches.
double eta_one(double x);  // (4/3) (x+2)^2 (x-1) / (x^3 (4-x))
double eta_two(double x);  // (x+2)^2 / 12
double eta_dagger(double x);

// Infimum of eta_{b,c} over controls with band mass a:
// gamma != 0 -> gamma^2 eta_dagger(a/gamma), gamma == 0 -> a^2/12.
double eta_star(double a_val, double gamma);

// delta(s,t) = lambda |d2p|^2 / a - |d2p| / alpha
double drift_delta(double curv_abs, double lambda_val, double a_val, double alpha);

// b(s,t) = (1/2) alpha lambda |d2p| + eps with c = 0
double pures_bandwidth(double alpha, double lambda_val, double curv_abs, double eps);

// Band/drift control pair. b(s,t) > 0; c(x,s,t) >= 0 and even in x.
// x_breakpoints lists |x| values where c is allowed to jump; quadrature
// splits there.
struct ControlFunctions {
    std::function<double(double, double)> b;
    std::function<double(double, double, double)> c;
    std::vector<double> x_breakpoints;
};

// Densities derived from (b,c) at a fixed (s,t):
//   g(x) = exp(-2 int_0^|x| c),   a = 2 int_0^b g,
//   h(x) = (2 sgn x / g) int_0^|x| (c - 1/a) g dz.
// h is evaluated through the exact rearrangement
//   h(x) = (2/a) (int_x^b g) / g(x) - 1   for x > 0,
// which keeps full relative accuracy where g is many orders below 1.
struct DerivedDensities {
    double b_val = 0.0;
    double a = 0.0;
    std::function<double(double)> g;  // even
    std::function<double(double)> h;  // odd
};

DerivedDensities derived_densities_at(double b_val, const std::function<double(double)>& c_abs,
                                      const std::vector<double>& breakpoints = {},
                                      const num::QuadOptions& opt = {});

DerivedDensities derived_densities(const ControlFunctions& ctrl, double s, double t,
                                   const num::QuadOptions& opt = {});

struct EtaResult {
    double value = 0.0;
    std::string case_tag;
};

// eta_{b,c}(s,t) = (2/a) int_0^b (x - gamma h(x))^2 g(x) dx, gamma = lambda d2p.
EtaResult eta_bc(const ControlFunctions& ctrl, double gamma, double s, double t,
                 const num::QuadOptions& opt = {});
EtaResult eta_bc_at(double b_val, const std::function<double(double)>& c_abs, double gamma,
                    const std::vector<double>& breakpoints = {},
                    const num::QuadOptions& opt = {});

// Member n of the asymptotically optimal control family at fixed (a, gamma).
// The blow-up factor exp(n^2) in the outer radius is capped at exp(50); the
// cap stands in for the n -> infinity limit that doubles cannot represent.
struct OptimalControls {
    double a = 0.0;
    double gamma = 0.0;
    int n = 0;
    double psi = 1.0;
    double l = 0.0;     // inner activation radius of c
    double r = 0.0;     // outer activation radius of c
    double coef = 0.0;  // c(x) = coef / (gamma + psi |x|) on [l, r)
    double b = 0.0;
    std::string case_tag;

    double c_abs(double x_abs) const;  // c at |x|, raw discontinuous form
    ControlFunctions controls() const;
    // variant with linear ramps of width ramp_frac * r at both jump points,
    // for use inside simulations
    ControlFunctions smoothed_controls(double ramp_frac = 1e-3) const;
};

OptimalControls optimal_controls(double a_val, double gamma, int n);

// Mean-variance optimal band mass: argmin_a |gamma|/a + A lambda |gamma| eta_dagger(a/gamma).
double a_star(double gamma, double lambda_val, double risk_aversion);

}  // namespace hedgelab::asymp
