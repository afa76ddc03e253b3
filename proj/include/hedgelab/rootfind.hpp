#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

namespace hedgelab::num {

// Root of f on [lo,hi] with a sign change at the ends.
template <class F>
double bisect(const F& f, double lo, double hi, double x_tol = 1e-12, int max_iter = 200) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) throw std::invalid_argument("bisect: no sign change on bracket");
    for (int i = 0; i < max_iter && hi - lo > x_tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (flo * fm < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

// Golden-section minimization on [lo,hi] (unimodal f).
template <class F>
double golden_min(const F& f, double lo, double hi, double x_tol = 1e-10, int max_iter = 400) {
    const double gr = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < max_iter && (b - a) > x_tol * (1.0 + std::fabs(a) + std::fabs(b)); ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

// Expands [x0/2, x0] upward by doubling until f stops decreasing at the right
// end; returns a bracket guaranteed to contain a local minimizer of a
// decrease-then-increase profile.
template <class F>
std::pair<double, double> bracket_min(const F& f, double x0, int max_doublings = 200) {
    double lo = x0;
    double hi = 2.0 * x0;
    double f_lo = f(lo), f_hi = f(hi);
    int n = 0;
    while (f_hi < f_lo && n++ < max_doublings) {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = f(hi);
    }
    if (n >= max_doublings) throw std::runtime_error("bracket_min: objective keeps decreasing");
    return {lo / 2.0, hi};
}

}  // namespace hedgelab::num
