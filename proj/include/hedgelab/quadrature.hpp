#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace hedgelab::num {

// 15-point Gauss-Legendre nodes/weights on [-1,1].
inline constexpr double kGL15Nodes[15] = {
    -0.9879925180204854, -0.9372733924007060, -0.8482065834104272,
    -0.7244177313601701, -0.5709721726085388, -0.3941513470775634,
    -0.2011940939974345, 0.0,                 0.2011940939974345,
    0.3941513470775634,  0.5709721726085388,  0.7244177313601701,
    0.8482065834104272,  0.9372733924007060,  0.9879925180204854};
inline constexpr double kGL15Weights[15] = {
    0.0307532419961173, 0.0703660474881081, 0.1071592204671719,
    0.1395706779261543, 0.1662692058169939, 0.1861610000155622,
    0.1984314853271116, 0.2025782419255613, 0.1984314853271116,
    0.1861610000155622, 0.1662692058169939, 0.1395706779261543,
    0.1071592204671719, 0.0703660474881081, 0.0307532419961173};

template <class F>
double gauss15(const F& f, double lo, double hi) {
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double acc = 0.0;
    for (int i = 0; i < 15; ++i) acc += kGL15Weights[i] * f(mid + half * kGL15Nodes[i]);
    return acc * half;
}

struct QuadOptions {
    double rel_tol = 1e-10;
    double abs_floor = 1e-14;
    int max_depth = 90;
};

struct QuadResult {
    double value = 0.0;
    bool converged = true;
    double worst_gap = 0.0;  // largest accepted panel disagreement
};

namespace detail {

template <class F>
void adapt_gl(const F& f, double lo, double hi, const QuadOptions& opt, int depth,
              QuadResult& out) {
    const double whole = gauss15(f, lo, hi);
    const double mid = 0.5 * (lo + hi);
    const double halves = gauss15(f, lo, mid) + gauss15(f, mid, hi);
    const double gap = std::fabs(whole - halves);
    const double tol = std::max(opt.abs_floor, opt.rel_tol * std::fabs(halves));
    if (gap <= tol || depth >= opt.max_depth || mid <= lo || mid >= hi) {
        out.value += halves;
        out.worst_gap = std::max(out.worst_gap, gap);
        if (gap > tol) out.converged = false;
        return;
    }
    adapt_gl(f, lo, mid, opt, depth + 1, out);
    adapt_gl(f, mid, hi, opt, depth + 1, out);
}

// Splits a long piece into geometrically growing sub-pieces anchored at `lo`,
// so power-law tails over many decades are handled octave by octave.
inline void geometric_knots(double lo, double hi, std::vector<double>& knots) {
    const double width = hi - lo;
    const double anchor = std::max(1.0, std::fabs(lo));
    if (width <= 16.0 * anchor) {
        knots.push_back(hi);
        return;
    }
    double w = anchor;
    double x = lo + w;
    while (x < hi && w < width) {
        knots.push_back(x);
        w *= 2.0;
        x = lo + w;
    }
    knots.push_back(hi);
}

}  // namespace detail

template <class F>
QuadResult integrate_adaptive(const F& f, double lo, double hi, const QuadOptions& opt = {},
                              const std::vector<double>& breakpoints = {}) {
    QuadResult res;
    if (!(lo < hi)) {
        if (lo == hi) return res;
        throw std::invalid_argument("integrate_adaptive: lo > hi");
    }
    std::vector<double> edges;
    edges.push_back(lo);
    for (double b : breakpoints)
        if (b > lo && b < hi) edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges.push_back(hi);

    std::vector<double> knots;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        knots.clear();
        detail::geometric_knots(edges[i], edges[i + 1], knots);
        double a = edges[i];
        for (double b : knots) {
            detail::adapt_gl(f, a, b, opt, 0, res);
            a = b;
        }
    }
    return res;
}

template <class F>
double integrate(const F& f, double lo, double hi, const QuadOptions& opt = {},
                 const std::vector<double>& breakpoints = {}) {
    return integrate_adaptive(f, lo, hi, opt, breakpoints).value;
}

// Prefix integral of a fixed integrand on [lo, hi]: builds an adaptive panel
// decomposition once, then answers value(x) = int_lo^x f by panel lookup.
class CumulativeIntegral {
public:
    template <class F>
    CumulativeIntegral(F f, double lo, double hi, const QuadOptions& opt = {},
                       const std::vector<double>& breakpoints = {})
        : f_(std::move(f)), lo_(lo), hi_(hi) {
        if (!(lo <= hi)) throw std::invalid_argument("CumulativeIntegral: lo > hi");
        edges_.push_back(lo);
        if (hi > lo) {
            std::vector<double> coarse{lo};
            for (double b : breakpoints)
                if (b > lo && b < hi) coarse.push_back(b);
            std::sort(coarse.begin(), coarse.end());
            coarse.erase(std::unique(coarse.begin(), coarse.end()), coarse.end());
            coarse.push_back(hi);
            std::vector<double> knots;
            for (std::size_t i = 0; i + 1 < coarse.size(); ++i) {
                knots.clear();
                detail::geometric_knots(coarse[i], coarse[i + 1], knots);
                double a = coarse[i];
                for (double b : knots) {
                    subdivide(a, b, opt, 0);
                    a = b;
                }
            }
        }
        prefix_.resize(edges_.size(), 0.0);
        for (std::size_t i = 1; i < edges_.size(); ++i)
            prefix_[i] = prefix_[i - 1] + panel_values_[i - 1];
    }

    double total() const { return prefix_.back(); }
    bool converged() const { return converged_; }
    double worst_gap() const { return worst_gap_; }

    double value(double x) const {
        if (x <= lo_) return 0.0;
        if (x >= hi_) return total();
        const auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - edges_.begin()) - 1;
        return prefix_[i] + gauss15(f_, edges_[i], x);
    }

    // Tail integral int_x^hi computed forward from x, so it keeps relative
    // accuracy even when far smaller than total().
    double tail(double x, const QuadOptions& opt = {}) const {
        if (x <= lo_) return total();
        if (x >= hi_) return 0.0;
        return integrate(f_, x, hi_, opt);
    }

    const std::vector<double>& edges() const { return edges_; }

private:
    void subdivide(double lo, double hi, const QuadOptions& opt, int depth) {
        const double whole = gauss15(f_, lo, hi);
        const double mid = 0.5 * (lo + hi);
        const double halves = gauss15(f_, lo, mid) + gauss15(f_, mid, hi);
        const double gap = std::fabs(whole - halves);
        const double tol = std::max(opt.abs_floor, opt.rel_tol * std::fabs(halves));
        if (gap <= tol || depth >= opt.max_depth || mid <= lo || mid >= hi) {
            edges_.push_back(hi);
            panel_values_.push_back(halves);
            worst_gap_ = std::max(worst_gap_, gap);
            if (gap > tol) converged_ = false;
            return;
        }
        subdivide(lo, mid, opt, depth + 1);
        subdivide(mid, hi, opt, depth + 1);
    }

    std::function<double(double)> f_;
    double lo_, hi_;
    std::vector<double> edges_;
    std::vector<double> panel_values_;
    std::vector<double> prefix_;
    bool converged_ = true;
    double worst_gap_ = 0.0;
};

}  // namespace hedgelab::num
