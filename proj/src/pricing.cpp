#include "hedgelab/pricing.hpp"

#include <algorithm>
#include <cmath>

#include "hedgelab/csv.hpp"
#include "hedgelab/normal.hpp"

namespace hedgelab::pricing {

double PayoffSpec::operator()(double s) const {
    switch (kind) {
        case PayoffKind::call:
            return std::max(s - strike, 0.0);
        case PayoffKind::put:
            return std::max(strike - s, 0.0);
        case PayoffKind::s_log_s:
            return s * std::log(s);
        case PayoffKind::custom: {
            if (s <= custom_s.front()) return custom_values.front();
            if (s >= custom_s.back()) return custom_values.back();
            const auto it = std::upper_bound(custom_s.begin(), custom_s.end(), s);
            const std::size_t i = static_cast<std::size_t>(it - custom_s.begin());
            const double w = (s - custom_s[i - 1]) / (custom_s[i] - custom_s[i - 1]);
            return (1.0 - w) * custom_values[i - 1] + w * custom_values[i];
        }
    }
    throw std::logic_error("PayoffSpec: bad kind");
}

void PayoffSpec::validate() const {
    if ((kind == PayoffKind::call || kind == PayoffKind::put) && !(strike > 0.0))
        throw std::invalid_argument("PayoffSpec: strike must be positive");
    if (kind == PayoffKind::custom) {
        if (custom_s.size() < 2 || custom_s.size() != custom_values.size())
            throw std::invalid_argument("PayoffSpec: custom payoff needs matching grids");
        for (double v : custom_values)
            if (!std::isfinite(v))
                throw std::invalid_argument("PayoffSpec: custom payoff must be finite");
        if (!std::is_sorted(custom_s.begin(), custom_s.end()))
            throw std::invalid_argument("PayoffSpec: custom s-grid must be increasing");
    }
}

double enlarged_vol(double v, double alpha) {
    if (!(v > 0.0)) throw std::invalid_argument("enlarged_vol: v must be positive");
    if (!(alpha > 0.0)) throw std::invalid_argument("enlarged_vol: alpha must be positive");
    return v * std::sqrt(1.0 + 2.0 / alpha);
}

BsQuote bs_closed_form(double s, double t, const PayoffSpec& payoff, double v_hat, double T) {
    if (!(s > 0.0)) throw std::invalid_argument("bs_closed_form: s must be positive");
    const double tau = T - t;
    BsQuote q;
    if (payoff.kind == PayoffKind::s_log_s) {
        // p = s log s + s v^2 tau / 2 solves the zero-rate pricing PDE
        const double tv = 0.5 * v_hat * v_hat * std::max(tau, 0.0);
        q.p = s * std::log(s) + s * tv;
        q.delta = std::log(s) + 1.0 + tv;
        q.gamma = 1.0 / s;
        q.terminal = tau <= 0.0;
        return q;
    }
    if (payoff.kind != PayoffKind::call && payoff.kind != PayoffKind::put)
        throw std::invalid_argument("bs_closed_form: payoff must be call, put or s_log_s");
    const double k = payoff.strike;
    if (tau <= 0.0 || v_hat <= 0.0) {  // expired, or a degenerate sigma = 0 surface
        q.terminal = tau <= 0.0;
        q.p = payoff(s);
        if (payoff.kind == PayoffKind::call)
            q.delta = s > k ? 1.0 : (s < k ? 0.0 : 0.5);
        else
            q.delta = s < k ? -1.0 : (s > k ? 0.0 : -0.5);
        q.gamma = 0.0;
        return q;
    }
    const double sig = v_hat * std::sqrt(tau);
    const double d1 = std::log(s / k) / sig + 0.5 * sig;
    const double d2 = d1 - sig;
    q.gamma = num::norm_pdf(d1) / (s * sig);
    if (payoff.kind == PayoffKind::call) {
        q.p = s * num::norm_cdf(d1) - k * num::norm_cdf(d2);
        q.delta = num::norm_cdf(d1);
    } else {
        q.p = k * num::norm_cdf(-d2) - s * num::norm_cdf(-d1);
        q.delta = num::norm_cdf(d1) - 1.0;
    }
    return q;
}

PricingSurface PricingSurface::make_closed_form(const model::ModelSpec& model,
                                                const PayoffSpec& payoff,
                                                const AlphaSpec& alpha) {
    model.validate();
    payoff.validate();
    if (model.kind != model::ModelKind::black_scholes)
        throw std::invalid_argument("closed-form surface requires the black_scholes model");
    if (!alpha.is_constant())
        throw std::invalid_argument("closed-form surface requires constant alpha");
    if (payoff.kind == PayoffKind::custom)
        throw std::invalid_argument("closed-form surface requires call, put or s_log_s");
    PricingSurface surf;
    surf.repr_ = Repr::closed_form;
    surf.model_ = model;
    surf.payoff_ = payoff;
    surf.alpha_ = alpha;
    surf.v_hat_ = model.bs_vol > 0.0 ? enlarged_vol(model.bs_vol, alpha.constant) : 0.0;
    return surf;
}

SurfaceEval PricingSurface::eval(double s, double t) const {
    SurfaceEval ev;
    if (repr_ == Repr::closed_form) {
        const BsQuote q = bs_closed_form(s, t, payoff_, v_hat_, model_.horizon);
        ev.p = q.p;
        ev.delta = q.delta;
        ev.gamma = q.gamma;
        ev.terminal = q.terminal;
        ev.nu = model_.sigma(s, t) * ev.gamma;
        return ev;
    }
    // bilinear interpolation on the uniform (log s, t) lattice, clamped at the hull
    const std::size_t ns = s_nodes_.size();
    const std::size_t nt = t_nodes_.size();
    double x = std::log(s);
    if (x < x_nodes_.front()) { x = x_nodes_.front(); ev.clamped = true; }
    if (x > x_nodes_.back()) { x = x_nodes_.back(); ev.clamped = true; }
    double tt = t;
    if (tt < t_nodes_.front()) { tt = t_nodes_.front(); ev.clamped = true; }
    if (tt > t_nodes_.back()) { tt = t_nodes_.back(); ev.clamped = true; }
    const double dx = x_nodes_[1] - x_nodes_[0];
    const double dt = t_nodes_[1] - t_nodes_[0];
    std::size_t i = std::min(static_cast<std::size_t>((x - x_nodes_.front()) / dx), ns - 2);
    std::size_t j = std::min(static_cast<std::size_t>((tt - t_nodes_.front()) / dt), nt - 2);
    const double wx = std::clamp((x - x_nodes_[i]) / dx, 0.0, 1.0);
    const double wt = std::clamp((tt - t_nodes_[j]) / dt, 0.0, 1.0);
    auto lerp2 = [&](const std::vector<double>& arr) {
        const double a00 = arr[j * ns + i], a01 = arr[j * ns + i + 1];
        const double a10 = arr[(j + 1) * ns + i], a11 = arr[(j + 1) * ns + i + 1];
        return (1.0 - wt) * ((1.0 - wx) * a00 + wx * a01) +
               wt * ((1.0 - wx) * a10 + wx * a11);
    };
    ev.p = lerp2(p_);
    ev.delta = lerp2(delta_);
    ev.gamma = lerp2(gamma_);
    ev.terminal = tt >= t_nodes_.back();
    ev.nu = model_.sigma(s, t) * ev.gamma;
    return ev;
}

namespace {

double boundary_value(const PayoffSpec& payoff, const AlphaSpec& alpha,
                      const model::ModelSpec& model, double s, double t) {
    const double tau = model.horizon - t;
    switch (payoff.kind) {
        case PayoffKind::call:
            return std::max(s - payoff.strike, 0.0);
        case PayoffKind::put:
            return std::max(payoff.strike - s, 0.0);
        case PayoffKind::s_log_s: {
            const double vloc = model.sigma(s, t) / s;
            const double vh2 = vloc * vloc * (1.0 + 2.0 / alpha(s, t));
            return s * std::log(s) + 0.5 * s * vh2 * tau;
        }
        case PayoffKind::custom:
            return payoff(s);
    }
    throw std::logic_error("boundary_value: bad payoff kind");
}

void thomas_solve(std::vector<double>& sub, std::vector<double>& diag, std::vector<double>& sup,
                  std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

}  // namespace

PricingSurface solve_nonlinear_pde(const model::ModelSpec& model, const PayoffSpec& payoff,
                                   const AlphaSpec& alpha, std::size_t n_s, std::size_t n_t) {
    model.validate();
    payoff.validate();
    if (n_s < 50 || n_t < 50)
        throw std::invalid_argument("solve_nonlinear_pde: need at least 50 nodes per axis");

    PricingSurface surf;
    surf.repr_ = PricingSurface::Repr::grid;
    surf.model_ = model;
    surf.payoff_ = payoff;
    surf.alpha_ = alpha;

    const double T = model.horizon;
    // log-price domain wide enough that Dirichlet data from the payoff's
    // asymptotics is accurate at the edges
    double vol_scale = model.sigma(model.s0, 0.0) / model.s0;
    double alpha_min = alpha.is_constant() ? alpha.constant : 1e300;
    if (!alpha.is_constant()) {
        for (int i = 0; i <= 16; ++i)
            for (int j = 0; j <= 8; ++j)
                alpha_min = std::min(alpha_min,
                                     alpha(model.s0 * std::exp(-1.5 + 3.0 * i / 16.0),
                                           T * j / 8.0));
    }
    const double vh = vol_scale * std::sqrt(1.0 + 2.0 / alpha_min);
    const double width = 5.5 * vh * std::sqrt(T) + 0.5;
    double x_center = std::log(model.s0);
    if (payoff.kind == PayoffKind::call || payoff.kind == PayoffKind::put)
        x_center = 0.5 * (x_center + std::log(payoff.strike));

    surf.x_nodes_.resize(n_s);
    surf.s_nodes_.resize(n_s);
    double x_lo = x_center - width;
    const double dx = 2.0 * width / static_cast<double>(n_s - 1);
    if (payoff.kind == PayoffKind::call || payoff.kind == PayoffKind::put) {
        // shift the grid so the strike sits exactly on a node; a kink between
        // nodes costs an order of convergence and lets gamma wiggle negative
        const double xk = std::log(payoff.strike);
        const double frac = (xk - x_lo) / dx;
        x_lo += (frac - std::round(frac)) * dx;
    }
    for (std::size_t i = 0; i < n_s; ++i) {
        surf.x_nodes_[i] = x_lo + dx * static_cast<double>(i);
        surf.s_nodes_[i] = std::exp(surf.x_nodes_[i]);
    }
    surf.t_nodes_.resize(n_t);
    const double dt = T / static_cast<double>(n_t - 1);
    for (std::size_t j = 0; j < n_t; ++j) surf.t_nodes_[j] = dt * static_cast<double>(j);

    surf.p_.assign(n_t * n_s, 0.0);
    surf.delta_.assign(n_t * n_s, 0.0);
    surf.gamma_.assign(n_t * n_s, 0.0);

    std::vector<double> p_next(n_s), p_cur(n_s);
    std::vector<int> sgn(n_s, 0), sgn_new(n_s, 0);
    std::vector<double> gamma_row(n_s, 0.0);

    // second derivative in s by the nonuniform divided difference: it is
    // exactly zero on profiles linear in s, so flat wings cannot trip the
    // sign pattern through the O(dx^2) bias a log-space stencil would have
    auto gamma_of_row = [&](const std::vector<double>& row, std::vector<double>& out) {
        for (std::size_t i = 1; i + 1 < n_s; ++i) {
            const double hm = surf.s_nodes_[i] - surf.s_nodes_[i - 1];
            const double hp = surf.s_nodes_[i + 1] - surf.s_nodes_[i];
            out[i] = 2.0 * ((row[i + 1] - row[i]) / hp - (row[i] - row[i - 1]) / hm) /
                     (hp + hm);
        }
        out[0] = out[1];
        out[n_s - 1] = out[n_s - 2];
    };
    // dead zone |gamma| < 1e-10: inherit the running sign instead of forcing
    // a coefficient jump in flat regions (the jump would kink the solution)
    auto signs_of = [&](const std::vector<double>& g, const std::vector<int>& prev,
                        std::vector<int>& out) {
        for (std::size_t i = 0; i < n_s; ++i)
            out[i] = std::fabs(g[i]) < 1e-10 ? prev[i] : (g[i] > 0.0 ? 1 : -1);
    };

    for (std::size_t i = 0; i < n_s; ++i) p_next[i] = payoff(surf.s_nodes_[i]);
    std::fill(sgn.begin(), sgn.end(), payoff.convex ? 1 : 0);
    gamma_of_row(p_next, gamma_row);
    signs_of(gamma_row, sgn, sgn);

    std::copy(p_next.begin(), p_next.end(), surf.p_.begin() + (n_t - 1) * n_s);

    std::vector<double> sub(n_s), diag(n_s), sup(n_s), rhs(n_s);

    // one theta-scheme solve of a sub-step [t_hi -> t_lo], signs frozen
    auto sub_step = [&](const std::vector<double>& from, std::vector<double>& to, double t_hi,
                        double t_lo, double theta) {
        const double step = t_hi - t_lo;
        for (std::size_t i = 0; i < n_s; ++i) {
            if (i == 0 || i == n_s - 1) {
                sub[i] = 0.0;
                sup[i] = 0.0;
                diag[i] = 1.0;
                rhs[i] = boundary_value(payoff, alpha, model, surf.s_nodes_[i], t_lo);
                continue;
            }
            const double s = surf.s_nodes_[i];
            const double sig_new = model.sigma(s, t_lo);
            const double sig_old = model.sigma(s, t_hi);
            // floor at zero: sgn = -1 with alpha < 2 would make the equation
            // backward-parabolic, which no stable scheme solves
            const double mod =
                std::max(1.0 + sgn[i] * 2.0 / alpha(s, 0.5 * (t_lo + t_hi)), 0.0);
            const double c_new = 0.5 * mod * sig_new * sig_new / (s * s);
            const double c_old = 0.5 * mod * sig_old * sig_old / (s * s);
            // L p = c (p_xx - p_x)
            const double a_new = c_new * (1.0 / (dx * dx) + 0.5 / dx);  // p_{i-1}
            const double b_new = c_new * (-2.0 / (dx * dx));            // p_i
            const double d_new = c_new * (1.0 / (dx * dx) - 0.5 / dx);  // p_{i+1}
            const double a_old = c_old * (1.0 / (dx * dx) + 0.5 / dx);
            const double b_old = c_old * (-2.0 / (dx * dx));
            const double d_old = c_old * (1.0 / (dx * dx) - 0.5 / dx);
            sub[i] = -theta * step * a_new;
            diag[i] = 1.0 - theta * step * b_new;
            sup[i] = -theta * step * d_new;
            rhs[i] = from[i] + (1.0 - theta) * step *
                                   (a_old * from[i - 1] + b_old * from[i] + d_old * from[i + 1]);
        }
        std::vector<double> sub2 = sub, diag2 = diag, sup2 = sup;
        to = rhs;
        thomas_solve(sub2, diag2, sup2, to);
        for (double v : to)
            if (!std::isfinite(v))
                throw std::runtime_error("solve_nonlinear_pde: non-finite value");
    };

    const int rannacher_steps = 4;  // fully implicit sub-stepped levels near expiry
    std::vector<double> p_mid(n_s);
    for (std::size_t j = n_t - 1; j-- > 0;) {
        const double t_new = surf.t_nodes_[j];
        const double t_old = surf.t_nodes_[j + 1];
        const bool implicit = (static_cast<int>(n_t - 2 - j) < rannacher_steps);

        bool stable = false;
        std::vector<double> p_prev_sweep;
        for (int sweep = 0; sweep < 5 && !stable; ++sweep) {
            if (implicit) {
                // the level next to expiry is sub-stepped hardest: the far
                // field of the implicit resolvent acting on the payoff kink
                // is what pushes gamma negative in the wings
                const int subs = (j == n_t - 2) ? 16 : 4;
                p_mid = p_next;
                for (int q = 0; q < subs; ++q) {
                    const double t_hi = t_old + (t_new - t_old) * q / subs;
                    const double t_lo = t_old + (t_new - t_old) * (q + 1) / subs;
                    sub_step(p_mid, p_cur, t_hi, t_lo, 1.0);
                    p_mid = p_cur;
                }
            } else {
                sub_step(p_next, p_cur, t_old, t_new, 0.5);
            }
            gamma_of_row(p_cur, gamma_row);
            signs_of(gamma_row, sgn, sgn_new);
            stable = (sgn_new == sgn);
            if (!stable && !p_prev_sweep.empty()) {
                // sign flips in the dead-zone fringe that no longer move the
                // iterate count as converged
                double gap = 0.0;
                for (std::size_t i = 0; i < n_s; ++i)
                    gap = std::max(gap, std::fabs(p_cur[i] - p_prev_sweep[i]));
                if (gap <= 1e-12 * model.s0) stable = true;
            }
            if (!stable) {
                sgn = sgn_new;
                p_prev_sweep = p_cur;
                if (sweep == 4) ++surf.unstable_sign_levels_;  // keep last iterate
            }
        }

        std::copy(p_cur.begin(), p_cur.end(), surf.p_.begin() + j * n_s);
        p_next = p_cur;
    }

    // delta and gamma by central divided differences in s on each level
    for (std::size_t j = 0; j < n_t; ++j) {
        const double* row = surf.p_.data() + j * n_s;
        for (std::size_t i = 1; i + 1 < n_s; ++i) {
            const double hm = surf.s_nodes_[i] - surf.s_nodes_[i - 1];
            const double hp = surf.s_nodes_[i + 1] - surf.s_nodes_[i];
            surf.delta_[j * n_s + i] =
                (hm * hm * row[i + 1] + (hp * hp - hm * hm) * row[i] - hp * hp * row[i - 1]) /
                (hp * hm * (hp + hm));
            surf.gamma_[j * n_s + i] =
                2.0 * ((row[i + 1] - row[i]) / hp - (row[i] - row[i - 1]) / hm) / (hp + hm);
        }
        surf.delta_[j * n_s] = surf.delta_[j * n_s + 1];
        surf.delta_[j * n_s + n_s - 1] = surf.delta_[j * n_s + n_s - 2];
        surf.gamma_[j * n_s] = surf.gamma_[j * n_s + 1];
        surf.gamma_[j * n_s + n_s - 1] = surf.gamma_[j * n_s + n_s - 2];
    }
    return surf;
}

void dump_surface_csv(const PricingSurface& surface, const std::string& path, std::size_t n_s,
                      std::size_t n_t) {
    io::CsvWriter csv(path, {"s", "t", "p", "delta", "gamma"});
    if (surface.repr() == PricingSurface::Repr::grid) {
        const auto& sn = surface.s_nodes();
        const auto& tn = surface.t_nodes();
        for (std::size_t j = 0; j < tn.size(); ++j)
            for (std::size_t i = 0; i < sn.size(); ++i)
                csv.row({sn[i], tn[j], surface.p_node(j, i), surface.delta_node(j, i),
                         surface.gamma_node(j, i)});
    } else {
        const auto& m = surface.model();
        const double lo = m.s0 * 0.25, hi = m.s0 * 4.0;
        for (std::size_t j = 0; j < n_t; ++j) {
            const double t = m.horizon * static_cast<double>(j) / static_cast<double>(n_t - 1);
            for (std::size_t i = 0; i < n_s; ++i) {
                const double s =
                    lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n_s - 1));
                const auto ev = surface.eval(s, t);
                csv.row({s, t, ev.p, ev.delta, ev.gamma});
            }
        }
    }
    csv.close();
}

}  // namespace hedgelab::pricing
