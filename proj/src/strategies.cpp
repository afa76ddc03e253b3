#include "hedgelab/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hedgelab/rng.hpp"

namespace hedgelab::strat {

namespace {
constexpr double kPi = 3.141592653589793;

struct Book {
    const model::PathGrid* path = nullptr;
    const pricing::PricingSurface* surface = nullptr;
    const CostSpec* cost = nullptr;
    const PathFunctionals* funcs = nullptr;
    bool record_paths = false;

    HedgeRecord rec;
    double pi = 0.0;
    double prev_clock_eta = 0.0;
    double prev_clock_delta = 0.0;
    bool have_prev_clock = false;

    void start(double x0) {
        const double s0 = path->prices[0];
        const auto ev = surface->eval(s0, 0.0);
        rec.initial_cost = cost->kappa * cost->lambda_at(s0, 0.0) * std::fabs(x0);
        rec.initial_wealth = ev.p + rec.initial_cost;
        rec.tv = std::fabs(x0);
        rec.costs = rec.initial_cost;
        pi = rec.initial_wealth - rec.initial_cost;  // = p^alpha(S_0, 0)
        if (record_paths) {
            const std::size_t n = path->prices.size();
            rec.x_path.reserve(n);
            rec.pi_path.reserve(n);
            rec.tv_path.reserve(n);
            rec.cost_path.reserve(n);
            rec.x_path.push_back(x0);
            rec.pi_path.push_back(pi);
            rec.tv_path.push_back(rec.tv);
            rec.cost_path.push_back(rec.costs);
        }
        clock_at(0);
    }

    // trapezoid accumulation of the eta / delta clocks against sigma^2 dt
    void clock_at(std::size_t k) {
        if (!funcs) return;
        const double s = path->prices[k];
        const double t = path->times[k];
        const double sig = surface->model().sigma(s, t);
        const double qv = sig * sig;
        const double ce = funcs->eta ? funcs->eta(s, t) * qv : 0.0;
        const double cd = funcs->delta ? funcs->delta(s, t) * qv : 0.0;
        if (have_prev_clock) {
            const double dt = path->dt();
            rec.q_T += 0.5 * (prev_clock_eta + ce) * dt;
            rec.drift_T += 0.5 * (prev_clock_delta + cd) * dt;
        }
        prev_clock_eta = ce;
        prev_clock_delta = cd;
        have_prev_clock = true;
    }

    void earn(double x, std::size_t k) { // position x held over step k -> k+1
        const double ds = path->prices[k + 1] - path->prices[k];
        pi += x * ds;
        rec.sum_x_ds += x * ds;
    }

    void pay(double amount_tv, double s, double t) {
        rec.tv += amount_tv;
        rec.costs += cost->kappa * cost->lambda_at(s, t) * amount_tv;
        pi -= cost->kappa * cost->lambda_at(s, t) * amount_tv;
    }

    void node(double x, std::size_t k) {
        clock_at(k);
        if (record_paths && k > 0) {
            rec.x_path.push_back(x);
            rec.pi_path.push_back(pi);
            rec.tv_path.push_back(rec.tv);
            rec.cost_path.push_back(rec.costs);
        }
    }

    void finish() {
        const double sT = path->prices.back();
        rec.terminal_wealth = pi;
        rec.err_T = surface->payoff()(sT) - pi;
    }
};

}  // namespace

double leland_step_size(double kappa, double alpha, double v) {
    if (!(kappa > 0.0 && alpha > 0.0 && v > 0.0))
        throw std::invalid_argument("leland_step_size: inputs must be positive");
    return (2.0 / kPi) * kappa * kappa * alpha * alpha / (v * v);
}

HedgeRecord run_leland(const model::PathGrid& path, const pricing::PricingSurface& surface,
                       const CostSpec& cost, double alpha, std::optional<double> h_override,
                       const PathFunctionals* funcs, bool record_paths) {
    cost.validate();
    const std::size_t n = path.n_steps();
    const double dt = path.dt();
    const double T = path.times.back();
    const double v = surface.model().kind == model::ModelKind::black_scholes
                         ? surface.model().bs_vol
                         : surface.model().sigma(path.prices[0], 0.0) / path.prices[0];
    const double h = h_override.value_or(leland_step_size(cost.kappa, alpha, v));

    Book bk{&path, &surface, &cost, funcs, record_paths};
    if (h > T) bk.rec.flag_degenerate = true;
    if (dt > h / 10.0 && !bk.rec.flag_degenerate)
        throw std::invalid_argument("run_leland: grid too coarse, need dt <= h/10 = " +
                                    std::to_string(h / 10.0));

    // rebalance dates j h snapped to nearest grid node
    std::vector<std::size_t> rebal;
    rebal.push_back(0);
    for (std::size_t j = 1;; ++j) {
        const double tj = static_cast<double>(j) * h;
        if (tj > T + 0.5 * dt) break;
        const auto idx = static_cast<std::size_t>(std::llround(tj / dt));
        if (idx >= n) break;
        if (idx != rebal.back()) rebal.push_back(idx);
    }

    double x = surface.eval(path.prices[0], 0.0).delta;
    bk.start(x);
    bk.rec.rebalance_count = 1;

    std::size_t next_rebal = 1;
    for (std::size_t k = 0; k < n; ++k) {
        if (next_rebal < rebal.size() && k == rebal[next_rebal]) {
            const double s = path.prices[k];
            const double t = path.times[k];
            const double x_new = surface.eval(s, t).delta;
            bk.pay(std::fabs(x_new - x), s, t);
            x = x_new;
            ++bk.rec.rebalance_count;
            ++next_rebal;
        }
        bk.earn(x, k);
        bk.node(x, k + 1);
    }
    bk.finish();
    return bk.rec;
}

HedgeRecord run_hitting(const model::PathGrid& path, const pricing::PricingSurface& surface,
                        const CostSpec& cost, double alpha, const PathFunctionals* funcs,
                        bool record_paths) {
    cost.validate();
    const std::size_t n = path.n_steps();

    Book bk{&path, &surface, &cost, funcs, record_paths};
    double x_alpha = surface.eval(path.prices[0], 0.0).delta;
    double x = x_alpha;
    bk.start(x);
    bk.rec.rebalance_count = 1;

    // threshold frozen at the last rebalance time
    auto threshold_at = [&](std::size_t k) {
        const auto ev = surface.eval(path.prices[k], path.times[k]);
        return alpha * cost.kappa * path.prices[k] * ev.gamma;
    };
    double thr = threshold_at(0);
    bool force_next = false;
    if (thr <= 0.0) {
        bk.rec.flag_gamma_fallback = true;
        force_next = true;
    }

    double sum_abs_dx = 0.0;
    double sum_thr = thr > 0.0 ? thr : 0.0;
    std::size_t n_thr = thr > 0.0 ? 1 : 0;

    for (std::size_t k = 0; k < n; ++k) {
        bk.earn(x, k);
        const double s1 = path.prices[k + 1];
        const double t1 = path.times[k + 1];
        const double xa_new = surface.eval(s1, t1).delta;
        sum_abs_dx += std::fabs(xa_new - x_alpha);
        x_alpha = xa_new;
        const bool hit = force_next || std::fabs(x_alpha - x) >= thr;
        if (hit && k + 1 < n) {  // position changes take effect from the node onward
            bk.pay(std::fabs(x_alpha - x), s1, t1);
            x = x_alpha;
            ++bk.rec.rebalance_count;
            thr = threshold_at(k + 1);
            force_next = thr <= 0.0;
            if (force_next) bk.rec.flag_gamma_fallback = true;
            if (thr > 0.0) {
                sum_thr += thr;
                ++n_thr;
            }
        }
        bk.node(x, k + 1);
    }
    if (n > 0 && n_thr > 0) {
        const double mean_dx = sum_abs_dx / static_cast<double>(n);
        const double mean_thr = sum_thr / static_cast<double>(n_thr);
        bk.rec.hit_ratio = mean_dx > 0.0 ? mean_thr / mean_dx : 0.0;
        if (bk.rec.hit_ratio < 5.0) bk.rec.flag_degenerate = true;
    }
    bk.finish();
    return bk.rec;
}

double reflected_min_mass(const pricing::PricingSurface& surface,
                          const std::function<double(double, double)>& band,
                          const std::function<double(double, double, double)>& ctl) {
    const auto& m = surface.model();
    const double T = m.horizon;
    double vh;
    if (surface.repr() == pricing::PricingSurface::Repr::closed_form) {
        vh = surface.v_hat();
    } else {
        const double vloc = m.sigma(m.s0, 0.0) / m.s0;
        vh = vloc * std::sqrt(1.0 + 2.0 / surface.alpha()(m.s0, 0.0));
    }
    const double w = vh * std::sqrt(T);
    double min_a = 1e300;
    for (int i = 0; i <= 16; ++i) {
        const double s = m.s0 * std::exp(-w + 2.0 * w * i / 16.0);
        for (int j = 0; j <= 6; ++j) {
            const double t = 0.75 * T * j / 6.0;
            const double b_val = band(s, t);
            if (!(b_val > 0.0))
                throw std::invalid_argument("reflected_control: b(s,t) <= 0 sampled");
            double a_val;
            if (!ctl) {
                a_val = 2.0 * b_val;  // c = 0 so g = 1
            } else {
                auto c_abs = [&](double x) { return ctl(x, s, t); };
                a_val = asymp::derived_densities_at(b_val, c_abs).a;
            }
            min_a = std::min(min_a, a_val);
        }
    }
    return min_a;
}

double reflected_required_dt(double kappa, double min_mass) {
    return 0.05 * kappa * kappa * min_mass * min_mass;
}

std::size_t reflected_required_steps(const pricing::PricingSurface& surface,
                                     const CostSpec& cost,
                                     const std::function<double(double, double)>& band,
                                     const std::function<double(double, double, double)>& ctl) {
    const double min_a = reflected_min_mass(surface, band, ctl);
    const double dt = reflected_required_dt(cost.kappa, min_a);
    return static_cast<std::size_t>(std::ceil(surface.model().horizon / dt));
}

HedgeRecord run_reflected_control(const model::PathGrid& path,
                                  const pricing::PricingSurface& surface, const CostSpec& cost,
                                  const std::function<double(double, double)>& band,
                                  const std::function<double(double, double, double)>& ctl,
                                  const PathFunctionals* funcs, bool record_paths,
                                  bool skip_dt_check) {
    cost.validate();
    const std::size_t n = path.n_steps();
    const double dt = path.dt();
    const double kappa = cost.kappa;

    if (!skip_dt_check) {
        const double min_a = reflected_min_mass(surface, band, ctl);
        const double need = reflected_required_dt(kappa, min_a);
        if (dt > need)
            throw std::invalid_argument(
                "run_reflected_control: time step too coarse for the fast deviation scale; "
                "need dt <= " +
                std::to_string(need) + " (got " + std::to_string(dt) + ")");
    }

    Book bk{&path, &surface, &cost, funcs, record_paths};
    double x_alpha = surface.eval(path.prices[0], 0.0).delta;
    double z = 0.0;
    double x = x_alpha;  // X_{0+} = X^alpha_0
    bk.start(x);
    double l_cum = 0.0, r_cum = 0.0;
    if (record_paths) {
        bk.rec.z_path.reserve(n + 1);
        bk.rec.l_path.reserve(n + 1);
        bk.rec.r_path.reserve(n + 1);
        bk.rec.z_path.push_back(z);
        bk.rec.l_path.push_back(0.0);
        bk.rec.r_path.push_back(0.0);
    }

    for (std::size_t k = 0; k < n; ++k) {
        const double s = path.prices[k];
        const double t = path.times[k];
        bk.earn(x, k);

        const auto ev = surface.eval(s, t);
        if (ev.clamped) bk.rec.flag_clamped_eval = true;
        const double nu2 = ev.nu * ev.nu;
        double drift_tv = 0.0;
        if (ctl && z != 0.0) {
            const double cval = ctl(std::fabs(z), s, t);
            const double move = cval * nu2 * dt / (kappa * kappa);
            drift_tv = cval * nu2 * dt / kappa;
            z -= (z > 0.0 ? 1.0 : -1.0) * move;
        }
        const double s1 = path.prices[k + 1];
        const double t1 = path.times[k + 1];
        const double xa_new = surface.eval(s1, t1).delta;
        z += (xa_new - x_alpha) / kappa;
        x_alpha = xa_new;

        const double b1 = band(s1, t1);
        if (!(b1 > 0.0))
            throw std::invalid_argument("run_reflected_control: b(s,t) <= 0 sampled");
        double dl = 0.0, dr = 0.0;
        if (z < -b1) {
            dl = -b1 - z;
            z = -b1;
        } else if (z > b1) {
            dr = z - b1;
            z = b1;
        }
        l_cum += dl;
        r_cum += dr;

        // d||X|| = (1/kappa) c nu^2 dt + kappa (dL + dR)
        if (drift_tv > 0.0) bk.pay(drift_tv, s, t);
        if (dl + dr > 0.0) bk.pay(kappa * (dl + dr), s1, t1);

        x = x_alpha - kappa * z;
        if (record_paths) {
            bk.rec.z_path.push_back(z);
            bk.rec.l_path.push_back(l_cum);
            bk.rec.r_path.push_back(r_cum);
        }
        bk.node(x, k + 1);
    }
    bk.rec.l_T = l_cum;
    bk.rec.r_T = r_cum;
    bk.rec.rebalance_count = static_cast<long>(n);
    bk.finish();
    return bk.rec;
}

HedgeRecord run_alpha_to_zero(const model::PathGrid& path,
                              const pricing::PricingSurface& surface, const CostSpec& cost,
                              double alpha, const PathFunctionals* funcs, bool record_paths) {
    cost.validate();
    if (!(alpha > 0.0)) throw std::invalid_argument("run_alpha_to_zero: alpha must be positive");
    const auto& m = surface.model();

    // requires nu and gamma = lambda Gamma constant on the surface (1% spread)
    double nu_min = 1e300, nu_max = 0.0, g_min = 1e300, g_max = 0.0;
    for (int i = 0; i <= 8; ++i) {
        const double s = m.s0 * std::exp(-0.8 + 1.6 * i / 8.0);
        for (int j = 0; j <= 4; ++j) {
            const double t = 0.9 * m.horizon * j / 4.0;
            const auto ev = surface.eval(s, t);
            const double gam = cost.lambda_at(s, t) * ev.gamma;
            nu_min = std::min(nu_min, ev.nu);
            nu_max = std::max(nu_max, ev.nu);
            g_min = std::min(g_min, gam);
            g_max = std::max(g_max, gam);
        }
    }
    if (nu_max - nu_min > 0.01 * std::fabs(nu_max) || g_max - g_min > 0.01 * std::fabs(g_max))
        throw std::invalid_argument(
            "run_alpha_to_zero: nu and gamma must be constant within 1% on the surface "
            "(use the s_log_s payoff with lambda = s under black_scholes)");

    const std::size_t n = path.n_steps();
    const double dt = path.dt();
    const double kappa = cost.kappa;

    Book bk{&path, &surface, &cost, funcs, record_paths};
    double x_alpha = surface.eval(path.prices[0], 0.0).delta;
    double x = x_alpha;
    bk.start(x);

    for (std::size_t k = 0; k < n; ++k) {
        const double s = path.prices[k];
        const double t = path.times[k];
        bk.earn(x, k);

        const auto ev = surface.eval(s, t);
        const double gam = cost.lambda_at(s, t) * ev.gamma;
        const double dev = x_alpha - x;
        if (dev != 0.0) {
            const double speed =
                (alpha + 2.0) / (2.0 * alpha) * ev.nu * ev.nu / (kappa * gam + std::fabs(dev));
            double dx = (dev > 0.0 ? 1.0 : -1.0) * speed * dt;
            if (std::fabs(dx) > std::fabs(dev)) dx = dev;  // do not overshoot the target
            x += dx;
            bk.pay(std::fabs(dx), s, t);
        }
        const double s1 = path.prices[k + 1];
        const double t1 = path.times[k + 1];
        x_alpha = surface.eval(s1, t1).delta;
        bk.node(x, k + 1);
    }
    bk.rec.rebalance_count = static_cast<long>(n);
    bk.finish();
    return bk.rec;
}

std::vector<double> tracking_error_series(const HedgeRecord& record,
                                          const model::PathGrid& path,
                                          const pricing::PricingSurface& surface,
                                          const CostSpec& cost) {
    (void)cost;
    if (record.x_path.size() != path.prices.size() ||
        record.cost_path.size() != path.prices.size())
        throw std::invalid_argument("tracking_error_series: record lacks stored paths");
    const std::size_t n = path.n_steps();
    std::vector<double> err(n + 1, 0.0);

    const double p0 = surface.eval(path.prices[0], 0.0).p;
    double dev_gain = 0.0;  // int (X^alpha - X) dS
    double xa_gain = 0.0;   // int X^alpha dS
    double xa = surface.eval(path.prices[0], 0.0).delta;
    err[0] = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double ds = path.prices[k + 1] - path.prices[k];
        dev_gain += (xa - record.x_path[k]) * ds;
        xa_gain += xa * ds;
        const auto ev = surface.eval(path.prices[k + 1], path.times[k + 1]);
        xa = ev.delta;
        // kappa int_(0,t] lambda d||X||: paid costs net of the prepaid initial trade
        const double costs = record.cost_path[k + 1] - record.cost_path[0];
        // realized surplus of the benchmark, the discrete face of int |Gamma|/alpha d<S>
        const double surplus = p0 + xa_gain - ev.p;
        err[k + 1] = dev_gain + costs - surplus;
    }
    return err;
}

double lipschitz_spot_check(const std::function<double(double, double, double)>& ctl,
                            const std::function<double(double, double)>& band, double s0,
                            double horizon, std::uint64_t seed, int n_triples) {
    if (!ctl) return 0.0;
    num::PathRng rng(seed, 0);
    double worst = 0.0;
    for (int i = 0; i < n_triples; ++i) {
        const double s = s0 * std::exp(1.2 * (rng.next_uniform() - 0.5));
        const double t = 0.95 * horizon * rng.next_uniform();
        const double b = band(s, t);
        const double x = b * (2.0 * rng.next_uniform() - 1.0);
        const double y = b * (2.0 * rng.next_uniform() - 1.0);
        if (x == y) continue;
        const double fx = -(x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0)) * ctl(std::fabs(x), s, t);
        const double fy = -(y > 0 ? 1.0 : (y < 0 ? -1.0 : 0.0)) * ctl(std::fabs(y), s, t);
        const double k_est = (x - y) * (fx - fy) / ((x - y) * (x - y));
        worst = std::max(worst, k_est);
    }
    return worst;
}

}  // namespace hedgelab::strat
