#include "hedgelab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "hedgelab/asymptotics.hpp"
#include "hedgelab/normal.hpp"

namespace hedgelab::harness {

int effective_threads(int requested, std::size_t n_jobs) {
    int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("HEDGELAB_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) n = std::min(n, cap);
    }
    return std::max(1, std::min<int>(n, static_cast<int>(std::max<std::size_t>(n_jobs, 1))));
}

pricing::PricingSurface build_surface(const ExperimentConfig& cfg) {
    if (cfg.surface.use_pde)
        return pricing::solve_nonlinear_pde(cfg.model, cfg.payoff, cfg.alpha,
                                            cfg.surface.s_nodes, cfg.surface.t_nodes);
    return pricing::PricingSurface::make_closed_form(cfg.model, cfg.payoff, cfg.alpha);
}

namespace {

struct StrategyContext {
    const ExperimentConfig* cfg = nullptr;
    const pricing::PricingSurface* surface = nullptr;
    strat::PathFunctionals funcs;
    std::function<double(double, double)> band;          // reflected
    std::function<double(double, double, double)> ctl;   // reflected
    std::size_t steps = 0;
};

// Builds the per-(s,t) eta / delta clocks and the control fields used by the
// configured strategy.
StrategyContext make_context(const ExperimentConfig& cfg,
                             const pricing::PricingSurface& surface) {
    StrategyContext ctx;
    ctx.cfg = &cfg;
    ctx.surface = &surface;
    const auto& strategy = cfg.strategy;
    const auto* surf = &surface;
    const auto cost = cfg.cost;

    auto lambda_gamma = [surf, cost](double s, double t) {
        return cost.lambda_at(s, t) * surf->eval(s, t).gamma;
    };

    switch (strategy.kind) {
        case strat::StrategyKind::leland_equidistant: {
            const double coef = asymp::eta_leland(strategy.alpha);
            ctx.funcs.eta = [lambda_gamma, coef](double s, double t) {
                const double g = lambda_gamma(s, t);
                return coef * g * g;
            };
            break;
        }
        case strat::StrategyKind::hitting_time: {
            const double coef = asymp::eta_hitting(strategy.alpha);
            ctx.funcs.eta = [lambda_gamma, coef](double s, double t) {
                const double g = lambda_gamma(s, t);
                return coef * g * g;
            };
            break;
        }
        case strat::StrategyKind::reflected_control: {
            ctx.band = strategy.band;
            ctx.ctl = strategy.ctl;
            if (!ctx.band) {
                // default band: b = alpha lambda |Gamma| / 2 + eps
                const double alpha = strategy.alpha;
                const double eps = strategy.band_eps;
                ctx.band = [surf, cost, alpha, eps](double s, double t) {
                    const auto ev = surf->eval(s, t);
                    return asymp::pures_bandwidth(alpha, cost.lambda_at(s, t),
                                                  std::fabs(ev.gamma), eps);
                };
            }
            const auto band = ctx.band;
            const auto ctl = ctx.ctl;
            const double alpha_const =
                surface.alpha().is_constant() ? surface.alpha().constant : strategy.alpha;
            if (!ctl) {
                // c = 0: eta = (b + gamma)^2 / 3 and a = 2b in closed form
                ctx.funcs.eta = [band, lambda_gamma](double s, double t) {
                    const double w = band(s, t) + lambda_gamma(s, t);
                    return w * w / 3.0;
                };
                ctx.funcs.delta = [band, lambda_gamma, surf, cost, alpha_const](double s,
                                                                                double t) {
                    const double curv = std::fabs(surf->eval(s, t).gamma);
                    return asymp::drift_delta(curv, cost.lambda_at(s, t), 2.0 * band(s, t),
                                              alpha_const);
                };
            } else {
                // generic (b,c): pointwise quadrature of the variance density
                ctx.funcs.eta = [band, ctl, lambda_gamma](double s, double t) {
                    auto c_abs = [&](double x) { return ctl(x, s, t); };
                    return asymp::eta_bc_at(band(s, t), c_abs, lambda_gamma(s, t)).value;
                };
                ctx.funcs.delta = [band, ctl, lambda_gamma, surf, cost, alpha_const](double s,
                                                                                     double t) {
                    auto c_abs = [&](double x) { return ctl(x, s, t); };
                    const double a_val =
                        asymp::derived_densities_at(band(s, t), c_abs).a;
                    const double curv = std::fabs(surf->eval(s, t).gamma);
                    return asymp::drift_delta(curv, cost.lambda_at(s, t), a_val, alpha_const);
                };
            }
            break;
        }
        case strat::StrategyKind::optimal_family: {
            auto mass = strategy.mass;
            const double alpha_const =
                surface.alpha().is_constant() ? surface.alpha().constant : strategy.alpha;
            if (!mass) {
                // canonical mass a = alpha lambda |Gamma| (zero drift)
                mass = [surf, cost, alpha_const](double s, double t) {
                    return alpha_const * cost.lambda_at(s, t) *
                           std::fabs(surf->eval(s, t).gamma);
                };
            }
            const int n = strategy.family_n;
            ctx.band = [mass, lambda_gamma, n](double s, double t) {
                return asymp::optimal_controls(mass(s, t), lambda_gamma(s, t), n).b;
            };
            ctx.ctl = [mass, lambda_gamma, n](double x, double s, double t) {
                const auto oc = asymp::optimal_controls(mass(s, t), lambda_gamma(s, t), n);
                auto smooth = oc.smoothed_controls();
                return smooth.c(x, s, t);
            };
            ctx.funcs.eta = [mass, lambda_gamma](double s, double t) {
                return asymp::eta_star(mass(s, t), lambda_gamma(s, t));
            };
            ctx.funcs.delta = [mass, lambda_gamma, surf, cost, alpha_const](double s, double t) {
                const double curv = std::fabs(surf->eval(s, t).gamma);
                return asymp::drift_delta(curv, cost.lambda_at(s, t), mass(s, t), alpha_const);
            };
            break;
        }
        case strat::StrategyKind::alpha_to_zero: {
            const double coef = asymp::eta_dagger(strategy.alpha);
            ctx.funcs.eta = [lambda_gamma, coef](double s, double t) {
                const double g = lambda_gamma(s, t);
                return coef * g * g;
            };
            break;
        }
    }
    return ctx;
}

strat::HedgeRecord run_one(const StrategyContext& ctx, const model::PathGrid& path) {
    const auto& cfg = *ctx.cfg;
    switch (cfg.strategy.kind) {
        case strat::StrategyKind::leland_equidistant:
            return strat::run_leland(path, *ctx.surface, cfg.cost, cfg.strategy.alpha,
                                     std::nullopt, &ctx.funcs);
        case strat::StrategyKind::hitting_time:
            return strat::run_hitting(path, *ctx.surface, cfg.cost, cfg.strategy.alpha,
                                      &ctx.funcs);
        case strat::StrategyKind::reflected_control:
        case strat::StrategyKind::optimal_family:
            return strat::run_reflected_control(path, *ctx.surface, cfg.cost, ctx.band, ctx.ctl,
                                                &ctx.funcs, false, /*skip_dt_check=*/true);
        case strat::StrategyKind::alpha_to_zero:
            return strat::run_alpha_to_zero(path, *ctx.surface, cfg.cost, cfg.strategy.alpha,
                                            &ctx.funcs);
    }
    throw std::logic_error("run_one: bad strategy kind");
}

}  // namespace

std::size_t required_steps(const ExperimentConfig& cfg, const pricing::PricingSurface& surface) {
    const double T = cfg.model.horizon;
    switch (cfg.strategy.kind) {
        case strat::StrategyKind::leland_equidistant: {
            const double v = cfg.model.kind == model::ModelKind::black_scholes
                                 ? cfg.model.bs_vol
                                 : cfg.model.sigma(cfg.model.s0, 0.0) / cfg.model.s0;
            const double h = strat::leland_step_size(cfg.cost.kappa, cfg.strategy.alpha, v);
            return static_cast<std::size_t>(std::ceil(10.0 * T / std::min(h, T)));
        }
        case strat::StrategyKind::hitting_time: {
            // threshold alpha kappa S Gamma should span >= 5 mean grid moves of
            // X^alpha, i.e. 5 v sqrt(dt) <= alpha kappa sqrt(2/pi)... pinned as
            // dt <= (alpha kappa / (5 v))^2 with a 2x safety margin
            const double v = cfg.model.kind == model::ModelKind::black_scholes
                                 ? cfg.model.bs_vol
                                 : cfg.model.sigma(cfg.model.s0, 0.0) / cfg.model.s0;
            const double dt = 0.5 * std::pow(cfg.strategy.alpha * cfg.cost.kappa / (5.0 * v), 2);
            return static_cast<std::size_t>(std::ceil(T / dt));
        }
        case strat::StrategyKind::reflected_control:
        case strat::StrategyKind::optimal_family: {
            auto ctx = make_context(cfg, surface);
            return strat::reflected_required_steps(surface, cfg.cost, ctx.band, ctx.ctl);
        }
        case strat::StrategyKind::alpha_to_zero: {
            // same two-scale rule with a = alpha gamma
            const auto ev = surface.eval(cfg.model.s0, 0.0);
            const double a_val =
                cfg.strategy.alpha * cfg.cost.lambda_at(cfg.model.s0, 0.0) * std::fabs(ev.gamma);
            const double dt = strat::reflected_required_dt(cfg.cost.kappa, a_val);
            return static_cast<std::size_t>(std::ceil(T / dt));
        }
    }
    throw std::logic_error("required_steps: bad strategy kind");
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.model.validate();
    cfg.payoff.validate();
    cfg.cost.validate();
    if (cfg.n_paths < 1) throw std::invalid_argument("run_experiment: n_paths must be >= 1");

    const pricing::PricingSurface surface = build_surface(cfg);
    const StrategyContext ctx = make_context(cfg, surface);

    const std::size_t need = required_steps(cfg, surface);
    std::size_t n_steps = cfg.n_steps;
    if (n_steps == 0) {
        n_steps = need;
    } else if (n_steps < need) {
        throw std::invalid_argument("run_experiment: n_steps below the strategy's step rule; "
                                    "need at least " +
                                    std::to_string(need));
    }

    ExperimentResult result;
    result.n_steps_used = n_steps;
    result.kappa = cfg.cost.kappa;
    result.samples.resize(cfg.n_paths);
    std::vector<char> ok(cfg.n_paths, 0);

    const int n_threads = effective_threads(cfg.threads, cfg.n_paths);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> fatal{false};
    std::exception_ptr fatal_error;
    std::mutex fatal_mutex;
    auto worker = [&]() {
        for (;;) {
            if (fatal.load()) break;
            const std::size_t i = next.fetch_add(1);
            if (i >= cfg.n_paths) break;
            try {
                const model::PathGrid path =
                    model::simulate_path(cfg.model, n_steps, cfg.seed, i);
                const strat::HedgeRecord rec = run_one(ctx, path);
                ErrorSample s;
                s.path_id = i;
                s.err = rec.err_T;
                s.q = rec.q_T;
                s.drift = rec.drift_T;
                s.u_stat = rec.q_T > 0.0
                               ? (rec.err_T - rec.drift_T) / (cfg.cost.kappa * std::sqrt(rec.q_T))
                               : 0.0;
                result.samples[i] = s;
                ok[i] = 1;
            } catch (const std::invalid_argument&) {
                // configuration errors, not per-path aborts
                std::lock_guard<std::mutex> lock(fatal_mutex);
                if (!fatal_error) fatal_error = std::current_exception();
                fatal.store(true);
            } catch (const std::exception&) {
                ok[i] = 0;
            }
        }
    };
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (fatal_error) std::rethrow_exception(fatal_error);

    std::vector<ErrorSample> kept;
    kept.reserve(cfg.n_paths);
    for (std::size_t i = 0; i < cfg.n_paths; ++i) {
        if (ok[i]) {
            kept.push_back(result.samples[i]);
        } else {
            ++result.n_aborted;
        }
    }
    if (result.n_aborted * 100 > cfg.n_paths)
        throw std::runtime_error("run_experiment: more than 1% of paths aborted (" +
                                 std::to_string(result.n_aborted) + ")");
    result.samples = std::move(kept);
    return result;
}

CltReport clt_diagnostics(const std::vector<ErrorSample>& samples) {
    std::vector<double> u;
    u.reserve(samples.size());
    for (const auto& s : samples)
        if (s.q > 0.0) u.push_back(s.u_stat);
    CltReport rep;
    rep.n_effective = u.size();
    if (rep.n_effective < 100)
        throw std::invalid_argument("clt_diagnostics: need at least 100 samples with q > 0");

    const double n = static_cast<double>(u.size());
    double mean = 0.0;
    for (double v : u) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : u) var += (v - mean) * (v - mean);
    var /= (n - 1.0);
    rep.mean_u = mean;
    rep.var_u = var;

    std::sort(u.begin(), u.end());
    double d = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double cdf = num::norm_cdf(u[i]);
        d = std::max(d, std::max(cdf - static_cast<double>(i) / n,
                                 static_cast<double>(i + 1) / n - cdf));
    }
    rep.ks_stat = d;
    const double lam = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    rep.ks_pvalue = num::kolmogorov_tail(lam);
    return rep;
}

std::vector<FrontierPoint> frontier_scan(const model::ModelSpec& model,
                                         const pricing::PayoffSpec& payoff,
                                         const strat::CostSpec& cost,
                                         const std::vector<double>& alpha_grid) {
    std::vector<FrontierPoint> out;
    out.reserve(alpha_grid.size());
    for (double a : alpha_grid) {
        if (!(a > 0.0)) throw std::invalid_argument("frontier_scan: alpha must be positive");
        pricing::AlphaSpec alpha;
        alpha.constant = a;
        const auto surface = pricing::PricingSurface::make_closed_form(model, payoff, alpha);
        const auto ev = surface.eval(model.s0, 0.0);
        FrontierPoint pt;
        pt.alpha = a;
        pt.initial_wealth = ev.p + cost.kappa * cost.lambda_at(model.s0, 0.0) * std::fabs(ev.delta);
        pt.eta = asymp::eta_leland(a);
        out.push_back(pt);
    }
    return out;
}

std::vector<EtaTableRow> eta_comparison_table(const std::vector<double>& alpha_grid) {
    std::vector<EtaTableRow> rows;
    rows.reserve(alpha_grid.size());
    for (double a : alpha_grid) {
        EtaTableRow r;
        r.alpha = a;
        r.eta_L = asymp::eta_leland(a);
        r.eta_F = asymp::eta_hitting(a);
        r.eta_simple = asymp::eta_simple(a);
        r.eta_dagger = asymp::eta_dagger(a);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace hedgelab::harness
