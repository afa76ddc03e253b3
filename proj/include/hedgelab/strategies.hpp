#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hedgelab/asymptotics.hpp"
#include "hedgelab/market_model.hpp"
#include "hedgelab/pricing.hpp"

namespace hedgelab::strat {

struct CostSpec {
    double kappa = 0.01;
    // cost weight lambda(s,t); empty means lambda(s,t) = s
    std::function<double(double, double)> lambda;

    double lambda_at(double s, double t) const { return lambda ? lambda(s, t) : s; }
    void validate() const {
        if (!(kappa > 0.0)) throw std::invalid_argument("CostSpec: kappa must be positive");
    }
};

enum class StrategyKind {
    leland_equidistant,
    hitting_time,
    reflected_control,
    optimal_family,
    alpha_to_zero,
};

struct StrategySpec {
    StrategyKind kind = StrategyKind::leland_equidistant;
    double alpha = 1.0;  // leland, hitting, alpha_to_zero

    // reflected_control
    std::function<double(double, double)> band;         // b(s,t) > 0
    std::function<double(double, double, double)> ctl;  // c(x,s,t) >= 0 even in x
    double band_eps = 0.0;  // eps of the default band when `band` is empty

    // optimal_family
    std::function<double(double, double)> mass;  // a(s,t) > 0
    int family_n = 8;
};

// Per-(s,t) integrand factors for the variance and drift clocks
//   Q_T = int eta(S,t) dt-quadratic-variation, drift_T = int delta(S,t) d<S>.
struct PathFunctionals {
    std::function<double(double, double)> eta;    // eta(s,t)
    std::function<double(double, double)> delta;  // delta(s,t)
};

struct HedgeRecord {
    double initial_wealth = 0.0;  // Pi_{0-}
    double initial_cost = 0.0;    // kappa lambda(S_0,0) |dX_0|
    double err_T = 0.0;           // f(S_T) - Pi_T
    double q_T = 0.0;             // int eta d<S>
    double drift_T = 0.0;         // int delta d<S>
    double tv = 0.0;              // total variation of X, initial jump included
    double costs = 0.0;           // kappa int lambda d||X||, initial trade included
    double sum_x_ds = 0.0;        // int X dS accumulated
    double terminal_wealth = 0.0;
    double l_T = 0.0, r_T = 0.0;  // reflection local time totals
    long rebalance_count = 0;
    double hit_ratio = 0.0;  // hitting: mean threshold / mean |dX^alpha| per step
    bool flag_degenerate = false;
    bool flag_gamma_fallback = false;
    bool flag_clamped_eval = false;

    // node paths, filled only when record_paths was requested
    std::vector<double> x_path, pi_path, z_path, l_path, r_path, tv_path, cost_path;
};

// h = (2/pi) kappa^2 alpha^2 / v^2
double leland_step_size(double kappa, double alpha, double v);

// Delta hedging at equidistant dates with the enlarged-volatility surface.
// h_override replaces the Leland step size (used for fixed-date comparisons);
// rebalance dates snap to the nearest grid node and require dt <= h/10.
HedgeRecord run_leland(const model::PathGrid& path, const pricing::PricingSurface& surface,
                       const CostSpec& cost, double alpha,
                       std::optional<double> h_override = std::nullopt,
                       const PathFunctionals* funcs = nullptr, bool record_paths = false);

// Rebalances at the first node where |X^alpha - X^alpha_{tau_j}| reaches
// alpha kappa S_{tau_j} Gamma_{tau_j}; a nonpositive threshold falls back to
// an immediate rebalance at the next node and sets flag_gamma_fallback.
HedgeRecord run_hitting(const model::PathGrid& path, const pricing::PricingSurface& surface,
                        const CostSpec& cost, double alpha,
                        const PathFunctionals* funcs = nullptr, bool record_paths = false);

// Scaled deviation Z = (X^alpha - X)/kappa stepped by explicit Euler with
// projection onto [-b, b]; projection residuals accumulate into L and R.
HedgeRecord run_reflected_control(const model::PathGrid& path,
                                  const pricing::PricingSurface& surface, const CostSpec& cost,
                                  const std::function<double(double, double)>& band,
                                  const std::function<double(double, double, double)>& ctl,
                                  const PathFunctionals* funcs = nullptr,
                                  bool record_paths = false, bool skip_dt_check = false);

// Drift-only control dX = sgn(X^a - X) ((alpha+2)/(2 alpha)) nu^2/(kappa gamma + |X^a - X|) dt;
// requires a surface on which nu and gamma are constant to 1%.
HedgeRecord run_alpha_to_zero(const model::PathGrid& path,
                              const pricing::PricingSurface& surface, const CostSpec& cost,
                              double alpha, const PathFunctionals* funcs = nullptr,
                              bool record_paths = false);

// Tracking error at every node, accumulated from the deviation, the running
// costs and the realized surplus. The terminal value coincides with
// err_T = f(S_T) - Pi_T up to summation round-off.
std::vector<double> tracking_error_series(const HedgeRecord& record,
                                          const model::PathGrid& path,
                                          const pricing::PricingSurface& surface,
                                          const CostSpec& cost);

// Smallest band mass over the region the simulation plausibly visits:
// s log-spaced within exp(+-vhat sqrt(T)) of s0, t in [0, 0.75 T]. Feeds the
// two-scale step rule dt <= 0.05 kappa^2 min(a)^2.
double reflected_min_mass(const pricing::PricingSurface& surface,
                          const std::function<double(double, double)>& band,
                          const std::function<double(double, double, double)>& ctl);

double reflected_required_dt(double kappa, double min_mass);

std::size_t reflected_required_steps(const pricing::PricingSurface& surface,
                                     const CostSpec& cost,
                                     const std::function<double(double, double)>& band,
                                     const std::function<double(double, double, double)>& ctl);

// One-sided Lipschitz spot check of x -> -sgn(x) c(x,s,t) on random triples;
// returns the largest estimated constant K (informational).
double lipschitz_spot_check(const std::function<double(double, double, double)>& ctl,
                            const std::function<double(double, double)>& band, double s0,
                            double horizon, std::uint64_t seed = 99, int n_triples = 1000);

}  // namespace hedgelab::strat
