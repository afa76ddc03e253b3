#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hedgelab/market_model.hpp"

namespace hedgelab::pricing {

enum class PayoffKind { call, put, s_log_s, custom };

struct PayoffSpec {
    PayoffKind kind = PayoffKind::call;
    double strike = 100.0;
    // custom payoffs are sampled on an s-grid and interpolated linearly
    std::vector<double> custom_s;
    std::vector<double> custom_values;
    bool convex = true;

    double operator()(double s) const;
    void validate() const;
};

struct AlphaSpec {
    double constant = 1.0;
    std::function<double(double, double)> fn;  // overrides constant when set

    double operator()(double s, double t) const {
        const double a = fn ? fn(s, t) : constant;
        if (!(a > 0.0)) throw std::invalid_argument("AlphaSpec: alpha must be positive");
        return a;
    }
    bool is_constant() const { return !fn; }
};

// pricing volatility v * sqrt(1 + 2/alpha)
double enlarged_vol(double v, double alpha);

struct BsQuote {
    double p = 0.0;
    double delta = 0.0;
    double gamma = 0.0;
    bool terminal = false;
};

// Zero-rate Black-Scholes price/delta/gamma at volatility v_hat. At t >= T the
// payoff value is returned with the midpoint subgradient at a kink and zero
// gamma, flagged as terminal.
BsQuote bs_closed_form(double s, double t, const PayoffSpec& payoff, double v_hat, double T);

struct SurfaceEval {
    double p = 0.0;
    double delta = 0.0;
    double gamma = 0.0;
    double nu = 0.0;  // sigma(s,t) * gamma
    bool clamped = false;
    bool terminal = false;
};

class PricingSurface {
public:
    enum class Repr { closed_form, grid };

    static PricingSurface make_closed_form(const model::ModelSpec& model,
                                           const PayoffSpec& payoff, const AlphaSpec& alpha);

    Repr repr() const { return repr_; }
    const model::ModelSpec& model() const { return model_; }
    const PayoffSpec& payoff() const { return payoff_; }
    const AlphaSpec& alpha() const { return alpha_; }
    double horizon() const { return model_.horizon; }
    double v_hat() const { return v_hat_; }

    SurfaceEval eval(double s, double t) const;

    // grid accessors (empty for closed form)
    const std::vector<double>& s_nodes() const { return s_nodes_; }
    const std::vector<double>& t_nodes() const { return t_nodes_; }
    double p_node(std::size_t it, std::size_t is) const { return p_[it * s_nodes_.size() + is]; }
    double delta_node(std::size_t it, std::size_t is) const {
        return delta_[it * s_nodes_.size() + is];
    }
    double gamma_node(std::size_t it, std::size_t is) const {
        return gamma_[it * s_nodes_.size() + is];
    }
    int unstable_sign_levels() const { return unstable_sign_levels_; }

    friend PricingSurface solve_nonlinear_pde(const model::ModelSpec&, const PayoffSpec&,
                                              const AlphaSpec&, std::size_t, std::size_t);

private:
    Repr repr_ = Repr::closed_form;
    model::ModelSpec model_;
    PayoffSpec payoff_;
    AlphaSpec alpha_;
    double v_hat_ = 0.0;  // closed form only

    std::vector<double> s_nodes_, t_nodes_;        // grid form
    std::vector<double> x_nodes_;                  // log prices, uniform
    std::vector<double> p_, delta_, gamma_;        // row-major [t][s]
    int unstable_sign_levels_ = 0;
};

// Backward solve of the modified-volatility pricing PDE
//   dp/dt + (1/2)(1 + sgn(gamma) * 2/alpha) sigma^2 d2p/ds2 = 0,  p(.,T) = f,
// on a uniform log-price grid, Crank-Nicolson with a Rannacher start. The
// nonlinearity is handled by freezing sgn(gamma) from the previous time level
// and sweeping until the sign pattern is stable (at most 5 sweeps).
PricingSurface solve_nonlinear_pde(const model::ModelSpec& model, const PayoffSpec& payoff,
                                   const AlphaSpec& alpha, std::size_t s_nodes,
                                   std::size_t t_nodes);

void dump_surface_csv(const PricingSurface& surface, const std::string& path,
                      std::size_t n_s = 101, std::size_t n_t = 101);

}  // namespace hedgelab::pricing
