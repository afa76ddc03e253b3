#include "hedgelab/market_model.hpp"

#include <cmath>

#include "hedgelab/rng.hpp"

namespace hedgelab::model {

PathGrid simulate_path(const ModelSpec& model, std::size_t n_steps, std::uint64_t seed,
                       std::uint64_t stream) {
    model.validate();
    if (n_steps < 1) throw std::invalid_argument("simulate_path: n_steps must be >= 1");

    PathGrid path;
    path.seed = seed;
    path.stream = stream;
    path.times.resize(n_steps + 1);
    path.prices.resize(n_steps + 1);
    path.increments.resize(n_steps);

    const double dt = model.horizon / static_cast<double>(n_steps);
    const double sqrt_dt = std::sqrt(dt);
    for (std::size_t k = 0; k <= n_steps; ++k)
        path.times[k] = model.horizon * static_cast<double>(k) / static_cast<double>(n_steps);

    num::PathRng rng(seed, stream);
    const double floor = 1e-8 * model.s0;
    double s = model.s0;
    path.prices[0] = s;

    if (model.kind == ModelKind::black_scholes) {
        // exact GBM step: S exp((mu - v^2/2) dt + v dB)
        const double v = model.bs_vol;
        const double mu = model.bs_drift;
        const double drift_term = (mu - 0.5 * v * v) * dt;
        for (std::size_t k = 0; k < n_steps; ++k) {
            const double db = sqrt_dt * rng.next_normal();
            path.increments[k] = db;
            s *= std::exp(drift_term + v * db);
            if (!std::isfinite(s))
                throw std::runtime_error("simulate_path: non-finite price at step " +
                                         std::to_string(k));
            path.prices[k + 1] = s;
        }
    } else {
        for (std::size_t k = 0; k < n_steps; ++k) {
            const double t = path.times[k];
            const double db = sqrt_dt * rng.next_normal();
            path.increments[k] = db;
            s += model.theta(s, t) * dt + model.vol(s, t) * db;
            if (s < floor) {
                s = floor + (floor - s);  // reflect
                ++path.floor_hits;
            }
            if (!std::isfinite(s))
                throw std::runtime_error("simulate_path: non-finite price at step " +
                                         std::to_string(k));
            path.prices[k + 1] = s;
        }
    }
    return path;
}

}  // namespace hedgelab::model
