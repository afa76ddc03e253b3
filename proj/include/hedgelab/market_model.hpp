#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace hedgelab::model {

enum class ModelKind { black_scholes, general };

// Local volatility dynamics dS = theta(S,t) dt + sigma(S,t) dB on [0,T].
struct ModelSpec {
    double s0 = 100.0;
    double horizon = 1.0;
    ModelKind kind = ModelKind::black_scholes;
    double bs_vol = 0.2;    // black_scholes: sigma(s,t) = bs_vol * s
    double bs_drift = 0.0;  // black_scholes: theta(s,t) = bs_drift * s
    std::function<double(double, double)> drift;  // general only
    std::function<double(double, double)> vol;    // general only

    double sigma(double s, double t) const {
        return kind == ModelKind::black_scholes ? bs_vol * s : vol(s, t);
    }
    double theta(double s, double t) const {
        if (kind == ModelKind::black_scholes) return bs_drift * s;
        return drift ? drift(s, t) : 0.0;
    }
    void validate() const {
        if (!(s0 > 0.0)) throw std::invalid_argument("ModelSpec: s0 must be positive");
        if (!(horizon > 0.0)) throw std::invalid_argument("ModelSpec: horizon must be positive");
        if (kind == ModelKind::black_scholes && !(bs_vol >= 0.0))
            throw std::invalid_argument("ModelSpec: black_scholes volatility must be >= 0");
        if (kind == ModelKind::general && !vol)
            throw std::invalid_argument("ModelSpec: general model needs a vol function");
    }
};

struct PathGrid {
    std::vector<double> times;       // t_0 = 0 < ... < t_N = T, equidistant
    std::vector<double> prices;      // S at the nodes
    std::vector<double> increments;  // Brownian increments, one per step
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    int floor_hits = 0;  // positivity-floor reflections (general model only)

    std::size_t n_steps() const { return increments.size(); }
    double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
};

// Simulates one price path on a uniform grid. Black-Scholes paths use exact
// log-normal stepping; general models use Euler-Maruyama with a reflecting
// positivity floor at 1e-8 * s0. Identical (model, n_steps, seed, stream)
// always yields a bit-identical path.
PathGrid simulate_path(const ModelSpec& model, std::size_t n_steps, std::uint64_t seed,
                       std::uint64_t stream = 0);

}  // namespace hedgelab::model
