#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hedgelab/market_model.hpp"
#include "hedgelab/pricing.hpp"
#include "hedgelab/strategies.hpp"

namespace hedgelab::harness {

struct SurfaceConfig {
    bool use_pde = false;
    std::size_t s_nodes = 400;
    std::size_t t_nodes = 400;
};

struct ExperimentConfig {
    model::ModelSpec model;
    pricing::PayoffSpec payoff;
    pricing::AlphaSpec alpha;
    strat::CostSpec cost;
    strat::StrategySpec strategy;
    SurfaceConfig surface;
    std::size_t n_paths = 1000;
    std::size_t n_steps = 0;  // 0: derive from the strategy's step rule
    std::uint64_t seed = 1;
    int threads = 0;  // 0: hardware concurrency, capped by HEDGELAB_THREADS
};

struct ErrorSample {
    std::uint64_t path_id = 0;
    double err = 0.0;    // f(S_T) - Pi_T
    double q = 0.0;      // int eta d<S>
    double drift = 0.0;  // int delta d<S>
    double u_stat = 0.0; // (err - drift) / (kappa sqrt(q))
};

struct ExperimentResult {
    std::vector<ErrorSample> samples;
    std::size_t n_aborted = 0;
    std::size_t n_steps_used = 0;
    double kappa = 0.0;
};

struct CltReport {
    double mean_u = 0.0;
    double var_u = 0.0;
    double ks_stat = 0.0;
    double ks_pvalue = 0.0;
    std::size_t n_effective = 0;
};

// Number of grid steps the configured strategy requires on this surface.
std::size_t required_steps(const ExperimentConfig& cfg, const pricing::PricingSurface& surface);

pricing::PricingSurface build_surface(const ExperimentConfig& cfg);

// Runs n_paths independent hedging simulations. Per-path seeds derive from
// (seed, path index); results are merged by path index, so the sample
// sequence does not depend on the worker count.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// u_stat should be standard normal under the mixed-normal limit; reports its
// sample mean/variance and the KS distance from N(0,1) with the asymptotic
// p-value. Requires at least 100 samples with q > 0.
CltReport clt_diagnostics(const std::vector<ErrorSample>& samples);

struct FrontierPoint {
    double alpha = 0.0;
    double initial_wealth = 0.0;  // p^alpha(S_0,0) + kappa lambda(S_0,0) |X^alpha_0|
    double eta = 0.0;
};

std::vector<FrontierPoint> frontier_scan(const model::ModelSpec& model,
                                         const pricing::PayoffSpec& payoff,
                                         const strat::CostSpec& cost,
                                         const std::vector<double>& alpha_grid);

struct EtaTableRow {
    double alpha = 0.0;
    double eta_L = 0.0;
    double eta_F = 0.0;
    double eta_simple = 0.0;
    double eta_dagger = 0.0;
};

std::vector<EtaTableRow> eta_comparison_table(const std::vector<double>& alpha_grid);

int effective_threads(int requested, std::size_t n_jobs);

}  // namespace hedgelab::harness
