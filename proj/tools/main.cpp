#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hedgelab/asymptotics.hpp"
#include "hedgelab/csv.hpp"
#include "hedgelab/harness.hpp"
#include "hedgelab/io.hpp"
#include "hedgelab/variational.hpp"

namespace {

std::string join_path(const std::string& dir, const std::string& name) {
    if (dir.empty() || dir == ".") return name;
    return dir.back() == '/' ? dir + name : dir + "/" + name;
}

std::vector<double> alpha_grid(double lo, double hi, double step) {
    if (!(lo > 0.0) || !(hi >= lo) || !(step > 0.0))
        throw std::invalid_argument("alpha grid requires 0 < alpha-min <= alpha-max, step > 0");
    std::vector<double> grid;
    for (double a = lo; a <= hi + 1e-12 * step; a += step) grid.push_back(a);
    return grid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hedgelab: hedging strategies under proportional transaction costs"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    std::uint64_t seed_override = 0;
    bool have_seed = false;
    std::size_t paths_override = 0;
    int threads_override = -1;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config)
            cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
        cmd->add_option("--out", out_dir, "output directory");
    };

    // price
    auto* cmd_price = app.add_subcommand("price", "price the configured payoff at (S0, 0)");
    add_common(cmd_price, true);
    std::string surface_csv;
    cmd_price->add_option("--surface-csv", surface_csv, "dump the surface as CSV");

    // simulate
    auto* cmd_sim = app.add_subcommand("simulate", "Monte Carlo hedging error samples");
    add_common(cmd_sim, true);
    cmd_sim->add_option("--paths", paths_override, "override n_paths");
    cmd_sim->add_option("--seed", seed_override, "override seed")->each([&](const std::string&) {
        have_seed = true;
    });
    cmd_sim->add_option("--threads", threads_override, "override worker count");

    // eta-table
    auto* cmd_eta = app.add_subcommand("eta-table", "variance coefficient comparison table");
    add_common(cmd_eta, false);
    double a_min = 0.1, a_max = 4.0, a_step = 0.1;
    cmd_eta->add_option("--alpha-min", a_min, "grid start")->capture_default_str();
    cmd_eta->add_option("--alpha-max", a_max, "grid end")->capture_default_str();
    cmd_eta->add_option("--step", a_step, "grid step")->capture_default_str();

    // frontier
    auto* cmd_frontier = app.add_subcommand("frontier", "cost-risk frontier over alpha");
    add_common(cmd_frontier, true);
    double f_min = 0.1, f_max = 4.0, f_step = 0.1;
    cmd_frontier->add_option("--alpha-min", f_min, "grid start")->capture_default_str();
    cmd_frontier->add_option("--alpha-max", f_max, "grid end")->capture_default_str();
    cmd_frontier->add_option("--step", f_step, "grid step")->capture_default_str();

    // optimize-y
    auto* cmd_opt = app.add_subcommand("optimize-y", "brute-force variational minimization");
    add_common(cmd_opt, false);
    double opt_a = 1.0, opt_gamma = 1.0;
    int opt_m = 64, opt_iters = 4000;
    cmd_opt->add_option("--a", opt_a, "band mass a")->required();
    cmd_opt->add_option("--gamma", opt_gamma, "gamma = lambda d2p")->required();
    cmd_opt->add_option("--segments", opt_m, "piecewise-linear segments")->required();
    cmd_opt->add_option("--iters", opt_iters, "descent iterations")->capture_default_str();

    // clt
    auto* cmd_clt = app.add_subcommand("clt", "central-limit diagnostics of the hedging error");
    add_common(cmd_clt, true);
    cmd_clt->add_option("--paths", paths_override, "override n_paths");
    cmd_clt->add_option("--seed", seed_override, "override seed")->each([&](const std::string&) {
        have_seed = true;
    });
    cmd_clt->add_option("--threads", threads_override, "override worker count");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_price) {
            auto cfg = hedgelab::io::load_config_file(config_path);
            const auto surface = hedgelab::harness::build_surface(cfg);
            const auto ev = surface.eval(cfg.model.s0, 0.0);
            const double iw = ev.p + cfg.cost.kappa *
                                         cfg.cost.lambda_at(cfg.model.s0, 0.0) *
                                         std::fabs(ev.delta);
            std::printf("p = %.17g\ndelta = %.17g\ngamma = %.17g\ninitial_wealth = %.17g\n",
                        ev.p, ev.delta, ev.gamma, iw);
            if (!surface_csv.empty())
                hedgelab::pricing::dump_surface_csv(surface, join_path(out_dir, surface_csv));
        } else if (*cmd_sim) {
            auto cfg = hedgelab::io::load_config_file(config_path);
            if (paths_override > 0) cfg.n_paths = paths_override;
            if (have_seed) cfg.seed = seed_override;
            if (threads_override >= 0) cfg.threads = threads_override;
            const auto result = hedgelab::harness::run_experiment(cfg);
            const std::string out = join_path(out_dir, "samples.csv");
            hedgelab::io::write_samples_csv(out, result);
            std::printf("wrote %zu samples (%zu aborted, %zu steps/path) to %s\n",
                        result.samples.size(), result.n_aborted, result.n_steps_used,
                        out.c_str());
        } else if (*cmd_eta) {
            const auto rows = hedgelab::harness::eta_comparison_table(
                alpha_grid(a_min, a_max, a_step));
            const std::string out = join_path(out_dir, "eta_table.csv");
            hedgelab::io::CsvWriter csv(out, {"alpha", "eta_L", "eta_F", "eta_simple",
                                              "eta_dagger"});
            for (const auto& r : rows)
                csv.row({r.alpha, r.eta_L, r.eta_F, r.eta_simple, r.eta_dagger});
            csv.close();
            std::printf("wrote %zu rows to %s\n", rows.size(), out.c_str());
        } else if (*cmd_frontier) {
            auto cfg = hedgelab::io::load_config_file(config_path);
            const auto points = hedgelab::harness::frontier_scan(
                cfg.model, cfg.payoff, cfg.cost, alpha_grid(f_min, f_max, f_step));
            const std::string out = join_path(out_dir, "frontier.csv");
            hedgelab::io::CsvWriter csv(out, {"alpha", "initial_wealth", "eta"});
            for (const auto& p : points) csv.row({p.alpha, p.initial_wealth, p.eta});
            csv.close();
            std::printf("wrote %zu rows to %s\n", points.size(), out.c_str());
        } else if (*cmd_opt) {
            const auto res = hedgelab::varopt::brute_force_min(opt_a, opt_gamma, opt_m,
                                                               std::max(opt_iters, 1000));
            const double target = hedgelab::asymp::eta_star(opt_a, opt_gamma);
            const double rel_gap =
                target > 0.0 ? (res.min_value - target) / target : res.min_value;
            const std::string out = join_path(out_dir, "optimize_y.csv");
            hedgelab::io::CsvWriter csv(
                out, {"a", "gamma", "case", "oracle_min", "eta_star", "rel_gap", "m"});
            csv.row_mixed({hedgelab::io::format_double(opt_a),
                           hedgelab::io::format_double(opt_gamma), res.case_tag,
                           hedgelab::io::format_double(res.min_value),
                           hedgelab::io::format_double(target),
                           hedgelab::io::format_double(rel_gap), std::to_string(opt_m)});
            csv.close();
            std::printf("oracle_min = %.17g, eta_star = %.17g (%s), wrote %s\n", res.min_value,
                        target, res.case_tag.c_str(), out.c_str());
        } else if (*cmd_clt) {
            auto cfg = hedgelab::io::load_config_file(config_path);
            if (paths_override > 0) cfg.n_paths = paths_override;
            if (have_seed) cfg.seed = seed_override;
            if (threads_override >= 0) cfg.threads = threads_override;
            const auto result = hedgelab::harness::run_experiment(cfg);
            const auto report = hedgelab::harness::clt_diagnostics(result.samples);
            const std::string samples_out = join_path(out_dir, "samples.csv");
            const std::string report_out = join_path(out_dir, "report.json");
            hedgelab::io::write_samples_csv(samples_out, result);
            hedgelab::io::write_clt_report_json(report_out, report, result);
            std::printf("mean_u = %.6g, var_u = %.6g, ks = %.6g, p = %.6g (n_eff = %zu)\n",
                        report.mean_u, report.var_u, report.ks_stat, report.ks_pvalue,
                        report.n_effective);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
