#include "hedgelab/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "hedgelab/csv.hpp"

namespace hedgelab::io {

using nlohmann::json;

namespace {

void require_keys(const json& j, const std::set<std::string>& required,
                  const std::set<std::string>& optional, const std::string& where) {
    std::vector<std::string> missing;
    for (const auto& k : required)
        if (!j.contains(k)) missing.push_back(k);
    if (!missing.empty()) {
        std::string msg = "missing required key(s) in " + where + ":";
        for (const auto& k : missing) msg += " '" + k + "'";
        throw std::invalid_argument(msg);
    }
    for (const auto& [key, _] : j.items()) {
        if (!required.count(key) && !optional.count(key))
            throw std::invalid_argument("unknown key '" + key + "' in " + where);
    }
}

double positive(const json& j, const std::string& name) {
    const double v = j.get<double>();
    if (!(v > 0.0)) throw std::invalid_argument(name + " must be positive");
    return v;
}

}  // namespace

harness::ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not well-formed JSON: ") + e.what());
    }
    require_keys(j, {"model", "payoff", "strategy", "cost"},
                 {"alpha", "surface", "n_paths", "n_steps", "seed", "threads"}, "config");

    harness::ExperimentConfig cfg;

    const json& jm = j.at("model");
    require_keys(jm, {"kind"}, {"s0", "horizon", "volatility", "drift"}, "model");
    const std::string mkind = jm.at("kind").get<std::string>();
    if (mkind != "black_scholes")
        throw std::invalid_argument("model.kind must be 'black_scholes' (general local "
                                    "volatility models are API-only)");
    cfg.model.kind = model::ModelKind::black_scholes;
    cfg.model.s0 = jm.contains("s0") ? positive(jm.at("s0"), "model.s0") : 100.0;
    cfg.model.horizon =
        jm.contains("horizon") ? positive(jm.at("horizon"), "model.horizon") : 1.0;
    cfg.model.bs_vol =
        jm.contains("volatility") ? positive(jm.at("volatility"), "model.volatility") : 0.2;
    cfg.model.bs_drift = jm.contains("drift") ? jm.at("drift").get<double>() : 0.0;

    const json& jp = j.at("payoff");
    require_keys(jp, {"kind"}, {"strike"}, "payoff");
    const std::string pkind = jp.at("kind").get<std::string>();
    if (pkind == "call") {
        cfg.payoff.kind = pricing::PayoffKind::call;
    } else if (pkind == "put") {
        cfg.payoff.kind = pricing::PayoffKind::put;
    } else if (pkind == "s_log_s") {
        cfg.payoff.kind = pricing::PayoffKind::s_log_s;
    } else {
        throw std::invalid_argument("payoff.kind must be call, put or s_log_s");
    }
    if (cfg.payoff.kind != pricing::PayoffKind::s_log_s)
        cfg.payoff.strike =
            jp.contains("strike") ? positive(jp.at("strike"), "payoff.strike") : 100.0;
    else if (jp.contains("strike"))
        throw std::invalid_argument("payoff s_log_s takes no strike");

    cfg.alpha.constant = j.contains("alpha") ? positive(j.at("alpha"), "alpha") : 1.0;

    const json& jc = j.at("cost");
    require_keys(jc, {"kappa"}, {"lambda"}, "cost");
    cfg.cost.kappa = jc.at("kappa").get<double>();
    if (!(cfg.cost.kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
    std::string lam = jc.contains("lambda") ? jc.at("lambda").get<std::string>() : "spot";
    if (lam == "spot") {
        cfg.cost.lambda = nullptr;  // default lambda(s,t) = s
    } else if (lam == "one") {
        cfg.cost.lambda = [](double, double) { return 1.0; };
    } else {
        throw std::invalid_argument("cost.lambda must be 'spot' or 'one'");
    }

    const json& js = j.at("strategy");
    require_keys(js, {"kind"}, {"n", "epsilon", "band", "control", "mass"}, "strategy");
    const std::string skind = js.at("kind").get<std::string>();
    cfg.strategy.alpha = cfg.alpha.constant;
    if (skind == "leland_equidistant") {
        cfg.strategy.kind = strat::StrategyKind::leland_equidistant;
    } else if (skind == "hitting_time") {
        cfg.strategy.kind = strat::StrategyKind::hitting_time;
    } else if (skind == "reflected_control") {
        cfg.strategy.kind = strat::StrategyKind::reflected_control;
        const std::string band =
            js.contains("band") ? js.at("band").get<std::string>() : "pures";
        if (band != "pures")
            throw std::invalid_argument("strategy.band must be 'pures' in config files");
        const double eps = js.contains("epsilon") ? js.at("epsilon").get<double>() : 0.0;
        if (eps < 0.0) throw std::invalid_argument("strategy.epsilon must be >= 0");
        cfg.strategy.band = nullptr;  // harness builds the default band
        cfg.strategy.band_eps = eps;
        const std::string ctl =
            js.contains("control") ? js.at("control").get<std::string>() : "zero";
        if (ctl != "zero")
            throw std::invalid_argument("strategy.control must be 'zero' in config files");
        cfg.strategy.ctl = nullptr;
    } else if (skind == "optimal_family") {
        cfg.strategy.kind = strat::StrategyKind::optimal_family;
        cfg.strategy.family_n = js.contains("n") ? js.at("n").get<int>() : 8;
        if (cfg.strategy.family_n < 2) throw std::invalid_argument("strategy.n must be >= 2");
        const std::string mass =
            js.contains("mass") ? js.at("mass").get<std::string>() : "alpha_gamma";
        if (mass != "alpha_gamma")
            throw std::invalid_argument("strategy.mass must be 'alpha_gamma' in config files");
        cfg.strategy.mass = nullptr;  // harness default a = alpha lambda |Gamma|
    } else if (skind == "alpha_to_zero") {
        cfg.strategy.kind = strat::StrategyKind::alpha_to_zero;
    } else {
        throw std::invalid_argument("strategy.kind must be one of leland_equidistant, "
                                    "hitting_time, reflected_control, optimal_family, "
                                    "alpha_to_zero");
    }

    if (j.contains("surface")) {
        const json& ju = j.at("surface");
        require_keys(ju, {"kind"}, {"s_nodes", "t_nodes"}, "surface");
        const std::string ukind = ju.at("kind").get<std::string>();
        if (ukind == "closed_form") {
            cfg.surface.use_pde = false;
        } else if (ukind == "pde") {
            cfg.surface.use_pde = true;
            cfg.surface.s_nodes =
                ju.contains("s_nodes") ? ju.at("s_nodes").get<std::size_t>() : 400;
            cfg.surface.t_nodes =
                ju.contains("t_nodes") ? ju.at("t_nodes").get<std::size_t>() : 400;
        } else {
            throw std::invalid_argument("surface.kind must be 'closed_form' or 'pde'");
        }
    }

    cfg.n_paths = j.contains("n_paths") ? j.at("n_paths").get<std::size_t>() : 1000;
    if (cfg.n_paths < 1) throw std::invalid_argument("n_paths must be >= 1");
    cfg.n_steps = j.contains("n_steps") ? j.at("n_steps").get<std::size_t>() : 0;
    cfg.seed = j.contains("seed") ? j.at("seed").get<std::uint64_t>() : 1;
    cfg.threads = j.contains("threads") ? j.at("threads").get<int>() : 0;
    return cfg;
}

nlohmann::json canonical_json(const harness::ExperimentConfig& cfg) {
    json j;
    j["model"]["kind"] = "black_scholes";
    j["model"]["s0"] = cfg.model.s0;
    j["model"]["horizon"] = cfg.model.horizon;
    j["model"]["volatility"] = cfg.model.bs_vol;
    j["model"]["drift"] = cfg.model.bs_drift;
    switch (cfg.payoff.kind) {
        case pricing::PayoffKind::call:
            j["payoff"]["kind"] = "call";
            j["payoff"]["strike"] = cfg.payoff.strike;
            break;
        case pricing::PayoffKind::put:
            j["payoff"]["kind"] = "put";
            j["payoff"]["strike"] = cfg.payoff.strike;
            break;
        case pricing::PayoffKind::s_log_s:
            j["payoff"]["kind"] = "s_log_s";
            break;
        case pricing::PayoffKind::custom:
            throw std::invalid_argument("custom payoffs have no JSON form");
    }
    j["alpha"] = cfg.alpha.constant;
    j["cost"]["kappa"] = cfg.cost.kappa;
    j["cost"]["lambda"] = cfg.cost.lambda ? "one" : "spot";
    switch (cfg.strategy.kind) {
        case strat::StrategyKind::leland_equidistant:
            j["strategy"]["kind"] = "leland_equidistant";
            break;
        case strat::StrategyKind::hitting_time:
            j["strategy"]["kind"] = "hitting_time";
            break;
        case strat::StrategyKind::reflected_control:
            j["strategy"]["kind"] = "reflected_control";
            j["strategy"]["band"] = "pures";
            j["strategy"]["epsilon"] = cfg.strategy.band_eps;
            j["strategy"]["control"] = "zero";
            break;
        case strat::StrategyKind::optimal_family:
            j["strategy"]["kind"] = "optimal_family";
            j["strategy"]["n"] = cfg.strategy.family_n;
            j["strategy"]["mass"] = "alpha_gamma";
            break;
        case strat::StrategyKind::alpha_to_zero:
            j["strategy"]["kind"] = "alpha_to_zero";
            break;
    }
    j["surface"]["kind"] = cfg.surface.use_pde ? "pde" : "closed_form";
    if (cfg.surface.use_pde) {
        j["surface"]["s_nodes"] = cfg.surface.s_nodes;
        j["surface"]["t_nodes"] = cfg.surface.t_nodes;
    }
    j["n_paths"] = cfg.n_paths;
    j["n_steps"] = cfg.n_steps;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    return j;
}

harness::ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void write_samples_csv(const std::string& path, const harness::ExperimentResult& result) {
    CsvWriter csv(path, {"path_id", "err", "q", "drift", "u_stat"});
    for (const auto& s : result.samples)
        csv.row({static_cast<double>(s.path_id), s.err, s.q, s.drift, s.u_stat});
    csv.close();
}

void write_clt_report_json(const std::string& path, const harness::CltReport& report,
                           const harness::ExperimentResult& result) {
    json j;
    j["mean_u"] = report.mean_u;
    j["var_u"] = report.var_u;
    j["ks_stat"] = report.ks_stat;
    j["ks_pvalue"] = report.ks_pvalue;
    j["n_effective"] = report.n_effective;
    j["n_samples"] = result.samples.size();
    j["n_aborted"] = result.n_aborted;
    j["n_steps_used"] = result.n_steps_used;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failure on: " + path);
}

}  // namespace hedgelab::io
