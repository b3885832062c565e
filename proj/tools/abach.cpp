#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "abach/bachelier.hpp"
#include "abach/calib.hpp"
#include "abach/chf.hpp"
#include "abach/marketio.hpp"
#include "abach/mc.hpp"
#include "abach/pricer.hpp"
#include "abach/smile.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Everything a run depends on besides the input files; materialized into
// every output directory so a run can be reproduced from its artifacts.
struct RunConfig {
    double alpha = 0.5;
    double window = 30.0;
    double spread_threshold_bps = 20.0;
    bool vega_weighted = false;
    int multistarts = 8;
    int max_iterations = 400;
    double simplex_tol = 1e-6;
    double quad_tolerance = 1e-11;
    int filon_degree = 19;
    std::uint64_t n_paths = 100000;
    std::uint64_t seed = 0;
};

std::string config_text(const RunConfig& c) {
    std::ostringstream os;
    os << "alpha = " << num(c.alpha) << "\n"
       << "window = " << num(c.window) << "\n"
       << "spread_threshold_bps = " << num(c.spread_threshold_bps) << "\n"
       << "vega_weighted = " << (c.vega_weighted ? "true" : "false") << "\n"
       << "multistarts = " << c.multistarts << "\n"
       << "max_iterations = " << c.max_iterations << "\n"
       << "simplex_tol = " << num(c.simplex_tol) << "\n"
       << "quad_tolerance = " << num(c.quad_tolerance) << "\n"
       << "filon_degree = " << c.filon_degree << "\n"
       << "n_paths = " << c.n_paths << "\n"
       << "seed = " << c.seed << "\n";
    return os.str();
}

void apply_config_line(RunConfig& c, const std::string& key, const std::string& value,
                       size_t line_no) {
    const auto bad = [&](const char* what) {
        throw abach::ValueError("config line " + std::to_string(line_no) + ": " + what +
                                " '" + value + "' for key '" + key + "'");
    };
    const auto as_double = [&] {
        try {
            size_t pos = 0;
            const double v = std::stod(value, &pos);
            if (pos == value.size() && std::isfinite(v)) return v;
        } catch (const std::exception&) {
        }
        bad("bad number");
        return 0.0;
    };
    const auto as_int = [&] {
        const double v = as_double();
        if (v != std::floor(v) || std::fabs(v) > 1e9) bad("bad integer");
        return static_cast<int>(v);
    };
    const auto as_u64 = [&] {
        std::uint64_t v = 0;
        const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
        if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
            bad("bad unsigned integer");
        return v;
    };
    const auto as_bool = [&] {
        if (value == "true") return true;
        if (value == "false") return false;
        bad("bad boolean");
        return false;
    };

    if (key == "alpha")
        c.alpha = as_double();
    else if (key == "window")
        c.window = as_double();
    else if (key == "spread_threshold_bps")
        c.spread_threshold_bps = as_double();
    else if (key == "vega_weighted")
        c.vega_weighted = as_bool();
    else if (key == "multistarts")
        c.multistarts = as_int();
    else if (key == "max_iterations")
        c.max_iterations = as_int();
    else if (key == "simplex_tol")
        c.simplex_tol = as_double();
    else if (key == "quad_tolerance")
        c.quad_tolerance = as_double();
    else if (key == "filon_degree")
        c.filon_degree = as_int();
    else if (key == "n_paths")
        c.n_paths = as_u64();
    else if (key == "seed")
        c.seed = as_u64();
    else
        throw abach::ValueError("config line " + std::to_string(line_no) +
                                ": unknown key '" + key + "'");
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw abach::IoError("cannot open config file " + path);
    RunConfig c;
    std::string line;
    for (size_t n = 1; std::getline(in, line); ++n) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw abach::ValueError("config line " + std::to_string(n) +
                                    ": expected key = value");
        apply_config_line(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), n);
    }
    return c;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw abach::IoError("cannot write " + path.string());
    out << text;
}

fs::path prepare_out_dir(const std::string& out, const RunConfig& cfg) {
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw abach::IoError("cannot create output directory " + out);
    write_file(dir / "run_config.txt", config_text(cfg));
    return dir;
}

abach::SmileFitConfig smile_config(const RunConfig& c) {
    abach::SmileFitConfig s;
    s.alpha = abach::Alpha(c.alpha);
    s.window = c.window;
    s.spread_threshold_bps = c.spread_threshold_bps;
    s.vega_weighted = c.vega_weighted;
    s.multistarts = c.multistarts;
    s.max_iterations = c.max_iterations;
    s.simplex_tol = c.simplex_tol;
    return s;
}

json config_json(const RunConfig& c) {
    return json{{"alpha", c.alpha},
                {"window", c.window},
                {"spread_threshold_bps", c.spread_threshold_bps},
                {"vega_weighted", c.vega_weighted},
                {"multistarts", c.multistarts},
                {"max_iterations", c.max_iterations},
                {"simplex_tol", c.simplex_tol},
                {"quad_tolerance", c.quad_tolerance},
                {"filon_degree", c.filon_degree},
                {"n_paths", c.n_paths},
                {"seed", c.seed}};
}

// Stable nonzero exit codes, one per library error type.
int exit_code(const std::string& code) {
    static const std::map<std::string, int> table = {
        {"InvalidInput", 10},         {"BranchCutViolation", 11},
        {"OutsideStrip", 12},         {"QuadratureNotConverged", 13},
        {"UnsupportedAlpha", 14},     {"PriceBelowIntrinsic", 15},
        {"PriceNotFinite", 16},       {"TooFewCouples", 17},
        {"NonPositiveDiscount", 18},  {"MissingOisCurve", 19},
        {"NoBracketingQuotes", 20},   {"OptimizerNotConverged", 21},
        {"EmptyQuoteSet", 22},        {"CdfTabulationFailed", 23},
        {"SchemaError", 24},          {"SchemaVersionMismatch", 25},
        {"ValueError", 26},           {"NegativeInterval", 27},
        {"IoError", 28},
    };
    const auto it = table.find(code);
    return it == table.end() ? 1 : it->second;
}

struct CalibrateArgs {
    std::string chain_path, ois_path;
};

int cmd_calibrate(const CalibrateArgs& a, const RunConfig& cfg, const std::string& out) {
    const abach::MarketChain chain = abach::load_chain(a.chain_path);
    abach::OisCurve ois;
    if (!a.ois_path.empty())
        ois = abach::load_ois(a.ois_path, abach::parse_date(chain.value_date));

    const abach::CalibrationResult result = abach::run_cascade(chain, ois, smile_config(cfg));
    const fs::path dir = prepare_out_dir(out, cfg);
    abach::save_result(result, (dir / "result.json").string());

    {
        std::ostringstream os;
        os << "expiry,t,sigma_atm,sigma_model,included,status\n";
        for (const auto& e : result.expiries)
            os << e.expiry << ',' << num(e.t) << ',' << num(e.sigma_atm) << ','
               << num(e.sigma_model) << ',' << (e.included ? 1 : 0) << ',' << e.status
               << "\n";
        write_file(dir / "term_structure.csv", os.str());
    }

    // Per-expiry smile curves on the quoted strikes: ATM-normalized moneyness
    // against model and market implied vols, OTM side only, puts converted to
    // calls through the fitted parity pair.
    const abach::ModelParams params = result.params();
    const abach::SmileFunction smile(params);
    for (size_t i = 0; i < result.expiries.size(); ++i) {
        const auto& rep = result.expiries[i];
        if (!rep.included) continue;
        const auto& slice = chain.expiries[i];
        const double t = rep.t, B0 = rep.df.B0, F0 = rep.df.F0;
        const double atm_scale = rep.sigma_atm * std::sqrt(t);
        const double model_scale = params.sigma.scale(t);
        const double model_sigma = params.sigma.sigma(t);
        std::ostringstream os;
        os << "chi,model_iv,market_iv\n";
        for (const auto& row : slice.rows) {
            const double x = row.strike - F0;
            if (std::fabs(x) > cfg.window) continue;
            double call_mid;
            if (x < 0.0) {
                if (!row.has_put()) continue;
                call_mid = row.put_mid + B0 * (F0 - row.strike);
            } else {
                if (!row.has_call()) continue;
                call_mid = row.call_mid;
            }
            os << num(x / atm_scale) << ','
               << num(model_sigma * smile(x / model_scale)) << ',';
            try {
                os << num(abach::implied_vol({x, t, B0, call_mid}));
            } catch (const abach::Error&) {
                // unusable quote (below intrinsic after parity); leave blank
            }
            os << "\n";
        }
        write_file(dir / ("smile_" + rep.expiry + ".csv"), os.str());
    }

    int included = 0;
    for (const auto& e : result.expiries) included += e.included ? 1 : 0;
    std::cout << "eta " << num(result.eta) << "  k " << num(result.k) << "  alpha "
              << num(result.alpha) << "\nobjective " << num(result.objective) << "  i0 "
              << num(result.i0) << "  expiries " << included << "/"
              << result.expiries.size() << "\nwrote " << (dir / "result.json").string()
              << "\n";
    return 0;
}

struct PriceArgs {
    std::string params_path;
    std::vector<double> expiries, strikes;
    double b0 = 1.0;
};

int cmd_price(const PriceArgs& a, const RunConfig& cfg, const std::string& out) {
    const abach::CalibrationResult r = abach::load_result(a.params_path);
    const abach::ModelParams p = r.params();
    abach::QuadratureConfig q;
    q.tolerance = cfg.quad_tolerance;
    q.filon_degree = cfg.filon_degree;

    std::ostringstream os;
    os << "t,x,price,implied_vol,delta,vega,gamma,vanna,status\n";
    for (const double t : a.expiries)
        for (const double x : a.strikes) {
            os << num(t) << ',' << num(x) << ',';
            try {
                const double price = abach::lewis_call(x, t, a.b0, p, q);
                const double iv = abach::implied_vol({x, t, a.b0, price});
                const double rt = std::sqrt(t);
                const auto g = abach::greeks(x / rt, iv);
                os << num(price) << ',' << num(iv) << ',' << num(a.b0 * g.delta) << ','
                   << num(a.b0 * rt * g.vega) << ',' << num(a.b0 * g.gamma / rt) << ','
                   << num(a.b0 * g.vanna) << ",ok\n";
            } catch (const abach::Error& e) {
                os << ",,,,," << e.code() << "\n";
            }
        }

    const fs::path dir = prepare_out_dir(out, cfg);
    write_file(dir / "prices.csv", os.str());
    std::cout << os.str();
    return 0;
}

struct SimulateArgs {
    std::string params_path, payoff = "european_call";
    double strike = 0.0;
    double barrier = -std::numeric_limits<double>::infinity();
    bool is_put = false;
    std::vector<double> times;
    double f0 = 0.0, b0 = 1.0;
};

int cmd_simulate(const SimulateArgs& a, const RunConfig& cfg, const std::string& out) {
    const abach::CalibrationResult r = abach::load_result(a.params_path);
    const abach::ModelParams p = r.params();

    abach::PayoffSpec payoff;
    if (a.payoff == "european_call")
        payoff.kind = abach::PayoffKind::European;
    else if (a.payoff == "asian_call")
        payoff.kind = abach::PayoffKind::AsianArithmetic;
    else if (a.payoff == "barrier_ko_call")
        payoff.kind = abach::PayoffKind::BarrierDownOut;
    else
        throw abach::ValueError("unknown payoff '" + a.payoff + "'");
    payoff.strike = a.strike;
    payoff.barrier = a.barrier;
    payoff.is_put = a.is_put;

    abach::McConfig mc;
    mc.times = a.times;
    mc.rng = {cfg.seed, 0};

    // run the smaller path counts first so the convergence table and the
    // headline number come from the same deterministic stream layout
    std::vector<std::uint64_t> ns;
    for (const std::uint64_t d : {64u, 16u, 4u, 1u}) {
        const std::uint64_t n = std::max<std::uint64_t>(cfg.n_paths / d, 1000);
        if (ns.empty() || n > ns.back()) ns.push_back(n);
    }
    json convergence = json::array();
    abach::McResult res{};
    for (const std::uint64_t n : ns) {
        mc.n_paths = n;
        res = abach::price_exotic(payoff, mc, a.f0, a.b0, p);
        convergence.push_back(
            {{"n_paths", res.n_paths}, {"price", res.price}, {"std_error", res.std_error}});
    }

    json doc{{"payoff",
              {{"kind", a.payoff},
               {"strike", a.strike},
               {"barrier", a.barrier},
               {"is_put", a.is_put}}},
             {"f0", a.f0},
             {"b0", a.b0},
             {"times", a.times},
             {"price", res.price},
             {"std_error", res.std_error},
             {"n_paths", res.n_paths},
             {"convergence", convergence},
             {"config", config_json(cfg)}};
    const std::string text = doc.dump(2) + "\n";

    const fs::path dir = prepare_out_dir(out, cfg);
    write_file(dir / "simulate.json", text);
    std::cout << text;
    return 0;
}

struct ValidateArgs {
    std::string params_path;
    std::vector<double> sigma_times, sigma_values;
    std::optional<double> eta, k;
    std::vector<double> grid;
};

int cmd_validate(const ValidateArgs& a, const RunConfig& cfg, const std::string& out) {
    std::optional<abach::ModelParams> params;
    if (!a.params_path.empty()) {
        params.emplace(abach::load_result(a.params_path).params());
    } else {
        if (a.sigma_times.empty() || !a.eta || !a.k)
            throw abach::ValueError(
                "validate needs --params or --sigma-times/--sigma-values/--eta/--k");
        params.emplace(abach::VolCurve(a.sigma_times, a.sigma_values), *a.eta, *a.k,
                       abach::Alpha(cfg.alpha));
    }
    const abach::ModelParams& p = *params;

    std::vector<double> grid = a.grid;
    if (grid.empty()) {
        grid = p.sigma.times();
        if (grid.size() < 2) grid = {0.25, 0.5, 1.0, 2.0};
    }

    const abach::AdditivityReport rep = abach::validate_additivity(p, grid);
    const abach::StripBounds strip = abach::strip_bounds(p);

    // butterfly convexity of the call surface: second differences in strike
    // must stay nonnegative at every grid maturity
    const double step = 0.5;
    double min_butterfly = std::numeric_limits<double>::infinity();
    double worst_t = grid.front();
    for (const double t : grid) {
        std::vector<double> c;
        for (double x = -cfg.window; x <= cfg.window + 1e-12; x += step)
            c.push_back(abach::lewis_call(x, t, 1.0, p));
        for (size_t i = 1; i + 1 < c.size(); ++i) {
            const double fly = c[i - 1] - 2.0 * c[i] + c[i + 1];
            if (fly < min_butterfly) {
                min_butterfly = fly;
                worst_t = t;
            }
        }
    }
    const bool convex = min_butterfly >= -1e-9;

    json checks = json::array();
    std::ostringstream os;
    os << "additivity: " << (rep.all_passed ? "PASS" : "FAIL") << "\n";
    for (const auto& c : rep.checks) {
        os << "  [" << (!c.applicable ? " n/a" : c.passed ? "pass" : "FAIL") << "] "
           << c.name;
        if (!c.detail.empty()) os << ": " << c.detail;
        os << "\n";
        checks.push_back({{"name", c.name},
                          {"applicable", c.applicable},
                          {"passed", c.passed},
                          {"detail", c.detail}});
    }
    os << "strip: p_minus " << num(strip.p_minus) << "  p_plus " << num(strip.p_plus)
       << "\n";
    os << "butterfly: min second difference " << num(min_butterfly) << " at t "
       << num(worst_t) << " -> " << (convex ? "PASS" : "FAIL") << "\n";
    std::cout << os.str();

    json doc{{"additivity", {{"all_passed", rep.all_passed}, {"checks", checks}}},
             {"strip", {{"p_minus", strip.p_minus}, {"p_plus", strip.p_plus}}},
             {"butterfly",
              {{"min_second_difference", min_butterfly},
               {"worst_t", worst_t},
               {"passed", convex}}},
             {"grid", grid},
             {"config", config_json(cfg)}};
    const fs::path dir = prepare_out_dir(out, cfg);
    write_file(dir / "validate.json", doc.dump(2) + "\n");
    return 0;  // findings are report content, not process failures
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"additive Bachelier model toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    std::optional<double> flag_alpha, flag_window, flag_spread;
    std::optional<std::uint64_t> flag_seed, flag_n_paths;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "key = value run configuration file");
        sub->add_option("--out", out_dir, "output directory (default .)");
    };

    CalibrateArgs cal;
    auto* c_cal = app.add_subcommand("calibrate",
                                     "three-stage cascade calibration of an option chain");
    c_cal->add_option("--chain", cal.chain_path, "option chain CSV")->required();
    c_cal->add_option("--ois", cal.ois_path, "OIS zero curve CSV");
    c_cal->add_option("--alpha", flag_alpha, "tempered-stable family index in [0,1)");
    c_cal->add_option("--window", flag_window, "moneyness window |K - F0| in price units");
    c_cal->add_option("--spread-threshold-bps", flag_spread,
                      "first-expiry funding spread threshold");
    add_common(c_cal);

    PriceArgs pr;
    auto* c_pr = app.add_subcommand("price", "price table from calibrated parameters");
    c_pr->add_option("--params", pr.params_path, "calibration result JSON")->required();
    c_pr->add_option("--expiries", pr.expiries, "year fractions, comma separated")
        ->required()
        ->delimiter(',');
    c_pr->add_option("--strikes", pr.strikes, "strike moneyness K - F0, comma separated")
        ->delimiter(',');
    c_pr->add_option("--b0", pr.b0, "discount factor applied to every row");
    add_common(c_pr);

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Monte Carlo pricing of a payoff");
    c_sim->add_option("--params", sim.params_path, "calibration result JSON")->required();
    c_sim->add_option("--payoff", sim.payoff,
                      "european_call | asian_call | barrier_ko_call");
    c_sim->add_option("--strike", sim.strike, "absolute strike");
    c_sim->add_option("--barrier", sim.barrier, "down-and-out barrier level");
    c_sim->add_flag("--put", sim.is_put, "price the put side instead");
    c_sim->add_option("--times", sim.times, "monitoring dates, comma separated; last is expiry")
        ->required()
        ->delimiter(',');
    c_sim->add_option("--n-paths", flag_n_paths, "Monte Carlo paths");
    c_sim->add_option("--seed", flag_seed, "RNG seed");
    c_sim->add_option("--f0", sim.f0, "forward at the value date");
    c_sim->add_option("--b0", sim.b0, "discount factor to expiry");
    add_common(c_sim);

    ValidateArgs val;
    auto* c_val = app.add_subcommand("validate",
                                     "additivity, strip and convexity report");
    c_val->add_option("--params", val.params_path, "calibration result JSON");
    c_val->add_option("--sigma-times", val.sigma_times, "vol knot maturities")->delimiter(',');
    c_val->add_option("--sigma-values", val.sigma_values, "vol knot values")->delimiter(',');
    c_val->add_option("--eta", val.eta, "skew parameter");
    c_val->add_option("--k", val.k, "variance-of-variance parameter");
    c_val->add_option("--alpha", flag_alpha, "tempered-stable family index in [0,1)");
    c_val->add_option("--grid", val.grid, "maturity grid, comma separated")->delimiter(',');
    c_val->add_option("--window", flag_window, "convexity scan half-width in price units");
    add_common(c_val);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = load_run_config(config_path);
        if (flag_alpha) cfg.alpha = *flag_alpha;
        if (flag_window) cfg.window = *flag_window;
        if (flag_spread) cfg.spread_threshold_bps = *flag_spread;
        if (flag_seed) cfg.seed = *flag_seed;
        if (flag_n_paths) cfg.n_paths = *flag_n_paths;

        if (c_cal->parsed()) return cmd_calibrate(cal, cfg, out_dir);
        if (c_pr->parsed()) return cmd_price(pr, cfg, out_dir);
        if (c_sim->parsed()) return cmd_simulate(sim, cfg, out_dir);
        return cmd_validate(val, cfg, out_dir);
    } catch (const abach::Error& e) {
        std::string msg = e.what();
        if (msg.rfind(e.code() + ": ", 0) == 0) msg.erase(0, e.code().size() + 2);
        std::cerr << json{{"error", e.code()}, {"message", msg}}.dump() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "Unhandled"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }
}
