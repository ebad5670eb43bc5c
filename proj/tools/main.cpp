// Command line front end: synthetic data generation, calibration, scenario
// simulation and model validation. Every command takes --config/--out/--seed;
// flag values override config file values which override defaults.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cocurve/calibration.hpp"
#include "cocurve/centering.hpp"
#include "cocurve/cointegration.hpp"
#include "cocurve/market_data.hpp"
#include "cocurve/model.hpp"
#include "cocurve/simulation.hpp"
#include "cocurve/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct CommonOpts {
    std::string out_dir;
    std::uint64_t seed = 0;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw cocurve::IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// All outputs go through a temp file and an atomic rename.
void write_file(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw cocurve::IoError("cannot write " + tmp.string());
        out << content;
        if (!out) throw cocurve::IoError("short write on " + tmp.string());
    }
    fs::rename(tmp, path);
}

void move_into_place(const std::string& tmp, const fs::path& final_path) {
    fs::rename(tmp, final_path);
}

fs::path prepare_out_dir(const std::string& dir) {
    if (dir.empty()) throw cocurve::IoError("--out directory is required");
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw cocurve::IoError("cannot create output directory " + dir);
    return p;
}

void echo_config(const CLI::App& app, const fs::path& out_dir) {
    write_file(out_dir / "effective_config.toml",
               app.config_to_str(true, true));
}

cocurve::ModelParams load_params(const std::string& path) {
    return cocurve::ModelParams::from_json(read_file(path));
}

cocurve::Date parse_date_opt(const std::string& text, const cocurve::QuotePanel& gas,
                             const cocurve::QuotePanel& crude) {
    if (!text.empty()) return cocurve::Date::parse(text);
    // default: last date quoted in both panels
    const auto gd = gas.quote_dates();
    const auto cd = crude.quote_dates();
    for (auto it = gd.rbegin(); it != gd.rend(); ++it) {
        if (std::find(cd.begin(), cd.end(), *it) != cd.end()) return *it;
    }
    throw cocurve::DataError("no quote date shared by both panels");
}

int run_synth(const CommonOpts& common, const std::string& params_path, double years,
              int gas_contracts, int crude_contracts, const std::string& start_date,
              const std::string& scheme, const CLI::App& app) {
    const fs::path out = prepare_out_dir(common.out_dir);
    cocurve::ModelParams params =
        params_path.empty() ? cocurve::reference_params() : load_params(params_path);
    cocurve::SynthConfig cfg;
    cfg.years = years;
    cfg.gas_contracts = gas_contracts;
    cfg.crude_contracts = crude_contracts;
    cfg.seed = common.seed;
    cfg.scheme = scheme == "exponential" ? cocurve::Scheme::exponential
                                         : cocurve::Scheme::euler;
    if (!start_date.empty()) cfg.start_date = cocurve::Date::parse(start_date);

    const auto [gas, crude] = cocurve::synth_panels(params, cfg);
    cocurve::write_quotes_csv((out / "gas.csv.tmp").string(), gas);
    move_into_place((out / "gas.csv.tmp").string(), out / "gas.csv");
    cocurve::write_quotes_csv((out / "crude.csv.tmp").string(), crude);
    move_into_place((out / "crude.csv.tmp").string(), out / "crude.csv");
    write_file(out / "truth_params.json", params.to_json());
    echo_config(app, out);
    std::cout << "synth: wrote " << gas.records.size() << " gas and "
              << crude.records.size() << " crude quotes to " << out << "\n";
    return 0;
}

int run_calibrate(const CommonOpts& common, const std::string& gas_path,
                  const std::string& crude_path, const std::string& valuation,
                  int pieces, double theta_horizon, int fan_size, bool skip_theta,
                  const cocurve::CalibConfig& calib_cfg, const CLI::App& app) {
    const fs::path out = prepare_out_dir(common.out_dir);
    if (!fs::exists(gas_path)) throw cocurve::IoError("missing gas file: " + gas_path);
    if (!fs::exists(crude_path)) throw cocurve::IoError("missing crude file: " + crude_path);

    const auto gas = cocurve::load_quotes(gas_path, cocurve::Energy::gas);
    const auto crude = cocurve::load_quotes(crude_path, cocurve::Energy::crude);

    auto [params, report] = cocurve::calibrate(gas, crude, calib_cfg);

    const cocurve::Date valuation_date = parse_date_opt(valuation, gas, crude);
    std::vector<cocurve::ForwardCurve> curves = {
        cocurve::initial_curve(gas, valuation_date),
        cocurve::initial_curve(crude, valuation_date)};

    cocurve::ThetaFitConfig theta_cfg;
    theta_cfg.horizon = theta_horizon;
    theta_cfg.pieces = pieces;
    theta_cfg.fan_size = fan_size;
    if (!skip_theta) {
        params.theta_prime = cocurve::fit_theta_prime(params, curves, theta_cfg);
    }

    // centering error surfaces before and after the drift fit
    std::vector<double> times, mats_gas, mats_crude;
    for (int k = 1; k <= pieces; ++k) {
        times.push_back(theta_horizon * k / pieces);
    }
    for (int j = 0; j < fan_size; ++j) {
        const double w = fan_size == 1 ? 0.0 : double(j) / (fan_size - 1);
        mats_gas.push_back(theta_horizon + curves[0].maturities.front() +
                           w * (curves[0].maturities.back() - curves[0].maturities.front()));
        mats_crude.push_back(theta_horizon + curves[1].maturities.front() +
                             w * (curves[1].maturities.back() - curves[1].maturities.front()));
    }
    for (int e = 0; e < 2; ++e) {
        const auto energy = e == 0 ? cocurve::Energy::gas : cocurve::Energy::crude;
        const auto& mats = e == 0 ? mats_gas : mats_crude;
        const auto uncentered = cocurve::compute_moment_surface(
            energy, times, mats, params, false);
        const auto centered = cocurve::compute_moment_surface(
            energy, times, mats, params, true);
        const std::string base = e == 0 ? "gas" : "crude";
        const auto p1 = out / ("moment_uncentered_" + base + ".csv");
        cocurve::write_surface_csv((p1.string() + ".tmp"), uncentered);
        move_into_place(p1.string() + ".tmp", p1);
        const auto p2 = out / ("moment_centered_" + base + ".csv");
        cocurve::write_surface_csv((p2.string() + ".tmp"), centered);
        move_into_place(p2.string() + ".tmp", p2);
    }

    write_file(out / "params.json", params.to_json());
    write_file(out / "calibration_report.json", report.to_json());

    // matrices as CSV for plotting
    auto matrix_csv = [](const cocurve::Matrix& m) {
        std::ostringstream ss;
        ss.precision(17);
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                ss << m(i, j) << (j + 1 < m.cols() ? ',' : '\n');
            }
        }
        return ss.str();
    };
    write_file(out / "pi.csv", matrix_csv(params.pi));
    write_file(out / "sigma_sigma_t.csv", matrix_csv(params.sigma_sigma_t));

    // reconstructed motions for downstream validation
    {
        std::ostringstream ss;
        ss.precision(17);
        ss << "date";
        for (int d = 0; d < params.dim(); ++d) ss << ",x" << d + 1;
        ss << '\n';
        for (std::size_t k = 0; k < report.common_dates.size(); ++k) {
            ss << report.common_dates[k].iso();
            for (int d = 0; d < params.dim(); ++d) {
                ss << ',' << report.motion(d, static_cast<Eigen::Index>(k) + 1);
            }
            ss << '\n';
        }
        write_file(out / "motions.csv", ss.str());
    }

    for (int e = 0; e < 2; ++e) {
        const auto& panel = e == 0 ? gas : crude;
        if (!panel.rejected.empty()) {
            const auto p = out / (std::string("rejections_") + (e == 0 ? "gas" : "crude") +
                                  ".csv");
            cocurve::write_rejection_report(p.string() + ".tmp", panel.rejected);
            move_into_place(p.string() + ".tmp", p);
        }
    }
    echo_config(app, out);
    std::cout << "calibrate: tau_g=(" << params.vol.tau1_gas << ", " << params.vol.tau2_gas
              << ") tau_c=(" << params.vol.tau1_crude << ", " << params.vol.tau2_crude
              << ")\n"
              << "calibrate: wrote params.json and reports to " << out << "\n";
    return 0;
}

int run_simulate(const CommonOpts& common, const std::string& params_path,
                 const std::string& gas_path, const std::string& crude_path,
                 const std::string& valuation, const std::string& measure,
                 const std::string& scheme, int paths, double horizon, double dt,
                 std::vector<double> maturities, bool fixed_tenor, const CLI::App& app) {
    const fs::path out = prepare_out_dir(common.out_dir);
    cocurve::ModelParams params = load_params(params_path);
    const auto gas = cocurve::load_quotes(gas_path, cocurve::Energy::gas);
    const auto crude = cocurve::load_quotes(crude_path, cocurve::Energy::crude);
    const cocurve::Date valuation_date = parse_date_opt(valuation, gas, crude);
    std::vector<cocurve::ForwardCurve> curves = {
        cocurve::initial_curve(gas, valuation_date),
        cocurve::initial_curve(crude, valuation_date)};

    cocurve::SimConfig cfg;
    cfg.measure = measure == "p" ? cocurve::Measure::historical_p
                                 : cocurve::Measure::risk_neutral_q;
    cfg.scheme =
        scheme == "euler" ? cocurve::Scheme::euler : cocurve::Scheme::exponential;
    cfg.horizon = horizon;
    cfg.dt = dt;
    cfg.paths = paths;
    cfg.seed = common.seed;
    cfg.fixed_tenor = fixed_tenor;
    cfg.record_motions = paths <= 10000;  // keeps the diagnostics cheap on big runs
    if (maturities.empty()) {
        if (fixed_tenor) {
            maturities = {1.0 / 12.0, 0.25, 0.5};
        } else {
            // default: three maturities spread past the horizon
            maturities = {horizon + 1.0 / 12.0, horizon + 0.25, horizon + 0.5};
        }
    }
    cfg.maturities = maturities;

    if (cfg.measure == cocurve::Measure::historical_p && !params.theta_prime.empty() &&
        cfg.horizon > params.theta_prime.knots().back() + 1e-9) {
        std::cerr << "warning: simulation horizon " << cfg.horizon
                  << "y runs past the fitted centering drift ("
                  << params.theta_prime.knots().back()
                  << "y); expected prices drift off the initial curve beyond that "
                     "point. Refit with a longer --theta-horizon to center the whole "
                     "range\n";
    }

    const auto set = cocurve::simulate_forwards(params, curves, cfg);
    const auto diag = cocurve::scenario_diagnostics(set, params);

    const auto csv = out / "scenarios.csv";
    cocurve::write_scenarios_csv(csv.string() + ".tmp", set);
    move_into_place(csv.string() + ".tmp", csv);
    const auto bin = out / "scenarios.bin";
    cocurve::write_scenarios_binary(bin.string() + ".tmp", set);
    move_into_place(bin.string() + ".tmp", bin);
    write_file(out / "diagnostics.json", diag.to_json());
    echo_config(app, out);
    std::cout << "simulate: " << paths << " paths, " << set.times.size()
              << " observation times; outputs in " << out << "\n";
    return 0;
}

int run_validate(const CommonOpts& common, const std::string& params_path,
                 const std::string& motions_path, const CLI::App& app) {
    const fs::path out = prepare_out_dir(common.out_dir);
    cocurve::ModelParams params = load_params(params_path);

    ordered_json j;
    bool all_ok = true;

    // internal identity between the two closed-form routes
    {
        double worst = 0.0;
        const std::vector<std::pair<double, double>> points = {
            {0.1, 0.4}, {0.25, 0.6}, {0.5, 1.0}, {0.75, 1.5}};
        for (const auto& [t, maturity] : points) {
            for (const auto energy : {cocurve::Energy::gas, cocurve::Energy::crude}) {
                const double cf = cocurve::closed_form_moment(energy, t, maturity, params);
                double qv = 0.0;
                {
                    const int steps = 512;
                    for (int k = 0; k < steps; ++k) {
                        const double s = t * (k + 0.5) / steps;
                        qv += (cocurve::stacked_vol(energy, maturity - s, params.vol)
                                   .transpose() *
                               params.sigma)
                                  .squaredNorm() *
                              (t / steps);
                    }
                }
                const double via_variance =
                    std::exp(0.5 * cocurve::wiener_variance(energy, t, maturity, params)) *
                    std::exp(-0.5 * qv);
                worst = std::max(worst, std::abs(cf - via_variance) /
                                            std::max(1.0, std::abs(cf)));
            }
        }
        j["moment_identity"]["max_rel_gap"] = worst;
        j["moment_identity"]["pass"] = worst < 1e-6;
        all_ok = all_ok && worst < 1e-6;
    }

    // drift matrix rank classification
    {
        const auto rank = cocurve::classify_pi_rank(params.pi, 1e-8);
        j["pi_rank"]["rank"] = rank.rank;
        j["pi_rank"]["case"] = cocurve::to_string(rank.label);
        std::vector<double> sv(rank.singular_values.data(),
                               rank.singular_values.data() + rank.singular_values.size());
        j["pi_rank"]["singular_values"] = sv;
    }

    // behavioral fixtures
    {
        const auto [y1, y2] = cocurve::simulate_hamilton(2000, common.seed);
        const auto coint = cocurve::engle_granger_test(y2, {y1});
        j["hamilton_fixture"]["statistic"] = coint.residual_test.statistic;
        j["hamilton_fixture"]["crit_5"] = coint.residual_test.crit_5;
        j["hamilton_fixture"]["reject_no_cointegration"] = coint.residual_test.reject_at_5;
        j["hamilton_fixture"]["slope"] = -coint.relation[1];
        j["hamilton_fixture"]["pass"] = coint.residual_test.reject_at_5;
        all_ok = all_ok && coint.residual_test.reject_at_5;

        // negative control: independent random walks
        cocurve::CounterRng rng{common.seed + 1};
        std::vector<double> w1(2000), w2(2000);
        double a = 0, b = 0;
        for (int k = 0; k < 2000; ++k) {
            double z[2];
            rng.normals(1, static_cast<std::uint32_t>(k), 2, z);
            a += z[0];
            b += z[1];
            w1[static_cast<std::size_t>(k)] = a;
            w2[static_cast<std::size_t>(k)] = b;
        }
        const auto indep = cocurve::engle_granger_test(w2, {w1});
        j["independent_walks"]["statistic"] = indep.residual_test.statistic;
        j["independent_walks"]["rejected"] = indep.residual_test.reject_at_5;
    }

    // unit roots and long-term relations on reconstructed motions, if given
    if (!motions_path.empty()) {
        std::ifstream in(motions_path);
        if (!in) throw cocurve::IoError("cannot open motions file: " + motions_path);
        std::string line;
        std::getline(in, line);
        std::vector<std::vector<double>> cols(static_cast<std::size_t>(params.dim()));
        while (std::getline(in, line)) {
            std::stringstream ss(line);
            std::string field;
            std::getline(ss, field, ',');  // date
            for (auto& c : cols) {
                if (!std::getline(ss, field, ',')) break;
                c.push_back(std::stod(field));
            }
        }
        ordered_json adf = ordered_json::array();
        for (std::size_t d = 0; d < cols.size(); ++d) {
            const auto res = cocurve::adf_test(cols[d]);
            ordered_json one;
            one["component"] = d + 1;
            one["statistic"] = res.statistic;
            one["crit_5"] = res.crit_5;
            one["unit_root_rejected"] = res.reject_at_5;
            adf.push_back(std::move(one));
        }
        j["motion_unit_roots"] = std::move(adf);

        const auto rank = cocurve::classify_pi_rank(params.pi, 1e-8);
        if (rank.label == cocurve::PiRankCase::partial && !cols[0].empty()) {
            ordered_json rel = ordered_json::array();
            for (int r = 0; r < rank.rank && r < 2; ++r) {
                std::vector<double> combo(cols[0].size(), 0.0);
                for (std::size_t k = 0; k < combo.size(); ++k) {
                    for (int d = 0; d < params.dim(); ++d) {
                        combo[k] += rank.beta(d, r) * cols[static_cast<std::size_t>(d)][k];
                    }
                }
                const auto res = cocurve::adf_test(combo);
                ordered_json one;
                one["relation"] = r + 1;
                one["statistic"] = res.statistic;
                one["stationary_at_5"] = res.reject_at_5;
                rel.push_back(std::move(one));
            }
            j["long_term_relations"] = std::move(rel);
        }
    }

    j["pass"] = all_ok;
    write_file(out / "validation.json", j.dump(2));
    echo_config(app, out);
    std::cout << "validate: " << (all_ok ? "PASS" : "FAIL") << "; details in "
              << (out / "validation.json") << "\n";
    return all_ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cointegrated two-energy forward curve toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a TOML config file");

    CommonOpts common;

    auto* synth = app.add_subcommand("synth", "Generate synthetic quote panels");
    std::string synth_params, synth_start, synth_scheme = "euler";
    double synth_years = 5.0;
    int synth_gas_contracts = 9, synth_crude_contracts = 15;
    synth->add_option("--out", common.out_dir, "Output directory")->required();
    synth->add_option("--seed", common.seed, "Random seed");
    synth->add_option("--params", synth_params, "Model parameter JSON (default: built-in)");
    synth->add_option("--years", synth_years, "History length in years");
    synth->add_option("--gas-contracts", synth_gas_contracts, "Quoted gas delivery months");
    synth->add_option("--crude-contracts", synth_crude_contracts,
                      "Quoted crude delivery months");
    synth->add_option("--start-date", synth_start, "First quote date (YYYY-MM-DD)");
    synth->add_option("--scheme", synth_scheme, "euler or exponential")
        ->check(CLI::IsMember({"euler", "exponential"}));

    auto* calib = app.add_subcommand("calibrate", "Estimate the model from quote panels");
    std::string calib_gas, calib_crude, calib_valuation;
    int calib_pieces = 12, calib_fan = 12;
    double calib_horizon = 1.0;
    bool calib_skip_theta = false;
    cocurve::CalibConfig calib_cfg;
    calib->add_option("--gas", calib_gas, "Gas quotes CSV")->required();
    calib->add_option("--crude", calib_crude, "Crude quotes CSV")->required();
    calib->add_option("--out", common.out_dir, "Output directory")->required();
    calib->add_option("--seed", common.seed, "Random seed (recorded only)");
    calib->add_option("--valuation-date", calib_valuation,
                      "Initial curve date (default: last common quote date)");
    calib->add_option("--theta-pieces", calib_pieces, "Centering drift segments");
    calib->add_option("--theta-horizon", calib_horizon, "Centering fit horizon, years");
    calib->add_option("--fan-size", calib_fan, "Maturities per energy in the drift fit");
    calib->add_flag("--skip-theta", calib_skip_theta, "Skip the centering drift fit");
    calib->add_option("--n-gas", calib_cfg.n_gas, "Gas factor count (1-3)")
        ->check(CLI::Range(1, 3));
    calib->add_option("--n-crude", calib_cfg.n_crude, "Crude factor count (1-3)")
        ->check(CLI::Range(1, 3));
    calib->add_option("--tau1-starts", calib_cfg.tau1_starts,
                      "Slope time-constant starting grid, years");
    calib->add_option("--tau2-starts", calib_cfg.tau2_starts,
                      "Curvature time-constant starting grid, years");
    calib->add_option("--outlier-threshold", calib_cfg.outlier_threshold,
                      "Absolute return flagged as an outlier");

    auto* sim = app.add_subcommand("simulate", "Generate scenario paths");
    std::string sim_params, sim_gas, sim_crude, sim_valuation;
    std::string sim_measure = "q", sim_scheme = "exponential";
    int sim_paths = 100;
    double sim_horizon = 3.0, sim_dt = 1.0 / 365.0;
    std::vector<double> sim_maturities;
    bool sim_fixed_tenor = false;
    sim->add_option("--params", sim_params, "Model parameter JSON")->required();
    sim->add_option("--gas", sim_gas, "Gas quotes CSV for the initial curve")->required();
    sim->add_option("--crude", sim_crude, "Crude quotes CSV for the initial curve")
        ->required();
    sim->add_option("--out", common.out_dir, "Output directory")->required();
    sim->add_option("--seed", common.seed, "Random seed");
    sim->add_option("--valuation-date", sim_valuation, "Initial curve date");
    sim->add_option("--measure", sim_measure, "p (historical) or q (risk neutral)")
        ->check(CLI::IsMember({"p", "q"}));
    sim->add_option("--scheme", sim_scheme, "euler or exponential")
        ->check(CLI::IsMember({"euler", "exponential"}));
    sim->add_option("--paths", sim_paths, "Path count");
    sim->add_option("--horizon", sim_horizon, "Simulation horizon, years");
    sim->add_option("--dt", sim_dt, "Step size, years");
    sim->add_option("--maturities", sim_maturities,
                    "Maturities in years (tenors with --fixed-tenor)");
    sim->add_flag("--fixed-tenor", sim_fixed_tenor,
                  "Interpret maturities as constant tenors");

    auto* val = app.add_subcommand("validate", "Run the model diagnostics suite");
    std::string val_params, val_motions;
    val->add_option("--params", val_params, "Model parameter JSON")->required();
    val->add_option("--out", common.out_dir, "Output directory")->required();
    val->add_option("--seed", common.seed, "Random seed for the fixtures");
    val->add_option("--motions", val_motions, "Reconstructed motions CSV from calibrate");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            return run_synth(common, synth_params, synth_years, synth_gas_contracts,
                             synth_crude_contracts, synth_start, synth_scheme, app);
        }
        if (calib->parsed()) {
            return run_calibrate(common, calib_gas, calib_crude, calib_valuation,
                                 calib_pieces, calib_horizon, calib_fan, calib_skip_theta,
                                 calib_cfg, app);
        }
        if (sim->parsed()) {
            return run_simulate(common, sim_params, sim_gas, sim_crude, sim_valuation,
                                sim_measure, sim_scheme, sim_paths, sim_horizon, sim_dt,
                                sim_maturities, sim_fixed_tenor, app);
        }
        if (val->parsed()) {
            return run_validate(common, val_params, val_motions, app);
        }
    } catch (const cocurve::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
