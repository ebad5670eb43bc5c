#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cocurve/market_data.hpp"
#include "cocurve/model.hpp"

namespace cocurve {

enum class Scheme { euler, exponential };

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Draws are a
// pure function of (seed, path, step, lane), so path-parallel simulation is
// schedule-independent.
struct CounterRng {
    std::uint64_t seed = 0;

    static std::array<std::uint32_t, 4> block(std::uint64_t key,
                                              const std::array<std::uint32_t, 4>& counter);
    // n standard normals for one (path, step) cell
    void normals(std::uint64_t path, std::uint32_t step, int n, double* out) const;
};

struct SimConfig {
    Measure measure = Measure::risk_neutral_q;
    Scheme scheme = Scheme::exponential;
    double horizon = 3.0;
    double dt = 1.0 / 365.0;
    int paths = 100;
    std::uint64_t seed = 0;
    // output maturities; absolute years when fixed_tenor is false, otherwise
    // tenors so that each observation uses T = t + tenor
    std::vector<double> maturities;
    bool fixed_tenor = false;
    std::vector<double> output_times;  // empty -> monthly plus the horizon
    bool record_motions = false;
    int threads = 0;

    void validate() const;
    TimeGrid grid() const;
    std::vector<double> effective_output_times() const;
};

struct MotionPath {
    TimeGrid grid;
    Matrix increments;  // dim x steps
    Matrix cumulative;  // dim x (steps + 1), starts at zero
};

// One path of the motion under the configured measure. Under Q the drift is
// off; under P the Euler step adds (pi X + eta) dt.
MotionPath simulate_motion_path(const ModelParams& params, const SimConfig& config,
                                std::uint64_t path_index);

std::vector<MotionPath> simulate_motions(const ModelParams& params, const SimConfig& config);

struct ScenarioSet {
    SimConfig config;
    std::vector<double> times;       // observation times
    std::vector<double> maturities;  // as configured (absolute or tenor)
    std::array<std::vector<double>, 2> initial_prices;  // per energy, per maturity slot:
                                                        // fixed-tenor entries vary by time
    std::vector<double> prices;      // [path][time][maturity][energy], row-major
    std::vector<Matrix> motions;     // optional, per path: dim x times
    long euler_negative_steps = 0;

    double& at(int path, int time, int mat, int energy);
    double at(int path, int time, int mat, int energy) const;
    double initial_price(int time, int mat, int energy) const;
};

ScenarioSet simulate_forwards(const ModelParams& params,
                              const std::vector<ForwardCurve>& curves,
                              const SimConfig& config);

// Streaming per-cell statistics over a large path count; nothing is stored
// per path. Deterministic for any thread count (fixed chunking).
struct CellStats {
    double mean = 0.0;
    double sd = 0.0;
    double se = 0.0;  // MC standard error of the mean
};

struct ScenarioStats {
    std::vector<double> times;
    std::vector<double> maturities;
    // ratio F(t,T)/F(0,T) statistics per [time][maturity][energy]
    std::vector<CellStats> ratio;
    long euler_negative_steps = 0;

    const CellStats& cell(int time, int mat, int energy) const;
};

ScenarioStats scenario_statistics(const ModelParams& params,
                                  const std::vector<ForwardCurve>& curves,
                                  const SimConfig& config);

// Discrete toy pair: y1 a random walk, y2 = 2 y1 + lagged noise. Used as the
// cointegration test fixture.
std::pair<std::vector<double>, std::vector<double>> simulate_hamilton(int n_steps,
                                                                      std::uint64_t seed);

struct ScenarioDiagnostics {
    ScenarioStats stats;
    // cross-energy correlation of horizon log-price changes, per maturity slot
    std::vector<double> comovement;
    // per cointegrating relation: Var(beta' X_T) / max_i Var(X_i(T)), when
    // motions were recorded and pi has partial rank
    std::vector<double> relation_variance_ratio;
    std::array<std::vector<double>, 2> terminal_quantiles;  // 5/25/50/75/95% per energy,
                                                            // first maturity slot
    std::string to_json() const;
};

ScenarioDiagnostics scenario_diagnostics(const ScenarioSet& set, const ModelParams& params);

void write_scenarios_csv(const std::string& path, const ScenarioSet& set);
// Compact binary layout; see README for the header description.
void write_scenarios_binary(const std::string& path, const ScenarioSet& set);
ScenarioSet read_scenarios_binary(const std::string& path);

}  // namespace cocurve
