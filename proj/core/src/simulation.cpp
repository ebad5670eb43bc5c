#include "cocurve/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "cocurve/numerics.hpp"
#include "cocurve/parallel.hpp"

namespace cocurve {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline double to_unit(std::uint32_t a, std::uint32_t b) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(a) << 32) | b;
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;  // in (0, 1)
}

}  // namespace

std::array<std::uint32_t, 4> CounterRng::block(std::uint64_t key,
                                               const std::array<std::uint32_t, 4>& counter) {
    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    std::array<std::uint32_t, 4> x = counter;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(0xD2511F53u, x[0], hi0, lo0);
        mulhilo(0xCD9E8D57u, x[2], hi1, lo1);
        x = {hi1 ^ x[1] ^ k0, lo1, hi0 ^ x[3] ^ k1, lo0};
        k0 += 0x9E3779B9u;
        k1 += 0xBB67AE85u;
    }
    return x;
}

void CounterRng::normals(std::uint64_t path, std::uint32_t step, int n, double* out) const {
    int produced = 0;
    std::uint32_t blk = 0;
    while (produced < n) {
        const std::array<std::uint32_t, 4> counter = {
            step, static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32),
            blk++};
        const auto words = block(seed, counter);
        const double u1 = to_unit(words[0], words[1]);
        const double u2 = to_unit(words[2], words[3]);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        out[produced++] = radius * std::cos(kTwoPi * u2);
        if (produced < n) out[produced++] = radius * std::sin(kTwoPi * u2);
    }
}

void SimConfig::validate() const {
    if (!(dt > 0.0)) throw ParameterError("SimConfig: dt must be positive");
    if (!(horizon >= dt)) throw ParameterError("SimConfig: horizon must cover one step");
    if (paths < 1) throw ParameterError("SimConfig: need at least one path");
    for (double m : maturities) {
        if (!(m > 0.0)) throw ParameterError("SimConfig: maturities must be positive");
    }
}

TimeGrid SimConfig::grid() const {
    const int steps = std::max(1, static_cast<int>(std::lround(horizon / dt)));
    return TimeGrid::uniform(0.0, steps * dt, steps);
}

std::vector<double> SimConfig::effective_output_times() const {
    if (!output_times.empty()) return output_times;
    std::vector<double> times;
    const TimeGrid g = grid();
    const double month = 1.0 / 12.0;
    double next = month;
    for (std::size_t k = 1; k < g.size(); ++k) {
        if (g[k] + 1e-12 >= next) {
            times.push_back(g[k]);
            next += month;
        }
    }
    if (times.empty() || times.back() < g.back() - 1e-12) times.push_back(g.back());
    return times;
}

MotionPath simulate_motion_path(const ModelParams& params, const SimConfig& config,
                                std::uint64_t path_index) {
    config.validate();
    const int n = params.dim();
    const TimeGrid grid = config.grid();
    const std::size_t steps = grid.steps();

    MotionPath out{grid, Matrix(n, static_cast<Eigen::Index>(steps)),
                   Matrix::Zero(n, static_cast<Eigen::Index>(steps) + 1)};
    CounterRng rng{config.seed};
    Vector z(n);
    Vector x = Vector::Zero(n);
    const bool historical = config.measure == Measure::historical_p;
    for (std::size_t k = 0; k < steps; ++k) {
        const double dt = grid.dt(k);
        rng.normals(path_index, static_cast<std::uint32_t>(k), n, z.data());
        Vector dx = params.sigma * z * std::sqrt(dt);
        if (historical) {
            dx += (params.pi * x + params.eta(grid[k])) * dt;
        }
        out.increments.col(static_cast<Eigen::Index>(k)) = dx;
        x += dx;
        out.cumulative.col(static_cast<Eigen::Index>(k) + 1) = x;
    }
    return out;
}

std::vector<MotionPath> simulate_motions(const ModelParams& params, const SimConfig& config) {
    config.validate();
    std::vector<MotionPath> batch;
    batch.reserve(static_cast<std::size_t>(config.paths));
    for (int p = 0; p < config.paths; ++p) {
        batch.push_back(simulate_motion_path(params, config, static_cast<std::uint64_t>(p)));
    }
    return batch;
}

double& ScenarioSet::at(int path, int time, int mat, int energy) {
    const std::size_t nt = times.size(), nm = maturities.size();
    return prices[((static_cast<std::size_t>(path) * nt + static_cast<std::size_t>(time)) * nm +
                   static_cast<std::size_t>(mat)) *
                      2 +
                  static_cast<std::size_t>(energy)];
}

double ScenarioSet::at(int path, int time, int mat, int energy) const {
    return const_cast<ScenarioSet*>(this)->at(path, time, mat, energy);
}

double ScenarioSet::initial_price(int time, int mat, int energy) const {
    const std::size_t nm = maturities.size();
    if (config.fixed_tenor) {
        return initial_prices[static_cast<std::size_t>(energy)]
                             [static_cast<std::size_t>(time) * nm +
                              static_cast<std::size_t>(mat)];
    }
    return initial_prices[static_cast<std::size_t>(energy)][static_cast<std::size_t>(mat)];
}

namespace {

const ForwardCurve& curve_for(const std::vector<ForwardCurve>& curves, Energy e) {
    for (const auto& c : curves) {
        if (c.energy == e) return c;
    }
    throw DataError(std::string("missing initial curve for ") + to_string(e));
}

// Shared path engine for both schemes. Accumulation runs per "group": one
// accumulator per distinct (maturity, energy), snapshotted into output cells
// at the right observation steps. With fixed maturities that collapses the
// per-step work from cells to maturities.
class ForwardEngine {
public:
    ForwardEngine(const ModelParams& params, const std::vector<ForwardCurve>& curves,
                  const SimConfig& config)
        : params_(params), config_(config), grid_(config.grid()) {
        obs_times_ = config.effective_output_times();
        for (double t : obs_times_) {
            const auto k = static_cast<std::size_t>(std::lround(t / config.dt));
            if (k < 1 || k > grid_.steps() || std::abs(grid_[k] - t) > 1e-9) {
                throw ParameterError("output time " + std::to_string(t) +
                                     " is not on the simulation grid");
            }
            obs_steps_.push_back(k);
        }
        const auto& gas = curve_for(curves, Energy::gas);
        const auto& crude = curve_for(curves, Energy::crude);

        const std::size_t nm = config.maturities.size();
        const int n = params.dim();
        for (int e = 0; e < 2; ++e) {
            const Energy energy = e == 0 ? Energy::gas : Energy::crude;
            const ForwardCurve& curve = e == 0 ? gas : crude;
            for (std::size_t j = 0; j < nm; ++j) {
                if (config.fixed_tenor) {
                    for (std::size_t i = 0; i < obs_times_.size(); ++i) {
                        Group g;
                        g.maturity = obs_times_[i] + config.maturities[j];
                        g.energy = energy;
                        g.f0 = curve.at(g.maturity);
                        g.snaps.push_back({obs_steps_[i], cell_index(i, j, e)});
                        groups_.push_back(std::move(g));
                    }
                } else {
                    Group g;
                    g.maturity = config.maturities[j];
                    g.energy = energy;
                    g.f0 = curve.at(g.maturity);
                    for (std::size_t i = 0; i < obs_times_.size(); ++i) {
                        if (g.maturity + 1e-12 >= obs_times_[i]) {
                            g.snaps.push_back({obs_steps_[i], cell_index(i, j, e)});
                        }
                    }
                    groups_.push_back(std::move(g));
                }
            }
        }
        // precompute per group: vol rows, quadratic variation and theta drift
        for (auto& g : groups_) {
            if (g.snaps.empty()) continue;
            g.last_step = g.snaps.back().first;
            g.sig.resize(g.last_step * static_cast<std::size_t>(n));
            g.qv_step.resize(g.last_step);
            for (std::size_t k = 0; k < g.last_step; ++k) {
                const Vector row = stacked_vol(g.energy, g.maturity - grid_[k], params.vol);
                for (int d = 0; d < n; ++d) {
                    g.sig[k * static_cast<std::size_t>(n) + static_cast<std::size_t>(d)] =
                        row[d];
                }
                g.qv_step[k] =
                    (row.transpose() * params.sigma).squaredNorm() * grid_.dt(k);
            }
            for (const auto& [stop, cell] : g.snaps) {
                theta_term_[cell] = theta_exponent(g.energy, g.maturity, grid_[stop]);
            }
        }
        valid_.assign(cells(), false);
        for (const auto& g : groups_) {
            for (const auto& [stop, cell] : g.snaps) valid_[cell] = true;
        }
    }

    const std::vector<double>& obs_times() const { return obs_times_; }
    std::size_t cells() const { return obs_times_.size() * config_.maturities.size() * 2; }
    bool cell_valid(std::size_t cell) const { return valid_.at(cell); }

    std::size_t cell_index(std::size_t time, std::size_t mat, int energy) const {
        return (time * config_.maturities.size() + mat) * 2 + static_cast<std::size_t>(energy);
    }

    // ratios[cell] = F(t,T)/F(0,T); prices[cell] = F(t,T)
    void run_path(std::uint64_t path, std::vector<double>& prices,
                  std::vector<double>& ratios, long& negative_steps,
                  Matrix* motions_at_obs) const {
        const int n = params_.dim();
        const std::size_t steps = grid_.steps();
        const bool historical = config_.measure == Measure::historical_p;
        const bool exponential = config_.scheme == Scheme::exponential;

        CounterRng rng{config_.seed};
        Vector z(n), x = Vector::Zero(n), x_full = Vector::Zero(n);
        std::vector<double> acc(groups_.size(), exponential ? 0.0 : 1.0);
        std::vector<double> qv(groups_.size(), 0.0);
        std::vector<std::size_t> cursor(groups_.size(), 0);

        std::size_t obs_cursor = 0;
        Vector dx_tilde(n), dx_full(n);
        for (std::size_t k = 0; k < steps; ++k) {
            const double dt = grid_.dt(k);
            rng.normals(path, static_cast<std::uint32_t>(k), n, z.data());
            dx_tilde.noalias() = params_.sigma * z * std::sqrt(dt);
            if (historical) {
                dx_tilde.noalias() += params_.pi * x * dt;  // theta handled separately
            }
            dx_full = dx_tilde;
            if (historical && !params_.theta_prime.empty()) {
                dx_full.noalias() += params_.theta_prime.at(grid_[k]) * dt;
            }
            for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
                const Group& g = groups_[gi];
                if (k >= g.last_step) continue;
                const double* sig = &g.sig[k * static_cast<std::size_t>(n)];
                if (exponential) {
                    double dot = 0.0;
                    for (int d = 0; d < n; ++d) dot += sig[d] * dx_tilde[d];
                    acc[gi] += dot;
                    qv[gi] += g.qv_step[k];
                } else {
                    double dot = 0.0;
                    for (int d = 0; d < n; ++d) dot += sig[d] * dx_full[d];
                    if (1.0 + dot <= 0.0) ++negative_steps;
                    acc[gi] *= 1.0 + dot;
                }
                while (cursor[gi] < g.snaps.size() && g.snaps[cursor[gi]].first == k + 1) {
                    const std::size_t cell = g.snaps[cursor[gi]].second;
                    double ratio;
                    if (exponential) {
                        ratio = std::exp(theta_term_.at(cell) + acc[gi] - 0.5 * qv[gi]);
                    } else {
                        ratio = acc[gi];
                    }
                    ratios[cell] = ratio;
                    prices[cell] = g.f0 * ratio;
                    ++cursor[gi];
                }
            }
            x += dx_tilde;
            x_full += dx_full;
            if (motions_at_obs != nullptr && obs_cursor < obs_steps_.size() &&
                k + 1 == obs_steps_[obs_cursor]) {
                motions_at_obs->col(static_cast<Eigen::Index>(obs_cursor)) = x_full;
                ++obs_cursor;
            }
        }
    }

    void fill_initial_prices(std::array<std::vector<double>, 2>& f0) const {
        const std::size_t nm = config_.maturities.size();
        const std::size_t nt = obs_times_.size();
        for (int e = 0; e < 2; ++e) {
            f0[static_cast<std::size_t>(e)].assign(config_.fixed_tenor ? nt * nm : nm, 0.0);
        }
        for (const auto& g : groups_) {
            for (const auto& [stop, cell] : g.snaps) {
                const int e = static_cast<int>(cell % 2);
                const std::size_t flat = cell / 2;
                const std::size_t mat = flat % nm;
                const std::size_t time = flat / nm;
                auto& dst = f0[static_cast<std::size_t>(e)];
                dst[config_.fixed_tenor ? time * nm + mat : mat] = g.f0;
            }
        }
    }

private:
    struct Group {
        double maturity = 0.0;
        Energy energy = Energy::gas;
        double f0 = 0.0;
        std::size_t last_step = 0;
        std::vector<std::pair<std::size_t, std::size_t>> snaps;  // (stop step, cell)
        std::vector<double> sig;      // per step, dim doubles
        std::vector<double> qv_step;  // per step
    };

    double theta_exponent(Energy e, double maturity, double t_end) const {
        if (params_.theta_prime.empty()) return 0.0;
        double acc = 0.0;
        const auto& knots = params_.theta_prime.knots();
        for (std::size_t p = 0; p + 1 < knots.size(); ++p) {
            const double a = knots[p];
            if (a >= t_end) break;
            const double b = std::min(knots[p + 1], t_end);
            if (b <= a) continue;
            acc += stacked_vol_integral(e, maturity, a, b, params_.vol)
                       .dot(params_.theta_prime.values().col(static_cast<Eigen::Index>(p)));
        }
        return acc;
    }

    const ModelParams& params_;
    const SimConfig& config_;
    TimeGrid grid_;
    std::vector<double> obs_times_;
    std::vector<std::size_t> obs_steps_;
    std::vector<Group> groups_;
    std::map<std::size_t, double> theta_term_;
    std::vector<bool> valid_;
};

}  // namespace

ScenarioSet simulate_forwards(const ModelParams& params,
                              const std::vector<ForwardCurve>& curves,
                              const SimConfig& config) {
    config.validate();
    params.check_shapes();
    if (config.maturities.empty()) {
        throw ParameterError("simulate_forwards: no maturities requested");
    }
    ForwardEngine engine(params, curves, config);

    ScenarioSet set;
    set.config = config;
    set.times = engine.obs_times();
    set.maturities = config.maturities;
    engine.fill_initial_prices(set.initial_prices);
    const std::size_t cells = engine.cells();
    set.prices.assign(static_cast<std::size_t>(config.paths) * cells,
                      std::numeric_limits<double>::quiet_NaN());
    if (config.record_motions) {
        set.motions.assign(static_cast<std::size_t>(config.paths),
                           Matrix(params.dim(), static_cast<Eigen::Index>(set.times.size())));
    }

    std::atomic<long> negatives{0};
    parallel_for(
        static_cast<std::size_t>(config.paths),
        [&](std::size_t p) {
            std::vector<double> prices(cells, std::numeric_limits<double>::quiet_NaN());
            std::vector<double> ratios(cells, std::numeric_limits<double>::quiet_NaN());
            long neg = 0;
            engine.run_path(p, prices, ratios, neg,
                            config.record_motions ? &set.motions[p] : nullptr);
            negatives += neg;
            std::memcpy(&set.prices[p * cells], prices.data(), cells * sizeof(double));
        },
        config.threads);
    set.euler_negative_steps = negatives.load();
    return set;
}

const CellStats& ScenarioStats::cell(int time, int mat, int energy) const {
    const std::size_t nm = maturities.size();
    return ratio[(static_cast<std::size_t>(time) * nm + static_cast<std::size_t>(mat)) * 2 +
                 static_cast<std::size_t>(energy)];
}

ScenarioStats scenario_statistics(const ModelParams& params,
                                  const std::vector<ForwardCurve>& curves,
                                  const SimConfig& config) {
    config.validate();
    params.check_shapes();
    ForwardEngine engine(params, curves, config);
    const std::size_t cells = engine.cells();

    constexpr std::size_t kChunk = 4096;
    const std::size_t paths = static_cast<std::size_t>(config.paths);
    const std::size_t chunks = (paths + kChunk - 1) / kChunk;
    // fixed chunking: per-chunk compensated sums merged in order make the
    // result independent of the thread count
    std::vector<std::vector<double>> sum(chunks), sumsq(chunks);
    std::vector<long> negs(chunks, 0);

    parallel_for(
        chunks,
        [&](std::size_t ci) {
            std::vector<double> s(cells, 0.0), s2(cells, 0.0);
            std::vector<double> comp(cells, 0.0), comp2(cells, 0.0);
            std::vector<double> prices(cells), ratios(cells);
            long neg = 0;
            const std::size_t lo = ci * kChunk;
            const std::size_t hi = std::min(paths, lo + kChunk);
            for (std::size_t p = lo; p < hi; ++p) {
                engine.run_path(p, prices, ratios, neg, nullptr);
                for (std::size_t c = 0; c < cells; ++c) {
                    if (!engine.cell_valid(c)) continue;
                    double y = ratios[c] - comp[c];
                    double t = s[c] + y;
                    comp[c] = (t - s[c]) - y;
                    s[c] = t;
                    y = ratios[c] * ratios[c] - comp2[c];
                    t = s2[c] + y;
                    comp2[c] = (t - s2[c]) - y;
                    s2[c] = t;
                }
            }
            sum[ci] = std::move(s);
            sumsq[ci] = std::move(s2);
            negs[ci] = neg;
        },
        config.threads);

    ScenarioStats stats;
    stats.times = engine.obs_times();
    stats.maturities = config.maturities;
    stats.ratio.resize(cells);
    std::vector<double> total(cells, 0.0), total2(cells, 0.0);
    for (std::size_t ci = 0; ci < chunks; ++ci) {
        for (std::size_t c = 0; c < cells; ++c) {
            total[c] += sum[ci][c];
            total2[c] += sumsq[ci][c];
        }
        stats.euler_negative_steps += negs[ci];
    }
    for (std::size_t c = 0; c < cells; ++c) {
        if (!engine.cell_valid(c)) {
            stats.ratio[c].mean = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        const double mean = total[c] / static_cast<double>(paths);
        const double var =
            std::max(total2[c] / static_cast<double>(paths) - mean * mean, 0.0);
        stats.ratio[c].mean = mean;
        stats.ratio[c].sd = std::sqrt(var);
        stats.ratio[c].se = stats.ratio[c].sd / std::sqrt(static_cast<double>(paths));
    }
    return stats;
}

std::pair<std::vector<double>, std::vector<double>> simulate_hamilton(int n_steps,
                                                                      std::uint64_t seed) {
    if (n_steps < 2) throw ParameterError("simulate_hamilton: need at least two steps");
    CounterRng rng{seed};
    std::vector<double> y1(static_cast<std::size_t>(n_steps)),
        y2(static_cast<std::size_t>(n_steps));
    double e_prev[2];
    rng.normals(0, 0, 2, e_prev);
    y1[0] = 0.0;
    y2[0] = 0.0;
    for (int k = 1; k < n_steps; ++k) {
        double e[2];
        rng.normals(0, static_cast<std::uint32_t>(k), 2, e);
        y1[static_cast<std::size_t>(k)] = y1[static_cast<std::size_t>(k - 1)] + e[0];
        y2[static_cast<std::size_t>(k)] = 2.0 * y1[static_cast<std::size_t>(k)] + e_prev[1];
        e_prev[1] = e[1];
    }
    return {std::move(y1), std::move(y2)};
}

void write_scenarios_csv(const std::string& path, const ScenarioSet& set) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write scenario csv: " + path);
    out << "path,t,T,energy,price\n";
    out.precision(17);
    const auto nt = static_cast<int>(set.times.size());
    const auto nm = static_cast<int>(set.maturities.size());
    for (int p = 0; p < set.config.paths; ++p) {
        for (int i = 0; i < nt; ++i) {
            for (int j = 0; j < nm; ++j) {
                const double maturity = set.config.fixed_tenor
                                            ? set.times[static_cast<std::size_t>(i)] +
                                                  set.maturities[static_cast<std::size_t>(j)]
                                            : set.maturities[static_cast<std::size_t>(j)];
                for (int e = 0; e < 2; ++e) {
                    out << p << ',' << set.times[static_cast<std::size_t>(i)] << ',' << maturity
                        << ',' << (e == 0 ? "gas" : "crude") << ',' << set.at(p, i, j, e)
                        << '\n';
                }
            }
        }
    }
}

namespace {
constexpr char kScenarioMagic[8] = {'C', 'C', 'S', 'C', 'E', 'N', '0', '1'};
}

void write_scenarios_binary(const std::string& path, const ScenarioSet& set) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write scenario binary: " + path);
    out.write(kScenarioMagic, 8);
    const std::uint32_t version = 1;
    const std::uint32_t npaths = static_cast<std::uint32_t>(set.config.paths);
    const std::uint32_t ntimes = static_cast<std::uint32_t>(set.times.size());
    const std::uint32_t nmats = static_cast<std::uint32_t>(set.maturities.size());
    const std::uint32_t nenergies = 2;
    const std::uint8_t measure = set.config.measure == Measure::historical_p ? 0 : 1;
    const std::uint8_t scheme = set.config.scheme == Scheme::euler ? 0 : 1;
    const std::uint8_t fixed_tenor = set.config.fixed_tenor ? 1 : 0;
    const std::uint8_t pad = 0;
    auto put = [&](const void* p, std::size_t len) {
        out.write(static_cast<const char*>(p), static_cast<std::streamsize>(len));
    };
    put(&version, 4);
    put(&npaths, 4);
    put(&ntimes, 4);
    put(&nmats, 4);
    put(&nenergies, 4);
    put(&measure, 1);
    put(&scheme, 1);
    put(&fixed_tenor, 1);
    put(&pad, 1);
    put(set.times.data(), 8 * set.times.size());
    put(set.maturities.data(), 8 * set.maturities.size());
    put(set.prices.data(), 8 * set.prices.size());
    if (!out) throw IoError("short write on scenario binary: " + path);
}

ScenarioSet read_scenarios_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open scenario binary: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kScenarioMagic, 8) != 0) {
        throw FormatError("bad scenario binary magic in " + path);
    }
    std::uint32_t version, npaths, ntimes, nmats, nenergies;
    std::uint8_t measure, scheme, fixed_tenor, pad;
    auto get = [&](void* p, std::size_t len) {
        in.read(static_cast<char*>(p), static_cast<std::streamsize>(len));
    };
    get(&version, 4);
    get(&npaths, 4);
    get(&ntimes, 4);
    get(&nmats, 4);
    get(&nenergies, 4);
    get(&measure, 1);
    get(&scheme, 1);
    get(&fixed_tenor, 1);
    get(&pad, 1);
    if (!in || version != 1 || nenergies != 2) {
        throw FormatError("unsupported scenario binary layout in " + path);
    }
    ScenarioSet set;
    set.config.paths = static_cast<int>(npaths);
    set.config.measure = measure == 0 ? Measure::historical_p : Measure::risk_neutral_q;
    set.config.scheme = scheme == 0 ? Scheme::euler : Scheme::exponential;
    set.config.fixed_tenor = fixed_tenor != 0;
    set.times.resize(ntimes);
    set.maturities.resize(nmats);
    get(set.times.data(), 8 * ntimes);
    get(set.maturities.data(), 8 * nmats);
    set.config.maturities = set.maturities;
    set.prices.resize(static_cast<std::size_t>(npaths) * ntimes * nmats * 2);
    get(set.prices.data(), 8 * set.prices.size());
    if (!in) throw FormatError("truncated scenario binary " + path);
    return set;
}

ScenarioDiagnostics scenario_diagnostics(const ScenarioSet& set, const ModelParams& params) {
    if (set.prices.empty()) throw DataError("scenario_diagnostics: empty scenario set");
    ScenarioDiagnostics diag;
    const int nt = static_cast<int>(set.times.size());
    const int nm = static_cast<int>(set.maturities.size());
    const int np = set.config.paths;

    diag.stats.times = set.times;
    diag.stats.maturities = set.maturities;
    diag.stats.ratio.resize(static_cast<std::size_t>(nt) * nm * 2);
    for (int i = 0; i < nt; ++i) {
        for (int j = 0; j < nm; ++j) {
            for (int e = 0; e < 2; ++e) {
                double s = 0.0, s2 = 0.0;
                const double f0 = set.initial_price(i, j, e);
                for (int p = 0; p < np; ++p) {
                    const double r = set.at(p, i, j, e) / f0;
                    s += r;
                    s2 += r * r;
                }
                CellStats& cell =
                    diag.stats.ratio[(static_cast<std::size_t>(i) * nm + j) * 2 +
                                     static_cast<std::size_t>(e)];
                cell.mean = s / np;
                cell.sd = std::sqrt(std::max(s2 / np - cell.mean * cell.mean, 0.0));
                cell.se = cell.sd / std::sqrt(static_cast<double>(np));
            }
        }
    }
    diag.stats.euler_negative_steps = set.euler_negative_steps;

    // co-movement: mean over paths of the within-path correlation between the
    // two energies' log price levels; cointegration shows up as a common
    // tendency along each trajectory
    diag.comovement.resize(static_cast<std::size_t>(nm), 0.0);
    for (int j = 0; j < nm; ++j) {
        double corr_sum = 0.0;
        int counted = 0;
        for (int p = 0; p < np; ++p) {
            double sg = 0, sc = 0, sgg = 0, scc = 0, sgc = 0;
            int m = 0;
            for (int i = 0; i < nt; ++i) {
                const double pg = set.at(p, i, j, 0);
                const double pc = set.at(p, i, j, 1);
                if (std::isnan(pg) || std::isnan(pc)) continue;
                const double lg = std::log(pg);
                const double lc = std::log(pc);
                sg += lg;
                sc += lc;
                sgg += lg * lg;
                scc += lc * lc;
                sgc += lg * lc;
                ++m;
            }
            if (m < 3) continue;
            const double cov = sgc / m - (sg / m) * (sc / m);
            const double vg = sgg / m - (sg / m) * (sg / m);
            const double vc = scc / m - (sc / m) * (sc / m);
            if (vg > 0 && vc > 0) {
                corr_sum += cov / std::sqrt(vg * vc);
                ++counted;
            }
        }
        diag.comovement[static_cast<std::size_t>(j)] =
            counted > 0 ? corr_sum / counted : 0.0;
    }

    for (int e = 0; e < 2; ++e) {
        std::vector<double> terminal(static_cast<std::size_t>(np));
        for (int p = 0; p < np; ++p) {
            terminal[static_cast<std::size_t>(p)] = set.at(p, nt - 1, 0, e);
        }
        std::sort(terminal.begin(), terminal.end());
        for (double q : {0.05, 0.25, 0.5, 0.75, 0.95}) {
            const auto idx = static_cast<std::size_t>(q * (np - 1));
            diag.terminal_quantiles[static_cast<std::size_t>(e)].push_back(terminal[idx]);
        }
    }

    // stationarity of cointegrating combinations when motions were recorded;
    // the rank cut at 2% of the top singular value separates the strongly
    // mean-reverting combinations from the near-random-walk ones
    if (!set.motions.empty()) {
        Eigen::JacobiSVD<Matrix> svd(params.pi, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const double tol = 2e-2 * svd.singularValues().maxCoeff();
        int rank = 0;
        for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
            if (svd.singularValues()[i] > tol) ++rank;
        }
        if (rank > 0 && rank < params.dim()) {
            const Matrix beta = svd.matrixV().leftCols(rank);
            const int last = static_cast<int>(set.times.size()) - 1;
            const auto npaths = static_cast<double>(set.motions.size());
            Vector mean_comp = Vector::Zero(params.dim());
            Vector mean_rel = Vector::Zero(rank);
            for (const auto& m : set.motions) {
                mean_comp += m.col(last);
                mean_rel += beta.transpose() * m.col(last);
            }
            mean_comp /= npaths;
            mean_rel /= npaths;
            Vector comp_var = Vector::Zero(params.dim());
            Vector rel_var = Vector::Zero(rank);
            for (const auto& m : set.motions) {
                comp_var.array() += (m.col(last) - mean_comp).array().square();
                rel_var.array() +=
                    (beta.transpose() * m.col(last) - mean_rel).array().square();
            }
            comp_var /= npaths;
            rel_var /= npaths;
            for (int r = 0; r < rank; ++r) {
                diag.relation_variance_ratio.push_back(rel_var[r] / comp_var.maxCoeff());
            }
        }
    }
    return diag;
}

std::string ScenarioDiagnostics::to_json() const {
    nlohmann::ordered_json j;
    j["times"] = stats.times;
    j["maturities"] = stats.maturities;
    j["euler_negative_steps"] = stats.euler_negative_steps;
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    const std::size_t nm = stats.maturities.size();
    double max_dev = 0.0, max_z = 0.0;
    for (std::size_t i = 0; i < stats.times.size(); ++i) {
        for (std::size_t j2 = 0; j2 < nm; ++j2) {
            for (int e = 0; e < 2; ++e) {
                const auto& c = stats.ratio[(i * nm + j2) * 2 + static_cast<std::size_t>(e)];
                nlohmann::ordered_json cell;
                cell["t"] = stats.times[i];
                cell["maturity_slot"] = stats.maturities[j2];
                cell["energy"] = e == 0 ? "gas" : "crude";
                cell["mean_ratio"] = c.mean;
                cell["sd"] = c.sd;
                cell["mc_se"] = c.se;
                cells.push_back(std::move(cell));
                max_dev = std::max(max_dev, std::abs(c.mean - 1.0));
                if (c.se > 0) max_z = std::max(max_z, std::abs(c.mean - 1.0) / c.se);
            }
        }
    }
    j["cells"] = std::move(cells);
    j["max_abs_deviation"] = max_dev;
    j["max_abs_z"] = max_z;
    j["comovement"] = comovement;
    j["relation_variance_ratio"] = relation_variance_ratio;
    j["terminal_quantiles_gas"] = terminal_quantiles[0];
    j["terminal_quantiles_crude"] = terminal_quantiles[1];
    return j.dump(2);
}

}  // namespace cocurve
