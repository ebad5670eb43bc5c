#include "cocurve/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

namespace cocurve {
namespace {

Matrix basis_at(const std::vector<double>& tenors, double tau1, double tau2,
                int n_factors) {
    Matrix s(static_cast<Eigen::Index>(tenors.size()), n_factors);
    for (std::size_t b = 0; b < tenors.size(); ++b) {
        const auto i = static_cast<Eigen::Index>(b);
        s(i, 0) = 1.0;
        if (n_factors > 1) s(i, 1) = std::exp(-tenors[b] / tau1);
        if (n_factors > 2) s(i, 2) = tenors[b] / tau2 * std::exp(-tenors[b] / tau2);
    }
    return s;
}

// residual of projecting each date's return cross-section on the basis
Vector reconstruction_residual(const std::vector<ReturnPanel::DateGroup>& groups,
                               double tau1, double tau2, int n_factors) {
    std::size_t total = 0;
    for (const auto& g : groups) total += g.values.size();
    Vector out(static_cast<Eigen::Index>(total));
    Eigen::Index at = 0;
    for (const auto& g : groups) {
        const Matrix s = basis_at(g.tenors, tau1, tau2, n_factors);
        Eigen::ColPivHouseholderQR<Matrix> qr(s);
        qr.setThreshold(1e-10);
        const Vector y = Eigen::Map<const Vector>(g.values.data(),
                                                  static_cast<Eigen::Index>(g.values.size()));
        out.segment(at, y.size()) = y - s * qr.solve(y);
        at += y.size();
    }
    return out;
}

}  // namespace

TauFit fit_tau(const std::vector<ReturnPanel::DateGroup>& groups, int n_factors,
               Energy energy, const CalibConfig& config) {
    if (groups.size() < 2) {
        throw InsufficientDataError("fit_tau: need at least two dates");
    }
    for (const auto& g : groups) {
        if (static_cast<int>(g.tenors.size()) < std::max(3, n_factors)) {
            throw InsufficientDataError("fit_tau: need at least three tenor buckets");
        }
    }

    // optimize in log space to keep the time constants positive
    auto residual = [&](const Vector& log_tau) {
        return reconstruction_residual(groups, std::exp(log_tau[0]), std::exp(log_tau[1]),
                                       n_factors);
    };

    TauFit best;
    bool have = false;
    std::string failures;
    for (double s1 : config.tau1_starts) {
        for (double s2 : config.tau2_starts) {
            Vector p0(2);
            p0 << std::log(s1), std::log(s2);
            NlsResult fit;
            try {
                fit = nls(residual, p0, config.nls);
            } catch (const NlsConvergenceError& e) {
                failures += " (start " + std::to_string(s1) + "/" + std::to_string(s2) +
                            ": " + e.what() + ")";
                fit = e.best;
                if (fit.params.size() != 2) continue;
            }
            if (!have || fit.rss < best.rss) {
                have = true;
                best.tau1 = std::exp(fit.params[0]);
                best.tau2 = std::exp(fit.params[1]);
                best.rss = fit.rss;
                best.best_start_tau1 = s1;
                best.best_start_tau2 = s2;
                best.iterations = fit.iterations;
            }
        }
    }
    if (!have) {
        throw NlsConvergenceError("fit_tau(" + std::string(to_string(energy)) +
                                      "): every start failed" + failures,
                                  NlsResult{});
    }
    return best;
}

MotionReconstruction reconstruct_motions(const std::vector<ReturnPanel::DateGroup>& groups,
                                         Energy energy, const VolParams& vol) {
    const int n = vol.n(energy);
    MotionReconstruction out;
    const auto dates = static_cast<Eigen::Index>(groups.size());
    if (dates == 0) {
        throw InsufficientDataError("reconstruct_motions: no usable dates");
    }
    out.increments.resize(n, dates);
    out.cumulative = Matrix::Zero(n, dates + 1);
    for (Eigen::Index d = 0; d < dates; ++d) {
        const auto& g = groups[static_cast<std::size_t>(d)];
        if (static_cast<int>(g.tenors.size()) < n) {
            throw InsufficientDataError("reconstruct_motions: fewer observations than "
                                        "factors on " + g.date.iso());
        }
        out.dates.push_back(g.date);
        out.dts.push_back(g.dt);
        const Matrix s = basis_at(g.tenors, vol.tau1(energy), vol.tau2(energy), n);
        Eigen::ColPivHouseholderQR<Matrix> qr(s);
        qr.setThreshold(1e-10);
        const Vector y = Eigen::Map<const Vector>(g.values.data(),
                                                  static_cast<Eigen::Index>(g.values.size()));
        out.increments.col(d) = qr.solve(y);
        out.cumulative.col(d + 1) = out.cumulative.col(d) + out.increments.col(d);
    }
    return out;
}

VecmFit fit_vecm(const Matrix& cumulative, const Matrix& increments,
                 const std::vector<double>& dts) {
    const auto n = increments.rows();
    const auto m = increments.cols();
    if (m < 10 * n) {
        throw InsufficientDataError("fit_vecm: need at least 10 N observations");
    }
    if (cumulative.cols() != m + 1 || static_cast<Eigen::Index>(dts.size()) != m) {
        throw DimensionError("fit_vecm: inconsistent motion shapes");
    }

    // regressors: motion level at the start of each interval
    const Matrix x_lag = cumulative.leftCols(m).transpose();  // m x n
    VecmFit fit;
    fit.pi = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Vector y(m);
        for (Eigen::Index k = 0; k < m; ++k) {
            y[k] = increments(i, k) / dts[static_cast<std::size_t>(k)];
        }
        const BicSelection sel = bic_subset_select(x_lag, y);
        for (std::size_t j = 0; j < sel.support.size(); ++j) {
            fit.pi(i, sel.support[j]) = sel.coef[static_cast<Eigen::Index>(j)];
        }
        fit.row_supports.push_back(sel.support);
        fit.row_bic.push_back(sel.bic);
    }
    // residual covariance, rescaled per observation by its elapsed time
    fit.sigma_sigma_t = Matrix::Zero(n, n);
    for (Eigen::Index k = 0; k < m; ++k) {
        const double dt = dts[static_cast<std::size_t>(k)];
        const Vector e = increments.col(k) / dt - fit.pi * cumulative.col(k);
        fit.sigma_sigma_t += dt * (e * e.transpose());
    }
    fit.sigma_sigma_t /= static_cast<double>(m);
    fit.sigma_sigma_t = 0.5 * (fit.sigma_sigma_t + fit.sigma_sigma_t.transpose()).eval();
    return fit;
}

namespace {

EnergyCalibration calibrate_energy(const QuotePanel& panel, int n_factors,
                                   const CalibConfig& config) {
    EnergyCalibration cal;
    cal.energy = panel.energy;
    const ReturnPanel returns = compute_returns(panel);
    for (const auto& w : returns.warnings) cal.warnings.push_back(w);
    double max_abs_return = 0.0;
    std::size_t outliers = 0;
    for (const auto& o : returns.observations) {
        max_abs_return = std::max(max_abs_return, std::abs(o.value));
        if (std::abs(o.value) >= config.outlier_threshold) ++outliers;
    }
    if (outliers > 0) {
        cal.warnings.push_back(std::to_string(outliers) + " returns at or above the " +
                               std::to_string(config.outlier_threshold) +
                               " outlier threshold");
    }
    if (max_abs_return < 1e-300) {
        throw DegenerateDataError(std::string(to_string(panel.energy)) +
                                  ": prices never move, nothing to estimate");
    }
    const auto cs = returns.cross_section();
    if (cs.dates.size() < 2) {
        throw InsufficientDataError(std::string(to_string(panel.energy)) +
                                    ": no dates with a full bucket cross-section");
    }
    const PcaResult p = pca(cs.returns);
    cal.eigenvalues = p.eigenvalues;
    cal.explained_share = p.eigenvalues / p.eigenvalues.sum();
    cal.loadings = p.loadings;

    // partial dates still contribute to the fit and the reconstruction
    const auto groups = returns.by_date(std::max(3, n_factors));
    cal.dropped_dates = 0;
    cal.tau = fit_tau(groups, n_factors, panel.energy, config);

    VolParams vol;
    vol.n_gas = vol.n_crude = n_factors;
    vol.tau1_gas = vol.tau1_crude = cal.tau.tau1;
    vol.tau2_gas = vol.tau2_crude = cal.tau.tau2;
    const auto rec = reconstruct_motions(groups, panel.energy, vol);
    cal.dates = rec.dates;
    cal.increments = rec.increments;
    cal.dts = rec.dts;
    return cal;
}

}  // namespace

std::pair<ModelParams, CalibrationReport> calibrate(const QuotePanel& gas_panel,
                                                    const QuotePanel& crude_panel,
                                                    const CalibConfig& config) {
    if (gas_panel.energy != Energy::gas || crude_panel.energy != Energy::crude) {
        throw DataError("calibrate: panels must be tagged gas and crude");
    }
    CalibrationReport report;
    try {
        report.gas = calibrate_energy(gas_panel, config.n_gas, config);
        report.crude = calibrate_energy(crude_panel, config.n_crude, config);
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("calibration stage 1-3: ") + e.what());
    }

    // align the two energies on common observation dates
    std::vector<Eigen::Index> gi, ci;
    {
        std::map<Date, Eigen::Index> gas_pos, crude_pos;
        for (std::size_t k = 0; k < report.gas.dates.size(); ++k) {
            gas_pos[report.gas.dates[k]] = static_cast<Eigen::Index>(k);
        }
        for (std::size_t k = 0; k < report.crude.dates.size(); ++k) {
            crude_pos[report.crude.dates[k]] = static_cast<Eigen::Index>(k);
        }
        for (const auto& [date, pos] : gas_pos) {
            auto it = crude_pos.find(date);
            if (it != crude_pos.end()) {
                report.common_dates.push_back(date);
                gi.push_back(pos);
                ci.push_back(it->second);
            }
        }
    }
    const auto m = static_cast<Eigen::Index>(report.common_dates.size());
    if (m < 10 * (config.n_gas + config.n_crude)) {
        throw InsufficientDataError("calibrate: too few common observation dates");
    }
    const int n = config.n_gas + config.n_crude;
    Matrix increments(n, m);
    std::vector<double> dts(static_cast<std::size_t>(m));
    for (Eigen::Index k = 0; k < m; ++k) {
        increments.col(k).head(config.n_gas) = report.gas.increments.col(gi[k]);
        increments.col(k).tail(config.n_crude) = report.crude.increments.col(ci[k]);
        dts[static_cast<std::size_t>(k)] = report.gas.dts[static_cast<std::size_t>(gi[k])];
    }
    report.motion = Matrix::Zero(n, m + 1);
    for (Eigen::Index k = 0; k < m; ++k) {
        report.motion.col(k + 1) = report.motion.col(k) + increments.col(k);
    }

    try {
        report.vecm = fit_vecm(report.motion, increments, dts);
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("calibration stage 4: ") + e.what());
    }

    ModelParams params;
    params.vol.n_gas = config.n_gas;
    params.vol.n_crude = config.n_crude;
    params.vol.tau1_gas = report.gas.tau.tau1;
    params.vol.tau2_gas = report.gas.tau.tau2;
    params.vol.tau1_crude = report.crude.tau.tau1;
    params.vol.tau2_crude = report.crude.tau.tau2;
    params.pi = report.vecm.pi;
    params.sigma_sigma_t = report.vecm.sigma_sigma_t;
    try {
        params.sigma = chol_psd(params.sigma_sigma_t, &report.sigma_repair);
        params.validate();
    } catch (const Error& e) {
        throw Error(e.kind(),
                    std::string("calibration stage 4 covariance factor: ") + e.what());
    }
    return {std::move(params), std::move(report)};
}

namespace {

nlohmann::ordered_json matrix_json(const Matrix& m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::ordered_json energy_json(const EnergyCalibration& cal) {
    nlohmann::ordered_json j;
    j["energy"] = to_string(cal.energy);
    j["eigenvalues"] = std::vector<double>(cal.eigenvalues.data(),
                                           cal.eigenvalues.data() + cal.eigenvalues.size());
    j["explained_share"] =
        std::vector<double>(cal.explained_share.data(),
                            cal.explained_share.data() + cal.explained_share.size());
    j["tau1"] = cal.tau.tau1;
    j["tau2"] = cal.tau.tau2;
    j["tau_rss"] = cal.tau.rss;
    j["tau_best_start"] = {cal.tau.best_start_tau1, cal.tau.best_start_tau2};
    j["tau_iterations"] = cal.tau.iterations;
    j["observation_dates"] = cal.dates.size();
    j["dropped_dates"] = cal.dropped_dates;
    j["warnings"] = cal.warnings;
    return j;
}

}  // namespace

std::string CalibrationReport::to_json() const {
    nlohmann::ordered_json j;
    j["gas"] = energy_json(gas);
    j["crude"] = energy_json(crude);
    j["common_dates"] = common_dates.size();
    if (!common_dates.empty()) {
        j["first_date"] = common_dates.front().iso();
        j["last_date"] = common_dates.back().iso();
    }
    j["pi"] = matrix_json(vecm.pi);
    {
        // a positive value means the estimated drift is explosive over long
        // horizons, which long simulations and moment fits should know about
        const Eigen::VectorXcd eig = vecm.pi.eigenvalues();
        double max_re = 0.0;
        for (Eigen::Index i = 0; i < eig.size(); ++i) {
            max_re = i == 0 ? eig[i].real() : std::max(max_re, eig[i].real());
        }
        j["pi_max_real_eigenvalue"] = max_re;
    }
    j["sigma_sigma_t"] = matrix_json(vecm.sigma_sigma_t);
    j["pi_row_supports"] = vecm.row_supports;
    j["pi_row_bic"] = vecm.row_bic;
    j["sigma_repair"] = sigma_repair;
    return j.dump(2);
}

}  // namespace cocurve
