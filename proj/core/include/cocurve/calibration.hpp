#pragma once

#include <string>
#include <vector>

#include "cocurve/market_data.hpp"
#include "cocurve/model.hpp"
#include "cocurve/numerics.hpp"

namespace cocurve {

struct CalibConfig {
    int n_gas = 3;
    int n_crude = 3;
    std::vector<double> tau1_starts = {0.1, 0.5, 1.0, 3.0};
    std::vector<double> tau2_starts = {0.05, 0.15};
    NlsOptions nls;
    double outlier_threshold = 1.0;  // |return| at or above this is reported
};

struct TauFit {
    double tau1 = 0.0;
    double tau2 = 0.0;
    double rss = 0.0;            // reconstruction residual at the optimum
    double best_start_tau1 = 0.0;
    double best_start_tau2 = 0.0;
    int iterations = 0;
};

struct EnergyCalibration {
    Energy energy = Energy::gas;
    Vector eigenvalues;        // PCA spectrum of the return panel
    Vector explained_share;    // eigenvalues / sum
    Matrix loadings;
    TauFit tau;
    std::vector<Date> dates;   // dates with a full bucket cross-section
    Matrix increments;         // n_factors x dates, reconstructed dX
    std::vector<double> dts;
    std::size_t dropped_dates = 0;
    std::vector<std::string> warnings;
};

struct VecmFit {
    Matrix pi;
    Matrix sigma_sigma_t;
    std::vector<std::vector<int>> row_supports;
    std::vector<double> row_bic;
};

struct CalibrationReport {
    EnergyCalibration gas;
    EnergyCalibration crude;
    std::vector<Date> common_dates;
    Matrix motion;  // N x (common dates + 1), cumulative, starts at zero
    VecmFit vecm;
    double sigma_repair = 0.0;

    std::string to_json() const;
};

// Step 2: time constants by nonlinear least squares on the step-3
// reconstruction residual (variable projection over the per-date motion
// increments). Multi-start over the configured grid; best RSS wins.
TauFit fit_tau(const std::vector<ReturnPanel::DateGroup>& groups, int n_factors,
               Energy energy, const CalibConfig& config);

// Step 3: per-date least squares of the return cross-section on the
// volatility basis evaluated at that date's tenors. Dates with fewer
// observations than factors are skipped before this point.
struct MotionReconstruction {
    std::vector<Date> dates;
    Matrix increments;  // n_factors x dates
    Matrix cumulative;  // n_factors x (dates + 1)
    std::vector<double> dts;
    std::size_t skipped_dates = 0;
};

MotionReconstruction reconstruct_motions(const std::vector<ReturnPanel::DateGroup>& groups,
                                         Energy energy, const VolParams& vol);

// Step 4: row-by-row regression of dX/dt on the lagged motion level with
// exhaustive BIC subset selection; entries off the support are exactly zero.
// The residual covariance is rescaled per observation by its elapsed time.
VecmFit fit_vecm(const Matrix& cumulative, const Matrix& increments,
                 const std::vector<double>& dts);

// Steps 1-4 end to end; the centering drift (step 5) is fitted separately.
std::pair<ModelParams, CalibrationReport> calibrate(const QuotePanel& gas_panel,
                                                    const QuotePanel& crude_panel,
                                                    const CalibConfig& config = {});

}  // namespace cocurve
