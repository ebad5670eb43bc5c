#pragma once

#include <vector>

#include "cocurve/market_data.hpp"
#include "cocurve/model.hpp"

namespace cocurve {

struct QuadConfig {
    int outer_panels = 64;
    int inner_panels = 64;
};

// E[F(t,T)/F(0,T)] under the historical measure with the centering drift
// switched off; double Simpson quadrature of the closed-form exponent.
double closed_form_moment(Energy e, double t, double maturity, const ModelParams& params,
                          const QuadConfig& quad = {});

// Variance of the Wiener integral driving log F(t,T); same quadrature scheme.
double wiener_variance(Energy e, double t, double maturity, const ModelParams& params,
                       const QuadConfig& quad = {});

// E[F(t,T)/F(0,T)] including the centering drift: the drift factors out of
// the theta-free moment as a deterministic exponential.
double centered_expectation(Energy e, double t, double maturity, const ModelParams& params,
                            const QuadConfig& quad = {});

struct ThetaFitConfig {
    double horizon = 1.0;                  // years covered by theta'
    int pieces = 12;                       // piecewise-constant segments
    std::vector<double> maturities_gas;    // fixed maturity fan per energy;
    std::vector<double> maturities_crude;  // empty -> derived from the curves
    int fan_size = 12;
    double fd_step = 1.0 / 365.0;          // central-difference step for d/dt ln m
    QuadConfig quad;
    int threads = 0;                       // 0 = hardware concurrency
};

// Least-squares fit of the piecewise-constant centering drift derivative:
// for each segment, stacks sigma^e(T_j - t) theta' = -d/dt ln m^e(t, T_j)
// over both energies' maturity fans at the segment midpoint.
PiecewiseConstant fit_theta_prime(const ModelParams& params,
                                  const std::vector<ForwardCurve>& curves,
                                  const ThetaFitConfig& config);

struct MomentSurface {
    Energy energy = Energy::gas;
    std::vector<double> times;
    std::vector<double> maturities;
    Matrix values;  // times x maturities
};

MomentSurface compute_moment_surface(Energy e, const std::vector<double>& times,
                                     const std::vector<double>& maturities,
                                     const ModelParams& params, bool centered,
                                     const QuadConfig& quad = {}, int threads = 0);

void write_surface_csv(const std::string& path, const MomentSurface& surface);

}  // namespace cocurve
