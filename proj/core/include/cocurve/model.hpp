#pragma once

#include <string>

#include "cocurve/linalg.hpp"

namespace cocurve {

enum class Energy { gas, crude };

inline const char* to_string(Energy e) { return e == Energy::gas ? "gas" : "crude"; }

enum class Measure { historical_p, risk_neutral_q };

// Level/slope/curvature volatility factor counts and time constants per energy.
struct VolParams {
    int n_gas = 3;
    int n_crude = 3;
    double tau1_gas = 1.0;
    double tau2_gas = 0.1;
    double tau1_crude = 1.0;
    double tau2_crude = 0.1;

    int n(Energy e) const { return e == Energy::gas ? n_gas : n_crude; }
    int total() const { return n_gas + n_crude; }
    double tau1(Energy e) const { return e == Energy::gas ? tau1_gas : tau1_crude; }
    double tau2(Energy e) const { return e == Energy::gas ? tau2_gas : tau2_crude; }
    void validate() const;
};

// Piecewise-constant vector function on [knots.front(), knots.back());
// zero outside. Used for the centering drift derivative.
class PiecewiseConstant {
public:
    PiecewiseConstant() = default;
    PiecewiseConstant(std::vector<double> knots, Matrix values);  // values: dim x pieces

    bool empty() const { return values_.cols() == 0; }
    Eigen::Index dim() const { return values_.rows(); }
    std::size_t pieces() const { return static_cast<std::size_t>(values_.cols()); }
    const std::vector<double>& knots() const { return knots_; }
    const Matrix& values() const { return values_; }

    Vector at(double t) const;
    // definite integral from knots.front() (or 0 for an empty function) to t
    Vector integral(double t) const;

private:
    std::vector<double> knots_;
    Matrix values_;
};

// Full model state: volatility shape, long-term drift matrix, noise factor
// and the centering drift derivative. X(0) = 0 by convention.
struct ModelParams {
    VolParams vol;
    Matrix pi;             // N x N, historical-measure drift
    Matrix sigma;          // N x N lower-triangular noise factor
    Matrix sigma_sigma_t;  // N x N, sigma * sigma^T
    PiecewiseConstant theta_prime;  // empty means identically zero

    int dim() const { return vol.total(); }
    void validate() const;      // full invariants, non-degenerate sigma included
    void check_shapes() const;  // shapes and finiteness only (zero sigma allowed)

    Vector theta(double t) const;       // integral of theta'
    Vector eta(double t) const;         // theta'(t) - pi * theta(t)

    std::string to_json() const;
    static ModelParams from_json(const std::string& text);
};

// Normalized volatility basis (1, exp decay, humped exp), truncated to the
// energy's factor count.
Vector vol_basis(Energy e, double tenor, const VolParams& vol);

// Gas basis padded right with crude zeros; crude basis padded left.
Vector stacked_vol(Energy e, double tenor, const VolParams& vol);

// Componentwise integral of stacked_vol(e, T - s) ds over [a, b], closed form.
Vector stacked_vol_integral(Energy e, double maturity, double a, double b,
                            const VolParams& vol);

// Solves sigma * lambda = pi * X + eta(t) by forward substitution.
Vector market_price_of_risk(const Vector& x, double t, const ModelParams& params);

struct ForwardCurve;  // market_data.hpp

// Exponential-form forward price at t = grid.back() given the increments of
// the centered motion (theta excluded; its effect enters via theta_prime).
// increments is dim x grid.steps(). The quadratic-variation term uses
// left-point evaluation on the same grid as the stochastic sum.
double forward_price(Energy e, double t, double maturity, const ForwardCurve& f0,
                     const TimeGrid& grid, const Matrix& increments,
                     const ModelParams& params);

// Built-in reference parameter set: three factors per energy, estimated from
// 2003-2007 UK gas and crude futures quotes. The raw drift estimate is mildly
// explosive; by default the crude-block mean reversion is damped so long
// simulation horizons stay well behaved.
ModelParams reference_params(bool stabilized_drift = true);

}  // namespace cocurve
