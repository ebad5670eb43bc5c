#include "cocurve/centering.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "cocurve/numerics.hpp"
#include "cocurve/parallel.hpp"

namespace cocurve {
namespace {

// Composite Simpson nodes/weights for n panels on [a, b]: 2n+1 nodes.
struct SimpsonRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    SimpsonRule(double a, double b, int panels) {
        const int m = 2 * panels;
        nodes.resize(static_cast<std::size_t>(m) + 1);
        weights.assign(static_cast<std::size_t>(m) + 1, 0.0);
        const double h = (b - a) / panels;
        for (int j = 0; j <= m; ++j) {
            nodes[static_cast<std::size_t>(j)] = a + 0.5 * h * j;
        }
        nodes.back() = b;
        for (int p = 0; p < panels; ++p) {
            weights[static_cast<std::size_t>(2 * p)] += h / 6.0;
            weights[static_cast<std::size_t>(2 * p + 1)] += 4.0 * h / 6.0;
            weights[static_cast<std::size_t>(2 * p + 2)] += h / 6.0;
        }
    }
};

// Inner integral of the closed-form exponent: the row vector
//   A(s) = int_s^t sigma^e(T-u) Pi e^{(u-s) Pi} du.
// The inner Simpson nodes are equispaced, so e^{(u_j - s) Pi} is a running
// power of one matrix exponential per outer node.
Vector inner_row(Energy e, double s, double t, double maturity, const ModelParams& params,
                 int inner_panels) {
    const int n = params.dim();
    Vector acc = Vector::Zero(n);
    if (!(t > s)) return acc;
    const int m = 2 * inner_panels;
    const double h = (t - s) / inner_panels;
    const Matrix step = expm(0.5 * h * params.pi);
    Matrix power = Matrix::Identity(n, n);
    for (int j = 0; j <= m; ++j) {
        const double u = (j == m) ? t : s + 0.5 * h * j;
        double w = (j == 0 || j == m) ? h / 6.0 : (j % 2 == 1 ? 4.0 * h / 6.0 : 2.0 * h / 6.0);
        acc.noalias() +=
            w * (power.transpose() * (params.pi.transpose() *
                                      stacked_vol(e, maturity - u, params.vol)));
        if (j < m) power *= step;
    }
    return acc;
}

void check_moment_args(double t, double maturity, const QuadConfig& quad) {
    if (t < 0.0 || t > maturity) {
        throw ParameterError("moment: need 0 <= t <= maturity");
    }
    if (quad.outer_panels < 1 || quad.inner_panels < 1) {
        throw ParameterError("moment: panel counts must be positive");
    }
}

}  // namespace

double closed_form_moment(Energy e, double t, double maturity, const ModelParams& params,
                          const QuadConfig& quad) {
    check_moment_args(t, maturity, quad);
    if (t == 0.0) return 1.0;
    const SimpsonRule outer(0.0, t, quad.outer_panels);
    double exponent = 0.0;
    for (std::size_t i = 0; i < outer.nodes.size(); ++i) {
        const double s = outer.nodes[i];
        const Vector a = inner_row(e, s, t, maturity, params, quad.inner_panels);
        const Vector a_sig = params.sigma.transpose() * a;
        const Vector sig_row = stacked_vol(e, maturity - s, params.vol);
        const double integrand =
            0.5 * a_sig.squaredNorm() + sig_row.dot(params.sigma_sigma_t * a);
        exponent += outer.weights[i] * integrand;
    }
    return std::exp(exponent);
}

double wiener_variance(Energy e, double t, double maturity, const ModelParams& params,
                       const QuadConfig& quad) {
    check_moment_args(t, maturity, quad);
    if (t == 0.0) return 0.0;
    const SimpsonRule outer(0.0, t, quad.outer_panels);
    double variance = 0.0;
    for (std::size_t i = 0; i < outer.nodes.size(); ++i) {
        const double s = outer.nodes[i];
        const Vector a = inner_row(e, s, t, maturity, params, quad.inner_panels);
        const Vector sig_row = stacked_vol(e, maturity - s, params.vol);
        const Vector g = params.sigma.transpose() * (a + sig_row);
        variance += outer.weights[i] * g.squaredNorm();
    }
    return variance;
}

namespace {

double theta_drift_exponent(Energy e, double t, double maturity, const ModelParams& params) {
    if (params.theta_prime.empty()) return 0.0;
    double acc = 0.0;
    const auto& knots = params.theta_prime.knots();
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const double a = knots[k];
        if (a >= t) break;
        const double b = std::min(knots[k + 1], t);
        if (b <= a) continue;
        acc += stacked_vol_integral(e, maturity, a, b, params.vol)
                   .dot(params.theta_prime.values().col(static_cast<Eigen::Index>(k)));
    }
    return acc;
}

}  // namespace

double centered_expectation(Energy e, double t, double maturity, const ModelParams& params,
                            const QuadConfig& quad) {
    return std::exp(theta_drift_exponent(e, t, maturity, params)) *
           closed_form_moment(e, t, maturity, params, quad);
}

PiecewiseConstant fit_theta_prime(const ModelParams& params,
                                  const std::vector<ForwardCurve>& curves,
                                  const ThetaFitConfig& config) {
    params.validate();
    if (!(config.horizon > 0.0) || config.pieces < 1) {
        throw ParameterError("fit_theta_prime: bad horizon or piece count");
    }
    if (config.horizon / (2.0 * config.pieces) <= config.fd_step) {
        throw ParameterError(
            "fit_theta_prime: segments too short for the finite-difference step");
    }
    const int n = params.dim();

    auto fan_for = [&](Energy e) -> std::vector<double> {
        const auto& given =
            e == Energy::gas ? config.maturities_gas : config.maturities_crude;
        if (!given.empty()) return given;
        // default: maturities just past the horizon, spanning the quoted tenors
        double lo = 1.0 / 12.0, hi = 1.0;
        for (const auto& c : curves) {
            if (c.energy == e && !c.maturities.empty()) {
                lo = std::max(c.maturities.front(), 1.0 / 24.0);
                hi = std::max(c.maturities.back(), lo + 1.0 / 12.0);
            }
        }
        std::vector<double> fan(static_cast<std::size_t>(config.fan_size));
        for (int j = 0; j < config.fan_size; ++j) {
            const double w = config.fan_size == 1 ? 0.0 : double(j) / (config.fan_size - 1);
            fan[static_cast<std::size_t>(j)] = config.horizon + lo + w * (hi - lo);
        }
        return fan;
    };
    const std::vector<double> fan_gas = fan_for(Energy::gas);
    const std::vector<double> fan_crude = fan_for(Energy::crude);

    for (Energy e : {Energy::gas, Energy::crude}) {
        for (double maturity : e == Energy::gas ? fan_gas : fan_crude) {
            if (maturity <= config.horizon + config.fd_step) {
                throw ParameterError(
                    "fit_theta_prime: fan maturity inside the fit horizon");
            }
        }
    }

    std::vector<double> knots(static_cast<std::size_t>(config.pieces) + 1);
    for (int k = 0; k <= config.pieces; ++k) {
        knots[static_cast<std::size_t>(k)] = config.horizon * k / config.pieces;
    }

    Matrix values(n, config.pieces);
    const double h = config.fd_step;
    parallel_for(
        static_cast<std::size_t>(config.pieces),
        [&](std::size_t k) {
            const double tm = 0.5 * (knots[k] + knots[k + 1]);
            const std::size_t rows = fan_gas.size() + fan_crude.size();
            Matrix design(rows, n);
            Vector rhs(rows);
            std::size_t r = 0;
            for (Energy e : {Energy::gas, Energy::crude}) {
                for (double maturity : e == Energy::gas ? fan_gas : fan_crude) {
                    const double up =
                        std::log(closed_form_moment(e, tm + h, maturity, params, config.quad));
                    const double dn =
                        std::log(closed_form_moment(e, tm - h, maturity, params, config.quad));
                    design.row(static_cast<Eigen::Index>(r)) =
                        stacked_vol(e, maturity - tm, params.vol).transpose();
                    rhs[static_cast<Eigen::Index>(r)] = -(up - dn) / (2.0 * h);
                    ++r;
                }
            }
            Eigen::ColPivHouseholderQR<Matrix> qr(design);
            qr.setThreshold(1e-10);
            if (qr.rank() < n) {
                throw SingularError(
                    "fit_theta_prime: stacked system is rank deficient; widen the "
                    "maturity fan");
            }
            values.col(static_cast<Eigen::Index>(k)) = qr.solve(rhs);
        },
        config.threads);

    return PiecewiseConstant(std::move(knots), std::move(values));
}

MomentSurface compute_moment_surface(Energy e, const std::vector<double>& times,
                                     const std::vector<double>& maturities,
                                     const ModelParams& params, bool centered,
                                     const QuadConfig& quad, int threads) {
    MomentSurface surface;
    surface.energy = e;
    surface.times = times;
    surface.maturities = maturities;
    surface.values.resize(static_cast<Eigen::Index>(times.size()),
                          static_cast<Eigen::Index>(maturities.size()));
    parallel_for(
        times.size() * maturities.size(),
        [&](std::size_t idx) {
            const std::size_t i = idx / maturities.size();
            const std::size_t j = idx % maturities.size();
            const double t = times[i];
            const double maturity = maturities[j];
            double v;
            if (maturity < t) {
                v = std::numeric_limits<double>::quiet_NaN();
            } else if (centered) {
                v = centered_expectation(e, t, maturity, params, quad);
            } else {
                v = closed_form_moment(e, t, maturity, params, quad);
            }
            surface.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        },
        threads);
    return surface;
}

void write_surface_csv(const std::string& path, const MomentSurface& surface) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write surface csv: " + path);
    out << "t,T,value\n";
    out.precision(17);
    for (std::size_t i = 0; i < surface.times.size(); ++i) {
        for (std::size_t j = 0; j < surface.maturities.size(); ++j) {
            out << surface.times[i] << ',' << surface.maturities[j] << ','
                << surface.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))
                << '\n';
        }
    }
}

}  // namespace cocurve
