#include "cocurve/cointegration.hpp"

#include <cmath>

#include "cocurve/numerics.hpp"

namespace cocurve {
namespace {

// MacKinnon (2010), "Critical Values for Cointegration Tests", Queen's
// Economics Department working paper 1227, Table 2, variant "c" (constant,
// no trend). CV(T) = b_inf + b1/T + b2/T^2 + b3/T^3; row N is the number of
// I(1) variables in the relation, N = 1 being the plain unit-root test.
struct ResponseSurface {
    double b_inf, b1, b2, b3;
    double at(int t) const {
        const double x = 1.0 / t;
        return b_inf + x * (b1 + x * (b2 + x * b3));
    }
};

constexpr ResponseSurface kMacKinnonC[3][3] = {
    // N = 1: 1%, 5%, 10%
    {{-3.43035, -6.5393, -16.786, -79.433},
     {-2.86154, -2.8903, -4.234, -40.040},
     {-2.56677, -1.5384, -2.809, 0.0}},
    // N = 2
    {{-3.89644, -10.9519, -22.527, 0.0},
     {-3.33613, -6.1101, -6.823, 0.0},
     {-3.04445, -4.2412, -2.720, 0.0}},
    // N = 3
    {{-4.29374, -14.4354, -33.195, 47.433},
     {-3.74066, -8.5632, -10.852, 27.982},
     {-3.45218, -6.2143, -3.718, 0.0}},
};

struct AdfRegression {
    double statistic = 0.0;
    double rss = 0.0;
    int n_obs = 0;
    int n_params = 0;
};

// Dickey-Fuller regression of dy_t on [const?] y_{t-1} and p lagged
// differences over a common sample starting at start_offset.
AdfRegression adf_regression(const std::vector<double>& y, int lags, int start, bool intercept) {
    const int n = static_cast<int>(y.size());
    const int n_obs = n - 1 - start;
    const int n_params = lags + 1 + (intercept ? 1 : 0);
    if (n_obs <= n_params + 1) {
        throw InsufficientDataError("adf: series too short for the requested lags");
    }
    Matrix x(n_obs, n_params);
    Vector dy(n_obs);
    for (int i = 0; i < n_obs; ++i) {
        const int t = start + 1 + i;  // index of the dependent difference
        dy[i] = y[static_cast<std::size_t>(t)] - y[static_cast<std::size_t>(t - 1)];
        int col = 0;
        if (intercept) x(i, col++) = 1.0;
        x(i, col++) = y[static_cast<std::size_t>(t - 1)];
        for (int l = 1; l <= lags; ++l) {
            x(i, col++) = y[static_cast<std::size_t>(t - l)] -
                          y[static_cast<std::size_t>(t - l - 1)];
        }
    }
    const OlsResult fit = ols(x, dy);
    const int gamma_idx = intercept ? 1 : 0;
    const double sigma2 = fit.rss / (n_obs - n_params);
    // standard error of the level coefficient via one solve
    const Matrix xtx = x.transpose() * x;
    Vector unit = Vector::Zero(n_params);
    unit[gamma_idx] = 1.0;
    const double inv_diag = xtx.ldlt().solve(unit)[gamma_idx];
    AdfRegression out;
    out.statistic = fit.coef[gamma_idx] / std::sqrt(sigma2 * inv_diag);
    out.rss = fit.rss;
    out.n_obs = n_obs;
    out.n_params = n_params;
    return out;
}

UnitRootResult adf_impl(const std::vector<double>& series, int max_lag, bool intercept,
                        int n_variables, const std::string& name) {
    const int n = static_cast<int>(series.size());
    if (max_lag < 0) {
        max_lag = static_cast<int>(std::floor(12.0 * std::pow(n / 100.0, 0.25)));
    }
    if (n <= 10 * (max_lag + 2)) {
        max_lag = std::max(0, n / 10 - 2);
    }
    if (n <= 10 * 2) {
        throw InsufficientDataError(name + ": series too short");
    }
    double mean = 0.0, var = 0.0;
    for (double v : series) mean += v;
    mean /= n;
    for (double v : series) var += (v - mean) * (v - mean);
    if (var / n < 1e-300) {
        throw DegenerateDataError(name + ": series has zero variance");
    }

    // lag order by BIC on the common sample
    int best_lag = 0;
    double best_bic = 0.0;
    for (int p = 0; p <= max_lag; ++p) {
        const AdfRegression reg = adf_regression(series, p, max_lag, intercept);
        const double bic = reg.n_obs * std::log(reg.rss / reg.n_obs) +
                           reg.n_params * std::log(static_cast<double>(reg.n_obs));
        if (p == 0 || bic < best_bic) {
            best_bic = bic;
            best_lag = p;
        }
    }
    const AdfRegression reg = adf_regression(series, best_lag, best_lag, intercept);

    if (n_variables < 1 || n_variables > 3) {
        throw ParameterError(name + ": critical values embedded for up to 3 variables");
    }
    const auto& rows = kMacKinnonC[n_variables - 1];
    UnitRootResult out;
    out.test = name;
    out.statistic = reg.statistic;
    out.lag_order = best_lag;
    out.n_obs = reg.n_obs;
    out.crit_1 = rows[0].at(reg.n_obs);
    out.crit_5 = rows[1].at(reg.n_obs);
    out.crit_10 = rows[2].at(reg.n_obs);
    out.reject_at_5 = reg.statistic < out.crit_5;
    return out;
}

}  // namespace

UnitRootResult adf_test(const std::vector<double>& series, int max_lag) {
    return adf_impl(series, max_lag, true, 1, "adf");
}

CointegrationTest engle_granger_test(const std::vector<double>& y,
                                     const std::vector<std::vector<double>>& x,
                                     int max_lag) {
    if (x.empty()) throw ParameterError("engle_granger_test: need regressors");
    const std::size_t n = y.size();
    if (n <= 50) throw InsufficientDataError("engle_granger_test: need more than 50 points");
    for (const auto& xi : x) {
        if (xi.size() != n) {
            throw DimensionError("engle_granger_test: series lengths differ");
        }
    }

    Matrix design(n, x.size() + 1);
    Vector target(n);
    for (std::size_t i = 0; i < n; ++i) {
        design(static_cast<Eigen::Index>(i), 0) = 1.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j) + 1) = x[j][i];
        }
        target[static_cast<Eigen::Index>(i)] = y[i];
    }
    const OlsResult fit = ols(design, target);
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) resid[i] = fit.residuals[static_cast<Eigen::Index>(i)];

    CointegrationTest out;
    out.intercept = fit.coef[0];
    out.relation = Vector(x.size() + 1);
    out.relation[0] = 1.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        out.relation[static_cast<Eigen::Index>(j) + 1] = -fit.coef[static_cast<Eigen::Index>(j) + 1];
    }
    // residuals are regression residuals: no deterministic terms in the ADF
    out.residual_test =
        adf_impl(resid, max_lag, false, static_cast<int>(x.size()) + 1, "engle-granger");
    return out;
}

PiRankResult classify_pi_rank(const Matrix& pi, double tol) {
    if (pi.rows() != pi.cols()) {
        throw DimensionError("classify_pi_rank: matrix must be square");
    }
    PiRankResult out;
    Eigen::JacobiSVD<Matrix> svd(pi, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.singular_values = svd.singularValues();
    const double s_max = out.singular_values.size() > 0 ? out.singular_values[0] : 0.0;
    const auto n = pi.rows();
    for (Eigen::Index i = 0; i < out.singular_values.size(); ++i) {
        if (out.singular_values[i] > tol * s_max && out.singular_values[i] > 0.0) {
            ++out.rank;
        }
    }
    if (out.rank == 0) {
        out.label = PiRankCase::zero;
    } else if (out.rank == n) {
        out.label = PiRankCase::full;
    } else {
        out.label = PiRankCase::partial;
        out.alpha = svd.matrixU().leftCols(out.rank) *
                    out.singular_values.head(out.rank).asDiagonal();
        out.beta = svd.matrixV().leftCols(out.rank);
    }
    return out;
}

}  // namespace cocurve
