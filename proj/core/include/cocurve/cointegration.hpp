#pragma once

#include <string>
#include <vector>

#include "cocurve/linalg.hpp"

namespace cocurve {

struct UnitRootResult {
    std::string test;     // "adf" or "engle-granger"
    double statistic = 0.0;
    int lag_order = 0;
    int n_obs = 0;        // effective regression sample
    double crit_1 = 0.0;  // 1% / 5% / 10% critical values
    double crit_5 = 0.0;
    double crit_10 = 0.0;
    bool reject_at_5 = false;  // reject the unit-root / no-cointegration null
};

// Augmented Dickey-Fuller test with intercept; lag order chosen by BIC up to
// max_lag (negative: Schwert's rule 12 (T/100)^{1/4}). Critical values from
// the MacKinnon (2010) response surfaces.
UnitRootResult adf_test(const std::vector<double>& series, int max_lag = -1);

struct CointegrationTest {
    UnitRootResult residual_test;
    Vector relation;  // (1, -b_1, ..., -b_k): coefficients of y - b'x
    double intercept = 0.0;
};

// Residual-based two-step cointegration test: OLS of y on the regressors
// with intercept, then an ADF on the residuals without deterministic terms,
// against the MacKinnon no-cointegration critical values.
CointegrationTest engle_granger_test(const std::vector<double>& y,
                                     const std::vector<std::vector<double>>& x,
                                     int max_lag = -1);

enum class PiRankCase { zero, partial, full };

inline const char* to_string(PiRankCase c) {
    switch (c) {
        case PiRankCase::zero: return "zero";
        case PiRankCase::partial: return "partial";
        case PiRankCase::full: return "full";
    }
    return "?";
}

struct PiRankResult {
    int rank = 0;
    PiRankCase label = PiRankCase::zero;
    Matrix alpha;  // n x r, adjustment directions (U_r S_r of the SVD)
    Matrix beta;   // n x r, cointegrating vectors (V_r)
    Vector singular_values;
};

// Numerical rank of the drift matrix by SVD with threshold tol * s_max and
// one fixed alpha/beta factorization among the many possible.
PiRankResult classify_pi_rank(const Matrix& pi, double tol = 1e-10);

}  // namespace cocurve
