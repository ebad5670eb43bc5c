#pragma once

#include <functional>
#include <vector>

#include "cocurve/linalg.hpp"

namespace cocurve {

// Matrix exponential, scaling-and-squaring with a degree-13 Pade approximant.
Matrix expm(const Matrix& a);

// Composite Simpson rule with n panels; exact for cubics on each panel.
double quad_fixed(const std::function<double(double)>& f, double a, double b, int panels);

struct PcaResult {
    Vector eigenvalues;  // descending
    Matrix loadings;     // orthonormal columns
    Matrix scores;       // centered data * loadings
    Vector mean;         // column means removed before the decomposition
};

// Eigen-decomposition of the sample covariance of the columns.
PcaResult pca(const Matrix& data);

struct OlsResult {
    Vector coef;
    Vector residuals;
    double rss = 0.0;
};

// Least squares via column-pivoted QR; throws SingularError on rank-deficient designs.
OlsResult ols(const Matrix& x, const Vector& y);

struct NlsOptions {
    int max_iterations = 500;
    double step_tolerance = 1e-10;      // relative step size
    double rss_tolerance = 1e-12;       // relative RSS change
    double fd_relative_step = 1e-7;     // forward-difference Jacobian step
};

struct NlsResult {
    Vector params;
    double rss = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Carries the best iterate seen before giving up.
struct NlsConvergenceError : Error {
    NlsConvergenceError(const std::string& msg, NlsResult best_so_far)
        : Error(ErrorKind::numeric, msg), best(std::move(best_so_far)) {}
    NlsResult best;
};

// Levenberg-Marquardt on a generic residual function.
NlsResult nls(const std::function<Vector(const Vector&)>& residual, const Vector& params0,
              const NlsOptions& opts = {});

struct BicSelection {
    std::vector<int> support;  // sorted column indices, possibly empty
    Vector coef;               // one per support column
    double bic = 0.0;
};

// Exhaustive best-subset regression under BIC = n ln(RSS/n) + k ln(n).
// Ties break toward fewer columns, then lexicographic support.
BicSelection bic_subset_select(const Matrix& x, const Vector& y);

// Lower-triangular factor of a symmetric PSD matrix. Eigenvalues in
// [-1e-8, 0) are clipped to zero and the repaired matrix is factored;
// anything below -1e-8 throws NotPsdError. The Frobenius norm of the
// repair is written to *repair_magnitude when given.
Matrix chol_psd(const Matrix& s, double* repair_magnitude = nullptr);

}  // namespace cocurve
