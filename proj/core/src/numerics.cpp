#include "cocurve/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cocurve {
namespace {

// Pade coefficients and norm thresholds from Higham, "The Scaling and Squaring
// Method for the Matrix Exponential Revisited", SIAM J. Matrix Anal. 2005.
constexpr double kPade13[] = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

Matrix pade13(const Matrix& a) {
    const auto n = a.rows();
    const Matrix ident = Matrix::Identity(n, n);
    const Matrix a2 = a * a;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;
    const Matrix u = a * (a6 * (kPade13[13] * a6 + kPade13[11] * a4 + kPade13[9] * a2) +
                          kPade13[7] * a6 + kPade13[5] * a4 + kPade13[3] * a2 +
                          kPade13[1] * ident);
    const Matrix v = a6 * (kPade13[12] * a6 + kPade13[10] * a4 + kPade13[8] * a2) +
                     kPade13[6] * a6 + kPade13[4] * a4 + kPade13[2] * a2 + kPade13[0] * ident;
    return (v - u).partialPivLu().solve(v + u);
}

}  // namespace

Matrix expm(const Matrix& a) {
    if (a.rows() != a.cols()) {
        throw DimensionError("expm: matrix must be square");
    }
    require_finite(a, "expm");
    if (a.rows() == 0) return a;

    const double norm = a.cwiseAbs().colwise().sum().maxCoeff();  // 1-norm
    constexpr double kTheta13 = 5.371920351148152;
    int squarings = 0;
    if (norm > kTheta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / kTheta13)));
    }
    Matrix r = pade13(a / std::ldexp(1.0, squarings));
    for (int i = 0; i < squarings; ++i) {
        r = r * r;
    }
    return r;
}

double quad_fixed(const std::function<double(double)>& f, double a, double b, int panels) {
    if (panels < 1) {
        throw ParameterError("quad_fixed: need at least one panel");
    }
    if (!(a <= b)) {
        throw ParameterError("quad_fixed: need a <= b");
    }
    if (a == b) return 0.0;
    const double h = (b - a) / panels;
    double sum = 0.0;
    double f_left = f(a);
    for (int k = 0; k < panels; ++k) {
        const double x0 = a + k * h;
        const double x1 = (k + 1 == panels) ? b : a + (k + 1) * h;
        const double f_mid = f(0.5 * (x0 + x1));
        const double f_right = f(x1);
        sum += (x1 - x0) / 6.0 * (f_left + 4.0 * f_mid + f_right);
        f_left = f_right;
    }
    return sum;
}

PcaResult pca(const Matrix& data) {
    if (data.rows() < 2) {
        throw InsufficientDataError("pca: need at least two observations");
    }
    if (data.cols() < 1) {
        throw DimensionError("pca: need at least one column");
    }
    require_finite(data, "pca");

    PcaResult out;
    out.mean = data.colwise().mean();
    Matrix centered = data.rowwise() - out.mean.transpose();
    const Matrix cov =
        centered.transpose() * centered / static_cast<double>(data.rows() - 1);

    Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw SingularError("pca: eigen-decomposition failed");
    }
    // ascending from Eigen; flip to descending and clamp rounding negatives
    const auto p = data.cols();
    out.eigenvalues = solver.eigenvalues().reverse();
    out.loadings = solver.eigenvectors().rowwise().reverse();
    for (Eigen::Index i = 0; i < p; ++i) {
        if (out.eigenvalues[i] < 0.0) out.eigenvalues[i] = 0.0;
    }
    out.scores = centered * out.loadings;
    return out;
}

OlsResult ols(const Matrix& x, const Vector& y) {
    if (x.rows() != y.size()) {
        throw DimensionError("ols: row count mismatch");
    }
    if (x.rows() <= x.cols()) {
        throw InsufficientDataError("ols: need more rows than columns");
    }
    require_finite(x, "ols design");
    require_finite(y, "ols target");

    Eigen::ColPivHouseholderQR<Matrix> qr(x);
    qr.setThreshold(1e-12);
    if (qr.rank() < x.cols()) {
        throw SingularError("ols: rank-deficient design matrix");
    }
    OlsResult out;
    out.coef = qr.solve(y);
    out.residuals = y - x * out.coef;
    out.rss = out.residuals.squaredNorm();
    return out;
}

NlsResult nls(const std::function<Vector(const Vector&)>& residual, const Vector& params0,
              const NlsOptions& opts) {
    require_finite(params0, "nls initial parameters");
    const auto p = params0.size();

    Vector params = params0;
    Vector r = residual(params);
    double rss = r.squaredNorm();

    NlsResult best{params, rss, 0, false};
    if (rss == 0.0) {
        best.converged = true;
        return best;
    }

    double lambda = 1e-3;
    for (int iter = 1; iter <= opts.max_iterations; ++iter) {
        // forward-difference Jacobian
        Matrix jac(r.size(), p);
        for (Eigen::Index j = 0; j < p; ++j) {
            const double h = opts.fd_relative_step * std::max(std::abs(params[j]), 1.0);
            Vector bumped = params;
            bumped[j] += h;
            jac.col(j) = (residual(bumped) - r) / h;
        }
        const Matrix jtj = jac.transpose() * jac;
        const Vector grad = jac.transpose() * r;

        bool accepted = false;
        Vector step(p);
        while (lambda < 1e14) {
            Matrix damped = jtj;
            for (Eigen::Index j = 0; j < p; ++j) {
                damped(j, j) += lambda * std::max(jtj(j, j), 1e-12);
            }
            step = damped.ldlt().solve(-grad);
            const Vector trial = params + step;
            const Vector r_trial = residual(trial);
            const double rss_trial = r_trial.squaredNorm();
            if (std::isfinite(rss_trial) && rss_trial < rss) {
                const double rss_drop = rss - rss_trial;
                params = trial;
                r = r_trial;
                rss = rss_trial;
                lambda = std::max(lambda * 0.3, 1e-12);
                accepted = true;
                best = {params, rss, iter, false};
                const double step_rel = step.norm() / (params.norm() + opts.step_tolerance);
                if (step_rel < opts.step_tolerance || rss_drop <= opts.rss_tolerance * rss) {
                    best.converged = true;
                    return best;
                }
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted) {
            // no descent direction left: treat as converged at the current point
            best.iterations = iter;
            best.converged = true;
            return best;
        }
    }
    throw NlsConvergenceError("nls: no convergence after max iterations", best);
}

BicSelection bic_subset_select(const Matrix& x, const Vector& y) {
    const auto p = x.cols();
    const auto n = x.rows();
    if (p > 15) {
        throw ParameterError("bic_subset_select: more than 15 candidate columns");
    }
    if (n <= p) {
        throw InsufficientDataError("bic_subset_select: need more rows than columns");
    }
    // full design must be well posed; subsets then inherit full rank
    if (p > 0) {
        Eigen::ColPivHouseholderQR<Matrix> qr(x);
        qr.setThreshold(1e-12);
        if (qr.rank() < p) {
            throw SingularError("bic_subset_select: rank-deficient design matrix");
        }
    }

    const double log_n = std::log(static_cast<double>(n));
    const double rss_floor = 1e-24 * std::max(1.0, y.squaredNorm());

    BicSelection selected;
    bool have = false;
    double best_bic = 0.0;

    std::vector<int> support;
    for (unsigned mask = 0; mask < (1u << p); ++mask) {
        support.clear();
        for (int j = 0; j < p; ++j) {
            if (mask & (1u << j)) support.push_back(j);
        }
        const int k = static_cast<int>(support.size());
        double rss;
        Vector coef(k);
        if (k == 0) {
            rss = y.squaredNorm();
        } else {
            Matrix sub(n, k);
            for (int j = 0; j < k; ++j) sub.col(j) = x.col(support[static_cast<std::size_t>(j)]);
            coef = sub.householderQr().solve(y);
            rss = (y - sub * coef).squaredNorm();
        }
        rss = std::max(rss, rss_floor);
        const double bic = n * std::log(rss / n) + k * log_n;

        bool better = false;
        if (!have) {
            better = true;
        } else if (bic < best_bic - 1e-12) {
            better = true;
        } else if (bic <= best_bic + 1e-12) {
            const int bk = static_cast<int>(selected.support.size());
            if (k < bk || (k == bk && support < selected.support)) better = true;
        }
        if (better) {
            have = true;
            best_bic = bic;
            selected.support = support;
            selected.coef = coef;
            selected.bic = bic;
        }
    }
    return selected;
}

Matrix chol_psd(const Matrix& s, double* repair_magnitude) {
    if (s.rows() != s.cols()) {
        throw DimensionError("chol_psd: matrix must be square");
    }
    require_finite(s, "chol_psd");
    const auto n = s.rows();
    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw ParameterError("chol_psd: matrix not symmetric");
    }

    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (s + s.transpose()));
    Vector eig = solver.eigenvalues();
    double repair_sq = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (eig[i] < -1e-8) {
            throw NotPsdError("chol_psd: eigenvalue " + std::to_string(eig[i]) +
                              " below -1e-8");
        }
        if (eig[i] < 0.0) {
            repair_sq += eig[i] * eig[i];
            eig[i] = 0.0;
        }
    }
    if (repair_magnitude != nullptr) {
        *repair_magnitude = std::sqrt(repair_sq);
    }
    const Matrix repaired =
        solver.eigenvectors() * eig.asDiagonal() * solver.eigenvectors().transpose();

    // outer-product Cholesky tolerating zero pivots (PSD case)
    Matrix lower = Matrix::Zero(n, n);
    const double pivot_tol = 1e-14 * std::max(repaired.diagonal().maxCoeff(), 1e-300);
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = repaired(j, j);
        for (Eigen::Index k = 0; k < j; ++k) d -= lower(j, k) * lower(j, k);
        if (d <= pivot_tol) {
            continue;  // column stays zero
        }
        lower(j, j) = std::sqrt(d);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double v = repaired(i, j);
            for (Eigen::Index k = 0; k < j; ++k) v -= lower(i, k) * lower(j, k);
            lower(i, j) = v / lower(j, j);
        }
    }
    return lower;
}

}  // namespace cocurve
