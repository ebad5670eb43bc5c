#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cocurve/numerics.hpp"

using namespace cocurve;

namespace {

Matrix random_matrix(std::mt19937& rng, int n, double scale) {
    std::normal_distribution<double> normal;
    Matrix a(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) a(i, j) = scale * normal(rng);
    }
    return a;
}

}  // namespace

TEST_CASE("expm basics") {
    CHECK((expm(Matrix::Zero(3, 3)) - Matrix::Identity(3, 3)).norm() == doctest::Approx(0.0));

    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = -1.0;
    const Matrix ed = expm(d);
    CHECK(ed(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
    CHECK(ed(1, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(std::abs(ed(0, 1)) < 1e-15);

    Matrix nilpotent = Matrix::Zero(2, 2);
    nilpotent(0, 1) = 1.0;
    const Matrix en = expm(nilpotent);
    CHECK(en(0, 0) == doctest::Approx(1.0));
    CHECK(en(0, 1) == doctest::Approx(1.0));
    CHECK(en(1, 0) == doctest::Approx(0.0));
    CHECK(en(1, 1) == doctest::Approx(1.0));

    CHECK_THROWS_AS(expm(Matrix::Zero(2, 3)), DimensionError);
}

TEST_CASE("expm inverse and semigroup properties") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 2.0);
    for (int rep = 0; rep < 20; ++rep) {
        Matrix a = random_matrix(rng, 4, 1.0);
        if (a.norm() > 5.0) a *= 5.0 / a.norm();
        const Matrix prod = expm(a) * expm(-a);
        CHECK((prod - Matrix::Identity(4, 4)).norm() < 1e-9);

        const double s = unif(rng), t = unif(rng);
        CHECK((expm((s + t) * a) - expm(s * a) * expm(t * a)).norm() < 1e-9);
    }
}

TEST_CASE("quad_fixed") {
    CHECK(quad_fixed([](double x) { return x * x * x; }, 0.0, 1.0, 1) ==
          doctest::Approx(0.25).epsilon(1e-14));
    // analytic antiderivative oracle for e^x
    CHECK(std::abs(quad_fixed([](double x) { return std::exp(x); }, 0.0, 1.0, 64) -
                   (std::exp(1.0) - 1.0)) < 1e-10);
    CHECK(quad_fixed([](double x) { return x; }, 0.5, 0.5, 4) == 0.0);
    CHECK_THROWS_AS(quad_fixed([](double x) { return x; }, 0.0, 1.0, 0), ParameterError);
    CHECK_THROWS_AS(quad_fixed([](double x) { return x; }, 1.0, 0.0, 4), ParameterError);
}

TEST_CASE("pca rank-1 and single column") {
    Matrix data(50, 2);
    std::mt19937 rng(3);
    std::normal_distribution<double> normal;
    for (int i = 0; i < 50; ++i) {
        const double v = normal(rng);
        data(i, 0) = v;
        data(i, 1) = 2.0 * v;  // perfectly correlated
    }
    const PcaResult p = pca(data);
    CHECK(p.eigenvalues[1] < 1e-12 * p.eigenvalues[0]);

    const PcaResult single = pca(data.col(0));
    double mean = data.col(0).mean();
    double var = (data.col(0).array() - mean).square().sum() / 49.0;
    CHECK(single.eigenvalues[0] == doctest::Approx(var).epsilon(1e-12));

    CHECK_THROWS_AS(pca(Matrix::Zero(1, 3)), InsufficientDataError);
}

TEST_CASE("pca identity covariance recovery") {
    std::mt19937 rng(11);
    std::normal_distribution<double> normal;
    const int n = 20000, p = 3;
    Matrix data(n, p);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) data(i, j) = normal(rng);
    }
    const PcaResult res = pca(data);
    const double se = std::sqrt(2.0 / n);  // large-sample eigenvalue error scale
    for (int j = 0; j < p; ++j) {
        CHECK(std::abs(res.eigenvalues[j] - 1.0) < 3.0 * se + 0.02);
    }
}

TEST_CASE("pca orthonormal loadings and exact reconstruction") {
    std::mt19937 rng(5);
    Matrix data = random_matrix(rng, 8, 1.0);
    const PcaResult p = pca(data);
    CHECK((p.loadings.transpose() * p.loadings - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() <
          1e-10);
    const Matrix rebuilt =
        (p.scores * p.loadings.transpose()).rowwise() + p.mean.transpose();
    CHECK((rebuilt - data).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("ols") {
    Matrix ones = Matrix::Ones(3, 1);
    Vector y(3);
    y << 2, 2, 2;
    const OlsResult constant = ols(ones, y);
    CHECK(constant.coef[0] == doctest::Approx(2.0));
    CHECK(constant.rss == doctest::Approx(0.0));

    std::mt19937 rng(17);
    std::normal_distribution<double> normal;
    Matrix x(40, 2);
    for (int i = 0; i < 40; ++i) {
        x(i, 0) = normal(rng);
        x(i, 1) = normal(rng);
    }
    const Vector exact = 3.0 * x.col(0) - x.col(1);
    const OlsResult lin = ols(x, exact);
    CHECK(lin.coef[0] == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(lin.coef[1] == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(lin.rss < 1e-20);

    Vector noisy = exact;
    for (int i = 0; i < 40; ++i) noisy[i] += normal(rng);
    const OlsResult fit = ols(x, noisy);
    for (int j = 0; j < 2; ++j) {
        CHECK(std::abs(x.col(j).dot(fit.residuals)) < 1e-9 * x.col(j).norm() * noisy.norm());
    }

    Matrix singular(5, 2);
    singular.col(0).setOnes();
    singular.col(1).setOnes();
    CHECK_THROWS_AS(ols(singular, Vector::Zero(5)), SingularError);
    CHECK_THROWS_AS(ols(Matrix::Ones(2, 2), Vector::Zero(2)), InsufficientDataError);
}

TEST_CASE("nls exponential recovery") {
    // generate-then-recover: y = exp(-x / 0.5) on an exact grid
    const int m = 30;
    Vector xs(m), ys(m);
    for (int i = 0; i < m; ++i) {
        xs[i] = 0.05 + 0.1 * i;
        ys[i] = std::exp(-xs[i] / 0.5);
    }
    auto residual = [&](const Vector& p) {
        Vector r(m);
        for (int i = 0; i < m; ++i) r[i] = std::exp(-xs[i] / p[0]) - ys[i];
        return r;
    };
    Vector p0(1);
    p0 << 1.5;
    const NlsResult fit = nls(residual, p0);
    CHECK(fit.converged);
    CHECK(std::abs(fit.params[0] - 0.5) < 1e-6);

    // already optimal start returns immediately
    Vector opt(1);
    opt << 0.5;
    const NlsResult at_opt = nls(residual, opt);
    CHECK(at_opt.converged);
    CHECK(at_opt.params[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("nls noisy exponential within 5 percent") {
    std::mt19937 rng(23);
    std::normal_distribution<double> noise(0.0, 0.01);
    const int m = 200;
    const double truth = 0.7;
    Vector xs(m), ys(m);
    for (int i = 0; i < m; ++i) {
        xs[i] = 0.02 + 2.0 * i / m;
        ys[i] = std::exp(-xs[i] / truth) + noise(rng);
    }
    auto residual = [&](const Vector& p) {
        Vector r(m);
        for (int i = 0; i < m; ++i) r[i] = std::exp(-xs[i] / p[0]) - ys[i];
        return r;
    };
    Vector p0(1);
    p0 << 0.2;
    const NlsResult fit = nls(residual, p0);
    CHECK(std::abs(fit.params[0] - truth) / truth < 0.05);
}

TEST_CASE("bic subset selection") {
    std::mt19937 rng(29);
    std::normal_distribution<double> normal;
    const int n = 200, p = 4;
    Matrix x(n, p);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) x(i, j) = normal(rng);
    }

    const Vector y13 = 2.0 * x.col(0) + 3.0 * x.col(2);
    const BicSelection exact = bic_subset_select(x, y13);
    CHECK(exact.support == std::vector<int>{0, 2});
    CHECK(exact.coef[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(exact.coef[1] == doctest::Approx(3.0).epsilon(1e-9));

    const Vector y1 = 1.5 * x.col(0);
    CHECK(bic_subset_select(x, y1).support == std::vector<int>{0});

    // pure noise keeps the empty model most of the time
    int empty = 0;
    const int seeds = 60;
    for (int s = 0; s < seeds; ++s) {
        std::mt19937 rng2(100 + s);
        Matrix xs(500, 5);
        Vector ys(500);
        for (int i = 0; i < 500; ++i) {
            for (int j = 0; j < 5; ++j) xs(i, j) = normal(rng2);
            ys[i] = normal(rng2);
        }
        if (bic_subset_select(xs, ys).support.empty()) ++empty;
    }
    CHECK(empty >= static_cast<int>(0.9 * seeds));

    CHECK_THROWS_AS(bic_subset_select(Matrix::Ones(20, 16), Vector::Zero(20)),
                    ParameterError);
}

TEST_CASE("bic full-support exact model always found") {
    std::mt19937 rng(31);
    std::normal_distribution<double> normal;
    for (int rep = 0; rep < 10; ++rep) {
        Matrix x(100, 3);
        for (int i = 0; i < 100; ++i) {
            for (int j = 0; j < 3; ++j) x(i, j) = normal(rng);
        }
        const Vector y = x.col(0) - 2.0 * x.col(1) + 0.5 * x.col(2);
        CHECK(bic_subset_select(x, y).support == std::vector<int>{0, 1, 2});
    }
}

TEST_CASE("chol_psd") {
    CHECK((chol_psd(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)).norm() <
          1e-14);

    Matrix s(2, 2);
    s << 4, 2, 2, 2;
    const Matrix l = chol_psd(s);
    CHECK(l(0, 0) == doctest::Approx(2.0));
    CHECK(l(1, 0) == doctest::Approx(1.0));
    CHECK(l(1, 1) == doctest::Approx(1.0));
    CHECK(l(0, 1) == 0.0);

    // reference six-factor return covariance reproduces entrywise
    Matrix big(6, 6);
    big << 0.00158, -0.00323, 0.00386, -0.00001, 0.00006, 0.00003,
        -0.00323, 0.00812, -0.00958, -0.00007, 0.00007, -0.00007,
        0.00386, -0.00958, 0.01740, 0.00006, -0.00003, 0.00011,
        -0.00001, -0.00007, 0.00006, 0.00045, -0.00052, 0.00010,
        0.00006, 0.00007, -0.00003, -0.00052, 0.00096, -0.00011,
        0.00003, -0.00007, 0.00011, 0.00010, -0.00011, 0.00015;
    double repair = -1.0;
    const Matrix lb = chol_psd(big, &repair);
    CHECK((lb * lb.transpose() - big).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(repair == 0.0);

    // tiny negative eigenvalue is clipped and reported
    Matrix nearly = Matrix::Identity(2, 2);
    nearly(1, 1) = -1e-9;
    double mag = 0.0;
    const Matrix repaired = chol_psd(nearly, &mag);
    CHECK(mag == doctest::Approx(1e-9).epsilon(1e-6));
    CHECK((repaired * repaired.transpose())(1, 1) == doctest::Approx(0.0));

    Matrix bad = Matrix::Identity(2, 2);
    bad(1, 1) = -1e-6;
    CHECK_THROWS_AS(chol_psd(bad), NotPsdError);

    // property: lower triangular, nonnegative diagonal
    std::mt19937 rng(37);
    for (int rep = 0; rep < 10; ++rep) {
        const Matrix g = random_matrix(rng, 5, 1.0);
        const Matrix psd = g * g.transpose();
        const Matrix f = chol_psd(psd);
        for (int i = 0; i < 5; ++i) {
            CHECK(f(i, i) >= 0.0);
            for (int j = i + 1; j < 5; ++j) CHECK(f(i, j) == 0.0);
        }
        CHECK((f * f.transpose() - psd).cwiseAbs().maxCoeff() < 1e-10);
    }
}
