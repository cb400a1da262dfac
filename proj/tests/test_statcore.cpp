#include "oracles.hpp"

#include "rankdemand/errors.hpp"
#include "rankdemand/statcore.hpp"

#include <doctest.h>

#include <map>

using namespace rankdemand;
using namespace rankdemand::stat;

namespace {

Eigen::MatrixXd to_eigen(const oracle::Mat& m) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m[0].size()));
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m[0].size(); ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i][j];
    return out;
}

Eigen::VectorXd to_eigen(const oracle::Vec& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())); }

std::vector<std::string> names(std::size_t k) {
    std::vector<std::string> out;
    for (std::size_t j = 0; j < k; ++j) out.push_back("x" + std::to_string(j));
    return out;
}

} // namespace

TEST_CASE("ols on exact linear data") {
    Eigen::MatrixXd X(3, 2);
    X << 1, 1, 1, 2, 1, 3;
    Eigen::VectorXd y(3);
    y << 2, 4, 6;
    auto r = ols_fit(DesignMatrix(X, {"c", "x"}), y);
    CHECK(r.coefficient("c") == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::abs(r.coefficient("c")) < 1e-12);
    CHECK(r.coefficient("x") == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.r_squared == doctest::Approx(1.0));
    CHECK(r.residuals.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(r.centered_r_squared);
}

TEST_CASE("ols simple regression closed form") {
    Eigen::MatrixXd X(3, 2);
    X << 1, 0, 1, 1, 1, 2;
    Eigen::VectorXd y(3);
    y << 1, 2, 2;
    auto r = ols_fit(DesignMatrix(X, {"c", "x"}), y);
    CHECK(r.coefficient("c") == doctest::Approx(7.0 / 6.0).epsilon(1e-12));
    CHECK(r.coefficient("x") == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("ols drops duplicated column, keeps leftmost") {
    Eigen::MatrixXd X(5, 3);
    X << 1, 2, 2, 1, 3, 3, 1, 5, 5, 1, 7, 7, 1, 8, 8;
    Eigen::VectorXd y(5);
    y << 1, 2, 4, 5, 7;
    auto r = ols_fit(DesignMatrix(X, {"c", "a", "b"}), y);
    REQUIRE(r.dropped_columns.size() == 1);
    CHECK(r.dropped_columns[0] == "b");
    CHECK(r.has("a"));
    CHECK_FALSE(r.has("b"));
    CHECK(r.k == 2);
    CHECK(r.covariance.rows() == 2);
}

TEST_CASE("ols errors") {
    Eigen::MatrixXd X(2, 2);
    X << 1, 2, 1, 3;
    Eigen::VectorXd y(2);
    y << 1, 2;
    CHECK_THROWS_AS(ols_fit(DesignMatrix(X, {"c", "x"}), y), InputError);
    Eigen::MatrixXd Z(3, 1);
    Z << 1, 2, 3;
    Eigen::VectorXd wrong(2);
    wrong << 1, 2;
    CHECK_THROWS_AS(ols_fit(DesignMatrix(Z, {"x"}), wrong), InputError);
    Eigen::MatrixXd bad(3, 1);
    bad << 1, std::nan(""), 3;
    CHECK_THROWS_AS(DesignMatrix(bad, {"x"}), InputError);
    CHECK_THROWS_AS(DesignMatrix(Z, {"x", "y"}), InputError);
}

TEST_CASE("constant response without intercept reports R2 of 0 with a flag") {
    Eigen::MatrixXd X(4, 1);
    X << 1, 2, 3, 4;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(4);
    auto r = ols_fit(DesignMatrix(X, {"x"}), y);
    CHECK_FALSE(r.r_squared_defined);
    CHECK(r.r_squared == 0.0);
}

TEST_CASE("ols matches normal-equation brute force on random instances") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> nk(1, 5);
    std::normal_distribution<double> z(0.0, 1.0);
    double worst = 0.0, worst_orth = 0.0;
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t k = static_cast<std::size_t>(nk(rng));
        std::uniform_int_distribution<int> nn(static_cast<int>(k) + 3, 50);
        const std::size_t n = static_cast<std::size_t>(nn(rng));
        oracle::Mat X(n, oracle::Vec(k));
        oracle::Vec y(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < k; ++j) X[i][j] = j == 0 ? 1.0 : z(rng) * (1.0 + j);
            y[i] = z(rng) * 3.0 + X[i][k - 1];
        }
        const auto b = oracle::normal_equations(X, y);
        const auto r = ols_fit(DesignMatrix(to_eigen(X), names(k)), to_eigen(y));
        REQUIRE(r.dropped_columns.empty());
        for (std::size_t j = 0; j < k; ++j)
            worst = std::max(worst, std::abs(r.coefficients(static_cast<Eigen::Index>(j)) - b[j]) /
                                        std::max(1.0, std::abs(b[j])));
        const Eigen::VectorXd orth = to_eigen(X).transpose() * r.residuals;
        worst_orth = std::max(worst_orth, orth.cwiseAbs().maxCoeff() / (1.0 + to_eigen(y).norm() * to_eigen(X).norm()));
        // HC0 against the row-by-row formula
        const auto e = oracle::residuals(X, y, b);
        const auto V = oracle::hc0(X, e);
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t c = 0; c < k; ++c)
                CHECK(std::abs(r.covariance(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c)) - V[a][c]) <=
                      1e-10 * std::max(1e-12, std::abs(V[a][a] * V[c][c]) > 0 ? std::sqrt(std::abs(V[a][a] * V[c][c])) : 1.0));
    }
    CHECK(worst <= 1e-10);
    CHECK(worst_orth <= 1e-8);
}

TEST_CASE("white covariance: zero residuals, symmetry, PSD") {
    Eigen::MatrixXd X(6, 2);
    X << 1, 0.5, 1, 1.7, 1, -0.3, 1, 2.2, 1, 0.9, 1, -1.4;
    CHECK(white_covariance(X, Eigen::VectorXd::Zero(6)).cwiseAbs().maxCoeff() == 0.0);
    Eigen::VectorXd e(6);
    e << 0.3, -1.2, 0.8, 0.05, -0.4, 0.9;
    const auto V = white_covariance(X, e);
    CHECK((V - V.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(V);
    CHECK(es.eigenvalues().minCoeff() >= -1e-9 * V.trace());
}

TEST_CASE("white covariance random 6x2 vs direct formula") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z;
    oracle::Mat X(6, oracle::Vec(2));
    oracle::Vec e(6);
    for (int i = 0; i < 6; ++i) {
        X[static_cast<std::size_t>(i)] = {z(rng), z(rng)};
        e[static_cast<std::size_t>(i)] = z(rng);
    }
    const auto V = white_covariance(to_eigen(X), to_eigen(e));
    const auto W = oracle::hc0(X, e);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) CHECK(oracle::rel_diff(V(a, b), W[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) <= 1e-12);
}

TEST_CASE("equal-magnitude residuals: HC0 equals classical times (n-k)/n") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> z;
    std::bernoulli_distribution sign;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 12, k = 3;
        Eigen::MatrixXd X(n, k);
        Eigen::VectorXd e(n);
        for (int i = 0; i < n; ++i) {
            X(i, 0) = 1.0;
            X(i, 1) = z(rng);
            X(i, 2) = z(rng);
            e(i) = sign(rng) ? 0.7 : -0.7;
        }
        const auto hc = white_covariance(X, e);
        const Eigen::MatrixXd cl = classical_covariance(X, e) * (static_cast<double>(n - k) / n);
        const Eigen::MatrixXd direct = 0.49 * (X.transpose() * X).inverse();
        CHECK((hc - cl).cwiseAbs().maxCoeff() <= 1e-12 * cl.cwiseAbs().maxCoeff());
        CHECK((hc - direct).cwiseAbs().maxCoeff() <= 1e-12 * direct.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("HC1 scaling uses absorbed degrees of freedom") {
    Eigen::MatrixXd X(8, 2);
    X << 1, 1, 1, 2, 1, 4, 1, 3, 1, 7, 1, 5, 1, 6, 1, 9;
    Eigen::VectorXd e(8);
    e << 0.1, -0.2, 0.3, 0.1, -0.5, 0.2, 0.3, -0.3;
    const auto h0 = white_covariance(X, e, CovarianceKind::hc0);
    const auto h1 = white_covariance(X, e, CovarianceKind::hc1, 2);
    CHECK((h1 - h0 * (8.0 / (8.0 - 2.0 - 2.0))).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("within transform") {
    std::vector<double> v{3, 5, 7};
    std::vector<std::string> one{"a", "a", "a"};
    auto w = within_transform(v, one);
    CHECK(w(0) == doctest::Approx(-2));
    CHECK(std::abs(w(1)) < 1e-15);
    CHECK(w(2) == doctest::Approx(2));
    std::vector<double> s{9};
    std::vector<std::string> sid{"z"};
    CHECK(within_transform(s, sid)(0) == 0.0);
    std::vector<std::string> bad{"a"};
    CHECK_THROWS_AS(within_transform(v, bad), InputError);
}

TEST_CASE("within transform: per-entity means vanish") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z(100.0, 40.0);
    std::uniform_int_distribution<int> ent(0, 6);
    std::vector<double> v;
    std::vector<std::string> ids;
    for (int i = 0; i < 400; ++i) {
        v.push_back(z(rng));
        ids.push_back("e" + std::to_string(ent(rng)));
    }
    auto w = within_transform(v, ids);
    std::map<std::string, std::pair<double, int>> sums;
    for (std::size_t i = 0; i < v.size(); ++i) {
        sums[ids[i]].first += w(static_cast<Eigen::Index>(i));
        sums[ids[i]].second += 1;
    }
    for (const auto& [id, s] : sums) CHECK(std::abs(s.first / s.second) <= 1e-12);
}

TEST_CASE("within OLS equals dummy-variable OLS") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 20;
        std::vector<std::string> ids;
        std::vector<double> x1, x2, y;
        for (int i = 0; i < n; ++i) {
            const bool a = i % 3 != 0;
            ids.push_back(a ? "A" : "B");
            x1.push_back(z(rng) + (a ? 2.0 : -1.0));
            x2.push_back(z(rng));
            y.push_back(1.5 * x1.back() - 0.7 * x2.back() + (a ? 4.0 : -2.0) + 0.3 * z(rng));
        }
        Eigen::MatrixXd W(n, 2);
        W.col(0) = within_transform(x1, ids);
        W.col(1) = within_transform(x2, ids);
        const auto yw = within_transform(y, ids);
        const auto r = ols_fit(DesignMatrix(W, {"x1", "x2"}), yw);
        oracle::Mat L(static_cast<std::size_t>(n), oracle::Vec(4));
        for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i)
            L[i] = {x1[i], x2[i], ids[i] == "A" ? 1.0 : 0.0, ids[i] == "B" ? 1.0 : 0.0};
        const auto b = oracle::normal_equations(L, y);
        CHECK(oracle::rel_diff(r.coefficient("x1"), b[0]) <= 1e-9);
        CHECK(oracle::rel_diff(r.coefficient("x2"), b[1]) <= 1e-9);
    }
}

TEST_CASE("solve_linear") {
    Eigen::MatrixXd I = Eigen::MatrixXd::Identity(3, 3);
    Eigen::VectorXd b(3);
    b << 4, -2, 9;
    CHECK((solve_linear(I, b).x - b).cwiseAbs().maxCoeff() == 0.0);
    Eigen::MatrixXd D(2, 2);
    D << 2, 0, 0, 4;
    Eigen::VectorXd d(2);
    d << 2, 8;
    auto s = solve_linear(D, d);
    CHECK(s.x(0) == doctest::Approx(1.0));
    CHECK(s.x(1) == doctest::Approx(2.0));
    Eigen::MatrixXd S(2, 2);
    S << 1, 1, 1, 1;
    CHECK_THROWS_AS(solve_linear(S, d), IllConditionedError);
    Eigen::MatrixXd near(2, 2);
    near << 1, 1, 1, 1 + 1e-10;
    try {
        solve_linear(near, d);
        FAIL("expected ill-conditioning");
    } catch (const IllConditionedError& e) {
        CHECK(e.condition() > 1e8);
    }
    Eigen::MatrixXd rect(2, 3);
    rect.setOnes();
    CHECK_THROWS_AS(solve_linear(rect, d), InputError);
}

TEST_CASE("solve_linear residual bound on random systems") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + trial % 6;
        Eigen::MatrixXd A(n, n);
        Eigen::VectorXd b(n);
        for (int i = 0; i < n; ++i) {
            b(i) = z(rng);
            for (int j = 0; j < n; ++j) A(i, j) = z(rng) + (i == j ? 3.0 : 0.0);
        }
        auto s = solve_linear(A, b);
        const double bound = 1e-9 * (A.lpNorm<Eigen::Infinity>() * s.x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>());
        CHECK((A * s.x - b).cwiseAbs().maxCoeff() <= bound);
        CHECK(s.condition >= 1.0 - 1e-12);
    }
}

TEST_CASE("significance stars follow the normal approximation") {
    CHECK(significance_stars(1.91, 0.58) == "***");
    CHECK(significance_stars(-2.54, -0.97) == "***");
    CHECK(significance_stars(-0.36, -0.11) == "***");
    CHECK(significance_stars(0.01, 0.003) == "***");
    CHECK(significance_stars(0.18, 0.1) == "*");
    CHECK(significance_stars(-0.05, 1.58) == "");
    CHECK(significance_stars(0.2, 0.1) == "**");
    CHECK(normal_p_value(1.959963984540054, 1.0) == doctest::Approx(0.05).epsilon(1e-9));
}
