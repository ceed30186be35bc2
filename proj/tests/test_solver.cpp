/*
 * Copyright 2026 The distreg Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/LU>

#include "distreg/errors.hpp"
#include "distreg/solver.hpp"
#include "support.hpp"

using namespace distreg;
using namespace distreg::testing;

namespace {

GramMatrix psd(const Eigen::MatrixXd& k) { return GramMatrix::from_values(k, true, true); }

double normal_residual(const Eigen::MatrixXd& k, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& alpha, double lambda) {
    const double m = static_cast<double>(k.rows());
    const Eigen::VectorXd rhs = k.transpose() * y;
    const Eigen::VectorXd lhs = k.transpose() * (k * alpha) + lambda * m * m * alpha;
    return (lhs - rhs).norm() / rhs.norm();
}

// The generic penalty alpha^T K alpha: (lambda m K + K^T K) alpha = K^T y.
Eigen::VectorXd kernel_penalty_solution(const Eigen::MatrixXd& k, const Eigen::VectorXd& y,
                                        double lambda) {
    const double m = static_cast<double>(k.rows());
    const Eigen::MatrixXd a = lambda * m * k + k.transpose() * k;
    return a.fullPivLu().solve(k.transpose() * y);
}

}  // namespace

TEST_CASE("fit_coefficient diagonal examples") {
    const int m = 4;
    const double c = 2.5, lambda = 0.01;
    const Eigen::VectorXd y = Eigen::Vector4d(1.0, -2.0, 0.5, 3.0);
    const Solution s = fit_coefficient(psd(c * Eigen::MatrixXd::Identity(m, m)), y, lambda);
    for (int i = 0; i < m; ++i)
        CHECK(s.alpha[i] == doctest::Approx(c * y[i] / (lambda * m * m + c * c)).epsilon(1e-14));
    CHECK(s.report.objective_value >= 0.0);

    const Solution one = fit_coefficient(psd(Eigen::MatrixXd::Constant(1, 1, 2.0)),
                                         Eigen::VectorXd::Constant(1, 1.0), 1.0);
    CHECK(one.alpha[0] == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("fit_coefficient matches the pseudo-inverse oracle") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        for (bool is_psd : {true, false}) {
            const auto p = seeded_problem(100 + seed, 10, is_psd);
            for (double lambda : {1e-6, 1e-3, 0.1}) {
                const Solution s = fit_coefficient(p.gram, p.y, lambda);
                CHECK(rel_error(s.alpha, oracle_coefficient(p.gram.values, p.y, lambda)) <= 1e-8);
                CHECK(s.report.residual_norm <= 1e-8);
                CHECK(normal_residual(p.gram.values, p.y, s.alpha, lambda) <= 1e-8);
                CHECK(s.report.objective_value ==
                      doctest::Approx(coefficient_objective(p.gram.values, p.y, s.alpha, lambda)));
            }
        }
    }
}

TEST_CASE("fit_krr examples") {
    const int m = 3;
    const double c = 1.5, lambda = 0.2;
    const Eigen::VectorXd y = Eigen::Vector3d(1.0, 2.0, -1.0);
    const Solution s = fit_krr(psd(c * Eigen::MatrixXd::Identity(m, m)), y, lambda);
    for (int i = 0; i < m; ++i)
        CHECK(s.alpha[i] == doctest::Approx(y[i] / (lambda * m + c)).epsilon(1e-14));

    const auto p = seeded_problem(7, 10, true);
    const double knorm = p.gram.values.norm();
    const double big = 1e6 * knorm / 10.0;
    const Solution limit = fit_krr(p.gram, p.y, big);
    const Eigen::VectorXd expect = p.y / (big * 10.0);
    for (int i = 0; i < 10; ++i) CHECK(std::abs(limit.alpha[i] - expect[i]) <= 0.01 * std::abs(expect[i]));

    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto q = seeded_problem(200 + seed, 10, true);
        for (double lambda2 : {1e-6, 1e-3, 0.1}) {
            const Solution k = fit_krr(q.gram, q.y, lambda2);
            CHECK(rel_error(k.alpha, oracle_krr(q.gram.values, q.y, lambda2)) <= 1e-8);
            CHECK(k.report.residual_norm <= 1e-8);
        }
    }
}

TEST_CASE("minimizer property") {
    for (bool is_psd : {true, false}) {
        const auto p = seeded_problem(11, 10, is_psd);
        const double lambda = 1e-3;
        const Solution s = fit_coefficient(p.gram, p.y, lambda);
        const double best = coefficient_objective(p.gram.values, p.y, s.alpha, lambda);
        std::mt19937_64 rng(5);
        std::normal_distribution<double> n(0.0, 1.0);
        for (int trial = 0; trial < 100; ++trial) {
            Eigen::VectorXd d(10);
            for (int i = 0; i < 10; ++i) d[i] = n(rng);
            d *= 1e-3 * s.alpha.norm() / d.norm();
            CHECK(coefficient_objective(p.gram.values, p.y, s.alpha + d, lambda) >= best - 1e-12);
        }
    }
}

TEST_CASE("alpha norm is non-increasing in lambda") {
    for (bool is_psd : {true, false}) {
        const auto p = seeded_problem(13, 10, is_psd);
        double prev = INFINITY;
        for (int i = 0; i < 10; ++i) {
            const double lambda = std::pow(10.0, -8.0 + i);
            const double norm = fit_coefficient(p.gram, p.y, lambda).alpha.norm();
            CHECK(norm <= prev * (1 + 1e-12));
            prev = norm;
        }
    }
}

TEST_CASE("indefinite fixture: coefficient scheme fits, KRR refuses") {
    const auto f = indefinite_fixture();
    const GramMatrix g = build_gram(f.outer, f.embedding, f.bags, 1);
    const Eigen::VectorXd y = labels_of(f.bags);
    const Solution s = fit_coefficient(g, y, 1e-4);
    CHECK(s.alpha.allFinite());
    CHECK(s.report.residual_norm <= 1e-8);
    try {
        fit_krr(g, y, 1e-4);
        FAIL("fit_krr accepted an indefinite kernel");
    } catch (const ContractError& e) {
        CHECK(std::string(e.what()).find("KRR requires positive semi-definite K") != std::string::npos);
        CHECK(e.exit_code() == 3);
    }
    CHECK_THROWS_AS(fit_model(Scheme::krr, f.outer, f.embedding, f.bags, 1e-4), ContractError);
}

TEST_CASE("kernel-norm penalty reduces to KRR on invertible PSD Gram matrices") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto p = seeded_problem(300 + seed, 10, true);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(p.gram.values);
        REQUIRE(lu.isInvertible());
        const double lambda = 1e-2;
        const Eigen::VectorXd krr = fit_krr(p.gram, p.y, lambda).alpha;
        CHECK(rel_error(kernel_penalty_solution(p.gram.values, p.y, lambda), krr) <= 1e-8);
    }
}

TEST_CASE("solver errors") {
    const auto p = seeded_problem(1, 4, true);
    CHECK_THROWS_AS(fit_coefficient(p.gram, p.y, 0.0), ConfigError);
    CHECK_THROWS_AS(fit_coefficient(p.gram, p.y, -1.0), ConfigError);
    CHECK_THROWS_AS(fit_krr(p.gram, p.y, 0.0), ConfigError);
    CHECK_THROWS_AS(fit_coefficient(p.gram, Eigen::VectorXd::Zero(3), 0.1), InputError);
    CHECK_THROWS_AS(fit_coefficient(GramMatrix::from_values(Eigen::MatrixXd::Ones(2, 3), false, false),
                                    Eigen::VectorXd::Zero(2), 0.1),
                    InputError);
    CHECK_THROWS_AS(fit_krr(GramMatrix::from_values(p.gram.values, false, true), p.y, 0.1), ContractError);
    CHECK_THROWS_AS(parse_scheme("lasso"), ConfigError);
    CHECK(parse_scheme("coefficient_l2") == Scheme::coefficient_l2);
    CHECK(parse_scheme("krr") == Scheme::krr);

    auto bags = random_bags(3, 3, 4, 2);
    bags[1].label.reset();
    CHECK_THROWS_AS(labels_of(bags), InputError);
}

TEST_CASE("condition estimate flags tiny lambda on a rank-deficient Gram") {
    const Eigen::MatrixXd k = Eigen::MatrixXd::Ones(5, 5);
    const Solution s = fit_coefficient(GramMatrix::from_values(k, true, true), Eigen::VectorXd::Ones(5), 1e-15);
    CHECK(s.report.ill_conditioned());
    CHECK(s.alpha.allFinite());
    const Solution ok = fit_coefficient(GramMatrix::from_values(k, true, true), Eigen::VectorXd::Ones(5), 0.1);
    CHECK_FALSE(ok.report.ill_conditioned());
}

TEST_CASE("predict examples") {
    EmbeddingKernelSpec e;
    e.bandwidth = 0.3;
    e.dim = 2;
    const auto bags = random_bags(21, 6, 5, 2);

    CoefficientModel single;
    single.lambda = 0.1;
    single.outer = OuterKernelSpec::gaussian(0.5);
    single.embedding = e;
    single.train_bags = {bags[0]};
    single.alpha = Eigen::VectorXd::Ones(1);
    const std::vector<Bag> test0{bags[0]};
    CHECK(predict(single, test0)[0] == 1.0);

    const FittedModel fm = fit_model(Scheme::coefficient_l2, OuterKernelSpec::dog(0.3, 0.6, 1.0), e,
                                     bags, 1e-3, 1);
    CoefficientModel zero = fm.model;
    zero.alpha.setZero();
    const auto test = random_bags(22, 5, 7, 2);
    CHECK(predict(zero, test).cwiseAbs().maxCoeff() == 0.0);

    const Eigen::VectorXd pred = predict(fm.model, test, 2);
    REQUIRE(pred.size() == 5);
    for (int t = 0; t < 5; ++t) {
        double acc = 0.0;
        for (std::size_t i = 0; i < bags.size(); ++i)
            acc += fm.model.alpha[i] * naive_outer(fm.model.outer, e, test[t], bags[i]);
        CHECK(std::abs(pred[t] - acc) <= 1e-10);
    }

    auto bad = random_bags(23, 2, 4, 3);
    CHECK_THROWS_AS(predict(fm.model, bad), InputError);
}

TEST_CASE("excess_error") {
    const Eigen::VectorXd p = Eigen::Vector3d(1.0, 2.0, 3.0);
    const std::vector<double> same{1.0, 2.0, 3.0};
    CHECK(excess_error(p, same) == 0.0);
    const std::vector<double> twos{2.0, 2.0, 2.0};
    CHECK(excess_error(Eigen::VectorXd::Zero(3), twos) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(excess_error(Eigen::VectorXd(), std::vector<double>{}), InputError);
    CHECK_THROWS_AS(excess_error(p, std::vector<double>{1.0}), InputError);

    EmbeddingKernelSpec e;
    e.bandwidth = 0.2;
    e.dim = 2;
    const auto train = random_bags(31, 8, 6, 2);
    const auto test = random_bags(32, 4, 6, 2);
    const FittedModel fm = fit_model(Scheme::krr, OuterKernelSpec::gaussian(0.5), e, train, 1e-2, 1);
    std::vector<double> targets;
    for (const auto& b : test) targets.push_back(*b.label);
    const Eigen::VectorXd pred = predict(fm.model, test, 1);
    double sq = 0.0;
    for (int i = 0; i < 4; ++i) sq += (pred[i] - targets[i]) * (pred[i] - targets[i]);
    CHECK(excess_error(fm.model, test, targets, 1) == doctest::Approx(std::sqrt(sq / 4)).epsilon(1e-14));
}
