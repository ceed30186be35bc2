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
#include "distreg/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>

#include "distreg/errors.hpp"

namespace distreg {

namespace {

void check_problem(const GramMatrix& g, const Eigen::VectorXd& y, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw ConfigError("lambda must be positive, got " + std::to_string(lambda));
    if (g.values.rows() != g.values.cols()) throw InputError("Gram matrix is not square");
    if (g.values.rows() == 0) throw InputError("Gram matrix is empty");
    if (y.size() != g.values.rows())
        throw InputError("label vector has length " + std::to_string(y.size()) + ", expected " +
                         std::to_string(g.values.rows()));
    if (!y.allFinite()) throw InputError("labels must be finite");
}

double relative_residual(const Eigen::MatrixXd& a, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& b) {
    const double r = (a * x - b).norm();
    const double scale = b.norm();
    return scale > 0.0 ? r / scale : r;
}

// Cholesky solve of an SPD system with one step of iterative refinement.
Eigen::VectorXd spd_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                          double& condition_estimate, const char* what) {
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success)
        throw NumericalError(std::string(what) + ": Cholesky factorization failed");
    Eigen::VectorXd x = llt.solve(b);
    x += llt.solve(b - a * x);
    if (!x.allFinite()) throw NumericalError(std::string(what) + ": non-finite solution");
    const double rcond = llt.rcond();
    condition_estimate = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    return x;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::string_view to_string(Scheme scheme) {
    return scheme == Scheme::krr ? "krr" : "coefficient_l2";
}

Scheme parse_scheme(std::string_view name) {
    if (name == "coefficient_l2" || name == "coefficient") return Scheme::coefficient_l2;
    if (name == "krr") return Scheme::krr;
    throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

double coefficient_objective(const Eigen::MatrixXd& k, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& alpha, double lambda) {
    const double m = static_cast<double>(y.size());
    return (k * alpha - y).squaredNorm() / m + lambda * m * alpha.squaredNorm();
}

double krr_objective(const Eigen::MatrixXd& k, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& alpha, double lambda) {
    const double m = static_cast<double>(y.size());
    return (k * alpha - y).squaredNorm() / m + lambda * alpha.dot(k * alpha);
}

Solution fit_coefficient(const GramMatrix& g, const Eigen::VectorXd& y, double lambda) {
    check_problem(g, y, lambda);
    const auto start = std::chrono::steady_clock::now();
    const Eigen::MatrixXd& k = g.values;
    const double m = static_cast<double>(k.rows());

    Eigen::MatrixXd system = k.transpose() * k;
    system.diagonal().array() += lambda * m * m;
    const Eigen::VectorXd rhs = k.transpose() * y;

    Solution s;
    s.alpha = spd_solve(system, rhs, s.report.condition_estimate, "fit_coefficient");
    s.report.residual_norm = relative_residual(system, s.alpha, rhs);
    s.report.objective_value = coefficient_objective(k, y, s.alpha, lambda);
    s.report.wall_time = seconds_since(start);
    return s;
}

Solution fit_krr(const GramMatrix& g, const Eigen::VectorXd& y, double lambda) {
    if (!g.symmetric || !g.psd_claimed)
        throw ContractError(
            "KRR requires positive semi-definite K; use the coefficient_l2 scheme for "
            "indefinite or asymmetric kernels");
    check_problem(g, y, lambda);
    const auto start = std::chrono::steady_clock::now();
    const Eigen::MatrixXd& k = g.values;
    const double m = static_cast<double>(k.rows());

    Eigen::MatrixXd system = k;
    system.diagonal().array() += lambda * m;

    Solution s;
    s.alpha = spd_solve(system, y, s.report.condition_estimate, "fit_krr");
    s.report.residual_norm = relative_residual(system, s.alpha, y);
    s.report.objective_value = std::max(0.0, krr_objective(k, y, s.alpha, lambda));
    s.report.wall_time = seconds_since(start);
    return s;
}

Solution fit(Scheme scheme, const GramMatrix& g, const Eigen::VectorXd& y, double lambda) {
    return scheme == Scheme::krr ? fit_krr(g, y, lambda) : fit_coefficient(g, y, lambda);
}

Eigen::VectorXd labels_of(std::span<const Bag> bags) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(bags.size()));
    for (std::size_t i = 0; i < bags.size(); ++i) {
        if (!bags[i].label) throw InputError("training bag '" + bags[i].id + "' has no label");
        y[static_cast<Eigen::Index>(i)] = *bags[i].label;
    }
    return y;
}

FittedModel fit_model(Scheme scheme, const OuterKernelSpec& kspec,
                      const EmbeddingKernelSpec& espec, std::vector<Bag> train, double lambda,
                      unsigned threads) {
    if (scheme == Scheme::krr && (!kspec.symmetric() || !kspec.psd_claimed()))
        throw ContractError("KRR requires positive semi-definite K; outer kernel '" +
                            std::string(to_string(kspec.family)) + "' is not");
    const Eigen::VectorXd y = labels_of(train);
    const GramMatrix g = build_gram(kspec, espec, train, threads);
    Solution s = fit(scheme, g, y, lambda);

    FittedModel out;
    out.model.scheme = scheme;
    out.model.lambda = lambda;
    out.model.alpha = std::move(s.alpha);
    out.model.train_bags = std::move(train);
    out.model.outer = kspec;
    out.model.embedding = espec;
    out.report = s.report;
    return out;
}

Eigen::VectorXd predict(const CoefficientModel& model, std::span<const Bag> test_bags,
                        unsigned threads) {
    if (model.alpha.size() != static_cast<Eigen::Index>(model.train_bags.size()))
        throw InputError("model has " + std::to_string(model.alpha.size()) +
                         " coefficients for " + std::to_string(model.train_bags.size()) +
                         " training bags");
    if (test_bags.empty()) return Eigen::VectorXd(0);
    return build_cross_gram(model.outer, model.embedding, test_bags, model.train_bags, threads) *
           model.alpha;
}

double excess_error(const Eigen::VectorXd& predictions, std::span<const double> targets) {
    if (targets.empty()) throw InputError("excess_error: empty test set");
    if (static_cast<std::size_t>(predictions.size()) != targets.size())
        throw InputError("excess_error: prediction and target counts differ");
    double acc = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const double d = predictions[static_cast<Eigen::Index>(i)] - targets[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(targets.size()));
}

double excess_error(const CoefficientModel& model, std::span<const Bag> test_bags,
                    std::span<const double> targets, unsigned threads) {
    if (test_bags.empty()) throw InputError("excess_error: empty test set");
    return excess_error(predict(model, test_bags, threads), targets);
}

}  // namespace distreg
