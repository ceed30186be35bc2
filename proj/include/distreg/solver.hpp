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
#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "distreg/gram.hpp"

namespace distreg {

/// coefficient_l2: alpha = (lambda m^2 I + K^T K)^{-1} K^T y, any real K.
/// krr:            alpha = (lambda m I + K)^{-1} y, symmetric PSD K only.
enum class Scheme { coefficient_l2, krr };

std::string_view to_string(Scheme scheme);
Scheme parse_scheme(std::string_view name);

struct FitReport {
    double objective_value = 0.0;
    double residual_norm = 0.0;       // relative residual of the linear system
    double condition_estimate = 0.0;  // reciprocal of the Cholesky rcond estimate
    double wall_time = 0.0;           // seconds

    static constexpr double kIllConditioned = 1e12;
    bool ill_conditioned() const { return condition_estimate > kIllConditioned; }
};

struct Solution {
    Eigen::VectorXd alpha;
    FitReport report;
};

/// Solves (lambda m^2 I + K^T K) alpha = K^T y by Cholesky. The system is
/// SPD for every real K when lambda > 0, so indefinite and asymmetric
/// kernels are fine here.
Solution fit_coefficient(const GramMatrix& g, const Eigen::VectorXd& y, double lambda);

/// Solves (lambda m I + K) alpha = y. Throws ContractError unless the Gram
/// matrix comes from a symmetric kernel that claims PSD.
Solution fit_krr(const GramMatrix& g, const Eigen::VectorXd& y, double lambda);

Solution fit(Scheme scheme, const GramMatrix& g, const Eigen::VectorXd& y, double lambda);

/// (1/m) |K alpha - y|^2 + lambda m |alpha|^2
double coefficient_objective(const Eigen::MatrixXd& k, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& alpha, double lambda);

/// (1/m) |K alpha - y|^2 + lambda alpha^T K alpha
double krr_objective(const Eigen::MatrixXd& k, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& alpha, double lambda);

/// A fitted estimator. Prediction needs the training bags themselves since
/// f(mu) = sum_i alpha_i K(mu, mu_i).
struct CoefficientModel {
    Scheme scheme = Scheme::coefficient_l2;
    double lambda = 0.0;
    Eigen::VectorXd alpha;
    std::vector<Bag> train_bags;
    OuterKernelSpec outer;
    EmbeddingKernelSpec embedding;

    std::uint64_t fingerprint() const { return kernel_fingerprint(outer, embedding); }
};

struct FittedModel {
    CoefficientModel model;
    FitReport report;
};

/// Labels as a vector; throws InputError if any bag is unlabeled.
Eigen::VectorXd labels_of(std::span<const Bag> bags);

/// Builds the Gram matrix over `train` and fits with the bags' labels.
FittedModel fit_model(Scheme scheme, const OuterKernelSpec& kspec,
                      const EmbeddingKernelSpec& espec, std::vector<Bag> train, double lambda,
                      unsigned threads = 0);

/// cross_gram(test, train) * alpha, test embedding in the first slot.
Eigen::VectorXd predict(const CoefficientModel& model, std::span<const Bag> test_bags,
                        unsigned threads = 0);

/// sqrt(mean (prediction - target)^2). Throws InputError when empty or
/// when the lengths differ.
double excess_error(const Eigen::VectorXd& predictions, std::span<const double> targets);

double excess_error(const CoefficientModel& model, std::span<const Bag> test_bags,
                    std::span<const double> targets, unsigned threads = 0);

}  // namespace distreg
