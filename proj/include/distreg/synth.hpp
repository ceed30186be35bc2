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

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "distreg/embedding.hpp"

namespace distreg {

/// Closed-form regression functions of the bag parameters (theta, s).
/// With x ~ N(theta, s^2 I) truncated to [0,1]^d:
///   linear_mean         mean_k theta_k
///   quadratic_mean      mean_k theta_k^2
///   mean_plus_variance  mean_k (E[x_k] + Var[x_k]) of the truncated law
///   smooth_composite    exp(-2 |theta - 0.5|^2)
enum class TargetFamily { linear_mean, quadratic_mean, mean_plus_variance, smooth_composite };

std::string_view to_string(TargetFamily family);
TargetFamily parse_target_family(std::string_view name);

double target_value(TargetFamily family, const Eigen::VectorXd& theta, double scale);

/// Upper bound of |f| over theta in [0.2, 0.8]^d.
double target_sup(TargetFamily family);

/// Qualitative smoothness ladder used by the saturation experiment
/// (linear < quadratic < smooth_composite); larger is smoother.
int smoothness_rank(TargetFamily family);

struct MetaDistributionSpec {
    int dim = 1;
    double scale = 0.1;  // isotropic std of each bag's Gaussian before truncation
    TargetFamily target = TargetFamily::linear_mean;
    double noise_sd = 0.0;
    double label_bound = 2.0;  // M: |y| <= M by construction
    std::uint64_t seed = 0;

    static constexpr double kThetaLow = 0.2;
    static constexpr double kThetaHigh = 0.8;

    /// Throws ConfigError; label_bound must exceed target_sup(target).
    void validate() const;
};

struct TwoStageDataset {
    std::vector<Bag> bags;        // labelled, with params
    std::vector<double> targets;  // noiseless f_rho per bag
    TargetFamily target = TargetFamily::linear_mean;
};

/// splitmix64 finalizer applied to seed ^ index ^ domain; independent
/// streams per bag so bags can be drawn in any order.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t domain);

/// m bags of n points each. Labels are f(theta_i) plus N(0, noise_sd^2)
/// noise, redrawn until |y| <= M. Points are drawn with the stream seeded by
/// meta.seed so that resample_second_stage(ds, n, meta.seed) reproduces them.
TwoStageDataset generate(const MetaDistributionSpec& meta, std::size_t m, std::size_t n,
                         std::string_view id_prefix = "bag");

/// Redraws every bag's points from its stored parameters. Labels and
/// targets are unchanged. Throws InputError if a bag lacks parameters.
TwoStageDataset resample_second_stage(const TwoStageDataset& dataset, std::size_t n_new,
                                      std::uint64_t seed);

/// n points from N(theta, s^2 I) truncated to [0,1]^d by rejection, at
/// most 10^6 attempts per point (NumericalError beyond that).
PointMatrix draw_truncated_points(const BagParams& params, std::size_t n, std::uint64_t seed);

}  // namespace distreg
