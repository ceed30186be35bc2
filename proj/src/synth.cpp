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
#include "distreg/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "distreg/errors.hpp"

namespace distreg {

namespace {

constexpr std::uint64_t kLabelDomain = 0x6c6162656c73ULL;   // "labels"
constexpr std::uint64_t kPointDomain = 0x706f696e7473ULL;   // "points"
constexpr std::size_t kMaxAttempts = 1'000'000;

double std_normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Mean and variance of N(mu, s^2) truncated to [0, 1].
std::pair<double, double> truncated_moments(double mu, double s) {
    const double a = (0.0 - mu) / s;
    const double b = (1.0 - mu) / s;
    const double z = std_normal_cdf(b) - std_normal_cdf(a);
    const double pa = std_normal_pdf(a);
    const double pb = std_normal_pdf(b);
    const double shift = (pa - pb) / z;
    const double mean = mu + s * shift;
    const double var = s * s * (1.0 + (a * pa - b * pb) / z - shift * shift);
    return {mean, var};
}

}  // namespace

std::string_view to_string(TargetFamily family) {
    switch (family) {
        case TargetFamily::linear_mean: return "linear_mean";
        case TargetFamily::quadratic_mean: return "quadratic_mean";
        case TargetFamily::mean_plus_variance: return "mean_plus_variance";
        case TargetFamily::smooth_composite: return "smooth_composite";
    }
    return "unknown";
}

TargetFamily parse_target_family(std::string_view name) {
    for (auto f : {TargetFamily::linear_mean, TargetFamily::quadratic_mean,
                   TargetFamily::mean_plus_variance, TargetFamily::smooth_composite}) {
        if (name == to_string(f)) return f;
    }
    throw ConfigError("unknown target family '" + std::string(name) + "'");
}

double target_value(TargetFamily family, const Eigen::VectorXd& theta, double scale) {
    const double d = static_cast<double>(theta.size());
    switch (family) {
        case TargetFamily::linear_mean:
            return theta.sum() / d;
        case TargetFamily::quadratic_mean:
            return theta.squaredNorm() / d;
        case TargetFamily::mean_plus_variance: {
            double acc = 0.0;
            for (Eigen::Index k = 0; k < theta.size(); ++k) {
                const auto [mean, var] = truncated_moments(theta[k], scale);
                acc += mean + var;
            }
            return acc / d;
        }
        case TargetFamily::smooth_composite:
            return std::exp(-2.0 * (theta.array() - 0.5).square().sum());
    }
    throw ConfigError("unknown target family");
}

double target_sup(TargetFamily family) {
    switch (family) {
        case TargetFamily::linear_mean: return MetaDistributionSpec::kThetaHigh;
        case TargetFamily::quadratic_mean:
            return MetaDistributionSpec::kThetaHigh * MetaDistributionSpec::kThetaHigh;
        case TargetFamily::mean_plus_variance: return 1.25;  // mean <= 1, var <= 1/4 on [0,1]
        case TargetFamily::smooth_composite: return 1.0;
    }
    return 0.0;
}

int smoothness_rank(TargetFamily family) {
    switch (family) {
        case TargetFamily::linear_mean: return 0;
        case TargetFamily::quadratic_mean: return 1;
        case TargetFamily::mean_plus_variance: return 1;
        case TargetFamily::smooth_composite: return 2;
    }
    return 0;
}

void MetaDistributionSpec::validate() const {
    if (dim < 1) throw ConfigError("synthetic data: dim must be >= 1");
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw ConfigError("synthetic data: scale must be positive");
    if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd))
        throw ConfigError("synthetic data: noise_sd must be non-negative");
    if (!(label_bound > target_sup(target)) || !std::isfinite(label_bound))
        throw ConfigError("synthetic data: label bound M must exceed sup|f| = " +
                          std::to_string(target_sup(target)));
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t domain) {
    std::uint64_t z = seed ^ (index * 0x9e3779b97f4a7c15ULL) ^ domain;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

PointMatrix draw_truncated_points(const BagParams& params, std::size_t n, std::uint64_t seed) {
    const Eigen::Index d = params.theta.size();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    PointMatrix points(static_cast<Eigen::Index>(n), d);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        std::size_t attempts = 0;
        for (;;) {
            if (++attempts > kMaxAttempts)
                throw NumericalError("truncated sampling exceeded 10^6 attempts for one point");
            bool inside = true;
            for (Eigen::Index k = 0; k < d; ++k) {
                const double v = params.theta[k] + params.scale * normal(rng);
                points(i, k) = v;
                inside = inside && v >= 0.0 && v <= 1.0;
            }
            if (inside) break;
        }
    }
    return points;
}

TwoStageDataset generate(const MetaDistributionSpec& meta, std::size_t m, std::size_t n,
                         std::string_view id_prefix) {
    meta.validate();
    if (m < 1) throw InputError("generate: bag count m must be >= 1");
    if (n < 1) throw InputError("generate: points per bag N must be >= 1");

    TwoStageDataset ds;
    ds.target = meta.target;
    ds.bags.resize(m);
    ds.targets.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        std::mt19937_64 rng(stream_seed(meta.seed, i, kLabelDomain));
        std::uniform_real_distribution<double> theta_dist(MetaDistributionSpec::kThetaLow,
                                                          MetaDistributionSpec::kThetaHigh);
        BagParams params;
        params.scale = meta.scale;
        params.theta.resize(meta.dim);
        for (int k = 0; k < meta.dim; ++k) params.theta[k] = theta_dist(rng);

        const double f = target_value(meta.target, params.theta, meta.scale);
        double y = f;
        if (meta.noise_sd > 0.0) {
            std::normal_distribution<double> noise(0.0, meta.noise_sd);
            std::size_t attempts = 0;
            do {
                if (++attempts > kMaxAttempts)
                    throw NumericalError("label noise truncation exceeded 10^6 attempts");
                y = f + noise(rng);
            } while (std::abs(y) > meta.label_bound);
        }

        Bag& bag = ds.bags[i];
        bag.id = std::string(id_prefix) + "-" + std::to_string(i);
        bag.label = y;
        bag.points = draw_truncated_points(params, n, stream_seed(meta.seed, i, kPointDomain));
        bag.params = std::move(params);
        ds.targets[i] = f;
    }
    return ds;
}

TwoStageDataset resample_second_stage(const TwoStageDataset& dataset, std::size_t n_new,
                                      std::uint64_t seed) {
    if (n_new < 1) throw InputError("resample_second_stage: N must be >= 1");
    TwoStageDataset out = dataset;
    for (std::size_t i = 0; i < out.bags.size(); ++i) {
        Bag& bag = out.bags[i];
        if (!bag.params)
            throw InputError("bag '" + bag.id + "' carries no distribution parameters");
        bag.points = draw_truncated_points(*bag.params, n_new, stream_seed(seed, i, kPointDomain));
    }
    return out;
}

}  // namespace distreg
