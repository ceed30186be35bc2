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

#include "distreg/errors.hpp"
#include "distreg/synth.hpp"

using namespace distreg;

namespace {

MetaDistributionSpec meta(TargetFamily target, double noise, std::uint64_t seed, int dim = 1) {
    MetaDistributionSpec m;
    m.dim = dim;
    m.scale = 0.1;
    m.target = target;
    m.noise_sd = noise;
    m.seed = seed;
    return m;
}

}  // namespace

TEST_CASE("noiseless labels equal targets") {
    for (auto t : {TargetFamily::linear_mean, TargetFamily::quadratic_mean,
                   TargetFamily::mean_plus_variance, TargetFamily::smooth_composite}) {
        const auto ds = generate(meta(t, 0.0, 4, 2), 20, 5);
        REQUIRE(ds.bags.size() == 20);
        REQUIRE(ds.targets.size() == 20);
        for (std::size_t i = 0; i < 20; ++i) {
            CHECK(*ds.bags[i].label == ds.targets[i]);
            CHECK(ds.targets[i] == target_value(t, ds.bags[i].params->theta, ds.bags[i].params->scale));
        }
    }
}

TEST_CASE("generation is deterministic per seed") {
    const auto a = generate(meta(TargetFamily::quadratic_mean, 0.3, 9, 3), 15, 12);
    const auto b = generate(meta(TargetFamily::quadratic_mean, 0.3, 9, 3), 15, 12);
    for (std::size_t i = 0; i < 15; ++i) {
        CHECK(a.bags[i].id == b.bags[i].id);
        CHECK((a.bags[i].points.array() == b.bags[i].points.array()).all());
        CHECK(*a.bags[i].label == *b.bags[i].label);
    }
    const auto c = generate(meta(TargetFamily::quadratic_mean, 0.3, 10, 3), 15, 12);
    CHECK((a.bags[0].points.array() != c.bags[0].points.array()).any());

    // Per-bag streams: a prefix of a larger dataset is the smaller dataset.
    const auto big = generate(meta(TargetFamily::quadratic_mean, 0.3, 9, 3), 30, 12);
    CHECK((big.bags[14].points.array() == a.bags[14].points.array()).all());
    CHECK(*big.bags[14].label == *a.bags[14].label);
}

TEST_CASE("target definitions") {
    Eigen::VectorXd half(1);
    half << 0.5;
    CHECK(target_value(TargetFamily::linear_mean, half, 0.1) == 0.5);
    CHECK(target_value(TargetFamily::quadratic_mean, half, 0.1) == 0.25);
    CHECK(target_value(TargetFamily::smooth_composite, half, 0.1) == 1.0);
    Eigen::VectorXd two(2);
    two << 0.2, 0.6;
    CHECK(target_value(TargetFamily::linear_mean, two, 0.1) == doctest::Approx(0.4));
    CHECK(target_value(TargetFamily::quadratic_mean, two, 0.1) == doctest::Approx(0.2));
    CHECK(target_value(TargetFamily::smooth_composite, two, 0.1) == doctest::Approx(std::exp(-2 * 0.1)));
    CHECK(smoothness_rank(TargetFamily::linear_mean) < smoothness_rank(TargetFamily::quadratic_mean));
    CHECK(smoothness_rank(TargetFamily::quadratic_mean) < smoothness_rank(TargetFamily::smooth_composite));
}

TEST_CASE("mean_plus_variance matches a Monte Carlo estimate") {
    for (double theta : {0.22, 0.5, 0.78}) {
        BagParams p;
        p.theta = Eigen::VectorXd::Constant(1, theta);
        p.scale = 0.2;
        const PointMatrix x = draw_truncated_points(p, 400000, 17);
        const double mean = x.col(0).mean();
        const double var = (x.col(0).array() - mean).square().mean();
        CHECK(target_value(TargetFamily::mean_plus_variance, p.theta, p.scale) ==
              doctest::Approx(mean + var).epsilon(2e-3));
    }
}

TEST_CASE("labels are bounded and points lie in the unit cube") {
    auto m = meta(TargetFamily::smooth_composite, 1.0, 3, 2);
    m.label_bound = 1.5;
    const auto ds = generate(m, 200, 10);
    for (const auto& b : ds.bags) {
        CHECK(std::abs(*b.label) <= 1.5);
        CHECK(b.points.minCoeff() >= 0.0);
        CHECK(b.points.maxCoeff() <= 1.0);
        CHECK(b.params->theta.minCoeff() >= MetaDistributionSpec::kThetaLow);
        CHECK(b.params->theta.maxCoeff() <= MetaDistributionSpec::kThetaHigh);
    }
}

TEST_CASE("resample_second_stage") {
    const auto m = meta(TargetFamily::linear_mean, 0.1, 12);
    const auto ds = generate(m, 10, 8);
    const auto same = resample_second_stage(ds, 8, m.seed);
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK((same.bags[i].points.array() == ds.bags[i].points.array()).all());
        CHECK(*same.bags[i].label == *ds.bags[i].label);
        CHECK(same.targets[i] == ds.targets[i]);
    }
    const auto one = resample_second_stage(ds, 1, 5);
    for (const auto& b : one.bags) CHECK(b.size() == 1);

    CHECK_THROWS_AS(resample_second_stage(ds, 0, 5), InputError);
    auto bare = ds;
    bare.bags[3].params.reset();
    CHECK_THROWS_AS(resample_second_stage(bare, 4, 5), InputError);
}

TEST_CASE("bag means approach theta as N grows") {
    auto m = meta(TargetFamily::linear_mean, 0.0, 21);
    m.scale = 0.05;
    const auto small = generate(m, 50, 10);
    const auto large = resample_second_stage(small, 10000, 22);
    int closer = 0;
    for (std::size_t i = 0; i < 50; ++i) {
        const double theta = small.bags[i].params->theta[0];
        const double e10 = std::abs(small.bags[i].points.col(0).mean() - theta);
        const double e1e4 = std::abs(large.bags[i].points.col(0).mean() - theta);
        if (e1e4 < e10) ++closer;
    }
    CHECK(closer >= 45);
}

TEST_CASE("synthetic configuration errors") {
    CHECK_THROWS_AS(generate(meta(TargetFamily::linear_mean, 0.0, 1), 0, 5), InputError);
    CHECK_THROWS_AS(generate(meta(TargetFamily::linear_mean, 0.0, 1), 5, 0), InputError);
    auto m = meta(TargetFamily::linear_mean, 0.0, 1);
    m.scale = 0.0;
    CHECK_THROWS_AS(m.validate(), ConfigError);
    m = meta(TargetFamily::linear_mean, -0.1, 1);
    CHECK_THROWS_AS(m.validate(), ConfigError);
    m = meta(TargetFamily::mean_plus_variance, 0.0, 1);
    m.label_bound = 1.0;
    CHECK_THROWS_AS(m.validate(), ConfigError);
    m = meta(TargetFamily::linear_mean, 0.0, 1, 0);
    CHECK_THROWS_AS(m.validate(), ConfigError);
    CHECK_THROWS_AS(parse_target_family("cubic"), ConfigError);
    CHECK(parse_target_family("smooth_composite") == TargetFamily::smooth_composite);
}
