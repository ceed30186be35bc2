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

// Test-only oracles. Everything here recomputes quantities straight from the
// closed-form definitions with plain loops, independent of the library's
// canonical ordering, cascade summation and cached geometry.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/QR>

#include "distreg/analysis.hpp"
#include "distreg/gram.hpp"
#include "distreg/synth.hpp"

namespace distreg::testing {

inline Bag random_bag(std::mt19937_64& rng, int n, int dim, const std::string& id) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Bag b;
    b.id = id;
    b.points.resize(n, dim);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < dim; ++k) b.points(i, k) = u(rng);
    b.label = u(rng);
    return b;
}

inline std::vector<Bag> random_bags(std::uint64_t seed, int count, int n, int dim) {
    std::mt19937_64 rng(seed);
    std::vector<Bag> bags;
    for (int i = 0; i < count; ++i) bags.push_back(random_bag(rng, n, dim, "r" + std::to_string(i)));
    return bags;
}

inline double naive_kernel(const EmbeddingKernelSpec& spec, const double* s, const double* t) {
    double d2 = 0.0;
    for (int k = 0; k < spec.dim; ++k) d2 += (s[k] - t[k]) * (s[k] - t[k]);
    const double bw = spec.bandwidth;
    switch (spec.family) {
        case EmbeddingFamily::gaussian: return std::exp(-d2 / (2.0 * bw * bw));
        case EmbeddingFamily::exponential: return std::exp(-std::sqrt(d2) / bw);
        case EmbeddingFamily::cauchy: return 1.0 / (1.0 + d2 / (bw * bw));
    }
    return 0.0;
}

inline double naive_inner(const EmbeddingKernelSpec& spec, const Bag& a, const Bag& b) {
    long double acc = 0.0L;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        for (Eigen::Index j = 0; j < b.size(); ++j)
            acc += naive_kernel(spec, a.points.row(i).data(), b.points.row(j).data());
    return static_cast<double>(acc / (static_cast<long double>(a.size()) * b.size()));
}

inline double naive_sq_dist(const EmbeddingKernelSpec& spec, const Bag& a, const Bag& b) {
    return naive_inner(spec, a, a) + naive_inner(spec, b, b) - 2.0 * naive_inner(spec, a, b);
}

inline double naive_outer(const OuterKernelSpec& k, const EmbeddingKernelSpec& e, const Bag& a,
                          const Bag& b) {
    const double ab = naive_inner(e, a, b);
    const double d2 = std::max(0.0, naive_sq_dist(e, a, b));
    switch (k.family) {
        case OuterFamily::gaussian_on_embedding: return std::exp(-d2 / (2 * k.sigma * k.sigma));
        case OuterFamily::linear_embedding: return ab;
        case OuterFamily::dog_indefinite:
            return std::exp(-d2 / (2 * k.sigma1 * k.sigma1)) -
                   k.c * std::exp(-d2 / (2 * k.sigma2 * k.sigma2));
        case OuterFamily::tanh_indefinite: return std::tanh(k.scale * ab + k.offset);
        case OuterFamily::tilted_asymmetric:
            return std::exp(-d2 / (2 * k.sigma * k.sigma)) *
                   (1.0 + k.c * naive_inner(e, a, *k.reference));
    }
    return 0.0;
}

inline Eigen::MatrixXd naive_gram(const OuterKernelSpec& k, const EmbeddingKernelSpec& e,
                                  const std::vector<Bag>& rows, const std::vector<Bag>& cols) {
    Eigen::MatrixXd g(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) g(i, j) = naive_outer(k, e, rows[i], cols[j]);
    return g;
}

// Frozen indefinite fixture: ten 20-point 1-D bags from the synthetic
// generator (seed 1), embedding gaussian bw 0.2, dog_indefinite(1, 2, 1).
// Found by scanning seeds from 1 upward for min eigenvalue < -1e-6; the
// first seed qualifies with min eigenvalue about -1.627.
struct IndefiniteFixture {
    std::vector<Bag> bags;
    EmbeddingKernelSpec embedding;
    OuterKernelSpec outer;
};

inline IndefiniteFixture indefinite_fixture() {
    MetaDistributionSpec meta;
    meta.dim = 1;
    meta.scale = 0.1;
    meta.seed = 1;
    IndefiniteFixture f;
    f.bags = generate(meta, 10, 20, "dog").bags;
    f.embedding.bandwidth = 0.2;
    f.outer = OuterKernelSpec::dog(1.0, 2.0, 1.0);
    return f;
}

inline constexpr double kIndefiniteFixtureMinEigenvalue = -1.62703;

// Seeded 10x10-style regression problems: gaussian_on_embedding for the PSD
// side, dog_indefinite for the indefinite side. A DoG Gram has a zero
// diagonal, so any non-zero one is indefinite.
struct SeededProblem {
    GramMatrix gram;
    Eigen::VectorXd y;
};

inline SeededProblem seeded_problem(std::uint64_t seed, int m, bool psd) {
    const auto bags = random_bags(seed, m, 8, 2);
    EmbeddingKernelSpec e;
    e.bandwidth = 0.3;
    e.dim = 2;
    const OuterKernelSpec k =
        psd ? OuterKernelSpec::gaussian(0.4) : OuterKernelSpec::dog(0.3, 0.6, 1.0);
    SeededProblem p{GramMatrix::from_values(naive_gram(k, e, bags, bags), true, psd),
                    Eigen::VectorXd(m)};
    for (int i = 0; i < m; ++i) p.y[i] = *bags[i].label;
    return p;
}

// Pseudo-inverse of the normal-equation matrix applied to K^T y.
inline Eigen::VectorXd oracle_coefficient(const Eigen::MatrixXd& k, const Eigen::VectorXd& y,
                                          double lambda) {
    const double m = static_cast<double>(k.rows());
    Eigen::MatrixXd a = k.transpose() * k;
    a.diagonal().array() += lambda * m * m;
    const Eigen::MatrixXd pinv = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(a).pseudoInverse();
    return pinv * (k.transpose() * y);
}

inline Eigen::VectorXd oracle_krr(const Eigen::MatrixXd& k, const Eigen::VectorXd& y,
                                  double lambda) {
    Eigen::MatrixXd a = k;
    a.diagonal().array() += lambda * static_cast<double>(k.rows());
    return a.fullPivLu().inverse() * y;
}

inline double rel_error(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
    return (got - want).norm() / std::max(want.norm(), 1e-300);
}

// Frozen smooth saturation fixture: 60 training bags of 30 points, 100 test
// bags, smooth_composite with noise 0.05, embedding gaussian bw 0.1, outer
// gaussian sigma 0.5, seed 7. The ratio was measured once and is pinned as a
// regression value.
inline SaturationConfig smooth_saturation_fixture() {
    SaturationConfig c;
    c.meta.dim = 1;
    c.meta.scale = 0.1;
    c.meta.target = TargetFamily::smooth_composite;
    c.meta.noise_sd = 0.05;
    c.meta.seed = 7;
    c.embedding.bandwidth = 0.1;
    c.outer = OuterKernelSpec::gaussian(0.5);
    c.m = 60;
    c.n = 30;
    c.n_test = 100;
    return c;
}

inline constexpr double kSmoothSaturationRatio = 0.9995245105;

}  // namespace distreg::testing
