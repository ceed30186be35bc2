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
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace distreg {

/// Points of one bag, one row per point.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Base-space kernels. All three satisfy k(s,s) = 1 and 0 < k <= 1:
///   gaussian     exp(-|s-t|^2 / (2 bw^2))
///   exponential  exp(-|s-t| / bw)
///   cauchy       1 / (1 + |s-t|^2 / bw^2)
enum class EmbeddingFamily { gaussian, exponential, cauchy };

std::string_view to_string(EmbeddingFamily family);
EmbeddingFamily parse_embedding_family(std::string_view name);

struct EmbeddingKernelSpec {
    EmbeddingFamily family = EmbeddingFamily::gaussian;
    double bandwidth = 1.0;
    int dim = 1;

    /// sup_s k(s,s); identical for every supported family.
    static constexpr double bound = 1.0;

    /// Throws ConfigError unless bandwidth > 0 and dim >= 1.
    void validate() const;

    /// Hoelder exponent h of the Gaussian-on-embedding map induced by this
    /// family (1 for gaussian and cauchy, 1/2 for exponential). The Hoelder
    /// constant L is not estimated.
    double holder_exponent() const;
};

/// Distribution parameters a synthetic bag was drawn from: a Gaussian with
/// mean theta and isotropic scale, truncated to the unit cube.
struct BagParams {
    Eigen::VectorXd theta;
    double scale = 0.0;
};

/// One second-stage sample with its (optional) first-stage label.
struct Bag {
    std::string id;
    PointMatrix points;
    std::optional<double> label;
    std::optional<BagParams> params;

    Eigen::Index size() const { return points.rows(); }
    Eigen::Index dim() const { return points.cols(); }
};

/// Throws InputError if the bag is empty, has non-finite coordinates, or
/// its dimension differs from spec.dim.
void validate_bag(const EmbeddingKernelSpec& spec, const Bag& bag);

/// k(s,t). Throws InputError on dimension mismatch.
double kernel_eval(const EmbeddingKernelSpec& spec, std::span<const double> s,
                   std::span<const double> t);

/// Cascade summation: fixed binary split down to blocks of 8.
double pairwise_sum(std::span<const double> values);

/// <mu_a, mu_b> = (1/(Na Nb)) sum_i sum_j k(a_i, b_j), computed exactly with
/// O(Na Nb) kernel evaluations. The result is bitwise symmetric in (a, b)
/// and invariant to point order within each bag.
double embed_inner(const EmbeddingKernelSpec& spec, const Bag& a, const Bag& b);

/// |mu_a - mu_b|^2 in H_k, clamped at zero.
double embed_sq_dist(const EmbeddingKernelSpec& spec, const Bag& a, const Bag& b);

/// Rows sorted lexicographically. Inner products are evaluated on this form.
PointMatrix canonical_points(const PointMatrix& points);

/// embed_inner on bags already in canonical form; no validation.
double embed_inner_canonical(const EmbeddingKernelSpec& spec, const PointMatrix& a,
                             const PointMatrix& b);

/// Squared distance from three inner products, clamped at zero.
inline double sq_dist_from_inner(double aa, double bb, double ab) {
    const double d = aa + bb - 2.0 * ab;
    return d > 0.0 ? d : 0.0;
}

}  // namespace distreg
