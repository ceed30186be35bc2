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
#include "distreg/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "distreg/errors.hpp"

namespace distreg {

namespace {

// Evaluates k as a function of squared distance with the per-spec constant
// hoisted out of the inner loop.
class KernelOnSqDist {
public:
    explicit KernelOnSqDist(const EmbeddingKernelSpec& spec)
        : family_(spec.family), bandwidth_(spec.bandwidth) {
        switch (family_) {
            case EmbeddingFamily::gaussian:
                coef_ = -0.5 / (bandwidth_ * bandwidth_);
                break;
            case EmbeddingFamily::exponential:
                coef_ = -1.0 / bandwidth_;
                break;
            case EmbeddingFamily::cauchy:
                coef_ = 1.0 / (bandwidth_ * bandwidth_);
                break;
        }
    }

    double operator()(double d2) const {
        switch (family_) {
            case EmbeddingFamily::gaussian:
                return std::exp(coef_ * d2);
            case EmbeddingFamily::exponential:
                return std::exp(coef_ * std::sqrt(d2));
            case EmbeddingFamily::cauchy:
                return 1.0 / (1.0 + coef_ * d2);
        }
        return 0.0;
    }

private:
    EmbeddingFamily family_;
    double bandwidth_;
    double coef_ = 0.0;
};

inline double sq_dist(const double* s, const double* t, Eigen::Index dim) {
    double d2 = 0.0;
    for (Eigen::Index k = 0; k < dim; ++k) {
        const double diff = s[k] - t[k];
        d2 += diff * diff;
    }
    return d2;
}

bool rows_less(const PointMatrix& m, Eigen::Index i, Eigen::Index j) {
    const double* a = m.row(i).data();
    const double* b = m.row(j).data();
    return std::lexicographical_compare(a, a + m.cols(), b, b + m.cols());
}

// Total order on canonical point sets: size first, then coordinates.
bool canonical_less(const PointMatrix& a, const PointMatrix& b) {
    if (a.rows() != b.rows()) return a.rows() < b.rows();
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(),
                                        b.data() + b.size());
}

}  // namespace

std::string_view to_string(EmbeddingFamily family) {
    switch (family) {
        case EmbeddingFamily::gaussian: return "gaussian";
        case EmbeddingFamily::exponential: return "exponential";
        case EmbeddingFamily::cauchy: return "cauchy";
    }
    return "unknown";
}

EmbeddingFamily parse_embedding_family(std::string_view name) {
    if (name == "gaussian") return EmbeddingFamily::gaussian;
    if (name == "exponential") return EmbeddingFamily::exponential;
    if (name == "cauchy") return EmbeddingFamily::cauchy;
    throw ConfigError("unknown embedding kernel family '" + std::string(name) + "'");
}

void EmbeddingKernelSpec::validate() const {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
        throw ConfigError("embedding kernel bandwidth must be positive");
    if (dim < 1) throw ConfigError("embedding kernel dimension must be >= 1");
}

double EmbeddingKernelSpec::holder_exponent() const {
    return family == EmbeddingFamily::exponential ? 0.5 : 1.0;
}

void validate_bag(const EmbeddingKernelSpec& spec, const Bag& bag) {
    if (bag.size() == 0) throw InputError("bag '" + bag.id + "' is empty");
    if (bag.dim() != spec.dim)
        throw InputError("bag '" + bag.id + "' has dimension " + std::to_string(bag.dim()) +
                         ", expected " + std::to_string(spec.dim));
    if (!bag.points.allFinite())
        throw InputError("bag '" + bag.id + "' has non-finite coordinates");
}

double kernel_eval(const EmbeddingKernelSpec& spec, std::span<const double> s,
                   std::span<const double> t) {
    spec.validate();
    if (s.size() != static_cast<std::size_t>(spec.dim) || t.size() != s.size())
        throw InputError("kernel_eval: point dimension does not match kernel dimension " +
                         std::to_string(spec.dim));
    return KernelOnSqDist(spec)(sq_dist(s.data(), t.data(), spec.dim));
}

double pairwise_sum(std::span<const double> values) {
    constexpr std::size_t block = 8;
    if (values.size() <= block) {
        double acc = 0.0;
        for (double v : values) acc += v;
        return acc;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

PointMatrix canonical_points(const PointMatrix& points) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(points.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
        return rows_less(points, i, j);
    });
    PointMatrix sorted(points.rows(), points.cols());
    for (Eigen::Index r = 0; r < points.rows(); ++r) sorted.row(r) = points.row(order[r]);
    return sorted;
}

double embed_inner_canonical(const EmbeddingKernelSpec& spec, const PointMatrix& a,
                             const PointMatrix& b) {
    const PointMatrix& first = canonical_less(b, a) ? b : a;
    const PointMatrix& second = (&first == &a) ? b : a;
    const KernelOnSqDist k(spec);
    const Eigen::Index dim = first.cols();

    std::vector<double> row(static_cast<std::size_t>(second.rows()));
    std::vector<double> row_sums(static_cast<std::size_t>(first.rows()));
    for (Eigen::Index i = 0; i < first.rows(); ++i) {
        const double* s = first.row(i).data();
        for (Eigen::Index j = 0; j < second.rows(); ++j)
            row[j] = k(sq_dist(s, second.row(j).data(), dim));
        row_sums[i] = pairwise_sum(row);
    }
    return pairwise_sum(row_sums) /
           (static_cast<double>(first.rows()) * static_cast<double>(second.rows()));
}

double embed_inner(const EmbeddingKernelSpec& spec, const Bag& a, const Bag& b) {
    spec.validate();
    validate_bag(spec, a);
    validate_bag(spec, b);
    return embed_inner_canonical(spec, canonical_points(a.points), canonical_points(b.points));
}

double embed_sq_dist(const EmbeddingKernelSpec& spec, const Bag& a, const Bag& b) {
    spec.validate();
    validate_bag(spec, a);
    validate_bag(spec, b);
    const PointMatrix ca = canonical_points(a.points);
    const PointMatrix cb = canonical_points(b.points);
    return sq_dist_from_inner(embed_inner_canonical(spec, ca, ca),
                              embed_inner_canonical(spec, cb, cb),
                              embed_inner_canonical(spec, ca, cb));
}

}  // namespace distreg
