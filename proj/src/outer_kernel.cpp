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
#include "distreg/outer_kernel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "distreg/errors.hpp"

namespace distreg {

namespace {

constexpr double kSymmetryTolerance = 1e-10;

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

class Fnv1a {
public:
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            hash_ ^= p[i];
            hash_ *= 0x100000001b3ULL;
        }
    }
    void u64(std::uint64_t v) { bytes(&v, sizeof v); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(std::string_view s) {
        u64(s.size());
        bytes(s.data(), s.size());
    }
    std::uint64_t value() const { return hash_; }

private:
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace

std::string_view to_string(OuterFamily family) {
    switch (family) {
        case OuterFamily::gaussian_on_embedding: return "gaussian_on_embedding";
        case OuterFamily::linear_embedding: return "linear_embedding";
        case OuterFamily::dog_indefinite: return "dog_indefinite";
        case OuterFamily::tanh_indefinite: return "tanh_indefinite";
        case OuterFamily::tilted_asymmetric: return "tilted_asymmetric";
    }
    return "unknown";
}

OuterFamily parse_outer_family(std::string_view name) {
    for (auto f : {OuterFamily::gaussian_on_embedding, OuterFamily::linear_embedding,
                   OuterFamily::dog_indefinite, OuterFamily::tanh_indefinite,
                   OuterFamily::tilted_asymmetric}) {
        if (name == to_string(f)) return f;
    }
    throw ConfigError("unknown outer kernel family '" + std::string(name) + "'");
}

bool OuterKernelSpec::symmetric() const { return family != OuterFamily::tilted_asymmetric; }

bool OuterKernelSpec::psd_claimed() const {
    return family == OuterFamily::gaussian_on_embedding ||
           family == OuterFamily::linear_embedding;
}

void OuterKernelSpec::validate() const {
    switch (family) {
        case OuterFamily::gaussian_on_embedding:
            if (!positive(sigma)) throw ConfigError("gaussian_on_embedding: sigma must be positive");
            break;
        case OuterFamily::linear_embedding:
            break;
        case OuterFamily::dog_indefinite:
            if (!positive(sigma1) || !positive(sigma2) || !positive(c))
                throw ConfigError("dog_indefinite: sigma1, sigma2 and c must be positive");
            if (sigma1 == sigma2) throw ConfigError("dog_indefinite: sigma2 must differ from sigma1");
            break;
        case OuterFamily::tanh_indefinite:
            if (!positive(scale) || !positive(offset))
                throw ConfigError("tanh_indefinite: scale and offset must be positive");
            break;
        case OuterFamily::tilted_asymmetric:
            if (!positive(sigma)) throw ConfigError("tilted_asymmetric: sigma must be positive");
            if (!(c >= 0.0) || !std::isfinite(c))
                throw ConfigError("tilted_asymmetric: tilt coefficient must be non-negative");
            if (!reference) throw ConfigError("tilted_asymmetric requires a reference bag");
            break;
    }
}

OuterKernelSpec OuterKernelSpec::gaussian(double sigma) {
    OuterKernelSpec k;
    k.family = OuterFamily::gaussian_on_embedding;
    k.sigma = sigma;
    return k;
}

OuterKernelSpec OuterKernelSpec::linear() {
    OuterKernelSpec k;
    k.family = OuterFamily::linear_embedding;
    return k;
}

OuterKernelSpec OuterKernelSpec::dog(double sigma1, double sigma2, double c) {
    OuterKernelSpec k;
    k.family = OuterFamily::dog_indefinite;
    k.sigma1 = sigma1;
    k.sigma2 = sigma2;
    k.c = c;
    return k;
}

OuterKernelSpec OuterKernelSpec::tanh(double scale, double offset) {
    OuterKernelSpec k;
    k.family = OuterFamily::tanh_indefinite;
    k.scale = scale;
    k.offset = offset;
    return k;
}

OuterKernelSpec OuterKernelSpec::tilted(double sigma, double c,
                                        std::shared_ptr<const Bag> reference) {
    OuterKernelSpec k;
    k.family = OuterFamily::tilted_asymmetric;
    k.sigma = sigma;
    k.c = c;
    k.reference = std::move(reference);
    return k;
}

double outer_from_geometry(const OuterKernelSpec& kspec, double inner, double sq_dist,
                           double first_ref_inner) {
    switch (kspec.family) {
        case OuterFamily::gaussian_on_embedding:
            return std::exp(-sq_dist / (2.0 * kspec.sigma * kspec.sigma));
        case OuterFamily::linear_embedding:
            return inner;
        case OuterFamily::dog_indefinite:
            return std::exp(-sq_dist / (2.0 * kspec.sigma1 * kspec.sigma1)) -
                   kspec.c * std::exp(-sq_dist / (2.0 * kspec.sigma2 * kspec.sigma2));
        case OuterFamily::tanh_indefinite:
            return std::tanh(kspec.scale * inner + kspec.offset);
        case OuterFamily::tilted_asymmetric:
            return std::exp(-sq_dist / (2.0 * kspec.sigma * kspec.sigma)) *
                   (1.0 + kspec.c * first_ref_inner);
    }
    throw ConfigError("unknown outer kernel family");
}

double outer_eval(const OuterKernelSpec& kspec, const EmbeddingKernelSpec& espec, const Bag& a,
                  const Bag& b) {
    kspec.validate();
    espec.validate();
    validate_bag(espec, a);
    validate_bag(espec, b);
    const PointMatrix ca = canonical_points(a.points);
    const PointMatrix cb = canonical_points(b.points);
    const double ab = embed_inner_canonical(espec, ca, cb);
    const double aa = embed_inner_canonical(espec, ca, ca);
    const double bb = embed_inner_canonical(espec, cb, cb);
    double tilt = 0.0;
    if (kspec.family == OuterFamily::tilted_asymmetric) {
        validate_bag(espec, *kspec.reference);
        tilt = embed_inner_canonical(espec, ca, canonical_points(kspec.reference->points));
    }
    return outer_from_geometry(kspec, ab, sq_dist_from_inner(aa, bb, ab), tilt);
}

SymmetryCheck check_symmetry(const OuterKernelSpec& kspec, const EmbeddingKernelSpec& espec,
                             std::span<const Bag> bags) {
    SymmetryCheck out;
    for (std::size_t i = 0; i < bags.size(); ++i) {
        for (std::size_t j = i + 1; j < bags.size(); ++j) {
            const double diff = std::abs(outer_eval(kspec, espec, bags[i], bags[j]) -
                                         outer_eval(kspec, espec, bags[j], bags[i]));
            out.max_asymmetry = std::max(out.max_asymmetry, diff);
        }
    }
    out.symmetric = out.max_asymmetry <= kSymmetryTolerance;
    return out;
}

std::uint64_t kernel_fingerprint(const OuterKernelSpec& kspec, const EmbeddingKernelSpec& espec) {
    Fnv1a h;
    h.str(to_string(espec.family));
    h.f64(espec.bandwidth);
    h.u64(static_cast<std::uint64_t>(espec.dim));
    h.str(to_string(kspec.family));
    switch (kspec.family) {
        case OuterFamily::gaussian_on_embedding:
            h.f64(kspec.sigma);
            break;
        case OuterFamily::linear_embedding:
            break;
        case OuterFamily::dog_indefinite:
            h.f64(kspec.sigma1);
            h.f64(kspec.sigma2);
            h.f64(kspec.c);
            break;
        case OuterFamily::tanh_indefinite:
            h.f64(kspec.scale);
            h.f64(kspec.offset);
            break;
        case OuterFamily::tilted_asymmetric:
            h.f64(kspec.sigma);
            h.f64(kspec.c);
            if (kspec.reference) {
                h.str(kspec.reference->id);
                const PointMatrix& p = kspec.reference->points;
                h.u64(static_cast<std::uint64_t>(p.rows()));
                h.u64(static_cast<std::uint64_t>(p.cols()));
                for (Eigen::Index i = 0; i < p.size(); ++i) h.f64(p.data()[i]);
            }
            break;
    }
    return h.value();
}

}  // namespace distreg
