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
#include <memory>
#include <span>
#include <string_view>

#include "distreg/embedding.hpp"

namespace distreg {

/// Kernels K on mean embeddings, written in terms of D^2 = |mu_a - mu_b|^2
/// and <mu_a, mu_b>:
///   gaussian_on_embedding  exp(-D^2 / (2 sigma^2))                      PSD
///   linear_embedding       <mu_a, mu_b>                                 PSD
///   dog_indefinite         exp(-D^2/(2 sigma1^2)) - c exp(-D^2/(2 sigma2^2))
///   tanh_indefinite        tanh(scale <mu_a, mu_b> + offset)
///   tilted_asymmetric      exp(-D^2/(2 sigma^2)) (1 + c <mu_a, mu_ref>)
/// The tilted kernel depends on its first argument through the tilt only,
/// so K(a,b) != K(b,a) in general.
enum class OuterFamily {
    gaussian_on_embedding,
    linear_embedding,
    dog_indefinite,
    tanh_indefinite,
    tilted_asymmetric,
};

std::string_view to_string(OuterFamily family);
OuterFamily parse_outer_family(std::string_view name);

struct OuterKernelSpec {
    OuterFamily family = OuterFamily::gaussian_on_embedding;
    double sigma = 1.0;   // gaussian_on_embedding, tilted_asymmetric
    double sigma1 = 1.0;  // dog_indefinite
    double sigma2 = 2.0;  // dog_indefinite
    double c = 1.0;       // dog weight, or tilt coefficient
    double scale = 1.0;   // tanh_indefinite
    double offset = 1.0;  // tanh_indefinite
    std::shared_ptr<const Bag> reference;  // tilted_asymmetric

    bool symmetric() const;
    bool psd_claimed() const;

    /// Throws ConfigError on non-positive parameters, sigma1 == sigma2, or a
    /// tilted kernel without a reference bag. The tilt coefficient may be 0.
    void validate() const;

    static OuterKernelSpec gaussian(double sigma);
    static OuterKernelSpec linear();
    static OuterKernelSpec dog(double sigma1, double sigma2, double c);
    static OuterKernelSpec tanh(double scale, double offset);
    static OuterKernelSpec tilted(double sigma, double c, std::shared_ptr<const Bag> reference);
};

/// K from embedding geometry. `first_ref_inner` is <mu_first, mu_ref> and is
/// only read by the tilted family.
double outer_from_geometry(const OuterKernelSpec& kspec, double inner, double sq_dist,
                           double first_ref_inner);

/// K(mu_a, mu_b) with `a` in the first slot.
double outer_eval(const OuterKernelSpec& kspec, const EmbeddingKernelSpec& espec, const Bag& a,
                  const Bag& b);

struct SymmetryCheck {
    bool symmetric = true;
    double max_asymmetry = 0.0;
};

/// max_{i,j} |K(i,j) - K(j,i)| over the bags; symmetric iff <= 1e-10.
SymmetryCheck check_symmetry(const OuterKernelSpec& kspec, const EmbeddingKernelSpec& espec,
                             std::span<const Bag> bags);

/// FNV-1a hash over a canonical encoding of both kernel specs, including
/// the tilt reference bag.
std::uint64_t kernel_fingerprint(const OuterKernelSpec& kspec, const EmbeddingKernelSpec& espec);

}  // namespace distreg
