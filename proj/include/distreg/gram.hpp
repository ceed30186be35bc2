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
#include <vector>

#include <Eigen/Core>

#include "distreg/outer_kernel.hpp"

namespace distreg {

/// K_m = [K(mu_i, mu_j)] with the row bag in the first kernel slot.
struct GramMatrix {
    Eigen::MatrixXd values;
    std::vector<std::string> row_ids;
    std::vector<std::string> col_ids;
    std::uint64_t kernel_fingerprint = 0;
    bool symmetric = false;
    bool psd_claimed = false;

    Eigen::Index size() const { return values.rows(); }

    /// Wraps an explicit matrix; ids are "0", "1", ... and the fingerprint is 0.
    static GramMatrix from_values(Eigen::MatrixXd values, bool symmetric, bool psd_claimed);
};

/// Training Gram matrix. Embedding inner products are computed once per
/// unordered pair, so the result is bitwise identical for any thread count.
GramMatrix build_gram(const OuterKernelSpec& kspec, const EmbeddingKernelSpec& espec,
                      std::span<const Bag> bags, unsigned threads = 0);

/// (n_test x m) block with entry (t, i) = K(mu_test_t, mu_train_i).
Eigen::MatrixXd build_cross_gram(const OuterKernelSpec& kspec, const EmbeddingKernelSpec& espec,
                                 std::span<const Bag> test_bags,
                                 std::span<const Bag> train_bags, unsigned threads = 0);

/// Spectrum of (1/m) K_m. These are empirical proxies for the spectrum of
/// the integral operator, not the operator spectrum itself.
struct SpectrumReport {
    Eigen::VectorXd singular_values;              // descending, >= 0
    std::optional<Eigen::VectorXd> eigenvalues;   // descending; symmetric input only
    Eigen::Index m = 0;

    static constexpr const char* scale_note =
        "values are for (1/m) K_m, an empirical proxy for the integral-operator spectrum";
};

/// Throws InputError for non-square input. A matrix counts as symmetric
/// when max |A - A^T| <= 1e-10 max(1, max |A|).
SpectrumReport spectrum(const GramMatrix& g);

}  // namespace distreg
