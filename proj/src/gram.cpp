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
#include "distreg/gram.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "distreg/errors.hpp"
#include "distreg/parallel.hpp"

namespace distreg {

namespace {

// Canonical points and self inner products for one list of bags.
struct EmbeddedBags {
    std::vector<PointMatrix> canonical;
    std::vector<double> self_inner;
    std::vector<double> ref_inner;  // <mu_i, mu_ref>; tilted kernels only
};

EmbeddedBags embed_all(const OuterKernelSpec& kspec, const EmbeddingKernelSpec& espec,
                       std::span<const Bag> bags, unsigned threads) {
    for (const Bag& b : bags) validate_bag(espec, b);
    EmbeddedBags out;
    out.canonical.resize(bags.size());
    out.self_inner.resize(bags.size());
    const bool tilted = kspec.family == OuterFamily::tilted_asymmetric;
    PointMatrix ref;
    if (tilted) {
        validate_bag(espec, *kspec.reference);
        ref = canonical_points(kspec.reference->points);
        out.ref_inner.resize(bags.size());
    }
    parallel_for(bags.size(), threads, [&](std::size_t i) {
        out.canonical[i] = canonical_points(bags[i].points);
        out.self_inner[i] = embed_inner_canonical(espec, out.canonical[i], out.canonical[i]);
        if (tilted) out.ref_inner[i] = embed_inner_canonical(espec, out.canonical[i], ref);
    });
    return out;
}

std::vector<std::string> ids_of(std::span<const Bag> bags) {
    std::vector<std::string> ids;
    ids.reserve(bags.size());
    for (const Bag& b : bags) ids.push_back(b.id);
    return ids;
}

}  // namespace

GramMatrix GramMatrix::from_values(Eigen::MatrixXd values, bool symmetric, bool psd_claimed) {
    GramMatrix g;
    for (Eigen::Index i = 0; i < values.rows(); ++i) g.row_ids.push_back(std::to_string(i));
    for (Eigen::Index j = 0; j < values.cols(); ++j) g.col_ids.push_back(std::to_string(j));
    g.values = std::move(values);
    g.symmetric = symmetric;
    g.psd_claimed = psd_claimed;
    return g;
}

GramMatrix build_gram(const OuterKernelSpec& kspec, const EmbeddingKernelSpec& espec,
                      std::span<const Bag> bags, unsigned threads) {
    kspec.validate();
    espec.validate();
    if (bags.empty()) throw InputError("build_gram: at least one bag is required");
    const EmbeddedBags emb = embed_all(kspec, espec, bags, threads);
    const std::size_t m = bags.size();

    // Upper triangle including the diagonal, row-major.
    const std::size_t pairs = m * (m + 1) / 2;
    std::vector<double> inner(pairs);
    std::vector<std::size_t> row_start(m);
    for (std::size_t i = 0, off = 0; i < m; off += m - i, ++i) row_start[i] = off;
    parallel_for(m, threads, [&](std::size_t i) {
        inner[row_start[i]] = emb.self_inner[i];
        for (std::size_t j = i + 1; j < m; ++j)
            inner[row_start[i] + (j - i)] =
                embed_inner_canonical(espec, emb.canonical[i], emb.canonical[j]);
    });

    const bool tilted = kspec.family == OuterFamily::tilted_asymmetric;
    GramMatrix g;
    g.values.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) {
            const double ab = inner[row_start[i] + (j - i)];
            const double d2 = sq_dist_from_inner(emb.self_inner[i], emb.self_inner[j], ab);
            g.values(i, j) = outer_from_geometry(kspec, ab, d2, tilted ? emb.ref_inner[i] : 0.0);
            g.values(j, i) = tilted ? outer_from_geometry(kspec, ab, d2, emb.ref_inner[j])
                                    : g.values(i, j);
        }
    }
    g.row_ids = ids_of(bags);
    g.col_ids = g.row_ids;
    g.kernel_fingerprint = kernel_fingerprint(kspec, espec);
    g.symmetric = kspec.symmetric();
    g.psd_claimed = kspec.psd_claimed();
    return g;
}

Eigen::MatrixXd build_cross_gram(const OuterKernelSpec& kspec, const EmbeddingKernelSpec& espec,
                                 std::span<const Bag> test_bags,
                                 std::span<const Bag> train_bags, unsigned threads) {
    kspec.validate();
    espec.validate();
    if (train_bags.empty()) throw InputError("build_cross_gram: no training bags");
    const EmbeddedBags test = embed_all(kspec, espec, test_bags, threads);
    const EmbeddedBags train = embed_all(kspec, espec, train_bags, threads);
    const bool tilted = kspec.family == OuterFamily::tilted_asymmetric;

    Eigen::MatrixXd out(static_cast<Eigen::Index>(test_bags.size()),
                        static_cast<Eigen::Index>(train_bags.size()));
    parallel_for(test_bags.size(), threads, [&](std::size_t t) {
        for (std::size_t i = 0; i < train_bags.size(); ++i) {
            const double ab = embed_inner_canonical(espec, test.canonical[t], train.canonical[i]);
            const double d2 = sq_dist_from_inner(test.self_inner[t], train.self_inner[i], ab);
            out(t, i) = outer_from_geometry(kspec, ab, d2, tilted ? test.ref_inner[t] : 0.0);
        }
    });
    return out;
}

SpectrumReport spectrum(const GramMatrix& g) {
    const Eigen::MatrixXd& a = g.values;
    if (a.rows() != a.cols()) throw InputError("spectrum: matrix is not square");
    if (a.rows() == 0) throw InputError("spectrum: empty matrix");
    const Eigen::Index m = a.rows();
    const Eigen::MatrixXd scaled = a / static_cast<double>(m);

    SpectrumReport report;
    report.m = m;
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    const bool symmetric = (a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale;
    if (symmetric) {
        const Eigen::MatrixXd sym = 0.5 * (scaled + scaled.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
        if (eig.info() != Eigen::Success) throw NumericalError("spectrum: eigensolver failed");
        Eigen::VectorXd ev = eig.eigenvalues().reverse();  // ascending -> descending
        Eigen::VectorXd sv = ev.cwiseAbs();
        std::sort(sv.begin(), sv.end(), std::greater<>());
        report.eigenvalues = std::move(ev);
        report.singular_values = std::move(sv);
    } else {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(scaled);
        report.singular_values = svd.singularValues();
    }
    return report;
}

}  // namespace distreg
