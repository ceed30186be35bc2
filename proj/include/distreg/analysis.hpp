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
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "distreg/gram.hpp"
#include "distreg/solver.hpp"
#include "distreg/synth.hpp"

namespace distreg {

// ---------------------------------------------------------------------------
// Spectral diagnostics
// ---------------------------------------------------------------------------

/// N(lambda) = sum_l s_l / (s_l + lambda). Throws ConfigError for lambda <= 0.
double effective_dimension(const Eigen::VectorXd& singular_values, double lambda);
double effective_dimension(const SpectrumReport& report, double lambda);

/// (alpha c_alpha / (alpha - 1)) lambda^{-1/alpha}, the capacity bound for
/// spectra with s_l <= c_alpha l^{-alpha}.
double capacity_bound(double alpha, double c_alpha, double lambda);

/// Values below this are treated as numerical noise by the decay fit.
inline constexpr double kSpectrumFloor = 1e-12;

/// Negated least-squares slope of log s_l against log l over the first
/// `head` singular values, skipping values below kSpectrumFloor. Throws
/// InputError when fewer than three usable values remain.
double fit_decay_exponent(const SpectrumReport& report, std::size_t head);
double fit_decay_exponent(const Eigen::VectorXd& singular_values, std::size_t head);

// ---------------------------------------------------------------------------
// Theory schedules for lambda and N
// ---------------------------------------------------------------------------

struct ScheduleParams {
    double r = 1.0;             // regularity index
    double alpha_decay = 2.0;   // singular-value decay exponent
    double h = 1.0;             // Hoelder exponent
    double kappa4_scale = 1.0;  // stands in for the unknown kappa^4 factor

    /// Throws ConfigError unless r > 0, alpha_decay > 1, 0 < h <= 1 and
    /// kappa4_scale > 0.
    void validate() const;
};

struct Schedule {
    double beta = 0.0;
    double zeta = 0.0;
    double lambda = 0.0;
    double n_real = 0.0;    // m^zeta ln m before rounding
    std::uint64_t n = 0;    // ceil(n_real), saturating at UINT64_MAX
};

/// beta = 2a/(2ar+1), zeta = (3a+2ar)/(h(2ar+1)) for r <= 2 (r < 1/2 uses
/// the same branch); beta = 2a/(4a+1), zeta = 7a/(h(4a+1)) for r > 2.
/// lambda = kappa4_scale m^-beta, N = ceil(m^zeta ln m). Requires m >= 3.
Schedule schedule(const ScheduleParams& params, std::size_t m);

/// The same formulas without the parameter range checks (m >= 3 is still
/// required). Covers boundary cases such as alpha = 1.
Schedule schedule_formula(const ScheduleParams& params, std::size_t m);

// ---------------------------------------------------------------------------
// Rate fitting
// ---------------------------------------------------------------------------

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;  // 1 when the errors are constant
    std::vector<std::pair<double, double>> points;  // (m, error)
};

/// Least-squares line through (log m, log error). Needs at least three
/// points with m > 0 and error > 0 (InputError otherwise).
RateFit rate_fit(std::span<const std::pair<double, double>> points);

/// `count` logarithmically spaced values from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t count);

// ---------------------------------------------------------------------------
// Held-out lambda selection
// ---------------------------------------------------------------------------

struct LambdaSelection {
    double lambda = 0.0;
    std::vector<double> grid;
    std::vector<double> validation_mse;  // +inf where the fit failed
};

/// Splits the bags behind `g` into train/validation parts (train_fraction
/// of them, at least one on each side, shuffled with `seed`), fits on the
/// train part for every grid value and keeps the lambda with the smallest
/// validation MSE against the noisy labels. Ties go to the earlier grid entry.
LambdaSelection select_lambda(Scheme scheme, const GramMatrix& g, const Eigen::VectorXd& y,
                              std::span<const double> grid, double train_fraction,
                              std::uint64_t seed);

// ---------------------------------------------------------------------------
// Learning-rate experiment
// ---------------------------------------------------------------------------

enum class LambdaModeKind { fixed, grid, schedule };

struct LambdaMode {
    LambdaModeKind kind = LambdaModeKind::grid;
    double fixed_value = 1e-3;
    double grid_min = 1e-8;
    double grid_max = 1e-1;
    std::size_t grid_count = 10;
};

struct RateExperimentConfig {
    MetaDistributionSpec meta;
    EmbeddingKernelSpec embedding;
    OuterKernelSpec outer;
    Scheme scheme = Scheme::coefficient_l2;
    LambdaMode lambda;
    ScheduleParams schedule;          // sets N, and lambda in schedule mode
    std::vector<std::size_t> m_values;
    std::size_t replications = 10;
    std::size_t n_max = 2000;         // cap on the scheduled N
    std::size_t n_test = 100;
    double train_fraction = 0.7;
    unsigned threads = 0;
};

struct RateRow {
    std::size_t m = 0;
    std::size_t n = 0;
    double lambda = 0.0;
    std::size_t rep = 0;
    Scheme scheme = Scheme::coefficient_l2;
    double error = 0.0;
};

struct RatePoint {
    std::size_t m = 0;
    std::size_t n = 0;
    std::uint64_t n_scheduled = 0;
    bool n_capped = false;
    double median_error = 0.0;
};

struct RateExperimentResult {
    std::vector<RateRow> rows;       // ordered by (m, rep)
    std::vector<RatePoint> per_m;
    std::optional<RateFit> fit;      // absent with fewer than three m values
};

/// For every (m, rep): generate m training bags and n_test test bags with
/// N = min(n_max, scheduled N) points each, choose lambda, fit, and record
/// the excess error against the noiseless targets. The slope is fitted on
/// the per-m median errors. Output is independent of the thread count.
RateExperimentResult run_rate_experiment(const RateExperimentConfig& config);

double median(std::vector<double> values);

// ---------------------------------------------------------------------------
// Saturation comparison
// ---------------------------------------------------------------------------

struct SaturationConfig {
    MetaDistributionSpec meta;  // typically the smooth_composite target
    EmbeddingKernelSpec embedding;
    OuterKernelSpec outer;      // must be symmetric and PSD
    std::size_t m = 100;
    std::size_t n = 50;
    std::size_t n_test = 200;
    std::vector<double> lambda_grid;  // empty: log_grid(1e-8, 1e-1, 10)
    double train_fraction = 0.7;
    unsigned threads = 0;
};

struct SchemeOutcome {
    double selected_lambda = 0.0;
    double excess_error = 0.0;
    std::vector<double> validation_mse;
};

struct SaturationReport {
    SchemeOutcome coefficient;
    SchemeOutcome krr;
    std::vector<double> lambda_grid;
    double ratio = 0.0;  // coefficient error / KRR error
    std::string winner;  // "coefficient_l2", "krr" or "tie"
};

/// Fits both schemes on one shared dataset and split, each with its own
/// held-out lambda, and compares excess errors on a common test set.
/// Throws ContractError for kernels that are not symmetric PSD.
SaturationReport saturation_compare(const SaturationConfig& config);

}  // namespace distreg
