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
#include "distreg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "distreg/errors.hpp"
#include "distreg/parallel.hpp"

namespace distreg {

namespace {

constexpr std::uint64_t kTrainDomain = 0x747261696eULL;  // "train"
constexpr std::uint64_t kTestDomain = 0x74657374ULL;     // "test"
constexpr std::uint64_t kSplitDomain = 0x73706c6974ULL;  // "split"

struct Line {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

Line least_squares_line(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw InputError("line fit needs at least two distinct abscissae");
    Line line;
    line.slope = sxy / sxx;
    line.intercept = my - line.slope * mx;
    if (syy > 0.0) {
        double ss_res = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - (line.intercept + line.slope * x[i]);
            ss_res += r * r;
        }
        line.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    } else {
        line.r_squared = 1.0;
    }
    return line;
}

std::vector<Eigen::Index> shuffled_indices(std::size_t m, std::uint64_t seed) {
    std::vector<Eigen::Index> idx(m);
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::mt19937_64 rng(seed);
    // Fisher-Yates with an explicit draw so the permutation does not depend
    // on the standard library's shuffle implementation.
    for (std::size_t i = m; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& a, std::span<const Eigen::Index> rows,
                          std::span<const Eigen::Index> cols) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = a(rows[i], cols[j]);
    return out;
}

double resolve_lambda(const LambdaMode& mode, const Schedule& sched, Scheme scheme,
                      const GramMatrix& g, const Eigen::VectorXd& y, double train_fraction,
                      std::uint64_t split_seed) {
    switch (mode.kind) {
        case LambdaModeKind::fixed:
            return mode.fixed_value;
        case LambdaModeKind::schedule:
            return sched.lambda;
        case LambdaModeKind::grid: {
            const auto grid = log_grid(mode.grid_min, mode.grid_max, mode.grid_count);
            return select_lambda(scheme, g, y, grid, train_fraction, split_seed).lambda;
        }
    }
    throw ConfigError("unknown lambda mode");
}

}  // namespace

double effective_dimension(const Eigen::VectorXd& singular_values, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw ConfigError("effective_dimension: lambda must be positive");
    double acc = 0.0;
    for (double s : singular_values) acc += s / (s + lambda);
    return acc;
}

double effective_dimension(const SpectrumReport& report, double lambda) {
    return effective_dimension(report.singular_values, lambda);
}

double capacity_bound(double alpha, double c_alpha, double lambda) {
    return alpha * c_alpha / (alpha - 1.0) * std::pow(lambda, -1.0 / alpha);
}

double fit_decay_exponent(const Eigen::VectorXd& singular_values, std::size_t head) {
    std::vector<double> x, y;
    const std::size_t limit = std::min<std::size_t>(head, singular_values.size());
    for (std::size_t l = 0; l < limit; ++l) {
        const double s = singular_values[static_cast<Eigen::Index>(l)];
        if (s <= kSpectrumFloor) continue;
        x.push_back(std::log(static_cast<double>(l + 1)));
        y.push_back(std::log(s));
    }
    if (x.size() < 3)
        throw InputError("fit_decay_exponent: need at least 3 singular values above 1e-12 in "
                         "the head, found " + std::to_string(x.size()));
    return -least_squares_line(x, y).slope;
}

double fit_decay_exponent(const SpectrumReport& report, std::size_t head) {
    return fit_decay_exponent(report.singular_values, head);
}

void ScheduleParams::validate() const {
    if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("schedule: r must be positive");
    if (!(alpha_decay > 1.0) || !std::isfinite(alpha_decay))
        throw ConfigError("schedule: alpha must exceed 1");
    if (!(h > 0.0 && h <= 1.0)) throw ConfigError("schedule: h must lie in (0, 1]");
    if (!(kappa4_scale > 0.0) || !std::isfinite(kappa4_scale))
        throw ConfigError("schedule: kappa4_scale must be positive");
}

Schedule schedule(const ScheduleParams& params, std::size_t m) {
    params.validate();
    return schedule_formula(params, m);
}

Schedule schedule_formula(const ScheduleParams& params, std::size_t m) {
    if (m < 3) throw ConfigError("schedule: m must be at least 3");
    const double a = params.alpha_decay;
    const double r = params.r;
    const double h = params.h;

    Schedule s;
    if (r <= 2.0) {
        s.beta = 2.0 * a / (2.0 * a * r + 1.0);
        s.zeta = (3.0 * a + 2.0 * a * r) / (h * (2.0 * a * r + 1.0));
    } else {
        s.beta = 2.0 * a / (4.0 * a + 1.0);
        s.zeta = 7.0 * a / (h * (4.0 * a + 1.0));
    }
    const double md = static_cast<double>(m);
    s.lambda = params.kappa4_scale * std::pow(md, -s.beta);
    s.n_real = std::pow(md, s.zeta) * std::log(md);
    const double n_ceil = std::ceil(s.n_real);
    constexpr double kMax = static_cast<double>(std::numeric_limits<std::uint64_t>::max());
    s.n = n_ceil >= kMax ? std::numeric_limits<std::uint64_t>::max()
                         : static_cast<std::uint64_t>(n_ceil);
    return s;
}

RateFit rate_fit(std::span<const std::pair<double, double>> points) {
    if (points.size() < 3) throw InputError("rate_fit: at least 3 points are required");
    std::vector<double> x, y;
    for (const auto& [m, err] : points) {
        if (!(m > 0.0)) throw InputError("rate_fit: sample sizes must be positive");
        if (!(err > 0.0) || !std::isfinite(err))
            throw InputError("rate_fit: errors must be positive and finite");
        x.push_back(std::log(m));
        y.push_back(std::log(err));
    }
    const Line line = least_squares_line(x, y);
    RateFit fit;
    fit.slope = line.slope;
    fit.intercept = line.intercept;
    fit.r_squared = line.r_squared;
    fit.points.assign(points.begin(), points.end());
    return fit;
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi >= lo) || count == 0)
        throw ConfigError("log_grid: need 0 < lo <= hi and count >= 1");
    std::vector<double> grid(count);
    if (count == 1) {
        grid[0] = lo;
        return grid;
    }
    const double a = std::log(lo);
    const double step = (std::log(hi) - a) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) grid[i] = std::exp(a + step * static_cast<double>(i));
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

LambdaSelection select_lambda(Scheme scheme, const GramMatrix& g, const Eigen::VectorXd& y,
                              std::span<const double> grid, double train_fraction,
                              std::uint64_t seed) {
    const std::size_t m = static_cast<std::size_t>(g.size());
    if (m < 2) throw InputError("select_lambda: need at least 2 bags to split");
    if (grid.empty()) throw ConfigError("select_lambda: empty lambda grid");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ConfigError("select_lambda: train fraction must lie in (0, 1)");

    const auto order = shuffled_indices(m, seed);
    const std::size_t n_train = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(m))), 1, m - 1);
    const std::span<const Eigen::Index> train(order.data(), n_train);
    const std::span<const Eigen::Index> valid(order.data() + n_train, m - n_train);

    const GramMatrix k_train = GramMatrix::from_values(submatrix(g.values, train, train),
                                                       g.symmetric, g.psd_claimed);
    const Eigen::MatrixXd k_valid = submatrix(g.values, valid, train);
    Eigen::VectorXd y_train(static_cast<Eigen::Index>(train.size()));
    Eigen::VectorXd y_valid(static_cast<Eigen::Index>(valid.size()));
    for (std::size_t i = 0; i < train.size(); ++i) y_train[i] = y[train[i]];
    for (std::size_t i = 0; i < valid.size(); ++i) y_valid[i] = y[valid[i]];

    LambdaSelection sel;
    sel.grid.assign(grid.begin(), grid.end());
    sel.validation_mse.resize(grid.size(), std::numeric_limits<double>::infinity());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        try {
            const Solution s = fit(scheme, k_train, y_train, grid[i]);
            sel.validation_mse[i] =
                (k_valid * s.alpha - y_valid).squaredNorm() / static_cast<double>(valid.size());
        } catch (const NumericalError&) {
            continue;
        }
        if (sel.validation_mse[i] < best) {
            best = sel.validation_mse[i];
            sel.lambda = grid[i];
        }
    }
    if (!std::isfinite(best)) throw NumericalError("select_lambda: every grid fit failed");
    return sel;
}

double median(std::vector<double> values) {
    if (values.empty()) throw InputError("median of an empty set");
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

RateExperimentResult run_rate_experiment(const RateExperimentConfig& cfg) {
    cfg.meta.validate();
    cfg.embedding.validate();
    cfg.outer.validate();
    cfg.schedule.validate();
    if (cfg.replications == 0) throw ConfigError("rate experiment: replications must be >= 1");
    if (cfg.m_values.empty()) throw ConfigError("rate experiment: empty m list");
    if (cfg.n_max == 0) throw ConfigError("rate experiment: n_max must be >= 1");
    if (cfg.n_test == 0) throw ConfigError("rate experiment: n_test must be >= 1");
    for (std::size_t m : cfg.m_values)
        if (m < 3) throw ConfigError("rate experiment: every m must be >= 3");
    if (cfg.scheme == Scheme::krr && (!cfg.outer.symmetric() || !cfg.outer.psd_claimed()))
        throw ContractError("KRR requires positive semi-definite K");
    if (cfg.lambda.kind == LambdaModeKind::fixed && !(cfg.lambda.fixed_value > 0.0))
        throw ConfigError("lambda must be positive");

    RateExperimentResult result;
    for (std::size_t m : cfg.m_values) {
        const Schedule sched = schedule(cfg.schedule, m);
        RatePoint p;
        p.m = m;
        p.n_scheduled = sched.n;
        p.n_capped = sched.n > cfg.n_max;
        p.n = static_cast<std::size_t>(std::min<std::uint64_t>(sched.n, cfg.n_max));
        result.per_m.push_back(p);
    }

    const std::size_t tasks = cfg.m_values.size() * cfg.replications;
    result.rows.resize(tasks);
    parallel_for(tasks, cfg.threads, [&](std::size_t task) {
        const std::size_t mi = task / cfg.replications;
        const std::size_t rep = task % cfg.replications;
        const std::size_t m = cfg.m_values[mi];
        const std::size_t n = result.per_m[mi].n;
        const Schedule sched = schedule(cfg.schedule, m);
        const std::uint64_t key = static_cast<std::uint64_t>(m) * 1'000'003ULL + rep;

        MetaDistributionSpec train_meta = cfg.meta;
        train_meta.seed = stream_seed(cfg.meta.seed, key, kTrainDomain);
        MetaDistributionSpec test_meta = cfg.meta;
        test_meta.seed = stream_seed(cfg.meta.seed, key, kTestDomain);
        const TwoStageDataset train = generate(train_meta, m, n, "train");
        const TwoStageDataset test = generate(test_meta, cfg.n_test, n, "test");

        const GramMatrix g = build_gram(cfg.outer, cfg.embedding, train.bags, 1);
        const Eigen::VectorXd y = labels_of(train.bags);
        const double lambda = resolve_lambda(cfg.lambda, sched, cfg.scheme, g, y,
                                             cfg.train_fraction,
                                             stream_seed(cfg.meta.seed, key, kSplitDomain));
        const Solution s = fit(cfg.scheme, g, y, lambda);
        const Eigen::MatrixXd cross =
            build_cross_gram(cfg.outer, cfg.embedding, test.bags, train.bags, 1);

        RateRow& row = result.rows[task];
        row.m = m;
        row.n = n;
        row.lambda = lambda;
        row.rep = rep;
        row.scheme = cfg.scheme;
        row.error = excess_error(cross * s.alpha, test.targets);
    });

    std::vector<std::pair<double, double>> medians;
    for (std::size_t mi = 0; mi < cfg.m_values.size(); ++mi) {
        std::vector<double> errs;
        for (std::size_t rep = 0; rep < cfg.replications; ++rep)
            errs.push_back(result.rows[mi * cfg.replications + rep].error);
        result.per_m[mi].median_error = median(std::move(errs));
        medians.emplace_back(static_cast<double>(cfg.m_values[mi]), result.per_m[mi].median_error);
    }
    std::vector<double> distinct;
    for (const auto& p : medians) distinct.push_back(p.first);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    const bool all_positive = std::all_of(medians.begin(), medians.end(),
                                          [](const auto& p) { return p.second > 0.0; });
    if (distinct.size() >= 3 && all_positive) result.fit = rate_fit(medians);
    return result;
}

SaturationReport saturation_compare(const SaturationConfig& cfg) {
    if (!cfg.outer.symmetric() || !cfg.outer.psd_claimed())
        throw ContractError(
            "saturation_compare fits KRR, which requires a positive semi-definite K");
    cfg.meta.validate();
    cfg.embedding.validate();
    cfg.outer.validate();
    if (cfg.m < 2 || cfg.n < 1 || cfg.n_test < 1)
        throw ConfigError("saturation_compare: need m >= 2, n >= 1, n_test >= 1");

    SaturationReport report;
    report.lambda_grid = cfg.lambda_grid.empty() ? log_grid(1e-8, 1e-1, 10) : cfg.lambda_grid;

    MetaDistributionSpec train_meta = cfg.meta;
    train_meta.seed = stream_seed(cfg.meta.seed, 0, kTrainDomain);
    MetaDistributionSpec test_meta = cfg.meta;
    test_meta.seed = stream_seed(cfg.meta.seed, 0, kTestDomain);
    const TwoStageDataset train = generate(train_meta, cfg.m, cfg.n, "train");
    const TwoStageDataset test = generate(test_meta, cfg.n_test, cfg.n, "test");

    const GramMatrix g = build_gram(cfg.outer, cfg.embedding, train.bags, cfg.threads);
    const Eigen::VectorXd y = labels_of(train.bags);
    const Eigen::MatrixXd cross =
        build_cross_gram(cfg.outer, cfg.embedding, test.bags, train.bags, cfg.threads);
    const std::uint64_t split_seed = stream_seed(cfg.meta.seed, 0, kSplitDomain);

    auto run = [&](Scheme scheme) {
        const LambdaSelection sel =
            select_lambda(scheme, g, y, report.lambda_grid, cfg.train_fraction, split_seed);
        const Solution s = fit(scheme, g, y, sel.lambda);
        SchemeOutcome out;
        out.selected_lambda = sel.lambda;
        out.validation_mse = sel.validation_mse;
        out.excess_error = excess_error(cross * s.alpha, test.targets);
        return out;
    };
    report.coefficient = run(Scheme::coefficient_l2);
    report.krr = run(Scheme::krr);

    const double ec = report.coefficient.excess_error;
    const double ek = report.krr.excess_error;
    report.ratio = ek > 0.0 ? ec / ek : (ec > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    report.winner = ec < ek ? "coefficient_l2" : (ek < ec ? "krr" : "tie");
    return report;
}

}  // namespace distreg
