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
#include "distreg/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "distreg/analysis.hpp"
#include "distreg/errors.hpp"
#include "distreg/io.hpp"
#include "distreg/parallel.hpp"

namespace distreg::cli {

namespace {

namespace fs = std::filesystem;
using io::format_double;
using io::json;

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    bool json_output = false;
    unsigned threads = 0;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "Experiment configuration (JSON)");
    cmd->add_option("--seed", o.seed, "Seed for synthetic data and splits");
    cmd->add_option("--out", o.out_dir, "Output directory");
    cmd->add_flag("--json", o.json_output, "Machine-readable output on stdout");
    cmd->add_option("--threads", o.threads, "Worker threads (0: DISTREG_THREADS or all cores)");
}

json load_config(const CommonOptions& o) {
    if (o.config_path.empty()) return json::object();
    const std::string text = io::read_text_file(o.config_path);
    try {
        json cfg = json::parse(text);
        if (!cfg.is_object()) throw ConfigError("configuration must be a JSON object");
        return cfg;
    } catch (const json::parse_error& e) {
        throw ConfigError("configuration '" + o.config_path + "': " + e.what());
    }
}

json section(const json& cfg, const char* key) {
    if (!cfg.contains(key)) return json::object();
    const json& s = cfg.at(key);
    if (!s.is_object()) throw ConfigError(std::string("section '") + key + "' must be an object");
    return s;
}

std::optional<std::uint64_t> resolve_seed(const CommonOptions& o, const json& cfg) {
    if (o.seed) return o.seed;
    if (cfg.contains("seed")) return cfg.at("seed").get<std::uint64_t>();
    return std::nullopt;
}

fs::path prepare_out_dir(const CommonOptions& o, const json& cfg) {
    std::string dir = o.out_dir;
    if (dir.empty()) dir = cfg.value("out", std::string("."));
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw IoError("cannot create output directory '" + dir + "'");
    const fs::path probe = fs::path(dir) / ".distreg_write_probe";
    io::write_text_file(probe, "");
    fs::remove(probe, ec);
    return dir;
}

MetaDistributionSpec meta_from_json(const json& synth, std::optional<std::uint64_t> seed) {
    if (!seed) throw ConfigError("synthetic data requires a seed (--seed or \"seed\")");
    MetaDistributionSpec meta;
    meta.dim = synth.value("dim", 1);
    meta.scale = synth.value("scale", meta.scale);
    meta.target = parse_target_family(synth.value("target", std::string("linear_mean")));
    meta.noise_sd = synth.value("noise_sd", meta.noise_sd);
    meta.label_bound = synth.value("label_bound", meta.label_bound);
    meta.seed = *seed;
    meta.validate();
    return meta;
}

std::size_t count_field(const json& j, const char* key, std::size_t fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ConfigError(std::string("'") + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

// Exactly one data source: {"path": ...} or {"synth": {...}}.
std::vector<Bag> load_data(const json& cfg, std::optional<std::uint64_t> seed) {
    const json data = section(cfg, "data");
    const bool has_path = data.contains("path");
    const bool has_synth = data.contains("synth");
    if (has_path == has_synth)
        throw ConfigError("data section needs exactly one of \"path\" or \"synth\"");
    if (has_path) return io::read_bag_file(data.at("path").get<std::string>());
    const json& synth = data.at("synth");
    const MetaDistributionSpec meta = meta_from_json(synth, seed);
    return generate(meta, count_field(synth, "m", 50), count_field(synth, "n", 50)).bags;
}

ScheduleParams schedule_from_json(const json& j) {
    ScheduleParams p;
    p.r = j.value("r", p.r);
    p.alpha_decay = j.value("alpha", p.alpha_decay);
    p.h = j.value("h", p.h);
    p.kappa4_scale = j.value("kappa4_scale", p.kappa4_scale);
    p.validate();
    return p;
}

LambdaMode lambda_from_json(const json& cfg) {
    LambdaMode mode;
    if (!cfg.contains("lambda")) return mode;
    const json& l = cfg.at("lambda");
    if (l.is_number()) {
        mode.kind = LambdaModeKind::fixed;
        mode.fixed_value = l.get<double>();
    } else {
        if (!l.is_object() || l.size() != 1)
            throw ConfigError("lambda needs exactly one of \"fixed\", \"grid\", \"schedule\"");
        if (l.contains("fixed")) {
            mode.kind = LambdaModeKind::fixed;
            mode.fixed_value = l.at("fixed").get<double>();
        } else if (l.contains("grid")) {
            const json& g = l.at("grid");
            mode.kind = LambdaModeKind::grid;
            mode.grid_min = g.value("min", mode.grid_min);
            mode.grid_max = g.value("max", mode.grid_max);
            mode.grid_count = count_field(g, "count", mode.grid_count);
            log_grid(mode.grid_min, mode.grid_max, mode.grid_count);
        } else if (l.contains("schedule")) {
            mode.kind = LambdaModeKind::schedule;
        } else {
            throw ConfigError("lambda needs exactly one of \"fixed\", \"grid\", \"schedule\"");
        }
    }
    if (mode.kind == LambdaModeKind::fixed && !(mode.fixed_value > 0.0))
        throw ConfigError("lambda must be positive");
    return mode;
}

// Schedule parameters come from lambda.schedule, then a top-level
// "schedule" section, then the defaults.
ScheduleParams schedule_params(const json& cfg) {
    if (cfg.contains("lambda") && cfg.at("lambda").is_object() &&
        cfg.at("lambda").contains("schedule"))
        return schedule_from_json(cfg.at("lambda").at("schedule"));
    return schedule_from_json(section(cfg, "schedule"));
}

std::string fit_report_text(const FitReport& r, Scheme scheme, double lambda, std::size_t m) {
    std::ostringstream os;
    os << "scheme=" << to_string(scheme) << " lambda=" << format_double(lambda) << " m=" << m
       << "\nobjective=" << format_double(r.objective_value)
       << "\nresidual=" << format_double(r.residual_norm)
       << "\ncondition_estimate=" << format_double(r.condition_estimate)
       << "\nwall_time=" << format_double(r.wall_time) << '\n';
    return os.str();
}

int cmd_fit(const CommonOptions& o, std::ostream& out, std::ostream& err) {
    const json cfg = load_config(o);
    const auto seed = resolve_seed(o, cfg);
    std::vector<Bag> bags = load_data(cfg, seed);
    if (bags.empty()) throw InputError("no training bags");
    const EmbeddingKernelSpec espec =
        io::embedding_from_json(section(cfg, "embedding"), static_cast<int>(bags.front().dim()));
    const OuterKernelSpec kspec = io::outer_from_json(section(cfg, "outer"), bags);
    const Scheme scheme = parse_scheme(cfg.value("scheme", std::string("coefficient_l2")));
    const LambdaMode mode = lambda_from_json(cfg);
    if (scheme == Scheme::krr && (!kspec.symmetric() || !kspec.psd_claimed()))
        throw ContractError("KRR requires positive semi-definite K; outer kernel '" +
                            std::string(to_string(kspec.family)) + "' is not");
    const fs::path out_dir = prepare_out_dir(o, cfg);

    const GramMatrix g = build_gram(kspec, espec, bags, o.threads);
    const Eigen::VectorXd y = labels_of(bags);
    double lambda = mode.fixed_value;
    if (mode.kind == LambdaModeKind::schedule) {
        lambda = schedule(schedule_params(cfg), bags.size()).lambda;
    } else if (mode.kind == LambdaModeKind::grid) {
        const auto grid = log_grid(mode.grid_min, mode.grid_max, mode.grid_count);
        lambda = select_lambda(scheme, g, y, grid, cfg.value("train_fraction", 0.7),
                               seed.value_or(0))
                     .lambda;
    }
    const Solution s = fit(scheme, g, y, lambda);

    CoefficientModel model;
    model.scheme = scheme;
    model.lambda = lambda;
    model.alpha = s.alpha;
    model.train_bags = std::move(bags);
    model.outer = kspec;
    model.embedding = espec;
    const fs::path model_path = out_dir / "model.json";
    io::save_model(model_path, model);

    if (s.report.ill_conditioned())
        err << "warning: condition estimate " << format_double(s.report.condition_estimate)
            << " exceeds 1e12; consider a larger lambda\n";
    if (o.json_output) {
        out << json{{"model", model_path.string()},
                    {"scheme", std::string(to_string(scheme))},
                    {"lambda", lambda},
                    {"m", model.train_bags.size()},
                    {"objective_value", s.report.objective_value},
                    {"residual_norm", s.report.residual_norm},
                    {"condition_estimate", s.report.condition_estimate},
                    {"wall_time", s.report.wall_time}}
                   .dump(2)
            << '\n';
    } else {
        out << "model=" << model_path.string() << '\n'
            << fit_report_text(s.report, scheme, lambda, model.train_bags.size());
    }
    return kOk;
}

int cmd_predict(const CommonOptions& o, const std::string& model_path,
                const std::string& bags_path, std::ostream& out) {
    const CoefficientModel model = io::load_model(model_path);
    const std::vector<Bag> bags = io::read_bag_file(bags_path);

    if (!o.config_path.empty()) {
        const json cfg = load_config(o);
        const EmbeddingKernelSpec espec = cfg.contains("embedding")
            ? io::embedding_from_json(cfg.at("embedding"), model.embedding.dim)
            : model.embedding;
        const OuterKernelSpec kspec = cfg.contains("outer")
            ? io::outer_from_json(cfg.at("outer"), model.train_bags)
            : model.outer;
        if (kernel_fingerprint(kspec, espec) != model.fingerprint())
            throw ContractError("kernel fingerprint mismatch: model was fitted with " +
                                io::fingerprint_hex(model.fingerprint()) +
                                ", configuration requests " +
                                io::fingerprint_hex(kernel_fingerprint(kspec, espec)));
    }
    for (const Bag& b : bags) validate_bag(model.embedding, b);

    const Eigen::VectorXd pred = predict(model, bags, o.threads);
    std::ostringstream csv;
    csv << "id,prediction\n";
    for (std::size_t i = 0; i < bags.size(); ++i)
        csv << bags[i].id << ',' << format_double(pred[static_cast<Eigen::Index>(i)]) << '\n';

    if (o.out_dir.empty()) {
        out << csv.str();
    } else {
        const fs::path dir = prepare_out_dir(o, json::object());
        io::write_text_file(dir / "predictions.csv", csv.str());
        out << "predictions=" << (dir / "predictions.csv").string() << '\n';
    }
    return kOk;
}

int cmd_sweep(const CommonOptions& o, bool svg_flag, std::ostream& out, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    const json cfg = load_config(o);
    const auto seed = resolve_seed(o, cfg);
    const json data = section(cfg, "data");
    if (!data.contains("synth") || data.contains("path"))
        throw ConfigError("sweep needs synthetic data (data.synth): excess error requires "
                          "the noiseless targets");

    RateExperimentConfig rc;
    rc.meta = meta_from_json(data.at("synth"), seed);
    rc.embedding = io::embedding_from_json(section(cfg, "embedding"), rc.meta.dim);
    const json outer = section(cfg, "outer");
    if (outer.contains("reference_bag"))
        throw ConfigError("sweep: tilted_asymmetric needs an inline \"reference\" bag");
    rc.outer = io::outer_from_json(outer);
    rc.scheme = parse_scheme(cfg.value("scheme", std::string("coefficient_l2")));
    rc.lambda = lambda_from_json(cfg);
    rc.schedule = schedule_params(cfg);
    if (!cfg.contains("m") || !cfg.at("m").is_array())
        throw ConfigError("sweep needs an \"m\" list");
    for (const json& m : cfg.at("m")) {
        if (!m.is_number_integer() || m.get<long long>() < 3)
            throw ConfigError("every m must be an integer >= 3");
        rc.m_values.push_back(m.get<std::size_t>());
    }
    rc.replications = count_field(cfg, "replications", 10);
    if (rc.replications == 0) throw ConfigError("replications must be >= 1");
    rc.n_max = count_field(cfg, "n_max", 2000);
    rc.n_test = count_field(cfg, "n_test", 100);
    rc.train_fraction = cfg.value("train_fraction", 0.7);
    rc.threads = o.threads;
    const bool want_svg = svg_flag || cfg.value("svg", false);
    const fs::path out_dir = prepare_out_dir(o, cfg);

    std::vector<std::size_t> distinct = rc.m_values;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 3)
        err << "warning: fewer than 3 distinct m values; no rate fit will be reported\n";

    const RateExperimentResult result = run_rate_experiment(rc);

    std::ostringstream csv;
    csv << "m,N,lambda,rep,scheme,error\n";
    for (const RateRow& r : result.rows)
        csv << r.m << ',' << r.n << ',' << format_double(r.lambda) << ',' << r.rep << ','
            << to_string(r.scheme) << ',' << format_double(r.error) << '\n';
    io::write_text_file(out_dir / "rates.csv", csv.str());

    json per_m = json::array();
    std::vector<std::pair<double, double>> medians;
    for (const RatePoint& p : result.per_m) {
        per_m.push_back({{"m", p.m},
                         {"N", p.n},
                         {"N_scheduled", p.n_scheduled},
                         {"n_cap_binding", p.n_capped},
                         {"median_error", p.median_error}});
        medians.emplace_back(static_cast<double>(p.m), p.median_error);
    }
    json summary;
    summary["per_m"] = std::move(per_m);
    summary["n_max"] = rc.n_max;
    summary["replications"] = rc.replications;
    summary["scheme"] = std::string(to_string(rc.scheme));
    if (result.fit) {
        json pts = json::array();
        for (const auto& [m, e] : result.fit->points) pts.push_back({m, e});
        summary["rate_fit"] = {{"slope", result.fit->slope},
                               {"intercept", result.fit->intercept},
                               {"r_squared", result.fit->r_squared},
                               {"points", std::move(pts)}};
    } else {
        summary["rate_fit"] = nullptr;
    }
    summary["wall_time"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    io::write_text_file(out_dir / "summary.json", summary.dump(2) + "\n");
    if (want_svg)
        io::write_text_file(out_dir / "rates.svg",
                            io::loglog_svg(medians, "m (number of bags)", "median excess error",
                                           "excess error vs m"));

    if (o.json_output) {
        out << summary.dump(2) << '\n';
    } else {
        out << "rates=" << (out_dir / "rates.csv").string() << '\n';
        for (const RatePoint& p : result.per_m)
            out << "m=" << p.m << " N=" << p.n << (p.n_capped ? " (capped)" : "")
                << " median_error=" << format_double(p.median_error) << '\n';
        if (result.fit)
            out << "slope=" << format_double(result.fit->slope)
                << " r_squared=" << format_double(result.fit->r_squared) << '\n';
    }
    return kOk;
}

int cmd_spectrum(const CommonOptions& o, std::ostream& out, std::ostream& err) {
    const json cfg = load_config(o);
    const auto seed = resolve_seed(o, cfg);
    const std::vector<Bag> bags = load_data(cfg, seed);
    if (bags.size() < 3)
        throw ConfigError("spectrum needs at least 3 bags, got " + std::to_string(bags.size()));
    const EmbeddingKernelSpec espec =
        io::embedding_from_json(section(cfg, "embedding"), static_cast<int>(bags.front().dim()));
    const OuterKernelSpec kspec = io::outer_from_json(section(cfg, "outer"), bags);
    const std::size_t head = count_field(cfg, "head", 10);
    const fs::path out_dir = prepare_out_dir(o, cfg);

    const GramMatrix g = build_gram(kspec, espec, bags, o.threads);
    const SpectrumReport rep = spectrum(g);

    std::ostringstream sv;
    sv << "l,sigma\n";
    for (Eigen::Index l = 0; l < rep.singular_values.size(); ++l)
        sv << l + 1 << ',' << format_double(rep.singular_values[l]) << '\n';
    io::write_text_file(out_dir / "spectrum.csv", sv.str());

    const double top = rep.singular_values.size() ? rep.singular_values[0] : 0.0;
    const double base = top > 0.0 ? top : 1.0;
    const auto grid = log_grid(1e-6 * base, 10.0 * base, 20);
    std::ostringstream ed;
    ed << "lambda,effective_dimension\n";
    for (double lambda : grid)
        ed << format_double(lambda) << ',' << format_double(effective_dimension(rep, lambda))
           << '\n';
    io::write_text_file(out_dir / "effective_dimension.csv", ed.str());

    std::optional<double> alpha_hat;
    try {
        alpha_hat = fit_decay_exponent(rep, head);
    } catch (const InputError& e) {
        err << "warning: " << e.what() << '\n';
    }

    json summary{{"m", rep.m},
                 {"head", head},
                 {"alpha_hat", alpha_hat ? json(*alpha_hat) : json(nullptr)},
                 {"largest_singular_value", top},
                 {"note", SpectrumReport::scale_note}};
    if (rep.eigenvalues) summary["min_eigenvalue"] = rep.eigenvalues->minCoeff();
    if (o.json_output) {
        out << summary.dump(2) << '\n';
    } else {
        out << "spectrum=" << (out_dir / "spectrum.csv").string() << '\n'
            << "effective_dimension=" << (out_dir / "effective_dimension.csv").string() << '\n'
            << "alpha_hat=" << (alpha_hat ? format_double(*alpha_hat) : std::string("n/a"))
            << '\n'
            << "note: " << SpectrumReport::scale_note << '\n';
    }
    return kOk;
}

int cmd_schedule(const CommonOptions& o, const ScheduleParams& p, std::size_t m,
                 std::ostream& out, std::ostream& err) {
    Schedule s;
    if (p.alpha_decay == 1.0) {
        ScheduleParams rest = p;
        rest.alpha_decay = 2.0;
        rest.validate();
        err << "warning: alpha = 1 is the boundary case; the capacity bound needs alpha > 1\n";
        s = schedule_formula(p, m);
    } else {
        s = schedule(p, m);
    }
    if (o.json_output) {
        out << json{{"beta", s.beta}, {"zeta", s.zeta}, {"lambda", s.lambda}, {"N", s.n}}.dump(2)
            << '\n';
    } else {
        out << "beta=" << format_double(s.beta) << "\nzeta=" << format_double(s.zeta)
            << "\nlambda=" << format_double(s.lambda) << "\nN=" << s.n << '\n';
    }
    return kOk;
}

int cmd_generate(const CommonOptions& o, std::ostream& out) {
    const json cfg = load_config(o);
    const auto seed = resolve_seed(o, cfg);
    const json data = section(cfg, "data");
    if (!data.contains("synth")) throw ConfigError("generate needs a data.synth section");
    const json& synth = data.at("synth");
    const MetaDistributionSpec meta = meta_from_json(synth, seed);
    const std::size_t m = count_field(synth, "m", 50);
    const std::size_t n = count_field(synth, "n", 50);
    const fs::path out_dir = prepare_out_dir(o, cfg);

    const TwoStageDataset ds = generate(meta, m, n);
    io::write_bag_file(out_dir / "bags.jsonl", ds.bags);
    std::ostringstream targets;
    targets << "id,target\n";
    for (std::size_t i = 0; i < ds.bags.size(); ++i)
        targets << ds.bags[i].id << ',' << format_double(ds.targets[i]) << '\n';
    io::write_text_file(out_dir / "targets.csv", targets.str());
    out << "bags=" << (out_dir / "bags.jsonl").string() << '\n'
        << "targets=" << (out_dir / "targets.csv").string() << '\n';
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Coefficient-based regularized distribution regression", "distreg"};
    app.require_subcommand(1);

    CommonOptions fit_o, predict_o, sweep_o, spectrum_o, schedule_o, generate_o;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a model and write model.json");
    add_common(fit_cmd, fit_o);

    auto* predict_cmd = app.add_subcommand("predict", "Predict labels for a bag file");
    add_common(predict_cmd, predict_o);
    std::string model_path, bags_path;
    predict_cmd->add_option("--model", model_path, "Model document")->required();
    predict_cmd->add_option("--bags", bags_path, "Bag file to predict")->required();

    auto* sweep_cmd = app.add_subcommand("sweep", "Learning-rate experiment over m");
    add_common(sweep_cmd, sweep_o);
    bool svg = false;
    sweep_cmd->add_flag("--svg", svg, "Also write rates.svg");

    auto* spectrum_cmd = app.add_subcommand("spectrum", "Gram spectrum and effective dimension");
    add_common(spectrum_cmd, spectrum_o);

    auto* schedule_cmd = app.add_subcommand("schedule", "Theory schedule for lambda and N");
    add_common(schedule_cmd, schedule_o);
    ScheduleParams sp;
    std::size_t sched_m = 0;
    schedule_cmd->set_help_flag("--help", "Print this help message and exit");
    schedule_cmd->add_option("--r", sp.r, "Regularity index r > 0")->required();
    schedule_cmd->add_option("--alpha", sp.alpha_decay, "Decay exponent alpha >= 1")->required();
    schedule_cmd->add_option("--h", sp.h, "Hoelder exponent in (0, 1]")->default_val(1.0);
    schedule_cmd->add_option("--m", sched_m, "Number of bags (>= 3)")->required();
    schedule_cmd->add_option("--kappa4", sp.kappa4_scale, "Scale for lambda")->default_val(1.0);

    auto* generate_cmd = app.add_subcommand("generate", "Write a synthetic bag file");
    add_common(generate_cmd, generate_o);

    std::vector<std::string> argv_store{"distreg"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kConfig;
    }

    try {
        if (*fit_cmd) return cmd_fit(fit_o, out, err);
        if (*predict_cmd) return cmd_predict(predict_o, model_path, bags_path, out);
        if (*sweep_cmd) return cmd_sweep(sweep_o, svg, out, err);
        if (*spectrum_cmd) return cmd_spectrum(spectrum_o, out, err);
        if (*schedule_cmd) return cmd_schedule(schedule_o, sp, sched_m, out, err);
        if (*generate_cmd) return cmd_generate(generate_o, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const json::exception& e) {
        err << "error: invalid configuration value: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return kConfig;
}

}  // namespace distreg::cli
