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
#include "distreg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "distreg/errors.hpp"

namespace distreg::io {

namespace {

constexpr const char* kModelFormat = "distreg-model";
constexpr int kModelVersion = 1;

double number_field(const json& j, const char* key) {
    if (!j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
    const json& v = j.at(key);
    if (!v.is_number()) throw InputError(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

double number_or(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

std::string string_field(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_string())
        throw InputError(std::string("missing string field '") + key + "'");
    return j.at(key).get<std::string>();
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

json bag_to_json(const Bag& bag) {
    json j;
    j["id"] = bag.id;
    j["y"] = bag.label ? json(*bag.label) : json(nullptr);
    if (bag.params) {
        json p;
        p["theta"] = std::vector<double>(bag.params->theta.begin(), bag.params->theta.end());
        p["s"] = bag.params->scale;
        j["params"] = std::move(p);
    }
    json points = json::array();
    for (Eigen::Index i = 0; i < bag.points.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < bag.points.cols(); ++k) row.push_back(bag.points(i, k));
        points.push_back(std::move(row));
    }
    j["points"] = std::move(points);
    return j;
}

Bag bag_from_json(const json& record) {
    if (!record.is_object()) throw InputError("bag record must be an object");
    Bag bag;
    if (!record.contains("id")) throw InputError("bag record has no id");
    const json& id = record.at("id");
    bag.id = id.is_string() ? id.get<std::string>() : id.dump();
    if (record.contains("y") && !record.at("y").is_null()) {
        if (!record.at("y").is_number())
            throw InputError("bag '" + bag.id + "': y must be a number or null");
        bag.label = record.at("y").get<double>();
    }
    if (record.contains("params") && !record.at("params").is_null()) {
        const json& p = record.at("params");
        if (!p.is_object() || !p.contains("theta") || !p.at("theta").is_array())
            throw InputError("bag '" + bag.id + "': params need a theta array");
        BagParams params;
        const auto theta = p.at("theta").get<std::vector<double>>();
        params.theta = Eigen::Map<const Eigen::VectorXd>(theta.data(),
                                                         static_cast<Eigen::Index>(theta.size()));
        params.scale = number_field(p, "s");
        bag.params = std::move(params);
    }
    if (!record.contains("points") || !record.at("points").is_array())
        throw InputError("bag '" + bag.id + "': points must be an array of points");
    const json& pts = record.at("points");
    if (pts.empty()) throw InputError("bag '" + bag.id + "' is empty");
    if (!pts.front().is_array() || pts.front().empty())
        throw InputError("bag '" + bag.id + "': each point must be a non-empty array");
    const std::size_t dim = pts.front().size();
    bag.points.resize(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const json& row = pts[i];
        if (!row.is_array() || row.size() != dim)
            throw InputError("bag '" + bag.id + "': points have inconsistent dimensions");
        for (std::size_t k = 0; k < dim; ++k) {
            if (!row[k].is_number())
                throw InputError("bag '" + bag.id + "': coordinates must be numbers");
            bag.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                row[k].get<double>();
        }
    }
    return bag;
}

std::vector<Bag> read_bags(std::istream& in) {
    std::vector<Bag> bags;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); }))
            continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            throw InputError("bag file line " + std::to_string(line_no) + ": " + e.what());
        }
        try {
            bags.push_back(bag_from_json(record));
        } catch (const InputError& e) {
            throw InputError("bag file line " + std::to_string(line_no) + ": " + e.what());
        } catch (const json::exception& e) {
            throw InputError("bag file line " + std::to_string(line_no) + ": " + e.what());
        }
        if (bags.back().dim() != bags.front().dim())
            throw InputError("bag file line " + std::to_string(line_no) + ": dimension " +
                             std::to_string(bags.back().dim()) + " differs from " +
                             std::to_string(bags.front().dim()));
    }
    return bags;
}

std::vector<Bag> read_bag_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open bag file '" + path.string() + "'");
    return read_bags(in);
}

void write_bags(std::ostream& out, std::span<const Bag> bags) {
    for (const Bag& b : bags) out << bag_to_json(b).dump() << '\n';
}

void write_bag_file(const std::filesystem::path& path, std::span<const Bag> bags) {
    std::ostringstream os;
    write_bags(os, bags);
    write_text_file(path, os.str());
}

json to_json(const EmbeddingKernelSpec& spec) {
    return json{{"family", std::string(to_string(spec.family))},
                {"bandwidth", spec.bandwidth},
                {"dim", spec.dim}};
}

EmbeddingKernelSpec embedding_from_json(const json& j, int dim) {
    if (!j.is_object()) throw ConfigError("embedding kernel section must be an object");
    EmbeddingKernelSpec spec;
    spec.family = parse_embedding_family(j.value("family", std::string("gaussian")));
    spec.bandwidth = number_or(j, "bandwidth", 1.0);
    spec.dim = j.contains("dim") ? j.at("dim").get<int>() : dim;
    spec.validate();
    return spec;
}

json to_json(const OuterKernelSpec& spec) {
    json j;
    j["family"] = std::string(to_string(spec.family));
    switch (spec.family) {
        case OuterFamily::gaussian_on_embedding:
            j["sigma"] = spec.sigma;
            break;
        case OuterFamily::linear_embedding:
            break;
        case OuterFamily::dog_indefinite:
            j["sigma1"] = spec.sigma1;
            j["sigma2"] = spec.sigma2;
            j["c"] = spec.c;
            break;
        case OuterFamily::tanh_indefinite:
            j["scale"] = spec.scale;
            j["offset"] = spec.offset;
            break;
        case OuterFamily::tilted_asymmetric:
            j["sigma"] = spec.sigma;
            j["c"] = spec.c;
            if (spec.reference) j["reference"] = bag_to_json(*spec.reference);
            break;
    }
    return j;
}

OuterKernelSpec outer_from_json(const json& j, std::span<const Bag> bags) {
    if (!j.is_object()) throw ConfigError("outer kernel section must be an object");
    OuterKernelSpec spec;
    spec.family = parse_outer_family(j.value("family", std::string("gaussian_on_embedding")));
    spec.sigma = number_or(j, "sigma", spec.sigma);
    spec.sigma1 = number_or(j, "sigma1", spec.sigma1);
    spec.sigma2 = number_or(j, "sigma2", spec.sigma2);
    spec.c = number_or(j, "c", spec.c);
    spec.scale = number_or(j, "scale", spec.scale);
    spec.offset = number_or(j, "offset", spec.offset);
    if (spec.family == OuterFamily::tilted_asymmetric) {
        if (j.contains("reference")) {
            spec.reference = std::make_shared<const Bag>(bag_from_json(j.at("reference")));
        } else if (j.contains("reference_bag")) {
            const std::string id = j.at("reference_bag").get<std::string>();
            auto it = std::find_if(bags.begin(), bags.end(),
                                   [&](const Bag& b) { return b.id == id; });
            if (it == bags.end())
                throw ConfigError("tilted_asymmetric: reference bag '" + id + "' not found");
            spec.reference = std::make_shared<const Bag>(*it);
        }
    }
    spec.validate();
    return spec;
}

json model_to_json(const CoefficientModel& model) {
    json doc;
    doc["format"] = kModelFormat;
    doc["version"] = kModelVersion;
    doc["scheme"] = std::string(to_string(model.scheme));
    doc["lambda"] = model.lambda;
    doc["embedding"] = to_json(model.embedding);
    doc["outer"] = to_json(model.outer);
    doc["fingerprint"] = fingerprint_hex(model.fingerprint());
    doc["alpha"] = std::vector<double>(model.alpha.begin(), model.alpha.end());
    json bags = json::array();
    for (const Bag& b : model.train_bags) bags.push_back(bag_to_json(b));
    doc["train_bags"] = std::move(bags);
    return doc;
}

CoefficientModel model_from_json(const json& doc) {
    try {
        if (!doc.is_object() || doc.value("format", std::string()) != kModelFormat)
            throw InputError("not a distreg model document");
        if (doc.value("version", 0) != kModelVersion)
            throw InputError("unsupported model version");
        CoefficientModel model;
        model.scheme = parse_scheme(string_field(doc, "scheme"));
        model.lambda = number_field(doc, "lambda");
        for (const json& b : doc.at("train_bags")) model.train_bags.push_back(bag_from_json(b));
        if (model.train_bags.empty()) throw InputError("model has no training bags");
        model.embedding = embedding_from_json(doc.at("embedding"),
                                              static_cast<int>(model.train_bags.front().dim()));
        model.outer = outer_from_json(doc.at("outer"), model.train_bags);
        const auto alpha = doc.at("alpha").get<std::vector<double>>();
        model.alpha = Eigen::Map<const Eigen::VectorXd>(alpha.data(),
                                                        static_cast<Eigen::Index>(alpha.size()));
        if (model.alpha.size() != static_cast<Eigen::Index>(model.train_bags.size()))
            throw InputError("model alpha length does not match its training bags");
        for (const Bag& b : model.train_bags) validate_bag(model.embedding, b);
        if (doc.contains("fingerprint") &&
            doc.at("fingerprint").get<std::string>() != fingerprint_hex(model.fingerprint()))
            throw InputError("model fingerprint does not match its kernel specs");
        return model;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed model document: ") + e.what());
    } catch (const ConfigError& e) {
        throw InputError(std::string("malformed model document: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const CoefficientModel& model) {
    write_text_file(path, model_to_json(model).dump() + "\n");
}

CoefficientModel load_model(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError("model file '" + path.string() + "': " + e.what());
    }
    return model_from_json(doc);
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string fingerprint_hex(std::uint64_t fp) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fp));
    return buf;
}

void write_gram_csv(std::ostream& out, const GramMatrix& g) {
    out << "id";
    for (const auto& id : g.col_ids) out << ',' << id;
    out << '\n';
    for (Eigen::Index i = 0; i < g.values.rows(); ++i) {
        out << (static_cast<std::size_t>(i) < g.row_ids.size() ? g.row_ids[i] : std::to_string(i));
        for (Eigen::Index j = 0; j < g.values.cols(); ++j) out << ',' << format_double(g.values(i, j));
        out << '\n';
    }
}

std::string loglog_svg(std::span<const std::pair<double, double>> points,
                       const std::string& x_label, const std::string& y_label,
                       const std::string& title) {
    constexpr double width = 640, height = 480;
    constexpr double left = 80, right = 20, top = 40, bottom = 60;
    std::vector<std::pair<double, double>> logs;
    for (const auto& [x, y] : points)
        if (x > 0.0 && y > 0.0) logs.emplace_back(std::log10(x), std::log10(y));

    std::ostringstream svg;
    svg << std::setprecision(6);
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << xml_escape(title) << "</text>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right
        << "\" y2=\"" << height - bottom << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
        << height - bottom << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 15
        << "\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(x_label) << "</text>\n";
    svg << "<text x=\"20\" y=\"" << (top + height - bottom) / 2
        << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 20 "
        << (top + height - bottom) / 2 << ")\">" << xml_escape(y_label) << "</text>\n";

    if (!logs.empty()) {
        auto [xmin_it, xmax_it] = std::minmax_element(
            logs.begin(), logs.end(), [](auto& a, auto& b) { return a.first < b.first; });
        auto [ymin_it, ymax_it] = std::minmax_element(
            logs.begin(), logs.end(), [](auto& a, auto& b) { return a.second < b.second; });
        double x0 = xmin_it->first, x1 = xmax_it->first;
        double y0 = ymin_it->second, y1 = ymax_it->second;
        if (x1 - x0 < 1e-12) { x0 -= 0.5; x1 += 0.5; }
        if (y1 - y0 < 1e-12) { y0 -= 0.5; y1 += 0.5; }
        auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (width - left - right); };
        auto py = [&](double y) { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); };

        svg << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < logs.size(); ++i)
            svg << (i ? " " : "") << px(logs[i].first) << ',' << py(logs[i].second);
        svg << "\"/>\n";
        for (std::size_t i = 0; i < logs.size(); ++i) {
            svg << "<circle cx=\"" << px(logs[i].first) << "\" cy=\"" << py(logs[i].second)
                << "\" r=\"3\" fill=\"steelblue\"/>\n";
        }
        svg << "<text x=\"" << left << "\" y=\"" << height - bottom + 18
            << "\" font-size=\"11\">" << std::pow(10.0, x0) << "</text>\n";
        svg << "<text x=\"" << width - right << "\" y=\"" << height - bottom + 18
            << "\" text-anchor=\"end\" font-size=\"11\">" << std::pow(10.0, x1) << "</text>\n";
        svg << "<text x=\"" << left - 6 << "\" y=\"" << height - bottom
            << "\" text-anchor=\"end\" font-size=\"11\">" << std::pow(10.0, y0) << "</text>\n";
        svg << "<text x=\"" << left - 6 << "\" y=\"" << top + 10
            << "\" text-anchor=\"end\" font-size=\"11\">" << std::pow(10.0, y1) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace distreg::io
