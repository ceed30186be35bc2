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

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "distreg/embedding.hpp"
#include "distreg/gram.hpp"
#include "distreg/outer_kernel.hpp"
#include "distreg/solver.hpp"

namespace distreg::io {

using nlohmann::json;

// Bag records -----------------------------------------------------------------
//
// One JSON object per line:
//   {"id": "b0", "y": 0.5 | null, "params": {"theta": [..], "s": 0.1},
//    "points": [[x, ...], ...]}
// "params" is optional; "y" may be null or absent for prediction inputs.

json bag_to_json(const Bag& bag);
Bag bag_from_json(const json& record);

/// Parses newline-delimited bag records. Blank lines are skipped. Throws
/// InputError (with the line number) on malformed records or when the
/// dimension changes across the file.
std::vector<Bag> read_bags(std::istream& in);
std::vector<Bag> read_bag_file(const std::filesystem::path& path);

void write_bags(std::ostream& out, std::span<const Bag> bags);
void write_bag_file(const std::filesystem::path& path, std::span<const Bag> bags);

// Kernel specs ----------------------------------------------------------------

json to_json(const EmbeddingKernelSpec& spec);
/// `dim` fills in a missing "dim" field (taken from the data).
EmbeddingKernelSpec embedding_from_json(const json& j, int dim);

json to_json(const OuterKernelSpec& spec);
/// Tilted kernels name their reference either inline ("reference": record)
/// or by id ("reference_bag": "id"), resolved against `bags`.
OuterKernelSpec outer_from_json(const json& j, std::span<const Bag> bags = {});

// Model documents -------------------------------------------------------------

json model_to_json(const CoefficientModel& model);
/// Throws InputError on a malformed document or a fingerprint that does
/// not match the stored kernel specs.
CoefficientModel model_from_json(const json& doc);

void save_model(const std::filesystem::path& path, const CoefficientModel& model);
CoefficientModel load_model(const std::filesystem::path& path);

// Tables and plots ------------------------------------------------------------

/// Shortest text that parses back to the same double.
std::string format_double(double v);

std::string fingerprint_hex(std::uint64_t fp);

/// Row-major CSV with a header of column ids; first column is the row id.
void write_gram_csv(std::ostream& out, const GramMatrix& g);

/// Minimal SVG: one log-log polyline with markers and axis labels.
std::string loglog_svg(std::span<const std::pair<double, double>> points,
                       const std::string& x_label, const std::string& y_label,
                       const std::string& title);

/// Reads a whole file; IoError if it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

/// Writes a whole file; IoError if it cannot be created.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace distreg::io
