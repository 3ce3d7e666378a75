// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 wffr contributors

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wffr/types.hpp"

namespace wffr {

std::string format_double(double v);  // lossless round-trip formatting
std::string format_short(double v);   // compact form for names and tables

/// Numeric matrix with a header row of column labels (Y.csv / X.csv / W.csv).
struct LabeledMatrix {
  std::vector<std::string> labels;
  MatrixXd values;
};

LabeledMatrix read_matrix_csv(const std::string& path);

/// Grid CSV with the two-line metadata header:
///   # dims: <rows> <cols>
///   # labels: <row_name>: a|b|... ; <col_name>: a|b|...
struct GridCsv {
  MatrixXd grid;
  std::string row_name = "t", col_name = "s";
  std::vector<std::string> row_labels, col_labels;
};

void write_grid_csv(const std::string& path, const MatrixXd& grid,
                    const std::string& row_name, const std::string& col_name,
                    const std::vector<std::string>& row_labels = {},
                    const std::vector<std::string>& col_labels = {});
GridCsv read_grid_csv(const std::string& path);

std::vector<std::string> index_labels(int n);  // "1".."n"

/// On-disk posterior draw store: little-endian float64 blobs plus a JSON
/// manifest describing dimensions, provenance and companion files.
struct StoredDraws {
  DrawCube surface;                       // M x T x S
  std::optional<DrawCube> gamma_curves;   // M x q x S
  MatrixXd sigma2;                        // M x ncols (may be empty)
  std::vector<std::string> t_labels, s_labels, w_labels;
  uint64_t seed = 0;
  std::string config_hash;
  nlohmann::json manifest;
};

void save_draws(const std::string& dir, const StoredDraws& draws,
                const nlohmann::json& extra_manifest);
StoredDraws load_draws(const std::string& manifest_path);

nlohmann::json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);
void write_text_file(const std::string& path, const std::string& text);

/// Rejects unknown keys so that config typos fail loudly.
void require_keys(const nlohmann::json& obj, const std::vector<std::string>& allowed,
                  const std::string& context);

}  // namespace wffr
