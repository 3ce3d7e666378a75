// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 wffr contributors

#include "wffr/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace wffr {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& tok, const std::string& path, int row, int col) {
  try {
    size_t pos = 0;
    double v = std::stod(tok, &pos);
    while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos]))) ++pos;
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(path + ": row " + std::to_string(row) + ", column " +
                          std::to_string(col) + ": cannot parse '" + tok +
                          "' as a number");
  }
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

}  // namespace

std::vector<std::string> index_labels(int n) {
  std::vector<std::string> out(n);
  for (int i = 0; i < n; ++i) out[i] = std::to_string(i + 1);
  return out;
}

LabeledMatrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
  LabeledMatrix out;
  out.labels = split(line, ',');
  const int ncol = int(out.labels.size());
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto toks = split(line, ',');
    if (int(toks.size()) != ncol) {
      throw ValidationError(path + ": row " + std::to_string(lineno) + " has " +
                            std::to_string(toks.size()) + " fields, header has " +
                            std::to_string(ncol));
    }
    std::vector<double> vals(ncol);
    for (int c = 0; c < ncol; ++c) vals[c] = parse_double(toks[c], path, lineno, c + 1);
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw ValidationError(path + ": no data rows");
  out.values.resize(int(rows.size()), ncol);
  for (int r = 0; r < int(rows.size()); ++r)
    for (int c = 0; c < ncol; ++c) out.values(r, c) = rows[r][c];
  return out;
}

void write_grid_csv(const std::string& path, const MatrixXd& grid,
                    const std::string& row_name, const std::string& col_name,
                    const std::vector<std::string>& row_labels,
                    const std::vector<std::string>& col_labels) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  auto rl = row_labels.empty() ? index_labels(int(grid.rows())) : row_labels;
  auto cl = col_labels.empty() ? index_labels(int(grid.cols())) : col_labels;
  if (int(rl.size()) != grid.rows() || int(cl.size()) != grid.cols()) {
    throw ValidationError(path + ": label counts do not match grid dimensions");
  }
  out << "# dims: " << grid.rows() << " " << grid.cols() << "\n";
  out << "# labels: " << row_name << ": " << join(rl, "|") << " ; " << col_name
      << ": " << join(cl, "|") << "\n";
  for (int r = 0; r < grid.rows(); ++r) {
    for (int c = 0; c < grid.cols(); ++c) {
      if (c) out << ",";
      out << format_double(grid(r, c));
    }
    out << "\n";
  }
}

GridCsv read_grid_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# dims:", 0) != 0) {
    throw ValidationError(path + ": missing '# dims:' header");
  }
  GridCsv out;
  int nrow = 0, ncol = 0;
  {
    std::istringstream ss(line.substr(7));
    if (!(ss >> nrow >> ncol) || nrow < 0 || ncol <= 0) {
      throw ValidationError(path + ": malformed dims header");
    }
  }
  if (!std::getline(in, line) || line.rfind("# labels:", 0) != 0) {
    throw ValidationError(path + ": missing '# labels:' header");
  }
  {
    std::string body = line.substr(9);
    auto mid = body.find(" ; ");
    if (mid == std::string::npos) throw ValidationError(path + ": malformed labels header");
    auto parse_side = [&](const std::string& part, std::string& name,
                          std::vector<std::string>& labels) {
      auto colon = part.find(": ");
      if (colon == std::string::npos)
        throw ValidationError(path + ": malformed labels header");
      name = part.substr(0, colon);
      while (!name.empty() && name.front() == ' ') name.erase(name.begin());
      std::string rest = part.substr(colon + 2);
      labels = rest.empty() ? std::vector<std::string>{} : split(rest, '|');
    };
    parse_side(body.substr(0, mid), out.row_name, out.row_labels);
    parse_side(body.substr(mid + 3), out.col_name, out.col_labels);
  }
  out.grid.resize(nrow, ncol);
  for (int r = 0; r < nrow; ++r) {
    if (!std::getline(in, line)) throw ValidationError(path + ": truncated grid");
    auto toks = split(line, ',');
    if (int(toks.size()) != ncol) {
      throw ValidationError(path + ": row " + std::to_string(r + 3) + " has " +
                            std::to_string(toks.size()) + " fields, expected " +
                            std::to_string(ncol));
    }
    for (int c = 0; c < ncol; ++c) out.grid(r, c) = parse_double(toks[c], path, r + 3, c + 1);
  }
  return out;
}

namespace {

void write_blob(const std::string& path, const double* data, size_t count) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(data), std::streamsize(count * sizeof(double)));
}

void read_blob(const std::string& path, double* data, size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  in.read(reinterpret_cast<char*>(data), std::streamsize(count * sizeof(double)));
  if (size_t(in.gcount()) != count * sizeof(double)) {
    throw ValidationError(path + ": truncated binary blob");
  }
}

}  // namespace

void save_draws(const std::string& dir, const StoredDraws& draws,
                const json& extra_manifest) {
  fs::create_directories(dir);
  json manifest;
  manifest["format"] = "wffr-draws-v1";
  manifest["dims"] = {{"M", draws.surface.M}, {"T", draws.surface.T},
                      {"S", draws.surface.S},
                      {"q", draws.gamma_curves ? draws.gamma_curves->T : 0}};
  manifest["seed"] = draws.seed;
  manifest["config_hash"] = draws.config_hash;
  manifest["labels"] = {{"t", draws.t_labels}, {"s", draws.s_labels},
                        {"w", draws.w_labels}};
  manifest["files"]["surface"] = "draws.bin";
  write_blob(dir + "/draws.bin", draws.surface.data.data(), draws.surface.data.size());
  if (draws.gamma_curves && draws.gamma_curves->T > 0) {
    manifest["files"]["gamma_curves"] = "gamma_draws.bin";
    write_blob(dir + "/gamma_draws.bin", draws.gamma_curves->data.data(),
               draws.gamma_curves->data.size());
  }
  if (draws.sigma2.size() > 0) {
    manifest["files"]["sigma2"] = "sigma2.bin";
    manifest["dims"]["sigma2_cols"] = int(draws.sigma2.cols());
    MatrixXd tmp = draws.sigma2;  // row-major on disk
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = tmp;
    write_blob(dir + "/sigma2.bin", rm.data(), size_t(rm.size()));
  }
  for (auto& [k, v] : extra_manifest.items()) manifest[k] = v;
  write_json_file(dir + "/manifest.json", manifest);
}

StoredDraws load_draws(const std::string& manifest_path) {
  json manifest = load_json_file(manifest_path);
  if (!manifest.contains("format") || manifest["format"] != "wffr-draws-v1") {
    throw ValidationError(manifest_path + ": not a wffr draws manifest");
  }
  StoredDraws out;
  out.manifest = manifest;
  const auto& dims = manifest.at("dims");
  int M = dims.at("M"), T = dims.at("T"), S = dims.at("S"), q = dims.value("q", 0);
  std::string dir = fs::path(manifest_path).parent_path().string();
  if (dir.empty()) dir = ".";
  out.surface = DrawCube(M, T, S);
  read_blob(dir + "/" + manifest.at("files").at("surface").get<std::string>(),
            out.surface.data.data(), out.surface.data.size());
  if (q > 0 && manifest.at("files").contains("gamma_curves")) {
    DrawCube gc(M, q, S);
    read_blob(dir + "/" + manifest["files"]["gamma_curves"].get<std::string>(),
              gc.data.data(), gc.data.size());
    out.gamma_curves = std::move(gc);
  }
  if (manifest.at("files").contains("sigma2")) {
    int nc = dims.at("sigma2_cols");
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(M, nc);
    read_blob(dir + "/" + manifest["files"]["sigma2"].get<std::string>(), rm.data(),
              size_t(rm.size()));
    out.sigma2 = rm;
  }
  out.seed = manifest.value("seed", 0ULL);
  out.config_hash = manifest.value("config_hash", "");
  auto get_labels = [&](const char* key) {
    std::vector<std::string> v;
    if (manifest.contains("labels") && manifest["labels"].contains(key)) {
      v = manifest["labels"][key].get<std::vector<std::string>>();
    }
    return v;
  };
  out.t_labels = get_labels("t");
  out.s_labels = get_labels("s");
  out.w_labels = get_labels("w");
  return out;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return j;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << j.dump(2) << "\n";
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << text;
}

void require_keys(const json& obj, const std::vector<std::string>& allowed,
                  const std::string& context) {
  if (!obj.is_object()) throw ValidationError(context + ": expected a JSON object");
  for (auto& [k, v] : obj.items()) {
    bool ok = false;
    for (const auto& a : allowed) {
      if (k == a) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ValidationError(context + ": unknown key '" + k + "'");
  }
}

}  // namespace wffr
