#include "heatlsm/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstring>
#include <fstream>

namespace heatlsm {

using nlohmann::json;

std::string format_real(Real v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw ValidationError("cannot open output file: " + path);
  return out;
}

}  // namespace

void write_trace_csv(const std::string& path, const SpaceTimeMesh& mesh,
                     const Matrix& values) {
  if (values.rows() != mesh.n_space || values.cols() != mesh.n_steps)
    throw InputDomainError("write_trace_csv: value shape does not match the mesh");
  std::ofstream out = open_out(path);
  out << "node,arc_param,time,value\n";
  for (int k = 0; k < mesh.n_steps; ++k)
    for (int i = 0; i < mesh.n_space; ++i)
      out << i << ',' << format_real(mesh.params[i]) << ','
          << format_real(mesh.midpoint_time(k + 1)) << ','
          << format_real(values(i, k)) << '\n';
}

void write_indicator_csv(const std::string& path, const IndicatorField& field) {
  std::ofstream out = open_out(path);
  out << "x,y,region,density_norm,pointwise_value,discrepancy,alpha,flags\n";
  for (size_t q = 0; q < field.points.size(); ++q) {
    out << format_real(field.points[q][0]) << ',' << format_real(field.points[q][1])
        << ',' << to_string(field.tags[q]) << ',' << format_real(field.density_norm[q])
        << ',' << format_real(field.pointwise[q]) << ','
        << format_real(field.discrepancy[q]) << ',' << format_real(field.alpha_used[q])
        << ',' << field.flags[q] << '\n';
  }
}

void write_contour_csv(const std::string& path, const ContourResult& contour) {
  std::ofstream out = open_out(path);
  out << "loop,vertex,x,y\n";
  for (size_t l = 0; l < contour.loops.size(); ++l)
    for (size_t v = 0; v < contour.loops[l].size(); ++v)
      out << l << ',' << v << ',' << format_real(contour.loops[l][v][0]) << ','
          << format_real(contour.loops[l][v][1]) << '\n';
}

void write_matrix_binary(const std::string& path, const Matrix& m,
                         const std::map<std::string, std::string>& sidecar_fields) {
  {
    std::ofstream out = open_out(path, true);
    // row-major little-endian doubles
    for (long r = 0; r < m.rows(); ++r)
      for (long c = 0; c < m.cols(); ++c) {
        const double v = m(r, c);
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
      }
  }
  json side;
  for (const auto& [k, v] : sidecar_fields) side[k] = v;
  side["rows"] = m.rows();
  side["cols"] = m.cols();
  side["dtype"] = "float64_le";
  side["layout"] = "row_major";
  std::ofstream meta = open_out(path + ".json");
  meta << side.dump(2) << '\n';
}

LoadedMatrix read_matrix_binary(const std::string& path) {
  std::ifstream meta(path + ".json");
  if (!meta) throw ValidationError("missing sidecar: " + path + ".json");
  json side;
  try {
    meta >> side;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid sidecar JSON: ") + e.what());
  }
  const long rows = side.at("rows").get<long>();
  const long cols = side.at("cols").get<long>();

  LoadedMatrix out;
  out.m.resize(rows, cols);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open matrix file: " + path);
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c) {
      double v = 0;
      in.read(reinterpret_cast<char*>(&v), sizeof v);
      if (!in) throw ValidationError("matrix file truncated: " + path);
      out.m(r, c) = v;
    }
  for (auto it = side.begin(); it != side.end(); ++it) {
    if (it->is_string())
      out.sidecar[it.key()] = it->get<std::string>();
    else
      out.sidecar[it.key()] = it->dump();
  }
  return out;
}

void write_ntd_binary(const std::string& path, const NtdGapMatrix& ntd) {
  write_matrix_binary(path, ntd.map,
                      {{"kind", ntd.tag},
                       {"N_s", std::to_string(ntd.n_space)},
                       {"N_t", std::to_string(ntd.n_steps)},
                       {"dt", format_real(ntd.dt)}});
}

NtdGapMatrix read_ntd_binary(const std::string& path) {
  LoadedMatrix loaded = read_matrix_binary(path);
  NtdGapMatrix ntd;
  ntd.map = std::move(loaded.m);
  auto need = [&](const char* key) {
    auto it = loaded.sidecar.find(key);
    if (it == loaded.sidecar.end())
      throw ValidationError(std::string("sidecar missing field: ") + key);
    return it->second;
  };
  ntd.tag = need("kind");
  ntd.n_space = std::stoi(need("N_s"));
  ntd.n_steps = std::stoi(need("N_t"));
  ntd.dt = std::stod(need("dt"));
  if (ntd.map.rows() != static_cast<long>(ntd.n_space) * ntd.n_steps ||
      ntd.map.rows() != ntd.map.cols())
    throw ValidationError("ntd matrix shape inconsistent with sidecar");
  return ntd;
}

void write_block_operator_binary(const std::string& path, const CausalBlockOperator& op,
                                 const std::string& kind) {
  {
    std::ofstream out = open_out(path, true);
    for (const Matrix& block : op.lag)
      for (long r = 0; r < block.rows(); ++r)
        for (long c = 0; c < block.cols(); ++c) {
          const double v = block(r, c);
          out.write(reinterpret_cast<const char*>(&v), sizeof v);
        }
  }
  json side;
  side["kind"] = kind;
  side["N_s_src"] = op.n_src;
  side["N_s_tgt"] = op.n_tgt;
  side["N_t"] = op.n_steps;
  side["dt"] = op.dt;
  side["dtype"] = "float64_le";
  side["layout"] = "row_major_blocks_by_lag";
  std::ofstream meta = open_out(path + ".json");
  meta << side.dump(2) << '\n';
}

std::string RunManifest::to_json_text() const {
  json j;
  j["command"] = command;
  j["version"] = version_string;
  j["scenario_hash"] = scenario_hash;
  json params;
  for (const auto& [k, v] : parameters) params[k] = v;
  j["parameters"] = params;
  j["outputs"] = outputs;
  j["wall_clock_seconds"] = wall_clock_seconds;
  j["threads"] = threads;
  return j.dump(2);
}

void RunManifest::write(const std::string& path) const {
  std::ofstream out = open_out(path);
  out << to_json_text() << '\n';
}

void write_plot_script(const std::string& path, const std::string& indicator_csv,
                       const std::string& contour_csv) {
  std::ofstream out = open_out(path);
  out << R"(#!/usr/bin/env python3
"""Render an indicator field CSV and the extracted contour."""
import csv
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

indicator = sys.argv[1] if len(sys.argv) > 1 else ")" << indicator_csv << R"("
contour = sys.argv[2] if len(sys.argv) > 2 else ")" << contour_csv << R"("

xs, ys, vals = [], [], []
with open(indicator) as f:
    for row in csv.DictReader(f):
        if row["region"] != "in_conductor":
            continue
        xs.append(float(row["x"]))
        ys.append(float(row["y"]))
        vals.append(float(row["density_norm"]))

xs, ys, vals = map(np.asarray, (xs, ys, vals))
fig, ax = plt.subplots(figsize=(6, 5))
sc = ax.scatter(xs, ys, c=np.log10(np.maximum(vals, 1e-300)), s=14, cmap="viridis")
fig.colorbar(sc, ax=ax, label="log10 |g|")

loops = {}
try:
    with open(contour) as f:
        for row in csv.DictReader(f):
            loops.setdefault(int(row["loop"]), []).append(
                (float(row["x"]), float(row["y"])))
except OSError:
    pass
for pts in loops.values():
    arr = np.asarray(pts)
    ax.plot(arr[:, 0], arr[:, 1], "r-", lw=2)

ax.set_aspect("equal")
ax.set_title("sampling indicator and extracted boundary")
out = indicator.rsplit(".", 1)[0] + ".png"
fig.savefig(out, dpi=160, bbox_inches="tight")
print(out)
)";
}

}  // namespace heatlsm
