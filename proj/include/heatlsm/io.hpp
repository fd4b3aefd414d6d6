#pragma once

#include "heatlsm/forward.hpp"
#include "heatlsm/sampling.hpp"

#include <map>
#include <string>
#include <vector>

namespace heatlsm {

/// Trace CSV: one row per (node, step) with columns
/// node,arc_param,time,value. Values printed with %.17g (bit-stable).
void write_trace_csv(const std::string& path, const SpaceTimeMesh& mesh,
                     const Matrix& values);

void write_indicator_csv(const std::string& path, const IndicatorField& field);

void write_contour_csv(const std::string& path, const ContourResult& contour);

/// Flat little-endian binary of row-major doubles plus a JSON sidecar
/// (<path>.json) describing the payload.
void write_matrix_binary(const std::string& path, const Matrix& m,
                         const std::map<std::string, std::string>& sidecar_fields);

struct LoadedMatrix {
  Matrix m;
  std::map<std::string, std::string> sidecar;
};
LoadedMatrix read_matrix_binary(const std::string& path);

void write_ntd_binary(const std::string& path, const NtdGapMatrix& ntd);
NtdGapMatrix read_ntd_binary(const std::string& path);

/// Block-sequence dump of a causal operator (one row-major block per lag).
void write_block_operator_binary(const std::string& path, const CausalBlockOperator& op,
                                 const std::string& kind);

struct RunManifest {
  std::string command;
  std::string scenario_hash;
  std::map<std::string, std::string> parameters;
  std::vector<std::string> outputs;
  Real wall_clock_seconds = 0.0;
  int threads = 1;

  std::string to_json_text() const;
  void write(const std::string& path) const;
};

/// Matplotlib script rendering an indicator CSV and contour CSV.
void write_plot_script(const std::string& path, const std::string& indicator_csv,
                       const std::string& contour_csv);

std::string format_real(Real v);

}  // namespace heatlsm
