#pragma once

#include "invsrc/experiments.hpp"

#include <string>
#include <utility>
#include <vector>

namespace invsrc {

// Full-precision number formatting shared by every text artifact ("%.17g",
// '.' decimal separator), so reruns of the same configuration are
// byte-identical.
std::string format_full(double v);

// Legacy ASCII VTK (DataFile 3.0, UNSTRUCTURED_GRID with triangle cells);
// scalar fields per vertex and per cell.
void write_vtk(const std::string& path, const TriMesh& mesh,
               const std::vector<std::pair<std::string, Eigen::VectorXd>>& point_data = {},
               const std::vector<std::pair<std::string, Eigen::VectorXd>>& cell_data = {});

// Minimal RFC-4180 CSV: comma separated, CRLF-free LF line ends, fields
// quoted only when they contain a comma, quote or newline.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Iteration history of one minimizer run: k, cost, grad_norm, t_k, beta_k,
// tolerance.
void write_history_csv(const std::string& path, const std::vector<CgIterate>& history);

}  // namespace invsrc
