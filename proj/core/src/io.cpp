#include "invsrc/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace invsrc {

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

}  // namespace

void write_vtk(const std::string& path, const TriMesh& mesh,
               const std::vector<std::pair<std::string, Eigen::VectorXd>>& point_data,
               const std::vector<std::pair<std::string, Eigen::VectorXd>>& cell_data) {
  std::ofstream out = open_out(path);
  out << "# vtk DataFile Version 3.0\n";
  out << "invsrc triangulation\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";

  out << "POINTS " << mesh.n_nodes() << " double\n";
  for (const Node& p : mesh.nodes) out << format_full(p.x) << ' ' << format_full(p.y) << " 0\n";

  out << "CELLS " << mesh.n_tris() << ' ' << 4 * mesh.n_tris() << '\n';
  for (const Tri& t : mesh.tris) out << "3 " << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << '\n';

  out << "CELL_TYPES " << mesh.n_tris() << '\n';
  for (int t = 0; t < mesh.n_tris(); ++t) out << "5\n";  // VTK_TRIANGLE

  if (!point_data.empty()) {
    out << "POINT_DATA " << mesh.n_nodes() << '\n';
    for (const auto& [name, values] : point_data) {
      if (values.size() != mesh.n_nodes())
        throw std::invalid_argument("write_vtk: point field '" + name + "' has wrong size");
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (Eigen::Index i = 0; i < values.size(); ++i) out << format_full(values[i]) << '\n';
    }
  }
  if (!cell_data.empty()) {
    out << "CELL_DATA " << mesh.n_tris() << '\n';
    for (const auto& [name, values] : cell_data) {
      if (values.size() != mesh.n_tris())
        throw std::invalid_argument("write_vtk: cell field '" + name + "' has wrong size");
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (Eigen::Index i = 0; i < values.size(); ++i) out << format_full(values[i]) << '\n';
    }
  }
  if (!out) throw std::runtime_error("write_vtk: write failed: " + path);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out = open_out(path);
  auto emit = [&out](const std::vector<std::string>& row) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << csv_escape(row[i]);
    }
    out << '\n';
  };
  emit(header);
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::invalid_argument("write_csv: row width does not match header");
    emit(row);
  }
  if (!out) throw std::runtime_error("write_csv: write failed: " + path);
}

void write_history_csv(const std::string& path, const std::vector<CgIterate>& history) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(history.size());
  for (const CgIterate& it : history)
    rows.push_back({std::to_string(it.k), format_full(it.cost), format_full(it.grad_norm),
                    format_full(it.t), format_full(it.beta), format_full(it.tolerance)});
  write_csv(path, {"k", "cost", "grad_norm", "t_k", "beta_k", "tolerance"}, rows);
}

}  // namespace invsrc
