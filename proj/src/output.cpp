#include "hyperfem/output.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <string>

namespace hyperfem {

namespace {

std::string real_field(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

std::ofstream open_output(const std::string& path, const char* who) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(std::string(who) + ": cannot write " + path);
  return out;
}

int vtk_cell_type(CellKind kind) {
  switch (kind) {
    case CellKind::hex8: return 12;
    case CellKind::tet4: return 10;
    case CellKind::tet10: return 24;
  }
  throw CapabilityError("vtk_cell_type: unknown cell kind");
}

}  // namespace

FieldSampler::FieldSampler(const Problem& problem) : problem_(&problem) {
  const Mesh& mesh = problem.mesh;
  const int n_nodes = static_cast<int>(mesh.nodes.size());
  anchor_cell_.assign(n_nodes, -1);
  anchor_local_.assign(n_nodes, -1);
  adjacent_cells_.resize(n_nodes);
  for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) {
    const Cell& cell = mesh.cells[c];
    for (int a = 0; a < static_cast<int>(cell.nodes.size()); ++a) {
      const int g = cell.nodes[a];
      adjacent_cells_[g].push_back(c);
      if (anchor_cell_[g] < 0) {
        anchor_cell_[g] = c;
        anchor_local_[g] = a;
      }
    }
  }
  if (!mesh.cells.empty()) {
    const CellKind kind = mesh.cells.front().kind;
    const int per_cell = cell_node_count(kind);
    disp_values_.resize(per_cell);
    pres_values_.resize(per_cell);
    for (int local = 0; local < per_cell; ++local) {
      const Vec3 xi = reference_node_coordinate(kind, local);
      disp_values_[local] = shape_eval(problem.element.displacement, xi).values;
      pres_values_[local] = shape_eval(problem.element.pressure, xi).values;
    }
  }
}

Vec3 FieldSampler::displacement(const VecX& u, int node) const {
  const int c = anchor_cell_[node];
  if (c < 0) return u.segment<3>(3 * node);
  const Cell& cell = problem_->mesh.cells[c];
  const VecX& values = disp_values_[anchor_local_[node]];
  Vec3 out = Vec3::Zero();
  for (int a = 0; a < static_cast<int>(cell.nodes.size()); ++a) {
    out += values[a] * u.segment<3>(3 * cell.nodes[a]);
  }
  return out;
}

double FieldSampler::pressure(const VecX& p, int node) const {
  const DofMap& dofs = problem_->dofs;
  if (dofs.pressure_layout == PressureLayout::per_element) {
    const auto& cells = adjacent_cells_[node];
    if (cells.empty()) return 0.0;
    double sum = 0.0;
    for (int c : cells) sum += p[dofs.pressure_dof[c]];
    return sum / static_cast<double>(cells.size());
  }
  const int c = anchor_cell_[node];
  if (c < 0) return 0.0;
  const Cell& cell = problem_->mesh.cells[c];
  const VecX& values = pres_values_[anchor_local_[node]];
  double out = 0.0;
  for (int a = 0; a < values.size(); ++a) {
    out += values[a] * p[dofs.pressure_dof[cell.nodes[a]]];
  }
  return out;
}

int nearest_node(const Mesh& mesh, const Vec3& point) {
  if (mesh.nodes.empty()) throw DomainError("nearest_node: empty mesh");
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(mesh.nodes.size()); ++i) {
    const double d = (mesh.nodes[i] - point).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

void write_probe_csv(const std::string& path, const std::vector<ProbeRow>& rows) {
  std::ofstream out = open_output(path, "write_probe_csv");
  out << "step,load_factor,probe,ux,uy,uz,pressure\n";
  for (const ProbeRow& row : rows) {
    out << row.step << "," << real_field(row.load_factor) << ","
        << csv_quote(row.probe) << "," << real_field(row.displacement[0]) << ","
        << real_field(row.displacement[1]) << "," << real_field(row.displacement[2])
        << "," << real_field(row.pressure) << "\n";
  }
  if (!out) throw Error("write_probe_csv: write failed for " + path);
}

void write_convergence_csv(const std::string& path, const ConvergenceLog& log) {
  std::ofstream out = open_output(path, "write_convergence_csv");
  out << "step,iteration,residual_norm\n";
  for (const StepRecord& record : log.steps) {
    for (size_t i = 0; i < record.residual_norms.size(); ++i) {
      out << record.step << "," << i << "," << real_field(record.residual_norms[i])
          << "\n";
    }
  }
  if (!out) throw Error("write_convergence_csv: write failed for " + path);
}

void write_vtk(const Problem& problem, const VecX& u, const VecX& p,
               const std::string& path) {
  const Mesh& mesh = problem.mesh;
  std::ofstream out = open_output(path, "write_vtk");
  out << "# vtk DataFile Version 3.0\n";
  out << "mixed displacement-pressure solution\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";

  out << "POINTS " << mesh.nodes.size() << " double\n";
  for (const Vec3& x : mesh.nodes) {
    out << real_field(x[0]) << " " << real_field(x[1]) << " " << real_field(x[2])
        << "\n";
  }

  size_t entry_count = 0;
  for (const Cell& cell : mesh.cells) entry_count += cell.nodes.size() + 1;
  out << "CELLS " << mesh.cells.size() << " " << entry_count << "\n";
  for (const Cell& cell : mesh.cells) {
    out << cell.nodes.size();
    for (int g : cell.nodes) out << " " << g;
    out << "\n";
  }
  out << "CELL_TYPES " << mesh.cells.size() << "\n";
  for (const Cell& cell : mesh.cells) out << vtk_cell_type(cell.kind) << "\n";

  const FieldSampler sampler(problem);
  out << "POINT_DATA " << mesh.nodes.size() << "\n";
  out << "VECTORS displacement double\n";
  for (int node = 0; node < static_cast<int>(mesh.nodes.size()); ++node) {
    const Vec3 d = sampler.displacement(u, node);
    out << real_field(d[0]) << " " << real_field(d[1]) << " " << real_field(d[2])
        << "\n";
  }

  if (problem.dofs.pressure_layout == PressureLayout::per_node) {
    out << "SCALARS pressure double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (int node = 0; node < static_cast<int>(mesh.nodes.size()); ++node) {
      out << real_field(sampler.pressure(p, node)) << "\n";
    }
  } else {
    out << "CELL_DATA " << mesh.cells.size() << "\n";
    out << "SCALARS pressure double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) {
      out << real_field(p[problem.dofs.pressure_dof[c]]) << "\n";
    }
  }
  if (!out) throw Error("write_vtk: write failed for " + path);
}

}  // namespace hyperfem
