#pragma once

#include "hyperfem/assembly.hpp"

#include <string>
#include <vector>

namespace hyperfem {

// Evaluates solution fields at mesh nodes.  Displacement is the interpolated
// field value, not the raw coefficient, which matters for non-interpolatory
// bases at edge midpoints.  Pressure at a node averages the constant values
// of the adjacent cells (discontinuous layout) or evaluates the continuous
// linear field (vertex layout).  The referenced problem must outlive the
// sampler.
class FieldSampler {
 public:
  explicit FieldSampler(const Problem& problem);

  Vec3 displacement(const VecX& u, int node) const;
  double pressure(const VecX& p, int node) const;

 private:
  const Problem* problem_;
  std::vector<int> anchor_cell_;   // -1 for a node outside every cell
  std::vector<int> anchor_local_;
  std::vector<std::vector<int>> adjacent_cells_;
  std::vector<VecX> disp_values_;  // displacement shape values at local node
  std::vector<VecX> pres_values_;  // pressure shape values at local node
};

// Index of the mesh node closest to the point; ties break to the lowest
// index.
int nearest_node(const Mesh& mesh, const Vec3& point);

// Minimal RFC-4180 quoting: fields containing commas, quotes or newlines are
// wrapped in double quotes with embedded quotes doubled.
std::string csv_quote(const std::string& field);

struct ProbeRow {
  int step;
  double load_factor;
  std::string probe;
  Vec3 displacement;
  double pressure;
};

void write_probe_csv(const std::string& path, const std::vector<ProbeRow>& rows);
void write_convergence_csv(const std::string& path, const ConvergenceLog& log);

// Legacy ASCII VTK unstructured grid with evaluated nodal displacement
// vectors and the pressure field (cell data for the discontinuous layout,
// point data for the vertex layout).
void write_vtk(const Problem& problem, const VecX& u, const VecX& p,
               const std::string& path);

}  // namespace hyperfem
