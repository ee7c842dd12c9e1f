#pragma once

#include "hyperfem/elements.hpp"
#include "hyperfem/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace hyperfem {

enum class CellKind { hex8, tet4, tet10 };

int cell_node_count(CellKind kind);
CellShape cell_shape(CellKind kind);
const char* to_string(CellKind kind);

// Local facet tables.  Faces are listed with outward orientation on the
// reference cell; quadratic tetrahedra append the three edge nodes in the
// tri6 convention (mid 01, mid 12, mid 02 of the face-local corners).
int face_count(CellKind kind);
FacetKind facet_kind(CellKind kind);
const std::vector<int>& face_local_nodes(CellKind kind, int face);

// Reference-cell coordinate of a local node, matching the shape function
// numbering (hex corners at +-1, tetrahedron corners at the unit simplex
// vertices with edge midpoints in between).
Vec3 reference_node_coordinate(CellKind kind, int local);

struct Cell {
  CellKind kind;
  std::vector<int> nodes;
};

struct FaceRef {
  int cell;
  int face;
};

struct Mesh {
  std::vector<Vec3> nodes;
  std::vector<Cell> cells;
  std::map<std::string, std::vector<int>> node_sets;
  std::map<std::string, std::vector<FaceRef>> face_sets;
};

// Structured box [0,lx]x[0,ly]x[0,lz].  Always emits the six canonical node
// sets (xmin .. zmax) and face sets (faces_xmin .. faces_zmax); a positive
// patch extent adds the face set "faces_load" covering the top-face cells
// inside [0,patch_x]x[0,patch_y].  With tetrahedral=true every hexahedron is
// split into six tetrahedra (conforming diagonal pattern); quadratic=true
// additionally inserts edge midpoint nodes (tet10 cells).
struct BoxMeshSpec {
  int nx = 1, ny = 1, nz = 1;
  double lx = 1.0, ly = 1.0, lz = 1.0;
  bool tetrahedral = false;
  bool quadratic = false;
  double patch_x = 0.0, patch_y = 0.0;
};

Mesh generate_block_mesh(const BoxMeshSpec& spec);

// Bounds and geometry validation: node indices in range, set references
// valid, and a positive isoparametric Jacobian at every quadrature point of
// every cell.  Throws ParseError (read paths supply line context) or
// DomainError.
void validate_mesh(const Mesh& mesh);

// ASCII mesh format, '#' comments allowed anywhere:
//   NODES <count>            followed by <count> lines "x y z"
//   CELLS <count> <kind>     kind in {hex8, tet4, tet10}; one cell per line
//   SETS <count>             followed by <count> set blocks:
//     nodeset <name> <count>   then <count> node indices
//     faceset <name> <count>   then <count> pairs "cell face"
// All indices 0-based.
Mesh read_mesh(const std::string& path);
void write_mesh(const Mesh& mesh, const std::string& path);

}  // namespace hyperfem
