#include "hyperfem/mesh.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <utility>

namespace hyperfem {

namespace {

const std::vector<std::vector<int>> kHexFaces = {
    {0, 4, 7, 3},  // x = -1
    {1, 2, 6, 5},  // x = +1
    {0, 1, 5, 4},  // y = -1
    {3, 7, 6, 2},  // y = +1
    {0, 3, 2, 1},  // z = -1
    {4, 5, 6, 7},  // z = +1
};

const std::vector<std::vector<int>> kTet4Faces = {
    {0, 2, 1},
    {0, 1, 3},
    {1, 2, 3},
    {0, 3, 2},
};

const std::vector<std::vector<int>> kTet10Faces = {
    {0, 2, 1, 6, 5, 4},
    {0, 1, 3, 4, 8, 7},
    {1, 2, 3, 5, 9, 8},
    {0, 3, 2, 7, 9, 6},
};

// Tetrahedron edges in the tet10 node convention (edge e -> node 4+e).
constexpr std::array<std::array<int, 2>, 6> kTetEdges = {{
    {0, 1}, {1, 2}, {0, 2}, {0, 3}, {1, 3}, {2, 3},
}};

BasisFamily geometry_basis(CellKind kind) {
  switch (kind) {
    case CellKind::hex8:
      return {CellShape::hexahedron, FieldRole::displacement, BasisOrder::linear,
              BasisKind::lagrange};
    case CellKind::tet4:
      return {CellShape::tetrahedron, FieldRole::displacement, BasisOrder::linear,
              BasisKind::lagrange};
    case CellKind::tet10:
      return {CellShape::tetrahedron, FieldRole::displacement, BasisOrder::quadratic,
              BasisKind::lagrange};
  }
  throw CapabilityError("geometry_basis: unknown cell kind");
}

std::string format_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Whitespace tokenizer that tracks line numbers and strips '#' comments.
class MeshTokenizer {
 public:
  MeshTokenizer(std::istream& in, std::string name)
      : in_(in), name_(std::move(name)) {}

  bool next(std::string& token) {
    while (true) {
      if (pos_ >= line_.size()) {
        if (!std::getline(in_, line_)) return false;
        ++line_number_;
        pos_ = 0;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(line_[pos_]))) {
        ++pos_;
        continue;
      }
      if (line_[pos_] == '#') {
        pos_ = line_.size();
        continue;
      }
      const size_t start = pos_;
      while (pos_ < line_.size() &&
             !std::isspace(static_cast<unsigned char>(line_[pos_])) &&
             line_[pos_] != '#') {
        ++pos_;
      }
      token = line_.substr(start, pos_ - start);
      return true;
    }
  }

  std::string expect(const std::string& what) {
    std::string token;
    if (!next(token)) fail("unexpected end of file, expected " + what);
    return token;
  }

  long expect_int(const std::string& what) {
    const std::string token = expect(what);
    try {
      size_t used = 0;
      const long value = std::stol(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      return value;
    } catch (const std::exception&) {
      fail("expected integer for " + what + ", got '" + token + "'");
    }
  }

  double expect_real(const std::string& what) {
    const std::string token = expect(what);
    try {
      size_t used = 0;
      const double value = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      return value;
    } catch (const std::exception&) {
      fail("expected number for " + what + ", got '" + token + "'");
    }
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(name_ + ":" + std::to_string(line_number_) + ": " + message);
  }

  int line_number() const { return line_number_; }

 private:
  std::istream& in_;
  std::string name_;
  std::string line_;
  size_t pos_ = 0;
  int line_number_ = 0;
};

int grid_node(int i, int j, int k, int nx, int ny) {
  return i + (nx + 1) * (j + (ny + 1) * k);
}

// Map the binary corner (ix, iy, iz) of a grid hexahedron to the local node
// index of the VTK corner ordering.
int hex_corner_local(int ix, int iy, int iz) {
  return 4 * iz + (iy ? 3 - ix : ix);
}

void split_hex_into_tets(const std::array<int, 8>& hex,
                         std::vector<std::array<int, 4>>& tets) {
  // Six tetrahedra around the main diagonal from corner (0,0,0) to (1,1,1):
  // one per axis permutation, walking the cube edges in permutation order.
  constexpr std::array<std::array<int, 3>, 6> perms = {{
      {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0},
  }};
  for (const auto& perm : perms) {
    std::array<int, 3> corner = {0, 0, 0};
    std::array<int, 4> tet;
    tet[0] = hex[hex_corner_local(0, 0, 0)];
    for (int step = 0; step < 3; ++step) {
      corner[perm[step]] = 1;
      tet[1 + step] = hex[hex_corner_local(corner[0], corner[1], corner[2])];
    }
    // Odd permutations walk the diagonal with negative orientation.
    const bool odd = (perm == std::array<int, 3>{0, 2, 1}) ||
                     (perm == std::array<int, 3>{1, 0, 2}) ||
                     (perm == std::array<int, 3>{2, 1, 0});
    if (odd) std::swap(tet[1], tet[2]);
    tets.push_back(tet);
  }
}

}  // namespace

int cell_node_count(CellKind kind) {
  switch (kind) {
    case CellKind::hex8: return 8;
    case CellKind::tet4: return 4;
    case CellKind::tet10: return 10;
  }
  throw CapabilityError("cell_node_count: unknown cell kind");
}

CellShape cell_shape(CellKind kind) {
  return kind == CellKind::hex8 ? CellShape::hexahedron : CellShape::tetrahedron;
}

const char* to_string(CellKind kind) {
  switch (kind) {
    case CellKind::hex8: return "hex8";
    case CellKind::tet4: return "tet4";
    case CellKind::tet10: return "tet10";
  }
  return "unknown";
}

int face_count(CellKind kind) { return kind == CellKind::hex8 ? 6 : 4; }

FacetKind facet_kind(CellKind kind) {
  switch (kind) {
    case CellKind::hex8: return FacetKind::quad4;
    case CellKind::tet4: return FacetKind::tri3;
    case CellKind::tet10: return FacetKind::tri6;
  }
  throw CapabilityError("facet_kind: unknown cell kind");
}

const std::vector<int>& face_local_nodes(CellKind kind, int face) {
  if (face < 0 || face >= face_count(kind)) {
    throw DomainError("face_local_nodes: face index " + std::to_string(face) +
                      " out of range for " + to_string(kind));
  }
  switch (kind) {
    case CellKind::hex8: return kHexFaces[face];
    case CellKind::tet4: return kTet4Faces[face];
    case CellKind::tet10: return kTet10Faces[face];
  }
  throw CapabilityError("face_local_nodes: unknown cell kind");
}

Vec3 reference_node_coordinate(CellKind kind, int local) {
  if (local < 0 || local >= cell_node_count(kind)) {
    throw DomainError("reference_node_coordinate: local index " +
                      std::to_string(local) + " out of range for " +
                      to_string(kind));
  }
  if (kind == CellKind::hex8) {
    constexpr std::array<std::array<double, 3>, 8> corners = {{
        {-1, -1, -1}, {+1, -1, -1}, {+1, +1, -1}, {-1, +1, -1},
        {-1, -1, +1}, {+1, -1, +1}, {+1, +1, +1}, {-1, +1, +1},
    }};
    return Vec3(corners[local][0], corners[local][1], corners[local][2]);
  }
  constexpr std::array<std::array<double, 3>, 4> simplex = {{
      {0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1},
  }};
  if (local < 4) {
    return Vec3(simplex[local][0], simplex[local][1], simplex[local][2]);
  }
  const auto& edge = kTetEdges[local - 4];
  Vec3 a(simplex[edge[0]][0], simplex[edge[0]][1], simplex[edge[0]][2]);
  Vec3 b(simplex[edge[1]][0], simplex[edge[1]][1], simplex[edge[1]][2]);
  return 0.5 * (a + b);
}

Mesh generate_block_mesh(const BoxMeshSpec& spec) {
  if (spec.nx < 1 || spec.ny < 1 || spec.nz < 1) {
    throw ConfigError("generate_block_mesh: subdivision counts must be >= 1");
  }
  if (!(spec.lx > 0) || !(spec.ly > 0) || !(spec.lz > 0)) {
    throw ConfigError("generate_block_mesh: dimensions must be positive");
  }

  Mesh mesh;
  const int nx = spec.nx, ny = spec.ny, nz = spec.nz;
  mesh.nodes.reserve((nx + 1) * (ny + 1) * (nz + 1));
  for (int k = 0; k <= nz; ++k) {
    for (int j = 0; j <= ny; ++j) {
      for (int i = 0; i <= nx; ++i) {
        mesh.nodes.push_back(Vec3(spec.lx * i / nx, spec.ly * j / ny, spec.lz * k / nz));
      }
    }
  }

  std::vector<std::array<int, 8>> hexes;
  hexes.reserve(nx * ny * nz);
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        hexes.push_back({grid_node(i, j, k, nx, ny), grid_node(i + 1, j, k, nx, ny),
                         grid_node(i + 1, j + 1, k, nx, ny), grid_node(i, j + 1, k, nx, ny),
                         grid_node(i, j, k + 1, nx, ny), grid_node(i + 1, j, k + 1, nx, ny),
                         grid_node(i + 1, j + 1, k + 1, nx, ny),
                         grid_node(i, j + 1, k + 1, nx, ny)});
      }
    }
  }

  if (!spec.tetrahedral) {
    for (const auto& h : hexes) {
      mesh.cells.push_back(Cell{CellKind::hex8, {h.begin(), h.end()}});
    }
  } else {
    std::vector<std::array<int, 4>> tets;
    tets.reserve(6 * hexes.size());
    for (const auto& h : hexes) split_hex_into_tets(h, tets);
    if (!spec.quadratic) {
      for (const auto& t : tets) {
        mesh.cells.push_back(Cell{CellKind::tet4, {t.begin(), t.end()}});
      }
    } else {
      std::map<std::pair<int, int>, int> edge_nodes;
      for (const auto& t : tets) {
        Cell cell{CellKind::tet10, {t.begin(), t.end()}};
        for (const auto& edge : kTetEdges) {
          const int a = t[edge[0]];
          const int b = t[edge[1]];
          const auto key = std::minmax(a, b);
          auto it = edge_nodes.find(key);
          if (it == edge_nodes.end()) {
            it = edge_nodes.emplace(key, static_cast<int>(mesh.nodes.size())).first;
            mesh.nodes.push_back(0.5 * (mesh.nodes[a] + mesh.nodes[b]));
          }
          cell.nodes.push_back(it->second);
        }
        mesh.cells.push_back(std::move(cell));
      }
    }
  }

  // Coordinate-based boundary sets pick up midside nodes automatically.
  const double tol = 1e-9 * std::max({spec.lx, spec.ly, spec.lz});
  const std::array<std::pair<std::string, std::function<bool(const Vec3&)>>, 6> planes = {{
      {"xmin", [&](const Vec3& x) { return std::abs(x[0]) <= tol; }},
      {"xmax", [&](const Vec3& x) { return std::abs(x[0] - spec.lx) <= tol; }},
      {"ymin", [&](const Vec3& x) { return std::abs(x[1]) <= tol; }},
      {"ymax", [&](const Vec3& x) { return std::abs(x[1] - spec.ly) <= tol; }},
      {"zmin", [&](const Vec3& x) { return std::abs(x[2]) <= tol; }},
      {"zmax", [&](const Vec3& x) { return std::abs(x[2] - spec.lz) <= tol; }},
  }};
  for (const auto& [name, predicate] : planes) {
    std::vector<int>& set = mesh.node_sets[name];
    for (int n = 0; n < static_cast<int>(mesh.nodes.size()); ++n) {
      if (predicate(mesh.nodes[n])) set.push_back(n);
    }
  }

  // A face belongs to a boundary face set when all its nodes satisfy the
  // plane predicate; works uniformly for hex and split-tet meshes.
  for (const auto& [name, predicate] : planes) {
    std::vector<FaceRef>& set = mesh.face_sets["faces_" + name];
    for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) {
      const Cell& cell = mesh.cells[c];
      for (int f = 0; f < face_count(cell.kind); ++f) {
        bool on_plane = true;
        for (int local : face_local_nodes(cell.kind, f)) {
          if (!predicate(mesh.nodes[cell.nodes[local]])) {
            on_plane = false;
            break;
          }
        }
        if (on_plane) set.push_back(FaceRef{c, f});
      }
    }
  }

  if (spec.patch_x > 0 && spec.patch_y > 0) {
    std::vector<FaceRef>& load = mesh.face_sets["faces_load"];
    for (const FaceRef& ref : mesh.face_sets["faces_zmax"]) {
      const Cell& cell = mesh.cells[ref.cell];
      bool inside = true;
      for (int local : face_local_nodes(cell.kind, ref.face)) {
        const Vec3& x = mesh.nodes[cell.nodes[local]];
        if (x[0] > spec.patch_x + tol || x[1] > spec.patch_y + tol) {
          inside = false;
          break;
        }
      }
      if (inside) load.push_back(ref);
    }
    if (load.empty()) {
      throw ConfigError("generate_block_mesh: load patch contains no complete face");
    }
  }

  validate_mesh(mesh);
  return mesh;
}

void validate_mesh(const Mesh& mesh) {
  const int n_nodes = static_cast<int>(mesh.nodes.size());
  for (size_t c = 0; c < mesh.cells.size(); ++c) {
    const Cell& cell = mesh.cells[c];
    if (static_cast<int>(cell.nodes.size()) != cell_node_count(cell.kind)) {
      throw DomainError("cell " + std::to_string(c) + ": expected " +
                        std::to_string(cell_node_count(cell.kind)) + " nodes");
    }
    for (int n : cell.nodes) {
      if (n < 0 || n >= n_nodes) {
        throw DomainError("cell " + std::to_string(c) + ": node index " +
                          std::to_string(n) + " out of range");
      }
    }
  }
  for (const auto& [name, nodes] : mesh.node_sets) {
    for (int n : nodes) {
      if (n < 0 || n >= n_nodes) {
        throw DomainError("node set '" + name + "': index out of range");
      }
    }
  }
  for (const auto& [name, faces] : mesh.face_sets) {
    for (const FaceRef& ref : faces) {
      if (ref.cell < 0 || ref.cell >= static_cast<int>(mesh.cells.size())) {
        throw DomainError("face set '" + name + "': cell index out of range");
      }
      if (ref.face < 0 || ref.face >= face_count(mesh.cells[ref.cell].kind)) {
        throw DomainError("face set '" + name + "': face index out of range");
      }
    }
  }

  // Positive isoparametric Jacobian at the quadrature points each kind uses.
  for (size_t c = 0; c < mesh.cells.size(); ++c) {
    const Cell& cell = mesh.cells[c];
    const BasisFamily basis = geometry_basis(cell.kind);
    const CellShape shape = cell_shape(cell.kind);
    const QuadratureRule rule =
        quadrature_rule(shape, shape == CellShape::hexahedron ? 3 : 4);
    Eigen::Matrix<double, Eigen::Dynamic, 3> X(cell.nodes.size(), 3);
    for (size_t a = 0; a < cell.nodes.size(); ++a) {
      X.row(a) = mesh.nodes[cell.nodes[a]].transpose();
    }
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const ShapeEval shape_data = shape_eval(basis, rule.points[q]);
      const double det = (X.transpose() * shape_data.gradients).determinant();
      if (!(det > 0.0)) {
        throw DomainError("cell " + std::to_string(c) +
                          ": inverted reference geometry (Jacobian " +
                          std::to_string(det) + " at quadrature point " +
                          std::to_string(q) + ")");
      }
    }
  }
}

Mesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open mesh file");
  MeshTokenizer tok(in, path);

  Mesh mesh;
  std::vector<int> cell_lines;
  std::string token;
  bool have_nodes = false, have_cells = false;
  while (tok.next(token)) {
    if (token == "NODES") {
      if (have_nodes) tok.fail("duplicate NODES section");
      have_nodes = true;
      const long count = tok.expect_int("node count");
      if (count < 1) tok.fail("node count must be positive");
      mesh.nodes.reserve(count);
      for (long n = 0; n < count; ++n) {
        Vec3 x;
        for (int d = 0; d < 3; ++d) x[d] = tok.expect_real("node coordinate");
        mesh.nodes.push_back(x);
      }
    } else if (token == "CELLS") {
      if (!have_nodes) tok.fail("CELLS before NODES");
      if (have_cells) tok.fail("duplicate CELLS section");
      have_cells = true;
      const long count = tok.expect_int("cell count");
      const std::string kind_name = tok.expect("cell kind");
      CellKind kind;
      if (kind_name == "hex8") kind = CellKind::hex8;
      else if (kind_name == "tet4") kind = CellKind::tet4;
      else if (kind_name == "tet10") kind = CellKind::tet10;
      else tok.fail("unknown cell kind '" + kind_name + "'");
      const int per_cell = cell_node_count(kind);
      for (long c = 0; c < count; ++c) {
        Cell cell{kind, {}};
        cell_lines.push_back(tok.line_number() + 1);
        for (int a = 0; a < per_cell; ++a) {
          const long idx = tok.expect_int("cell node index");
          if (idx < 0 || idx >= static_cast<long>(mesh.nodes.size())) {
            tok.fail("node index " + std::to_string(idx) + " out of range");
          }
          cell.nodes.push_back(static_cast<int>(idx));
        }
        mesh.cells.push_back(std::move(cell));
      }
    } else if (token == "SETS") {
      const long count = tok.expect_int("set count");
      for (long s = 0; s < count; ++s) {
        const std::string set_kind = tok.expect("set kind");
        const std::string name = tok.expect("set name");
        const long entries = tok.expect_int("set entry count");
        if (set_kind == "nodeset") {
          if (mesh.node_sets.count(name)) tok.fail("duplicate node set '" + name + "'");
          auto& set = mesh.node_sets[name];
          for (long e = 0; e < entries; ++e) {
            const long idx = tok.expect_int("node set index");
            if (idx < 0 || idx >= static_cast<long>(mesh.nodes.size())) {
              tok.fail("node index " + std::to_string(idx) + " out of range");
            }
            set.push_back(static_cast<int>(idx));
          }
        } else if (set_kind == "faceset") {
          if (mesh.face_sets.count(name)) tok.fail("duplicate face set '" + name + "'");
          auto& set = mesh.face_sets[name];
          for (long e = 0; e < entries; ++e) {
            const long cell = tok.expect_int("face set cell index");
            const long face = tok.expect_int("face set face index");
            if (cell < 0 || cell >= static_cast<long>(mesh.cells.size())) {
              tok.fail("cell index " + std::to_string(cell) + " out of range");
            }
            if (face < 0 || face >= face_count(mesh.cells[cell].kind)) {
              tok.fail("face index " + std::to_string(face) + " out of range");
            }
            set.push_back(FaceRef{static_cast<int>(cell), static_cast<int>(face)});
          }
        } else {
          tok.fail("unknown set kind '" + set_kind + "'");
        }
      }
    } else {
      tok.fail("unknown section '" + token + "'");
    }
  }
  if (!have_nodes || !have_cells) {
    throw ParseError(path + ": mesh must contain NODES and CELLS sections");
  }

  try {
    validate_mesh(mesh);
  } catch (const DomainError& err) {
    // Attach the source line of the offending cell when the message names one.
    std::string message(err.what());
    for (size_t c = 0; c < mesh.cells.size(); ++c) {
      const std::string tag = "cell " + std::to_string(c) + ":";
      if (message.rfind(tag, 0) == 0) {
        throw ParseError(path + ":" + std::to_string(cell_lines[c]) + ": " + message);
      }
    }
    throw ParseError(path + ": " + message);
  }
  return mesh;
}

void write_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_mesh: cannot open '" + path + "' for writing");
  out << "NODES " << mesh.nodes.size() << "\n";
  for (const Vec3& x : mesh.nodes) {
    out << format_coord(x[0]) << ' ' << format_coord(x[1]) << ' '
        << format_coord(x[2]) << "\n";
  }
  if (!mesh.cells.empty()) {
    const CellKind kind = mesh.cells.front().kind;
    for (const Cell& cell : mesh.cells) {
      if (cell.kind != kind) {
        throw Error("write_mesh: mixed cell kinds are not supported");
      }
    }
    out << "CELLS " << mesh.cells.size() << ' ' << to_string(kind) << "\n";
    for (const Cell& cell : mesh.cells) {
      for (size_t a = 0; a < cell.nodes.size(); ++a) {
        out << (a ? " " : "") << cell.nodes[a];
      }
      out << "\n";
    }
  }
  out << "SETS " << (mesh.node_sets.size() + mesh.face_sets.size()) << "\n";
  for (const auto& [name, nodes] : mesh.node_sets) {
    out << "nodeset " << name << ' ' << nodes.size() << "\n";
    for (size_t i = 0; i < nodes.size(); ++i) {
      out << nodes[i] << (((i + 1) % 16 == 0 || i + 1 == nodes.size()) ? "\n" : " ");
    }
  }
  for (const auto& [name, faces] : mesh.face_sets) {
    out << "faceset " << name << ' ' << faces.size() << "\n";
    for (const FaceRef& ref : faces) {
      out << ref.cell << ' ' << ref.face << "\n";
    }
  }
  if (!out) throw Error("write_mesh: write failure on '" + path + "'");
}

}  // namespace hyperfem
