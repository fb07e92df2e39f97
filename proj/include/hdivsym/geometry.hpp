// Simplicial geometry in R^n: barycentric gradients, edge tangents, Kuhn
// triangulations of the unit hypercube, the global face lattice, and
// per-subsimplex tangent/normal frames.
//
// Frames are a function of the sorted global vertex tuple alone, so every
// cell adjacent to a shared subsimplex sees bitwise the same frame. That
// determinism is what makes the assembled stress space H(div)-conforming.

#ifndef HDIVSYM_GEOMETRY_HPP
#define HDIVSYM_GEOMETRY_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hdivsym {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// An n-simplex in R^n given by n+1 ordered vertices.
struct Simplex {
  std::vector<Vector> vertices;  ///< n+1 points
  double measure = 0.0;          ///< n-volume, |det(x_1-x_0,...)|/n!
  /// Rows 0..n: gradients of the barycentric coordinates. Rows 1..n are the
  /// rows of (x_1-x_0,...,x_n-x_0)^{-1}; row 0 is minus their sum.
  Matrix grad_lambda;
  int orientation = +1;  ///< sign of det(x_1-x_0,...,x_n-x_0)

  int dim() const { return static_cast<int>(vertices.size()) - 1; }

  /// Barycentric coordinates of x, (lambda_0,...,lambda_n).
  Vector lambda(const Vector& x) const {
    const int n = dim();
    Vector lam(n + 1);
    Vector d = x - vertices[0];
    double sum = 0.0;
    for (int i = 1; i <= n; ++i) {
      lam(i) = grad_lambda.row(i).dot(d);
      sum += lam(i);
    }
    lam(0) = 1.0 - sum;
    return lam;
  }

  /// Physical point with the given barycentric coordinates.
  Vector point(const Vector& lam) const {
    Vector x = Vector::Zero(dim());
    for (int i = 0; i <= dim(); ++i) x += lam(i) * vertices[i];
    return x;
  }

  double diameter() const {
    double d = 0.0;
    for (size_t i = 0; i < vertices.size(); ++i)
      for (size_t j = i + 1; j < vertices.size(); ++j)
        d = std::max(d, (vertices[i] - vertices[j]).norm());
    return d;
  }
};

class DegenerateSimplexError : public std::runtime_error {
 public:
  explicit DegenerateSimplexError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Build a Simplex from n+1 affinely independent points in R^n.
/// Throws DegenerateSimplexError when the vertex-difference matrix is
/// (numerically) singular.
inline Simplex simplex_from_vertices(const std::vector<Vector>& vertices) {
  if (vertices.empty()) throw std::invalid_argument("empty vertex list");
  const int n = static_cast<int>(vertices[0].size());
  if (static_cast<int>(vertices.size()) != n + 1)
    throw std::invalid_argument("need n+1 vertices in R^n");

  Matrix E(n, n);
  for (int j = 1; j <= n; ++j) E.col(j - 1) = vertices[j] - vertices[0];
  Eigen::PartialPivLU<Matrix> lu(E);
  double det = lu.determinant();
  double scale = 1.0;
  for (int j = 0; j < n; ++j) scale *= std::max(E.col(j).norm(), 1e-300);
  if (std::abs(det) <= 1e-13 * scale)
    throw DegenerateSimplexError("degenerate simplex: |det| = " +
                                 std::to_string(std::abs(det)));

  Simplex s;
  s.vertices = vertices;
  s.orientation = det > 0 ? +1 : -1;
  double fact = 1.0;
  for (int i = 2; i <= n; ++i) fact *= i;
  s.measure = std::abs(det) / fact;
  Matrix Einv = lu.inverse();
  s.grad_lambda.resize(n + 1, n);
  for (int i = 1; i <= n; ++i) s.grad_lambda.row(i) = Einv.row(i - 1);
  s.grad_lambda.row(0) = -s.grad_lambda.middleRows(1, n).colwise().sum();
  return s;
}

/// Unnormalized tangents t_{i,j} = x_j - x_i for every vertex pair i < j.
inline std::map<std::pair<int, int>, Vector> edge_tangents(const Simplex& s) {
  std::map<std::pair<int, int>, Vector> t;
  const int n = s.dim();
  for (int i = 0; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j)
      t[{i, j}] = s.vertices[j] - s.vertices[i];
  return t;
}

/// l-dimensional measure of a subsimplex embedded in R^n,
/// sqrt(det(E^T E))/l! with E the edge matrix. l = 0 gives 1.
inline double subsimplex_measure(const std::vector<Vector>& pts) {
  const int l = static_cast<int>(pts.size()) - 1;
  if (l == 0) return 1.0;
  Matrix E(pts[0].size(), l);
  for (int r = 1; r <= l; ++r) E.col(r - 1) = pts[r] - pts[0];
  double g = (E.transpose() * E).determinant();
  double fact = 1.0;
  for (int i = 2; i <= l; ++i) fact *= i;
  return std::sqrt(std::max(g, 0.0)) / fact;
}

/// Tangent/normal frame of an l-subsimplex. Tangents are the unnormalized
/// differences from the first (smallest-id) vertex; normals are an
/// orthonormal basis of the orthogonal complement, produced by Gram-Schmidt
/// over the Cartesian axes in index order. For l = 0 the normals are the
/// global axes.
struct SubsimplexFrame {
  std::vector<Vector> tangents;  ///< l vectors
  std::vector<Vector> normals;   ///< n - l orthonormal vectors
};

/// Frame from the subsimplex vertex coordinates (ordered by global id).
inline SubsimplexFrame frame_from_points(const std::vector<Vector>& pts) {
  const int n = static_cast<int>(pts[0].size());
  const int l = static_cast<int>(pts.size()) - 1;
  SubsimplexFrame f;

  std::vector<Vector> ortho;  // orthonormalized tangent directions
  for (int r = 1; r <= l; ++r) {
    Vector t = pts[r] - pts[0];
    f.tangents.push_back(t);
    for (const auto& q : ortho) t -= q.dot(t) * q;
    double nrm = t.norm();
    if (nrm <= 1e-12 * (pts[r] - pts[0]).norm())
      throw DegenerateSimplexError("degenerate subsimplex tangents");
    ortho.push_back(t / nrm);
  }

  for (int axis = 0; axis < n && static_cast<int>(f.normals.size()) < n - l;
       ++axis) {
    Vector v = Vector::Unit(n, axis);
    for (const auto& q : ortho) v -= q.dot(v) * q;
    for (const auto& q : f.normals) v -= q.dot(v) * q;
    double nrm = v.norm();
    if (nrm > 1e-8) f.normals.push_back(v / nrm);
  }
  if (static_cast<int>(f.normals.size()) != n - l)
    throw DegenerateSimplexError("frame construction failed");
  return f;
}

/// Conforming simplicial mesh with a full face lattice. Immutable once
/// built; all queries are safe for concurrent readers.
struct Mesh {
  int n = 0;                            ///< ambient dimension
  std::vector<Vector> points;           ///< global vertex coordinates
  std::vector<std::vector<int>> cells;  ///< n+1 sorted global vertex ids
  double mesh_size_h = 0.0;             ///< max cell diameter

  /// For each l in 0..n-1: sorted vertex tuple -> global subsimplex id.
  std::vector<std::map<std::vector<int>, int>> lattice;
  /// For each l: id -> sorted vertex tuple.
  std::vector<std::vector<std::vector<int>>> sub_vertices;
  /// cell_subs[l][cell][local] = global id of the local-th (l+1)-subset of
  /// the cell's sorted vertex tuple, subsets enumerated in lex order.
  std::vector<std::vector<std::vector<int>>> cell_subs;
  /// For each l: id -> list of (cell, local subset index) incidences.
  std::vector<std::vector<std::vector<std::pair<int, int>>>> sub_cells;

  std::int64_t subsimplex_count(int l) const {
    return static_cast<std::int64_t>(sub_vertices[l].size());
  }

  Simplex cell_simplex(int c) const {
    std::vector<Vector> v;
    for (int id : cells[c]) v.push_back(points[id]);
    return simplex_from_vertices(v);
  }

  std::vector<Vector> sub_points(int l, int id) const {
    std::vector<Vector> v;
    for (int p : sub_vertices[l][id]) v.push_back(points[p]);
    return v;
  }
};

/// All (r+1)-subsets of {0,...,m-1} in lexicographic order.
inline std::vector<std::vector<int>> index_subsets(int m, int r) {
  std::vector<std::vector<int>> out;
  std::vector<int> c(r + 1);
  for (int i = 0; i <= r; ++i) c[i] = i;
  while (true) {
    out.push_back(c);
    int i = r;
    while (i >= 0 && c[i] == m - (r + 1) + i) --i;
    if (i < 0) break;
    ++c[i];
    for (int j = i + 1; j <= r; ++j) c[j] = c[j - 1] + 1;
  }
  return out;
}

/// Register every l-subsimplex of every cell, 0 <= l <= n-1, and build the
/// inverse incidence tables. Throws on duplicate cells.
inline void build_face_lattice(Mesh& mesh) {
  const int n = mesh.n;
  mesh.lattice.assign(n, {});
  mesh.sub_vertices.assign(n, {});
  mesh.cell_subs.assign(n, {});
  mesh.sub_cells.assign(n, {});

  std::map<std::vector<int>, int> seen_cells;
  for (size_t c = 0; c < mesh.cells.size(); ++c) {
    if (!seen_cells.emplace(mesh.cells[c], c).second)
      throw std::invalid_argument("duplicate cell in mesh at index " +
                                  std::to_string(c));
  }

  for (int l = 0; l < n; ++l) {
    auto subsets = index_subsets(n + 1, l);
    mesh.cell_subs[l].resize(mesh.cells.size());
    for (size_t c = 0; c < mesh.cells.size(); ++c) {
      mesh.cell_subs[l][c].resize(subsets.size());
      for (size_t s = 0; s < subsets.size(); ++s) {
        std::vector<int> tuple;
        for (int idx : subsets[s]) tuple.push_back(mesh.cells[c][idx]);
        auto [it, inserted] = mesh.lattice[l].emplace(
            tuple, static_cast<int>(mesh.sub_vertices[l].size()));
        if (inserted) {
          mesh.sub_vertices[l].push_back(tuple);
          mesh.sub_cells[l].emplace_back();
        }
        mesh.cell_subs[l][c][s] = it->second;
        mesh.sub_cells[l][it->second].emplace_back(static_cast<int>(c),
                                                   static_cast<int>(s));
      }
    }
  }

  double h = 0.0;
  for (size_t c = 0; c < mesh.cells.size(); ++c)
    h = std::max(h, mesh.cell_simplex(c).diameter());
  mesh.mesh_size_h = h;
}

/// Kuhn (path-simplex) triangulation of [0,1]^n with m subdivisions per
/// axis: m^n subcubes, each split into n! simplices along coordinate
/// permutations. Face-to-face and shape regular uniformly in m.
/// `cell_budget` guards against accidentally huge n! m^n requests.
inline Mesh kuhn_mesh(int n, int m, std::int64_t cell_budget = 200000) {
  if (n < 1 || m < 1) throw std::invalid_argument("kuhn_mesh: need n,m >= 1");
  std::int64_t ncells = 1;
  for (int i = 2; i <= n; ++i) ncells *= i;
  for (int i = 0; i < n; ++i) {
    ncells *= m;
    if (ncells > cell_budget)
      throw std::invalid_argument("kuhn_mesh: n! m^n exceeds cell budget");
  }

  Mesh mesh;
  mesh.n = n;

  // lattice point (z_0,...,z_{n-1}), 0 <= z_i <= m  ->  global id
  auto point_id = [&](const std::vector<int>& z) {
    int id = 0;
    for (int i = 0; i < n; ++i) id = id * (m + 1) + z[i];
    return id;
  };
  std::vector<int> z(n, 0);
  std::int64_t npoints = 1;
  for (int i = 0; i < n; ++i) npoints *= (m + 1);
  mesh.points.resize(npoints);
  while (true) {
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = double(z[i]) / m;
    mesh.points[point_id(z)] = x;
    int i = n - 1;
    while (i >= 0 && z[i] == m) z[i--] = 0;
    if (i < 0) break;
    ++z[i];
  }

  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  std::vector<int> corner(n, 0);
  while (true) {
    std::sort(perm.begin(), perm.end());
    do {
      std::vector<int> ids;
      std::vector<int> v = corner;
      ids.push_back(point_id(v));
      for (int step = 0; step < n; ++step) {
        ++v[perm[step]];
        ids.push_back(point_id(v));
      }
      std::sort(ids.begin(), ids.end());
      mesh.cells.push_back(ids);
    } while (std::next_permutation(perm.begin(), perm.end()));
    int i = n - 1;
    while (i >= 0 && corner[i] == m - 1) corner[i--] = 0;
    if (i < 0) break;
    ++corner[i];
  }

  build_face_lattice(mesh);
  return mesh;
}

/// Mesh consisting of one simplex (vertex ids follow the input order).
inline Mesh single_cell_mesh(const std::vector<Vector>& vertices) {
  Mesh mesh;
  mesh.n = static_cast<int>(vertices[0].size());
  mesh.points = vertices;
  std::vector<int> ids(vertices.size());
  for (size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
  mesh.cells.push_back(ids);
  build_face_lattice(mesh);
  return mesh;
}

/// Frame of a global subsimplex, computed from its sorted vertex tuple.
inline SubsimplexFrame subsimplex_frame(const Mesh& mesh, int l, int id) {
  if (l < 0 || l >= mesh.n || id < 0 || id >= mesh.subsimplex_count(l))
    throw std::out_of_range("subsimplex_frame: no such subsimplex");
  return frame_from_points(mesh.sub_points(l, id));
}

}  // namespace hdivsym

#endif  // HDIVSYM_GEOMETRY_HPP
