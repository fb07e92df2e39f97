// Local finite elements for the H(div,S)-conforming P_k symmetric-stress /
// discontinuous P_{k-1} displacement pair on a simplex:
//
//  - the stress degree-of-freedom set: mean moments of t^T tau nu and
//    nu^T tau nu over every subsimplex, plus interior moments against the
//    rank-one bubble space  sum_{i<j} lambda_i lambda_j P_{k-2} T_{i,j};
//  - the dual shape basis obtained by inverting the generalized Vandermonde
//    (DOF) matrix over the homogeneous monomial x symmetric-unit spanning
//    set;
//  - the bubble space, the trace-kernel check (bubbles == polynomials with
//    vanishing boundary normal trace), and the divergence-range check
//    (div of the bubble space == orthogonal complement of the rigid
//    motions in P_{k-1}(K;R^n)).
//
// Shape bases are built per physical element. Symmetric H(div) elements are
// not affine-equivalent under a plain pullback (frames rotate with the
// geometry), so direct construction on each cell is the correct route and
// cheap at the mesh sizes this library targets.

#ifndef HDIVSYM_ELEMENTS_HPP
#define HDIVSYM_ELEMENTS_HPP

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <vector>

#include "hdivsym/combinat.hpp"
#include "hdivsym/geometry.hpp"
#include "hdivsym/polynomial.hpp"
#include "hdivsym/symtensor.hpp"

namespace hdivsym {

using VecPoly = std::vector<BarycentricPoly>;  ///< one BarycentricPoly per component

//---------------------------------------------------------------------------
// Symmetric-tensor-valued polynomials
//---------------------------------------------------------------------------

/// Symmetric n x n matrix of barycentric polynomials, packed like SymTensor.
struct SymPolyMatrix {
  int n = 0;                  ///< spatial dimension
  std::vector<BarycentricPoly> comp;  ///< n(n+1)/2 entries, (i,j) i<=j

  SymPolyMatrix() = default;
  SymPolyMatrix(int n_, int poly_dim)
      : n(n_), comp(n_ * (n_ + 1) / 2, BarycentricPoly(poly_dim)) {}

  /// Constant tensor times a scalar polynomial.
  static SymPolyMatrix scaled(const SymTensor& t, const BarycentricPoly& p) {
    SymPolyMatrix m(t.n(), p.dim());
    for (int c = 0; c < t.packed_size(); ++c) m.comp[c] = p * t.packed()(c);
    return m;
  }

  const BarycentricPoly& operator()(int i, int j) const {
    return comp[packed_index(i, j, n)];
  }
  BarycentricPoly& operator()(int i, int j) {
    return comp[packed_index(i, j, n)];
  }

  SymPolyMatrix& operator+=(const SymPolyMatrix& o) {
    for (size_t c = 0; c < comp.size(); ++c) comp[c] += o.comp[c];
    return *this;
  }
  SymPolyMatrix& operator-=(const SymPolyMatrix& o) {
    for (size_t c = 0; c < comp.size(); ++c) comp[c] -= o.comp[c];
    return *this;
  }
  SymPolyMatrix& operator*=(double s) {
    for (auto& p : comp) p *= s;
    return *this;
  }

  int degree() const {
    int d = 0;
    for (const auto& p : comp) d = std::max(d, p.degree());
    return d;
  }

  SymTensor value_at(const Vector& lam) const {
    SymTensor t(n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) t(i, j) = (*this)(i, j).eval_lambda(lam);
    return t;
  }

  /// a^T tau(x) b as a scalar polynomial.
  BarycentricPoly bilinear_poly(const Vector& a, const Vector& b) const {
    BarycentricPoly r(comp[0].dim());
    for (int p = 0; p < n; ++p) {
      r += comp[packed_index(p, p, n)] * (a(p) * b(p));
      for (int q = p + 1; q < n; ++q)
        r += comp[packed_index(p, q, n)] * (a(p) * b(q) + a(q) * b(p));
    }
    return r;
  }

  /// Frobenius product tau : rho as a scalar polynomial.
  BarycentricPoly frobenius_poly(const SymPolyMatrix& o) const {
    BarycentricPoly r(comp[0].dim());
    for (int p = 0; p < n; ++p)
      for (int q = p; q < n; ++q) {
        double w = (p == q) ? 1.0 : 2.0;
        r += (comp[packed_index(p, q, n)] * o.comp[packed_index(p, q, n)]) * w;
      }
    return r;
  }
};

/// Row-wise divergence (div tau)_i = sum_j d_j tau_{ij}; degree drops by one.
inline VecPoly local_divergence(const SymPolyMatrix& tau, const Simplex& s) {
  const int n = s.dim();
  VecPoly div(n, BarycentricPoly(tau.comp[0].dim()));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const BarycentricPoly& entry = tau(i, j);
      for (int v = 0; v <= n; ++v) {
        BarycentricPoly dv = entry.d_lambda(v);
        if (!dv.empty()) div[i] += dv * s.grad_lambda(v, j);
      }
    }
  return div;
}

/// Isotropic compliance applied entrywise to a tensor polynomial.
inline SymPolyMatrix compliance_apply(const SymPolyMatrix& tau, double mu,
                                      double lambda) {
  if (mu <= 0.0) throw std::invalid_argument("compliance: mu must be > 0");
  const int n = tau.n;
  double c = lambda / (2.0 * mu + n * lambda);
  BarycentricPoly tr(tau.comp[0].dim());
  for (int p = 0; p < n; ++p) tr += tau(p, p);
  SymPolyMatrix out = tau;
  for (int p = 0; p < n; ++p) out(p, p) -= tr * c;
  out *= 1.0 / (2.0 * mu);
  return out;
}

//---------------------------------------------------------------------------
// Degrees of freedom
//---------------------------------------------------------------------------

enum class DofKind { FaceMoment, InteriorBubble };

/// One stress degree of freedom. Face moments are mean moments over a
/// subsimplex of a frame component of tau (tangent-normal or
/// normal-normal); interior DOFs are integrals of tau against a bubble
/// basis function. Descriptors depend only on global subsimplex data, so
/// they are identical from every adjacent cell.
struct DofDescriptor {
  DofKind kind = DofKind::FaceMoment;

  // face moments
  int l = -1;                 ///< subsimplex dimension
  int sub_id = -1;            ///< global subsimplex id
  bool tangent_normal = false;  ///< component t_a^T tau nu_b vs nu_a^T tau nu_b
  int comp_a = -1;            ///< tangent index (tangent_normal) or first normal
  int comp_b = -1;            ///< normal index; comp_a <= comp_b when normal pair
  MultiIndex moment;          ///< homogeneous degree k-l-1 over l+1 face coords

  // interior bubbles
  int bi = -1, bj = -1;       ///< vertex pair of T_{i,j}
  MultiIndex bubble_poly;     ///< homogeneous degree k-2 weight over n+1 coords
};

/// Frame lookup used by element construction; the cell argument lets test
/// harnesses inject frames that disagree between neighbours (negative
/// controls for the conformity checks). The default ignores the cell.
using FrameProvider =
    std::function<SubsimplexFrame(const Mesh&, int l, int id, int cell)>;

inline SubsimplexFrame default_frame(const Mesh& mesh, int l, int id,
                                     int /*cell*/) {
  return subsimplex_frame(mesh, l, id);
}

/// The ordered DOF list of a cell: for each l-subsimplex (l ascending,
/// subsets of the cell tuple in lex order) all frame components times all
/// mean-moment weights, then all interior bubble DOFs. Total dim P_k(K;S).
inline std::vector<DofDescriptor> stress_dofs(const Mesh& mesh, int cell,
                                              int k) {
  if (k < 2) throw std::invalid_argument("stress_dofs: k must be >= 2");
  const int n = mesh.n;
  std::vector<DofDescriptor> dofs;

  for (int l = 0; l < n; ++l) {
    MonomialSet moments(l + 1, k - l - 1);
    const auto& subs = mesh.cell_subs[l][cell];
    for (size_t s = 0; s < subs.size(); ++s) {
      DofDescriptor d;
      d.kind = DofKind::FaceMoment;
      d.l = l;
      d.sub_id = subs[s];
      for (int a = 0; a < l; ++a)
        for (int b = 0; b < n - l; ++b) {
          d.tangent_normal = true;
          d.comp_a = a;
          d.comp_b = b;
          for (const auto& m : moments.list) {
            d.moment = m;
            dofs.push_back(d);
          }
        }
      for (int a = 0; a < n - l; ++a)
        for (int b = a; b < n - l; ++b) {
          d.tangent_normal = false;
          d.comp_a = a;
          d.comp_b = b;
          for (const auto& m : moments.list) {
            d.moment = m;
            dofs.push_back(d);
          }
        }
    }
  }

  MonomialSet weights(n + 1, k - 2);
  for (auto [i, j] : strict_pairs(n + 1)) {
    DofDescriptor d;
    d.kind = DofKind::InteriorBubble;
    d.bi = i;
    d.bj = j;
    for (const auto& w : weights.list) {
      d.bubble_poly = w;
      dofs.push_back(d);
    }
  }
  return dofs;
}

/// Number of DOFs attached to one l-subsimplex of an n-cell at degree k;
/// the within-subsimplex enumeration order of stress_dofs is
/// component-major, moment-minor.
inline std::int64_t dofs_per_subsimplex(int n, int l, int k) {
  return std::int64_t(n - l) * (n + l + 1) / 2 * binomial(k - 1, l);
}

/// Cell-local positions (indices into the sorted cell tuple) of a global
/// subsimplex's vertices.
inline std::vector<int> local_positions(const Mesh& mesh, int cell, int l,
                                        int sub_id) {
  const auto& tuple = mesh.sub_vertices[l][sub_id];
  const auto& cellv = mesh.cells[cell];
  std::vector<int> pos;
  for (int gid : tuple) {
    auto it = std::lower_bound(cellv.begin(), cellv.end(), gid);
    if (it == cellv.end() || *it != gid)
      throw std::logic_error("subsimplex vertex not in cell");
    pos.push_back(static_cast<int>(it - cellv.begin()));
  }
  return pos;
}

/// Evaluate one DOF on an arbitrary tensor polynomial of degree <= k over
/// the cell's barycentric coordinates.
inline double apply_dof(const Mesh& mesh, int cell, int k,
                        const DofDescriptor& d, const SymPolyMatrix& tau,
                        const FrameProvider& frames = default_frame) {
  const int n = mesh.n;
  Simplex s = mesh.cell_simplex(cell);
  if (tau.degree() > k)
    throw std::invalid_argument("apply_dof: polynomial degree exceeds k");

  if (d.kind == DofKind::InteriorBubble) {
    BarycentricPoly w =
        BarycentricPoly::coordinate(n, d.bi) *
        BarycentricPoly::coordinate(n, d.bj) *
        BarycentricPoly::monomial(n, d.bubble_poly);
    TensorBasis tb = rank_one_tangent_tensors(s);
    SymPolyMatrix theta =
        SymPolyMatrix::scaled(tb.tangent(d.bi, d.bj), w);
    return integrate(s, tau.frobenius_poly(theta));
  }

  SubsimplexFrame fr = frames(mesh, d.l, d.sub_id, cell);
  const Vector& a = d.tangent_normal ? fr.tangents[d.comp_a]
                                     : fr.normals[d.comp_a];
  const Vector& b = fr.normals[d.comp_b];
  BarycentricPoly comp = tau.bilinear_poly(a, b);
  std::vector<int> pos = local_positions(mesh, cell, d.l, d.sub_id);
  BarycentricPoly restricted = restrict_to_subsimplex(comp, pos);
  BarycentricPoly weighted =
      restricted * BarycentricPoly::monomial(d.l, d.moment);
  // mean moment: the subsimplex measure cancels against the closed form
  double r = 0.0;
  for (const auto& [alpha, c] : weighted.terms())
    r += c * unit_monomial_integral(alpha, d.l);
  return r;
}

//---------------------------------------------------------------------------
// Local shape basis by Vandermonde inversion
//---------------------------------------------------------------------------

class UnisolvenceError : public std::runtime_error {
 public:
  explicit UnisolvenceError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Degree-k symmetric-stress element on one cell. Shape function j is
///   sum_{(pq,m)} coeff((pq,m), j) * lambda^m E_pq
/// over the homogeneous degree-k monomials m and canonical symmetric units
/// E_pq; columns of `coeff` are dual to the DOFs.
struct StressElement {
  int n = 0, k = 0, cell = -1;
  Simplex simplex;
  std::vector<DofDescriptor> dofs;
  MonomialSet mono;        ///< homogeneous degree-k monomials, n+1 vars
  Eigen::MatrixXd coeff;   ///< (dim_S * mono.size()) x ndofs
  double vandermonde_condition = 0.0;  ///< kappa_1 estimate of the DOF matrix

  int ndofs() const { return static_cast<int>(dofs.size()); }
  int nmono() const { return mono.size(); }
  int spanning_dim() const { return static_cast<int>(coeff.rows()); }

  /// Value of sum_j c_j shape_j at barycentric coordinates lam.
  SymTensor evaluate(const Eigen::VectorXd& local_coeffs,
                     const Vector& lam) const {
    Eigen::VectorXd span = coeff * local_coeffs;
    Eigen::VectorXd monovals(nmono());
    for (int m = 0; m < nmono(); ++m) {
      double t = 1.0;
      for (int v = 0; v <= n; ++v)
        for (int e = 0; e < mono.list[m][v]; ++e) t *= lam(v);
      monovals(m) = t;
    }
    SymTensor out(n);
    for (int pq = 0; pq < out.packed_size(); ++pq)
      out.packed()(pq) = monovals.dot(span.segment(pq * nmono(), nmono()));
    return out;
  }

  /// Shape function j as an explicit tensor polynomial.
  SymPolyMatrix shape_poly(int j) const {
    SymPolyMatrix out(n, n);
    for (int pq = 0; pq < static_cast<int>(out.comp.size()); ++pq)
      for (int m = 0; m < nmono(); ++m) {
        double c = coeff(pq * nmono() + m, j);
        if (c != 0.0) out.comp[pq].add_term(mono.list[m], c);
      }
    return out;
  }
};

/// DOF matrix rows over the spanning set {lambda^m E_pq}: row d, column
/// (pq,m) is dof_d(lambda^m E_pq). This is the generalized Vandermonde
/// matrix whose invertibility is exactly unisolvence.
inline Eigen::MatrixXd stress_dof_matrix(const Mesh& mesh, int cell, int k,
                                         const std::vector<DofDescriptor>& dofs,
                                         const MonomialSet& mono,
                                         const FrameProvider& frames) {
  const int n = mesh.n;
  const int nmono = mono.size();
  const int dimS = n * (n + 1) / 2;
  Simplex s = mesh.cell_simplex(cell);
  TensorBasis tb = rank_one_tangent_tensors(s);

  Eigen::MatrixXd D =
      Eigen::MatrixXd::Zero(static_cast<int>(dofs.size()), dimS * nmono);

  // cached per-subsimplex data
  struct SubCache {
    SubsimplexFrame frame;
    std::vector<int> pos;                  // cell-local vertex positions
    std::vector<std::pair<int, MultiIndex>> restricted;  // (mono idx, face exps)
  };
  std::map<std::pair<int, int>, SubCache> cache;
  auto get_cache = [&](int l, int sub_id) -> SubCache& {
    auto key = std::make_pair(l, sub_id);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    SubCache sc;
    sc.frame = frames(mesh, l, sub_id, cell);
    sc.pos = local_positions(mesh, cell, l, sub_id);
    std::vector<int> where(n + 1, -1);
    for (size_t r = 0; r < sc.pos.size(); ++r) where[sc.pos[r]] = int(r);
    for (int m = 0; m < nmono; ++m) {
      MultiIndex face(l + 1, 0);
      bool ok = true;
      for (int v = 0; v <= n; ++v) {
        if (mono.list[m][v] == 0) continue;
        if (where[v] < 0) {
          ok = false;
          break;
        }
        face[where[v]] = mono.list[m][v];
      }
      if (ok) sc.restricted.emplace_back(m, face);
    }
    return cache.emplace(key, std::move(sc)).first->second;
  };

  Eigen::VectorXd wF = frobenius_weights(n);

  for (size_t di = 0; di < dofs.size(); ++di) {
    const DofDescriptor& d = dofs[di];
    if (d.kind == DofKind::FaceMoment) {
      SubCache& sc = get_cache(d.l, d.sub_id);
      const Vector& a = d.tangent_normal ? sc.frame.tangents[d.comp_a]
                                         : sc.frame.normals[d.comp_a];
      const Vector& b = sc.frame.normals[d.comp_b];
      // component weights of a^T E_pq b
      Eigen::VectorXd w(dimS);
      for (int p = 0; p < n; ++p) {
        w(packed_index(p, p, n)) = a(p) * b(p);
        for (int q = p + 1; q < n; ++q)
          w(packed_index(p, q, n)) = a(p) * b(q) + a(q) * b(p);
      }
      MultiIndex sum(d.l + 1);
      for (const auto& [m, face] : sc.restricted) {
        for (int r = 0; r <= d.l; ++r) sum[r] = face[r] + d.moment[r];
        double mean = unit_monomial_integral(sum, d.l);
        for (int pq = 0; pq < dimS; ++pq)
          if (w(pq) != 0.0) D(di, pq * nmono + m) = w(pq) * mean;
      }
    } else {
      const SymTensor& T = tb.tangent(d.bi, d.bj);
      MultiIndex gamma(n + 1);
      for (int m = 0; m < nmono; ++m) {
        for (int v = 0; v <= n; ++v) gamma[v] = mono.list[m][v] + d.bubble_poly[v];
        gamma[d.bi] += 1;
        gamma[d.bj] += 1;
        double integral = s.measure * unit_monomial_integral(gamma, n);
        for (int pq = 0; pq < dimS; ++pq) {
          double t = T.packed()(pq);
          if (t != 0.0) D(di, pq * nmono + m) = wF(pq) * t * integral;
        }
      }
    }
  }
  return D;
}

/// Build the stress element on a cell: assemble the DOF matrix and invert
/// it. Throws UnisolvenceError when the matrix is singular to working
/// precision (smallest pivot below 1e-12 of the largest) — for valid
/// nondegenerate inputs this must never happen.
inline StressElement local_stress_basis(const Mesh& mesh, int cell, int k,
                                        const FrameProvider& frames =
                                            default_frame) {
  StressElement e;
  e.n = mesh.n;
  e.k = k;
  e.cell = cell;
  e.simplex = mesh.cell_simplex(cell);
  e.dofs = stress_dofs(mesh, cell, k);
  e.mono = MonomialSet(mesh.n + 1, k);

  Eigen::MatrixXd D =
      stress_dof_matrix(mesh, cell, k, e.dofs, e.mono, frames);
  if (D.rows() != D.cols())
    throw std::logic_error("DOF count does not match spanning dimension");

  Eigen::FullPivLU<Eigen::MatrixXd> lu(D);
  lu.setThreshold(1e-12);
  if (lu.rank() < D.rows())
    throw UnisolvenceError("singular DOF matrix on cell " +
                           std::to_string(cell) + " (rank " +
                           std::to_string(lu.rank()) + " of " +
                           std::to_string(D.rows()) + ")");
  e.coeff = lu.inverse();
  double n1 = D.cwiseAbs().colwise().sum().maxCoeff();
  double n1i = e.coeff.cwiseAbs().colwise().sum().maxCoeff();
  e.vandermonde_condition = n1 * n1i;
  return e;
}

//---------------------------------------------------------------------------
// Bubble space
//---------------------------------------------------------------------------

/// The dim_S * C(n+k-2,n) bubble functions lambda_i lambda_j w T_{i,j},
/// w running over the homogeneous degree-(k-2) monomials. Each has zero
/// normal trace on the whole cell boundary.
inline std::vector<SymPolyMatrix> bubble_basis(const Simplex& s, int k) {
  if (k < 2) throw std::invalid_argument("bubble_basis: k must be >= 2");
  const int n = s.dim();
  TensorBasis tb = rank_one_tangent_tensors(s);
  MonomialSet weights(n + 1, k - 2);
  std::vector<SymPolyMatrix> out;
  for (auto [i, j] : strict_pairs(n + 1))
    for (const auto& w : weights.list) {
      MultiIndex m = w;
      m[i] += 1;
      m[j] += 1;
      out.push_back(SymPolyMatrix::scaled(tb.tangent(i, j),
                                          BarycentricPoly::monomial(n, m)));
    }
  return out;
}

/// Bubble coefficients over the spanning set {lambda^m E_pq}; one column
/// per bubble, same enumeration as bubble_basis.
inline Eigen::MatrixXd bubble_coefficient_matrix(const Simplex& s, int k,
                                                 const MonomialSet& mono) {
  const int n = s.dim();
  TensorBasis tb = rank_one_tangent_tensors(s);
  MonomialSet weights(n + 1, k - 2);
  const int nb = static_cast<int>(strict_pairs(n + 1).size()) * weights.size();
  Eigen::MatrixXd C =
      Eigen::MatrixXd::Zero((n * (n + 1) / 2) * mono.size(), nb);
  int col = 0;
  MultiIndex m(n + 1);
  for (auto [i, j] : strict_pairs(n + 1))
    for (const auto& w : weights.list) {
      m = w;
      m[i] += 1;
      m[j] += 1;
      int mi = mono.index.at(m);
      const SymTensor& T = tb.tangent(i, j);
      for (int pq = 0; pq < T.packed_size(); ++pq)
        C(pq * mono.size() + mi, col) = T.packed()(pq);
      ++col;
    }
  return C;
}

/// Boundary normal-trace moment matrix on P_k(K;S): rows are mean moments
/// over each facet of each Cartesian component of tau nu against the full
/// degree-k facet monomial basis; the kernel is exactly the space of
/// tensor polynomials with vanishing boundary normal trace.
inline Eigen::MatrixXd normal_trace_matrix(const Simplex& s, int k,
                                           const MonomialSet& mono) {
  const int n = s.dim();
  const int dimS = n * (n + 1) / 2;
  MonomialSet facet_mono(n, k);  // P_k on an (n-1)-simplex
  auto facets = index_subsets(n + 1, n - 1);

  const int rows_per_facet = n * facet_mono.size();
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(
      static_cast<int>(facets.size()) * rows_per_facet, dimS * mono.size());

  for (size_t f = 0; f < facets.size(); ++f) {
    std::vector<Vector> pts;
    for (int v : facets[f]) pts.push_back(s.vertices[v]);
    SubsimplexFrame fr = frame_from_points(pts);
    const Vector& nu = fr.normals[0];

    std::vector<int> where(n + 1, -1);
    for (size_t r = 0; r < facets[f].size(); ++r) where[facets[f][r]] = int(r);

    for (int m = 0; m < mono.size(); ++m) {
      MultiIndex face(n, 0);
      bool on_facet = true;
      for (int v = 0; v <= n; ++v) {
        if (mono.list[m][v] == 0) continue;
        if (where[v] < 0) {
          on_facet = false;
          break;
        }
        face[where[v]] = mono.list[m][v];
      }
      if (!on_facet) continue;
      for (int fm = 0; fm < facet_mono.size(); ++fm) {
        MultiIndex sum(n);
        for (int r = 0; r < n; ++r) sum[r] = face[r] + facet_mono.list[fm][r];
        double mean = unit_monomial_integral(sum, n - 1);
        // (E_pq nu)_c : delta_pc nu_q + delta_qc nu_p  (p<q),  delta_pc nu_p
        for (int c = 0; c < n; ++c) {
          int row = static_cast<int>(f) * rows_per_facet + c * facet_mono.size() + fm;
          for (int p = 0; p < n; ++p)
            for (int q = p; q < n; ++q) {
              double w = 0.0;
              if (p == q)
                w = (p == c) ? nu(p) : 0.0;
              else
                w = (p == c ? nu(q) : 0.0) + (q == c ? nu(p) : 0.0);
              if (w != 0.0)
                R(row, packed_index(p, q, n) * mono.size() + m) += w * mean;
            }
        }
      }
    }
  }
  return R;
}

/// Report for the bubble / boundary-trace-kernel equivalence check.
struct BubbleEquivalenceReport {
  std::int64_t kernel_dim = 0;
  std::int64_t bubble_dim = 0;
  std::int64_t expected_dim = 0;  ///< dim_S * C(n+k-2,n)
  double max_bubble_residual = 0.0;
  bool pass = false;
};

/// Verify that the kernel of the boundary normal-trace map on P_k(K;S) has
/// the bubble-space dimension and that every bubble lies in it.
inline BubbleEquivalenceReport check_bubble_equivalence(const Simplex& s,
                                                        int k) {
  const int n = s.dim();
  MonomialSet mono(n + 1, k);
  Eigen::MatrixXd R = normal_trace_matrix(s, k, mono);
  Eigen::MatrixXd C = bubble_coefficient_matrix(s, k, mono);

  BubbleEquivalenceReport rep;
  rep.bubble_dim = C.cols();
  rep.expected_dim = dim_sym(n) * dim_poly(n, k - 2);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(R);
  double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-10 * smax) ++rank;
  rep.kernel_dim = R.cols() - rank;

  for (int b = 0; b < C.cols(); ++b) {
    Eigen::VectorXd col = C.col(b) / C.col(b).cwiseAbs().maxCoeff();
    rep.max_bubble_residual =
        std::max(rep.max_bubble_residual, (R * col).cwiseAbs().maxCoeff());
  }
  rep.pass = (rep.kernel_dim == rep.expected_dim) &&
             (rep.bubble_dim == rep.expected_dim) &&
             (rep.max_bubble_residual < 1e-10);
  return rep;
}

//---------------------------------------------------------------------------
// Rigid motions and the divergence range of the bubble space
//---------------------------------------------------------------------------

/// Translations e_i and infinitesimal rotations x_i e_j - x_j e_i (i<j);
/// n(n+1)/2 fields with identically vanishing symmetric gradient.
struct RigidMotionBasis {
  int n = 0;
  std::vector<VecPoly> fields;
};

inline RigidMotionBasis rigid_motion_basis(const Simplex& s) {
  const int n = s.dim();
  RigidMotionBasis rb;
  rb.n = n;
  // coordinate functions as barycentric polynomials
  std::vector<BarycentricPoly> x(n, BarycentricPoly(n));
  for (int i = 0; i < n; ++i)
    for (int v = 0; v <= n; ++v)
      x[i] += BarycentricPoly::coordinate(n, v) * s.vertices[v](i);

  for (int i = 0; i < n; ++i) {
    VecPoly t(n, BarycentricPoly(n));
    t[i] = BarycentricPoly::constant(n, 1.0);
    rb.fields.push_back(t);
  }
  for (auto [i, j] : strict_pairs(n)) {
    VecPoly r(n, BarycentricPoly(n));
    r[j] = x[i];
    r[i] = x[j] * -1.0;
    rb.fields.push_back(r);
  }
  return rb;
}

/// Coefficients of a vector polynomial (degree <= k-1) over the local
/// displacement basis {lambda^m e_c}, m homogeneous of degree k-1.
inline Eigen::VectorXd displacement_coefficients(const VecPoly& v,
                                                 const MonomialSet& monoV) {
  const int n = static_cast<int>(v.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n * monoV.size());
  for (int c = 0; c < n; ++c)
    out.segment(c * monoV.size(), monoV.size()) =
        dense_coefficients(v[c], monoV);
  return out;
}

/// L2 mass matrix of the local displacement basis (block diagonal over
/// components).
inline Eigen::MatrixXd displacement_mass(const Simplex& s,
                                         const MonomialSet& monoV) {
  const int n = s.dim();
  Eigen::MatrixXd G = s.measure * reference_gram(n, monoV, monoV);
  Eigen::MatrixXd M =
      Eigen::MatrixXd::Zero(n * monoV.size(), n * monoV.size());
  for (int c = 0; c < n; ++c)
    M.block(c * monoV.size(), c * monoV.size(), monoV.size(), monoV.size()) =
        G;
  return M;
}

/// L2-orthogonal projector onto the complement of the rigid motions inside
/// P_{k-1}(K;R^n), expressed in the displacement monomial basis.
inline Eigen::MatrixXd rperp_projector(const Simplex& s, int k) {
  const int n = s.dim();
  MonomialSet monoV(n + 1, k - 1);
  Eigen::MatrixXd M = displacement_mass(s, monoV);
  RigidMotionBasis rb = rigid_motion_basis(s);
  Eigen::MatrixXd R(n * monoV.size(),
                    static_cast<int>(rb.fields.size()));
  for (size_t f = 0; f < rb.fields.size(); ++f)
    R.col(f) = displacement_coefficients(rb.fields[f], monoV);
  Eigen::MatrixXd G = R.transpose() * M * R;
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(R.rows(), R.rows()) -
                      R * G.ldlt().solve(R.transpose() * M);
  return P;
}

/// Report for the divergence-range check on the bubble space.
struct DivRangeReport {
  std::int64_t rank = 0;
  std::int64_t expected_rank = 0;  ///< n C(n+k-1,n) - n(n+1)/2
  std::int64_t bubble_dim = 0;
  double max_rigid_residual = 0.0;  ///< max cosine against rigid motions
  bool pass = false;
};

/// Verify div(bubble space) = complement of the rigid motions: every
/// divergence is L2-orthogonal to R(K) and the divergence image has the
/// complement's dimension. Holds for every k >= 2.
inline DivRangeReport check_div_bubble_range(const Simplex& s, int k) {
  const int n = s.dim();
  MonomialSet monoV(n + 1, k - 1);
  Eigen::MatrixXd M = displacement_mass(s, monoV);

  std::vector<SymPolyMatrix> bubbles = bubble_basis(s, k);
  Eigen::MatrixXd D(n * monoV.size(), static_cast<int>(bubbles.size()));
  for (size_t b = 0; b < bubbles.size(); ++b)
    D.col(b) = displacement_coefficients(local_divergence(bubbles[b], s),
                                         monoV);

  RigidMotionBasis rb = rigid_motion_basis(s);
  Eigen::MatrixXd R(n * monoV.size(), static_cast<int>(rb.fields.size()));
  for (size_t f = 0; f < rb.fields.size(); ++f)
    R.col(f) = displacement_coefficients(rb.fields[f], monoV);

  DivRangeReport rep;
  rep.bubble_dim = static_cast<std::int64_t>(bubbles.size());
  rep.expected_rank = std::int64_t(n) * dim_poly(n, k - 1) - dim_sym(n);

  for (int b = 0; b < D.cols(); ++b) {
    double dn = std::sqrt(D.col(b).dot(M * D.col(b)));
    if (dn <= 1e-14) continue;
    for (int f = 0; f < R.cols(); ++f) {
      double rn = std::sqrt(R.col(f).dot(M * R.col(f)));
      double ip = std::abs(R.col(f).dot(M * D.col(b)));
      rep.max_rigid_residual =
          std::max(rep.max_rigid_residual, ip / (rn * dn));
    }
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(D);
  double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-9 * smax) ++rep.rank;

  rep.pass = (rep.rank == rep.expected_rank) &&
             (rep.max_rigid_residual < 1e-9);
  return rep;
}

}  // namespace hdivsym

#endif  // HDIVSYM_ELEMENTS_HPP
