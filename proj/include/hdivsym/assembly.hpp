// Global assembly of the mixed stress/displacement system over the face
// lattice: shared stress DOF numbering, the saddle-point blocks
//   A  = (A sigma, tau)        (compliance Gram)
//   B  = (div tau, v)          (divergence coupling)
//   S  = (tau,tau) + (div tau, div tau)   (H(div) Gram)
//   Mu = (u, v)                (displacement mass)
// and the interelement normal-trace jump check.
//
// The global stress space is built from the shared DOF functionals alone.
// Gluing "continuous field + bubbles" instead would double-count (a bubble
// glued across a shared face is also continuous), so the DOF route is the
// one that yields a basis by construction.

#ifndef HDIVSYM_ASSEMBLY_HPP
#define HDIVSYM_ASSEMBLY_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdivsym/combinat.hpp"
#include "hdivsym/elements.hpp"
#include "hdivsym/geometry.hpp"
#include "hdivsym/polynomial.hpp"
#include "hdivsym/symtensor.hpp"

namespace hdivsym {

using SparseMat = Eigen::SparseMatrix<double>;

/// Global numbering: face-moment DOFs are shared through the subsimplex
/// lattice; bubble and displacement DOFs are cell-private.
struct DofMap {
  int n = 0, k = 0;
  std::int64_t stress_count = 0;
  std::int64_t displacement_count = 0;
  DimReport dims;
  std::vector<std::vector<std::int64_t>> sub_offsets;  ///< [l][sub_id]
  std::vector<std::int64_t> cell_bubble_offset;        ///< per cell
  std::vector<std::int64_t> cell_disp_offset;          ///< per cell
  /// [cell][local stress dof] -> global index, local order = stress_dofs.
  std::vector<std::vector<std::int64_t>> cell_stress_global;
  bool low_degree = false;      ///< k <= n, stability not guaranteed
  std::string warning;
};

/// Build the global DOF numbering. The stable pair needs k >= n+1; smaller
/// k (but >= 2) is allowed only with `allow_low_degree` and records a
/// warning on the map.
inline DofMap number_dofs(const Mesh& mesh, int k,
                          bool allow_low_degree = false) {
  const int n = mesh.n;
  if (k < 2) throw std::invalid_argument("number_dofs: k must be >= 2");
  DofMap map;
  map.n = n;
  map.k = k;
  map.dims = dim_report(n, k);
  if (k <= n) {
    if (!allow_low_degree)
      throw std::invalid_argument(
          "number_dofs: k <= n requires the low-degree override");
    map.low_degree = true;
    map.warning = "k <= n: inf-sup stability of the pair is not guaranteed";
  }

  std::int64_t base = 0;
  map.sub_offsets.resize(n);
  for (int l = 0; l < n; ++l) {
    const std::int64_t per = map.dims.dof_per_subsimplex[l];
    map.sub_offsets[l].resize(mesh.subsimplex_count(l));
    for (std::int64_t id = 0; id < mesh.subsimplex_count(l); ++id) {
      map.sub_offsets[l][id] = base;
      base += per;
    }
  }
  map.cell_bubble_offset.resize(mesh.cells.size());
  for (size_t c = 0; c < mesh.cells.size(); ++c) {
    map.cell_bubble_offset[c] = base;
    base += map.dims.dim_bubble;
  }
  map.stress_count = base;

  map.cell_disp_offset.resize(mesh.cells.size());
  for (size_t c = 0; c < mesh.cells.size(); ++c)
    map.cell_disp_offset[c] = static_cast<std::int64_t>(c) * map.dims.dim_V_local;
  map.displacement_count =
      static_cast<std::int64_t>(mesh.cells.size()) * map.dims.dim_V_local;

  map.cell_stress_global.resize(mesh.cells.size());
  for (size_t c = 0; c < mesh.cells.size(); ++c) {
    auto& g = map.cell_stress_global[c];
    for (int l = 0; l < n; ++l) {
      const std::int64_t per = map.dims.dof_per_subsimplex[l];
      for (int sub : mesh.cell_subs[l][c])
        for (std::int64_t i = 0; i < per; ++i)
          g.push_back(map.sub_offsets[l][sub] + i);
    }
    for (std::int64_t i = 0; i < map.dims.dim_bubble; ++i)
      g.push_back(map.cell_bubble_offset[c] + i);
  }
  return map;
}

/// Assembled blocks of the discrete mixed problem, plus the Gram matrices
/// used for the inf-sup eigenproblem.
struct SaddleSystem {
  DofMap map;
  SparseMat A;   ///< stress x stress, compliance Gram, SPD
  SparseMat B;   ///< displacement x stress, (div tau, v)
  SparseMat S;   ///< stress x stress, H(div) Gram, SPD
  SparseMat L2;  ///< stress x stress, L2 Gram (S minus the divergence part)
  SparseMat Mu;  ///< displacement x displacement, block-diagonal mass, SPD
  Eigen::VectorXd rhs_f;
  double mu_lame = 1.0, lambda_lame = 0.0;
};

struct AssemblyOptions {
  bool allow_low_degree = false;
  /// Sort accumulation triplets canonically before summation so repeated
  /// runs produce bitwise identical matrices regardless of traversal
  /// tweaks. Sequential assembly is already deterministic for a fixed cell
  /// order; this pins the reduction order explicitly.
  bool deterministic_reduction = false;
  FrameProvider frames = default_frame;
};

/// Sparse divergence operator from the degree-k spanning coordinates
/// (pq, m) to the displacement coordinates (c, m'), for one cell.
inline SparseMat divergence_operator(const Simplex& s, const MonomialSet& monoK,
                                     const MonomialSet& monoV) {
  const int n = s.dim();
  const int dimS = n * (n + 1) / 2;
  std::vector<Eigen::Triplet<double>> trip;
  MultiIndex down(n + 1);
  for (int m = 0; m < monoK.size(); ++m) {
    const MultiIndex& alpha = monoK.list[m];
    for (int v = 0; v <= n; ++v) {
      if (alpha[v] == 0) continue;
      down = alpha;
      down[v] -= 1;
      const int mprime = monoV.index.at(down);
      const double av = alpha[v];
      for (int p = 0; p < n; ++p) {
        // E_pp contributes d_p lambda^alpha to component p
        trip.emplace_back(p * monoV.size() + mprime,
                          packed_index(p, p, n) * monoK.size() + m,
                          av * s.grad_lambda(v, p));
        for (int q = p + 1; q < n; ++q) {
          // E_pq contributes d_q to component p and d_p to component q
          trip.emplace_back(p * monoV.size() + mprime,
                            packed_index(p, q, n) * monoK.size() + m,
                            av * s.grad_lambda(v, q));
          trip.emplace_back(q * monoV.size() + mprime,
                            packed_index(p, q, n) * monoK.size() + m,
                            av * s.grad_lambda(v, p));
        }
      }
    }
  }
  SparseMat D(n * monoV.size(), dimS * monoK.size());
  D.setFromTriplets(trip.begin(), trip.end());
  return D;
}

/// Assemble the discrete system for material (mu, lambda) and a per-cell
/// polynomial load (empty vector = zero load).
inline SaddleSystem assemble_system(const Mesh& mesh, int k, double mu,
                                    double lambda,
                                    const std::vector<VecPoly>& f = {},
                                    const AssemblyOptions& opts = {}) {
  if (mu <= 0.0 || lambda < 0.0)
    throw std::invalid_argument("assemble_system: need mu > 0, lambda >= 0");
  if (!f.empty() && f.size() != mesh.cells.size())
    throw std::invalid_argument("assemble_system: load size != cell count");

  const int n = mesh.n;
  const int dimS = n * (n + 1) / 2;
  SaddleSystem sys;
  sys.map = number_dofs(mesh, k, opts.allow_low_degree);
  sys.mu_lame = mu;
  sys.lambda_lame = lambda;

  MonomialSet monoK(n + 1, k), monoV(n + 1, k - 1);
  const int nK = monoK.size(), nV = monoV.size();
  const Eigen::MatrixXd Gkk = reference_gram(n, monoK, monoK);
  const Eigen::MatrixXd Gvv = reference_gram(n, monoV, monoV);
  const Eigen::MatrixXd CA = compliance_matrix(n, mu, lambda);
  const Eigen::VectorXd wF = frobenius_weights(n);

  std::vector<Eigen::Triplet<double>> tA, tB, tS, tL, tMu;
  sys.rhs_f = Eigen::VectorXd::Zero(sys.map.displacement_count);

  for (size_t c = 0; c < mesh.cells.size(); ++c) {
    StressElement elem = local_stress_basis(mesh, static_cast<int>(c), k,
                                            opts.frames);
    const int nd = elem.ndofs();
    const double meas = elem.simplex.measure;

    // component blocks of the shape coefficients
    std::vector<Eigen::MatrixXd> comp(dimS), acomp(dimS);
    for (int pq = 0; pq < dimS; ++pq)
      comp[pq] = elem.coeff.middleRows(pq * nK, nK);
    for (int pq = 0; pq < dimS; ++pq) {
      acomp[pq] = Eigen::MatrixXd::Zero(nK, nd);
      for (int rs = 0; rs < dimS; ++rs)
        if (CA(pq, rs) != 0.0) acomp[pq] += CA(pq, rs) * comp[rs];
    }

    Eigen::MatrixXd Aloc = Eigen::MatrixXd::Zero(nd, nd);
    Eigen::MatrixXd Lloc = Eigen::MatrixXd::Zero(nd, nd);
    for (int pq = 0; pq < dimS; ++pq) {
      Eigen::MatrixXd Gc = (wF(pq) * meas) * (Gkk * comp[pq]);
      Aloc += acomp[pq].transpose() * Gc;
      Lloc += comp[pq].transpose() * Gc;
    }
    Aloc = 0.5 * (Aloc + Aloc.transpose());  // symmetric up to rounding

    SparseMat divop = divergence_operator(elem.simplex, monoK, monoV);
    Eigen::MatrixXd Dv = divop * elem.coeff;  // (n*nV) x nd

    Eigen::MatrixXd Bloc(n * nV, nd);
    Eigen::MatrixXd Sloc = Lloc;
    for (int comp_c = 0; comp_c < n; ++comp_c) {
      Eigen::MatrixXd GD = meas * (Gvv * Dv.middleRows(comp_c * nV, nV));
      Bloc.middleRows(comp_c * nV, nV) = GD;
      Sloc += Dv.middleRows(comp_c * nV, nV).transpose() * GD;
    }

    const auto& gI = sys.map.cell_stress_global[c];
    const std::int64_t dbase = sys.map.cell_disp_offset[c];
    for (int i = 0; i < nd; ++i)
      for (int j = 0; j < nd; ++j) {
        tA.emplace_back(gI[i], gI[j], Aloc(i, j));
        tS.emplace_back(gI[i], gI[j], Sloc(i, j));
        tL.emplace_back(gI[i], gI[j], Lloc(i, j));
      }
    for (int a = 0; a < n * nV; ++a)
      for (int j = 0; j < nd; ++j)
        tB.emplace_back(dbase + a, gI[j], Bloc(a, j));
    for (int comp_c = 0; comp_c < n; ++comp_c)
      for (int i = 0; i < nV; ++i)
        for (int j = 0; j < nV; ++j)
          tMu.emplace_back(dbase + comp_c * nV + i, dbase + comp_c * nV + j,
                           meas * Gvv(i, j));

    if (!f.empty()) {
      const VecPoly& fc = f[c];
      if (static_cast<int>(fc.size()) != n)
        throw std::invalid_argument("assemble_system: load component count");
      for (int comp_c = 0; comp_c < n; ++comp_c)
        for (const auto& [alpha, coef] : fc[comp_c].terms()) {
          MultiIndex sum(n + 1);
          for (int i = 0; i < nV; ++i) {
            for (int v = 0; v <= n; ++v) sum[v] = alpha[v] + monoV.list[i][v];
            sys.rhs_f(dbase + comp_c * nV + i) +=
                coef * meas * unit_monomial_integral(sum, n);
          }
        }
    }
  }

  auto finalize = [&](std::vector<Eigen::Triplet<double>>& trip,
                      std::int64_t rows, std::int64_t cols) {
    if (opts.deterministic_reduction)
      std::stable_sort(trip.begin(), trip.end(),
                       [](const auto& a, const auto& b) {
                         return a.row() != b.row() ? a.row() < b.row()
                                                   : a.col() < b.col();
                       });
    SparseMat m(rows, cols);
    m.setFromTriplets(trip.begin(), trip.end());
    m.makeCompressed();
    return m;
  };
  const std::int64_t ns = sys.map.stress_count;
  const std::int64_t nu = sys.map.displacement_count;
  sys.A = finalize(tA, ns, ns);
  sys.S = finalize(tS, ns, ns);
  sys.L2 = finalize(tL, ns, ns);
  sys.B = finalize(tB, nu, ns);
  sys.Mu = finalize(tMu, nu, nu);
  return sys;
}

/// Per-cell local stress coefficients gathered from a global vector.
inline Eigen::VectorXd gather_cell_stress(const DofMap& map, int cell,
                                          const Eigen::VectorXd& global) {
  const auto& g = map.cell_stress_global[cell];
  Eigen::VectorXd local(g.size());
  for (size_t i = 0; i < g.size(); ++i) local(i) = global(g[i]);
  return local;
}

/// Maximum normal-trace jump of the stress field with the given global
/// coefficients, measured at quadrature points of every interior facet.
/// A conforming space yields jumps at rounding level; the FrameProvider
/// hook lets tests check that inconsistent frames are detected.
inline double interelement_jump_check(const Mesh& mesh, int k,
                                      const Eigen::VectorXd& coeffs,
                                      const FrameProvider& frames =
                                          default_frame) {
  const int n = mesh.n;
  DofMap map = number_dofs(mesh, k, true);

  std::vector<StressElement> elems;
  elems.reserve(mesh.cells.size());
  for (size_t c = 0; c < mesh.cells.size(); ++c)
    elems.push_back(local_stress_basis(mesh, static_cast<int>(c), k, frames));

  // facet quadrature points in facet barycentric coordinates
  std::vector<Vector> fpoints;
  if (n == 1) {
    fpoints.push_back(Vector::Ones(1));
  } else {
    for (const auto& q : gm_quadrature(n - 1, k + 2)) fpoints.push_back(q.lambda);
  }

  double max_jump = 0.0;
  const int l = n - 1;
  for (std::int64_t id = 0; id < mesh.subsimplex_count(l); ++id) {
    const auto& inc = mesh.sub_cells[l][id];
    if (inc.size() != 2) continue;  // boundary facet
    auto pts = mesh.sub_points(l, id);
    Vector nu = frame_from_points(pts).normals[0];

    for (const auto& fp : fpoints) {
      Vector x = Vector::Zero(n);
      for (size_t r = 0; r < pts.size(); ++r) x += fp(static_cast<int>(r)) * pts[r];
      Vector trace[2];
      for (int side = 0; side < 2; ++side) {
        int c = inc[side].first;
        Eigen::VectorXd local = gather_cell_stress(map, c, coeffs);
        SymTensor sig =
            elems[c].evaluate(local, elems[c].simplex.lambda(x));
        Vector t(n);
        for (int i = 0; i < n; ++i) {
          t(i) = 0.0;
          for (int j = 0; j < n; ++j) t(i) += sig(i, j) * nu(j);
        }
        trace[side] = t;
      }
      max_jump = std::max(max_jump,
                          (trace[0] - trace[1]).cwiseAbs().maxCoeff());
    }
  }
  return max_jump;
}

/// MatrixMarket coordinate-format export.
inline void write_matrix_market(const SparseMat& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
  os.precision(17);
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMat::InnerIterator it(m, k); it; ++it)
      os << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

}  // namespace hdivsym

#endif  // HDIVSYM_ASSEMBLY_HPP
