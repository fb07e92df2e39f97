// Property-suite runners for the element-level theory: independence of the
// rank-one tangent tensors, the degree-of-freedom counting identities,
// unisolvence of the stress DOF set, the bubble/trace-kernel equivalence,
// and the divergence range of the bubble space. Each runner returns a
// ClaimResult with the measured quantities, so the CLI and the acceptance
// suite share one implementation.

#ifndef HDIVSYM_VERIFICATION_HPP
#define HDIVSYM_VERIFICATION_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "hdivsym/analysis.hpp"
#include "hdivsym/assembly.hpp"
#include "hdivsym/combinat.hpp"
#include "hdivsym/elements.hpp"
#include "hdivsym/geometry.hpp"
#include "hdivsym/symtensor.hpp"

namespace hdivsym {

struct ClaimResult {
  std::string name;
  bool pass = false;
  std::map<std::string, double> metrics;
  std::string detail;
};

/// Reference simplex: origin plus the unit axis points.
inline Simplex reference_simplex(int n) {
  std::vector<Vector> v(n + 1, Vector::Zero(n));
  for (int i = 1; i <= n; ++i) v[i](i - 1) = 1.0;
  return simplex_from_vertices(v);
}

/// Random nondegenerate simplex with vertices in [0,1]^n. Shape quality is
/// enforced through the determinant of the unit-normalized edge matrix, so
/// "nondegenerate" is a scale-free property of the sample.
inline Simplex random_simplex(int n, std::mt19937_64& rng,
                              double quality = 1e-2) {
  while (true) {
    std::vector<Vector> v(n + 1, Vector(n));
    for (auto& p : v)
      for (int i = 0; i < n; ++i) p(i) = 0.5 * (unit_draw(rng) + 1.0);
    Matrix E(n, n);
    bool short_edge = false;
    for (int j = 1; j <= n; ++j) {
      Vector e = v[j] - v[0];
      double len = e.norm();
      if (len < 1e-8) {
        short_edge = true;
        break;
      }
      E.col(j - 1) = e / len;
    }
    if (short_edge || std::abs(E.determinant()) < quality) continue;
    return simplex_from_vertices(v);
  }
}

/// Independence of the n(n+1)/2 rank-one tangent tensors over random
/// simplices: the smallest singular value of the coordinate matrix of the
/// unit-tangent tensors must stay above the floor.
inline ClaimResult claim_tangent_basis(int n, int samples, std::uint64_t seed,
                                       double floor = 1e-8) {
  ClaimResult r;
  r.name = "tangent-tensor-basis";
  std::mt19937_64 rng(seed);
  double min_sv = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    Simplex sx = random_simplex(n, rng);
    auto tmap = edge_tangents(sx);
    Eigen::MatrixXd X(static_cast<int>(tmap.size()), n * (n + 1) / 2);
    int row = 0;
    for (auto& [ij, t] : tmap) {
      (void)ij;
      X.row(row++) =
          SymTensor::outer(t / t.norm()).orthonormal_coordinates().transpose();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X);
    min_sv = std::min(min_sv, svd.singularValues().minCoeff());
  }
  r.metrics["min_singular_value"] = min_sv;
  r.metrics["samples"] = samples;
  r.pass = min_sv > floor;
  return r;
}

/// Exact-integer sweep of both Chu-Vandermonde identities, the DOF-count
/// partition, and Pascal's rule over 1 <= n <= n_max, 2 <= k <= k_max.
inline ClaimResult claim_dof_counting(int n_max = 8, int k_max = 12) {
  ClaimResult r;
  r.name = "dof-count-identities";
  r.pass = true;
  int checked = 0;
  for (int n = 1; n <= n_max; ++n)
    for (int k = 2; k <= k_max; ++k) {
      ChuVandermondeCheck cv = verify_chu_vandermonde(n, k);
      DimReport dr = dim_report(n, k);
      bool ok = cv.both_hold() && dr.counting_identity_holds();
      for (int m = 0; m <= n + k && ok; ++m)
        ok = binomial(n + k, m) ==
             binomial(n + k - 1, m - 1) + binomial(n + k - 1, m);
      if (!ok) {
        r.pass = false;
        r.detail = "failure at n=" + std::to_string(n) +
                   " k=" + std::to_string(k);
      }
      ++checked;
    }
  r.metrics["pairs_checked"] = checked;
  return r;
}

/// Unisolvence of the stress DOF set on random simplices: the DOF matrix
/// must be far from singular and its numerical inverse must reproduce
/// every polynomial from its DOF values (interpolation identity).
inline ClaimResult claim_unisolvence(int n, int k, int samples,
                                     std::uint64_t seed,
                                     double residual_tol = 1e-7) {
  ClaimResult r;
  r.name = "unisolvence";
  std::mt19937_64 rng(seed);
  double max_resid = 0.0, max_cond = 0.0, max_cross = 0.0;
  for (int s = 0; s < samples; ++s) {
    Simplex sx = random_simplex(n, rng);
    Mesh mesh = single_cell_mesh(sx.vertices);
    auto dofs = stress_dofs(mesh, 0, k);
    MonomialSet mono(n + 1, k);
    Eigen::MatrixXd D = stress_dof_matrix(mesh, 0, k, dofs, mono,
                                          default_frame);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(D);
    lu.setThreshold(1e-12);
    if (lu.rank() < D.rows()) {
      r.pass = false;
      r.detail = "singular DOF matrix at sample " + std::to_string(s);
      return r;
    }
    Eigen::MatrixXd Dinv = lu.inverse();
    double n1 = D.cwiseAbs().colwise().sum().maxCoeff();
    double n1i = Dinv.cwiseAbs().colwise().sum().maxCoeff();
    max_cond = std::max(max_cond, n1 * n1i);

    // interpolation identity on a random degree-k field
    Eigen::VectorXd v(D.cols());
    for (int i = 0; i < v.size(); ++i) v(i) = unit_draw(rng);
    Eigen::VectorXd recon = Dinv * (D * v);
    max_resid = std::max(
        max_resid, (recon - v).cwiseAbs().maxCoeff() /
                       v.cwiseAbs().maxCoeff());

    if (s == 0) {
      // independent cross-check of the fast DOF rows against the direct
      // functional evaluation, on a random field
      SymPolyMatrix tau(n, n);
      for (int pq = 0; pq < static_cast<int>(tau.comp.size()); ++pq)
        for (const auto& mi : mono.list)
          tau.comp[pq].add_term(mi, unit_draw(rng));
      Eigen::VectorXd coeffs(D.cols());
      for (int pq = 0; pq < static_cast<int>(tau.comp.size()); ++pq)
        coeffs.segment(pq * mono.size(), mono.size()) =
            dense_coefficients(tau.comp[pq], mono);
      for (size_t d = 0; d < dofs.size(); ++d) {
        double direct = apply_dof(mesh, 0, k, dofs[d], tau);
        double fast = D.row(d).dot(coeffs);
        max_cross = std::max(max_cross, std::abs(direct - fast));
      }
    }
  }
  r.metrics["max_interp_residual"] = max_resid;
  r.metrics["max_condition"] = max_cond;
  r.metrics["max_functional_crosscheck"] = max_cross;
  r.metrics["samples"] = samples;
  r.pass = max_resid < residual_tol && max_cross < 1e-8;
  return r;
}

/// Bubble space == kernel of the boundary normal-trace map, on the
/// reference simplex and a few random ones.
inline ClaimResult claim_bubble_kernel(int n, int k, std::uint64_t seed,
                                       int random_samples = 3) {
  ClaimResult r;
  r.name = "bubble-trace-kernel";
  std::mt19937_64 rng(seed);
  r.pass = true;
  double max_resid = 0.0;
  std::int64_t kernel_dim = -1;
  for (int s = 0; s <= random_samples; ++s) {
    Simplex sx = (s == 0) ? reference_simplex(n) : random_simplex(n, rng);
    BubbleEquivalenceReport rep = check_bubble_equivalence(sx, k);
    if (s == 0) kernel_dim = rep.kernel_dim;
    max_resid = std::max(max_resid, rep.max_bubble_residual);
    if (!rep.pass) {
      r.pass = false;
      r.detail = "kernel dim " + std::to_string(rep.kernel_dim) +
                 " expected " + std::to_string(rep.expected_dim);
    }
  }
  r.metrics["kernel_dim"] = double(kernel_dim);
  r.metrics["expected_dim"] = double(dim_sym(n) * dim_poly(n, k - 2));
  r.metrics["max_bubble_residual"] = max_resid;
  return r;
}

/// div(bubble space) == orthogonal complement of the rigid motions, on the
/// reference simplex and a few random ones. Holds for every k >= 2.
inline ClaimResult claim_divergence_range(int n, int k, std::uint64_t seed,
                                          int random_samples = 3) {
  ClaimResult r;
  r.name = "bubble-divergence-range";
  std::mt19937_64 rng(seed);
  r.pass = true;
  double max_resid = 0.0;
  std::int64_t rank = -1;
  for (int s = 0; s <= random_samples; ++s) {
    Simplex sx = (s == 0) ? reference_simplex(n) : random_simplex(n, rng);
    DivRangeReport rep = check_div_bubble_range(sx, k);
    if (s == 0) rank = rep.rank;
    max_resid = std::max(max_resid, rep.max_rigid_residual);
    if (!rep.pass) {
      r.pass = false;
      r.detail = "rank " + std::to_string(rep.rank) + " expected " +
                 std::to_string(rep.expected_rank);
    }
  }
  r.metrics["rank"] = double(rank);
  r.metrics["expected_rank"] =
      double(std::int64_t(n) * dim_poly(n, k - 1) - dim_sym(n));
  r.metrics["max_rigid_residual"] = max_resid;
  return r;
}

/// The five element-level claim groups for one (n,k).
inline std::vector<ClaimResult> run_verification_suite(int n, int k,
                                                       std::uint64_t seed,
                                                       int samples = 200,
                                                       int unisolvence_samples
                                                       = 20) {
  std::vector<ClaimResult> out;
  out.push_back(claim_tangent_basis(n, samples, seed));
  out.push_back(claim_dof_counting());
  out.push_back(claim_unisolvence(n, k, unisolvence_samples, seed + 1));
  out.push_back(claim_bubble_kernel(n, k, seed + 2));
  out.push_back(claim_divergence_range(n, k, seed + 3));
  return out;
}

}  // namespace hdivsym

#endif  // HDIVSYM_VERIFICATION_HPP
