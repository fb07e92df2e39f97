// Solution and verification instruments for the mixed method: polynomial
// manufactured solutions with zero boundary displacement, the saddle-point
// solver, exact error norms, the discrete inf-sup constant via a
// generalized eigenproblem, and convergence-rate studies.
//
// Manufactured data is polynomial throughout, so with the closed-form
// monomial integration backend there is no quadrature error anywhere in
// the pipeline and measured rates reflect the discretization alone.

#ifndef HDIVSYM_ANALYSIS_HPP
#define HDIVSYM_ANALYSIS_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdivsym/assembly.hpp"
#include "hdivsym/elements.hpp"
#include "hdivsym/geometry.hpp"
#include "hdivsym/polynomial.hpp"

namespace hdivsym {

//---------------------------------------------------------------------------
// Polynomials in Cartesian coordinates (global manufactured data)
//---------------------------------------------------------------------------

/// Sparse polynomial in the Cartesian coordinates x_1..x_n.
class CartesianPoly {
 public:
  CartesianPoly() = default;
  explicit CartesianPoly(int nvars) : nvars_(nvars) {}

  static CartesianPoly constant(int nvars, double c) {
    CartesianPoly p(nvars);
    p.add_term(MultiIndex(nvars, 0), c);
    return p;
  }
  static CartesianPoly coordinate(int nvars, int i) {
    CartesianPoly p(nvars);
    MultiIndex a(nvars, 0);
    a[i] = 1;
    p.add_term(a, 1.0);
    return p;
  }

  int nvars() const { return nvars_; }
  const std::map<MultiIndex, double, GradedLex>& terms() const {
    return terms_;
  }
  int degree() const {
    int d = 0;
    for (const auto& [a, c] : terms_) d = std::max(d, multi_degree(a));
    return d;
  }

  void add_term(const MultiIndex& a, double c) {
    if (c == 0.0) return;
    auto [it, ins] = terms_.emplace(a, c);
    if (!ins) {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  CartesianPoly& operator+=(const CartesianPoly& o) {
    for (const auto& [a, c] : o.terms_) add_term(a, c);
    return *this;
  }
  CartesianPoly& operator-=(const CartesianPoly& o) {
    for (const auto& [a, c] : o.terms_) add_term(a, -c);
    return *this;
  }
  CartesianPoly& operator*=(double s) {
    if (s == 0.0) terms_.clear();
    for (auto& [a, c] : terms_) c *= s;
    return *this;
  }
  friend CartesianPoly operator+(CartesianPoly a, const CartesianPoly& b) {
    return a += b;
  }
  friend CartesianPoly operator-(CartesianPoly a, const CartesianPoly& b) {
    return a -= b;
  }
  friend CartesianPoly operator*(CartesianPoly a, double s) { return a *= s; }
  friend CartesianPoly operator*(const CartesianPoly& a,
                                 const CartesianPoly& b) {
    CartesianPoly r(a.nvars_);
    for (const auto& [ai, ac] : a.terms_)
      for (const auto& [bi, bc] : b.terms_) {
        MultiIndex m(ai);
        for (size_t v = 0; v < m.size(); ++v) m[v] += bi[v];
        r.add_term(m, ac * bc);
      }
    return r;
  }

  CartesianPoly derivative(int var) const {
    CartesianPoly r(nvars_);
    for (const auto& [a, c] : terms_) {
      if (a[var] == 0) continue;
      MultiIndex m(a);
      m[var] -= 1;
      r.add_term(m, c * a[var]);
    }
    return r;
  }

  double eval(const Vector& x) const {
    double r = 0.0;
    for (const auto& [a, c] : terms_) {
      double t = c;
      for (int v = 0; v < nvars_; ++v)
        for (int e = 0; e < a[v]; ++e) t *= x(v);
      r += t;
    }
    return r;
  }

  /// Express the polynomial in the barycentric coordinates of a cell by
  /// substituting x_i = sum_v (vertex_v)_i lambda_v.
  BarycentricPoly to_barycentric(const Simplex& s) const {
    const int n = s.dim();
    std::vector<BarycentricPoly> xs(n, BarycentricPoly(n));
    for (int i = 0; i < n; ++i)
      for (int v = 0; v <= n; ++v)
        xs[i] += BarycentricPoly::coordinate(n, v) * s.vertices[v](i);
    BarycentricPoly out(n);
    for (const auto& [a, c] : terms_) {
      BarycentricPoly term = BarycentricPoly::constant(n, c);
      for (int v = 0; v < nvars_; ++v)
        for (int e = 0; e < a[v]; ++e) term = term * xs[v];
      out += term;
    }
    return out;
  }

 private:
  int nvars_ = 0;
  std::map<MultiIndex, double, GradedLex> terms_;
};

using VecCartPoly = std::vector<CartesianPoly>;

/// Symmetric matrix of Cartesian polynomials, packed like SymTensor.
struct SymCartPoly {
  int n = 0;
  std::vector<CartesianPoly> comp;
  SymCartPoly() = default;
  explicit SymCartPoly(int n_)
      : n(n_), comp(n_ * (n_ + 1) / 2, CartesianPoly(n_)) {}
  const CartesianPoly& operator()(int i, int j) const {
    return comp[packed_index(i, j, n)];
  }
  CartesianPoly& operator()(int i, int j) {
    return comp[packed_index(i, j, n)];
  }
  int degree() const {
    int d = 0;
    for (const auto& p : comp) d = std::max(d, p.degree());
    return d;
  }
};

//---------------------------------------------------------------------------
// Manufactured solutions
//---------------------------------------------------------------------------

/// Exact polynomial solution of the mixed problem on the unit hypercube:
/// u vanishes on the boundary, sigma = 2 mu eps(u) + lambda div(u) I, and
/// f = div sigma, all exact as polynomials.
struct MmsProblem {
  int n = 0, k = 0;
  double mu = 1.0, lambda = 0.0;
  std::uint64_t seed = 0;
  VecCartPoly u_exact;
  SymCartPoly sigma_exact;
  VecCartPoly f;
  int u_degree = 0, sigma_degree = 0, f_degree = 0;
};

/// Deterministic uniform draw in [-1,1] (independent of the standard
/// library's distribution implementation).
inline double unit_draw(std::mt19937_64& rng) {
  return 2.0 * (double(rng() >> 11) * 0x1.0p-53) - 1.0;
}

/// Build a manufactured problem: u_i = (prod_j x_j (1 - x_j)) p_i with
/// random p_i of total degree max(k+2-2n, 0), which makes deg(sigma) =
/// k+1 or more, so neither u nor sigma is exactly representable and the
/// discretization error is nonzero on every mesh.
inline MmsProblem manufactured_solution(int n, int k, double mu, double lambda,
                                        std::uint64_t seed) {
  if (n < 1 || k < 2)
    throw std::invalid_argument("manufactured_solution: need n >= 1, k >= 2");
  MmsProblem P;
  P.n = n;
  P.k = k;
  P.mu = mu;
  P.lambda = lambda;
  P.seed = seed;

  CartesianPoly bubble = CartesianPoly::constant(n, 1.0);
  for (int j = 0; j < n; ++j) {
    CartesianPoly xj = CartesianPoly::coordinate(n, j);
    bubble = bubble * (xj - xj * xj);
  }

  const int pdeg = std::max(k + 2 - 2 * n, 0);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < n; ++i) {
    CartesianPoly pi(n);
    for (int d = 0; d <= pdeg; ++d)
      for (const auto& a : MonomialSet(n, d).list)
        pi.add_term(a, unit_draw(rng));
    P.u_exact.push_back(bubble * pi);
  }

  SymCartPoly eps(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      eps(i, j) = (P.u_exact[j].derivative(i) + P.u_exact[i].derivative(j)) *
                  0.5;
  CartesianPoly div_u(n);
  for (int i = 0; i < n; ++i) div_u += eps(i, i);

  P.sigma_exact = SymCartPoly(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      P.sigma_exact(i, j) = eps(i, j) * (2.0 * mu);
      if (i == j) P.sigma_exact(i, j) += div_u * lambda;
    }

  for (int i = 0; i < n; ++i) {
    CartesianPoly fi(n);
    for (int j = 0; j < n; ++j) fi += P.sigma_exact(i, j).derivative(j);
    P.f.push_back(fi);
  }

  P.u_degree = 0;
  for (const auto& p : P.u_exact) P.u_degree = std::max(P.u_degree, p.degree());
  P.sigma_degree = P.sigma_exact.degree();
  P.f_degree = 0;
  for (const auto& p : P.f) P.f_degree = std::max(P.f_degree, p.degree());

  if (P.sigma_degree <= k)
    throw std::invalid_argument(
        "manufactured_solution: sigma is exactly representable at this "
        "degree; no discretization error to measure");
  return P;
}

/// Per-cell barycentric load vectors for assembly.
inline std::vector<VecPoly> load_per_cell(const MmsProblem& P,
                                          const Mesh& mesh) {
  std::vector<VecPoly> out(mesh.cells.size());
  for (size_t c = 0; c < mesh.cells.size(); ++c) {
    Simplex s = mesh.cell_simplex(static_cast<int>(c));
    for (int i = 0; i < P.n; ++i)
      out[c].push_back(P.f[i].to_barycentric(s));
  }
  return out;
}

//---------------------------------------------------------------------------
// Saddle-point solve
//---------------------------------------------------------------------------

struct SolveResult {
  Eigen::VectorXd sigma;  ///< stress coefficients
  Eigen::VectorXd u;      ///< displacement coefficients
  double rel_residual = std::numeric_limits<double>::quiet_NaN();
  std::int64_t unknowns = 0;
  bool ok = false;
};

/// Solve [A B^T; B 0] (sigma,u) = (0, rhs_f) by sparse LU with one step of
/// iterative refinement. Throws on factorization failure, which would
/// contradict well-posedness of the pair for k >= n+1.
inline SolveResult solve_saddle(const SaddleSystem& sys) {
  const std::int64_t ns = sys.map.stress_count;
  const std::int64_t nu = sys.map.displacement_count;
  const std::int64_t N = ns + nu;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(sys.A.nonZeros() + 2 * sys.B.nonZeros());
  for (int o = 0; o < sys.A.outerSize(); ++o)
    for (SparseMat::InnerIterator it(sys.A, o); it; ++it)
      trip.emplace_back(it.row(), it.col(), it.value());
  for (int o = 0; o < sys.B.outerSize(); ++o)
    for (SparseMat::InnerIterator it(sys.B, o); it; ++it) {
      trip.emplace_back(ns + it.row(), it.col(), it.value());
      trip.emplace_back(it.col(), ns + it.row(), it.value());
    }
  SparseMat K(N, N);
  K.setFromTriplets(trip.begin(), trip.end());
  K.makeCompressed();

  Eigen::VectorXd b = Eigen::VectorXd::Zero(N);
  b.tail(nu) = sys.rhs_f;

  Eigen::SparseLU<SparseMat> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("solve_saddle: sparse factorization failed");
  Eigen::VectorXd x = lu.solve(b);
  x += lu.solve(b - K * x);  // one refinement pass

  SolveResult r;
  r.unknowns = N;
  double bn = b.norm();
  r.rel_residual = (K * x - b).norm() / (bn > 0 ? bn : 1.0);
  r.sigma = x.head(ns);
  r.u = x.tail(nu);
  r.ok = std::isfinite(r.rel_residual) && r.rel_residual < 1e-9;
  return r;
}

/// Relative residual of the discrete equilibrium identity: the divergence
/// of the computed stress, re-expanded in the displacement basis, must be
/// the L2 projection of the load (exactly, since div Sigma_h is a subspace
/// of V_h).
inline double discrete_equilibrium_residual(const Mesh& mesh,
                                            const SaddleSystem& sys,
                                            const Eigen::VectorXd& sigma) {
  const int n = mesh.n;
  const int k = sys.map.k;
  MonomialSet monoK(n + 1, k), monoV(n + 1, k - 1);
  Eigen::VectorXd div_coeffs =
      Eigen::VectorXd::Zero(sys.map.displacement_count);
  for (size_t c = 0; c < mesh.cells.size(); ++c) {
    StressElement elem = local_stress_basis(mesh, static_cast<int>(c), k);
    SparseMat divop = divergence_operator(elem.simplex, monoK, monoV);
    Eigen::VectorXd local = gather_cell_stress(sys.map, static_cast<int>(c),
                                               sigma);
    div_coeffs.segment(sys.map.cell_disp_offset[c], n * monoV.size()) =
        divop * (elem.coeff * local);
  }
  // Mu * div_coeffs should equal rhs_f
  Eigen::VectorXd r = sys.Mu * div_coeffs - sys.rhs_f;
  double scale = sys.rhs_f.norm();
  return r.norm() / (scale > 0 ? scale : 1.0);
}

//---------------------------------------------------------------------------
// Error norms and convergence rows
//---------------------------------------------------------------------------

/// One resolution level of a convergence study.
struct ConvergenceRow {
  int m = 0;          ///< subdivisions per axis
  double h = 0.0;     ///< mesh size
  double e_sigma_l2 = 0.0;
  double e_sigma_div = 0.0;
  double e_sigma_hdiv = 0.0;
  double e_u_l2 = 0.0;
  double rate_hdiv = std::numeric_limits<double>::quiet_NaN();
  double rate_u = std::numeric_limits<double>::quiet_NaN();
  double rate_sigma_l2 = std::numeric_limits<double>::quiet_NaN();
  double beta = std::numeric_limits<double>::quiet_NaN();  ///< inf-sup, optional
  double solve_residual = std::numeric_limits<double>::quiet_NaN();
  std::int64_t unknowns = 0;
  bool solve_ok = false;
  std::string error;  ///< nonempty when this level failed
};

/// Exact error norms of a discrete solution against the manufactured
/// exact pair. All integrands are polynomial, integrated in closed form.
inline ConvergenceRow error_norms(const MmsProblem& P,
                                  const Eigen::VectorXd& sigma,
                                  const Eigen::VectorXd& u, const Mesh& mesh,
                                  const DofMap& map) {
  const int n = mesh.n;
  const int k = map.k;
  MonomialSet monoV(n + 1, k - 1);
  ConvergenceRow row;
  row.h = mesh.mesh_size_h;

  double s_l2 = 0.0, s_div = 0.0, u_l2 = 0.0;
  for (size_t c = 0; c < mesh.cells.size(); ++c) {
    StressElement elem = local_stress_basis(mesh, static_cast<int>(c), k);
    const Simplex& s = elem.simplex;
    Eigen::VectorXd local = gather_cell_stress(map, static_cast<int>(c),
                                               sigma);
    Eigen::VectorXd span = elem.coeff * local;

    // sigma_h as an explicit tensor polynomial on this cell
    SymPolyMatrix sig_h(n, n);
    for (int pq = 0; pq < static_cast<int>(sig_h.comp.size()); ++pq)
      for (int m = 0; m < elem.nmono(); ++m) {
        double v = span(pq * elem.nmono() + m);
        if (v != 0.0) sig_h.comp[pq].add_term(elem.mono.list[m], v);
      }

    SymPolyMatrix err(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        err(i, j) = P.sigma_exact(i, j).to_barycentric(s) - sig_h(i, j);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        s_l2 += (i == j ? 1.0 : 2.0) * integrate(s, err(i, j) * err(i, j));

    VecPoly div_err = local_divergence(err, s);
    for (int i = 0; i < n; ++i)
      s_div += integrate(s, div_err[i] * div_err[i]);

    for (int i = 0; i < n; ++i) {
      BarycentricPoly uh(n);
      for (int m = 0; m < monoV.size(); ++m) {
        double v = u(map.cell_disp_offset[c] + i * monoV.size() + m);
        if (v != 0.0) uh.add_term(monoV.list[m], v);
      }
      BarycentricPoly du = P.u_exact[i].to_barycentric(s) - uh;
      u_l2 += integrate(s, du * du);
    }
  }
  row.e_sigma_l2 = std::sqrt(std::max(s_l2, 0.0));
  row.e_sigma_div = std::sqrt(std::max(s_div, 0.0));
  row.e_sigma_hdiv = std::sqrt(std::max(s_l2 + s_div, 0.0));
  row.e_u_l2 = std::sqrt(std::max(u_l2, 0.0));
  return row;
}

//---------------------------------------------------------------------------
// Discrete inf-sup constant
//---------------------------------------------------------------------------

struct InfSupResult {
  double beta = 0.0;        ///< sqrt of the smallest generalized eigenvalue
  double theta_min = 0.0;   ///< smallest eigenvalue of (B S^-1 B^T, Mu)
  std::int64_t dim_stress = 0, dim_disp = 0;
  bool ok = false;          ///< eigensolve succeeded and theta_min > 0
};

/// beta_h = min over v of max over tau of (div tau, v) /
/// (|tau|_Hdiv |v|_0), computed as the smallest eigenvalue of the
/// generalized problem (B S^{-1} B^T) w = theta Mu w. Dense throughout;
/// intended for desk-scale systems.
inline InfSupResult inf_sup_constant(const SaddleSystem& sys) {
  InfSupResult r;
  r.dim_stress = sys.map.stress_count;
  r.dim_disp = sys.map.displacement_count;

  Eigen::MatrixXd S(sys.S);
  Eigen::MatrixXd B(sys.B);
  Eigen::MatrixXd Mu(sys.Mu);

  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("inf_sup_constant: H(div) Gram not SPD");
  Eigen::MatrixXd H = B * llt.solve(B.transpose());
  H = 0.5 * (H + H.transpose());

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(H, Mu);
  if (ges.info() != Eigen::Success)
    throw std::runtime_error("inf_sup_constant: eigensolve failed");
  r.theta_min = ges.eigenvalues()(0);
  r.beta = std::sqrt(std::max(r.theta_min, 0.0));
  double theta_max = ges.eigenvalues()(ges.eigenvalues().size() - 1);
  r.ok = r.theta_min > 1e-14 * std::max(theta_max, 1.0);
  return r;
}

//---------------------------------------------------------------------------
// Convergence study
//---------------------------------------------------------------------------

struct StudyOptions {
  bool with_beta = false;
  bool allow_low_degree = false;
  bool deterministic_reduction = false;
  std::int64_t cell_budget = 200000;
};

/// Run the manufactured problem over m = 1, 2, 4, ..., 2^(levels-1) and
/// report errors and observed rates; per-level failures are recorded and
/// the study continues.
inline std::vector<ConvergenceRow> convergence_study(
    int n, int k, double mu, double lambda, int levels, std::uint64_t seed,
    const StudyOptions& opts = {}) {
  if (levels < 1) throw std::invalid_argument("convergence_study: levels >= 1");
  MmsProblem P = manufactured_solution(n, k, mu, lambda, seed);
  std::vector<ConvergenceRow> rows;
  for (int lev = 0; lev < levels; ++lev) {
    const int m = 1 << lev;
    ConvergenceRow row;
    row.m = m;
    try {
      Mesh mesh = kuhn_mesh(n, m, opts.cell_budget);
      AssemblyOptions aopts;
      aopts.allow_low_degree = opts.allow_low_degree;
      aopts.deterministic_reduction = opts.deterministic_reduction;
      SaddleSystem sys =
          assemble_system(mesh, k, mu, lambda, load_per_cell(P, mesh), aopts);
      SolveResult sol = solve_saddle(sys);
      row = error_norms(P, sol.sigma, sol.u, mesh, sys.map);
      row.m = m;
      row.solve_residual = sol.rel_residual;
      row.unknowns = sol.unknowns;
      row.solve_ok = sol.ok;
      if (opts.with_beta) row.beta = inf_sup_constant(sys).beta;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    if (!rows.empty() && rows.back().error.empty() && row.error.empty()) {
      const ConvergenceRow& prev = rows.back();
      row.rate_hdiv = std::log2(prev.e_sigma_hdiv / row.e_sigma_hdiv);
      row.rate_u = std::log2(prev.e_u_l2 / row.e_u_l2);
      row.rate_sigma_l2 = std::log2(prev.e_sigma_l2 / row.e_sigma_l2);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

//---------------------------------------------------------------------------
// Coercivity on the discrete divergence-free subspace
//---------------------------------------------------------------------------

struct KernelEllipticityReport {
  double min_ratio = 0.0;       ///< min (A tau,tau)/|tau|_Hdiv^2 over samples
  double max_div_bound = 0.0;   ///< pointwise bound on |div tau| over samples
  std::int64_t kernel_dim = 0;
  bool pass = false;
};

/// Sample the kernel of B and check that (A tau, tau) >= c |tau|_Hdiv^2
/// with c > 0 and that kernel members are pointwise divergence-free (their
/// divergence is a polynomial whose coefficients vanish).
inline KernelEllipticityReport kernel_ellipticity(const Mesh& mesh,
                                                  const SaddleSystem& sys,
                                                  int samples,
                                                  std::uint64_t seed) {
  const int n = mesh.n;
  const int k = sys.map.k;
  Eigen::MatrixXd B(sys.B);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
  lu.setThreshold(1e-10);
  Eigen::MatrixXd ker = lu.kernel();

  KernelEllipticityReport rep;
  rep.kernel_dim = ker.cols();
  if (ker.cols() == 0) return rep;

  MonomialSet monoK(n + 1, k), monoV(n + 1, k - 1);
  std::vector<StressElement> elems;
  std::vector<SparseMat> divops;
  for (size_t c = 0; c < mesh.cells.size(); ++c) {
    elems.push_back(local_stress_basis(mesh, static_cast<int>(c), k));
    divops.push_back(divergence_operator(elems.back().simplex, monoK, monoV));
  }

  std::mt19937_64 rng(seed);
  rep.min_ratio = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd w(ker.cols());
    for (int i = 0; i < w.size(); ++i) w(i) = unit_draw(rng);
    Eigen::VectorXd tau = ker * w;
    double hdiv2 = tau.dot(sys.S * tau);
    if (hdiv2 <= 0) continue;
    rep.min_ratio = std::min(rep.min_ratio, tau.dot(sys.A * tau) / hdiv2);

    // pointwise divergence bound: sum of |monomial coefficients| bounds
    // |div tau| on the cell since 0 <= lambda <= 1
    for (size_t c = 0; c < mesh.cells.size(); ++c) {
      Eigen::VectorXd local = gather_cell_stress(sys.map,
                                                 static_cast<int>(c), tau);
      Eigen::VectorXd dc = divops[c] * (elems[c].coeff * local);
      rep.max_div_bound =
          std::max(rep.max_div_bound, dc.cwiseAbs().sum());
    }
  }
  rep.pass = rep.min_ratio > 0 && rep.max_div_bound < 1e-9;
  return rep;
}

//---------------------------------------------------------------------------
// n = 1 reduction: the stress space is the usual C0 degree-k space
//---------------------------------------------------------------------------

struct ReductionReport {
  std::int64_t dim_stress = 0;
  std::int64_t dim_h1 = 0;
  double max_eigen_mismatch = 0.0;  ///< generalized (stiffness, mass) spectra
  bool pass = false;
};

/// For n = 1 the assembled stress space must coincide with the standard
/// C0 Lagrange space of degree k. Dimensions are compared directly and the
/// spaces are compared through the basis-independent generalized
/// eigenvalues of (stiffness, mass).
inline ReductionReport reduction_check_1d(int k, int m) {
  Mesh mesh = kuhn_mesh(1, m);
  // Stress-space Grams: with mu = 1/2, lambda = 0 the compliance is the
  // identity, so A is the L2 mass; S - A is the d/dx stiffness.
  SaddleSystem sys = assemble_system(mesh, k, 0.5, 0.0);
  Eigen::MatrixXd Ms(sys.L2);
  Eigen::MatrixXd Ks = Eigen::MatrixXd(sys.S) - Ms;

  // Directly built C0 P_k space on the same mesh: per-cell Lagrange basis
  // at equispaced nodes, endpoint nodes shared.
  const std::int64_t nvert = m + 1;
  const std::int64_t dim = nvert + std::int64_t(m) * (k - 1);
  Eigen::MatrixXd Mh = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd Kh = Eigen::MatrixXd::Zero(dim, dim);

  // Lagrange polynomials on the reference interval in barycentric form
  std::vector<BarycentricPoly> lag;
  {
    Eigen::MatrixXd V(k + 1, k + 1);
    for (int i = 0; i <= k; ++i)
      for (int j = 0; j <= k; ++j)
        V(i, j) = std::pow(double(i) / k, j);
    Eigen::MatrixXd C = V.inverse();  // column b: monomial coeffs of basis b
    for (int b = 0; b <= k; ++b) {
      BarycentricPoly p(1);
      BarycentricPoly x = BarycentricPoly::coordinate(1, 1);  // lambda_1 = x
      BarycentricPoly xp = BarycentricPoly::constant(1, 1.0);
      for (int j = 0; j <= k; ++j) {
        p += xp * C(j, b);
        xp = xp * x;
      }
      lag.push_back(p);
    }
  }

  for (int c = 0; c < m; ++c) {
    Simplex s = mesh.cell_simplex(c);
    // node numbering: global vertex ids for endpoints, then per-cell
    // interior nodes
    std::vector<std::int64_t> gids(k + 1);
    gids[0] = mesh.cells[c][0];
    gids[k] = mesh.cells[c][1];
    for (int i = 1; i < k; ++i) gids[i] = nvert + std::int64_t(c) * (k - 1) + (i - 1);
    for (int a = 0; a <= k; ++a)
      for (int b = 0; b <= k; ++b) {
        Mh(gids[a], gids[b]) += integrate(s, lag[a] * lag[b]);
        BarycentricPoly da = gradient(lag[a], s)[0];
        BarycentricPoly db = gradient(lag[b], s)[0];
        Kh(gids[a], gids[b]) += integrate(s, da * db);
      }
  }

  ReductionReport rep;
  rep.dim_stress = sys.map.stress_count;
  rep.dim_h1 = dim;
  if (rep.dim_stress != rep.dim_h1) return rep;

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ga(Ks, Ms);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> gb(Kh, Mh);
  for (int i = 0; i < ga.eigenvalues().size(); ++i) {
    double a = ga.eigenvalues()(i), b = gb.eigenvalues()(i);
    rep.max_eigen_mismatch = std::max(
        rep.max_eigen_mismatch, std::abs(a - b) / (1.0 + std::abs(a)));
  }
  rep.pass = rep.max_eigen_mismatch < 1e-10;
  return rep;
}

}  // namespace hdivsym

#endif  // HDIVSYM_ANALYSIS_HPP
