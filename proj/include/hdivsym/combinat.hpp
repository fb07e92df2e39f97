// Integer combinatorics for simplicial polynomial spaces: binomial
// coefficients, dimension counts per subsimplex, and the Chu-Vandermonde
// identities that make the stress degree-of-freedom count close.
//
// Everything here is exact 64-bit integer arithmetic; these counts gate
// unisolvence checks and must not pick up rounding error.

#ifndef HDIVSYM_COMBINAT_HPP
#define HDIVSYM_COMBINAT_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace hdivsym {

/// C(n,m) with the convention C(n,m) = 0 for m < 0 or m > n. Requires n >= 0.
inline std::int64_t binomial(std::int64_t n, std::int64_t m) {
  if (n < 0) throw std::invalid_argument("binomial: n must be nonnegative");
  if (m < 0 || m > n) return 0;
  m = std::min(m, n - m);
  std::int64_t r = 1;
  for (std::int64_t i = 1; i <= m; ++i) {
    // n - m + i contributes a factor divisible once i! has been absorbed;
    // the running product stays integral at every step.
    r = r * (n - m + i) / i;
  }
  return r;
}

/// Dimension of P_k on an n-simplex (scalar-valued), C(n+k,n).
inline std::int64_t dim_poly(int n, int k) {
  return k >= 0 ? binomial(n + k, n) : 0;
}

/// Dimension of the symmetric n x n matrices, n(n+1)/2.
inline std::int64_t dim_sym(int n) { return std::int64_t(n) * (n + 1) / 2; }

/// Closed-form dimension counts for the degree-k symmetric-stress element
/// in n dimensions.
struct DimReport {
  int n = 0;
  int k = 0;
  std::int64_t dim_Pk_scalar = 0;  ///< C(n+k,n)
  std::int64_t dim_S = 0;          ///< n(n+1)/2
  std::int64_t dim_Pk_S = 0;       ///< dim_Pk_scalar * dim_S
  std::int64_t dim_bubble = 0;     ///< dim_S * C(n+k-2,n)
  /// ((n-l)(n+l+1)/2) * C(k-1,l) stress DOFs attached to each l-subsimplex,
  /// 0 <= l <= n-1.
  std::vector<std::int64_t> dof_per_subsimplex;
  std::int64_t dim_V_local = 0;  ///< n * C(n+k-1,n), local displacement space
  std::int64_t dim_rigid = 0;    ///< n(n+1)/2

  /// The counting identity: subsimplex DOFs (each l-subsimplex appears
  /// C(n+1,l+1) times on a cell) plus interior bubbles exhaust P_k(K;S).
  bool counting_identity_holds() const {
    std::int64_t total = dim_bubble;
    for (int l = 0; l < n; ++l)
      total += binomial(n + 1, l + 1) * dof_per_subsimplex[l];
    return total == dim_Pk_S;
  }
};

/// Evaluate all DimReport fields. Requires n >= 1 and k >= 2 (the bubble
/// space needs P_{k-2} weights).
inline DimReport dim_report(int n, int k) {
  if (n < 1) throw std::invalid_argument("dim_report: n must be >= 1");
  if (k < 2) throw std::invalid_argument("dim_report: k must be >= 2");
  DimReport r;
  r.n = n;
  r.k = k;
  r.dim_Pk_scalar = dim_poly(n, k);
  r.dim_S = dim_sym(n);
  r.dim_Pk_S = r.dim_Pk_scalar * r.dim_S;
  r.dim_bubble = r.dim_S * dim_poly(n, k - 2);
  r.dof_per_subsimplex.resize(n);
  for (int l = 0; l < n; ++l) {
    std::int64_t comps = std::int64_t(n - l) * (n + l + 1) / 2;
    r.dof_per_subsimplex[l] = comps * binomial(k - 1, l);
  }
  r.dim_V_local = std::int64_t(n) * dim_poly(n, k - 1);
  r.dim_rigid = dim_sym(n);
  return r;
}

/// Result of checking both Chu-Vandermonde identities by direct summation.
struct ChuVandermondeCheck {
  std::int64_t lhs_first = 0, rhs_first = 0;
  std::int64_t lhs_second = 0, rhs_second = 0;
  bool first_holds = false;
  bool second_holds = false;
  bool both_hold() const { return first_holds && second_holds; }
};

/// Evaluate both sides of
///   sum_l C(n+1,l+1) C(k-1,l)            = C(n+k,n)
///   sum_l C(n+1,l+1) C(k-1,l) C(l+1,2)   = (n(n+1)/2) C(n+k-2,n)
/// with l running over 0..n. Requires n >= 1, k >= 1.
inline ChuVandermondeCheck verify_chu_vandermonde(int n, int k) {
  if (n < 1 || k < 1)
    throw std::invalid_argument("verify_chu_vandermonde: need n >= 1, k >= 1");
  ChuVandermondeCheck c;
  for (int l = 0; l <= n; ++l) {
    std::int64_t base = binomial(n + 1, l + 1) * binomial(k - 1, l);
    c.lhs_first += base;
    c.lhs_second += base * binomial(l + 1, 2);
  }
  c.rhs_first = binomial(n + k, n);
  c.rhs_second = dim_sym(n) * binomial(n + k - 2, n);
  c.first_holds = (c.lhs_first == c.rhs_first);
  c.second_holds = (c.lhs_second == c.rhs_second);
  return c;
}

}  // namespace hdivsym

#endif  // HDIVSYM_COMBINAT_HPP
