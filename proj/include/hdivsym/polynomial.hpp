// Polynomial algebra in barycentric coordinates on a simplex: sparse
// multi-index representation, evaluation, differentiation, products, trace
// restriction to subsimplices, exact monomial integration, and a
// Grundmann-Moller quadrature fallback for cross-checks.
//
// The closed form  int_K lambda^a dx = |K| n! prod(a_i!) / (|a|+n)!  is the
// integration backend for every inner product in the library, so all
// assembly and error integrals of polynomial data are exact up to rounding.

#ifndef HDIVSYM_POLYNOMIAL_HPP
#define HDIVSYM_POLYNOMIAL_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "hdivsym/geometry.hpp"

namespace hdivsym {

using MultiIndex = std::vector<int>;

inline int multi_degree(const MultiIndex& a) {
  int d = 0;
  for (int e : a) d += e;
  return d;
}

/// Graded lexicographic order: degree first, then lex. Canonical term order
/// for reproducible iteration.
struct GradedLex {
  bool operator()(const MultiIndex& a, const MultiIndex& b) const {
    int da = multi_degree(a), db = multi_degree(b);
    if (da != db) return da < db;
    return a < b;
  }
};

/// Sparse polynomial in the barycentric coordinates lambda_0..lambda_dim of
/// a dim-simplex. Zero coefficients are never stored.
class BarycentricPoly {
 public:
  BarycentricPoly() = default;
  explicit BarycentricPoly(int dim) : dim_(dim) {}

  static BarycentricPoly constant(int dim, double c) {
    BarycentricPoly p(dim);
    p.add_term(MultiIndex(dim + 1, 0), c);
    return p;
  }
  static BarycentricPoly monomial(int dim, const MultiIndex& a,
                                  double c = 1.0) {
    BarycentricPoly p(dim);
    p.add_term(a, c);
    return p;
  }
  /// The coordinate lambda_i itself.
  static BarycentricPoly coordinate(int dim, int i) {
    MultiIndex a(dim + 1, 0);
    a[i] = 1;
    return monomial(dim, a);
  }

  int dim() const { return dim_; }
  int nvars() const { return dim_ + 1; }
  const std::map<MultiIndex, double, GradedLex>& terms() const {
    return terms_;
  }
  bool empty() const { return terms_.empty(); }

  int degree() const {
    int d = 0;
    for (const auto& [a, c] : terms_) d = std::max(d, multi_degree(a));
    return d;
  }

  void add_term(const MultiIndex& a, double c) {
    if (static_cast<int>(a.size()) != nvars())
      throw std::invalid_argument("multi-index arity mismatch");
    if (c == 0.0) return;
    auto [it, inserted] = terms_.emplace(a, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  BarycentricPoly& operator+=(const BarycentricPoly& o) {
    for (const auto& [a, c] : o.terms_) add_term(a, c);
    return *this;
  }
  BarycentricPoly& operator-=(const BarycentricPoly& o) {
    for (const auto& [a, c] : o.terms_) add_term(a, -c);
    return *this;
  }
  BarycentricPoly& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& [a, c] : terms_) c *= s;
    return *this;
  }
  friend BarycentricPoly operator+(BarycentricPoly a,
                                   const BarycentricPoly& b) {
    return a += b;
  }
  friend BarycentricPoly operator-(BarycentricPoly a,
                                   const BarycentricPoly& b) {
    return a -= b;
  }
  friend BarycentricPoly operator*(BarycentricPoly a, double s) {
    return a *= s;
  }
  friend BarycentricPoly operator*(double s, BarycentricPoly a) {
    return a *= s;
  }

  friend BarycentricPoly operator*(const BarycentricPoly& a,
                                   const BarycentricPoly& b) {
    if (a.dim_ != b.dim_) throw std::invalid_argument("dim mismatch");
    BarycentricPoly r(a.dim_);
    for (const auto& [ai, ac] : a.terms_)
      for (const auto& [bi, bc] : b.terms_) {
        MultiIndex m(ai);
        for (size_t v = 0; v < m.size(); ++v) m[v] += bi[v];
        r.add_term(m, ac * bc);
      }
    return r;
  }

  /// Evaluate at given barycentric coordinates.
  double eval_lambda(const Vector& lam) const {
    double r = 0.0;
    for (const auto& [a, c] : terms_) {
      double t = c;
      for (int v = 0; v < nvars(); ++v)
        for (int e = 0; e < a[v]; ++e) t *= lam(v);
      r += t;
    }
    return r;
  }

  /// Evaluate at a physical point of the simplex.
  double eval(const Simplex& s, const Vector& x) const {
    return eval_lambda(s.lambda(x));
  }

  /// Formal partial derivative with respect to lambda_v.
  BarycentricPoly d_lambda(int v) const {
    BarycentricPoly r(dim_);
    for (const auto& [a, c] : terms_) {
      if (a[v] == 0) continue;
      MultiIndex m(a);
      m[v] -= 1;
      r.add_term(m, c * a[v]);
    }
    return r;
  }

  /// Multiply every term by (sum_v lambda_v)^(target-deg) so all terms have
  /// total degree `target`. Identity as a function on the simplex.
  BarycentricPoly homogenize(int target) const {
    BarycentricPoly r = *this;
    BarycentricPoly sum(dim_);
    for (int v = 0; v <= dim_; ++v) sum += coordinate(dim_, v);
    bool again = true;
    while (again) {
      again = false;
      BarycentricPoly lower(dim_), keep(dim_);
      for (const auto& [a, c] : r.terms_) {
        int d = multi_degree(a);
        if (d > target) throw std::invalid_argument("degree above target");
        (d < target ? lower : keep).add_term(a, c);
      }
      if (!lower.empty()) {
        r = keep + lower * sum;
        again = true;
      }
    }
    return r;
  }

 private:
  int dim_ = 0;
  std::map<MultiIndex, double, GradedLex> terms_;
};

/// Gradient of p on simplex s via the chain rule through grad lambda.
inline std::vector<BarycentricPoly> gradient(const BarycentricPoly& p,
                                             const Simplex& s) {
  const int n = s.dim();
  std::vector<BarycentricPoly> g(n, BarycentricPoly(p.dim()));
  for (int v = 0; v <= n; ++v) {
    BarycentricPoly dv = p.d_lambda(v);
    if (dv.empty()) continue;
    for (int c = 0; c < n; ++c) g[c] += dv * s.grad_lambda(v, c);
  }
  return g;
}

/// Exact integral of lambda^a over the unit-measure reference n-simplex:
/// n! prod(a_i!) / (|a| + n)!.
inline double unit_monomial_integral(const MultiIndex& a, int n) {
  double num = 1.0;
  for (int i = 2; i <= n; ++i) num *= i;
  for (int e : a) {
    if (e < 0) throw std::invalid_argument("negative exponent");
    for (int i = 2; i <= e; ++i) num *= i;
  }
  double den = 1.0;
  const int total = multi_degree(a) + n;
  for (int i = 2; i <= total; ++i) den *= i;
  return num / den;
}

/// Exact integral of the barycentric monomial lambda^a over simplex s.
inline double integrate_monomial(const Simplex& s, const MultiIndex& a) {
  return s.measure * unit_monomial_integral(a, s.dim());
}

/// Exact integral of a product of polynomials over s. Expands the product
/// term-wise; guards against pathological term blowup.
inline double integrate_product(const Simplex& s,
                                const std::vector<BarycentricPoly>& ps,
                                std::size_t term_budget = 2000000) {
  if (ps.empty()) return s.measure;
  BarycentricPoly prod = ps[0];
  for (size_t i = 1; i < ps.size(); ++i) {
    std::size_t bound = prod.terms().size() * ps[i].terms().size();
    if (bound > term_budget)
      throw std::runtime_error("integrate_product: term budget exceeded");
    prod = prod * ps[i];
  }
  double r = 0.0;
  for (const auto& [a, c] : prod.terms())
    r += c * unit_monomial_integral(a, s.dim());
  return r * s.measure;
}

/// Integral of a single polynomial over s.
inline double integrate(const Simplex& s, const BarycentricPoly& p) {
  double r = 0.0;
  for (const auto& [a, c] : p.terms())
    r += c * unit_monomial_integral(a, s.dim());
  return r * s.measure;
}

/// Restriction of p to the subsimplex spanned by the cell-local vertex
/// subset `sub` (sorted): lambda_i = 0 off the subset, then re-indexed to
/// the subsimplex's own barycentric coordinates.
inline BarycentricPoly restrict_to_subsimplex(const BarycentricPoly& p,
                                              const std::vector<int>& sub) {
  const int l = static_cast<int>(sub.size()) - 1;
  std::vector<int> position(p.nvars(), -1);
  for (int r = 0; r <= l; ++r) {
    if (sub[r] < 0 || sub[r] >= p.nvars())
      throw std::invalid_argument("subset index out of range");
    position[sub[r]] = r;
  }
  BarycentricPoly out(l);
  for (const auto& [a, c] : p.terms()) {
    MultiIndex m(l + 1, 0);
    bool keep = true;
    for (int v = 0; v < p.nvars(); ++v) {
      if (a[v] == 0) continue;
      if (position[v] < 0) {
        keep = false;
        break;
      }
      m[position[v]] = a[v];
    }
    if (keep) out.add_term(m, c);
  }
  return out;
}

/// One quadrature node in barycentric coordinates with its weight.
struct QuadPoint {
  Vector lambda;
  double weight;
};

/// Grundmann-Moller rule on the n-simplex, exact for polynomials up to the
/// requested degree. Weights are normalized to sum to 1, so
/// int_K f ~= measure(K) * sum w_q f(lambda_q).
inline std::vector<QuadPoint> gm_quadrature(int n, int degree) {
  if (n < 1 || degree < 0)
    throw std::invalid_argument("gm_quadrature: need n >= 1, degree >= 0");
  if (degree > 40) throw std::invalid_argument("gm_quadrature: degree > 40");
  const int s = degree <= 1 ? 0 : (degree - 1 + 1) / 2;  // 2s+1 >= degree
  const int d = 2 * s + 1;

  double nfact = 1.0;
  for (int i = 2; i <= n; ++i) nfact *= i;

  std::vector<QuadPoint> rule;
  for (int i = 0; i <= s; ++i) {
    double coef = (i % 2 == 0) ? 1.0 : -1.0;
    coef *= std::pow(2.0, -2 * s) * std::pow(double(d + n - 2 * i), d);
    for (int j = 2; j <= i; ++j) coef /= j;
    for (int j = 2; j <= d + n - i; ++j) coef /= j;
    coef *= nfact;  // reference measure normalization

    // all beta in N_0^{n+1} with |beta| = s - i
    MultiIndex beta(n + 1, 0);
    beta[0] = s - i;
    while (true) {
      QuadPoint q;
      q.lambda.resize(n + 1);
      for (int v = 0; v <= n; ++v)
        q.lambda(v) = double(2 * beta[v] + 1) / double(d + n - 2 * i);
      q.weight = coef;
      rule.push_back(q);

      // next composition of s-i into n+1 parts
      int v = n - 1;
      while (v >= 0 && beta[v] == 0) --v;
      if (v < 0) break;
      int tail = beta[n];
      beta[n] = 0;
      beta[v] -= 1;
      beta[v + 1] = tail + 1;
    }
  }
  return rule;
}

//---------------------------------------------------------------------------
// Dense view over a fixed homogeneous monomial basis. Used by the element
// and assembly code, where Gram matrices over these bases turn integration
// into dense linear algebra.
//---------------------------------------------------------------------------

/// All multi-indices over `nvars` variables of total degree exactly
/// `degree`, lex-ordered, with O(log) index lookup.
struct MonomialSet {
  int nvars = 0;
  int degree = 0;
  std::vector<MultiIndex> list;
  std::map<MultiIndex, int> index;

  MonomialSet() = default;
  MonomialSet(int nvars_, int degree_) : nvars(nvars_), degree(degree_) {
    MultiIndex a(nvars, 0);
    build(a, 0, degree);
    for (size_t i = 0; i < list.size(); ++i) index[list[i]] = int(i);
  }

  int size() const { return static_cast<int>(list.size()); }

 private:
  void build(MultiIndex& a, int pos, int left) {
    if (pos == nvars - 1) {
      a[pos] = left;
      list.push_back(a);
      a[pos] = 0;
      return;
    }
    for (int e = left; e >= 0; --e) {
      a[pos] = e;
      build(a, pos + 1, left - e);
    }
    a[pos] = 0;
  }
};

/// Coefficients of p (homogenized to set.degree) over the monomial set.
inline Eigen::VectorXd dense_coefficients(const BarycentricPoly& p,
                                          const MonomialSet& set) {
  BarycentricPoly h = p.homogenize(set.degree);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(set.size());
  for (const auto& [a, c] : h.terms()) {
    auto it = set.index.find(a);
    if (it == set.index.end())
      throw std::logic_error("monomial outside the basis set");
    v(it->second) += c;
  }
  return v;
}

/// Gram matrix G[a,b] = int lambda^(a+b) over the unit-measure reference
/// n-simplex, for monomials drawn from A and B. Scale by measure(K) for a
/// physical cell.
inline Eigen::MatrixXd reference_gram(int n, const MonomialSet& A,
                                      const MonomialSet& B) {
  Eigen::MatrixXd G(A.size(), B.size());
  MultiIndex sum(A.nvars);
  for (int i = 0; i < A.size(); ++i)
    for (int j = 0; j < B.size(); ++j) {
      for (int v = 0; v < A.nvars; ++v) sum[v] = A.list[i][v] + B.list[j][v];
      G(i, j) = unit_monomial_integral(sum, n);
    }
  return G;
}

}  // namespace hdivsym

#endif  // HDIVSYM_POLYNOMIAL_HPP
