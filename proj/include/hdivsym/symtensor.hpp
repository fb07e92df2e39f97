// Symmetric n x n matrix algebra: packed storage, Frobenius products, the
// rank-one tangent tensor basis T_{i,j} = t_{i,j} t_{i,j}^T of a simplex,
// its Frobenius-dual basis M_{i,j}, and the isotropic compliance operator.

#ifndef HDIVSYM_SYMTENSOR_HPP
#define HDIVSYM_SYMTENSOR_HPP

#include <Eigen/Dense>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "hdivsym/geometry.hpp"

namespace hdivsym {

/// Packed index of entry (i,j), i <= j, in row-major upper-triangular
/// storage of an n x n symmetric matrix.
inline int packed_index(int i, int j, int n) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i + 1) / 2 + j;
}

/// Rank of the strict pair (i,j), i < j, among all strict pairs of
/// {0,...,m-1} in lex order. Used to index tensors attached to vertex pairs.
inline int pair_rank(int i, int j, int m) {
  if (i >= j) throw std::invalid_argument("pair_rank: need i < j");
  return i * m - i * (i + 1) / 2 + (j - i - 1);
}

/// All strict pairs (i,j), 0 <= i < j < m, in lex order.
inline std::vector<std::pair<int, int>> strict_pairs(int m) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) out.emplace_back(i, j);
  return out;
}

/// Symmetric n x n matrix, one triangle stored.
class SymTensor {
 public:
  SymTensor() = default;
  explicit SymTensor(int n)
      : n_(n), packed_(Eigen::VectorXd::Zero(n * (n + 1) / 2)) {}

  static SymTensor identity(int n) {
    SymTensor t(n);
    for (int i = 0; i < n; ++i) t(i, i) = 1.0;
    return t;
  }
  /// v v^T (rank one, positive semidefinite).
  static SymTensor outer(const Vector& v) {
    SymTensor t(static_cast<int>(v.size()));
    for (int i = 0; i < t.n_; ++i)
      for (int j = i; j < t.n_; ++j) t(i, j) = v(i) * v(j);
    return t;
  }
  static SymTensor from_matrix(const Matrix& m) {
    SymTensor t(static_cast<int>(m.rows()));
    for (int i = 0; i < t.n_; ++i)
      for (int j = i; j < t.n_; ++j) t(i, j) = 0.5 * (m(i, j) + m(j, i));
    return t;
  }

  int n() const { return n_; }
  int packed_size() const { return static_cast<int>(packed_.size()); }
  const Eigen::VectorXd& packed() const { return packed_; }
  Eigen::VectorXd& packed() { return packed_; }

  double operator()(int i, int j) const {
    return packed_(packed_index(i, j, n_));
  }
  double& operator()(int i, int j) {
    return packed_(packed_index(i, j, n_));
  }

  Matrix to_matrix() const {
    Matrix m(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) m(i, j) = (*this)(i, j);
    return m;
  }

  double trace() const {
    double t = 0.0;
    for (int i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
  }

  /// Frobenius inner product A:B (off-diagonal entries count twice).
  double frobenius(const SymTensor& o) const {
    double r = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = i; j < n_; ++j)
        r += (i == j ? 1.0 : 2.0) * (*this)(i, j) * o(i, j);
    return r;
  }

  /// a^T (this) b.
  double bilinear(const Vector& a, const Vector& b) const {
    double r = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) r += a(i) * (*this)(i, j) * b(j);
    return r;
  }

  SymTensor& operator+=(const SymTensor& o) {
    packed_ += o.packed_;
    return *this;
  }
  SymTensor& operator*=(double s) {
    packed_ *= s;
    return *this;
  }
  friend SymTensor operator+(SymTensor a, const SymTensor& b) {
    return a += b;
  }
  friend SymTensor operator*(SymTensor a, double s) { return a *= s; }
  friend SymTensor operator*(double s, SymTensor a) { return a *= s; }

  /// Coordinates in the orthonormal basis of S (diagonal units and
  /// sqrt(2)-scaled off-diagonal units); the Euclidean norm of this vector
  /// is the Frobenius norm.
  Eigen::VectorXd orthonormal_coordinates() const {
    Eigen::VectorXd v(packed_size());
    int idx = 0;
    for (int i = 0; i < n_; ++i)
      for (int j = i; j < n_; ++j)
        v(idx++) = (i == j ? 1.0 : std::sqrt(2.0)) * (*this)(i, j);
    return v;
  }

 private:
  int n_ = 0;
  Eigen::VectorXd packed_;
};

/// Frobenius weights for packed storage: 1 on the diagonal positions, 2 on
/// off-diagonal ones, so A:B = sum_p w_p a_p b_p.
inline Eigen::VectorXd frobenius_weights(int n) {
  Eigen::VectorXd w(n * (n + 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) w(packed_index(i, j, n)) = (i == j) ? 1.0 : 2.0;
  return w;
}

/// The rank-one tangent tensors of a simplex and their dual basis, indexed
/// by vertex pairs (i,j), 0 <= i < j <= n, in lex order.
struct TensorBasis {
  int n = 0;
  std::vector<SymTensor> T;  ///< T_{i,j} = t_{i,j} t_{i,j}^T
  std::vector<SymTensor> M;  ///< dual: T_{i,j} : M_{k,l} = delta
  double gram_condition = 0.0;

  const SymTensor& tangent(int i, int j) const {
    return T[pair_rank(i, j, n + 1)];
  }
  const SymTensor& dual(int i, int j) const {
    return M[pair_rank(i, j, n + 1)];
  }
};

/// Matrix whose row r holds the coordinates of basis tensor r in the
/// canonical symmetric unit basis E_{pq}; column (pq) entry is
/// T : E_{pq} = T_pp (diagonal) or 2 T_pq (off-diagonal).
inline Matrix basis_coordinate_matrix(const std::vector<SymTensor>& ts) {
  const int dim = ts.empty() ? 0 : ts[0].packed_size();
  Matrix X(static_cast<int>(ts.size()), dim);
  const int n = ts.empty() ? 0 : ts[0].n();
  Eigen::VectorXd w = frobenius_weights(n);
  for (size_t r = 0; r < ts.size(); ++r)
    X.row(r) = (ts[r].packed().array() * w.array()).transpose();
  return X;
}

/// The n(n+1)/2 rank-one tensors built from the simplex's edge tangents.
/// They form a basis of S for any nondegenerate simplex; rank deficiency is
/// reported as an error naming the offending simplex.
inline TensorBasis rank_one_tangent_tensors(const Simplex& s) {
  TensorBasis b;
  b.n = s.dim();
  for (auto& [ij, t] : edge_tangents(s)) {
    (void)ij;
    b.T.push_back(SymTensor::outer(t));
  }
  Matrix X = basis_coordinate_matrix(b.T);
  Eigen::FullPivLU<Matrix> lu(X);
  lu.setThreshold(1e-12);
  if (lu.rank() < X.rows()) {
    std::ostringstream os;
    os << "tangent tensors rank-deficient (rank " << lu.rank() << " of "
       << X.rows() << ") for simplex with vertices:";
    for (const auto& v : s.vertices) os << " (" << v.transpose() << ")";
    throw DegenerateSimplexError(os.str());
  }
  return b;
}

/// Fill in the dual tensors M_{i,j} by solving the Frobenius duality system;
/// also records a condition estimate of the coordinate matrix.
inline TensorBasis dual_basis(TensorBasis b) {
  const int dim = static_cast<int>(b.T.size());
  Matrix X = basis_coordinate_matrix(b.T);
  Eigen::FullPivLU<Matrix> lu(X);
  lu.setThreshold(1e-12);
  if (lu.rank() < dim)
    throw DegenerateSimplexError("dual_basis: singular duality system");
  // Column k of X^{-1} holds M_k in canonical E_{pq} coordinates, which are
  // exactly the packed entries.
  Matrix Xinv = lu.inverse();
  b.M.clear();
  for (int c = 0; c < dim; ++c) {
    SymTensor m(b.n);
    m.packed() = Xinv.col(c);
    b.M.push_back(m);
  }
  b.gram_condition = X.norm() * Xinv.norm();
  return b;
}

/// Isotropic compliance: A tau = (1/2mu) (tau - lambda/(2mu + n lambda)
/// tr(tau) I). Symmetric positive definite as a map for mu > 0, any
/// bounded lambda >= 0.
inline SymTensor compliance_apply(const SymTensor& tau, double mu,
                                  double lambda) {
  if (mu <= 0.0) throw std::invalid_argument("compliance: mu must be > 0");
  if (lambda < 0.0)
    throw std::invalid_argument("compliance: lambda must be >= 0");
  const int n = tau.n();
  double c = lambda / (2.0 * mu + n * lambda);
  SymTensor out = tau;
  double t = c * tau.trace();
  for (int i = 0; i < n; ++i) out(i, i) -= t;
  out *= 1.0 / (2.0 * mu);
  return out;
}

/// Compliance as a matrix acting on packed coordinates.
inline Matrix compliance_matrix(int n, double mu, double lambda) {
  const int dim = n * (n + 1) / 2;
  Matrix C(dim, dim);
  for (int c = 0; c < dim; ++c) {
    SymTensor e(n);
    e.packed()(c) = 1.0;
    C.col(c) = compliance_apply(e, mu, lambda).packed();
  }
  return C;
}

}  // namespace hdivsym

#endif  // HDIVSYM_SYMTENSOR_HPP
