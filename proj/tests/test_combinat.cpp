#include <catch2/catch_amalgamated.hpp>

#include "hdivsym/combinat.hpp"

using namespace hdivsym;

namespace {
std::int64_t factorial(int n) {
  std::int64_t r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}
}  // namespace

TEST_CASE("binomial small cases and out-of-range convention") {
  CHECK(binomial(4, 2) == 6);
  CHECK(binomial(3, 5) == 0);  // C(n,m) = 0 for m > n
  CHECK(binomial(5, -1) == 0);
  CHECK(binomial(0, 0) == 1);
  // factorial oracle
  CHECK(binomial(7, 3) == factorial(7) / (factorial(3) * factorial(4)));
  CHECK(binomial(7, 3) == 35);
  CHECK_THROWS_AS(binomial(-1, 0), std::invalid_argument);
}

TEST_CASE("binomial satisfies Pascal's rule on the tested range") {
  for (int n = 1; n <= 20; ++n)
    for (int m = 0; m <= n; ++m)
      CHECK(binomial(n, m) == binomial(n - 1, m - 1) + binomial(n - 1, m));
}

TEST_CASE("dim_report closed forms") {
  DimReport r = dim_report(2, 3);
  CHECK(r.dim_Pk_scalar == 10);
  CHECK(r.dim_S == 3);
  CHECK(r.dim_Pk_S == 30);
  CHECK(r.dim_bubble == 9);
  REQUIRE(r.dof_per_subsimplex.size() == 2);
  CHECK(r.dof_per_subsimplex[0] == 3);
  CHECK(r.dof_per_subsimplex[1] == 4);
  CHECK(r.dim_V_local == 2 * 6);
  CHECK(r.dim_rigid == 3);
  CHECK(r.counting_identity_holds());

  DimReport r34 = dim_report(3, 4);
  CHECK(r34.dim_Pk_S == 210);
  CHECK(r34.dof_per_subsimplex == std::vector<std::int64_t>{6, 15, 9});
  CHECK(r34.dim_bubble == 60);

  DimReport r12 = dim_report(1, 2);
  CHECK(r12.dim_Pk_S == 3);
  CHECK(r12.dof_per_subsimplex == std::vector<std::int64_t>{1});
  CHECK(r12.dim_bubble == 1);
}

TEST_CASE("dim_report rejects degrees below two") {
  CHECK_THROWS_AS(dim_report(2, 1), std::invalid_argument);
  CHECK_THROWS_AS(dim_report(0, 3), std::invalid_argument);
}

TEST_CASE("Chu-Vandermonde identities, spot values") {
  ChuVandermondeCheck c = verify_chu_vandermonde(2, 3);
  CHECK(c.lhs_first == 10);
  CHECK(c.rhs_first == 10);
  CHECK(c.lhs_second == 9);
  CHECK(c.rhs_second == 9);
  CHECK(c.both_hold());

  CHECK(verify_chu_vandermonde(1, 1).both_hold());
}

TEST_CASE("identity sweep: 1 <= n <= 8, 2 <= k <= 12, exact integers") {
  for (int n = 1; n <= 8; ++n)
    for (int k = 2; k <= 12; ++k) {
      INFO("n=" << n << " k=" << k);
      CHECK(verify_chu_vandermonde(n, k).both_hold());
      DimReport r = dim_report(n, k);
      CHECK(r.counting_identity_holds());
      for (std::int64_t d : r.dof_per_subsimplex) CHECK(d >= 0);
    }
}
