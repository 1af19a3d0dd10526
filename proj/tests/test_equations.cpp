#include <catch2/catch_amalgamated.hpp>

#include "mateq/equations.hpp"
#include "mateq/gradcheck.hpp"

using namespace mateq;

namespace {
double rel(const Matrix& a, const Matrix& b) {
  return frobenius_norm(a - b) /
         std::max(1.0, std::max(frobenius_norm(a), frobenius_norm(b)));
}
Matrix scalar(double x) { return Matrix::from_rows({{x}}); }
}  // namespace

TEST_CASE("csylv basics") {
  CHECK(rel(solve_csylv(scalar(1), scalar(1), scalar(-2)).P, scalar(1)) < 1e-12);
  const Matrix i2 = Matrix::identity(2);
  CHECK(rel(solve_csylv(i2, i2, -2.0 * i2).P, i2) < 1e-12);
  Rng rng(21);
  const EquationSpec s = random_spec(EquationKind::csylv, 5, 0, rng);
  const SolveReport r = solve(s);
  CHECK(rel(r.P, kron_oracle_solve(s)) < 1e-10);
  CHECK(r.residual <= 1e-10 * frobenius_norm(s.A) * std::max(1.0, frobenius_norm(r.P)) + 1e-10);
}

TEST_CASE("dsylv basics") {
  const Matrix z = Matrix(3, 3);
  Rng rng(5);
  const Matrix q = random_matrix(3, 3, rng);
  CHECK(rel(solve_dsylv(z, z, q).P, q) < 1e-14);
  CHECK(rel(solve_dsylv(scalar(0.5), scalar(0.5), scalar(0.75)).P, scalar(1)) < 1e-12);
  const EquationSpec s = random_spec(EquationKind::dsylv, 5, 0, rng);
  CHECK(rel(solve(s).P, kron_oracle_solve(s)) < 1e-10);
}

TEST_CASE("clyap basics") {
  CHECK(rel(solve_clyap(scalar(-1), scalar(2)).P, scalar(1)) < 1e-12);
  const Matrix i2 = Matrix::identity(2);
  CHECK(rel(solve_clyap(-1.0 * i2, 2.0 * i2).P, i2) < 1e-12);
  Rng rng(9);
  const Matrix a = random_hurwitz(6, rng);
  const Matrix g = random_matrix(6, 6, rng);
  const Matrix q = symmetrize(g * transpose(g));
  const SolveReport r = solve_clyap(a, q);
  CHECK(frobenius_norm(r.P - transpose(r.P)) == 0.0);
  CHECK(is_positive_semidefinite(r.P));
}

TEST_CASE("dlyap basics") {
  Rng rng(13);
  const Matrix q0 = random_symmetric(3, rng);
  CHECK(rel(solve_dlyap(Matrix(3, 3), q0).P, q0) < 1e-14);
  CHECK(rel(solve_dlyap(scalar(0.5), scalar(0.75)).P, scalar(1)) < 1e-12);
  const EquationSpec s = random_spec(EquationKind::dlyap, 6, 0, rng);
  CHECK(rel(solve(s).P, kron_oracle_solve(s)) < 1e-10);
}

TEST_CASE("care scalar and 2x2") {
  SolveReport r = solve_care(scalar(0), scalar(1), scalar(1), scalar(1));
  CHECK(rel(r.P, scalar(1)) < 1e-11);
  CHECK(rel(r.K, scalar(1)) < 1e-11);
  CHECK(rel(r.A_tilde, scalar(-1)) < 1e-11);
  CHECK_FALSE(r.stability_warning);

  CHECK(rel(solve_care(scalar(0), scalar(1), scalar(4), scalar(1)).P, scalar(2)) < 1e-11);

  const Matrix a = Matrix::from_rows({{0.0, 1.0}, {0.0, 0.0}});
  const Matrix i2 = Matrix::identity(2);
  r = solve_care(a, i2, i2, i2);
  CHECK(r.residual <= 1e-10);
  CHECK(frobenius_norm(r.P - transpose(r.P)) == 0.0);
  CHECK(is_positive_semidefinite(r.P));

  CHECK_THROWS_AS(solve_care(scalar(0), scalar(1), scalar(1), scalar(-1)),
                  DefinitenessError);
}

TEST_CASE("dare scalar, golden ratio, benchmark system") {
  SolveReport r = solve_dare(scalar(0), scalar(1), scalar(1), scalar(1));
  CHECK(rel(r.P, scalar(1)) < 1e-11);

  r = solve_dare(scalar(1), scalar(1), scalar(1), scalar(1));
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  CHECK(rel(r.P, scalar(phi)) < 1e-11);
  CHECK(rel(r.K, scalar(2.0 / (1.0 + std::sqrt(5.0)))) < 1e-11);

  const Matrix a = Matrix::from_rows({{1.0, 1.0}, {0.0, 1.0}});
  const Matrix q = Matrix::from_rows({{1.0, 0.0}, {0.0, 0.0}});
  const Matrix rr = Matrix::from_rows({{0.1, 0.0}, {0.0, 0.3}});
  r = solve_dare(a, Matrix::identity(2), q, rr);
  CHECK(r.residual <= 1e-10);
  CHECK(frobenius_norm(r.P - transpose(r.P)) == 0.0);
  CHECK(is_positive_semidefinite(r.P));
  CHECK_FALSE(r.stability_warning);

  // K and A_tilde consistent with P
  const Matrix btp = transpose(Matrix::identity(2)) * r.P;
  const Matrix k2 = lu_solve(rr + btp * Matrix::identity(2), btp * a);
  CHECK(frobenius_norm(k2 - r.K) <= 1e-12 * frobenius_norm(r.K));
  CHECK(frobenius_norm((a - Matrix::identity(2) * r.K) - r.A_tilde) == 0.0);
}

TEST_CASE("oracle equivalence over sizes") {
  for (EquationKind kind : {EquationKind::csylv, EquationKind::dsylv,
                            EquationKind::clyap, EquationKind::dlyap}) {
    for (std::size_t n : {1, 2, 3, 5, 8}) {
      for (std::uint64_t s = 0; s < 3; ++s) {
        Rng rng = Rng::stream(100 + static_cast<int>(kind), n * 10 + s);
        const EquationSpec spec = random_spec(kind, n, 0, rng);
        CHECK(rel(solve(spec).P, kron_oracle_solve(spec)) < 1e-10);
      }
    }
  }
}

TEST_CASE("oracle rejects riccati kinds and large n") {
  Rng rng(1);
  EquationSpec s = random_spec(EquationKind::dare, 2, 1, rng);
  CHECK_THROWS_AS(kron_oracle_solve(s), InputError);
}

TEST_CASE("validation errors") {
  EquationSpec s;
  s.kind = EquationKind::care;
  s.A = Matrix::identity(2);
  s.B = Matrix(2, 1);
  s.C_or_Q = Matrix::from_rows({{0.0, 1.0}, {0.0, 0.0}});  // not symmetric
  s.R = Matrix::identity(1);
  CHECK_THROWS_AS(s.validate(), InputError);
}
