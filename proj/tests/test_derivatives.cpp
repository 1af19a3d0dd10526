#include <catch2/catch_amalgamated.hpp>

#include "mateq/derivatives.hpp"
#include "mateq/gradcheck.hpp"

using namespace mateq;

namespace {
Matrix scalar(double x) { return Matrix::from_rows({{x}}); }
double rel(const Matrix& a, const Matrix& b) {
  return frobenius_norm(a - b) /
         std::max(1.0, std::max(frobenius_norm(a), frobenius_norm(b)));
}
}  // namespace

TEST_CASE("csylv scalar chain") {
  const SolveReport r = solve_csylv(scalar(1), scalar(1), scalar(-2));
  ForwardSeeds f;
  f.A = scalar(1);
  CHECK(rel(tangent_csylv(r, f), scalar(-0.5)) < 1e-12);
  ForwardSeeds fc;
  fc.C = scalar(1);
  CHECK(rel(tangent_csylv(r, fc), scalar(-0.5)) < 1e-12);

  const AdjointBundle a = adjoint_csylv(r, scalar(2));
  CHECK(rel(a.A, scalar(-1)) < 1e-12);
  CHECK(rel(*a.B, scalar(-1)) < 1e-12);
  CHECK(rel(a.C, scalar(-1)) < 1e-12);

  const AdjointBundle z = adjoint_csylv(r, scalar(0));
  CHECK(frobenius_norm(z.A) == 0.0);
  CHECK(frobenius_norm(z.C) == 0.0);
}

TEST_CASE("dsylv scalar chain") {
  const SolveReport r = solve_dsylv(scalar(0.5), scalar(0.5), scalar(0.75));
  ForwardSeeds fc;
  fc.C = scalar(1);
  CHECK(rel(tangent_dsylv(r, fc), scalar(4.0 / 3.0)) < 1e-12);
  const AdjointBundle a = adjoint_dsylv(r, scalar(1));
  CHECK(rel(a.C, scalar(4.0 / 3.0)) < 1e-12);
  CHECK(rel(a.A, scalar(2.0 / 3.0)) < 1e-12);
}

TEST_CASE("clyap scalar chain") {
  const SolveReport r = solve_clyap(scalar(-1), scalar(2));
  ForwardSeeds fa;
  fa.A = scalar(1);
  CHECK(rel(tangent_clyap(r, fa), scalar(1)) < 1e-12);
  const AdjointBundle a = adjoint_clyap(r, scalar(1));
  CHECK(rel(a.C, scalar(0.5)) < 1e-12);
  CHECK(rel(a.A, scalar(1)) < 1e-12);
}

TEST_CASE("dlyap scalar chain and degenerate A") {
  const SolveReport r = solve_dlyap(scalar(0.5), scalar(0.75));
  const AdjointBundle a = adjoint_dlyap(r, scalar(1));
  CHECK(rel(a.C, scalar(4.0 / 3.0)) < 1e-12);
  CHECK(rel(a.A, scalar(4.0 / 3.0)) < 1e-12);

  Rng rng(2);
  const Matrix q = random_symmetric(3, rng);
  const SolveReport rz = solve_dlyap(Matrix(3, 3), q);
  const Matrix pbar = random_symmetric(3, rng);
  const AdjointBundle az = adjoint_dlyap(rz, pbar);
  CHECK(rel(az.C, pbar) < 1e-12);
  CHECK(frobenius_norm(az.A) == 0.0);
}

TEST_CASE("care scalar derivatives") {
  const SolveReport r = solve_care(scalar(0), scalar(1), scalar(1), scalar(1));
  ForwardSeeds f;
  f.C = scalar(1);
  CHECK(rel(tangent_care(r, f), scalar(0.5)) < 1e-10);
  ForwardSeeds fr;
  fr.R = scalar(1);
  CHECK(rel(tangent_care(r, fr), scalar(0.5)) < 1e-10);
  ForwardSeeds fa;
  fa.A = scalar(1);
  CHECK(rel(tangent_care(r, fa), scalar(1)) < 1e-10);

  const AdjointBundle a = adjoint_care(r, scalar(1));
  CHECK(rel(a.A, scalar(1)) < 1e-10);
  CHECK(rel(*a.B, scalar(-1)) < 1e-10);
  CHECK(rel(a.C, scalar(0.5)) < 1e-10);
  CHECK(rel(*a.R, scalar(0.5)) < 1e-10);
}

TEST_CASE("dare scalar derivatives") {
  const SolveReport r = solve_dare(scalar(0), scalar(1), scalar(1), scalar(1));
  ForwardSeeds f;
  f.C = scalar(1);
  CHECK(rel(tangent_dare(r, f), scalar(1)) < 1e-10);
  const AdjointBundle a = adjoint_dare(r, scalar(1));
  CHECK(rel(a.C, scalar(1)) < 1e-10);
  CHECK(frobenius_norm(a.A) < 1e-10);
  CHECK(frobenius_norm(*a.R) < 1e-10);
}

TEST_CASE("fd and dot tests per kind") {
  for (EquationKind kind :
       {EquationKind::csylv, EquationKind::dsylv, EquationKind::clyap,
        EquationKind::dlyap, EquationKind::care, EquationKind::dare}) {
    Rng rng = Rng::stream(77, static_cast<int>(kind));
    const EquationSpec spec = random_spec(kind, 4, 2, rng);
    CAPTURE(kind_name(kind));
    CHECK(fd_forward_check(spec, 5, 123).passed);
    CHECK(dot_test(spec, 10, 456).passed);
    CHECK(fd_adjoint_check(spec, 3, 789).passed);
  }
}

TEST_CASE("tangent linearity") {
  Rng rng(31);
  const EquationSpec spec = random_spec(EquationKind::dare, 3, 2, rng);
  const SolveReport r = solve(spec);
  const ForwardSeeds s1 = random_seeds(spec, rng);
  const ForwardSeeds s2 = random_seeds(spec, rng);
  const double al = 0.7, be = -1.3;
  ForwardSeeds mix;
  mix.A = al * *s1.A + be * *s2.A;
  mix.B = al * *s1.B + be * *s2.B;
  mix.C = al * *s1.C + be * *s2.C;
  mix.R = al * *s1.R + be * *s2.R;
  const Matrix want = al * tangent(r, s1) + be * tangent(r, s2);
  CHECK(rel(tangent(r, mix), want) < 1e-10);
}

TEST_CASE("symmetry propagation for riccati adjoints") {
  Rng rng(41);
  const EquationSpec spec = random_spec(EquationKind::care, 4, 2, rng);
  const SolveReport r = solve(spec);
  const Matrix pbar = random_symmetric(4, rng);
  const AdjointBundle a = adjoint(r, pbar);
  CHECK(is_symmetric(a.C, 1e-10));
  CHECK(is_symmetric(*a.R, 1e-10));
}

TEST_CASE("dlyap symmetric specialization collapses to 2 S A P") {
  Rng rng(51);
  const EquationSpec spec = random_spec(EquationKind::dlyap, 5, 0, rng);
  const SolveReport r = solve(spec);
  const Matrix pbar = random_symmetric(5, rng);
  const AdjointBundle a = adjoint_dlyap(r, pbar);
  const Matrix s = solve_dlyap(transpose(spec.A), pbar).P;
  CHECK(rel(a.A, 2.0 * s * spec.A * r.P) < 1e-10);
}

TEST_CASE("clyap equals csylv with B = A^T") {
  Rng rng(61);
  const Matrix a = random_hurwitz(4, rng);
  const Matrix q = random_symmetric(4, rng);
  const SolveReport rl = solve_clyap(a, q);
  const SolveReport rs = solve_csylv(a, transpose(a), q);
  CHECK(rel(rl.P, rs.P) < 1e-10);
  const Matrix pbar = random_symmetric(4, rng);
  const AdjointBundle al = adjoint_clyap(rl, pbar);
  const AdjointBundle as = adjoint_csylv(rs, pbar);
  CHECK(rel(al.A, as.A + transpose(*as.B)) < 1e-10);
  // symmetric short form for clyap
  const Matrix s = solve_clyap(transpose(a), pbar).P;
  CHECK(rel(al.A, 2.0 * s * rl.P) < 1e-10);
}
