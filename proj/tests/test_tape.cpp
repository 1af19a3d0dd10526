#include <catch2/catch_amalgamated.hpp>

#include "mateq/gradcheck.hpp"
#include "mateq/tape.hpp"

using namespace mateq;

namespace {
double rel(const Matrix& a, const Matrix& b) {
  return frobenius_norm(a - b) /
         std::max(1.0, std::max(frobenius_norm(a), frobenius_norm(b)));
}
}  // namespace

TEST_CASE("quadratic gradient") {
  Rng rng(5);
  const Matrix x = random_matrix(3, 3, rng);
  const Matrix c = random_matrix(3, 3, rng);
  Tape tape;
  const auto xr = tape.constant(x);
  const auto cr = tape.constant(c);
  const auto loss = tape.sq_err(xr, cr);
  const auto adj = tape.backward(loss);
  CHECK(rel(adj[xr], 2.0 * (x - c)) < 1e-14);
  CHECK(rel(adj[cr], -2.0 * (x - c)) < 1e-14);
}

TEST_CASE("solver node matches direct adjoint call") {
  Rng rng(6);
  const EquationSpec spec = random_spec(EquationKind::dare, 3, 2, rng);
  const Matrix w = random_symmetric(3, rng);

  Tape tape;
  const auto a = tape.constant(spec.A);
  const auto b = tape.constant(spec.B);
  const auto q = tape.constant(spec.C_or_Q);
  const auto r = tape.constant(spec.R);
  const auto p = tape.dare(a, b, q, r);
  // <W, P> as a scalar node: sum((P - 0)^2) will not do; use 0.25*(||P+W||^2 - ||P-W||^2)
  const auto wr = tape.constant(w);
  const auto zero = tape.constant(Matrix(3, 3));
  const auto plus = tape.sq_err(tape.add(p, wr), zero);
  const auto minus = tape.sq_err(tape.sub(p, wr), zero);
  const auto loss = tape.scale(tape.sub(plus, minus), 0.25);
  CHECK(tape.value(loss)(0, 0) == Catch::Approx(fdot(w, tape.value(p))));

  const auto adj = tape.backward(loss);
  const AdjointBundle direct = adjoint(tape.report(p), w);
  CHECK(rel(adj[a], direct.A) < 1e-10);
  CHECK(rel(adj[b], *direct.B) < 1e-10);
  CHECK(rel(adj[q], direct.C) < 1e-10);
  CHECK(rel(adj[r], *direct.R) < 1e-10);
}

TEST_CASE("fan-out doubles the adjoint") {
  Rng rng(8);
  const Matrix x = random_matrix(2, 2, rng);
  const Matrix c = random_matrix(2, 2, rng);
  Tape tape;
  const auto xr = tape.constant(x);
  const auto cr = tape.constant(c);
  const auto l1 = tape.sq_err(xr, cr);
  const auto twice = tape.add(l1, l1);
  const auto adj1 = tape.backward(l1);
  const auto adj2 = tape.backward(twice);
  CHECK(rel(adj2[xr], 2.0 * adj1[xr]) < 1e-14);
}

TEST_CASE("lu_solve node gradient vs finite differences") {
  Rng rng(9);
  const Matrix a = random_matrix(3, 3, rng) + 4.0 * Matrix::identity(3);
  const Matrix b = random_matrix(3, 2, rng);
  const Matrix c = random_matrix(3, 2, rng);

  auto loss_of = [&](const Matrix& am, const Matrix& bm) {
    const Matrix d = lu_solve(am, bm) - c;
    return fdot(d, d);
  };

  Tape tape;
  const auto ar = tape.constant(a);
  const auto br = tape.constant(b);
  const auto loss = tape.sq_err(tape.lu_solve(ar, br), tape.constant(c));
  const auto adj = tape.backward(loss);

  const double h = 1e-6;
  for (auto [node, base] : {std::pair{ar, a}, std::pair{br, b}}) {
    Matrix fd(base.rows(), base.cols());
    for (std::size_t i = 0; i < base.rows(); ++i) {
      for (std::size_t j = 0; j < base.cols(); ++j) {
        Matrix plus = base, minus = base;
        plus(i, j) += h;
        minus(i, j) -= h;
        const double fp = (node == ar) ? loss_of(plus, b) : loss_of(a, plus);
        const double fm = (node == ar) ? loss_of(minus, b) : loss_of(a, minus);
        fd(i, j) = (fp - fm) / (2.0 * h);
      }
    }
    CHECK(rel(adj[node], fd) < 1e-5);
  }
}

TEST_CASE("determinism: identical tapes give bitwise-identical gradients") {
  auto build = [] {
    Rng rng(10);
    const EquationSpec spec = random_spec(EquationKind::care, 3, 2, rng);
    Tape tape;
    const auto a = tape.constant(spec.A);
    const auto b = tape.constant(spec.B);
    const auto q = tape.constant(spec.C_or_Q);
    const auto r = tape.constant(spec.R);
    const auto p = tape.care(a, b, q, r);
    const auto loss = tape.sq_err(p, tape.constant(Matrix(3, 3)));
    return tape.backward(loss)[a].data();
  };
  CHECK(build() == build());
}

TEST_CASE("backward requires scalar output") {
  Tape tape;
  const auto x = tape.constant(Matrix::identity(2));
  CHECK_THROWS_AS(tape.backward(x), InputError);
}
