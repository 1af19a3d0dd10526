#include <catch2/catch_amalgamated.hpp>

#include "mateq/json_io.hpp"

using namespace mateq;

TEST_CASE("matrix json round trip and validation") {
  const Matrix m = Matrix::from_rows({{1.0, 2.0}, {3.0, 4.0}});
  const Matrix back = matrix_from_json(matrix_to_json(m), "m");
  CHECK(m.data() == back.data());

  json bad = {{"rows", 2}, {"cols", 2}, {"data", {1.0, 2.0, 3.0}}};
  CHECK_THROWS_AS(matrix_from_json(bad, "m"), InputError);

  json inf = {{"rows", 1}, {"cols", 1}, {"data", {std::numeric_limits<double>::infinity()}}};
  CHECK_THROWS_AS(matrix_from_json(inf, "m"), InputError);
}

TEST_CASE("equation spec json") {
  json j = {{"kind", "dare"},
            {"A", matrix_to_json(Matrix::from_rows({{1.0, 1.0}, {0.0, 1.0}}))},
            {"B", matrix_to_json(Matrix::identity(2))},
            {"Q", matrix_to_json(Matrix::from_rows({{1.0, 0.0}, {0.0, 0.0}}))},
            {"R", matrix_to_json(Matrix::from_rows({{0.1, 0.0}, {0.0, 0.3}}))}};
  const EquationSpec s = equation_spec_from_json(j);
  CHECK(s.kind == EquationKind::dare);
  const SolveReport rep = solve(s);
  CHECK(rep.residual <= 1e-10);
  const json out = solve_report_to_json(rep);
  CHECK(out.contains("K"));
  CHECK(out.contains("residual"));

  j.erase("R");
  try {
    equation_spec_from_json(j);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("R") != std::string::npos);
  }

  json badkind = {{"kind", "banana"}};
  CHECK_THROWS_AS(equation_spec_from_json(badkind), InputError);
}

TEST_CASE("lqr spec json") {
  const LqrSpec s = default_lqr_spec();
  const LqrSpec back = lqr_spec_from_json(lqr_spec_to_json(s));
  CHECK(back.A.data() == s.A.data());
  CHECK(back.R.data() == s.R.data());
}
