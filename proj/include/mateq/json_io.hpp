#pragma once

#include <string>

#include <json.hpp>

#include "mateq/equations.hpp"
#include "mateq/gradcheck.hpp"
#include "mateq/inverse_lqr.hpp"
#include "mateq/matrix.hpp"

namespace mateq {

using nlohmann::json;

inline json matrix_to_json(const Matrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

inline Matrix matrix_from_json(const json& j, const std::string& name) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") ||
      !j.contains("data")) {
    throw InputError("matrix \"" + name +
                     "\" must be an object with rows, cols, data");
  }
  const std::size_t rows = j.at("rows").get<std::size_t>();
  const std::size_t cols = j.at("cols").get<std::size_t>();
  std::vector<double> data = j.at("data").get<std::vector<double>>();
  if (data.size() != rows * cols) {
    throw InputError("matrix \"" + name + "\": data length " +
                     std::to_string(data.size()) + " does not match " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
  Matrix m(rows, cols, std::move(data));
  if (!m.all_finite()) {
    throw InputError("matrix \"" + name + "\" contains non-finite entries");
  }
  return m;
}

inline EquationKind kind_from_string(const std::string& s) {
  if (s == "csylv") return EquationKind::csylv;
  if (s == "dsylv") return EquationKind::dsylv;
  if (s == "clyap") return EquationKind::clyap;
  if (s == "dlyap") return EquationKind::dlyap;
  if (s == "care") return EquationKind::care;
  if (s == "dare") return EquationKind::dare;
  throw InputError("unknown equation kind \"" + s + "\"");
}

inline Matrix require_matrix(const json& j, const std::string& name) {
  if (!j.contains(name)) throw InputError("missing field \"" + name + "\"");
  return matrix_from_json(j.at(name), name);
}

inline EquationSpec equation_spec_from_json(const json& j) {
  if (!j.contains("kind")) throw InputError("missing field \"kind\"");
  EquationSpec s;
  s.kind = kind_from_string(j.at("kind").get<std::string>());
  s.A = require_matrix(j, "A");
  switch (s.kind) {
    case EquationKind::csylv:
    case EquationKind::dsylv:
      s.B = require_matrix(j, "B");
      s.C_or_Q = require_matrix(j, "C");
      break;
    case EquationKind::clyap:
    case EquationKind::dlyap:
      s.C_or_Q = require_matrix(j, "Q");
      break;
    case EquationKind::care:
    case EquationKind::dare:
      s.B = require_matrix(j, "B");
      s.C_or_Q = require_matrix(j, "Q");
      s.R = require_matrix(j, "R");
      break;
  }
  s.validate();
  return s;
}

inline json solve_report_to_json(const SolveReport& r) {
  json j{{"kind", kind_name(r.spec.kind)},
         {"P", matrix_to_json(r.P)},
         {"residual", r.residual},
         {"iterations", r.iterations}};
  if (is_riccati(r.spec.kind)) {
    j["K"] = matrix_to_json(r.K);
    j["A_tilde"] = matrix_to_json(r.A_tilde);
    j["stability_warning"] = r.stability_warning;
  }
  return j;
}

inline json check_report_to_json(const CheckReport& r) {
  return json{{"max_rel_err", r.max_rel_err},
              {"per_input", r.per_input},
              {"passed", r.passed},
              {"tolerance", r.tolerance}};
}

inline LqrSpec lqr_spec_from_json(const json& j) {
  LqrSpec s;
  s.A = require_matrix(j, "A");
  s.B = require_matrix(j, "B");
  s.Q = require_matrix(j, "Q");
  s.R = require_matrix(j, "R");
  s.validate();
  return s;
}

inline json lqr_spec_to_json(const LqrSpec& s) {
  return json{{"A", matrix_to_json(s.A)},
              {"B", matrix_to_json(s.B)},
              {"Q", matrix_to_json(s.Q)},
              {"R", matrix_to_json(s.R)}};
}

}  // namespace mateq
