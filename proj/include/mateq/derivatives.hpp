#pragma once

#include <optional>

#include "mateq/equations.hpp"
#include "mateq/matrix.hpp"

namespace mateq {

/// Forward-mode input tangents. An absent member is an exact zero of the
/// matching primal shape. C doubles as Q for the Lyapunov/Riccati kinds.
struct ForwardSeeds {
  std::optional<Matrix> A;
  std::optional<Matrix> B;
  std::optional<Matrix> C;
  std::optional<Matrix> R;
};

/// Reverse-mode input adjoints. Members are populated per equation kind
/// (B for Sylvester/Riccati, R for Riccati only).
struct AdjointBundle {
  Matrix A;
  std::optional<Matrix> B;
  Matrix C;  // C for Sylvester kinds, Q otherwise
  std::optional<Matrix> R;
};

namespace detail {

inline Matrix seed_or_zero(const std::optional<Matrix>& m, std::size_t rows,
                           std::size_t cols) {
  return m ? *m : Matrix(rows, cols);
}

inline void require_kind(const SolveReport& rep, EquationKind k,
                         const char* where) {
  if (rep.spec.kind != k) {
    throw InputError(std::string(where) + ": report is for " +
                     kind_name(rep.spec.kind) + ", expected " + kind_name(k));
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Continuous Sylvester: A P + P B + C = 0
// ---------------------------------------------------------------------------

/// Tangent solves A Pdot + Pdot B + (Adot P + P Bdot + Cdot) = 0.
inline Matrix tangent_csylv(const SolveReport& rep, const ForwardSeeds& s) {
  detail::require_kind(rep, EquationKind::csylv, "tangent_csylv");
  const auto& A = rep.spec.A;
  const auto& B = rep.spec.B;
  const auto& P = rep.P;
  const std::size_t n = A.rows();
  Matrix rhs(n, n);
  if (s.A) rhs = rhs + *s.A * P;
  if (s.B) rhs = rhs + P * *s.B;
  if (s.C) rhs = rhs + *s.C;
  return solve_csylv(A, B, rhs).P;
}

/// Multiplier S solves A^T S + S B^T + Pbar = 0; then
/// Abar = S P^T, Bbar = P^T S, Cbar = S.
inline AdjointBundle adjoint_csylv(const SolveReport& rep, const Matrix& pbar) {
  detail::require_kind(rep, EquationKind::csylv, "adjoint_csylv");
  const auto& P = rep.P;
  const Matrix S =
      solve_csylv(transpose(rep.spec.A), transpose(rep.spec.B), pbar).P;
  AdjointBundle out;
  out.A = S * transpose(P);
  out.B = transpose(P) * S;
  out.C = S;
  return out;
}

// ---------------------------------------------------------------------------
// Discrete Sylvester: A P B - P + C = 0
// ---------------------------------------------------------------------------

inline Matrix tangent_dsylv(const SolveReport& rep, const ForwardSeeds& s) {
  detail::require_kind(rep, EquationKind::dsylv, "tangent_dsylv");
  const auto& A = rep.spec.A;
  const auto& B = rep.spec.B;
  const auto& P = rep.P;
  const std::size_t n = A.rows();
  Matrix rhs(n, n);
  if (s.A) rhs = rhs + *s.A * P * B;
  if (s.B) rhs = rhs + A * P * *s.B;
  if (s.C) rhs = rhs + *s.C;
  return solve_dsylv(A, B, rhs).P;
}

/// S solves A^T S B^T - S + Pbar = 0; Abar = S B^T P^T,
/// Bbar = P^T A^T S, Cbar = S.
inline AdjointBundle adjoint_dsylv(const SolveReport& rep, const Matrix& pbar) {
  detail::require_kind(rep, EquationKind::dsylv, "adjoint_dsylv");
  const auto& A = rep.spec.A;
  const auto& B = rep.spec.B;
  const auto& P = rep.P;
  const Matrix S = solve_dsylv(transpose(A), transpose(B), pbar).P;
  AdjointBundle out;
  out.A = S * transpose(B) * transpose(P);
  out.B = transpose(P) * transpose(A) * S;
  out.C = S;
  return out;
}

// ---------------------------------------------------------------------------
// Continuous Lyapunov: A P + P A^T + Q = 0
// ---------------------------------------------------------------------------

inline Matrix tangent_clyap(const SolveReport& rep, const ForwardSeeds& s) {
  detail::require_kind(rep, EquationKind::clyap, "tangent_clyap");
  const auto& A = rep.spec.A;
  const auto& P = rep.P;
  const std::size_t n = A.rows();
  Matrix rhs(n, n);
  if (s.A) rhs = rhs + *s.A * P + P * transpose(*s.A);
  if (s.C) rhs = rhs + *s.C;
  return solve_clyap(A, rhs).P;
}

/// S solves A^T S + S A + Pbar = 0; Abar = S P^T + S^T P, Qbar = S.
inline AdjointBundle adjoint_clyap(const SolveReport& rep, const Matrix& pbar) {
  detail::require_kind(rep, EquationKind::clyap, "adjoint_clyap");
  const auto& P = rep.P;
  const Matrix S = solve_clyap(transpose(rep.spec.A), pbar).P;
  AdjointBundle out;
  out.A = S * transpose(P) + transpose(S) * P;
  out.C = S;
  return out;
}

// ---------------------------------------------------------------------------
// Discrete Lyapunov: A P A^T - P + Q = 0
// ---------------------------------------------------------------------------

inline Matrix tangent_dlyap(const SolveReport& rep, const ForwardSeeds& s) {
  detail::require_kind(rep, EquationKind::dlyap, "tangent_dlyap");
  const auto& A = rep.spec.A;
  const auto& P = rep.P;
  const std::size_t n = A.rows();
  Matrix rhs(n, n);
  if (s.A) rhs = rhs + *s.A * P * transpose(A) + A * P * transpose(*s.A);
  if (s.C) rhs = rhs + *s.C;
  return solve_dlyap(A, rhs).P;
}

/// S solves A^T S A - S + Pbar = 0; Abar = S A P^T + S^T A P, Qbar = S.
/// With symmetric Q and Pbar this collapses to Abar = 2 S A P.
inline AdjointBundle adjoint_dlyap(const SolveReport& rep, const Matrix& pbar) {
  detail::require_kind(rep, EquationKind::dlyap, "adjoint_dlyap");
  const auto& A = rep.spec.A;
  const auto& P = rep.P;
  const Matrix S = solve_dlyap(transpose(A), pbar).P;
  AdjointBundle out;
  out.A = S * A * transpose(P) + transpose(S) * A * P;
  out.C = S;
  return out;
}

// ---------------------------------------------------------------------------
// Continuous Riccati: A^T P + P A - P B R^-1 B^T P + Q = 0
// ---------------------------------------------------------------------------

/// Tangent solves Pdot Atil + Atil^T Pdot + (Zdot + Zdot^T + Qdot
/// + K^T Rdot K) = 0 with Zdot = P (Adot - Bdot K).
inline Matrix tangent_care(const SolveReport& rep, const ForwardSeeds& s) {
  detail::require_kind(rep, EquationKind::care, "tangent_care");
  const auto& P = rep.P;
  const auto& K = rep.K;
  const std::size_t n = P.rows();
  Matrix rhs(n, n);
  if (s.A || s.B) {
    Matrix dir = detail::seed_or_zero(s.A, n, n);
    if (s.B) dir = dir - *s.B * K;
    const Matrix z = P * dir;
    rhs = rhs + z + transpose(z);
  }
  if (s.C) rhs = rhs + *s.C;
  if (s.R) rhs = rhs + transpose(K) * *s.R * K;
  // Pdot Atil + Atil^T Pdot + rhs = 0  is  clyap with coefficient Atil^T
  return solve_clyap(transpose(rep.A_tilde), rhs).P;
}

/// Pbar is symmetrized on entry; S solves Atil S + S Atil^T + sym(Pbar) = 0.
/// Abar = 2 P S, Bbar = -2 P S K^T, Qbar = S, Rbar = K S K^T.
inline AdjointBundle adjoint_care(const SolveReport& rep, const Matrix& pbar) {
  detail::require_kind(rep, EquationKind::care, "adjoint_care");
  const auto& P = rep.P;
  const auto& K = rep.K;
  const Matrix S = solve_clyap(rep.A_tilde, symmetrize(pbar)).P;
  AdjointBundle out;
  out.A = 2.0 * P * S;
  out.B = -2.0 * (P * S * transpose(K));
  out.C = S;
  out.R = K * S * transpose(K);
  return out;
}

// ---------------------------------------------------------------------------
// Discrete Riccati: A^T P A - P - (A^T P B)(R + B^T P B)^-1 (A^T P B)^T + Q = 0
// ---------------------------------------------------------------------------

/// Tangent solves Atil^T Pdot Atil - Pdot + (Zdot + Zdot^T + Qdot
/// + K^T Rdot K) = 0 with Zdot = Atil^T P (Adot - Bdot K).
inline Matrix tangent_dare(const SolveReport& rep, const ForwardSeeds& s) {
  detail::require_kind(rep, EquationKind::dare, "tangent_dare");
  const auto& P = rep.P;
  const auto& K = rep.K;
  const std::size_t n = P.rows();
  Matrix rhs(n, n);
  if (s.A || s.B) {
    Matrix dir = detail::seed_or_zero(s.A, n, n);
    if (s.B) dir = dir - *s.B * K;
    const Matrix z = transpose(rep.A_tilde) * P * dir;
    rhs = rhs + z + transpose(z);
  }
  if (s.C) rhs = rhs + *s.C;
  if (s.R) rhs = rhs + transpose(K) * *s.R * K;
  // Atil^T Pdot Atil - Pdot + rhs = 0  is  dlyap with coefficient Atil^T
  return solve_dlyap(transpose(rep.A_tilde), rhs).P;
}

/// S solves Atil S Atil^T - S + sym(Pbar) = 0.
/// Abar = 2 P Atil S, Bbar = -2 P Atil S K^T, Qbar = S, Rbar = K S K^T.
inline AdjointBundle adjoint_dare(const SolveReport& rep, const Matrix& pbar) {
  detail::require_kind(rep, EquationKind::dare, "adjoint_dare");
  const auto& P = rep.P;
  const auto& K = rep.K;
  const Matrix S = solve_dlyap(rep.A_tilde, symmetrize(pbar)).P;
  AdjointBundle out;
  out.A = 2.0 * P * rep.A_tilde * S;
  out.B = -2.0 * (P * rep.A_tilde * S * transpose(K));
  out.C = S;
  out.R = K * S * transpose(K);
  return out;
}

// ---------------------------------------------------------------------------
// Kind dispatchers
// ---------------------------------------------------------------------------

inline Matrix tangent(const SolveReport& rep, const ForwardSeeds& s) {
  switch (rep.spec.kind) {
    case EquationKind::csylv: return tangent_csylv(rep, s);
    case EquationKind::dsylv: return tangent_dsylv(rep, s);
    case EquationKind::clyap: return tangent_clyap(rep, s);
    case EquationKind::dlyap: return tangent_dlyap(rep, s);
    case EquationKind::care:  return tangent_care(rep, s);
    case EquationKind::dare:  return tangent_dare(rep, s);
  }
  throw InputError("unknown equation kind");
}

inline AdjointBundle adjoint(const SolveReport& rep, const Matrix& pbar) {
  switch (rep.spec.kind) {
    case EquationKind::csylv: return adjoint_csylv(rep, pbar);
    case EquationKind::dsylv: return adjoint_dsylv(rep, pbar);
    case EquationKind::clyap: return adjoint_clyap(rep, pbar);
    case EquationKind::dlyap: return adjoint_dlyap(rep, pbar);
    case EquationKind::care:  return adjoint_care(rep, pbar);
    case EquationKind::dare:  return adjoint_dare(rep, pbar);
  }
  throw InputError("unknown equation kind");
}

}  // namespace mateq
