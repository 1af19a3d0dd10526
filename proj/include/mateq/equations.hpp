#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>

#include "mateq/errors.hpp"
#include "mateq/lu.hpp"
#include "mateq/matrix.hpp"

namespace mateq {

enum class EquationKind { csylv, dsylv, clyap, dlyap, care, dare };

inline const char* kind_name(EquationKind k) {
  switch (k) {
    case EquationKind::csylv: return "csylv";
    case EquationKind::dsylv: return "dsylv";
    case EquationKind::clyap: return "clyap";
    case EquationKind::dlyap: return "dlyap";
    case EquationKind::care:  return "care";
    case EquationKind::dare:  return "dare";
  }
  return "?";
}

inline bool is_riccati(EquationKind k) {
  return k == EquationKind::care || k == EquationKind::dare;
}
inline bool is_lyapunov(EquationKind k) {
  return k == EquationKind::clyap || k == EquationKind::dlyap;
}

/// One of the six matrix equations together with its coefficients.
///   csylv:  A P + P B + C = 0
///   dsylv:  A P B - P + C = 0
///   clyap:  A P + P A^T + Q = 0
///   dlyap:  A P A^T - P + Q = 0
///   care :  A^T P + P A - P B R^-1 B^T P + Q = 0
///   dare :  A^T P A - P - (A^T P B)(R + B^T P B)^-1 (A^T P B)^T + Q = 0
/// C_or_Q holds C for the Sylvester kinds and Q otherwise; B and R are
/// present only where the equation uses them.
struct EquationSpec {
  EquationKind kind = EquationKind::csylv;
  Matrix A;
  Matrix B;       // absent (empty) for Lyapunov kinds
  Matrix C_or_Q;
  Matrix R;       // Riccati kinds only

  void validate() const {
    const std::string k = kind_name(kind);
    if (!A.square()) {
      throw ShapeError(k + ": A must be square, got " + A.shape_str());
    }
    switch (kind) {
      case EquationKind::csylv:
      case EquationKind::dsylv: {
        if (B.rows() != A.rows() || !B.square()) {
          throw ShapeError(k + ": B must match A, got " + B.shape_str() +
                           " vs " + A.shape_str());
        }
        if (C_or_Q.rows() != A.rows() || !C_or_Q.square()) {
          throw ShapeError(k + ": C must match A, got " + C_or_Q.shape_str());
        }
        break;
      }
      case EquationKind::clyap:
      case EquationKind::dlyap: {
        if (C_or_Q.rows() != A.rows() || !C_or_Q.square()) {
          throw ShapeError(k + ": Q must match A, got " + C_or_Q.shape_str());
        }
        break;
      }
      case EquationKind::care:
      case EquationKind::dare: {
        if (B.rows() != A.rows()) {
          throw ShapeError(k + ": B rows must match A, got " + B.shape_str());
        }
        if (C_or_Q.rows() != A.rows() || !C_or_Q.square()) {
          throw ShapeError(k + ": Q must match A, got " + C_or_Q.shape_str());
        }
        if (R.rows() != B.cols() || !R.square()) {
          throw ShapeError(k + ": R must be " + std::to_string(B.cols()) +
                           "x" + std::to_string(B.cols()) + ", got " +
                           R.shape_str());
        }
        if (!is_symmetric(C_or_Q, 1e-12)) {
          throw InputError(k + ": Q must be symmetric to 1e-12");
        }
        if (!is_symmetric(R, 1e-12)) {
          throw InputError(k + ": R must be symmetric to 1e-12");
        }
        break;
      }
    }
  }
};

struct SolveOptions {
  double residual_tol = 1e-11;  // relative to the equation's scale
  double update_tol = 1e-12;    // relative iterate change (SDA)
  std::size_t max_iter = 100;
  std::size_t newton_refine = 3;
  bool stability_probe = true;
};

/// Solution with diagnostics. K and A_tilde are populated for Riccati
/// kinds only (K = gain, A_tilde = closed-loop matrix A - B K).
struct SolveReport {
  EquationSpec spec;
  Matrix P;
  double residual = 0.0;
  std::size_t iterations = 0;
  Matrix K;
  Matrix A_tilde;
  bool stability_warning = false;
};

namespace detail {

inline double residual_scale(const EquationSpec& s, const Matrix& p) {
  const double na = frobenius_norm(s.A);
  const double np = frobenius_norm(p);
  const double nc = frobenius_norm(s.C_or_Q);
  switch (s.kind) {
    case EquationKind::csylv:
      return std::max(1.0, na * np + np * frobenius_norm(s.B) + nc);
    case EquationKind::dsylv:
      return std::max(1.0, na * np * frobenius_norm(s.B) + np + nc);
    case EquationKind::clyap:
      return std::max(1.0, 2.0 * na * np + nc);
    case EquationKind::dlyap:
      return std::max(1.0, na * na * np + np + nc);
    case EquationKind::care:
    case EquationKind::dare: {
      const double nb = frobenius_norm(s.B);
      return std::max(1.0, na * na * np + 2.0 * na * np + np * np * nb * nb + np + nc);
    }
  }
  return 1.0;
}

inline Matrix equation_residual(const EquationSpec& s, const Matrix& p) {
  switch (s.kind) {
    case EquationKind::csylv:
      return s.A * p + p * s.B + s.C_or_Q;
    case EquationKind::dsylv:
      return s.A * p * s.B - p + s.C_or_Q;
    case EquationKind::clyap:
      return s.A * p + p * transpose(s.A) + s.C_or_Q;
    case EquationKind::dlyap:
      return s.A * p * transpose(s.A) - p + s.C_or_Q;
    case EquationKind::care: {
      const Matrix rb = lu_solve(s.R, transpose(s.B));  // R^-1 B^T
      return transpose(s.A) * p + p * s.A - p * s.B * rb * p + s.C_or_Q;
    }
    case EquationKind::dare: {
      const Matrix apb = transpose(s.A) * p * s.B;
      const Matrix inner = s.R + transpose(s.B) * p * s.B;
      return transpose(s.A) * p * s.A - p - apb * lu_solve(inner, transpose(apb)) +
             s.C_or_Q;
    }
  }
  return Matrix();
}

/// Assemble and solve the n^2-by-n^2 vectorized system for one of the four
/// linear equation kinds. This is the production path; desk-scale n keeps
/// the O(n^6) cost acceptable.
inline Matrix kron_linear_solve(const EquationSpec& s) {
  const std::size_t n = s.A.rows();
  const Matrix eye_n = Matrix::identity(n);
  Matrix op;
  switch (s.kind) {
    case EquationKind::csylv:
      op = kron(eye_n, s.A) + kron(transpose(s.B), eye_n);
      break;
    case EquationKind::dsylv:
      op = kron(transpose(s.B), s.A) - Matrix::identity(n * n);
      break;
    case EquationKind::clyap:
      op = kron(eye_n, s.A) + kron(s.A, eye_n);
      break;
    case EquationKind::dlyap:
      op = kron(s.A, s.A) - Matrix::identity(n * n);
      break;
    default:
      throw InputError("kron solve: not a linear equation kind");
  }
  const Matrix rhs = -1.0 * as_column(vec(s.C_or_Q));
  Matrix x;
  try {
    x = lu_solve(op, rhs);
  } catch (const SingularMatrixError& e) {
    throw NoUniqueSolutionError(std::string(kind_name(s.kind)) +
                                ": vectorized system singular, no unique "
                                "solution (" + e.what() + ")");
  }
  return unvec(as_vector(x), n, n);
}

}  // namespace detail

inline SolveReport solve_csylv(const Matrix& a, const Matrix& b, const Matrix& c,
                               const SolveOptions& opts = {}) {
  EquationSpec s{EquationKind::csylv, a, b, c, Matrix()};
  s.validate();
  SolveReport r;
  r.spec = s;
  r.P = detail::kron_linear_solve(s);
  r.residual = frobenius_norm(detail::equation_residual(s, r.P));
  r.iterations = 1;
  return r;
}

inline SolveReport solve_dsylv(const Matrix& a, const Matrix& b, const Matrix& c,
                               const SolveOptions& opts = {}) {
  EquationSpec s{EquationKind::dsylv, a, b, c, Matrix()};
  s.validate();
  SolveReport r;
  r.spec = s;
  r.P = detail::kron_linear_solve(s);
  r.residual = frobenius_norm(detail::equation_residual(s, r.P));
  r.iterations = 1;
  return r;
}

inline SolveReport solve_clyap(const Matrix& a, const Matrix& q,
                               const SolveOptions& opts = {}) {
  EquationSpec s{EquationKind::clyap, a, Matrix(), q, Matrix()};
  s.validate();
  SolveReport r;
  r.spec = s;
  r.P = detail::kron_linear_solve(s);
  if (is_symmetric(q, 1e-12)) r.P = symmetrize(r.P);
  r.residual = frobenius_norm(detail::equation_residual(s, r.P));
  r.iterations = 1;
  return r;
}

inline SolveReport solve_dlyap(const Matrix& a, const Matrix& q,
                               const SolveOptions& opts = {}) {
  EquationSpec s{EquationKind::dlyap, a, Matrix(), q, Matrix()};
  s.validate();
  SolveReport r;
  r.spec = s;
  r.P = detail::kron_linear_solve(s);
  if (is_symmetric(q, 1e-12)) r.P = symmetrize(r.P);
  r.residual = frobenius_norm(detail::equation_residual(s, r.P));
  r.iterations = 1;
  return r;
}

namespace detail {

struct SdaState {
  Matrix A, G, H;
};

/// One doubling step of the structure-preserving iteration.
/// Throws SingularMatrixError if I + G H is singular.
inline SdaState sda_step(const SdaState& s) {
  const std::size_t n = s.A.rows();
  const LuFactorization w(Matrix::identity(n) + s.G * s.H);
  const Matrix x = w.solve(s.A);  // (I + G H)^-1 A
  const Matrix y = w.solve(s.G);  // (I + G H)^-1 G
  SdaState next;
  next.A = s.A * x;
  next.G = symmetrize(s.G + s.A * y * transpose(s.A));
  next.H = symmetrize(s.H + transpose(s.A) * (s.H * x));
  return next;
}

/// Run the doubling iteration until the H iterate stalls or the defining
/// equation's residual is met.
inline std::pair<Matrix, std::size_t> sda_iterate(SdaState st,
                                                  const EquationSpec& spec,
                                                  const SolveOptions& opts) {
  double last_res = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= opts.max_iter; ++it) {
    SdaState next = sda_step(st);
    const double dh = frobenius_norm(next.H - st.H);
    st = std::move(next);
    if (dh <= opts.update_tol * std::max(1.0, frobenius_norm(st.H))) {
      return {st.H, it};
    }
    last_res = frobenius_norm(equation_residual(spec, st.H));
    if (last_res <= opts.residual_tol * residual_scale(spec, st.H)) {
      return {st.H, it};
    }
  }
  throw ConvergenceError(std::string(kind_name(spec.kind)) +
                             ": doubling iteration did not converge in " +
                             std::to_string(opts.max_iter) + " iterations",
                         last_res);
}

inline void riccati_check_r(const EquationSpec& s) {
  if (!is_positive_definite(symmetrize(s.R))) {
    throw DefinitenessError(std::string(kind_name(s.kind)) +
                            ": R is not positive-definite");
  }
}

}  // namespace detail

inline SolveReport solve_dare(const Matrix& a, const Matrix& b, const Matrix& q,
                              const Matrix& r, const SolveOptions& opts = {}) {
  EquationSpec s{EquationKind::dare, a, b, q, r};
  s.validate();
  detail::riccati_check_r(s);
  const std::size_t n = a.rows();

  detail::SdaState st;
  st.A = a;
  st.G = symmetrize(b * lu_solve(r, transpose(b)));  // B R^-1 B^T
  st.H = symmetrize(q);
  auto [p, iters] = detail::sda_iterate(st, s, opts);

  // Newton (Kleinman) polish: each step is a discrete Lyapunov solve on the
  // closed loop; keep a step only if it improves the residual.
  double res = frobenius_norm(detail::equation_residual(s, p));
  for (std::size_t k = 0; k < opts.newton_refine; ++k) {
    if (res <= 1e-12 * detail::residual_scale(s, p)) break;
    try {
      const Matrix btp = transpose(b) * p;
      const Matrix gain = lu_solve(r + btp * b, btp * a);
      const Matrix acl = a - b * gain;
      const Matrix rhs = symmetrize(q + transpose(gain) * r * gain);
      const Matrix p_new = solve_dlyap(transpose(acl), rhs).P;
      const double res_new = frobenius_norm(detail::equation_residual(s, p_new));
      if (!(res_new < res)) break;
      p = p_new;
      res = res_new;
      ++iters;
    } catch (const Error&) {
      break;
    }
  }

  SolveReport rep;
  rep.spec = s;
  rep.P = symmetrize(p);
  rep.residual = frobenius_norm(detail::equation_residual(s, rep.P));
  rep.iterations = iters;
  const Matrix btp = transpose(b) * rep.P;
  rep.K = lu_solve(r + btp * b, btp * a);
  rep.A_tilde = a - b * rep.K;
  if (opts.stability_probe) {
    try {
      const Matrix probe = solve_dlyap(rep.A_tilde, Matrix::identity(n)).P;
      rep.stability_warning = !is_positive_definite(symmetrize(probe));
    } catch (const Error&) {
      rep.stability_warning = true;
    }
  }
  return rep;
}

inline SolveReport solve_care(const Matrix& a, const Matrix& b, const Matrix& q,
                              const Matrix& r, const SolveOptions& opts = {}) {
  EquationSpec s{EquationKind::care, a, b, q, r};
  s.validate();
  detail::riccati_check_r(s);
  const std::size_t n = a.rows();
  const Matrix eye_n = Matrix::identity(n);
  const Matrix g = symmetrize(b * lu_solve(r, transpose(b)));  // B R^-1 B^T
  const Matrix h = symmetrize(q);

  // Cayley transform to a doubling-friendly form; gamma is retried (doubled)
  // if A - gamma I or the transformed pencil is singular.
  double gamma = 1.0 + frobenius_norm(a);
  Matrix p;
  std::size_t iters = 0;
  std::size_t attempt = 0;
  for (;; ++attempt) {
    try {
      const Matrix a_g = a - gamma * eye_n;
      const Matrix a_g_invt_h = lu_solve(transpose(a_g), h);  // A_g^-T H
      const LuFactorization w(a_g + g * a_g_invt_h);
      detail::SdaState st;
      st.A = eye_n + (2.0 * gamma) * w.solve(eye_n);
      st.G = symmetrize((2.0 * gamma) * w.solve(g * lu_solve(transpose(a_g), eye_n)));
      st.H = symmetrize((2.0 * gamma) * a_g_invt_h * w.solve(eye_n));
      auto [sol, its] = detail::sda_iterate(st, s, opts);
      p = std::move(sol);
      iters = its;
      break;
    } catch (const SingularMatrixError& e) {
      if (attempt >= 5) {
        throw NoUniqueSolutionError(
            "care: Cayley transform singular after gamma retries (" +
            std::string(e.what()) + ")");
      }
      gamma *= 2.0;
    }
  }

  double res = frobenius_norm(detail::equation_residual(s, p));
  for (std::size_t k = 0; k < opts.newton_refine; ++k) {
    if (res <= 1e-12 * detail::residual_scale(s, p)) break;
    try {
      const Matrix gain = lu_solve(r, transpose(b) * p);
      const Matrix acl = a - b * gain;
      const Matrix rhs = symmetrize(q + transpose(gain) * r * gain);
      const Matrix p_new = solve_clyap(transpose(acl), rhs).P;
      const double res_new = frobenius_norm(detail::equation_residual(s, p_new));
      if (!(res_new < res)) break;
      p = p_new;
      res = res_new;
      ++iters;
    } catch (const Error&) {
      break;
    }
  }

  SolveReport rep;
  rep.spec = s;
  rep.P = symmetrize(p);
  rep.residual = frobenius_norm(detail::equation_residual(s, rep.P));
  rep.iterations = iters;
  rep.K = lu_solve(r, transpose(b) * rep.P);
  rep.A_tilde = a - b * rep.K;
  if (opts.stability_probe) {
    try {
      const Matrix probe = solve_clyap(rep.A_tilde, Matrix::identity(n)).P;
      rep.stability_warning = !is_positive_definite(symmetrize(probe));
    } catch (const Error&) {
      rep.stability_warning = true;
    }
  }
  return rep;
}

inline SolveReport solve(const EquationSpec& s, const SolveOptions& opts = {}) {
  switch (s.kind) {
    case EquationKind::csylv: return solve_csylv(s.A, s.B, s.C_or_Q, opts);
    case EquationKind::dsylv: return solve_dsylv(s.A, s.B, s.C_or_Q, opts);
    case EquationKind::clyap: return solve_clyap(s.A, s.C_or_Q, opts);
    case EquationKind::dlyap: return solve_dlyap(s.A, s.C_or_Q, opts);
    case EquationKind::care:  return solve_care(s.A, s.B, s.C_or_Q, s.R, opts);
    case EquationKind::dare:  return solve_dare(s.A, s.B, s.C_or_Q, s.R, opts);
  }
  throw InputError("unknown equation kind");
}

/// Brute-force oracle for the four linear kinds: builds the n^2-by-n^2
/// system entry by entry (independently of the kron()-based production
/// assembly) and solves it directly.
inline Matrix kron_oracle_solve(const EquationSpec& s) {
  if (is_riccati(s.kind)) {
    throw InputError("kron_oracle_solve: linear equation kinds only");
  }
  s.validate();
  const std::size_t n = s.A.rows();
  if (n > 64) {
    throw InputError("kron_oracle_solve: dimension " + std::to_string(n) +
                     " exceeds the n <= 64 brute-force limit");
  }
  const Matrix& a = s.A;
  const Matrix b = is_lyapunov(s.kind) ? transpose(s.A) : s.B;
  const bool discrete =
      s.kind == EquationKind::dsylv || s.kind == EquationKind::dlyap;

  // Row (i + j*n) of the big system is the (i,j) entry of the equation,
  // with unknown vec(P) in column-stacking order.
  Matrix big(n * n, n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t row = i + j * n;
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) {
          const std::size_t col = k + l * n;
          double coeff = 0.0;
          if (discrete) {
            coeff = a(i, k) * b(l, j);            // (A P B)_{ij}
            if (k == i && l == j) coeff -= 1.0;   // -P
          } else {
            if (l == j) coeff += a(i, k);         // (A P)_{ij}
            if (k == i) coeff += b(l, j);         // (P B)_{ij}
          }
          big(row, col) = coeff;
        }
      }
    }
  }
  Vector rhs(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) rhs[i + j * n] = -s.C_or_Q(i, j);
  }
  Matrix x;
  try {
    x = lu_solve(big, as_column(rhs));
  } catch (const SingularMatrixError& e) {
    throw NoUniqueSolutionError(std::string(kind_name(s.kind)) +
                                ": oracle system singular (" + e.what() + ")");
  }
  return unvec(as_vector(x), n, n);
}

}  // namespace mateq
