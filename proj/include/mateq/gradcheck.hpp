#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mateq/derivatives.hpp"
#include "mateq/equations.hpp"
#include "mateq/matrix.hpp"

namespace mateq {

/// Deterministic 64-bit generator (splitmix64) with Box-Muller normals.
/// Reproducible from the seed alone, independent of platform libc.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Stream derived from (seed, stream index), for per-trial independence.
  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    Rng mixer(seed + 0x9e3779b97f4a7c15ull * (index + 1));
    mixer.next_u64();
    return Rng(mixer.next_u64());
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in (0, 1].
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) / 9007199254740993.0;
  }

  /// Standard normal via Box-Muller.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& x : m.data()) x = rng.normal();
  return m;
}

inline Matrix random_symmetric(std::size_t n, Rng& rng) {
  return symmetrize(random_matrix(n, n, rng));
}

/// G G^T + eps I: symmetric positive-definite.
inline Matrix random_spd(std::size_t n, Rng& rng, double eps = 0.1) {
  const Matrix g = random_matrix(n, n, rng);
  return symmetrize(g * transpose(g) + eps * Matrix::identity(n));
}

/// Spectral-radius estimate by power iteration (no eigendecomposition).
inline double spectral_radius_estimate(const Matrix& a, Rng& rng,
                                       std::size_t iters = 50) {
  Matrix v = random_matrix(a.rows(), 1, rng);
  double rho = 0.0;
  for (std::size_t k = 0; k < iters; ++k) {
    const Matrix w = a * v;
    rho = frobenius_norm(w);
    if (rho == 0.0) return 0.0;
    v = (1.0 / rho) * w;
  }
  return rho;
}

/// A = M - (rho(M) + margin) I: eigenvalues have real part <= -margin.
inline Matrix random_hurwitz(std::size_t n, Rng& rng, double margin = 0.5) {
  const Matrix m = random_matrix(n, n, rng);
  const double rho = spectral_radius_estimate(m, rng);
  return m - (rho + margin) * Matrix::identity(n);
}

/// A = M / (rho(M) + margin): spectral radius < 1.
inline Matrix random_schur_stable(std::size_t n, Rng& rng, double margin = 0.5) {
  const Matrix m = random_matrix(n, n, rng);
  const double rho = spectral_radius_estimate(m, rng);
  return (1.0 / (rho + margin)) * m;
}

/// A random well-posed instance of the given kind (m is the input count,
/// Riccati kinds only).
inline EquationSpec random_spec(EquationKind kind, std::size_t n, std::size_t m,
                                Rng& rng) {
  EquationSpec s;
  s.kind = kind;
  switch (kind) {
    case EquationKind::csylv:
      // both Hurwitz-shifted so the spectra cannot sum to zero
      s.A = random_hurwitz(n, rng);
      s.B = random_hurwitz(n, rng);
      s.C_or_Q = random_matrix(n, n, rng);
      break;
    case EquationKind::dsylv:
      s.A = random_schur_stable(n, rng);
      s.B = random_schur_stable(n, rng);
      s.C_or_Q = random_matrix(n, n, rng);
      break;
    case EquationKind::clyap:
      s.A = random_hurwitz(n, rng);
      s.C_or_Q = random_symmetric(n, rng);
      break;
    case EquationKind::dlyap:
      s.A = random_schur_stable(n, rng);
      s.C_or_Q = random_symmetric(n, rng);
      break;
    case EquationKind::care:
      s.A = random_hurwitz(n, rng);
      s.B = random_matrix(n, m, rng);
      {
        const Matrix g = random_matrix(n, n, rng);
        s.C_or_Q = symmetrize(g * transpose(g));
      }
      s.R = random_spd(m, rng);
      break;
    case EquationKind::dare:
      s.A = random_schur_stable(n, rng);
      s.B = random_matrix(n, m, rng);
      {
        const Matrix g = random_matrix(n, n, rng);
        s.C_or_Q = symmetrize(g * transpose(g));
      }
      s.R = random_spd(m, rng);
      break;
  }
  return s;
}

/// Random forward seeds covering every input the kind uses; Q/R directions
/// are symmetric for Riccati kinds.
inline ForwardSeeds random_seeds(const EquationSpec& s, Rng& rng) {
  ForwardSeeds f;
  const std::size_t n = s.A.rows();
  f.A = random_matrix(n, n, rng);
  if (is_riccati(s.kind)) {
    f.B = random_matrix(s.B.rows(), s.B.cols(), rng);
    f.C = random_symmetric(n, rng);
    f.R = random_symmetric(s.R.rows(), rng);
  } else if (is_lyapunov(s.kind)) {
    f.C = random_symmetric(n, rng);
  } else {
    f.B = random_matrix(n, n, rng);
    f.C = random_matrix(n, n, rng);
  }
  return f;
}

struct CheckReport {
  double max_rel_err = 0.0;
  std::map<std::string, double> per_input;
  bool passed = true;
  double tolerance = 0.0;

  void note(const std::string& name, double rel) {
    auto it = per_input.find(name);
    if (it == per_input.end() || it->second < rel) per_input[name] = rel;
    if (rel > max_rel_err) max_rel_err = rel;
  }
  void finish(double tol) {
    tolerance = tol;
    passed = max_rel_err <= tol;
  }
};

namespace detail {

inline double rel_err(double got, double want) {
  const double denom = std::max({1e-300, std::abs(got), std::abs(want)});
  return std::abs(got - want) / denom;
}

inline double rel_err(const Matrix& got, const Matrix& want) {
  const double denom =
      std::max({1e-300, frobenius_norm(got), frobenius_norm(want)});
  return frobenius_norm(got - want) / denom;
}

inline Matrix perturbed_input(const Matrix& base, const Matrix& dir, double t,
                              bool sym) {
  const Matrix p = base + t * dir;
  return sym ? symmetrize(p) : p;
}

}  // namespace detail

/// Central finite difference of the primal solution along the given seed
/// direction: (P(theta + h dir) - P(theta - h dir)) / (2h), summed over the
/// present inputs, each with step h * 1e-5 * max(1, ||input||_F) when h <= 0.
/// For Riccati kinds, perturbed Q and R are symmetrized before solving.
inline Matrix fd_directional(const EquationSpec& spec, const ForwardSeeds& dir,
                             double h = 0.0) {
  const std::size_t n = spec.A.rows();
  Matrix total(n, n);
  const bool riccati = is_riccati(spec.kind);

  auto accumulate = [&](const Matrix& base, const Matrix& d, bool sym,
                        auto rebuild) {
    const double step =
        h > 0.0 ? h : 1e-5 * std::max(1.0, frobenius_norm(base));
    EquationSpec plus = spec;
    EquationSpec minus = spec;
    rebuild(plus, detail::perturbed_input(base, d, step, sym));
    rebuild(minus, detail::perturbed_input(base, d, -step, sym));
    Matrix p_plus, p_minus;
    try {
      p_plus = solve(plus).P;
      p_minus = solve(minus).P;
    } catch (const Error& e) {
      throw PerturbationError(
          "fd_directional: perturbed solve failed, try a smaller step (" +
          std::string(e.what()) + ")");
    }
    total = total + (1.0 / (2.0 * step)) * (p_plus - p_minus);
  };

  if (dir.A) {
    accumulate(spec.A, *dir.A, false,
               [](EquationSpec& s, Matrix m) { s.A = std::move(m); });
  }
  if (dir.B && !is_lyapunov(spec.kind)) {
    accumulate(spec.B, *dir.B, false,
               [](EquationSpec& s, Matrix m) { s.B = std::move(m); });
  }
  if (dir.C) {
    accumulate(spec.C_or_Q, *dir.C, riccati,
               [](EquationSpec& s, Matrix m) { s.C_or_Q = std::move(m); });
  }
  if (dir.R && riccati) {
    accumulate(spec.R, *dir.R, true,
               [](EquationSpec& s, Matrix m) { s.R = std::move(m); });
  }
  return total;
}

/// Adjoint-tangent consistency: <Pbar, Pdot> vs sum over inputs of
/// <Xbar, Xdot>, with random seeds per trial. The Riccati Pbar draw is
/// symmetric.
inline CheckReport dot_test(const EquationSpec& spec, std::size_t trials,
                            std::uint64_t seed, double tol = 1e-8) {
  CheckReport rep;
  const SolveReport primal = solve(spec);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = Rng::stream(seed, t);
    const ForwardSeeds seeds = random_seeds(spec, rng);
    Matrix pbar = random_matrix(primal.P.rows(), primal.P.cols(), rng);
    if (is_riccati(spec.kind)) pbar = symmetrize(pbar);

    const Matrix pdot = tangent(primal, seeds);
    const AdjointBundle adj = adjoint(primal, pbar);

    const double lhs = fdot(pbar, pdot);
    double rhs = fdot(adj.A, *seeds.A);
    if (adj.B && seeds.B) rhs += fdot(*adj.B, *seeds.B);
    rhs += fdot(adj.C, *seeds.C);
    if (adj.R && seeds.R) rhs += fdot(*adj.R, *seeds.R);

    rep.note("dot", detail::rel_err(lhs, rhs));
  }
  rep.finish(tol);
  return rep;
}

/// Forward mode vs central finite differences along random directions.
inline CheckReport fd_forward_check(const EquationSpec& spec,
                                    std::size_t trials, std::uint64_t seed,
                                    double tol = 1e-6) {
  CheckReport rep;
  const SolveReport primal = solve(spec);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = Rng::stream(seed, t);
    const ForwardSeeds seeds = random_seeds(spec, rng);
    const Matrix pdot = tangent(primal, seeds);
    const Matrix fd = fd_directional(spec, seeds);
    rep.note("tangent", detail::rel_err(pdot, fd));
  }
  rep.finish(tol);
  return rep;
}

/// Each adjoint against finite differences of the probe loss l(P) = <W, P>
/// with random symmetric W: <Xbar, D> must match <W, dP/ds> for a random
/// per-input direction D.
inline CheckReport fd_adjoint_check(const EquationSpec& spec,
                                    std::size_t trials, std::uint64_t seed,
                                    double tol = 1e-6) {
  CheckReport rep;
  const SolveReport primal = solve(spec);
  const std::size_t n = primal.P.rows();
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = Rng::stream(seed, t);
    const Matrix w = random_symmetric(n, rng);
    const AdjointBundle adj = adjoint(primal, w);
    const ForwardSeeds dirs = random_seeds(spec, rng);

    auto check_one = [&](const std::string& name, const Matrix& xbar,
                         const Matrix& d, auto make_dir) {
      ForwardSeeds only;
      make_dir(only, d);
      const Matrix pdot_fd = fd_directional(spec, only);
      rep.note(name, detail::rel_err(fdot(xbar, d), fdot(w, pdot_fd)));
    };

    check_one("A", adj.A, *dirs.A,
              [](ForwardSeeds& f, const Matrix& d) { f.A = d; });
    if (adj.B && dirs.B) {
      check_one("B", *adj.B, *dirs.B,
                [](ForwardSeeds& f, const Matrix& d) { f.B = d; });
    }
    check_one(is_riccati(spec.kind) || is_lyapunov(spec.kind) ? "Q" : "C",
              adj.C, *dirs.C,
              [](ForwardSeeds& f, const Matrix& d) { f.C = d; });
    if (adj.R && dirs.R) {
      check_one("R", *adj.R, *dirs.R,
                [](ForwardSeeds& f, const Matrix& d) { f.R = d; });
    }
  }
  rep.finish(tol);
  return rep;
}

}  // namespace mateq
