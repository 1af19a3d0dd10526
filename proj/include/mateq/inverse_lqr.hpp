#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <utility>
#include <vector>

#include "mateq/equations.hpp"
#include "mateq/gradcheck.hpp"
#include "mateq/lbfgs.hpp"
#include "mateq/lu.hpp"
#include "mateq/matrix.hpp"
#include "mateq/tape.hpp"

namespace mateq {

/// Discrete-time LQR problem data: x_{t+1} = A x_t + B u_t with stage cost
/// x^T Q x + u^T R u.
struct LqrSpec {
  Matrix A, B, Q, R;

  void validate() const {
    if (!A.square()) throw ShapeError("lqr: A must be square, got " + A.shape_str());
    if (B.rows() != A.rows()) throw ShapeError("lqr: B rows must match A");
    if (!is_symmetric(Q, 1e-12)) throw InputError("lqr: Q must be symmetric");
    if (!is_symmetric(R, 1e-12)) throw InputError("lqr: R must be symmetric");
    if (!is_positive_definite(symmetrize(R))) throw DefinitenessError("lqr: R must be positive-definite");
    if (!is_positive_semidefinite(symmetrize(Q))) throw DefinitenessError("lqr: Q must be positive semi-definite");
  }
};

/// Default benchmark system: planar kinematic chain with identity actuation.
inline LqrSpec default_lqr_spec() {
  LqrSpec s;
  s.A = Matrix::from_rows({{1.0, 1.0}, {0.0, 1.0}});
  s.B = Matrix::identity(2);
  s.Q = Matrix::from_rows({{1.0, 0.0}, {0.0, 0.0}});
  s.R = Matrix::from_rows({{0.1, 0.0}, {0.0, 0.3}});
  return s;
}

struct Gain {
  Matrix K, P;
  bool stable = true;
};

inline Gain lqr_gain(const LqrSpec& spec) {
  spec.validate();
  const SolveReport rep = solve_dare(spec.A, spec.B, spec.Q, spec.R);
  return Gain{rep.K, rep.P, !rep.stability_warning};
}

/// Closed-loop rollout: returns T states starting at x0 under x+ = Acl x.
inline std::vector<Vector> simulate(const Matrix& a_closed, const Vector& x0,
                                    std::size_t horizon) {
  if (a_closed.cols() != x0.len()) {
    throw ShapeError("simulate: state dim mismatch " + a_closed.shape_str());
  }
  std::vector<Vector> states;
  states.reserve(horizon);
  Matrix x = as_column(x0);
  for (std::size_t t = 0; t < horizon; ++t) {
    states.push_back(as_vector(x));
    if (t + 1 < horizon) x = a_closed * x;
  }
  return states;
}

struct TrajectorySet {
  std::size_t horizon = 0;
  std::vector<Vector> inits;
  std::vector<std::vector<Vector>> states;  // [trajectory][time]

  std::size_t trajectory_count() const { return inits.size(); }
};

/// Noiseless dataset: standard-normal initial states, rolled out under the
/// optimal gain for the true Q.
inline TrajectorySet generate_dataset(const LqrSpec& spec, std::size_t count,
                                      std::size_t horizon, std::uint64_t seed) {
  const Gain g = lqr_gain(spec);
  const Matrix acl = spec.A - spec.B * g.K;
  TrajectorySet data;
  data.horizon = horizon;
  Rng rng(seed);
  for (std::size_t k = 0; k < count; ++k) {
    Vector x0(spec.A.rows());
    for (std::size_t i = 0; i < x0.len(); ++i) x0[i] = rng.normal();
    data.inits.push_back(x0);
    data.states.push_back(simulate(acl, x0, horizon));
  }
  return data;
}

/// Mean squared state mismatch between the data and a re-simulation under
/// the gain induced by Qhat (direct evaluation, no tape).
inline double trajectory_loss(const Matrix& qhat, const TrajectorySet& data,
                              const LqrSpec& base) {
  LqrSpec s = base;
  s.Q = symmetrize(qhat);
  const SolveReport rep = solve_dare(s.A, s.B, s.Q, s.R);
  const Matrix acl = s.A - s.B * rep.K;
  double total = 0.0;
  std::size_t terms = 0;
  for (std::size_t k = 0; k < data.trajectory_count(); ++k) {
    Matrix x = as_column(data.inits[k]);
    for (std::size_t t = 0; t < data.horizon; ++t) {
      const Matrix ref = as_column(data.states[k][t]);
      const Matrix d = x - ref;
      total += fdot(d, d);
      ++terms;
      if (t + 1 < data.horizon) x = acl * x;
    }
  }
  return terms ? total / static_cast<double>(terms) : 0.0;
}

/// Loss and gradient w.r.t. the unconstrained parameter M (Qhat = M M^T),
/// evaluated on the tape so the gradient flows through the DARE solve and
/// the gain's linear solve.
inline std::pair<double, Matrix> trajectory_loss_grad(const Matrix& m,
                                                      const TrajectorySet& data,
                                                      const LqrSpec& base) {
  Tape tape;
  const Tape::Ref m_ref = tape.constant(m);
  const Tape::Ref q_ref = tape.mul(m_ref, tape.transpose(m_ref));
  const Tape::Ref a_ref = tape.constant(base.A);
  const Tape::Ref b_ref = tape.constant(base.B);
  const Tape::Ref r_ref = tape.constant(base.R);
  const Tape::Ref p_ref = tape.dare(a_ref, b_ref, q_ref, r_ref);

  // K = (R + B^T P B)^-1 B^T P A,  Acl = A - B K
  const Tape::Ref bt_ref = tape.transpose(b_ref);
  const Tape::Ref btp_ref = tape.mul(bt_ref, p_ref);
  const Tape::Ref inner_ref = tape.add(r_ref, tape.mul(btp_ref, b_ref));
  const Tape::Ref k_ref = tape.lu_solve(inner_ref, tape.mul(btp_ref, a_ref));
  const Tape::Ref acl_ref = tape.sub(a_ref, tape.mul(b_ref, k_ref));

  Tape::Ref total = tape.constant(Matrix(1, 1));
  std::size_t terms = 0;
  for (std::size_t k = 0; k < data.trajectory_count(); ++k) {
    Tape::Ref x = tape.constant(as_column(data.inits[k]));
    for (std::size_t t = 0; t < data.horizon; ++t) {
      const Tape::Ref ref = tape.constant(as_column(data.states[k][t]));
      total = tape.add(total, tape.sq_err(x, ref));
      ++terms;
      if (t + 1 < data.horizon) x = tape.mul(acl_ref, x);
    }
  }
  const Tape::Ref loss_ref =
      tape.scale(total, terms ? 1.0 / static_cast<double>(terms) : 1.0);
  const std::vector<Matrix> adj = tape.backward(loss_ref);
  return {tape.value(loss_ref)(0, 0), adj[m_ref]};
}

struct RecoveryResult {
  Matrix M;      // final parameter
  Matrix Qhat;   // M M^T
  double final_loss = 0.0;
  LbfgsStatus status = LbfgsStatus::max_iterations;
  std::vector<LbfgsIterate> trace;
};

/// Minimize the trajectory loss over M with L-BFGS, starting from m0.
inline RecoveryResult recover_q(const TrajectorySet& data, const LqrSpec& base,
                                const Matrix& m0, const LbfgsOptions& opts = {}) {
  const std::size_t n = m0.rows();
  auto unflatten = [n](const std::vector<double>& x) {
    return Matrix(n, n, x);
  };
  LbfgsObjective objective = [&](const std::vector<double>& x,
                                 std::vector<double>& grad) {
    auto [loss, g] = trajectory_loss_grad(unflatten(x), data, base);
    grad = g.data();
    return loss;
  };
  auto q_norm = [&](const std::vector<double>& x) {
    const Matrix m = unflatten(x);
    return frobenius_norm(m * transpose(m));
  };
  const LbfgsResult res = lbfgs_minimize(objective, m0.data(), opts, q_norm);
  RecoveryResult out;
  out.M = unflatten(res.x);
  out.Qhat = symmetrize(out.M * transpose(out.M));
  out.final_loss = res.loss;
  out.status = res.status;
  out.trace = res.trace;
  return out;
}

inline void write_trace_csv(std::ostream& os,
                            const std::vector<LbfgsIterate>& trace) {
  os << "iter,loss,q_norm,grad_norm,step\n";
  os.precision(17);
  for (const auto& row : trace) {
    os << row.iter << ',' << row.loss << ',' << row.aux_norm << ','
       << row.grad_norm << ',' << row.step << '\n';
  }
}

}  // namespace mateq
