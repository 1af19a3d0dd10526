#pragma once

#include <cstddef>
#include <memory>
#include <utility>
#include <vector>

#include "mateq/derivatives.hpp"
#include "mateq/equations.hpp"
#include "mateq/lu.hpp"
#include "mateq/matrix.hpp"

namespace mateq {

/// Reverse-mode tape over a closed primitive set: matrix arithmetic,
/// transpose, linear solve, squared-error reduction, and the six equation
/// solvers. Primals are evaluated eagerly at record time; backward() sweeps
/// the nodes in reverse and accumulates adjoints by addition.
class Tape {
 public:
  using Ref = std::size_t;

  enum class Op {
    constant,
    add,
    sub,
    neg,
    scale,
    mul,
    transpose,
    lu_solve,
    sq_err,
    csylv,
    dsylv,
    clyap,
    dlyap,
    care,
    dare,
  };

  Ref constant(Matrix value) {
    return push(Op::constant, {}, std::move(value));
  }

  Ref add(Ref a, Ref b) { return push(Op::add, {a, b}, value(a) + value(b)); }
  Ref sub(Ref a, Ref b) { return push(Op::sub, {a, b}, value(a) - value(b)); }
  Ref neg(Ref a) { return push(Op::neg, {a}, -value(a)); }

  Ref scale(Ref a, double alpha) {
    Ref r = push(Op::scale, {a}, alpha * value(a));
    nodes_[r].alpha = alpha;
    return r;
  }

  Ref mul(Ref a, Ref b) { return push(Op::mul, {a, b}, value(a) * value(b)); }

  Ref transpose(Ref a) {
    return push(Op::transpose, {a}, mateq::transpose(value(a)));
  }

  /// X = A^-1 B via LU.
  Ref lu_solve(Ref a, Ref b) {
    return push(Op::lu_solve, {a, b}, mateq::lu_solve(value(a), value(b)));
  }

  /// Scalar (1x1) node holding sum((X - Y)^2) over all entries.
  Ref sq_err(Ref x, Ref y) {
    const Matrix d = value(x) - value(y);
    Matrix s(1, 1);
    s(0, 0) = fdot(d, d);
    return push(Op::sq_err, {x, y}, std::move(s));
  }

  Ref csylv(Ref a, Ref b, Ref c) {
    return push_solver(Op::csylv, {a, b, c},
                       solve_csylv(value(a), value(b), value(c)));
  }
  Ref dsylv(Ref a, Ref b, Ref c) {
    return push_solver(Op::dsylv, {a, b, c},
                       solve_dsylv(value(a), value(b), value(c)));
  }
  Ref clyap(Ref a, Ref q) {
    return push_solver(Op::clyap, {a, q}, solve_clyap(value(a), value(q)));
  }
  Ref dlyap(Ref a, Ref q) {
    return push_solver(Op::dlyap, {a, q}, solve_dlyap(value(a), value(q)));
  }
  Ref care(Ref a, Ref b, Ref q, Ref r) {
    return push_solver(Op::care, {a, b, q, r},
                       solve_care(value(a), value(b), value(q), value(r)));
  }
  Ref dare(Ref a, Ref b, Ref q, Ref r) {
    return push_solver(Op::dare, {a, b, q, r},
                       solve_dare(value(a), value(b), value(q), value(r)));
  }

  const Matrix& value(Ref r) const { return nodes_[r].value; }
  const SolveReport& report(Ref r) const { return *nodes_[r].report; }
  std::size_t size() const { return nodes_.size(); }

  /// Adjoint of every node w.r.t. the scalar output node. Nodes the output
  /// does not depend on get zero adjoints of the primal shape.
  std::vector<Matrix> backward(Ref output) const {
    if (value(output).rows() != 1 || value(output).cols() != 1) {
      throw InputError("backward: output node must be 1x1, got " +
                       value(output).shape_str());
    }
    std::vector<Matrix> adj(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      adj[i] = Matrix(nodes_[i].value.rows(), nodes_[i].value.cols());
    }
    adj[output](0, 0) = 1.0;

    for (std::size_t i = output + 1; i-- > 0;) {
      const Node& node = nodes_[i];
      const Matrix& ybar = adj[i];
      if (node.op == Op::constant) continue;
      if (frobenius_norm(ybar) == 0.0) continue;
      switch (node.op) {
        case Op::add:
          acc(adj, node.in[0], ybar);
          acc(adj, node.in[1], ybar);
          break;
        case Op::sub:
          acc(adj, node.in[0], ybar);
          acc(adj, node.in[1], -ybar);
          break;
        case Op::neg:
          acc(adj, node.in[0], -ybar);
          break;
        case Op::scale:
          acc(adj, node.in[0], node.alpha * ybar);
          break;
        case Op::mul:
          acc(adj, node.in[0], ybar * mateq::transpose(value(node.in[1])));
          acc(adj, node.in[1], mateq::transpose(value(node.in[0])) * ybar);
          break;
        case Op::transpose:
          acc(adj, node.in[0], mateq::transpose(ybar));
          break;
        case Op::lu_solve: {
          // X = A^-1 B:  Bbar = A^-T Xbar,  Abar = -Bbar X^T
          const Matrix bbar =
              mateq::lu_solve(mateq::transpose(value(node.in[0])), ybar);
          acc(adj, node.in[0], -(bbar * mateq::transpose(node.value)));
          acc(adj, node.in[1], bbar);
          break;
        }
        case Op::sq_err: {
          const Matrix d = value(node.in[0]) - value(node.in[1]);
          const Matrix g = (2.0 * ybar(0, 0)) * d;
          acc(adj, node.in[0], g);
          acc(adj, node.in[1], -g);
          break;
        }
        case Op::csylv:
        case Op::dsylv:
        case Op::clyap:
        case Op::dlyap:
        case Op::care:
        case Op::dare: {
          const AdjointBundle grads = adjoint(*node.report, ybar);
          if (is_lyapunov(node.report->spec.kind)) {
            acc(adj, node.in[0], grads.A);
            acc(adj, node.in[1], grads.C);
          } else if (is_riccati(node.report->spec.kind)) {
            acc(adj, node.in[0], grads.A);
            acc(adj, node.in[1], *grads.B);
            acc(adj, node.in[2], grads.C);
            acc(adj, node.in[3], *grads.R);
          } else {
            acc(adj, node.in[0], grads.A);
            acc(adj, node.in[1], *grads.B);
            acc(adj, node.in[2], grads.C);
          }
          break;
        }
        case Op::constant:
          break;
      }
    }
    return adj;
  }

 private:
  struct Node {
    Op op;
    std::vector<Ref> in;
    Matrix value;
    double alpha = 1.0;
    std::shared_ptr<SolveReport> report;  // solver nodes only
  };

  Ref push(Op op, std::vector<Ref> in, Matrix value) {
    nodes_.push_back(Node{op, std::move(in), std::move(value)});
    return nodes_.size() - 1;
  }

  Ref push_solver(Op op, std::vector<Ref> in, SolveReport rep) {
    Node node{op, std::move(in), rep.P};
    node.report = std::make_shared<SolveReport>(std::move(rep));
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
  }

  static void acc(std::vector<Matrix>& adj, Ref r, const Matrix& g) {
    adj[r] = adj[r] + g;
  }

  std::vector<Node> nodes_;
};

}  // namespace mateq
