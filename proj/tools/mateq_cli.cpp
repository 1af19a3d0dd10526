#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mateq/json_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitSolver = 2;

mateq::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mateq::InputError("cannot open \"" + path + "\"");
  mateq::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw mateq::InputError("invalid JSON in \"" + path + "\": " + e.what());
  }
  return j;
}

void emit(const mateq::json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(out_path);
    out << j.dump(2) << "\n";
  }
}

int run_solve(const std::string& spec_path, const std::string& out_path) {
  mateq::EquationSpec spec;
  try {
    spec = mateq::equation_spec_from_json(read_json_file(spec_path));
  } catch (const mateq::Error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  }
  try {
    emit(mateq::solve_report_to_json(mateq::solve(spec)), out_path);
  } catch (const mateq::Error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitOk;
}

int run_gradcheck(const std::string& kind_str, std::size_t n, std::size_t m,
                  std::size_t trials, std::uint64_t seed, double tol_dot,
                  double tol_fd, const std::string& out_path) {
  using namespace mateq;
  try {
    EquationKind kind = kind_from_string(kind_str);
    Rng rng = Rng::stream(seed, 0xC0FFEE);
    const EquationSpec spec = random_spec(kind, n, m, rng);
    const CheckReport dots = dot_test(spec, trials, seed, tol_dot);
    const CheckReport fwd = fd_forward_check(spec, trials, seed + 1, tol_fd);
    const CheckReport adj = fd_adjoint_check(spec, trials, seed + 2, tol_fd);
    json j{{"kind", kind_str},
           {"n", n},
           {"m", m},
           {"trials", trials},
           {"seed", seed},
           {"dot_test", check_report_to_json(dots)},
           {"forward_fd", check_report_to_json(fwd)},
           {"adjoint_fd", check_report_to_json(adj)},
           {"passed", dots.passed && fwd.passed && adj.passed}};
    emit(j, out_path);
    return (dots.passed && fwd.passed && adj.passed) ? kExitOk : kExitSolver;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const mateq::Error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
}

int run_inverse_lqr(const std::string& spec_path, std::size_t count,
                    std::size_t horizon, std::uint64_t seed,
                    std::size_t max_iters, double recovery_tol,
                    const std::string& trace_path, const std::string& q_path) {
  using namespace mateq;
  LqrSpec spec;
  try {
    spec = spec_path.empty() ? default_lqr_spec()
                             : lqr_spec_from_json(read_json_file(spec_path));
  } catch (const mateq::Error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  }
  try {
    const TrajectorySet data = generate_dataset(spec, count, horizon, seed);
    LbfgsOptions opts;
    opts.max_iters = max_iters;
    const RecoveryResult res =
        recover_q(data, spec, Matrix::identity(spec.A.rows()), opts);
    const double err = frobenius_norm(res.Qhat - spec.Q);

    if (!trace_path.empty()) {
      std::ofstream tr(trace_path);
      write_trace_csv(tr, res.trace);
    }
    json j{{"Q_hat", matrix_to_json(res.Qhat)},
           {"final_loss", res.final_loss},
           {"recovery_error", err},
           {"iterations", res.trace.empty() ? 0 : res.trace.back().iter},
           {"recovered", err <= recovery_tol}};
    emit(j, q_path);
    std::cout.precision(17);
    std::cout << "recovery_error " << err << "\n";
    return err <= recovery_tol ? kExitOk : kExitSolver;
  } catch (const mateq::Error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"matrix-equation solvers with exact derivatives"};
  app.require_subcommand(1);

  std::string spec_path, out_path, kind_str = "dare";
  std::size_t n = 3, m = 2, trials = 20, count = 30, horizon = 30,
              max_iters = 100;
  std::uint64_t seed = 0;
  double tol = 1e-8, fd_tol = 1e-6, recovery_tol = 5e-2;
  std::string trace_path, q_path;

  auto* solve_cmd = app.add_subcommand("solve", "solve one matrix equation");
  solve_cmd->add_option("--spec", spec_path, "EquationSpec JSON file")
      ->required();
  solve_cmd->add_option("--out", out_path, "output path (default stdout)");

  auto* grad_cmd =
      app.add_subcommand("gradcheck", "dot-product and finite-difference checks");
  grad_cmd->add_option("--kind", kind_str, "csylv|dsylv|clyap|dlyap|care|dare");
  grad_cmd->add_option("--n", n, "state dimension");
  grad_cmd->add_option("--m", m, "input dimension (Riccati kinds)");
  grad_cmd->add_option("--trials", trials, "random trials");
  grad_cmd->add_option("--seed", seed, "RNG seed");
  grad_cmd->add_option("--tol", tol, "dot-test tolerance");
  grad_cmd->add_option("--fd-tol", fd_tol, "finite-difference tolerance");
  grad_cmd->add_option("--out", out_path, "output path (default stdout)");

  auto* ilqr_cmd =
      app.add_subcommand("inverse-lqr", "recover the LQR state cost from trajectories");
  ilqr_cmd->add_option("--spec", spec_path, "LqrSpec JSON (default built-in system)");
  ilqr_cmd->add_option("--K", count, "number of trajectories");
  ilqr_cmd->add_option("--T", horizon, "time steps per trajectory");
  ilqr_cmd->add_option("--seed", seed, "dataset seed");
  ilqr_cmd->add_option("--max-iters", max_iters, "optimizer iteration cap");
  ilqr_cmd->add_option("--tol", recovery_tol, "recovery tolerance on ||Qhat - Q||_F");
  ilqr_cmd->add_option("--out-trace", trace_path, "optimization trace CSV path");
  ilqr_cmd->add_option("--out-q", q_path, "final Q JSON path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  if (solve_cmd->parsed()) return run_solve(spec_path, out_path);
  if (grad_cmd->parsed()) {
    return run_gradcheck(kind_str, n, m, trials, seed, tol, fd_tol, out_path);
  }
  return run_inverse_lqr(spec_path, count, horizon, seed, max_iters,
                         recovery_tol, trace_path, q_path);
}
