// End-to-end acceptance gate. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "qrf/extraction.hpp"
#include "qrf/general_basis.hpp"
#include "qrf/protocol.hpp"
#include "qrf/spin.hpp"

using namespace qrf;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Outcome conservation() {
  double worst = 0.0;
  for (int twice : {1, 2, 3})
    for (double alpha : {0.1, kPi})
      for (int n : {1, 100}) {
        const StepUnitary v = build_V(Spin::from_twice(twice), alpha, n);
        for (Axis k : kAxes) worst = std::max(worst, conservation_residual(v, k));
      }
  return {worst <= 1e-12, fmt("max residual %.3g (limit 1e-12)", worst)};
}

template <typename F>
void step_grid(F&& body) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const DensityMatrix rho = random_pure_state(2, seed);
    for (Axis a : kAxes)
      for (int n : {10, 100}) body(rho, a, 1.0, n);
  }
}

Outcome step_accuracy() {
  double worst_ratio = 0.0;
  bool ok = true;
  step_grid([&](const DensityMatrix& rho, Axis a, double alpha, int n) {
    const BoundSet b = bounds(alpha, n);
    if (!b.step_valid) {
      ok = false;
      return;
    }
    const double e = step_error(rho, a, alpha, n, Spin::half());
    worst_ratio = std::max(worst_ratio, e / b.step_channel);
    ok = ok && e <= b.step_channel;
  });
  return {ok, fmt("max error / 40(e-2)(a/N)^2 = %.3g over 120 steps", worst_ratio)};
}

Outcome step_deltas() {
  double worst_ratio = 0.0;
  bool ok = true;
  const SpinOperators ops = spin_operators(Spin::half());
  step_grid([&](const DensityMatrix& rho, Axis a, double alpha, int n) {
    const double eps = bounds(alpha, n).step_delta;
    const StepResult r = axis_step(rho, a, alpha, n, Spin::half());
    const Axis b = next(a), c = next(b);
    std::vector<double> devs{
        std::abs(r.delta_ref1[index(c)] + alpha / n * rho.expectation(ops[b])),
        std::abs(r.delta_ref2[index(b)] - alpha / n * rho.expectation(ops[c]))};
    for (Axis k : kAxes) {
      if (k != c) devs.push_back(std::abs(r.delta_ref1[index(k)]));
      if (k != b) devs.push_back(std::abs(r.delta_ref2[index(k)]));
    }
    for (double d : devs) {
      worst_ratio = std::max(worst_ratio, d / eps);
      ok = ok && d <= eps;
    }
  });
  return {ok, fmt("max deviation / 18(e-2)(a/N)^2 = %.3g", worst_ratio)};
}

struct GlobalRuns {
  std::vector<int> ns{128, 256, 512, 1024};
  // results[seed][n]
  std::vector<std::vector<ProtocolResult>> results;
  double seconds = 0.0;
};

GlobalRuns global_runs() {
  GlobalRuns g;
  const auto start = std::chrono::steady_clock::now();
  const Vec3 alpha{0.3, 0.7, -0.2};
  std::vector<std::vector<std::future<ProtocolResult>>> jobs(5);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (int n : g.ns) {
      jobs[seed - 1].push_back(std::async(std::launch::async, [=] {
        return run_protocol({Spin::half(), n, alpha, random_pure_state(2, seed)});
      }));
    }
  }
  for (auto& row : jobs) {
    g.results.emplace_back();
    for (auto& j : row) g.results.back().push_back(j.get());
  }
  g.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return g;
}

Outcome global_accuracy(const GlobalRuns& g) {
  bool ok = g.seconds < 30.0;
  std::vector<double> xs, ys;
  double worst_ratio = 0.0;
  for (const auto& row : g.results) {
    for (std::size_t k = 0; k < g.ns.size(); ++k) {
      const ProtocolResult& r = row[k];
      ok = ok && r.bounds_applicable && r.error_trace_norm <= r.bound_values.total;
      worst_ratio = std::max(worst_ratio, r.error_trace_norm / r.bound_values.total);
      xs.push_back(g.ns[k]);
      ys.push_back(r.error_trace_norm);
    }
  }
  const double slope = fit_slope(xs, ys);
  ok = ok && std::abs(slope + 1.0) <= 0.15;
  return {ok, fmt("slope %.4f (target -1 +/- 0.15), max error/bound %.3g, %.2f s", slope,
                  worst_ratio, g.seconds)};
}

Outcome separation(const GlobalRuns& g) {
  bool ok = true;
  double worst_diag = 0.0, worst_off = 0.0;
  double min_ratio = 1e9, max_ratio = 0.0;
  for (const auto& row : g.results) {
    for (std::size_t k = 0; k < g.ns.size(); ++k) {
      const ProtocolResult& r = row[k];
      const Vec3 diag = diagonal_separation(r);
      const auto off = off_diagonal_separation(r);
      worst_diag = std::max(worst_diag, max_abs(diag) / r.bound_values.separation_diag);
      for (const Vec3& v : off) worst_off = std::max(worst_off, max_abs(v) / r.bound_values.separation_off);
      ok = ok && r.passes.at("separation_diag") && r.passes.at("separation_off");
      if (k == 0) continue;
      const auto prev = off_diagonal_separation(row[k - 1]);
      for (int j = 0; j < 3; ++j)
        for (int p = 0; p < 3; ++p) {
          if (j == p) continue;
          const double ratio = prev[j][p] / off[j][p];
          min_ratio = std::min(min_ratio, ratio);
          max_ratio = std::max(max_ratio, ratio);
        }
    }
  }
  ok = ok && min_ratio >= 1.7 && max_ratio <= 2.3;
  return {ok, fmt("max diag/bound %.3g, max off/bound %.3g, off-diagonal doubling ratios "
                  "[%.3f, %.3f] (target 2 +/- 0.3)",
                  worst_diag, worst_off, min_ratio, max_ratio)};
}

struct ExtractionDeviations {
  double gain = 0, off_target = 0, marginal = 0, ancilla = 0;
};

ExtractionDeviations deviations(const DensityMatrix& rho, int n) {
  const ExtractionResult r = run_extraction(rho, n);
  ExtractionDeviations d;
  const ComplexMatrix mixed = identity(2) * 0.5;
  for (int p = 0; p < 3; ++p) {
    for (int k = 0; k < 3; ++k) {
      const double dev = std::abs(r.ledger.parts[p][k] - r.target_gains[p][k]);
      if (k == p) d.gain = std::max(d.gain, dev);
      else d.off_target = std::max(d.off_target, dev);
    }
  }
  d.marginal = trace_norm(r.system_marginal.matrix() - mixed);
  for (const DensityMatrix& a : r.ancilla_marginals)
    d.ancilla = std::max(d.ancilla, trace_norm(a.matrix() - mixed));
  return d;
}

Outcome extraction() {
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::future<ExtractionDeviations>> coarse, fine;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const DensityMatrix rho = random_pure_state(2, seed);
    coarse.push_back(std::async(std::launch::async, [rho] { return deviations(rho, 1024); }));
    fine.push_back(std::async(std::launch::async, [rho] { return deviations(rho, 2048); }));
  }
  bool ok = true;
  double worst = 0.0, min_shrink = 1e9;
  for (std::size_t s = 0; s < coarse.size(); ++s) {
    const ExtractionDeviations a = coarse[s].get();
    const ExtractionDeviations b = fine[s].get();
    for (double v : {a.gain, a.off_target, a.marginal}) {
      worst = std::max(worst, v);
      ok = ok && v <= 5e-2;
    }
    const std::pair<double, double> pairs[] = {
        {a.gain, b.gain}, {a.off_target, b.off_target}, {a.marginal, b.marginal}, {a.ancilla, b.ancilla}};
    for (const auto& [x, y] : pairs) {
      const double shrink = x / y;
      min_shrink = std::min(min_shrink, shrink);
      ok = ok && shrink >= 1.5;
    }
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ok = ok && seconds < 120.0;
  return {ok, fmt("max deviation at N=1024 %.3g (limit 5e-2), min shrink under doubling %.3f "
                  "(limit 1.5), %.1f s",
                  worst, min_shrink, seconds)};
}

Outcome basis_structure() {
  bool ok = true;
  const auto [report, table] = basis_report(pauli_string_basis(2));
  ok = ok && report.traceless && report.orthogonal && report.closed && report.pairs_checked == 105;

  const OperatorBasis one = pauli_string_basis(1);
  const double t_diff = max_abs(build_general_T(one) - build_T(Spin::half()));
  ok = ok && t_diff <= 1e-12;

  double step_diff = 0.0, delta_ratio = 0.0;
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    const DensityMatrix rho(oracle::random_density(2, rng));
    const int n = 10 + 10 * trial;
    const double alpha = 1.0;
    const GeneralStepResult g = general_basis_step(rho, one, 0, alpha, n);
    const StepResult s = axis_step(rho, Axis::x, alpha, n, Spin::half());
    step_diff = std::max(step_diff, max_abs(g.rho_out.matrix() - s.rho_out.matrix()));
    ok = ok && general_bounds_valid(one, alpha, n);
    for (int p = 1; p < 3; ++p) {
      const int q = carried_operator(p, 0, 3);
      for (int k = 0; k < 3; ++k) {
        const double dev =
            std::abs(g.delta[p][k] - first_order_delta(one, rho.matrix(), 0, q, k, alpha, n));
        delta_ratio = std::max(delta_ratio, dev / general_delta_bound(one, k, alpha, n));
      }
    }
  }
  ok = ok && step_diff <= 1e-12 && delta_ratio <= 1.0;
  return {ok, fmt("105 pairs: %d zero, %d proportional, %d violations; |T_gen - T| %.2g; "
                  "|general - x step| %.2g; max delta dev/bound %.3g",
                  report.zero_pairs, report.proportional_pairs, report.closure_violations, t_diff,
                  step_diff, delta_ratio)};
}

// Apply an 8x8 gate to qubits (a, b, c) of an n-qubit state, qubit 0 most
// significant.
void apply3(Eigen::VectorXcd& psi, int n, const ComplexMatrix& g, int a, int b, int c) {
  const long ba = 1L << (n - 1 - a), bb = 1L << (n - 1 - b), bc = 1L << (n - 1 - c);
  const long mask = ba | bb | bc;
  Complex in[8], out[8];
  long idx[8];
  for (long base = 0; base < psi.size(); ++base) {
    if (base & mask) continue;
    for (int k = 0; k < 8; ++k) {
      idx[k] = base | ((k & 4) ? ba : 0) | ((k & 2) ? bb : 0) | ((k & 1) ? bc : 0);
      in[k] = psi(idx[k]);
    }
    for (int r = 0; r < 8; ++r) {
      out[r] = 0.0;
      for (int k = 0; k < 8; ++k) out[r] += g(r, k) * in[k];
    }
    for (int k = 0; k < 8; ++k) psi(idx[k]) = out[k];
  }
}

Eigen::VectorXcd polarized(int axis) {
  Eigen::VectorXcd v(2);
  const double r = 1.0 / std::sqrt(2.0);
  if (axis == 0) v << r, r;
  if (axis == 1) v << r, Complex{0.0, r};
  if (axis == 2) v << 1.0, 0.0;
  return v;
}

Eigen::VectorXcd append_qubit(const Eigen::VectorXcd& psi, const Eigen::VectorXcd& q) {
  Eigen::VectorXcd out(psi.size() * 2);
  for (long k = 0; k < psi.size(); ++k) {
    out(2 * k) = psi(k) * q(0);
    out(2 * k + 1) = psi(k) * q(1);
  }
  return out;
}

Outcome oracle_equivalence() {
  const int n_iter = 2;
  const int qubits = 1 + 6 * n_iter;
  const Vec3 configs[] = {{0.3, 0.7, -0.2}, {kPi, -1.1, 0.4}, {-0.9, 2.5, -kPi}};
  double worst = 0.0;
  for (int cfg = 0; cfg < 3; ++cfg) {
    const Vec3 alpha = configs[cfg];
    const Eigen::VectorXcd sys = random_pure_vector(2, 500 + cfg);

    Eigen::VectorXcd psi = sys;
    for (int step = 0; step < 3 * n_iter; ++step) {
      const int a = step % 3;
      psi = append_qubit(psi, polarized((a + 1) % 3));
      psi = append_qubit(psi, polarized((a + 2) % 3));
    }
    if (psi.size() != (1L << qubits)) return {false, "bad register size"};
    for (int step = 0; step < 3 * n_iter; ++step) {
      const int a = step % 3;
      const ComplexMatrix v = oracle::expm(oracle::t_half(), 4.0 * alpha[a] / n_iter);
      apply3(psi, qubits, v, 0, 1 + 2 * step, 2 + 2 * step);
    }
    // Reduced system state: split the amplitudes by the system qubit.
    const long half = psi.size() / 2;
    const Eigen::VectorXcd up = psi.head(half), down = psi.tail(half);
    ComplexMatrix rho(2, 2);
    // Eigen's dot conjugates its left operand.
    rho << up.squaredNorm(), down.dot(up), up.dot(down), down.squaredNorm();

    const ProtocolResult r =
        run_protocol({Spin::half(), n_iter, alpha, DensityMatrix::pure(sys)});
    worst = std::max(worst, oracle::trace_norm(r.rho_final.matrix() - rho));
  }
  return {worst <= 1e-10, fmt("max trace-norm gap %.3g over 3 configs on %d qubits (limit 1e-10)",
                              worst, qubits)};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, double limit_s, const std::function<Outcome()>& f) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o = f();
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limit_s > 0 && s >= limit_s) {
      o.pass = false;
      o.detail += fmt(" [runtime %.2f s over %.0f s]", s, limit_s);
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %d %-22s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), s);
    std::fflush(stdout);
  };

  report(1, "conservation", 1.0, conservation);
  report(2, "step-accuracy", 1.0, step_accuracy);
  report(3, "step-battery-deltas", 1.0, step_deltas);
  const GlobalRuns runs = global_runs();
  report(4, "global-accuracy", 0.0, [&] { return global_accuracy(runs); });
  report(5, "separation", 0.0, [&] { return separation(runs); });
  report(6, "extraction", 120.0, extraction);
  report(7, "general-basis", 5.0, basis_structure);
  report(8, "oracle-equivalence", 60.0, oracle_equivalence);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
