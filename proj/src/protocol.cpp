#include "qrf/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace qrf {
namespace {

constexpr double kE2 = std::numbers::e - 2.0;
constexpr double kPi = std::numbers::pi;

Vec3 difference(const Vec3& a, const Vec3& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

}  // namespace

double max_abs(const Vec3& v) {
  return std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
}

void BatteryLedger::add(Axis part, const Vec3& delta) {
  Vec3& p = parts[index(part)];
  for (int k = 0; k < 3; ++k) p[k] += delta[k];
}

PairLayout pair_layout(Axis axis) {
  const Axis b = next(axis);
  const Axis c = next(b);
  return PairLayout{b, c, c, b};
}

Vec3 spin_expectations(const SpinOperators& ops, const ComplexMatrix& rho) {
  return {expectation(ops.sx, rho), expectation(ops.sy, rho),
          expectation(ops.sz, rho)};
}

FramedAxisStep::FramedAxisStep(Spin s, Axis axis, double alpha, int n_iter,
                               std::vector<int> register_dims, int target)
    : s_(s),
      axis_(axis),
      layout_(pair_layout(axis)),
      register_dims_(register_dims.empty() ? std::vector<int>{s.dim()}
                                           : std::move(register_dims)),
      target_(target),
      ops_(spin_operators(s)) {
  const int parties = static_cast<int>(register_dims_.size());
  if (target_ < 0 || target_ >= parties || register_dims_[target_] != s.dim()) {
    throw InvalidInput("framed step: target party does not match spin");
  }
  const TauState ref1 = tau_state(s, layout_.ref1_polarization);
  const TauState ref2 = tau_state(s, layout_.ref2_polarization);
  pair_state_ = kron(ref1.state.matrix(), ref2.state.matrix());
  ref1_initial_ = spin_expectations(ops_, ref1.state.matrix());
  ref2_initial_ = spin_expectations(ops_, ref2.state.matrix());

  std::vector<int> dims = register_dims_;
  dims.push_back(s.dim());
  dims.push_back(s.dim());
  const int targets[] = {target_, parties, parties + 1};
  v_full_ = embed(build_V(s, alpha, n_iter).matrix, dims, targets);
}

StepResult FramedAxisStep::apply(const DensityMatrix& rho) const {
  if (rho.dim() != v_full_.rows() / pair_state_.rows()) {
    throw InvalidInput("framed step: state dimension mismatch");
  }
  const int parties = static_cast<int>(register_dims_.size());
  std::vector<int> dims = register_dims_;
  dims.push_back(s_.dim());
  dims.push_back(s_.dim());

  const ComplexMatrix joint = kron(rho.matrix(), pair_state_);
  const ComplexMatrix evolved = v_full_ * joint * v_full_.adjoint();

  std::vector<int> keep_register(parties);
  for (int p = 0; p < parties; ++p) keep_register[p] = p;
  const int keep_ref1[] = {parties};
  const int keep_ref2[] = {parties + 1};
  const int keep_target[] = {target_};

  ComplexMatrix reduced = hermitian_part(partial_trace(evolved, dims, keep_register));
  reduced /= reduced.trace();
  const ComplexMatrix ref1 = partial_trace(evolved, dims, keep_ref1);
  const ComplexMatrix ref2 = partial_trace(evolved, dims, keep_ref2);

  Vec3 before = spin_expectations(ops_, rho.matrix());
  Vec3 after = spin_expectations(ops_, reduced);
  if (parties > 1) {
    before = spin_expectations(ops_, partial_trace(rho.matrix(), register_dims_, keep_target));
    after = spin_expectations(ops_, partial_trace(reduced, register_dims_, keep_target));
  }

  return StepResult{DensityMatrix(std::move(reduced)),
                    difference(after, before),
                    difference(spin_expectations(ops_, ref1), ref1_initial_),
                    difference(spin_expectations(ops_, ref2), ref2_initial_),
                    layout_.part_ref1,
                    layout_.part_ref2};
}

StepResult axis_step(const DensityMatrix& rho, Axis axis, double alpha,
                     int n_iter, Spin s) {
  if (rho.dim() != s.dim()) throw InvalidInput("axis_step: dimension mismatch");
  return FramedAxisStep(s, axis, alpha, n_iter).apply(rho);
}

double step_error(const DensityMatrix& rho, Axis axis, double alpha,
                  int n_iter, Spin s) {
  const StepResult step = axis_step(rho, axis, alpha, n_iter, s);
  const ComplexMatrix u =
      expm_generator(spin_operators(s)[axis], alpha / n_iter);
  return trace_norm(step.rho_out.matrix() - u * rho.matrix() * u.adjoint());
}

FramedRotation::FramedRotation(Spin s, const Vec3& alpha, int n_iter,
                               std::vector<int> register_dims, int target)
    : n_iter_(n_iter) {
  if (n_iter < 1) throw InvalidInput("N must be positive");
  for (Axis a : kAxes) {
    if (alpha[index(a)] == 0.0) continue;
    steps_.emplace_back(s, a, alpha[index(a)], n_iter, register_dims, target);
  }
}

IterationResult FramedRotation::iterate(const DensityMatrix& rho) const {
  IterationResult out{rho, {}};
  out.steps.reserve(steps_.size());
  for (const FramedAxisStep& step : steps_) {
    out.steps.push_back(step.apply(out.rho));
    out.rho = out.steps.back().rho_out;
  }
  return out;
}

DensityMatrix FramedRotation::run(const DensityMatrix& rho,
                                  BatteryLedger& ledger) const {
  DensityMatrix state = rho;
  for (int it = 0; it < n_iter_; ++it) {
    for (const FramedAxisStep& step : steps_) {
      StepResult r = step.apply(state);
      ledger.add(r.part_ref1, r.delta_ref1);
      ledger.add(r.part_ref2, r.delta_ref2);
      state = std::move(r.rho_out);
    }
  }
  return state;
}

IterationResult general_step(const DensityMatrix& rho, const Vec3& alpha,
                             int n_iter, Spin s) {
  if (rho.dim() != s.dim()) throw InvalidInput("general_step: dimension mismatch");
  return FramedRotation(s, alpha, n_iter).iterate(rho);
}

std::map<std::string, double> BoundSet::named() const {
  return {{"step_channel", step_channel},
          {"step_delta", step_delta},
          {"total", total},
          {"separation_diag", separation_diag},
          {"separation_off", separation_off}};
}

BoundSet bounds(double alpha_max, double n_iter) {
  const double a = std::abs(alpha_max);
  const double ratio = a / n_iter;
  BoundSet b;
  b.step_channel = 40.0 * kE2 * ratio * ratio;
  b.step_delta = 18.0 * kE2 * ratio * ratio;
  b.total = (648.0 + 16.0 * kE2) * kPi * kPi / n_iter;
  b.separation_diag = 648.0 * kPi * kPi / n_iter;
  b.separation_off = 324.0 * kPi * kPi / n_iter;
  b.step_valid = n_iter >= 6.0 * a;
  b.sequence_valid = n_iter >= 36.0 * kPi && a <= kPi;
  return b;
}

BoundSet bounds(const Vec3& alpha, double n_iter) {
  return bounds(max_abs(alpha), n_iter);
}

void ProtocolConfig::validate() const {
  if (n_iter < 1) throw InvalidInput("N must be positive");
  if (max_abs(alpha) > kPi) throw InvalidInput("rotation angles must satisfy |alpha_k| <= pi");
  if (initial_state.dim() != s.dim()) {
    throw InvalidInput("initial state dimension does not match spin");
  }
}

Vec3 diagonal_separation(const ProtocolResult& r) {
  Vec3 out{};
  for (Axis j : kAxes) {
    out[index(j)] = std::abs(r.system_delta[index(j)] + r.ledger.at(j, j));
  }
  return out;
}

std::array<Vec3, 3> off_diagonal_separation(const ProtocolResult& r) {
  std::array<Vec3, 3> out{};
  for (Axis j : kAxes) {
    for (Axis k : kAxes) {
      if (j != k) out[index(j)][index(k)] = std::abs(r.ledger.at(k, j));
    }
  }
  return out;
}

std::map<std::string, bool> verify(const ProtocolResult& result, int n_iter) {
  const BoundSet b = bounds(0.0, n_iter);
  double off = 0.0;
  for (const Vec3& row : off_diagonal_separation(result)) off = std::max(off, max_abs(row));
  return {{"accuracy", result.error_trace_norm <= b.total},
          {"separation_diag", max_abs(diagonal_separation(result)) <= b.separation_diag},
          {"separation_off", off <= b.separation_off}};
}

ComplexMatrix rotation_unitary(Spin s, const Vec3& alpha) {
  const SpinOperators ops = spin_operators(s);
  const ComplexMatrix h = alpha[0] * ops.sx + alpha[1] * ops.sy + alpha[2] * ops.sz;
  return expm_generator(h, 1.0);
}

ProtocolResult run_protocol(const ProtocolConfig& config) {
  config.validate();
  const SpinOperators ops = spin_operators(config.s);
  BatteryLedger ledger;
  const FramedRotation rotation(config.s, config.alpha, config.n_iter);
  DensityMatrix final_state = rotation.run(config.initial_state, ledger);

  const ComplexMatrix& rho0 = config.initial_state.matrix();
  const ComplexMatrix u = rotation_unitary(config.s, config.alpha);
  const double error = trace_norm(final_state.matrix() - u * rho0 * u.adjoint());
  const Vec3 delta = difference(spin_expectations(ops, final_state.matrix()),
                                spin_expectations(ops, rho0));

  ProtocolResult result{std::move(final_state), ledger, delta, error,
                        bounds(config.alpha, config.n_iter), false, {}};
  result.bounds_applicable =
      config.s == Spin::half() && result.bound_values.sequence_valid;
  result.passes = verify(result, config.n_iter);
  return result;
}

Vec3 generator_from_unitary(const ComplexMatrix& u) {
  if (u.rows() != 2 || u.cols() != 2) {
    throw InvalidInput("generator_from_unitary: 2x2 unitary required");
  }
  if (max_abs(u * u.adjoint() - identity(2)) > kDecompTol) {
    throw InvalidInput("generator_from_unitary: matrix is not unitary");
  }
  // Strip the global phase: w = u / sqrt(det u) lies in SU(2), so
  // w = cos(t/2) I - i sin(t/2) n.sigma. Of the two square roots pick the one
  // with Re tr w >= 0, which puts t in [0, pi].
  ComplexMatrix w = u / std::sqrt(u.determinant());
  if (w.trace().real() < 0.0) w = -w;
  const double c = std::clamp(w.trace().real() / 2.0, -1.0, 1.0);
  const double t = 2.0 * std::acos(c);
  const double sin_half = std::sin(t / 2.0);
  if (sin_half < 1e-15) return {0.0, 0.0, 0.0};

  // n_k sin(t/2) = i tr(w sigma_k) / 2
  const SpinOperators ops = spin_operators(Spin::half());
  const Complex i{0.0, 1.0};
  Vec3 alpha{};
  for (Axis a : kAxes) {
    const Complex proj = i * (w * ops[a]).trace();
    alpha[index(a)] = t * proj.real() / sin_half;
  }
  return alpha;
}

DensityMatrix bloch_state(double theta, double phi) {
  Eigen::VectorXcd psi(2);
  psi << std::cos(theta / 2.0), std::polar(std::sin(theta / 2.0), phi);
  return DensityMatrix::pure(psi);
}

Eigen::VectorXcd random_pure_vector(int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXcd psi(dim);
  for (int k = 0; k < dim; ++k) psi(k) = Complex{normal(rng), normal(rng)};
  return psi / psi.norm();
}

DensityMatrix random_pure_state(int dim, std::uint64_t seed) {
  return DensityMatrix::pure(random_pure_vector(dim, seed));
}

}  // namespace qrf
