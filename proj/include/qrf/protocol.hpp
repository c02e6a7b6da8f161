#pragma once

// Rotations of a spin implemented through a reference frame of polarized
// spins, with every change of angular momentum booked to one of three
// batteries.
//
// A rotation about axis a uses two fresh reference spins polarized along the
// two other axes, b = next(a) and c = next(b). To first order the first one
// only changes its c-component and the second one only its b-component, so
// they belong to the c- and b-battery respectively. One iteration applies x,
// y and z steps in that order; a full rotation exp(-iH) repeats the
// iteration N times with new reference spins every time. Since a reference
// pair never interacts again after its step, the system's evolution is the
// exact composition of the per-step channels.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qrf/linalg.hpp"
#include "qrf/spin.hpp"

namespace qrf {

using Vec3 = std::array<double, 3>;

double max_abs(const Vec3& v);

/// Accumulated expectation changes, parts[part][component].
struct BatteryLedger {
  std::array<Vec3, 3> parts{};

  void add(Axis part, const Vec3& delta);
  const Vec3& operator[](Axis part) const { return parts[index(part)]; }
  /// Change of `component` stored in battery `part`.
  double at(Axis part, Axis component) const {
    return parts[index(part)][index(component)];
  }
};

/// Polarizations and battery parts of the reference pair for one axis.
struct PairLayout {
  Axis ref1_polarization, ref2_polarization;
  Axis part_ref1, part_ref2;
};
PairLayout pair_layout(Axis axis);

struct StepResult {
  DensityMatrix rho_out;
  Vec3 delta_system{};  // change of the rotated party
  Vec3 delta_ref1{};
  Vec3 delta_ref2{};
  Axis part_ref1;
  Axis part_ref2;
};

/// One framed step: V_alpha on (target party) x ref1 x ref2, then discard the
/// pair. The register may hold several parties; only `target` is rotated.
class FramedAxisStep {
 public:
  FramedAxisStep(Spin s, Axis axis, double alpha, int n_iter,
                 std::vector<int> register_dims = {}, int target = 0);

  StepResult apply(const DensityMatrix& rho) const;

  Axis axis() const { return axis_; }
  const std::vector<int>& register_dims() const { return register_dims_; }

 private:
  Spin s_;
  Axis axis_;
  PairLayout layout_;
  std::vector<int> register_dims_;
  int target_;
  SpinOperators ops_;
  ComplexMatrix pair_state_;
  ComplexMatrix v_full_;
  Vec3 ref1_initial_{};
  Vec3 ref2_initial_{};
};

/// Single step on a lone spin.
StepResult axis_step(const DensityMatrix& rho, Axis axis, double alpha,
                     int n_iter, Spin s);

/// ||step output - U rho U^dagger||_1 with U = exp(-i (alpha/N) s_axis).
double step_error(const DensityMatrix& rho, Axis axis, double alpha,
                  int n_iter, Spin s);

struct IterationResult {
  DensityMatrix rho;
  std::vector<StepResult> steps;  // axes with alpha_k == 0 are skipped
};

/// N-iteration framed realization of exp(-i sum_k alpha_k s_k) on one party
/// of a register.
class FramedRotation {
 public:
  FramedRotation(Spin s, const Vec3& alpha, int n_iter,
                 std::vector<int> register_dims = {}, int target = 0);

  /// One x, y, z iteration.
  IterationResult iterate(const DensityMatrix& rho) const;

  /// All N iterations; reference deltas are added to `ledger`.
  DensityMatrix run(const DensityMatrix& rho, BatteryLedger& ledger) const;

  int n_iter() const { return n_iter_; }

 private:
  int n_iter_;
  std::vector<FramedAxisStep> steps_;
};

/// One x, y, z iteration on a lone spin.
IterationResult general_step(const DensityMatrix& rho, const Vec3& alpha,
                             int n_iter, Spin s);

/// Explicit constants for spin-1/2; `alpha_max` is max_k |alpha_k|.
struct BoundSet {
  double step_channel = 0;     // 40 (e-2) (alpha/N)^2
  double step_delta = 0;       // 18 (e-2) (alpha/N)^2
  double total = 0;            // (648 + 16(e-2)) pi^2 / N
  double separation_diag = 0;  // 648 pi^2 / N
  double separation_off = 0;   // 324 pi^2 / N
  bool step_valid = false;      // N >= 6 alpha
  bool sequence_valid = false;  // N >= 36 pi and alpha_max <= pi

  std::map<std::string, double> named() const;
};

BoundSet bounds(double alpha_max, double n_iter);
BoundSet bounds(const Vec3& alpha, double n_iter);

struct ProtocolConfig {
  Spin s;
  int n_iter;
  Vec3 alpha;
  DensityMatrix initial_state;

  /// Throws InvalidInput on N < 1, max |alpha_k| > pi or a state of the
  /// wrong dimension.
  void validate() const;
};

struct ProtocolResult {
  DensityMatrix rho_final;
  BatteryLedger ledger;
  Vec3 system_delta{};
  double error_trace_norm = 0;
  BoundSet bound_values;
  /// The explicit constants apply: spin-1/2 and sequence_valid.
  bool bounds_applicable = false;
  std::map<std::string, bool> passes;
};

/// |Delta s_j + Delta S_j^(j)|.
Vec3 diagonal_separation(const ProtocolResult& r);
/// |Delta S_j^(k)|, indexed [component j][part k]; zero on the diagonal.
std::array<Vec3, 3> off_diagonal_separation(const ProtocolResult& r);

/// "accuracy", "separation_diag" and "separation_off" against bounds at N.
std::map<std::string, bool> verify(const ProtocolResult& result, int n_iter);

ProtocolResult run_protocol(const ProtocolConfig& config);

/// exp(-i sum_k alpha_k s_k) for spin s.
ComplexMatrix rotation_unitary(Spin s, const Vec3& alpha);

/// alpha with exp(-i alpha . s) = U up to global phase, |alpha| <= pi.
/// Throws InvalidInput for a non-unitary or non-2x2 argument.
Vec3 generator_from_unitary(const ComplexMatrix& u);

// State preparation.

/// Spin-1/2 pure state with Bloch angles (theta, phi).
DensityMatrix bloch_state(double theta, double phi);

/// Haar-random unit vector, fully determined by the seed.
Eigen::VectorXcd random_pure_vector(int dim, std::uint64_t seed);
DensityMatrix random_pure_state(int dim, std::uint64_t seed);

/// Vector of spin expectations (<s_x>, <s_y>, <s_z>).
Vec3 spin_expectations(const SpinOperators& ops, const ComplexMatrix& rho);

}  // namespace qrf
