#pragma once

// Reference frames for a complete set of conserved quantities.
//
// A basis {O_0, ..., O_{K-1}} of traceless, mutually orthogonal Hermitian
// operators that is closed under commutation ([O_k, O_l] is zero or
// proportional to a single O_m) admits a frame of D = K - 1 particles, particle
// j prepared in (I + O_q / ||O_q||) / d for a distinct q. The coupling
//
//   T = sum f_{a a_1 ... a_D} O_a (x) O_{a_1} (x) ... (x) O_{a_D},
//
// with f the totally antisymmetric sign over K distinct indices, commutes with
// every extensive O_k^tot, and each frame particle picks up changes in at most
// one conserved quantity. For d = 2^n the Pauli strings with factors
// {I/2, sigma/2} form such a basis. Dense construction of T is limited to
// K = 3 (one qubit): K! terms on a d^K space.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qrf/linalg.hpp"

namespace qrf {

struct OperatorBasis {
  int d = 0;
  std::vector<ComplexMatrix> ops;  // K = d^2 - 1 entries
  /// Human-readable labels ("x", "zI", ...), same order as ops.
  std::vector<std::string> labels;

  int size() const { return static_cast<int>(ops.size()); }
};

/// Tensor products over n slots of {I/2, s_x, s_y, s_z}, all-identity
/// excluded, ordered by base-4 digits (I, x, y, z) with slot 0 most
/// significant. n = 1 gives (s_x, s_y, s_z). Throws ScopeError for n > 2.
OperatorBasis pauli_string_basis(int n);

/// Result of [O_k, O_l] relative to the basis.
struct StructureEntry {
  bool zero = true;
  int m = -1;             // index with [O_k, O_l] = coefficient * O_m
  Complex coefficient{};
  double residual = 0.0;  // Frobenius norm of the unexplained remainder
};

struct StructureTable {
  int size = 0;
  std::vector<StructureEntry> entries;  // row-major (k, l)

  const StructureEntry& at(int k, int l) const { return entries[k * size + l]; }
};

struct BasisReport {
  bool traceless = false;
  bool orthogonal = false;
  bool closed = false;
  double max_trace = 0.0;
  double max_overlap = 0.0;
  int pairs_checked = 0;        // unordered pairs k < l
  int zero_pairs = 0;
  int proportional_pairs = 0;
  int closure_violations = 0;
  /// Largest residual of the least-squares expansion of [O_k, O_l] over
  /// {O_m : m != k, l}; small whenever the basis is complete, closed or not.
  double expansion_residual = 0.0;
};

/// Checks the three basis properties and tabulates the commutators. Failures
/// are reported, never thrown. Rows of the closure check are computed in
/// parallel and merged in pair order.
std::pair<BasisReport, StructureTable> basis_report(const OperatorBasis& basis);

/// Sign of the permutation `indices` of (0, ..., K-1); 0 on a repeat.
/// Throws InvalidInput when indices.size() != k or an index is out of range.
int f_sign(std::span<const int> indices, int k);

/// eta_k = tr(O_k^2) / (d ||O_k||).
double eta(const OperatorBasis& basis, int k);

/// Frame particle j = 1..D carries O_{(j + target) mod K}.
int carried_operator(int particle, int target, int k_size);

/// Frame state (I + O_q / ||O_q||) / d for every particle j = 1..D.
std::vector<DensityMatrix> frame_states(const OperatorBasis& basis, int target);

/// Dense general T on K parties. Throws ScopeError for K > 3.
ComplexMatrix build_general_T(const OperatorBasis& basis);

/// sum over parties of O_k embedded at that party.
ComplexMatrix extensive_operator(const OperatorBasis& basis, int k, int parties);

struct GeneralStepResult {
  DensityMatrix rho_out;
  /// delta[particle][k]: change of <O_k>; particle 0 is the system.
  std::vector<std::vector<double>> delta;
};

/// exp(-i alpha T / (eta_1 ... eta_D N)) on system (x) frame, frame cycled so
/// that the first-order action is exp(-i (alpha/N) O_target).
/// Throws ScopeError unless the basis is dense-feasible (K <= 3).
GeneralStepResult general_basis_step(const DensityMatrix& rho,
                                     const OperatorBasis& basis, int target,
                                     double alpha, int n_iter);

/// i (alpha/N) tr(O_q rho) tr(O_k [O_target, O_q]) / tr(O_q^2) for the frame
/// particle carrying O_q: the first-order change of <O_k>.
double first_order_delta(const OperatorBasis& basis, const ComplexMatrix& rho,
                         int target, int q, int k, double alpha, int n_iter);

/// K! prod ||O|| / prod_{frame} eta, the constant in the general bounds.
double general_coupling_constant(const OperatorBasis& basis);

/// 4 (e-2) (1 + c^2) (alpha/N)^2 with c = general_coupling_constant.
double general_step_bound(const OperatorBasis& basis, double alpha, int n_iter);

/// ||O_k|| (2c)^2 (e-2) (alpha/N)^2.
double general_delta_bound(const OperatorBasis& basis, int k, double alpha,
                           int n_iter);

/// N > 2 c alpha, the validity condition of both bounds.
bool general_bounds_valid(const OperatorBasis& basis, double alpha, int n_iter);

/// Which single conserved quantity, if any, frame particle j accumulates.
struct ParticleClass {
  bool no_change = true;
  int observable = -1;
};

/// For the frame cycled towards `target`: NoChange where [O_target, O_q] = 0,
/// otherwise the m with [O_target, O_q] proportional to O_m. Keyed by frame
/// particle 1..D.
std::map<int, ParticleClass> separation_classifier(const StructureTable& table,
                                                   int target = 0);

}  // namespace qrf
