#pragma once

// Extraction of the three spin components of an unknown qubit into three
// separate batteries.
//
// The qubit is joined by two maximally mixed ancillas and the controlled
// Pauli unitary U = sum_{n,m} X^n Z^m (x) |n><n| (x) |m><m| is applied. U
// leaves the qubit maximally mixed and the ancillas untouched on average, so
// the qubit's initial spin ends up in the reference frame. U is compiled into
// single-qubit rotations, each run through the framed protocol, and
// rotation-invariant exchange gates exp(-i theta s.s'), which need no frame.

#include <array>
#include <variant>
#include <vector>

#include "qrf/linalg.hpp"
#include "qrf/protocol.hpp"

namespace qrf {

struct SingleRotation {
  int target;
  Vec3 alpha;  // exp(-i alpha . s)
};

struct ExchangeGate {
  std::array<int, 2> targets;
  double theta;  // exp(-i theta s^(a) . s^(b))
};

using Gate = std::variant<SingleRotation, ExchangeGate>;

struct GateSequence {
  int parties = 3;
  std::vector<Gate> gates;  // time order

  /// Product of all gate matrices on the qubit register.
  ComplexMatrix compose() const;
};

/// Matrix of a single gate on a register of `parties` qubits.
ComplexMatrix gate_matrix(const Gate& gate, int parties);

/// exp(-i theta s . s') on two qubits; theta = pi/2 is sqrt(SWAP) up to phase.
ComplexMatrix exchange_unitary(double theta);

/// sum_{n,m} X^n Z^m (x) |n><n| (x) |m><m| with the system as party 0.
ComplexMatrix decoherence_unitary();

/// max |e^{-i phi} b - a| with phi the phase of tr(a^dagger b).
double phase_aligned_distance(const ComplexMatrix& a, const ComplexMatrix& b);

/// Self-checked compilation of decoherence_unitary(); throws
/// std::runtime_error("compilation invalid") if the composed sequence does not
/// reproduce it within kDecompTol.
GateSequence compile_decoherence();

struct ExtractionOptions {
  /// Battery that books the ancillas' own spin changes.
  Axis ancilla_part = Axis::z;
};

struct ExtractionResult {
  DensityMatrix rho_final;       // system (x) ancilla 1 (x) ancilla 2
  DensityMatrix system_marginal;
  std::array<DensityMatrix, 2> ancilla_marginals;
  /// Reference-spin changes only.
  BatteryLedger reference_ledger;
  /// Reference changes plus the ancillas' changes in ancilla_part.
  BatteryLedger ledger;
  /// Change of the register's total spin.
  Vec3 register_delta{};
  /// Per part: the input's <s_part> in the part's own slot.
  std::array<Vec3, 3> target_gains{};
};

/// Runs the compiled circuit on rho_s (x) I/2 (x) I/2, every single-qubit
/// rotation through its own N-iteration framed protocol.
ExtractionResult run_extraction(const DensityMatrix& rho_s, int n_iter,
                                const ExtractionOptions& options = {});

}  // namespace qrf
