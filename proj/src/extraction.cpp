#include "qrf/extraction.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qrf {
namespace {

constexpr double kPi = std::numbers::pi;

struct RawGate {
  bool single;
  int a, b;
  ComplexMatrix u;  // 2x2 for single-qubit gates
  double theta;
};

ComplexMatrix rz(double angle) {
  return rotation_unitary(Spin::half(), {0.0, 0.0, angle});
}

ComplexMatrix hadamard() {
  ComplexMatrix h(2, 2);
  h << 1.0, 1.0, 1.0, -1.0;
  return h / std::sqrt(2.0);
}

// CZ(p, q) = (Rz(pi/2)_p Rz(-pi/2)_q) sqrt(SWAP) Rz(pi)_p sqrt(SWAP), up to a
// global phase; listed in time order.
void append_cz(std::vector<RawGate>& out, int p, int q) {
  out.push_back({false, p, q, {}, kPi / 2});
  out.push_back({true, p, -1, rz(kPi), 0.0});
  out.push_back({false, p, q, {}, kPi / 2});
  out.push_back({true, q, -1, rz(-kPi / 2), 0.0});
  out.push_back({true, p, -1, rz(kPi / 2), 0.0});
}

}  // namespace

ComplexMatrix exchange_unitary(double theta) {
  const SpinOperators ops = spin_operators(Spin::half());
  ComplexMatrix dot = ComplexMatrix::Zero(4, 4);
  for (Axis a : kAxes) dot += kron(ops[a], ops[a]);
  return expm_generator(dot, theta);
}

ComplexMatrix gate_matrix(const Gate& gate, int parties) {
  const std::vector<int> dims(parties, 2);
  if (const auto* r = std::get_if<SingleRotation>(&gate)) {
    const int t[] = {r->target};
    return embed(rotation_unitary(Spin::half(), r->alpha), dims, t);
  }
  const auto& e = std::get<ExchangeGate>(gate);
  const int t[] = {e.targets[0], e.targets[1]};
  return embed(exchange_unitary(e.theta), dims, t);
}

ComplexMatrix GateSequence::compose() const {
  const int dim = 1 << parties;
  ComplexMatrix m = identity(dim);
  for (const Gate& g : gates) m = gate_matrix(g, parties) * m;
  return m;
}

ComplexMatrix decoherence_unitary() {
  const ComplexMatrix x = 2.0 * spin_operators(Spin::half()).sx;
  const ComplexMatrix z = 2.0 * spin_operators(Spin::half()).sz;
  ComplexMatrix u = ComplexMatrix::Zero(8, 8);
  for (int n = 0; n < 2; ++n) {
    for (int m = 0; m < 2; ++m) {
      ComplexMatrix pn = ComplexMatrix::Zero(2, 2);
      ComplexMatrix pm = ComplexMatrix::Zero(2, 2);
      pn(n, n) = 1.0;
      pm(m, m) = 1.0;
      const ComplexMatrix xn = n ? x : identity(2);
      const ComplexMatrix zm = m ? z : identity(2);
      u += kron(kron(xn * zm, pn), pm);
    }
  }
  return u;
}

double phase_aligned_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  const Complex overlap = (a.adjoint() * b).trace();
  const Complex phase =
      std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex{1.0, 0.0};
  return max_abs(b * std::conj(phase) - a);
}

GateSequence compile_decoherence() {
  // U = CX(anc1 -> sys) CZ(anc2, sys), CX = H CZ H on the system.
  std::vector<RawGate> raw;
  append_cz(raw, 0, 2);
  raw.push_back({true, 0, -1, hadamard(), 0.0});
  append_cz(raw, 0, 1);
  raw.push_back({true, 0, -1, hadamard(), 0.0});

  // Fuse back-to-back rotations of the same qubit.
  std::vector<RawGate> fused;
  for (RawGate& g : raw) {
    if (g.single && !fused.empty() && fused.back().single && fused.back().a == g.a) {
      fused.back().u = g.u * fused.back().u;
    } else {
      fused.push_back(std::move(g));
    }
  }

  GateSequence seq;
  seq.parties = 3;
  for (const RawGate& g : fused) {
    if (g.single) {
      seq.gates.emplace_back(SingleRotation{g.a, generator_from_unitary(g.u)});
    } else {
      seq.gates.emplace_back(ExchangeGate{{g.a, g.b}, g.theta});
    }
  }
  if (phase_aligned_distance(decoherence_unitary(), seq.compose()) > kDecompTol) {
    throw std::runtime_error("compilation invalid");
  }
  return seq;
}

ExtractionResult run_extraction(const DensityMatrix& rho_s, int n_iter,
                                const ExtractionOptions& options) {
  if (rho_s.dim() != 2) throw InvalidInput("run_extraction: qubit state required");
  if (n_iter < 1) throw InvalidInput("N must be positive");

  const std::vector<int> dims{2, 2, 2};
  const ComplexMatrix mixed = identity(2) * 0.5;
  const DensityMatrix initial(kron(kron(rho_s.matrix(), mixed), mixed));
  const GateSequence seq = compile_decoherence();

  BatteryLedger references;
  DensityMatrix state = initial;
  for (const Gate& g : seq.gates) {
    if (const auto* r = std::get_if<SingleRotation>(&g)) {
      state = FramedRotation(Spin::half(), r->alpha, n_iter, dims, r->target)
                  .run(state, references);
    } else {
      const ComplexMatrix u = gate_matrix(g, 3);
      state = DensityMatrix(hermitian_part(u * state.matrix() * u.adjoint()));
    }
  }

  const SpinOperators ops = spin_operators(Spin::half());
  auto marginal = [&](const ComplexMatrix& m, int party) {
    const int keep[] = {party};
    return partial_trace(m, dims, keep);
  };
  auto party_spin = [&](const ComplexMatrix& m, int party) {
    return spin_expectations(ops, marginal(m, party));
  };

  Vec3 register_delta{};
  BatteryLedger ledger = references;
  for (int p = 0; p < 3; ++p) {
    const Vec3 before = party_spin(initial.matrix(), p);
    const Vec3 after = party_spin(state.matrix(), p);
    Vec3 delta{};
    for (int k = 0; k < 3; ++k) {
      delta[k] = after[k] - before[k];
      register_delta[k] += delta[k];
    }
    if (p > 0) ledger.add(options.ancilla_part, delta);
  }

  const Vec3 input = spin_expectations(ops, rho_s.matrix());
  std::array<Vec3, 3> targets{};
  for (int k = 0; k < 3; ++k) targets[k][k] = input[k];

  DensityMatrix system(hermitian_part(marginal(state.matrix(), 0)));
  DensityMatrix anc1(hermitian_part(marginal(state.matrix(), 1)));
  DensityMatrix anc2(hermitian_part(marginal(state.matrix(), 2)));
  return ExtractionResult{std::move(state),
                          std::move(system),
                          {std::move(anc1), std::move(anc2)},
                          references,
                          ledger,
                          register_delta,
                          targets};
}

}  // namespace qrf
