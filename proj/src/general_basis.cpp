#include "qrf/general_basis.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <numeric>

#include "qrf/spin.hpp"

namespace qrf {
namespace {

constexpr double kE2 = std::numbers::e - 2.0;

double frobenius(const ComplexMatrix& m) { return m.norm(); }

Complex inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a.adjoint() * b).trace();
}

std::vector<StructureEntry> closure_row(const OperatorBasis& basis, int k,
                                        double* expansion_residual) {
  const int size = basis.size();
  std::vector<StructureEntry> row(size);
  *expansion_residual = 0.0;
  for (int l = 0; l < size; ++l) {
    if (l == k) continue;
    const ComplexMatrix c = commutator(basis.ops[k], basis.ops[l]);
    if (frobenius(c) <= kExactTol) continue;

    StructureEntry& e = row[l];
    e.zero = false;
    ComplexMatrix remainder = c;
    double best = -1.0;
    for (int m = 0; m < size; ++m) {
      const Complex coef = inner(basis.ops[m], c) / inner(basis.ops[m], basis.ops[m]);
      if (m != k && m != l) remainder -= coef * basis.ops[m];
      const double weight = std::abs(coef) * frobenius(basis.ops[m]);
      if (weight > best) {
        best = weight;
        e.m = m;
        e.coefficient = coef;
      }
    }
    e.residual = frobenius(c - e.coefficient * basis.ops[e.m]);
    *expansion_residual = std::max(*expansion_residual, frobenius(remainder));
  }
  return row;
}

void require_dense_feasible(const OperatorBasis& basis) {
  if (basis.size() > 3) {
    throw ScopeError("combinatorial blowup — out of scope");
  }
  if (basis.size() < 2) throw InvalidInput("basis needs at least two operators");
}

}  // namespace

OperatorBasis pauli_string_basis(int n) {
  if (n < 1) throw InvalidInput("pauli_string_basis: n must be positive");
  if (n > 2) throw ScopeError("dense basis beyond scope");

  const SpinOperators s = spin_operators(Spin::half());
  const ComplexMatrix factors[] = {identity(2) * 0.5, s.sx, s.sy, s.sz};
  const char names[] = {'I', 'x', 'y', 'z'};

  OperatorBasis basis;
  basis.d = 1 << n;
  const int count = 1 << (2 * n);
  for (int code = 1; code < count; ++code) {
    ComplexMatrix op = identity(1);
    std::string label;
    for (int slot = n - 1; slot >= 0; --slot) {
      const int digit = (code >> (2 * slot)) & 3;
      op = kron(op, factors[digit]);
      label += names[digit];
    }
    basis.ops.push_back(std::move(op));
    basis.labels.push_back(std::move(label));
  }
  return basis;
}

std::pair<BasisReport, StructureTable> basis_report(const OperatorBasis& basis) {
  const int size = basis.size();
  BasisReport report;
  for (const ComplexMatrix& op : basis.ops) {
    report.max_trace = std::max(report.max_trace, std::abs(op.trace()));
  }
  for (int k = 0; k < size; ++k) {
    for (int l = k + 1; l < size; ++l) {
      report.max_overlap = std::max(
          report.max_overlap, std::abs((basis.ops[k] * basis.ops[l]).trace()));
    }
  }
  report.traceless = report.max_trace <= kExactTol;
  report.orthogonal = report.max_overlap <= kExactTol;

  std::vector<std::future<std::pair<std::vector<StructureEntry>, double>>> rows;
  rows.reserve(size);
  for (int k = 0; k < size; ++k) {
    rows.push_back(std::async(std::launch::async, [&basis, k] {
      double residual = 0.0;
      auto row = closure_row(basis, k, &residual);
      return std::make_pair(std::move(row), residual);
    }));
  }

  StructureTable table;
  table.size = size;
  table.entries.reserve(static_cast<std::size_t>(size) * size);
  for (auto& f : rows) {
    auto [row, residual] = f.get();
    report.expansion_residual = std::max(report.expansion_residual, residual);
    table.entries.insert(table.entries.end(), row.begin(), row.end());
  }

  for (int k = 0; k < size; ++k) {
    for (int l = k + 1; l < size; ++l) {
      ++report.pairs_checked;
      const StructureEntry& e = table.at(k, l);
      if (e.zero) {
        ++report.zero_pairs;
      } else if (e.residual <= kDecompTol && e.m != k && e.m != l) {
        ++report.proportional_pairs;
      } else {
        ++report.closure_violations;
      }
    }
  }
  report.closed = report.closure_violations == 0;
  return {report, table};
}

int f_sign(std::span<const int> indices, int k) {
  if (static_cast<int>(indices.size()) != k) {
    throw InvalidInput("f_sign: tuple length must equal K");
  }
  std::vector<bool> seen(k, false);
  for (int a : indices) {
    if (a < 0 || a >= k) throw InvalidInput("f_sign: index out of range");
    if (seen[a]) return 0;
    seen[a] = true;
  }
  // parity = (-1)^(K - number of cycles)
  std::vector<bool> visited(k, false);
  int cycles = 0;
  for (int start = 0; start < k; ++start) {
    if (visited[start]) continue;
    ++cycles;
    for (int j = start; !visited[j]; j = indices[j]) visited[j] = true;
  }
  return (k - cycles) % 2 == 0 ? 1 : -1;
}

double eta(const OperatorBasis& basis, int k) {
  const ComplexMatrix& op = basis.ops.at(k);
  return (op * op).trace().real() / (basis.d * operator_norm(op));
}

int carried_operator(int particle, int target, int k_size) {
  return (particle + target) % k_size;
}

std::vector<DensityMatrix> frame_states(const OperatorBasis& basis, int target) {
  const int size = basis.size();
  if (target < 0 || target >= size) throw InvalidInput("frame_states: bad target");
  std::vector<DensityMatrix> states;
  for (int j = 1; j < size; ++j) {
    const ComplexMatrix& op = basis.ops[carried_operator(j, target, size)];
    states.emplace_back(
        hermitian_part((identity(basis.d) + op / operator_norm(op)) / double(basis.d)));
  }
  return states;
}

ComplexMatrix build_general_T(const OperatorBasis& basis) {
  require_dense_feasible(basis);
  const int size = basis.size();
  std::vector<int> perm(size);
  std::iota(perm.begin(), perm.end(), 0);
  long dim = 1;
  for (int j = 0; j < size; ++j) dim *= basis.d;

  ComplexMatrix t = ComplexMatrix::Zero(dim, dim);
  do {
    std::vector<ComplexMatrix> factors;
    for (int a : perm) factors.push_back(basis.ops[a]);
    t += static_cast<double>(f_sign(perm, size)) * kron(factors);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return t;
}

ComplexMatrix extensive_operator(const OperatorBasis& basis, int k, int parties) {
  const std::vector<int> dims(parties, basis.d);
  long dim = 1;
  for (int j = 0; j < parties; ++j) dim *= basis.d;
  ComplexMatrix sum = ComplexMatrix::Zero(dim, dim);
  for (int p = 0; p < parties; ++p) {
    const int target[] = {p};
    sum += embed(basis.ops.at(k), dims, target);
  }
  return sum;
}

GeneralStepResult general_basis_step(const DensityMatrix& rho,
                                     const OperatorBasis& basis, int target,
                                     double alpha, int n_iter) {
  require_dense_feasible(basis);
  if (n_iter < 1) throw InvalidInput("N must be positive");
  if (rho.dim() != basis.d) throw InvalidInput("general step: dimension mismatch");

  const int size = basis.size();
  const std::vector<DensityMatrix> frame = frame_states(basis, target);
  double eta_product = 1.0;
  ComplexMatrix joint = rho.matrix();
  for (int j = 1; j < size; ++j) {
    eta_product *= eta(basis, carried_operator(j, target, size));
    joint = kron(joint, frame[j - 1].matrix());
  }

  const ComplexMatrix v =
      expm_generator(build_general_T(basis), alpha / (eta_product * n_iter));
  const ComplexMatrix evolved = v * joint * v.adjoint();

  const std::vector<int> dims(size, basis.d);
  GeneralStepResult out{DensityMatrix(rho), {}};
  out.delta.assign(size, std::vector<double>(size, 0.0));
  for (int p = 0; p < size; ++p) {
    const int keep[] = {p};
    const ComplexMatrix after = hermitian_part(partial_trace(evolved, dims, keep));
    const ComplexMatrix& before = p == 0 ? rho.matrix() : frame[p - 1].matrix();
    for (int k = 0; k < size; ++k) {
      out.delta[p][k] = expectation(basis.ops[k], after) - expectation(basis.ops[k], before);
    }
    if (p == 0) out.rho_out = DensityMatrix(after);
  }
  return out;
}

double first_order_delta(const OperatorBasis& basis, const ComplexMatrix& rho,
                         int target, int q, int k, double alpha, int n_iter) {
  const ComplexMatrix& oq = basis.ops.at(q);
  const Complex value = Complex{0.0, alpha / n_iter} * (oq * rho).trace() *
                        (basis.ops.at(k) * commutator(basis.ops.at(target), oq)).trace() /
                        (oq * oq).trace();
  return value.real();
}

double general_coupling_constant(const OperatorBasis& basis) {
  const int size = basis.size();
  double norms = 1.0;
  double etas = 1.0;
  for (int k = 0; k < size; ++k) {
    norms *= operator_norm(basis.ops[k]);
    if (k > 0) etas *= eta(basis, k);
  }
  double kfact = 1.0;
  for (int k = 2; k <= size; ++k) kfact *= k;
  return kfact * norms / etas;
}

double general_step_bound(const OperatorBasis& basis, double alpha, int n_iter) {
  const double c = general_coupling_constant(basis);
  const double r = alpha / n_iter;
  return 4.0 * kE2 * (1.0 + c * c) * r * r;
}

double general_delta_bound(const OperatorBasis& basis, int k, double alpha,
                           int n_iter) {
  const double c = general_coupling_constant(basis);
  const double r = alpha / n_iter;
  return operator_norm(basis.ops.at(k)) * 4.0 * c * c * kE2 * r * r;
}

bool general_bounds_valid(const OperatorBasis& basis, double alpha, int n_iter) {
  return n_iter > 2.0 * general_coupling_constant(basis) * std::abs(alpha);
}

std::map<int, ParticleClass> separation_classifier(const StructureTable& table,
                                                   int target) {
  if (target < 0 || target >= table.size) {
    throw InvalidInput("separation_classifier: bad target");
  }
  std::map<int, ParticleClass> out;
  for (int j = 1; j < table.size; ++j) {
    const StructureEntry& e = table.at(target, carried_operator(j, target, table.size));
    out[j] = e.zero ? ParticleClass{} : ParticleClass{false, e.m};
  }
  return out;
}

}  // namespace qrf
