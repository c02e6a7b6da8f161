#include "qrf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qrf {
namespace {

void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw InvalidInput(std::string(what) + ": square nonempty matrix required");
  }
}

void require_hermitian(const ComplexMatrix& h, const char* what) {
  require_square(h, what);
  const double scale = std::max(1.0, max_abs(h));
  if (hermiticity_defect(h) > kDecompTol * scale) {
    throw InvalidInput(std::string(what) + ": matrix is not Hermitian");
  }
}

// Offsets into the full register index contributed by every joint value of
// the listed parties, most significant party first.
std::vector<int> subset_offsets(std::span<const int> dims,
                                std::span<const int> parties) {
  std::vector<int> stride(dims.size(), 1);
  for (int p = static_cast<int>(dims.size()) - 2; p >= 0; --p) {
    stride[p] = stride[p + 1] * dims[p + 1];
  }
  std::vector<int> offsets{0};
  for (int p : parties) {
    std::vector<int> next;
    next.reserve(offsets.size() * dims[p]);
    for (int base : offsets) {
      for (int digit = 0; digit < dims[p]; ++digit) {
        next.push_back(base + digit * stride[p]);
      }
    }
    offsets = std::move(next);
  }
  return offsets;
}

long register_size(std::span<const int> dims) {
  long total = 1;
  for (int d : dims) {
    if (d <= 0) throw InvalidInput("bad factorization");
    total *= d;
  }
  return total;
}

// Validates the party list and returns the complement of `chosen`.
std::vector<int> complement(std::span<const int> dims,
                            std::span<const int> chosen) {
  std::vector<bool> used(dims.size(), false);
  for (int p : chosen) {
    if (p < 0 || p >= static_cast<int>(dims.size()) || used[p]) {
      throw InvalidInput("bad factorization");
    }
    used[p] = true;
  }
  std::vector<int> rest;
  for (int p = 0; p < static_cast<int>(dims.size()); ++p) {
    if (!used[p]) rest.push_back(p);
  }
  return rest;
}

}  // namespace

ComplexMatrix identity(int dim) { return ComplexMatrix::Identity(dim, dim); }

double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double hermiticity_defect(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  return max_abs(m - m.adjoint());
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) {
  return (m + m.adjoint()) * 0.5;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b - b * a;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix kron(std::span<const ComplexMatrix> factors) {
  if (factors.empty()) return identity(1);
  ComplexMatrix out = factors.front();
  for (std::size_t k = 1; k < factors.size(); ++k) out = kron(out, factors[k]);
  return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& m, std::span<const int> dims,
                            std::span<const int> keep) {
  if (register_size(dims) != m.rows() || m.rows() != m.cols()) {
    throw InvalidInput("bad factorization");
  }
  const std::vector<int> traced = complement(dims, keep);
  std::vector<int> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());

  const std::vector<int> keep_off = subset_offsets(dims, kept);
  const std::vector<int> trace_off = subset_offsets(dims, traced);
  const int n = static_cast<int>(keep_off.size());
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      Complex acc{0.0, 0.0};
      for (int t : trace_off) acc += m(keep_off[a] + t, keep_off[b] + t);
      out(a, b) = acc;
    }
  }
  return out;
}

ComplexMatrix embed(const ComplexMatrix& op, std::span<const int> dims,
                    std::span<const int> targets) {
  const long total = register_size(dims);
  const std::vector<int> rest = complement(dims, targets);

  const std::vector<int> target_off = subset_offsets(dims, targets);
  const std::vector<int> rest_off = subset_offsets(dims, rest);
  if (static_cast<long>(target_off.size()) != op.rows() || op.rows() != op.cols()) {
    throw InvalidInput("bad factorization");
  }
  ComplexMatrix out = ComplexMatrix::Zero(total, total);
  for (std::size_t a = 0; a < target_off.size(); ++a) {
    for (std::size_t b = 0; b < target_off.size(); ++b) {
      const Complex v = op(a, b);
      if (v == Complex{}) continue;
      for (int t : rest_off) out(target_off[a] + t, target_off[b] + t) = v;
    }
  }
  return out;
}

EigenDecomposition herm_eig(const ComplexMatrix& h) {
  require_hermitian(h, "herm_eig");
  // The solver reads only the lower triangle; symmetrize first so that the
  // residual reflects the Hermitian part of h.
  const Eigen::MatrixXcd herm = hermitian_part(h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("herm_eig: eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

ComplexMatrix expm_generator(const ComplexMatrix& h, double theta) {
  require_hermitian(h, "expm_generator");
  if (theta == 0.0) return identity(static_cast<int>(h.rows()));
  const EigenDecomposition eig = herm_eig(h);
  Eigen::VectorXcd phases(eig.values.size());
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    phases(k) = std::polar(1.0, -theta * eig.values(k));
  }
  return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

double trace_norm(const ComplexMatrix& a) {
  require_hermitian(a, "trace_norm");
  return herm_eig(a).values.cwiseAbs().sum();
}

double operator_norm(const ComplexMatrix& a) {
  require_hermitian(a, "operator_norm");
  return herm_eig(a).values.cwiseAbs().maxCoeff();
}

DensityMatrix::DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {
  require_square(m_, "DensityMatrix");
  if (hermiticity_defect(m_) > kExactTol) {
    throw InvalidInput("DensityMatrix: not Hermitian");
  }
  if (std::abs(m_.trace() - Complex{1.0, 0.0}) > kExactTol) {
    throw InvalidInput("DensityMatrix: trace differs from 1");
  }
  if (herm_eig(m_).values.minCoeff() < -kDecompTol) {
    throw InvalidInput("DensityMatrix: negative eigenvalue");
  }
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  return DensityMatrix(identity(dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& psi) {
  const double norm = psi.norm();
  if (!(norm > 0.0)) throw InvalidInput("DensityMatrix::pure: zero vector");
  const Eigen::VectorXcd unit = psi / norm;
  return DensityMatrix(hermitian_part(unit * unit.adjoint()));
}

double DensityMatrix::expectation(const ComplexMatrix& op) const {
  return qrf::expectation(op, m_);
}

double DensityMatrix::purity() const { return (m_ * m_).trace().real(); }

double expectation(const ComplexMatrix& op, const ComplexMatrix& rho) {
  // tr(A B) = sum_ij A_ij B_ji
  return op.cwiseProduct(rho.transpose()).sum().real();
}

double trace_norm_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return trace_norm(a.matrix() - b.matrix());
}

}  // namespace qrf
