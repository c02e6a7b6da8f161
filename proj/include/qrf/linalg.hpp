#pragma once

// Dense complex linear algebra for small multi-party quantum registers.
//
// Everything here is a pure function of its inputs. Matrices are stored
// row-major; parties of a register are ordered left to right, so party 0 is
// the most significant index of the tensor product.

#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qrf {

using Complex = std::complex<double>;
using ComplexMatrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RealVector = Eigen::VectorXd;

/// Tolerance for identities that hold exactly in exact arithmetic.
inline constexpr double kExactTol = 1e-12;
/// Tolerance for residuals of numerical decompositions.
inline constexpr double kDecompTol = 1e-10;

/// Raised when an input violates a documented precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a request is well formed but outside what the dense engine
/// is allowed to build.
class ScopeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

ComplexMatrix identity(int dim);

/// Largest |entry|.
double max_abs(const ComplexMatrix& m);

/// max |M - M^dagger| entry.
double hermiticity_defect(const ComplexMatrix& m);

/// (M + M^dagger) / 2.
ComplexMatrix hermitian_part(const ComplexMatrix& m);

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix kron(std::span<const ComplexMatrix> factors);

/// Reduced matrix over the parties listed in `keep` (in increasing party
/// order). Throws InvalidInput("bad factorization") when `dims` does not
/// multiply to the side length of `m` or `keep` names a missing party.
ComplexMatrix partial_trace(const ComplexMatrix& m, std::span<const int> dims,
                            std::span<const int> keep);

/// Lifts `op`, acting on the parties `targets` (in the given order), to the
/// full register described by `dims`; identity elsewhere.
ComplexMatrix embed(const ComplexMatrix& op, std::span<const int> dims,
                    std::span<const int> targets);

struct EigenDecomposition {
  RealVector values;      // ascending
  ComplexMatrix vectors;  // columns are eigenvectors
};

/// H = U diag(values) U^dagger for Hermitian H.
EigenDecomposition herm_eig(const ComplexMatrix& h);

/// exp(-i theta H) for Hermitian H.
ComplexMatrix expm_generator(const ComplexMatrix& h, double theta);

/// Sum of |eigenvalues| of a Hermitian matrix.
double trace_norm(const ComplexMatrix& a);

/// Largest |eigenvalue| of a Hermitian matrix.
double operator_norm(const ComplexMatrix& a);

/// Hermitian, unit-trace, positive semidefinite matrix.
class DensityMatrix {
 public:
  /// Validates the density-matrix invariants; throws InvalidInput on failure.
  explicit DensityMatrix(ComplexMatrix m);

  static DensityMatrix maximally_mixed(int dim);
  /// |psi><psi| for a (not necessarily normalized) nonzero vector.
  static DensityMatrix pure(const Eigen::VectorXcd& psi);

  int dim() const { return static_cast<int>(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }

  /// Re tr(op rho).
  double expectation(const ComplexMatrix& op) const;
  double purity() const;

 private:
  ComplexMatrix m_;
};

/// Re tr(op rho) without constructing a DensityMatrix.
double expectation(const ComplexMatrix& op, const ComplexMatrix& rho);

/// ||a - b||_1 (no factor 1/2).
double trace_norm_distance(const DensityMatrix& a, const DensityMatrix& b);

}  // namespace qrf
