#include "qrf/spin.hpp"

#include <cmath>
#include <vector>

namespace qrf {

char axis_name(Axis a) { return "xyz"[index(a)]; }

int levi_civita(int j, int k, int l) {
  if (j == k || k == l || j == l) return 0;
  return ((k - j + 3) % 3 == 1) ? 1 : -1;
}

Spin Spin::from_value(double s) {
  const double twice = 2.0 * s;
  if (!(s > 0.0) || std::abs(twice - std::round(twice)) > 1e-9) {
    throw InvalidInput("spin must be a positive multiple of 1/2");
  }
  return Spin(static_cast<int>(std::lround(twice)));
}

Spin Spin::from_twice(int twice_s) {
  if (twice_s < 1) throw InvalidInput("spin must be a positive multiple of 1/2");
  return Spin(twice_s);
}

const ComplexMatrix& SpinOperators::operator[](Axis a) const {
  switch (a) {
    case Axis::x: return sx;
    case Axis::y: return sy;
    case Axis::z: return sz;
  }
  return sz;
}

SpinOperators spin_operators(Spin s) {
  const int d = s.dim();
  const double j = s.value();
  ComplexMatrix raise = ComplexMatrix::Zero(d, d);
  ComplexMatrix sz = ComplexMatrix::Zero(d, d);
  for (int r = 0; r < d; ++r) {
    const double m = j - r;
    sz(r, r) = m;
    // s+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>, and |m+1> sits one row up.
    if (r > 0) raise(r - 1, r) = std::sqrt(j * (j + 1) - m * (m + 1));
  }
  const ComplexMatrix lower = raise.adjoint();
  const Complex i{0.0, 1.0};
  return SpinOperators{s, (raise + lower) * 0.5, (raise - lower) / (2.0 * i), sz};
}

TauState tau_state(Spin s, Axis axis) {
  const SpinOperators ops = spin_operators(s);
  if (s.twice() == 1) {
    return TauState{s, axis, DensityMatrix(identity(2) * 0.5 + ops[axis])};
  }
  const EigenDecomposition eig = herm_eig(ops[axis]);
  const Eigen::VectorXcd top = eig.vectors.col(eig.values.size() - 1);
  return TauState{s, axis, DensityMatrix::pure(top)};
}

ComplexMatrix build_T(Spin s) {
  const SpinOperators ops = spin_operators(s);
  const int d = s.dim();
  ComplexMatrix t = ComplexMatrix::Zero(d * d * d, d * d * d);
  for (Axis j : kAxes) {
    for (Axis k : kAxes) {
      for (Axis l : kAxes) {
        const int eps = levi_civita(index(j), index(k), index(l));
        if (eps == 0) continue;
        t += static_cast<double>(eps) * kron(kron(ops[j], ops[k]), ops[l]);
      }
    }
  }
  return t;
}

double coupling(Spin s, double alpha, int n_iter) {
  const double v = s.value();
  return alpha / (v * v * n_iter);
}

StepUnitary build_V(Spin s, double alpha, int n_iter) {
  if (n_iter < 1) throw InvalidInput("N must be positive");
  return StepUnitary{s, alpha, n_iter,
                     expm_generator(build_T(s), coupling(s, alpha, n_iter))};
}

ComplexMatrix total_spin_component(Axis k, std::span<const SpinParty> parties) {
  if (parties.empty()) throw InvalidInput("total_spin_component: no parties");
  std::vector<int> dims;
  for (const SpinParty& p : parties) dims.push_back(p.s.dim());
  long total = 1;
  for (int d : dims) total *= d;

  ComplexMatrix sum = ComplexMatrix::Zero(total, total);
  for (int p = 0; p < static_cast<int>(parties.size()); ++p) {
    if (!parties[p].counted) continue;
    const int target[] = {p};
    sum += embed(spin_operators(parties[p].s)[k], dims, target);
  }
  return sum;
}

double conservation_residual(const StepUnitary& v, Axis k) {
  const SpinParty parties[] = {{v.s}, {v.s}, {v.s}};
  const ComplexMatrix total = total_spin_component(k, parties);
  if (total.rows() != v.matrix.rows()) {
    throw InvalidInput("conservation_residual: dimension mismatch");
  }
  // [V, S] is not Hermitian; its operator norm is the largest singular value.
  const ComplexMatrix c = v.matrix * total - total * v.matrix;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(c);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

}  // namespace qrf
