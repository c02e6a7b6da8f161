#pragma once

// Spin operators, polarized reference states and the rotation-invariant
// three-body coupling s . (s' x s'') used by the reference frame.

#include <array>
#include <span>
#include <string>

#include "qrf/linalg.hpp"

namespace qrf {

enum class Axis { x = 0, y = 1, z = 2 };

inline constexpr std::array<Axis, 3> kAxes{Axis::x, Axis::y, Axis::z};

inline int index(Axis a) { return static_cast<int>(a); }
inline Axis axis_from_index(int k) { return kAxes.at(k); }
/// Cyclic successor: x -> y -> z -> x.
inline Axis next(Axis a) { return kAxes[(index(a) + 1) % 3]; }
char axis_name(Axis a);

/// Levi-Civita symbol with (x, y, z) <-> (0, 1, 2).
int levi_civita(int j, int k, int l);

/// Spin quantum number, stored as the integer 2s.
class Spin {
 public:
  /// Throws InvalidInput unless s > 0 and 2s is integral.
  static Spin from_value(double s);
  static Spin from_twice(int twice_s);
  static Spin half() { return from_twice(1); }

  double value() const { return twice_ / 2.0; }
  int twice() const { return twice_; }
  int dim() const { return twice_ + 1; }

  friend bool operator==(Spin, Spin) = default;

 private:
  explicit Spin(int twice) : twice_(twice) {}
  int twice_;
};

struct SpinOperators {
  Spin s;
  ComplexMatrix sx, sy, sz;

  const ComplexMatrix& operator[](Axis a) const;
};

/// Standard ladder representation in the basis m = s, s-1, ..., -s.
SpinOperators spin_operators(Spin s);

struct TauState {
  Spin s;
  Axis axis;
  DensityMatrix state;
};

/// Spin maximally polarized along `axis` (s_axis eigenvalue s).
TauState tau_state(Spin s, Axis axis);

/// sum_{jkl} eps_{jkl} s_j (x) s'_k (x) s''_l on three spin-s parties.
ComplexMatrix build_T(Spin s);

struct StepUnitary {
  Spin s;
  double alpha;
  int n_iter;
  ComplexMatrix matrix;
};

/// Coupling constant of exp(-i c T): 4 alpha / N at s = 1/2, alpha / (s^2 N)
/// in general (the two agree at s = 1/2).
double coupling(Spin s, double alpha, int n_iter);

/// exp(-i coupling(s, alpha, N) T). Throws InvalidInput for N < 1.
StepUnitary build_V(Spin s, double alpha, int n_iter);

struct SpinParty {
  Spin s;
  /// When false the party contributes identity only.
  bool counted = true;
};

/// sum over counted parties of I (x) ... (x) s_k (x) ... (x) I.
ComplexMatrix total_spin_component(Axis k, std::span<const SpinParty> parties);

/// || V S_k - S_k V || over the three parties V acts on.
double conservation_residual(const StepUnitary& v, Axis k);

}  // namespace qrf
