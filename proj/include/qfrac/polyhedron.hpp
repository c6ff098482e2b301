#pragma once

#include <cstdint>
#include <vector>

#include "qfrac/common.hpp"

namespace qfrac {

/// Feasible set X = { x : Ax <= b, Ex = f, lb <= x <= ub }.
///
/// Any of the three blocks may be absent (zero rows / empty bound vectors).
/// Box bounds, when present, have length n and may contain +-inf entries.
struct Polyhedron {
  Matrix A;  // T x n
  Vector b;  // T
  Matrix E;  // k x n
  Vector f;  // k
  Vector lb, ub;  // n or empty

  int dim() const { return A.cols() > 0 ? static_cast<int>(A.cols()) : n_hint; }
  int n_hint = 0;  // dimension when all blocks are empty

  bool has_box() const { return lb.size() > 0; }
  bool has_eq() const { return E.rows() > 0; }

  static Polyhedron box_only(const Vector& lo, const Vector& hi);

  /// All inequality rows (A rows plus finite box faces), each scaled to unit
  /// norm so that slacks are Euclidean distances.
  struct RowSet {
    Matrix G;
    Vector h;
  };
  RowSet inequality_rows() const;

  /// Minimum distance-slack over all inequality rows; +inf when there are none.
  double min_slack(const Vector& x) const;

  /// Largest |e_i'x - f_i| over equality rows, 0 when there are none.
  double equality_residual(const Vector& x) const;

  bool contains(const Vector& x, double tol) const;

  /// Copy with extra inequality rows appended.
  Polyhedron with_rows(const Matrix& extra_A, const Vector& extra_b) const;

  /// Copy with the box intersected against [lo, hi].
  Polyhedron with_box(const Vector& lo, const Vector& hi) const;
};

/// Euclidean projection of z onto X, exact for a box (optionally with one
/// equality row) and via capped Dykstra sweeps otherwise.  The result may
/// violate general rows by a small residual; callers needing strict
/// feasibility should follow with clip_to_feasible_segment.
Vector project(const Polyhedron& X, const Vector& z, int max_sweeps = 80);

/// Exact projection of z onto { lo <= x <= hi, a'x = rhs }.
Vector project_box_equality(const Vector& z, const Vector& lo, const Vector& hi,
                            const Vector& a, double rhs);

/// Least-squares correction of x onto the equality manifold Ex = f.
Vector project_equalities(const Polyhedron& X, const Vector& x);

/// Largest step from a feasible anchor toward z that stays feasible.
Vector clip_to_feasible_segment(const Polyhedron& X, const Vector& anchor,
                                const Vector& z);

/// Witness of region/polyhedron nonemptiness: the point of maximum minimum
/// slack (Chebyshev-style center).  `found` is true when the achieved slack
/// clears delta_feas; `slack` always reports the best value attained, so a
/// caller can distinguish "empty" (slack < 0) from "boundary-only".
struct InteriorPointResult {
  bool found = false;
  Vector x;
  double slack = -kInf;
};

InteriorPointResult find_interior_point(const Polyhedron& X, double delta_feas,
                                        double kkt_tol = 1e-8);

/// Binary word selecting one sign subregion per rank-one term.
struct SignPattern {
  std::vector<std::uint8_t> bits;

  int size() const { return static_cast<int>(bits.size()); }
  double sign(int m) const { return bits[static_cast<size_t>(m)] ? 1.0 : -1.0; }
  std::string to_string() const;
};

}  // namespace qfrac
