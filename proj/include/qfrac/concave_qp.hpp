#pragma once

#include "qfrac/polyhedron.hpp"

namespace qfrac {

/// Maximize 0.5 x'Hx + c'x with H symmetric negative semidefinite.
struct ConcaveQp {
  Matrix H;
  Vector c;
};

struct QpSettings {
  double kkt_tol = 1e-8;
  int max_iterations = 0;  // 0 -> 50 n + 2000
  bool pg_phase = true;    // accelerated projected-gradient warm start
  int pg_iterations = 0;   // 0 -> auto from n
  double feas_tol = 1e-9;
};

struct QpResult {
  Vector x;
  double value = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool unbounded = false;
};

/// Maximize the concave quadratic over X starting from feasible x0.
///
/// Runs an accelerated projected-gradient phase (step from the power-iteration
/// Lipschitz estimate, Dykstra projections) until progress stalls, then an
/// active-set refinement on the polished point.  The refinement terminates at
/// a KKT point: the gradient projected onto the cone of feasible directions
/// has norm below kkt_tol, which for a concave objective certifies a global
/// maximizer over X.  The returned value never falls below the objective at
/// x0.  Unbounded rays (possible only when X is unbounded) are flagged.
QpResult maximize(const ConcaveQp& qp, const Polyhedron& X, const Vector& x0,
                  const QpSettings& settings = {});

/// Linear objective c'x (H = 0); degenerates to a vertex LP solve.
QpResult maximize_linear(const Vector& c, const Polyhedron& X, const Vector& x0,
                         const QpSettings& settings = {});

/// Spectral-norm estimate by power iteration.
double power_iteration_norm(const Matrix& M, int iters = 50, double tol = 1e-10);

}  // namespace qfrac
