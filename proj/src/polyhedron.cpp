#include "qfrac/polyhedron.hpp"

#include <algorithm>
#include <cmath>

#include "qfrac/concave_qp.hpp"

namespace qfrac {

namespace {

bool finite(double v) { return std::isfinite(v); }

}  // namespace

Polyhedron Polyhedron::box_only(const Vector& lo, const Vector& hi) {
  Polyhedron X;
  const int n = static_cast<int>(lo.size());
  X.A.resize(0, n);
  X.b.resize(0);
  X.E.resize(0, n);
  X.f.resize(0);
  X.lb = lo;
  X.ub = hi;
  X.n_hint = n;
  return X;
}

Polyhedron::RowSet Polyhedron::inequality_rows() const {
  const int n = dim();
  int count = static_cast<int>(A.rows());
  if (has_box()) {
    for (int i = 0; i < n; ++i) {
      if (finite(lb[i])) ++count;
      if (finite(ub[i])) ++count;
    }
  }
  RowSet rs;
  rs.G.resize(count, n);
  rs.h.resize(count);
  int r = 0;
  for (int i = 0; i < A.rows(); ++i) {
    const double nrm = A.row(i).norm();
    if (nrm > 0) {
      rs.G.row(r) = A.row(i) / nrm;
      rs.h[r] = b[i] / nrm;
    } else {
      // Degenerate all-zero row: satisfied iff b_i >= 0.
      rs.G.row(r).setZero();
      rs.h[r] = b[i];
    }
    ++r;
  }
  if (has_box()) {
    for (int i = 0; i < n; ++i) {
      if (finite(lb[i])) {
        rs.G.row(r).setZero();
        rs.G(r, i) = -1.0;
        rs.h[r] = -lb[i];
        ++r;
      }
      if (finite(ub[i])) {
        rs.G.row(r).setZero();
        rs.G(r, i) = 1.0;
        rs.h[r] = ub[i];
        ++r;
      }
    }
  }
  return rs;
}

double Polyhedron::min_slack(const Vector& x) const {
  const RowSet rs = inequality_rows();
  if (rs.G.rows() == 0) return kInf;
  double s = kInf;
  for (int i = 0; i < rs.G.rows(); ++i) {
    s = std::min(s, rs.h[i] - rs.G.row(i).dot(x));
  }
  return s;
}

double Polyhedron::equality_residual(const Vector& x) const {
  if (!has_eq()) return 0.0;
  return (E * x - f).cwiseAbs().maxCoeff();
}

bool Polyhedron::contains(const Vector& x, double tol) const {
  return min_slack(x) >= -tol && equality_residual(x) <= tol;
}

Polyhedron Polyhedron::with_rows(const Matrix& extra_A,
                                 const Vector& extra_b) const {
  Polyhedron out = *this;
  const int t0 = static_cast<int>(A.rows());
  const int t1 = static_cast<int>(extra_A.rows());
  out.A.resize(t0 + t1, dim());
  out.b.resize(t0 + t1);
  if (t0 > 0) {
    out.A.topRows(t0) = A;
    out.b.head(t0) = b;
  }
  out.A.bottomRows(t1) = extra_A;
  out.b.tail(t1) = extra_b;
  return out;
}

Polyhedron Polyhedron::with_box(const Vector& lo, const Vector& hi) const {
  Polyhedron out = *this;
  if (!has_box()) {
    out.lb = lo;
    out.ub = hi;
  } else {
    out.lb = lb.cwiseMax(lo);
    out.ub = ub.cwiseMin(hi);
  }
  return out;
}

std::string SignPattern::to_string() const {
  std::string s;
  s.reserve(bits.size());
  for (auto bit : bits) s.push_back(bit ? '1' : '0');
  return s;
}

Vector project_box_equality(const Vector& z, const Vector& lo, const Vector& hi,
                            const Vector& a, double rhs) {
  auto clipped = [&](double theta) -> Vector {
    Vector x = z + theta * a;
    if (lo.size() > 0) x = x.cwiseMax(lo).cwiseMin(hi);
    return x;
  };
  const double aa = a.squaredNorm();
  if (aa <= 0) return clipped(0.0);

  auto g = [&](double theta) { return a.dot(clipped(theta)); };

  // a' clip(z + theta a) is nondecreasing in theta; bracket the root then
  // bisect.
  double step = std::max(1.0, std::abs(rhs - g(0.0)) / aa);
  double tlo = 0.0, thi = 0.0;
  double glo = g(0.0), ghi = glo;
  for (int k = 0; k < 200 && ghi < rhs; ++k) {
    thi += step;
    step *= 2;
    ghi = g(thi);
  }
  step = std::max(1.0, std::abs(rhs - g(0.0)) / aa);
  for (int k = 0; k < 200 && glo > rhs; ++k) {
    tlo -= step;
    step *= 2;
    glo = g(tlo);
  }
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (tlo + thi);
    if (g(mid) < rhs)
      tlo = mid;
    else
      thi = mid;
  }
  return clipped(0.5 * (tlo + thi));
}

Vector project_equalities(const Polyhedron& X, const Vector& x) {
  if (!X.has_eq()) return x;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(X.E);
  return x - cod.solve(X.E * x - X.f);
}

Vector project(const Polyhedron& X, const Vector& z, int max_sweeps) {
  const int n = X.dim();
  const bool box = X.has_box();
  const int k = static_cast<int>(X.E.rows());
  const int t = static_cast<int>(X.A.rows());

  auto clip_box = [&](const Vector& v) -> Vector {
    if (!box) return v;
    return v.cwiseMax(X.lb).cwiseMin(X.ub);
  };

  if (t == 0) {
    if (k == 0) return clip_box(z);
    if (k == 1) return project_box_equality(z, X.lb, X.ub, X.E.row(0), X.f[0]);
  }

  // Dykstra over: (box [+ single equality handled exactly]), the equality
  // manifold, and each general inequality half-space.
  const bool fold_eq_into_box = (k == 1);
  struct Set {
    int kind;  // 0 box(+eq), 1 eq manifold, 2 halfspace
    int row;
  };
  std::vector<Set> sets;
  if (box || fold_eq_into_box) sets.push_back({0, 0});
  if (k > 1) sets.push_back({1, 0});
  for (int i = 0; i < t; ++i) {
    if (X.A.row(i).norm() > 0) sets.push_back({2, i});
  }
  if (sets.empty()) return z;

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  if (k > 1) cod.compute(X.E);

  std::vector<Vector> increments(sets.size(), Vector::Zero(n));
  Vector x = z;
  const double scale = 1.0 + z.norm();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double moved = 0.0;
    for (size_t si = 0; si < sets.size(); ++si) {
      const Vector y = x + increments[si];
      Vector xn;
      switch (sets[si].kind) {
        case 0:
          xn = fold_eq_into_box
                   ? project_box_equality(y, X.lb, X.ub, X.E.row(0), X.f[0])
                   : clip_box(y);
          break;
        case 1:
          xn = y - cod.solve(X.E * y - X.f);
          break;
        default: {
          const auto row = X.A.row(sets[si].row);
          const double nrm2 = row.squaredNorm();
          const double viol = row.dot(y) - X.b[sets[si].row];
          xn = viol > 0 ? Vector(y - (viol / nrm2) * row.transpose()) : y;
          break;
        }
      }
      increments[si] = y - xn;
      moved = std::max(moved, (xn - x).norm());
      x = xn;
    }
    if (moved < 1e-14 * scale) break;
  }
  return x;
}

Vector clip_to_feasible_segment(const Polyhedron& X, const Vector& anchor,
                                const Vector& z) {
  Vector target = X.has_eq() ? project_equalities(X, z) : z;
  const Vector d = target - anchor;
  const auto rs = X.inequality_rows();
  double tmax = 1.0;
  for (int i = 0; i < rs.G.rows(); ++i) {
    const double den = rs.G.row(i).dot(d);
    if (den > 1e-14) {
      const double num = std::max(0.0, rs.h[i] - rs.G.row(i).dot(anchor));
      tmax = std::min(tmax, num / den);
    }
  }
  return anchor + tmax * d;
}

InteriorPointResult find_interior_point(const Polyhedron& X, double delta_feas,
                                        double kkt_tol) {
  const int n = X.dim();
  const auto rs = X.inequality_rows();
  const int t = static_cast<int>(rs.G.rows());
  const int k = static_cast<int>(X.E.rows());
  const double s_cap = 1e6;
  const double rho = 1e-10;

  // Augmented variable z = (x, s): maximize s - rho |z|^2 subject to
  // g_i'x + s <= h_i for every unit-norm row and Ex = f.
  Polyhedron aug;
  aug.n_hint = n + 1;
  aug.A.resize(t + 1, n + 1);
  aug.b.resize(t + 1);
  for (int i = 0; i < t; ++i) {
    aug.A.row(i).head(n) = rs.G.row(i);
    aug.A(i, n) = 1.0;
    aug.b[i] = rs.h[i];
  }
  aug.A.row(t).setZero();
  aug.A(t, n) = 1.0;
  aug.b[t] = s_cap;
  aug.E.resize(k, n + 1);
  aug.f.resize(k);
  if (k > 0) {
    aug.E.leftCols(n) = X.E;
    aug.E.col(n).setZero();
    aug.f = X.f;
  }

  Vector x0(n);
  if (k > 0) {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(X.E);
    x0 = cod.solve(X.f);
  } else if (X.has_box()) {
    for (int i = 0; i < n; ++i) {
      const double lo = std::isfinite(X.lb[i]) ? X.lb[i] : -1.0;
      const double hi = std::isfinite(X.ub[i]) ? X.ub[i] : 1.0;
      x0[i] = 0.5 * (lo + hi);
    }
  } else {
    x0.setZero();
  }
  double s0 = s_cap;
  for (int i = 0; i < t; ++i) s0 = std::min(s0, rs.h[i] - rs.G.row(i).dot(x0));

  Vector z0(n + 1);
  z0.head(n) = x0;
  z0[n] = s0;

  ConcaveQp qp;
  qp.H = Matrix::Identity(n + 1, n + 1) * (-2.0 * rho);
  qp.c = Vector::Zero(n + 1);
  qp.c[n] = 1.0;

  QpSettings qs;
  qs.kkt_tol = kkt_tol;
  qs.pg_phase = false;
  const QpResult r = maximize(qp, aug, z0, qs);

  InteriorPointResult out;
  Vector x = r.x.head(n);
  if (k > 0) x = project_equalities(X, x);
  out.x = x;
  out.slack = X.min_slack(x);
  out.found = out.slack >= delta_feas;
  return out;
}

}  // namespace qfrac
