#include "qfrac/concave_qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace qfrac {

namespace {

// Internal minimization form: min 0.5 x'Gx + g'x with G PSD over unit-norm
// rows Cx <= h and equalities.
struct Rows {
  Matrix G;  // unit-norm inequality rows
  Vector h;
  Matrix E;  // unit-norm equality rows
  Vector f;
};

Rows normalized_rows(const Polyhedron& X) {
  Rows r;
  const auto rs = X.inequality_rows();
  r.G = rs.G;
  r.h = rs.h;
  const int k = static_cast<int>(X.E.rows());
  const int n = X.dim();
  r.E.resize(k, n);
  r.f.resize(k);
  int kept = 0;
  for (int i = 0; i < k; ++i) {
    const double nrm = X.E.row(i).norm();
    if (nrm > 0) {
      r.E.row(kept) = X.E.row(i) / nrm;
      r.f[kept] = X.f[i] / nrm;
      ++kept;
    }
  }
  r.E.conservativeResize(kept, n);
  r.f.conservativeResize(kept);
  return r;
}

double qval(const Matrix& G, const Vector& g, const Vector& x) {
  return 0.5 * x.dot(G * x) + g.dot(x);
}

// Null-space basis of C (m x n, possibly rank deficient).
Matrix null_basis(const Matrix& C) {
  const int n = static_cast<int>(C.cols());
  if (C.rows() == 0) return Matrix::Identity(n, n);
  Eigen::ColPivHouseholderQR<Matrix> qr(C.transpose());
  qr.setThreshold(1e-10);
  const int r = static_cast<int>(qr.rank());
  if (r >= n) return Matrix(n, 0);
  Matrix tail = Matrix::Identity(n, n).rightCols(n - r);
  return qr.householderQ() * tail;
}

struct ActiveSetOutcome {
  Vector x;
  double kkt_residual = kInf;
  int iterations = 0;
  bool converged = false;
  bool unbounded = false;
};

ActiveSetOutcome active_set_min(const Matrix& G, const Vector& g,
                                const Rows& rows, Vector x, double kkt_tol,
                                int max_iter, double g_norm) {
  const int n = static_cast<int>(x.size());
  const int t = static_cast<int>(rows.G.rows());
  const int k = static_cast<int>(rows.E.rows());
  const double act_tol = 1e-9;
  const double curv_tol = 1e-11 * (1.0 + g_norm);

  std::vector<char> in_w(static_cast<size_t>(t), 0);
  std::vector<int> w;

  // Initial working set: active rows, pruned to a set independent modulo the
  // equality rows.
  {
    std::vector<int> cand;
    for (int i = 0; i < t; ++i) {
      if (rows.h[i] - rows.G.row(i).dot(x) <= act_tol) cand.push_back(i);
    }
    if (!cand.empty()) {
      Matrix ze = null_basis(rows.E);
      if (ze.cols() > 0) {
        Matrix proj(ze.cols(), static_cast<int>(cand.size()));
        for (size_t j = 0; j < cand.size(); ++j)
          proj.col(static_cast<int>(j)) = ze.transpose() * rows.G.row(cand[j]).transpose();
        Eigen::ColPivHouseholderQR<Matrix> qr(proj);
        qr.setThreshold(1e-10);
        const int r = static_cast<int>(qr.rank());
        for (int j = 0; j < r; ++j) {
          const int idx = cand[static_cast<size_t>(qr.colsPermutation().indices()[j])];
          w.push_back(idx);
          in_w[static_cast<size_t>(idx)] = 1;
        }
      }
    }
  }

  ActiveSetOutcome out;
  for (int iter = 0; iter < max_iter; ++iter) {
    out.iterations = iter + 1;
    const int m = k + static_cast<int>(w.size());
    Matrix c_mat(m, n);
    if (k > 0) c_mat.topRows(k) = rows.E;
    for (size_t j = 0; j < w.size(); ++j)
      c_mat.row(k + static_cast<int>(j)) = rows.G.row(w[j]);

    Eigen::ColPivHouseholderQR<Matrix> qr;
    int rank = 0;
    if (m > 0) {
      qr.compute(c_mat.transpose());
      qr.setThreshold(1e-10);
      rank = static_cast<int>(qr.rank());
    }
    const int d = n - rank;
    const Vector grad = G * x + g;

    Vector p = Vector::Zero(n);
    bool ray = false;
    if (d > 0) {
      Matrix z;
      if (m == 0) {
        z = Matrix::Identity(n, n);
      } else {
        Matrix tail = Matrix::Identity(n, n).rightCols(d);
        z = qr.householderQ() * tail;
      }
      const Vector rz = z.transpose() * grad;
      const Matrix mz = z.transpose() * G * z;

      // Fast path: strictly positive-definite reduced Hessian.
      bool solved = false;
      if (g_norm > 0) {
        Eigen::LLT<Matrix> llt(mz);
        if (llt.info() == Eigen::Success) {
          Vector pz = -llt.solve(rz);
          if ((mz * pz + rz).norm() <= 1e-8 * (1.0 + rz.norm())) {
            p = z * pz;
            solved = true;
          }
        }
      }
      if (!solved) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(mz);
        const Vector& ev = es.eigenvalues();
        const Matrix& v = es.eigenvectors();
        Vector flat = Vector::Zero(d);
        Vector pz = Vector::Zero(d);
        for (int i = 0; i < d; ++i) {
          const double coef = v.col(i).dot(rz);
          if (ev[i] <= curv_tol)
            flat += coef * v.col(i);
          else
            pz -= (coef / ev[i]) * v.col(i);
        }
        if (flat.norm() > 1e-11 * (1.0 + grad.norm())) {
          p = -(z * flat);
          ray = true;
        } else {
          p = z * pz;
        }
      }
    }

    if (!ray && p.norm() <= 1e-11 * (1.0 + x.norm())) {
      // Stationary on the working set; check multipliers.
      if (m == 0) {
        out.x = x;
        out.kkt_residual = grad.norm();
        out.converged = out.kkt_residual <= std::max(kkt_tol, 1e-10);
        return out;
      }
      const Vector mu = qr.solve(-grad);
      int drop = -1;
      double most_neg = -1e-9 * (1.0 + mu.cwiseAbs().maxCoeff());
      for (size_t j = 0; j < w.size(); ++j) {
        const double mj = mu[k + static_cast<int>(j)];
        if (mj < most_neg) {
          most_neg = mj;
          drop = static_cast<int>(j);
        }
      }
      if (drop < 0) {
        Vector mu_clamped = mu;
        for (size_t j = 0; j < w.size(); ++j)
          mu_clamped[k + static_cast<int>(j)] =
              std::max(0.0, mu[k + static_cast<int>(j)]);
        out.x = x;
        out.kkt_residual = (c_mat.transpose() * mu_clamped + grad).norm();
        out.converged = out.kkt_residual <= std::max(kkt_tol, 1e-10);
        return out;
      }
      in_w[static_cast<size_t>(w[static_cast<size_t>(drop)])] = 0;
      w.erase(w.begin() + drop);
      continue;
    }

    // Ratio test against rows outside the working set.
    double alpha_cap = ray ? kInf : 1.0;
    if (ray) {
      const double curv = p.dot(G * p);
      const double slope = grad.dot(p);
      if (curv > 1e-14 * (1.0 + g_norm) && slope < 0)
        alpha_cap = -slope / curv;
    }
    double alpha = alpha_cap;
    int blocker = -1;
    const double dir_tol = 1e-13 * p.norm();
    for (int i = 0; i < t; ++i) {
      if (in_w[static_cast<size_t>(i)]) continue;
      const double den = rows.G.row(i).dot(p);
      if (den > dir_tol) {
        const double num = std::max(0.0, rows.h[i] - rows.G.row(i).dot(x));
        const double ti = num / den;
        if (ti < alpha - 1e-15) {
          alpha = ti;
          blocker = i;
        }
      }
    }
    if (!std::isfinite(alpha)) {
      out.x = x;
      out.unbounded = true;
      return out;
    }
    x += alpha * p;
    if (blocker >= 0) {
      w.push_back(blocker);
      in_w[static_cast<size_t>(blocker)] = 1;
    }
  }
  out.x = x;
  out.converged = false;
  return out;
}

}  // namespace

double power_iteration_norm(const Matrix& M, int iters, double tol) {
  const int n = static_cast<int>(M.rows());
  if (n == 0) return 0.0;
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = 1.0 + 0.3 * std::sin(1.0 + i);
  v.normalize();
  double lam = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vector w = M * v;
    const double nw = w.norm();
    if (nw <= 1e-300) return 0.0;
    v = w / nw;
    const double lam_new = std::abs(v.dot(M * v));
    if (std::abs(lam_new - lam) <= tol * std::max(1.0, lam_new)) return lam_new;
    lam = lam_new;
  }
  return lam;
}

QpResult maximize(const ConcaveQp& qp, const Polyhedron& X, const Vector& x0,
                  const QpSettings& settings) {
  const int n = X.dim();
  if (qp.H.rows() != n || qp.H.cols() != n || qp.c.size() != n ||
      x0.size() != n) {
    throw DimensionError("concave_qp: inconsistent dimensions");
  }
  const Matrix G = -qp.H;
  const Vector g = -qp.c;
  const double g_norm = power_iteration_norm(G);

  Vector start = x0;
  if (X.equality_residual(start) > 1e-10) start = project_equalities(X, start);
  if (X.min_slack(start) < -settings.feas_tol) {
    start = project(X, start);
    if (X.has_eq()) start = project_equalities(X, start);
    if (X.min_slack(start) < -1e-6) {
      throw Error("concave_qp: infeasible starting point");
    }
  }
  const double q0 = qval(G, g, start);

  // Accelerated projected-gradient warm start; the active-set refinement
  // below supplies the KKT guarantee, this phase just gets close cheaply.
  int pg_used = 0;
  if (settings.pg_phase && n >= 20 && g_norm > 1e-12) {
    const double step = 1.0 / (1.05 * g_norm);
    const int pg_iters = settings.pg_iterations > 0
                             ? settings.pg_iterations
                             : std::min(250, 30 + 2 * n);
    Vector x = start, xprev = start, y = start;
    double qx = q0;
    int stall = 0;
    for (int kk = 0; kk < pg_iters; ++kk) {
      ++pg_used;
      const Vector xn = project(X, y - step * (G * y + g));
      const double qn = qval(G, g, xn);
      if (qn > qx - 1e-14 * (1.0 + std::abs(qx))) {
        y = x;  // momentum restart
        xprev = x;
        if (++stall >= 4) break;
        continue;
      }
      if (qx - qn < 1e-12 * (1.0 + std::abs(qx))) {
        if (++stall >= 6) break;
      } else {
        stall = 0;
      }
      const double beta = kk / (kk + 3.0);
      y = xn + beta * (xn - xprev);
      xprev = x;
      x = xn;
      qx = qn;
    }
    if (X.has_eq()) x = project_equalities(X, x);
    if (X.min_slack(x) < -settings.feas_tol)
      x = clip_to_feasible_segment(X, start, x);
    if (qval(G, g, x) < q0) start = x;
  }

  const Rows rows = normalized_rows(X);
  const int max_iter = settings.max_iterations > 0 ? settings.max_iterations
                                                   : 50 * n + 2000;
  ActiveSetOutcome as = active_set_min(G, g, rows, start, settings.kkt_tol,
                                       max_iter, g_norm);

  QpResult res;
  res.x = as.x;
  res.value = 0.5 * as.x.dot(qp.H * as.x) + qp.c.dot(as.x);
  res.kkt_residual = as.kkt_residual;
  res.iterations = as.iterations + pg_used;
  res.converged = as.converged;
  res.unbounded = as.unbounded;

  const double v0 = 0.5 * x0.dot(qp.H * x0) + qp.c.dot(x0);
  if (res.value < v0 - 1e-12 * (1.0 + std::abs(v0)) ||
      !res.x.allFinite()) {
    res.x = x0;
    res.value = v0;
    res.converged = false;
  }
  return res;
}

QpResult maximize_linear(const Vector& c, const Polyhedron& X, const Vector& x0,
                         const QpSettings& settings) {
  ConcaveQp qp;
  qp.H = Matrix::Zero(X.dim(), X.dim());
  qp.c = c;
  QpSettings s = settings;
  s.pg_phase = false;
  return maximize(qp, X, x0, s);
}

}  // namespace qfrac
