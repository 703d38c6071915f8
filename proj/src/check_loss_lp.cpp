#include "censlasso/check_loss_lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "censlasso/errors.hpp"
#include "censlasso/losses.hpp"

namespace censlasso {

namespace {

// Largest alpha in [0, inf) keeping v + alpha dv >= 0.
double max_step(const Vector& v, const Vector& dv) {
  double alpha = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  }
  return alpha;
}

Matrix weighted_gram(const Matrix& x, const Vector& q) {
  Matrix xq = x.array().colwise() * q.array();
  Matrix g = x.transpose() * xq;
  return g;
}

Vector solve_spd(const Matrix& m, const Vector& rhs) {
  Eigen::LDLT<Matrix> ldlt(m);
  if (ldlt.info() == Eigen::Success) {
    Vector out = ldlt.solve(rhs);
    if (out.allFinite()) return out;
  }
  const double ridge = 1e-12 * std::max(1.0, m.diagonal().cwiseAbs().maxCoeff());
  Matrix reg = m;
  reg.diagonal().array() += ridge;
  return reg.ldlt().solve(rhs);
}

double dual_objective(const CheckLossProblem& pb, const Vector& a) {
  return pb.response.dot(a - (Vector::Ones(a.size()) - pb.tau));
}

// Crossover: pick the q rows closest (in hyperplane distance) to the interior
// point, solve for the vertex they define, keep it if it is no worse.
bool purify(const CheckLossProblem& pb, CheckLossSolution& sol) {
  const Eigen::Index m = pb.design.rows();
  const Eigen::Index q = pb.design.cols();
  if (q == 0) return true;
  const Vector r = pb.response - pb.design * sol.coef;
  std::vector<double> score(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const double norm = pb.design.row(i).norm();
    score[static_cast<std::size_t>(i)] =
        norm > 0.0 ? std::abs(r[i]) / norm : std::numeric_limits<double>::infinity();
  }
  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return score[static_cast<std::size_t>(a)] < score[static_cast<std::size_t>(b)]; });

  // Greedy rank-revealing selection with Gram-Schmidt on row vectors.
  std::vector<int> basis;
  Matrix ortho(q, q);
  for (int i : order) {
    if (static_cast<Eigen::Index>(basis.size()) == q) break;
    if (!std::isfinite(score[static_cast<std::size_t>(i)])) break;
    Vector v = pb.design.row(i).transpose();
    const double norm0 = v.norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < basis.size(); ++k) {
        v -= ortho.col(static_cast<Eigen::Index>(k)).dot(v) * ortho.col(static_cast<Eigen::Index>(k));
      }
    }
    const double nv = v.norm();
    if (nv <= 1e-9 * norm0) continue;
    ortho.col(static_cast<Eigen::Index>(basis.size())) = v / nv;
    basis.push_back(i);
  }
  if (static_cast<Eigen::Index>(basis.size()) != q) return false;

  // Rows with a single nonzero entry pin their coefficient exactly.
  Vector coef = Vector::Zero(q);
  std::vector<char> fixed(static_cast<std::size_t>(q), 0);
  std::vector<int> rest_rows;
  for (int i : basis) {
    Eigen::Index nz = -1, count = 0;
    for (Eigen::Index j = 0; j < q; ++j) {
      if (pb.design(i, j) != 0.0) {
        nz = j;
        ++count;
      }
    }
    if (count == 1 && !fixed[static_cast<std::size_t>(nz)]) {
      fixed[static_cast<std::size_t>(nz)] = 1;
      coef[nz] = pb.response[i] / pb.design(i, nz);
    } else {
      rest_rows.push_back(i);
    }
  }
  std::vector<int> rest_cols;
  for (Eigen::Index j = 0; j < q; ++j) {
    if (!fixed[static_cast<std::size_t>(j)]) rest_cols.push_back(static_cast<int>(j));
  }
  if (rest_rows.size() != rest_cols.size()) return false;
  if (!rest_rows.empty()) {
    const auto k = static_cast<Eigen::Index>(rest_rows.size());
    Matrix a(k, k);
    Vector b(k);
    for (Eigen::Index u = 0; u < k; ++u) {
      const int i = rest_rows[static_cast<std::size_t>(u)];
      double rhs = pb.response[i];
      for (Eigen::Index j = 0; j < q; ++j) {
        if (fixed[static_cast<std::size_t>(j)]) rhs -= pb.design(i, j) * coef[j];
      }
      b[u] = rhs;
      for (Eigen::Index v = 0; v < k; ++v) a(u, v) = pb.design(i, rest_cols[static_cast<std::size_t>(v)]);
    }
    Eigen::FullPivLU<Matrix> lu(a);
    if (!lu.isInvertible()) return false;
    const Vector sub = lu.solve(b);
    if (!sub.allFinite()) return false;
    for (Eigen::Index v = 0; v < k; ++v) coef[rest_cols[static_cast<std::size_t>(v)]] = sub[v];
  }
  const double f = check_loss_objective(pb, coef);
  if (!(f <= sol.objective + 1e-9 * (1.0 + std::abs(sol.objective)))) return false;
  sol.coef = coef;
  sol.objective = f;
  sol.vertex = true;
  return true;
}

}  // namespace

double check_loss_objective(const CheckLossProblem& pb, const Vector& coef) {
  const Vector r = pb.response - pb.design * coef;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) acc += check_loss(pb.tau[i], r[i]);
  return acc;
}

CheckLossSolution solve_check_loss(const CheckLossProblem& pb, const InteriorPointOptions& opt) {
  const Eigen::Index m = pb.design.rows();
  const Eigen::Index q = pb.design.cols();
  if (pb.response.size() != m || pb.tau.size() != m) {
    throw Error(ErrorCode::DimensionMismatch, "check-loss problem: response/tau length must match design rows");
  }
  if (m == 0) throw Error(ErrorCode::DegenerateWeights, "check-loss problem has no rows");
  if ((pb.tau.array() <= 0.0).any() || (pb.tau.array() >= 1.0).any()) {
    throw Error(ErrorCode::InvalidSpec, "check-loss problem: every tau must lie in (0, 1)");
  }

  const Matrix& X = pb.design;  // A = X'
  const Vector& c = pb.response;
  CheckLossSolution sol;

  if (q == 0) {
    sol.coef = Vector::Zero(0);
    sol.dual = Vector::Ones(m) - pb.tau;
    sol.objective = check_loss_objective(pb, sol.coef);
    sol.dual_objective = sol.objective;
    sol.converged = true;
    sol.vertex = true;
    return sol;
  }

  Vector x = Vector::Ones(m) - pb.tau;  // dual QR variable a
  Vector s = pb.tau;                    // 1 - x
  Vector y = solve_spd(X.transpose() * X, X.transpose() * c);
  Vector r = c - X * y;
  const double kappa = std::max(r.cwiseAbs().mean(), 1e-8);
  Vector z = (-r).cwiseMax(0.0).array() + kappa;
  Vector w = r.cwiseMax(0.0).array() + kappa;

  const double beta = opt.step_fraction;
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    const double gap = x.dot(z) + s.dot(w);
    const double fobj = check_loss_objective(pb, y);
    if (gap <= opt.tol * (1.0 + std::abs(fobj))) {
      sol.converged = true;
      break;
    }
    const Vector rd = c - X * y - w + z;
    const Vector q_diag = (z.array() / x.array() + w.array() / s.array()).inverse().matrix();
    const Matrix gram = weighted_gram(X, q_diag);
    Eigen::LDLT<Matrix> ldlt(gram);
    const bool ok = ldlt.info() == Eigen::Success;
    const auto solve = [&](const Vector& rhs) -> Vector {
      if (ok) {
        Vector out = ldlt.solve(rhs);
        if (out.allFinite()) return out;
      }
      return solve_spd(gram, rhs);
    };

    // Affine-scaling predictor.
    Vector v = rd + w - z;
    Vector dy = solve(X.transpose() * (q_diag.array() * v.array()).matrix());
    Vector dx = (q_diag.array() * (v - X * dy).array()).matrix();
    Vector ds = -dx;
    Vector dz = (-z.array() - (z.array() / x.array()) * dx.array()).matrix();
    Vector dw = (-w.array() - (w.array() / s.array()) * ds.array()).matrix();

    double ap = std::min({1.0, max_step(x, dx), max_step(s, ds)});
    double ad = std::min({1.0, max_step(z, dz), max_step(w, dw)});
    const double mu_aff = (x + ap * dx).dot(z + ad * dz) + (s + ap * ds).dot(w + ad * dw);
    const double sigma = std::pow(mu_aff / gap, 3.0);
    const double mu = sigma * gap / static_cast<double>(2 * m);

    // Mehrotra corrector.
    const Vector t1 = (mu - x.array() * z.array() - dx.array() * dz.array()).matrix();
    const Vector t2 = (mu - s.array() * w.array() - ds.array() * dw.array()).matrix();
    v = rd - (t2.array() / s.array()).matrix() + (t1.array() / x.array()).matrix();
    dy = solve(X.transpose() * (q_diag.array() * v.array()).matrix());
    dx = (q_diag.array() * (v - X * dy).array()).matrix();
    ds = -dx;
    dz = ((t1.array() - z.array() * dx.array()) / x.array()).matrix();
    dw = ((t2.array() - w.array() * ds.array()) / s.array()).matrix();

    ap = std::min(1.0, beta * std::min(max_step(x, dx), max_step(s, ds)));
    ad = std::min(1.0, beta * std::min(max_step(z, dz), max_step(w, dw)));
    if (!(ap > 0.0) || !(ad > 0.0) || !dy.allFinite()) break;
    x += ap * dx;
    s += ap * ds;
    y += ad * dy;
    z += ad * dz;
    w += ad * dw;
  }

  sol.iterations = it;
  sol.coef = y;
  sol.dual = x;
  sol.objective = check_loss_objective(pb, y);
  sol.dual_objective = dual_objective(pb, x);
  purify(pb, sol);
  return sol;
}

}  // namespace censlasso
