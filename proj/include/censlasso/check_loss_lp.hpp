#pragma once

#include "censlasso/types.hpp"

namespace censlasso {

// min_b  sum_i rho_{tau_i}(response_i - design_i' b)
//
// Solved through the bounded dual
//   max_a response' a   s.t.  design' a = design' (1 - tau),  0 <= a <= 1
// with a Mehrotra predictor-corrector (Frisch-Newton) interior-point method,
// followed by a crossover to the optimal vertex so that coefficients pinned
// by a basic row with a single nonzero entry come out exactly.
struct CheckLossProblem {
  Matrix design;   // m x q
  Vector response; // m
  Vector tau;      // m, each in (0, 1)
};

struct InteriorPointOptions {
  int max_iter = 100;
  // Stop when the duality gap falls below tol * (1 + |objective|).
  double tol = 1e-11;
  double step_fraction = 0.99995;
};

struct CheckLossSolution {
  Vector coef;
  Vector dual;             // a, feasible for the dual up to rounding
  double objective = 0.0;  // primal objective at coef
  double dual_objective = 0.0;
  int iterations = 0;
  bool converged = false;
  bool vertex = false;     // crossover succeeded
  double gap() const { return objective - dual_objective; }
};

CheckLossSolution solve_check_loss(const CheckLossProblem& problem, const InteriorPointOptions& options = {});

double check_loss_objective(const CheckLossProblem& problem, const Vector& coef);

}  // namespace censlasso
