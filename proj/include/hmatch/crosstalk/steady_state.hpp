#pragma once

#include "hmatch/crosstalk/model.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_odeiv2.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace hmatch::crosstalk {

/// Two genuinely different stiff schemes: variable-order BDF multistep and
/// semi-implicit Bulirsch-Stoer extrapolation.  The second exists so steady
/// states can be cross-checked against an independent discretization.
enum class StiffMethod { bdf, extrapolation };

struct SolverOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  /// Convergence: max-norm of the derivative, relative to max(|state|_inf, 1).
  double residual_tol = 1e-9;
  double t_max = 1e7;
  /// Any concentration beyond this is treated as divergence.
  double state_cap = 1e12;
  double initial_dt = 1e-8;
  long max_steps = 2000000;
  /// Residual checks happen on a geometric time grid t *= checkpoint_factor.
  double first_checkpoint = 1e-2;
  double checkpoint_factor = 2.0;
  StiffMethod method = StiffMethod::bdf;
};

struct SteadyStateResult {
  StateVec state = StateVec::Zero();
  bool converged = false;
  double time = 0.0;
  long steps = 0;
  double residual = 0.0;
};

inline double relative_residual(const StateVec& s, const RateConstants& rc) {
  const StateVec f = derivatives(s, rc);
  const double scale = std::max(s.cwiseAbs().maxCoeff(), 1.0);
  return f.cwiseAbs().maxCoeff() / scale;
}

namespace detail {

inline void quiet_gsl_errors() {
  // GSL's default handler aborts the process; failures must surface as
  // status codes instead.  Thread-safe via C++ static initialization.
  static const bool off = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)off;
}

inline int gsl_rhs(double, const double y[], double f[], void* params) {
  const RateConstants& rc = *static_cast<const RateConstants*>(params);
  StateVec s;
  for (int i = 0; i < kNumStates; ++i) s[i] = y[i];
  const StateVec d = derivatives(s, rc);
  for (int i = 0; i < kNumStates; ++i) f[i] = d[i];
  return GSL_SUCCESS;
}

inline int gsl_jac(double, const double y[], double* dfdy, double dfdt[], void* params) {
  const RateConstants& rc = *static_cast<const RateConstants*>(params);
  StateVec s;
  for (int i = 0; i < kNumStates; ++i) s[i] = y[i];
  JacMat J;
  jacobian(s, rc, J);
  for (int i = 0; i < kNumStates; ++i) {
    dfdt[i] = 0.0;  // autonomous system
    for (int j = 0; j < kNumStates; ++j) dfdy[i * kNumStates + j] = J(i, j);
  }
  return GSL_SUCCESS;
}

}  // namespace detail

/// Integrates the model from the Table-2 initial conditions with an adaptive
/// stiff integrator until the relative derivative residual falls below
/// options.residual_tol, or the time/step/magnitude budget is hit.
inline SteadyStateResult solve_steady_state(const RateConstants& rc, const Feeding& feeding,
                                            const SolverOptions& options = {}) {
  detail::quiet_gsl_errors();

  SteadyStateResult result;
  result.state = initial_state(feeding);
  result.residual = relative_residual(result.state, rc);
  if (result.residual < options.residual_tol) {
    result.converged = true;
    return result;
  }

  gsl_odeiv2_system sys{detail::gsl_rhs, detail::gsl_jac, kNumStates,
                        const_cast<RateConstants*>(&rc)};
  const gsl_odeiv2_step_type* scheme =
      options.method == StiffMethod::bdf ? gsl_odeiv2_step_msbdf : gsl_odeiv2_step_bsimp;
  gsl_odeiv2_driver* drv = gsl_odeiv2_driver_alloc_y_new(&sys, scheme, options.initial_dt,
                                                         options.abs_tol, options.rel_tol);
  if (!drv) throw FitError("could not allocate stiff integrator");
  gsl_odeiv2_driver_set_nmax(drv, static_cast<unsigned long>(options.max_steps));

  double y[kNumStates];
  for (int i = 0; i < kNumStates; ++i) y[i] = result.state[i];

  double t = 0.0;
  bool failed = false;
  bool diverged = false;
  for (double tc = options.first_checkpoint; t < options.t_max;
       tc = std::min(tc * options.checkpoint_factor, options.t_max)) {
    const int status = gsl_odeiv2_driver_apply(drv, &t, tc, y);
    result.steps = static_cast<long>(drv->e->count);
    if (status != GSL_SUCCESS) {
      failed = true;
      break;
    }

    double max_abs = 0.0;
    bool finite = true;
    for (double v : y) {
      if (!std::isfinite(v)) {
        finite = false;
        break;
      }
      max_abs = std::max(max_abs, std::abs(v));
    }
    if (!finite || max_abs > options.state_cap) {
      diverged = true;
      break;
    }

    StateVec s;
    for (int i = 0; i < kNumStates; ++i) s[i] = y[i];
    const double res = relative_residual(s, rc);
    if (res < options.residual_tol) {
      result.state = s;
      result.converged = true;
      result.time = t;
      result.residual = res;
      gsl_odeiv2_driver_free(drv);
      return result;
    }
    if (result.steps >= options.max_steps || tc >= options.t_max) break;
  }
  gsl_odeiv2_driver_free(drv);

  for (int i = 0; i < kNumStates; ++i) result.state[i] = y[i];
  result.time = t;
  if (diverged || !result.state.allFinite()) {
    result.converged = false;
    result.residual = std::numeric_limits<double>::infinity();
    return result;
  }
  result.residual = relative_residual(result.state, rc);
  result.converged = !failed && result.residual < options.residual_tol;
  return result;
}

inline SteadyStateResult solve_steady_state(const Vec& x, const ExperimentSpec& experiment,
                                            const SolverOptions& options = {}) {
  return solve_steady_state(to_rate_constants(x, experiment), experiment.feeding, options);
}

}  // namespace hmatch::crosstalk
