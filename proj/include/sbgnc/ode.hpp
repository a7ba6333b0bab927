#pragma once

#include <boost/numeric/odeint.hpp>
#include <boost/numeric/odeint/external/eigen/eigen.hpp>

#include <cmath>
#include <exception>
#include <string>

#include "sbgnc/core.hpp"

namespace sbgnc::ode {

namespace odeint = boost::numeric::odeint;

/// Classical fixed-step RK4 over [t0, t1] with `steps` equal steps.
template <class State, class F>
void rk4(F&& f, State& x, double t0, double t1, int steps) {
  if (steps < 1) throw DomainError("rk4 needs at least one step");
  odeint::runge_kutta4<State, double, State, double, odeint::vector_space_algebra> stepper;
  const double dt = (t1 - t0) / steps;
  auto sys = [&f](const State& s, State& ds, double t) { ds = f(s, t); };
  double t = t0;
  for (int i = 0; i < steps; ++i) {
    stepper.do_step(sys, x, t, dt);
    t = (i + 1 == steps) ? t1 : t + dt;
  }
}

struct AdaptiveOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  double max_step = 3.6;
};

/// Embedded Dormand-Prince 5(4) with error control; the interval is split into
/// chunks no longer than `max_step`.
template <class State, class F>
void dopri5(F&& f, State& x, double t0, double t1, const AdaptiveOptions& opt = {}) {
  using Stepper = odeint::runge_kutta_dopri5<State, double, State, double, odeint::vector_space_algebra>;
  auto sys = [&f](const State& s, State& ds, double t) { ds = f(s, t); };
  const double span = t1 - t0;
  if (!(span > 0.0)) throw DomainError("integration interval must be positive");
  const int chunks = std::max(1, static_cast<int>(std::ceil(span / opt.max_step - 1e-12)));
  const double h = span / chunks;
  try {
    for (int i = 0; i < chunks; ++i) {
      const double a = t0 + i * h;
      const double b = (i + 1 == chunks) ? t1 : t0 + (i + 1) * h;
      odeint::integrate_adaptive(odeint::make_controlled(opt.abs_tol, opt.rel_tol, Stepper()), sys, x, a, b, b - a);
    }
  } catch (const std::exception& e) {
    throw NumericalError(std::string("adaptive integration failed: ") + e.what());
  }
  if (!x.allFinite()) throw NumericalError("adaptive integration produced non-finite state");
}

}  // namespace sbgnc::ode
