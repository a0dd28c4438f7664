#pragma once

#include <array>
#include <cmath>
#include <algorithm>
#include <cstddef>
#include <limits>

#include <boost/numeric/odeint.hpp>

#include "mmo/error.hpp"

namespace mmo::detail {

template <std::size_t N>
using State = std::array<double, N>;

// Dormand–Prince 5(4) with error control, advanced one accepted step at a time
// so callers can inspect, reject and roll back individual steps.
template <std::size_t N>
class Stepper {
  using Base = boost::numeric::odeint::runge_kutta_dopri5<State<N>>;
  using Controlled = typename boost::numeric::odeint::result_of::make_controlled<Base>::type;

 public:
  Stepper(double absTol, double relTol, double maxStep, double minStep)
      : c_(boost::numeric::odeint::make_controlled(absTol, relTol, Base())), maxStep_(maxStep), minStep_(minStep) {}

  // One accepted step of at most |dt|; dt is updated with the next suggestion.
  template <class Sys>
  void step(const Sys& sys, State<N>& x, double& t, double& dt) {
    for (;;) {
      if (std::abs(dt) > maxStep_) dt = std::copysign(maxStep_, dt);
      if (c_.try_step(sys, x, t, dt) == boost::numeric::odeint::success) return;
      if (std::abs(dt) < minStep_) throw Error(ErrorKind::StepSizeUnderflow, "step size fell below " + std::to_string(minStep_));
    }
  }

  // Accepted step that never passes `end`; lands on it exactly when clamped.
  template <class Sys>
  bool step_until(const Sys& sys, State<N>& x, double& t, double& dt, double end) {
    const double remaining = end - t;
    bool clamped = false;
    if (std::abs(dt) >= std::abs(remaining)) {
      dt = remaining;
      clamped = true;
    }
    const double scale = std::max(std::abs(t), std::abs(end));
    step(sys, x, t, dt);
    // a clamped step that was accepted without shrinking lands on `end` up to rounding
    if (clamped && std::abs(t - end) <= 8 * std::numeric_limits<double>::epsilon() * scale) {
      t = end;
      return true;
    }
    return false;
  }

  // Must be called whenever the state is modified outside of step().
  void reset() { c_.reset(); }

 private:
  Controlled c_;
  double maxStep_;
  double minStep_;
};

}  // namespace mmo::detail
