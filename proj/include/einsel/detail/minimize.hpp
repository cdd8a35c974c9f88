#pragma once

// Thin RAII wrapper over GSL's nmsimplex2 for small unconstrained problems.

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

namespace einsel::detail {

struct MinimizeResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  bool converged = false;
};

struct MinimizeOptions {
  std::size_t max_iterations = 5000;
  double size_tolerance = 1e-10;
};

using Objective = std::function<double(const std::vector<double>&)>;

inline MinimizeResult nelder_mead(const Objective& f, const std::vector<double>& start, const std::vector<double>& step,
                                  MinimizeOptions opt = {}) {
  const std::size_t n = start.size();
  struct Ctx {
    const Objective* f;
    std::size_t n;
    std::vector<double> scratch;
  } ctx{&f, n, std::vector<double>(n)};

  gsl_multimin_function fn;
  fn.n = n;
  fn.params = &ctx;
  fn.f = [](const gsl_vector* v, void* p) -> double {
    auto* c = static_cast<Ctx*>(p);
    for (std::size_t i = 0; i < c->n; ++i) c->scratch[i] = gsl_vector_get(v, i);
    const double y = (*c->f)(c->scratch);
    return std::isfinite(y) ? y : std::numeric_limits<double>::max();
  };

  using VecPtr = std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)>;
  VecPtr x0(gsl_vector_alloc(n), gsl_vector_free);
  VecPtr ss(gsl_vector_alloc(n), gsl_vector_free);
  for (std::size_t i = 0; i < n; ++i) {
    gsl_vector_set(x0.get(), i, start[i]);
    gsl_vector_set(ss.get(), i, step[i]);
  }
  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n), gsl_multimin_fminimizer_free);
  gsl_multimin_fminimizer_set(s.get(), &fn, x0.get(), ss.get());

  MinimizeResult r;
  for (r.iterations = 0; r.iterations < opt.max_iterations; ++r.iterations) {
    if (gsl_multimin_fminimizer_iterate(s.get()) != 0) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), opt.size_tolerance) == GSL_SUCCESS) {
      r.converged = true;
      break;
    }
  }
  r.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.x[i] = gsl_vector_get(s->x, i);
  r.value = s->fval;
  return r;
}

}  // namespace einsel::detail
