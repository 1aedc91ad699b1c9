#pragma once

#include <random>

#include "cfisac/kernel.hpp"
#include "cfisac/types.hpp"

namespace testing_support {

using cfisac::CMat;
using cfisac::CVec;
using cfisac::RMat;
using cfisac::RVec;

inline CMat random_cmat(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  CMat A(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) A(i, j) = {n(rng), n(rng)};
  return A;
}

inline CVec random_cvec(std::mt19937_64& rng, int n) { return random_cmat(rng, n, 1).col(0); }

inline RMat random_rmat(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> d(0.0, 1.0);
  RMat A(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) A(i, j) = d(rng);
  return A;
}

inline RVec random_rvec(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> d(0.0, 1.0);
  RVec v(n);
  for (int i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

// Small kernel spec shaped like a local subproblem: one ball per beam
// block, affine and quadratic rows with slack, gamma in the objective.
inline cfisac::SubproblemSpec random_spec(std::mt19937_64& rng, int m = 3, int d = 4,
                                          int affine_rows = 4, int quad_rows = 0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  cfisac::SubproblemSpec s;
  s.n = 2 * m * d;
  s.c = random_rvec(rng, s.n);
  s.has_gamma = true;
  s.p = 0.5 + u(rng);
  s.q = u(rng) < 0.5 ? 0.0 : 2.0 * u(rng);
  s.c0 = u(rng);
  double bmin = 1e300;
  for (int i = 0; i < affine_rows + quad_rows; ++i) {
    cfisac::KernelRow r;
    r.a = random_rvec(rng, s.n);
    if (i >= affine_rows) {
      r.F = random_rmat(rng, 2, s.n);
      r.f = random_rvec(rng, 2);
    }
    r.b = 0.2 + u(rng);
    r.d = u(rng);
    r.has_slack = true;
    bmin = std::min(bmin, r.b);
    s.rows.push_back(std::move(r));
  }
  s.slack_penalty = 5.0 * s.p / bmin;
  for (int k = 0; k < d; ++k) s.balls.push_back({2 * m * k, 2 * m, 0.5 + u(rng)});
  return s;
}

}  // namespace testing_support
