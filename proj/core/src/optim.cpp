// core/src/optim.cpp

// Copyright 2026  Chanfuse Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "chanfuse/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace chanfuse {

const char* lbfgs_status_name(LbfgsStatus s) {
  switch (s) {
    case LbfgsStatus::kConverged: return "converged";
    case LbfgsStatus::kMaxIters: return "max_iters";
    case LbfgsStatus::kLineSearchFailed: return "line_search_failed";
  }
  return "unknown";
}

LbfgsResult lbfgs_minimize(const Objective& f, const GradientFn& g, const Eigen::VectorXd& x0,
                           const LbfgsConfig& cfg) {
  if (cfg.history < 1) throw std::invalid_argument("lbfgs: history must be >= 1");

  Eigen::VectorXd x = x0;
  double fx = f(x);
  Eigen::VectorXd grad = g(x);
  if (!std::isfinite(fx) || !grad.allFinite()) {
    throw std::runtime_error("lbfgs: non-finite objective or gradient at the start point");
  }

  struct Pair {
    Eigen::VectorXd s, y;
    double rho;
  };
  std::deque<Pair> pairs;

  LbfgsResult result;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    if (grad.norm() <= cfg.grad_tol) {
      result.x = x;
      result.fx = fx;
      result.status = LbfgsStatus::kConverged;
      result.iterations = iter;
      return result;
    }

    // Two-loop recursion for d = -H * grad.
    Eigen::VectorXd q = grad;
    std::vector<double> alpha(pairs.size());
    for (int i = static_cast<int>(pairs.size()) - 1; i >= 0; --i) {
      alpha[i] = pairs[i].rho * pairs[i].s.dot(q);
      q -= alpha[i] * pairs[i].y;
    }
    if (!pairs.empty()) {
      const Pair& last = pairs.back();
      q *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const double beta = pairs[i].rho * pairs[i].y.dot(q);
      q += (alpha[i] - beta) * pairs[i].s;
    }
    Eigen::VectorXd direction = -q;

    double dir_deriv = grad.dot(direction);
    if (dir_deriv >= 0.0) {
      // Not a descent direction (stale curvature); fall back to steepest descent.
      direction = -grad;
      dir_deriv = -grad.squaredNorm();
    }

    // Backtracking Armijo line search from a unit step. Failed trials shrink
    // by quadratic interpolation (safeguarded into [0.1 t, shrink t]), which
    // recovers from the huge first gradients of ill-scaled starts far faster
    // than plain halving.
    const auto interp_step = [&](double t, double ft) {
      const double denom = 2.0 * (ft - fx - dir_deriv * t);
      const double cand = denom > 0.0 ? -dir_deriv * t * t / denom : cfg.backtrack_shrink * t;
      return std::clamp(cand, 0.1 * t, cfg.backtrack_shrink * t);
    };

    double step = 1.0;
    double new_fx = 0.0;
    Eigen::VectorXd new_x;
    bool accepted = false;
    for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
      new_x = x + step * direction;
      new_fx = f(new_x);
      if (std::isfinite(new_fx) && new_fx <= fx + cfg.armijo_c * step * dir_deriv) {
        accepted = true;
        break;
      }
      step = std::isfinite(new_fx) ? interp_step(step, new_fx) : cfg.backtrack_shrink * step;
    }
    if (!accepted) {
      result.x = x;
      result.fx = fx;
      result.status = LbfgsStatus::kLineSearchFailed;
      result.iterations = iter;
      return result;
    }

    // One interpolation polish of the accepted step, kept within a window of
    // the accepted length. Exact for quadratics, so quadratic objectives
    // terminate in finitely many iterations; elsewhere it never trades a
    // healthy step for a minuscule one.
    {
      const double denom = 2.0 * (new_fx - fx - dir_deriv * step);
      if (denom > 0.0) {
        const double polished = -dir_deriv * step * step / denom;
        if (std::isfinite(polished) && polished >= 0.1 * step && polished <= 10.0 * step) {
          Eigen::VectorXd cand_x = x + polished * direction;
          const double cand_fx = f(cand_x);
          if (std::isfinite(cand_fx) && cand_fx < new_fx &&
              cand_fx <= fx + cfg.armijo_c * polished * dir_deriv) {
            step = polished;
            new_x = std::move(cand_x);
            new_fx = cand_fx;
          }
        }
      }
    }

    Eigen::VectorXd new_grad = g(new_x);
    Pair pair;
    pair.s = new_x - x;
    pair.y = new_grad - grad;
    const double sy = pair.s.dot(pair.y);
    if (sy > 1e-12) {
      pair.rho = 1.0 / sy;
      pairs.push_back(std::move(pair));
      if (static_cast<int>(pairs.size()) > cfg.history) pairs.pop_front();
    } else if (!pairs.empty()) {
      // Rejected curvature means the stored pairs describe a region the
      // iterate has left; age the memory so the direction cannot freeze.
      pairs.pop_front();
    }

    x = std::move(new_x);
    fx = new_fx;
    grad = std::move(new_grad);
  }

  result.x = x;
  result.fx = fx;
  result.status = grad.norm() <= cfg.grad_tol ? LbfgsStatus::kConverged : LbfgsStatus::kMaxIters;
  result.iterations = cfg.max_iters;
  return result;
}

Eigen::VectorXd finite_diff_grad(const Objective& f, const Eigen::VectorXd& x, double step) {
  if (step <= 0.0) throw std::invalid_argument("finite_diff_grad: step must be positive");
  Eigen::VectorXd grad(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double fp = f(probe);
    probe[i] = x[i] - step;
    const double fm = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw std::runtime_error("finite_diff_grad: non-finite evaluation");
    }
    grad[i] = (fp - fm) / (2.0 * step);
  }
  return grad;
}

}  // namespace chanfuse
