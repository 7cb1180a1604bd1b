// core/include/chanfuse/optim.hpp

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

#ifndef CHANFUSE_OPTIM_HPP_
#define CHANFUSE_OPTIM_HPP_

#include <functional>

#include <Eigen/Core>

namespace chanfuse {

struct LbfgsConfig {
  int history = 7;
  int max_iters = 100;
  double grad_tol = 1e-6;          // 2-norm of the gradient
  double armijo_c = 1e-4;
  double backtrack_shrink = 0.5;
  int max_backtracks = 40;
};

enum class LbfgsStatus { kConverged, kMaxIters, kLineSearchFailed };

const char* lbfgs_status_name(LbfgsStatus s);

struct LbfgsResult {
  Eigen::VectorXd x;
  double fx = 0.0;
  LbfgsStatus status = LbfgsStatus::kConverged;
  int iterations = 0;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;
using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Limited-memory BFGS minimizer with two-loop recursion and backtracking
/// Armijo line search. Curvature pairs with s'y <= 1e-12 are skipped to keep
/// the implicit Hessian approximation positive definite. Every accepted step
/// strictly decreases f. Throws on a non-finite f or g at x0.
LbfgsResult lbfgs_minimize(const Objective& f, const GradientFn& g, const Eigen::VectorXd& x0,
                           const LbfgsConfig& cfg = {});

/// Central-difference gradient, (f(x + h e_i) - f(x - h e_i)) / (2 h).
/// The verification oracle used throughout the test suites.
Eigen::VectorXd finite_diff_grad(const Objective& f, const Eigen::VectorXd& x, double step = 1e-6);

}  // namespace chanfuse

#endif  // CHANFUSE_OPTIM_HPP_
