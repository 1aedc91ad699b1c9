#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "cfisac/types.hpp"

namespace cfisac {

/// One convex inequality over the real variables x (and gamma, slack):
///   ||F x + f||^2 + a^T x + b gamma - s <= d
/// F may be empty (an affine row). With has_slack the row owns a slack
/// variable s >= 0 that is penalized in the objective.
struct KernelRow {
  RMat F;
  RVec f;
  RVec a;
  double b = 0.0;
  double d = 0.0;
  bool has_slack = true;
};

/// ||x[offset .. offset+length)||^2 <= radius_sq.
struct KernelBall {
  int offset = 0;
  int length = 0;
  double radius_sq = 1.0;
};

/// maximize c^T x + p gamma - (q/2)(gamma - c0)^2 - penalty * sum s + offset
/// subject to the rows and balls.
struct SubproblemSpec {
  int n = 0;  // real variables in x
  RVec c;
  bool has_gamma = false;
  double p = 0.0;
  double q = 0.0;
  double c0 = 0.0;
  double slack_penalty = 0.0;
  double offset = 0.0;
  std::vector<KernelRow> rows;
  std::vector<KernelBall> balls;

  int slack_count() const;
};

enum class SolveStatus { kOptimal, kInaccurate };

std::string_view to_string(SolveStatus s);

struct KernelParams {
  int max_iterations = 200;  // Newton steps over all centring rounds
  double gap_tol = 1e-8;       // relative to 1 + |objective|
  double residual_tol = 1e-8;  // relative to 1 + ||grad objective||
};

struct SubproblemSolution {
  RVec x;
  double gamma = 0.0;
  std::vector<double> slack;  // one per row; 0 for rows without a slack
  double objective = 0.0;
  SolveStatus status = SolveStatus::kInaccurate;
  int iterations = 0;
  // Barrier value before and after each Newton step, at that step's
  // barrier parameter.
  std::vector<double> merit_before;
  std::vector<double> merit_after;
};

struct KernelPoint {
  RVec x;
  double gamma = 0.0;
  std::vector<double> slack;  // one per row
};

/// Validates the spec (dimensions, q >= 0, positive radii). Throws
/// std::invalid_argument.
void validate_spec(const SubproblemSpec& spec);

/// Left-hand side minus right-hand side of a row, without its slack.
double row_value(const KernelRow& row, const RVec& x, double gamma);

double objective_value(const SubproblemSpec& spec, const RVec& x, double gamma,
                       const std::vector<double>& slack);

/// Strictly feasible point: x = 0 (or the warm start pulled inside the balls),
/// gamma = c0 clamped into the bounds set by slack-free gamma rows, each
/// slack inflated past its row's violation.
KernelPoint feasible_start(const SubproblemSpec& spec, const std::optional<KernelPoint>& warm = {});

SubproblemSolution solve(const SubproblemSpec& spec, const std::optional<KernelPoint>& warm = {},
                         const KernelParams& params = {});

}  // namespace cfisac
