#pragma once

#include "desflow/modelir.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace desflow {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterLimit, Singular };

const char* lp_status_name(LpStatus s);

/// Simplex basis snapshot for warm starts.
struct Basis {
  std::vector<int> basic;          // one column per row
  std::vector<std::uint8_t> stat;  // per column: 0 basic, 1 lower, 2 upper, 3 free
};

struct LpOptions {
  int max_iter = 500000;
  double tol = 1e-7;           // primal/dual tolerance
  double pivot_tol = 1e-10;
  int refactor_every = 100;    // eta updates between refactorizations
  int bland_after = 1000;      // consecutive degenerate pivots
};

struct LpSolution {
  LpStatus status = LpStatus::Singular;
  Eigen::VectorXd x;        // structural variables
  Eigen::VectorXd y;        // row duals
  Eigen::VectorXd reduced;  // reduced costs of structural variables
  double objective = 0;
  double dual_objective = 0;
  int iterations = 0;
  Basis basis;
};

/// Bounded-variable revised simplex over the linear view of the model
/// (throws if nonlinear blocks or complementarity pairs are present).
/// Deterministic: identical inputs give identical pivot sequences.
LpSolution solve_lp(const ModelIR& m, const Basis* hint = nullptr,
                    const LpOptions& opts = {});

}  // namespace desflow
