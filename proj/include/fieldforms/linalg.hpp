// Dense linear algebra over the exact rational-function field.

#pragma once

#include <optional>
#include <vector>

#include "fieldforms/expr.hpp"

namespace fieldforms {

using ExprVec = std::vector<Expr>;
using ExprMat = std::vector<ExprVec>;

ExprMat mat_identity(int n);
ExprMat mat_mul(const ExprMat& a, const ExprMat& b);
Expr mat_det(const ExprMat& a);
// throws SingularError when det = 0 as a rational function
ExprMat mat_inverse(const ExprMat& a);

// Generic (function-field) rank by exact Gaussian elimination, cross-checked
// by rank at random rational specializations; a persistent disagreement is an
// internal error, not a silent resolution.
int symbolic_rank(const ExprMat& a);

// General solution of A x = b over the function field.
struct LinearSolution {
  ExprVec particular;
  std::vector<ExprVec> nullspace;  // basis of ker A
};
std::optional<LinearSolution> solve_linear(const ExprMat& a, const ExprVec& b);

}  // namespace fieldforms
