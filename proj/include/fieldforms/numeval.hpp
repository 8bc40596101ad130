// Numeric verification: residual evaluation of derived equation systems on
// grids, and RK4 integration of k = 1 SOPDEs.

#pragma once

#include <functional>

#include "fieldforms/fieldeq.hpp"

namespace fieldforms {

struct GridAxis {
  Sym coordinate;
  double lo = 0, hi = 1;
  int points = 2;
};

struct GridSpec {
  std::vector<GridAxis> axes;  // points >= 2, lo < hi
};

struct CandidateSolution {
  // closed forms: unknown name -> body over the system's base coordinates
  std::map<std::string, Expr> closed;
  // numeric evaluators; derivatives via central differences, h = spacing/8
  std::map<std::string, std::function<double(const std::vector<double>&)>> numeric;
};

struct ResidualStats {
  double max_abs = 0;
  std::vector<double> argmax;
  long points = 0;
};

ResidualStats eval_residuals(const EquationSystem& sys, const CandidateSolution& sol,
                             const GridSpec& grid);

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;  // chart-ordered components
};

struct SopdeIntegration {
  Trajectory traj;
  Report report;
  double max_prolongation_error = 0;
};

// RK4 on the first leg of a k = 1 field over a tangent-model chart; the
// report checks the first-prolongation property dx/dt = v along the way
SopdeIntegration integrate_sopde_k1(const BundleModel& m, const KVectorField& xi,
                                    const std::vector<double>& init, double t0,
                                    double t1, int steps, double tol);

}  // namespace fieldforms
