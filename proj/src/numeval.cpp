#include "fieldforms/numeval.hpp"

#include <cmath>

namespace fieldforms {

namespace {

// central-difference evaluators for a numeric candidate and its formal
// partials up to second order
void bind_numeric(FloatBinding& b, const std::string& name,
                  const std::function<double(const std::vector<double>&)>& fn,
                  int arity, double h) {
  b.functions[name] = fn;
  for (int s = 1; s <= arity; ++s) {
    b.functions[tagged_name(name, {s})] = [fn, s, h](const std::vector<double>& a) {
      std::vector<double> hi = a, lo = a;
      hi[s - 1] += h;
      lo[s - 1] -= h;
      return (fn(hi) - fn(lo)) / (2 * h);
    };
    for (int t = s; t <= arity; ++t) {
      b.functions[tagged_name(name, {s, t})] =
          [fn, s, t, h](const std::vector<double>& a) {
            if (s == t) {
              std::vector<double> hi = a, lo = a;
              hi[s - 1] += h;
              lo[s - 1] -= h;
              return (fn(hi) - 2 * fn(a) + fn(lo)) / (h * h);
            }
            std::vector<double> pp = a, pm = a, mp = a, mm = a;
            pp[s - 1] += h; pp[t - 1] += h;
            pm[s - 1] += h; pm[t - 1] -= h;
            mp[s - 1] -= h; mp[t - 1] += h;
            mm[s - 1] -= h; mm[t - 1] -= h;
            return (fn(pp) - fn(pm) - fn(mp) + fn(mm)) / (4 * h * h);
          };
    }
  }
}

}  // namespace

ResidualStats eval_residuals(const EquationSystem& sys, const CandidateSolution& sol,
                             const GridSpec& grid) {
  for (const auto& ax : grid.axes) {
    if (ax.points < 2) throw DomainError("grid axis needs at least 2 points");
    if (!(ax.lo < ax.hi)) throw DomainError("grid axis needs lo < hi");
  }
  // substitute closed-form candidates symbolically
  std::vector<Expr> residuals = sys.residuals;
  for (const auto& [name, body] : sol.closed) {
    for (auto& r : residuals) r = r.subs_function(name, sys.base, body);
  }
  // remaining unknowns must have numeric evaluators
  for (const auto& name : sys.unknowns) {
    if (sol.closed.count(name) || sol.numeric.count(name)) continue;
    for (const auto& r : residuals)
      for (const auto& fn : r.function_names())
        if (fn == name)
          throw EvalError("no candidate supplied for unknown " + name);
  }

  double min_spacing = 1e300;
  for (const auto& ax : grid.axes)
    min_spacing = std::min(min_spacing, (ax.hi - ax.lo) / (ax.points - 1));

  FloatBinding base;
  for (const auto& [name, fn] : sol.numeric)
    bind_numeric(base, name, fn, static_cast<int>(sys.base.size()),
                 min_spacing / 8);

  ResidualStats out;
  std::vector<int> idx(grid.axes.size(), 0);
  bool done = grid.axes.empty();
  while (!done) {
    FloatBinding b = base;
    std::vector<double> pt;
    for (size_t a = 0; a < grid.axes.size(); ++a) {
      const auto& ax = grid.axes[a];
      double v = ax.lo + (ax.hi - ax.lo) * idx[a] / (ax.points - 1);
      b.symbols[ax.coordinate] = v;
      pt.push_back(v);
    }
    for (const auto& r : residuals) {
      double v = std::abs(r.eval_float(b));
      if (v > out.max_abs) {
        out.max_abs = v;
        out.argmax = pt;
      }
    }
    ++out.points;
    size_t pos = 0;
    while (pos < idx.size() && ++idx[pos] == grid.axes[pos].points) {
      idx[pos] = 0;
      ++pos;
    }
    done = pos == idx.size();
  }
  return out;
}

SopdeIntegration integrate_sopde_k1(const BundleModel& m, const KVectorField& xi,
                                    const std::vector<double>& init, double t0,
                                    double t1, int steps, double tol) {
  if (xi.fields.size() != 1) throw DomainError("integrate_sopde_k1 needs k = 1");
  if (steps < 1) throw DomainError("step count must be >= 1");
  const ChartPtr& chart = m.chart;
  int dim = chart->dim();
  if (static_cast<int>(init.size()) != dim)
    throw DomainError("initial state has wrong dimension");

  auto eval_field = [&](const std::vector<double>& state) {
    FloatBinding b;
    for (int c = 0; c < dim; ++c) b.symbols[chart->coord(c)] = state[c];
    std::vector<double> out(dim);
    for (int c = 0; c < dim; ++c) out[c] = xi.fields[0].comp[c].eval_float(b);
    return out;
  };

  SopdeIntegration out;
  double h = (t1 - t0) / steps;
  std::vector<double> state = init;
  out.traj.times.push_back(t0);
  out.traj.states.push_back(state);
  for (int s = 0; s < steps; ++s) {
    auto k1 = eval_field(state);
    std::vector<double> tmp(dim);
    for (int c = 0; c < dim; ++c) tmp[c] = state[c] + 0.5 * h * k1[c];
    auto k2 = eval_field(tmp);
    for (int c = 0; c < dim; ++c) tmp[c] = state[c] + 0.5 * h * k2[c];
    auto k3 = eval_field(tmp);
    for (int c = 0; c < dim; ++c) tmp[c] = state[c] + h * k3[c];
    auto k4 = eval_field(tmp);
    for (int c = 0; c < dim; ++c)
      state[c] += h / 6 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
    out.traj.times.push_back(t0 + (s + 1) * h);
    out.traj.states.push_back(state);
  }

  // first-prolongation property: the x-rate equals the v-component, checked
  // by central differences along the trajectory
  double max_err = 0;
  int n = m.n;
  for (size_t s = 1; s + 1 < out.traj.states.size(); ++s) {
    for (int i = 1; i <= n; ++i) {
      int xi_ix = ix_x(m, i);
      int vi_ix = (m.kind == ModelKind::tangent)
                      ? chart->index_of(sym("v" + std::to_string(i)))
                      : ix_v(m, i, 1);
      double rate = (out.traj.states[s + 1][xi_ix] - out.traj.states[s - 1][xi_ix]) /
                    (2 * h);
      max_err = std::max(max_err, std::abs(rate - out.traj.states[s][vi_ix]));
    }
  }
  out.max_prolongation_error = max_err;
  out.report.add("dx/dt = v along the trajectory (central differences)",
                 max_err < tol, "max error " + std::to_string(max_err));
  return out;
}

}  // namespace fieldforms
