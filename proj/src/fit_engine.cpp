#include <algorithm>
#include <cmath>
#include <limits>

#include "sivspec/fit.hpp"

namespace sivspec {

namespace {

VectorX clamp_to_box(VectorX p, const VectorX& lo, const VectorX& hi) {
  for (Eigen::Index j = 0; j < p.size(); ++j) p[j] = std::clamp(p[j], lo[j], hi[j]);
  return p;
}

}  // namespace

FitResult levenberg_marquardt(const CurveModel& model, const CurveData& data,
                              const LMOptions& opts) {
  validate(data);
  const Eigen::Index n = model.init.size();
  const Eigen::Index m = data.x.size();
  if (n == 0) throw ConfigError("fit: model has no parameters");
  if (model.param_names.size() != static_cast<std::size_t>(n))
    throw ConfigError("fit: parameter name list does not match init size");
  if (m < n) throw ConfigError("fit: fewer data points than parameters");
  const bool weighted = data.sigma.size() != 0;

  auto residuals = [&](const VectorX& p) -> ArrayX {
    ArrayX r = model.eval(data.x, p) - data.y;
    if (weighted) r /= data.sigma;
    return r;
  };

  auto cost_of = [](const ArrayX& r) -> Real {
    const Real c = r.matrix().squaredNorm();
    return std::isfinite(c) ? c : std::numeric_limits<Real>::infinity();
  };

  const VectorX lo = model.lower.size() ? model.lower
                                        : VectorX::Constant(n, -std::numeric_limits<Real>::infinity());
  const VectorX hi = model.upper.size() ? model.upper
                                        : VectorX::Constant(n, std::numeric_limits<Real>::infinity());
  for (Eigen::Index j = 0; j < n; ++j)
    if (!(lo[j] <= hi[j])) throw ConfigError("fit: lower bound above upper bound");

  // Central differences, shrinking one-sidedly at an active bound.
  auto jacobian = [&](const VectorX& p) -> MatrixX {
    MatrixX jac(m, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const Real h = std::max(1e-6 * std::fabs(p[j]), 1e-9);
      VectorX pp = p, pm = p;
      pp[j] = std::min(p[j] + h, hi[j]);
      pm[j] = std::max(p[j] - h, lo[j]);
      const Real span = pp[j] - pm[j];
      if (span <= 0) {
        jac.col(j).setZero();
        continue;
      }
      jac.col(j) = (residuals(pp) - residuals(pm)).matrix() / span;
    }
    return jac;
  };

  FitResult out;
  out.model = model.name;

  VectorX p = clamp_to_box(model.init, lo, hi);
  ArrayX r = residuals(p);
  Real cost = cost_of(r);
  if (!std::isfinite(cost))
    throw ConfigError("fit: model is not finite at the initial parameters");
  out.log.push_back({0, cost, 0.0, 0.0});

  MatrixX jac = jacobian(p);
  MatrixX jtj = jac.transpose() * jac;
  VectorX g = jac.transpose() * r.matrix();
  Real lambda = opts.lambda_init_scale * jtj.diagonal().maxCoeff();
  if (!(lambda > 0)) lambda = opts.lambda_init_scale;

  int iter = 0;
  for (iter = 1; iter <= opts.max_iterations; ++iter) {
    MatrixX damped = jtj;
    damped.diagonal().array() += lambda;
    Eigen::LDLT<MatrixX> ldlt(damped);
    if (ldlt.info() != Eigen::Success) {
      lambda *= 10;
      continue;
    }
    const VectorX delta = ldlt.solve(-g);
    const VectorX p_trial = clamp_to_box(p + delta, lo, hi);
    const VectorX step = p_trial - p;
    const Real rel_step = step.norm() / std::max(p.norm(), Real(1e-30));

    const ArrayX r_trial = residuals(p_trial);
    const Real cost_trial = cost_of(r_trial);

    if (cost_trial < cost) {
      const Real rel_decrease = (cost - cost_trial) / std::max(cost, Real(1e-300));
      p = p_trial;
      r = r_trial;
      cost = cost_trial;
      out.log.push_back({iter, cost, lambda, step.norm()});
      lambda = std::max(lambda / 10, Real(1e-18));
      jac = jacobian(p);
      jtj = jac.transpose() * jac;
      g = jac.transpose() * r.matrix();
      if (rel_step < opts.step_tol && rel_decrease < opts.cost_tol) {
        out.converged = true;
        break;
      }
    } else {
      // No improvement: if the proposal is already a vanishing step with a
      // vanishing cost change we are at the optimum, otherwise dampen more.
      if (rel_step < opts.step_tol &&
          cost_trial - cost <= opts.cost_tol * std::max(cost, Real(1e-300))) {
        out.converged = true;
        break;
      }
      lambda *= 10;
      if (lambda > 1e18) break;
    }
  }
  out.iterations = std::min(iter, opts.max_iterations);
  out.residual_norm = std::sqrt(cost);

  const Eigen::Index dof = m - n;
  out.chi2_per_dof = dof > 0 ? cost / dof : 0.0;
  if (dof == 0) out.flags.push_back("zero_dof");
  if (!out.converged) out.flags.push_back("not_converged");

  // Covariance from the undamped normal equations at the solution.
  jac = jacobian(p);
  jtj = jac.transpose() * jac;
  MatrixX cov;
  Eigen::FullPivLU<MatrixX> lu(jtj);
  if (lu.isInvertible()) {
    cov = lu.inverse();
  } else {
    out.flags.push_back("rank_deficient");
    out.converged = false;
    if (!out.has_flag("not_converged")) out.flags.push_back("not_converged");
    cov = jtj.completeOrthogonalDecomposition().pseudoInverse();
  }
  if (!weighted && dof > 0) cov *= cost / dof;
  out.covariance = cov;

  out.params.reserve(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    FitParam fp;
    fp.value = p[j];
    const Real var = cov(j, j);
    fp.sigma = var > 0 ? std::sqrt(var) : 0.0;
    fp.unit = model.param_units.size() == static_cast<std::size_t>(n) ? model.param_units[j] : "";
    out.params.emplace_back(model.param_names[j], fp);
  }
  return out;
}

}  // namespace sivspec
