#include "sivspec/lambda_system.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "sivspec/fine_structure.hpp"

namespace sivspec {

void validate_density_matrix(const DensityMatrix3& rho) {
  const Real tol = 1e-10;
  if ((rho - rho.adjoint()).norm() > tol)
    throw NumericalError("density matrix: not Hermitian within 1e-10");
  if (std::fabs(rho.trace().real() - 1.0) > tol || std::fabs(rho.trace().imag()) > tol)
    throw NumericalError("density matrix: trace differs from 1 beyond 1e-10");
  for (int i = 0; i < 3; ++i) {
    const Real p = rho(i, i).real();
    if (p < -tol || p > 1 + tol)
      throw NumericalError("density matrix: population outside [0, 1] beyond 1e-10");
  }
}

namespace {

// GKLS right-hand side: -i[H, rho] + sum_c (c rho c^+ - 1/2 {c^+c, rho}).
Matrix3c apply_generator(const Matrix3c& h, const std::vector<Matrix3c>& collapse,
                         const Matrix3c& rho) {
  const Complex im(0, 1);
  Matrix3c out = -im * (h * rho - rho * h);
  for (const auto& c : collapse) {
    const Matrix3c cdc = c.adjoint() * c;
    out += c * rho * c.adjoint() - 0.5 * (cdc * rho + rho * cdc);
  }
  return out;
}

// Coordinates of a Hermitian matrix in the real 9-vector parameterization
// (three populations, then Re/Im of the three upper-triangle coherences).
Eigen::Matrix<Real, 9, 1> to_coords(const Matrix3c& m) {
  Eigen::Matrix<Real, 9, 1> x;
  x << m(0, 0).real(), m(1, 1).real(), m(2, 2).real(), m(0, 1).real(), m(0, 1).imag(),
      m(0, 2).real(), m(0, 2).imag(), m(1, 2).real(), m(1, 2).imag();
  return x;
}

Matrix3c from_coords(const Eigen::Matrix<Real, 9, 1>& x) {
  Matrix3c m;
  m(0, 0) = x[0];
  m(1, 1) = x[1];
  m(2, 2) = x[2];
  m(0, 1) = Complex(x[3], x[4]);
  m(1, 0) = std::conj(m(0, 1));
  m(0, 2) = Complex(x[5], x[6]);
  m(2, 0) = std::conj(m(0, 2));
  m(1, 2) = Complex(x[7], x[8]);
  m(2, 1) = std::conj(m(1, 2));
  return m;
}

Matrix3c hermitian_basis(int k) {
  const Complex im(0, 1);
  Matrix3c e = Matrix3c::Zero();
  switch (k) {
    case 0: e(0, 0) = 1; break;
    case 1: e(1, 1) = 1; break;
    case 2: e(2, 2) = 1; break;
    case 3: e(0, 1) = 1; e(1, 0) = 1; break;
    case 4: e(0, 1) = im; e(1, 0) = -im; break;
    case 5: e(0, 2) = 1; e(2, 0) = 1; break;
    case 6: e(0, 2) = im; e(2, 0) = -im; break;
    case 7: e(1, 2) = 1; e(2, 1) = 1; break;
    case 8: e(1, 2) = im; e(2, 1) = -im; break;
  }
  return e;
}

}  // namespace

SteadyState steady_state_lambda(const LambdaConfig& cfg) {
  validate(cfg);

  if (cfg.omega_pump_ghz == 0 && cfg.omega_probe_ghz == 0) {
    // No optical drive: the excited state empties and each ground population
    // is separately conserved, so the stationary state is not unique.  The
    // equal ground mixture is the conventional answer.
    Matrix3c rho = Matrix3c::Zero();
    rho(0, 0) = 0.5;
    rho(1, 1) = 0.5;
    return {rho, 0.0};
  }

  // Rotating frame over {g1, g2, e}: the pump addresses g1-e at detuning d1,
  // the probe addresses g2-e at detuning d2.  Two-photon resonance
  // (d1 == d2) makes one ground superposition dark.
  const Real d1 = two_pi * cfg.detuning_pump_ghz;
  const Real d2 = two_pi * cfg.detuning_probe_ghz;
  const Real o1 = two_pi * cfg.omega_pump_ghz;
  const Real o2 = two_pi * cfg.omega_probe_ghz;
  const Real gamma = two_pi * cfg.gamma_e_ghz;
  const Real kappa = 0.5 * two_pi * cfg.gamma_gs_ghz;  // coherence decays at 2*kappa

  Matrix3c h = Matrix3c::Zero();
  h(2, 2) = -d1;
  h(1, 1) = d2 - d1;
  h(2, 0) = o1 / 2;
  h(0, 2) = o1 / 2;
  h(2, 1) = o2 / 2;
  h(1, 2) = o2 / 2;

  std::vector<Matrix3c> collapse;
  Matrix3c c1 = Matrix3c::Zero();
  c1(0, 2) = std::sqrt(cfg.branching * gamma);
  collapse.push_back(c1);
  Matrix3c c2 = Matrix3c::Zero();
  c2(1, 2) = std::sqrt((1 - cfg.branching) * gamma);
  collapse.push_back(c2);
  if (kappa > 0) {
    Matrix3c cd = Matrix3c::Zero();
    cd(0, 0) = -std::sqrt(kappa);
    cd(1, 1) = std::sqrt(kappa);
    collapse.push_back(cd);
  }

  // Real 9x9 generator assembled column by column from the Hermitian basis.
  Eigen::Matrix<Real, 9, 9> gen;
  for (int k = 0; k < 9; ++k)
    gen.col(k) = to_coords(apply_generator(h, collapse, hermitian_basis(k)));

  // One population row is redundant (the population block is rate-
  // conserving); replace the excited-state row with the trace condition.
  Eigen::Matrix<Real, 9, 9> sys = gen;
  sys.row(2).setZero();
  sys(2, 0) = 1;
  sys(2, 1) = 1;
  sys(2, 2) = 1;
  Eigen::Matrix<Real, 9, 1> rhs = Eigen::Matrix<Real, 9, 1>::Zero();
  rhs[2] = 1;

  Eigen::FullPivLU<Eigen::Matrix<Real, 9, 9>> lu(sys);
  if (!lu.isInvertible())
    throw NumericalError("steady_state_lambda: stationary state is not unique");
  const Eigen::Matrix<Real, 9, 1> x = lu.solve(rhs);

  const Real scale = 1.0 + gen.norm() * x.norm();
  const Real residual = (gen * x).norm() / scale;
  if (residual > 1e-10)
    throw NumericalError("steady_state_lambda: solve residual above 1e-10");

  SteadyState out{from_coords(x), residual};
  validate_density_matrix(out.rho);
  return out;
}

Spectrum cpt_scan(const LambdaConfig& cfg, const ArrayX& probe_detunings_ghz) {
  validate(cfg);
  if (probe_detunings_ghz.size() < 2)
    throw ConfigError("cpt_scan: need at least 2 probe detunings");

  Spectrum out;
  out.frequency_ghz = probe_detunings_ghz;
  out.intensity = ArrayX(probe_detunings_ghz.size());
  LambdaConfig point = cfg;
  for (Eigen::Index i = 0; i < probe_detunings_ghz.size(); ++i) {
    point.detuning_probe_ghz = probe_detunings_ghz[i];
    out.intensity[i] = steady_state_lambda(point).rho(2, 2).real();
  }
  validate(out);
  out.meta["kind"] = "cpt";
  return out;
}

}  // namespace sivspec
