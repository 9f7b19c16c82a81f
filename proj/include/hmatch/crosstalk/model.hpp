#pragma once

#include "hmatch/common.hpp"
#include "hmatch/crosstalk/tables.hpp"

#include <cmath>

namespace hmatch::crosstalk {

using StateVec = Eigen::Matrix<double, kNumStates, 1>;
using JacMat = Eigen::Matrix<double, kNumStates, kNumStates>;

/// Full set of dimensional rate parameters for one experimental condition.
/// De-aliased so that every Table-3 denominator equals 1; k3 and k25a carry
/// the 1/lambda volume correction; k16 is tied to 0.3*k16a so that the X
/// production term stays non-negative (CTR1* <= 0.3 by conservation).
struct RateConstants {
  double k1 = 0, k1a = 0, k2 = 0, k2a = 0, k2b = 0, k2c = 0;
  double k3 = 0, k3a = 0, k3auxin = 0;
  double k4 = 0, k5 = 0;
  double k6 = 0, k6a = 0, k7 = 0;
  double k8 = 0, k9 = 0;
  double k10 = 0, k10a = 0, k11 = 0;
  double k12 = 0, k12a = 0, k13 = 0;
  double k14 = 0, k15 = 0;
  double k16 = 0, k16a = 0, k17 = 0;
  double k18 = 0, k18a = 0, k19 = 0;
  double k20a = 0, k20b = 0, k20c = 0;
  double k1v21 = 0;
  double k22a = 0;
  double k1v23 = 0, k1v24 = 0;
  double k25a = 0, k25b = 0;
  double VIAA = 0, KmIAA = 0;
  double VCK = 0, KmCK = 0;
  double VACC = 0, KmACC = 0;
  // Wild-type values of the mutant-controlled parameters, kept so that a
  // base set can be specialised to any mutant.
  double k6w = 0, k11w = 0, k6m = 0, k11m = 0;
  double lambda = kLambda;
};

inline void validate_point(const Vec& x, int expected_dim) {
  if (x.size() != expected_dim)
    throw ValidationError("parameter point has dimension " + std::to_string(x.size()) +
                          ", expected " + std::to_string(expected_dim));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || x[i] < -1.0 || x[i] > 1.0)
      throw ValidationError("parameter coordinate " + std::to_string(i) + " = " +
                            std::to_string(x[i]) + " outside [-1,1]");
  }
}

/// Applies the mutant-specific overrides of k6 and k11 to a wild-type set.
inline RateConstants apply_mutant(RateConstants rc, Mutant mutant) {
  switch (mutant) {
    case Mutant::wild_type:
      rc.k6 = rc.k6w;
      rc.k11 = rc.k11w;
      break;
    case Mutant::pls:
      rc.k6 = 0.0;
      rc.k11 = rc.k11w;
      break;
    case Mutant::plsox:
      rc.k6 = rc.k6m * rc.k6w;
      rc.k11 = rc.k11w;
      break;
    case Mutant::etr1:
      rc.k6 = rc.k6w;
      rc.k11 = rc.k11m * rc.k11w;
      break;
    case Mutant::pls_etr1:
      rc.k6 = 0.0;
      rc.k11 = rc.k11m * rc.k11w;
      break;
  }
  return rc;
}

/// Expands a scaled point into wild-type dimensional rate constants.
inline RateConstants base_rate_constants(const Vec& x) {
  validate_point(x, kNumInputs);
  double r[kNumInputs];
  for (int i = 0; i < kNumInputs; ++i) r[i] = input_to_natural(i, x[i]);

  RateConstants rc;
  rc.k2 = rc.k4 = rc.k7 = rc.k8 = rc.k10 = rc.k12 = rc.k14 = 1.0;
  rc.k16a = rc.k18a = rc.k1v21 = rc.k1v23 = rc.k1v24 = 1.0;

  rc.k1 = r[in_k1];
  rc.k1a = r[in_k1a_k2] * rc.k2;
  rc.k2a = r[in_k2a_k2] * rc.k2;
  rc.k2b = r[in_k2b];
  rc.k2c = r[in_k2c];
  rc.k3 = r[in_k3_k2] * rc.k2 / rc.lambda;
  rc.k3a = r[in_k3a_k2] * rc.k2;
  rc.k3auxin = r[in_k3auxin];
  rc.k5 = r[in_k5_k4] * rc.k4;
  rc.k6a = r[in_k6a];
  rc.k6w = r[in_k6w_k7] * rc.k7;
  rc.k9 = r[in_k9_k8] * rc.k8;
  rc.k10a = r[in_k10a_k10] * rc.k10;
  rc.k11w = r[in_k11_k10] * rc.k10;
  rc.k12a = r[in_k12a_k12] * rc.k12;
  rc.k13 = r[in_k13_k12] * rc.k12;
  rc.k15 = r[in_k15_k14] * rc.k14;
  rc.k16 = 0.3 * rc.k16a;
  rc.k17 = r[in_k17_k16a] * rc.k16a;
  rc.k18 = r[in_k18];
  rc.k19 = r[in_k19_k18a] * rc.k18a;
  rc.k20a = r[in_k20a_k1v21] * rc.k1v21;
  rc.k20b = r[in_k20b];
  rc.k20c = r[in_k20c];
  rc.k22a = r[in_k22a_k1v23] * rc.k1v23;
  rc.k25a = r[in_k25a_k1v24] * rc.k1v24 / rc.lambda;
  rc.k25b = r[in_k25b];
  rc.KmIAA = rc.KmCK = rc.KmACC = 1.0;
  rc.VIAA = r[in_VIAA] * rc.k2 * (rc.KmIAA + 1.0);
  rc.VCK = r[in_VCK] * rc.k18a * (rc.KmCK + 1.0);
  rc.VACC = r[in_VACC] * rc.k12 * (rc.KmACC + 1.0);
  rc.k6m = r[in_k6m];
  rc.k11m = r[in_k11m];

  return apply_mutant(rc, Mutant::wild_type);
}

/// Dimensional rate constants for a scaled point under one experiment.
inline RateConstants to_rate_constants(const Vec& x, const ExperimentSpec& e) {
  return apply_mutant(base_rate_constants(x), e.mutant);
}

inline StateVec initial_state(const Feeding& f) {
  StateVec s;
  for (int i = 0; i < kNumStates; ++i) s[i] = kInitialConcentration[static_cast<std::size_t>(i)];
  s[s_IAA] = f.auxin ? 1.0 : 0.0;
  s[s_cytokinin] = f.cytokinin ? 1.0 : 0.0;
  s[s_ACC] = f.ethylene ? 1.0 : 0.0;
  return s;
}

/// Right-hand side of the 18 model equations.
inline StateVec derivatives(const StateVec& s, const RateConstants& c) {
  const double A = s[s_Auxin], X = s[s_X], PLSp = s[s_PLSp];
  const double Ra = s[s_Ra], Ras = s[s_Ras];
  const double CK = s[s_CK], ET = s[s_ET], PLSm = s[s_PLSm];
  const double Re = s[s_Re], Res = s[s_Res];
  const double CTR1 = s[s_CTR1], CTR1s = s[s_CTR1s];
  const double PIN1m = s[s_PIN1m], PIN1pi = s[s_PIN1pi], PIN1pm = s[s_PIN1pm];
  const double IAA = s[s_IAA], cyto = s[s_cytokinin], ACC = s[s_ACC];

  StateVec f;
  f[s_Auxin] = c.k1a / (1.0 + X / c.k1) + c.k2 +
               c.k2a * (ET / (1.0 + CK / c.k2b)) * (PLSp / (c.k2c + PLSp)) +
               c.VIAA * IAA / (c.KmIAA + IAA) -
               (c.k3 + c.k3a * PIN1pm / (c.k3auxin + A)) * A;
  f[s_X] = c.k16 - c.k16a * CTR1s - c.k17 * X;
  f[s_PLSp] = c.k8 * PLSm - c.k9 * PLSp;
  const double ra_flux = c.k4 * A * Ra - c.k5 * Ras;
  f[s_Ra] = -ra_flux;
  f[s_Ras] = ra_flux;
  f[s_CK] = c.k18a / (1.0 + A / c.k18) - c.k19 * CK + c.VCK * cyto / (c.KmCK + cyto);
  f[s_ET] = c.k12 + c.k12a * A * CK - c.k13 * ET + c.VACC * ACC / (c.KmACC + ACC);
  f[s_PLSm] = c.k6 * Ras / (1.0 + ET / c.k6a) - c.k7 * PLSm;
  const double re_flux = c.k11 * Res * ET - (c.k10 + c.k10a * PLSp) * Re;
  f[s_Re] = re_flux;
  f[s_Res] = -re_flux;
  const double ctr_flux = c.k14 * Res * CTR1 - c.k15 * CTR1s;
  f[s_CTR1] = -ctr_flux;
  f[s_CTR1s] = ctr_flux;
  f[s_PIN1m] = (c.k20a / (c.k20b + CK)) * X * (A / (c.k20c + A)) - c.k1v21 * PIN1m;
  const double pin_back = c.k25a * PIN1pm / (1.0 + A / c.k25b);
  f[s_PIN1pi] = c.k22a * PIN1m - c.k1v23 * PIN1pi - c.k1v24 * PIN1pi + pin_back;
  f[s_PIN1pm] = c.k1v24 * PIN1pi - pin_back;
  f[s_IAA] = 0.0;
  f[s_cytokinin] = 0.0;
  f[s_ACC] = 0.0;
  return f;
}

/// Analytic Jacobian of derivatives() with respect to the state.
inline void jacobian(const StateVec& s, const RateConstants& c, JacMat& J) {
  const double A = s[s_Auxin], X = s[s_X], PLSp = s[s_PLSp];
  const double Ra = s[s_Ra], Ras = s[s_Ras];
  const double CK = s[s_CK], ET = s[s_ET];
  const double Re = s[s_Re], Res = s[s_Res];
  const double CTR1 = s[s_CTR1];
  const double PIN1pm = s[s_PIN1pm];
  const double IAA = s[s_IAA], cyto = s[s_cytokinin], ACC = s[s_ACC];

  J.setZero();

  // d[Auxin]/dt
  {
    const double ux = 1.0 + X / c.k1;
    const double uck = 1.0 + CK / c.k2b;
    const double upls = c.k2c + PLSp;
    const double ua = c.k3auxin + A;
    J(s_Auxin, s_Auxin) = -c.k3 - c.k3a * PIN1pm * c.k3auxin / (ua * ua);
    J(s_Auxin, s_X) = -c.k1a / (c.k1 * ux * ux);
    J(s_Auxin, s_PLSp) = c.k2a * (ET / uck) * c.k2c / (upls * upls);
    J(s_Auxin, s_CK) = -c.k2a * ET * PLSp / (upls * c.k2b * uck * uck);
    J(s_Auxin, s_ET) = c.k2a * PLSp / (uck * upls);
    J(s_Auxin, s_PIN1pm) = -c.k3a * A / ua;
    J(s_Auxin, s_IAA) = c.VIAA * c.KmIAA / ((c.KmIAA + IAA) * (c.KmIAA + IAA));
  }
  // d[X]/dt
  J(s_X, s_X) = -c.k17;
  J(s_X, s_CTR1s) = -c.k16a;
  // d[PLSp]/dt
  J(s_PLSp, s_PLSm) = c.k8;
  J(s_PLSp, s_PLSp) = -c.k9;
  // d[Ra]/dt, d[Ra*]/dt
  J(s_Ra, s_Auxin) = -c.k4 * Ra;
  J(s_Ra, s_Ra) = -c.k4 * A;
  J(s_Ra, s_Ras) = c.k5;
  J(s_Ras, s_Auxin) = c.k4 * Ra;
  J(s_Ras, s_Ra) = c.k4 * A;
  J(s_Ras, s_Ras) = -c.k5;
  // d[CK]/dt
  {
    const double ua = 1.0 + A / c.k18;
    J(s_CK, s_Auxin) = -c.k18a / (c.k18 * ua * ua);
    J(s_CK, s_CK) = -c.k19;
    J(s_CK, s_cytokinin) = c.VCK * c.KmCK / ((c.KmCK + cyto) * (c.KmCK + cyto));
  }
  // d[ET]/dt
  J(s_ET, s_Auxin) = c.k12a * CK;
  J(s_ET, s_CK) = c.k12a * A;
  J(s_ET, s_ET) = -c.k13;
  J(s_ET, s_ACC) = c.VACC * c.KmACC / ((c.KmACC + ACC) * (c.KmACC + ACC));
  // d[PLSm]/dt
  {
    const double uet = 1.0 + ET / c.k6a;
    J(s_PLSm, s_Ras) = c.k6 / uet;
    J(s_PLSm, s_ET) = -c.k6 * Ras / (c.k6a * uet * uet);
    J(s_PLSm, s_PLSm) = -c.k7;
  }
  // d[Re]/dt, d[Re*]/dt
  {
    const double decay = c.k10 + c.k10a * PLSp;
    J(s_Re, s_Res) = c.k11 * ET;
    J(s_Re, s_ET) = c.k11 * Res;
    J(s_Re, s_PLSp) = -c.k10a * Re;
    J(s_Re, s_Re) = -decay;
    J(s_Res, s_Res) = -c.k11 * ET;
    J(s_Res, s_ET) = -c.k11 * Res;
    J(s_Res, s_PLSp) = c.k10a * Re;
    J(s_Res, s_Re) = decay;
  }
  // d[CTR1]/dt, d[CTR1*]/dt
  J(s_CTR1, s_Res) = -c.k14 * CTR1;
  J(s_CTR1, s_CTR1) = -c.k14 * Res;
  J(s_CTR1, s_CTR1s) = c.k15;
  J(s_CTR1s, s_Res) = c.k14 * CTR1;
  J(s_CTR1s, s_CTR1) = c.k14 * Res;
  J(s_CTR1s, s_CTR1s) = -c.k15;
  // d[PIN1m]/dt
  {
    const double uck = c.k20b + CK;
    const double ua = c.k20c + A;
    J(s_PIN1m, s_X) = (c.k20a / uck) * (A / ua);
    J(s_PIN1m, s_Auxin) = (c.k20a / uck) * X * c.k20c / (ua * ua);
    J(s_PIN1m, s_CK) = -(c.k20a / (uck * uck)) * X * (A / ua);
    J(s_PIN1m, s_PIN1m) = -c.k1v21;
  }
  // d[PIN1pi]/dt, d[PIN1pm]/dt
  {
    const double ua = 1.0 + A / c.k25b;
    const double dback_dA = -c.k25a * PIN1pm / (c.k25b * ua * ua);
    const double dback_dpm = c.k25a / ua;
    J(s_PIN1pi, s_PIN1m) = c.k22a;
    J(s_PIN1pi, s_PIN1pi) = -(c.k1v23 + c.k1v24);
    J(s_PIN1pi, s_PIN1pm) = dback_dpm;
    J(s_PIN1pi, s_Auxin) = dback_dA;
    J(s_PIN1pm, s_PIN1pi) = c.k1v24;
    J(s_PIN1pm, s_PIN1pm) = -dback_dpm;
    J(s_PIN1pm, s_Auxin) = -dback_dA;
  }
  // Fed chemicals are constant reservoirs: zero rows.
}

/// Measured PIN concentration: volume-weighted average over membrane and
/// cytosol compartments.
inline double measured_pin(const StateVec& s, double lambda = kLambda) {
  return (s[s_PIN1pm] + lambda * s[s_PIN1pi]) / (1.0 + lambda);
}

inline double measured_chemical(const StateVec& s, Chemical chem, double lambda = kLambda) {
  switch (chem) {
    case Chemical::auxin: return s[s_Auxin];
    case Chemical::ck: return s[s_CK];
    case Chemical::et: return s[s_ET];
    case Chemical::plsm: return s[s_PLSm];
    case Chemical::pin: return measured_pin(s, lambda);
  }
  return 0.0;
}

}  // namespace hmatch::crosstalk
