#pragma once

#include <limits>

#include "dualsplit/model/time_split.hpp"
#include "dualsplit/numerics/errors.hpp"
#include "dualsplit/sampling/distribution.hpp"
#include "dualsplit/solvers/config.hpp"

namespace dualsplit::solvers {

/// Curvature and Lipschitz data of the split problem. grad_lipschitz is the
/// Lipschitz constant of the dual gradient, eig_max(Hy) / sigma_f; because the
/// stage cost is separable this same constant certifies the sampled updates
/// independently of the sampling probabilities. dual_strong_convexity is
/// eig_min(Hy) / L_f.
struct ProblemConstants {
  double sigma_f = 0.0;
  double L_f = 0.0;
  double grad_lipschitz = 0.0;
  double eig_max_Hy = 0.0;
  double eig_min_Hy = 0.0;
  double dual_strong_convexity = 0.0;
};

inline ProblemConstants compute_constants(const model::SplitProblem& s) {
  ProblemConstants c;
  c.sigma_f = s.sigma_f;
  c.L_f = s.L_f;
  c.eig_max_Hy = s.eig_max_Hy;
  c.eig_min_Hy = s.eig_min_Hy;
  c.grad_lipschitz = s.LgradF;
  c.dual_strong_convexity = s.eig_min_Hy / s.L_f;
  return c;
}

/// Sampler-dependent constant max_t eig(Hy) / (pi_t sigma_f). The printed
/// theory uses the smallest eigenvalue of Hy'Hy here while the deterministic
/// bound uses the largest; both variants are available and eig_max is the
/// conservative default. Infinite when some stage has zero probability.
inline double l_star(const ProblemConstants& c, const sampling::Distribution& dist,
                     StepConstantVariant variant = StepConstantVariant::eig_max) {
  double min_prob = std::numeric_limits<double>::infinity();
  for (double p : dist.probs) min_prob = std::min(min_prob, p);
  const double eig = variant == StepConstantVariant::eig_max ? c.eig_max_Hy : c.eig_min_Hy;
  if (!(min_prob > 0.0)) return std::numeric_limits<double>::infinity();
  return eig / (min_prob * c.sigma_f);
}

enum class RhoVariant { thm1, thm2 };

struct RhoCertificate {
  double rho = 0.0;
  bool certificate_valid = false;  // rho < 1
};

/// Contraction factor of the multistage variance-reduced scheme.
///
/// thm1:  rho = 1 / (tau sigma_F T (1 - 4 tau L))
///            + 4 tau L (T+1) / (T (1 - 4 tau L))
/// thm2:  rho = L_f / (tau T (1 - 4 tau L))
///            + 4 tau L (T+1) / (T (1 - 4 tau L))
///
/// `L_const` is the sampled-component Lipschitz constant (L_Pi or its dual
/// counterpart); `sigma_or_Lf` is sigma_F for thm1 and L_f for thm2. Requires
/// 0 < tau < 1/(4 L_const); otherwise StepTooLarge.
inline RhoCertificate compute_rho(double tau, int T, double L_const, double sigma_or_Lf,
                                  RhoVariant variant) {
  if (!(tau > 0.0)) throw InvalidParameter("tau must be positive");
  if (T < 1) throw InvalidParameter("T must be at least 1");
  if (!(L_const > 0.0)) throw InvalidParameter("L constant must be positive");
  if (!(tau < 1.0 / (4.0 * L_const)))
    throw StepTooLarge("tau >= 1/(4 L) in compute_rho");
  const double x = 4.0 * tau * L_const;
  const double denom = static_cast<double>(T) * (1.0 - x);
  RhoCertificate cert;
  const double second = x * static_cast<double>(T + 1) / denom;
  if (variant == RhoVariant::thm1) {
    if (!(sigma_or_Lf > 0.0)) throw InvalidParameter("sigma_F must be positive");
    cert.rho = 1.0 / (tau * sigma_or_Lf * denom) + second;
  } else {
    if (!(sigma_or_Lf > 0.0)) throw InvalidParameter("L_f must be positive");
    cert.rho = sigma_or_Lf / (tau * denom) + second;
  }
  cert.certificate_valid = cert.rho < 1.0;
  return cert;
}

}  // namespace dualsplit::solvers
