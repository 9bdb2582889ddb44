#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "dualsplit/numerics/errors.hpp"
#include "dualsplit/sampling/rng.hpp"

namespace dualsplit::sampling {

enum class DistributionKind { uniform, poisson, pareto, custom, adaptive };

inline std::string to_string(DistributionKind k) {
  switch (k) {
    case DistributionKind::uniform: return "uniform";
    case DistributionKind::poisson: return "poisson";
    case DistributionKind::pareto: return "pareto";
    case DistributionKind::custom: return "custom";
    case DistributionKind::adaptive: return "adaptive";
  }
  return "?";
}

/// Probability vector over horizon indices {0..N}. probs sums to 1; zero
/// entries are allowed (stages whose probability decayed to nothing are
/// simply never sampled).
struct Distribution {
  DistributionKind kind = DistributionKind::uniform;
  std::vector<double> probs;

  std::size_t horizon() const { return probs.empty() ? 0 : probs.size() - 1; }
};

/// Parameters for the parametric kinds. Defaults follow the convention
/// rate = N/4, shape = 1.5, scale = N/4 (the reference experiments do not pin
/// them down, so they are plain configuration values).
struct DistributionParams {
  double rate = -1.0;   // poisson; -1 means "use N/4"
  double shape = 1.5;   // pareto
  double scale = -1.0;  // pareto; -1 means "use N/4"
  std::vector<double> weights;  // custom
};

namespace detail {
inline void normalize(std::vector<double>& p) {
  double sum = 0.0;
  for (double x : p) sum += x;
  if (!(sum > 0.0)) throw InvalidParameter("distribution weights sum to zero");
  for (double& x : p) x /= sum;
}
}  // namespace detail

/// Evaluates the kind's density at t = 0..N and normalizes to a probability
/// vector. `adaptive` starts uniform and is reshaped online by adapt().
inline Distribution make_distribution(DistributionKind kind, const DistributionParams& params,
                                      std::size_t N) {
  Distribution dist;
  dist.kind = kind;
  dist.probs.assign(N + 1, 0.0);
  switch (kind) {
    case DistributionKind::uniform:
    case DistributionKind::adaptive:
      for (double& x : dist.probs) x = 1.0 / static_cast<double>(N + 1);
      return dist;
    case DistributionKind::poisson: {
      const double rate = params.rate > 0.0 ? params.rate
                          : params.rate == -1.0 ? std::max(1.0, static_cast<double>(N) / 4.0)
                                                : params.rate;
      if (!(rate > 0.0)) throw InvalidParameter("poisson rate must be positive");
      // log-mass to stay stable for large t, then exponentiate and normalize
      double log_fact = 0.0;
      for (std::size_t t = 0; t <= N; ++t) {
        if (t > 0) log_fact += std::log(static_cast<double>(t));
        dist.probs[t] = std::exp(-rate + static_cast<double>(t) * std::log(rate) - log_fact);
      }
      detail::normalize(dist.probs);
      return dist;
    }
    case DistributionKind::pareto: {
      const double shape = params.shape;
      const double scale = params.scale > 0.0 ? params.scale
                           : params.scale == -1.0 ? std::max(1.0, static_cast<double>(N) / 4.0)
                                                  : params.scale;
      if (!(shape > 0.0) || !(scale > 0.0))
        throw InvalidParameter("pareto shape and scale must be positive");
      // generalized Pareto density with location 0 evaluated at the integers
      for (std::size_t t = 0; t <= N; ++t) {
        const double z = 1.0 + shape * static_cast<double>(t) / scale;
        dist.probs[t] = std::pow(z, -(1.0 / shape + 1.0)) / scale;
      }
      detail::normalize(dist.probs);
      return dist;
    }
    case DistributionKind::custom: {
      if (params.weights.size() != N + 1)
        throw InvalidParameter("custom weights must have N+1 entries");
      for (double w : params.weights)
        if (w < 0.0 || !std::isfinite(w))
          throw InvalidParameter("custom weights must be finite and nonnegative");
      dist.probs = params.weights;
      detail::normalize(dist.probs);
      return dist;
    }
  }
  throw InvalidParameter("unknown distribution kind");
}

/// Draws an index by inverse CDF. Never returns an index with zero
/// probability: a zero-width bin cannot contain the uniform draw.
inline std::size_t sample(const Distribution& dist, Rng& rng) {
  const double u = rng.next_double();
  double cum = 0.0;
  std::size_t last_positive = 0;
  bool seen_positive = false;
  for (std::size_t t = 0; t < dist.probs.size(); ++t) {
    const double pt = dist.probs[t];
    if (pt > 0.0) {
      last_positive = t;
      seen_positive = true;
    }
    cum += pt;
    if (u < cum && pt > 0.0) return t;
  }
  if (!seen_positive) throw InvalidParameter("distribution has no positive mass");
  return last_positive;  // u landed in the rounding gap at the top of the CDF
}

/// Redistribution rule for the adaptive scenario: every stage whose
/// multiplier change fell below the threshold gives up half its probability;
/// each existing neighbor receives a quarter of the old value, and at the
/// horizon ends the single neighbor receives the full half so mass is
/// conserved. All qualifying stages are updated simultaneously from a
/// snapshot of the input, so the result is order-independent.
inline Distribution adapt(const Distribution& dist, const std::vector<double>& lambda_change_sq,
                          double threshold) {
  const std::size_t bins = dist.probs.size();
  if (lambda_change_sq.size() != bins)
    throw DimensionMismatch("lambda change vector length");
  if (!(threshold > 0.0)) throw InvalidParameter("threshold must be positive");
  Distribution out = dist;
  if (bins <= 1) return out;
  const std::vector<double>& old = dist.probs;
  const std::size_t N = bins - 1;
  for (std::size_t t = 0; t <= N; ++t) {
    if (!(lambda_change_sq[t] < threshold)) continue;
    const double delta = 0.5 * old[t];
    out.probs[t] -= delta;
    if (t == 0) {
      out.probs[1] += delta;
    } else if (t == N) {
      out.probs[N - 1] += delta;
    } else {
      out.probs[t - 1] += 0.5 * delta;
      out.probs[t + 1] += 0.5 * delta;
    }
  }
  return out;
}

}  // namespace dualsplit::sampling
