#include "speclab/core.hpp"

#include <cmath>

namespace speclab {

double binom_tail(std::uint64_t trials, std::uint64_t min_successes,
                  Probability p) {
  if (min_successes > trials + 1)
    throw std::invalid_argument("binom_tail: min_successes > trials + 1");
  if (min_successes == 0) return 1.0;
  if (min_successes > trials) return 0.0;
  const double prob = p.value();
  if (prob == 0.0) return 0.0;
  if (prob == 1.0) return 1.0;

  // Sum C(n,j) p^j (1-p)^(n-j) for j >= m in log space, largest term first.
  const double log_p = std::log(prob);
  const double log_q = std::log1p(-prob);
  const auto n = static_cast<double>(trials);
  auto log_term = [&](double j) {
    return std::lgamma(n + 1.0) - std::lgamma(j + 1.0) -
           std::lgamma(n - j + 1.0) + j * log_p + (n - j) * log_q;
  };
  // Locate the largest term in the tail to anchor the summation.
  const double mode = std::floor((n + 1.0) * prob);
  const double anchor_j =
      std::max(static_cast<double>(min_successes), std::min(mode, n));
  const double log_anchor = log_term(anchor_j);
  double sum = 0.0;
  for (std::uint64_t j = min_successes; j <= trials; ++j) {
    const double lt = log_term(static_cast<double>(j));
    sum += std::exp(lt - log_anchor);
    // Terms beyond the mode decay geometrically; stop once negligible.
    if (static_cast<double>(j) > mode && lt - log_anchor < -745.0) break;
  }
  const double result = std::exp(log_anchor) * sum;
  return result > 1.0 ? 1.0 : result;
}

std::pair<Probability, Probability> wilson_interval(std::uint64_t successes,
                                                    std::uint64_t trials,
                                                    Probability confidence) {
  if (trials == 0) throw std::invalid_argument("wilson_interval: trials == 0");
  if (successes > trials)
    throw std::invalid_argument("wilson_interval: successes > trials");
  const double conf = confidence.value();
  if (!(conf > 0.0 && conf < 1.0))
    throw std::invalid_argument("wilson_interval: confidence must be in (0,1)");

  const double z = inverse_normal_cdf(0.5 + conf / 2.0);
  const auto n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (phat + z2 / (2.0 * n)) / denom;
  const double half =
      (z / denom) * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
  double lo = centre - half;
  double hi = centre + half;
  if (lo < 0.0) lo = 0.0;
  if (hi > 1.0) hi = 1.0;
  return {Probability(lo), Probability(hi)};
}

SimReport make_proportion_report(std::uint64_t successes, std::uint64_t trials,
                                 Seed master_seed) {
  const auto [lo, hi] = wilson_interval(successes, trials, Probability(0.95));
  SimReport report;
  report.estimate = static_cast<double>(successes) / static_cast<double>(trials);
  report.ci_low = lo;
  report.ci_high = hi;
  report.trials = trials;
  report.master_seed = master_seed;
  return report;
}

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("inverse_normal_cdf: p must be in (0,1)");

  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};

  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // One Halley refinement against the exact CDF via erfc.
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * 3.14159265358979323846) *
                   std::exp(x * x / 2.0);
  x = x - u / (1.0 + x * u / 2.0);
  return x;
}

}  // namespace speclab
