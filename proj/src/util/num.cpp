#include "util/num.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdio>

#include "util/error.hpp"

namespace cea {

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

double sample_sd(std::span<const double> xs) { return std::sqrt(sample_variance(xs)); }

double normal_cdf(double z) {
  static const boost::math::normal_distribution<double> dist;
  return boost::math::cdf(dist, z);
}

double normal_quantile(double p) {
  static const boost::math::normal_distribution<double> dist;
  return boost::math::quantile(dist, p);
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw internal_error("student_t_cdf: df must be positive");
  if (df > 1e7) return normal_cdf(t);
  boost::math::students_t_distribution<double> dist(df);
  return boost::math::cdf(dist, t);
}

double student_t_quantile(double p, double df) {
  if (!(df > 0.0)) throw internal_error("student_t_quantile: df must be positive");
  if (df > 1e7) return normal_quantile(p);
  boost::math::students_t_distribution<double> dist(df);
  return boost::math::quantile(dist, p);
}

TwoSampleTest welch_t_test(std::span<const double> a, std::span<const double> b) {
  TwoSampleTest r;
  if (a.size() < 2 || b.size() < 2) {
    r.defined = false;
    r.p_value = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = sample_variance(a) / na;
  const double vb = sample_variance(b) / nb;
  const double diff = mean(a) - mean(b);
  const double se = std::sqrt(va + vb);
  if (se == 0.0) {
    // Degenerate data: identical constants give p = 1, separated constants p = 0.
    r.statistic = diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    r.df = na + nb - 2.0;
    r.p_value = diff == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.statistic = diff / se;
  r.df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  r.p_value = 2.0 * (1.0 - student_t_cdf(std::fabs(r.statistic), r.df));
  return r;
}

TwoSampleTest two_proportion_z_test(std::span<const double> a, std::span<const double> b) {
  TwoSampleTest r;
  if (a.size() < 2 || b.size() < 2) {
    r.defined = false;
    r.p_value = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double pa = mean(a);
  const double pb = mean(b);
  const double pooled = (pa * na + pb * nb) / (na + nb);
  const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb));
  if (se == 0.0) {
    r.statistic = pa == pb ? 0.0 : std::numeric_limits<double>::infinity();
    r.p_value = pa == pb ? 1.0 : 0.0;
    return r;
  }
  r.statistic = (pa - pb) / se;
  r.p_value = 2.0 * (1.0 - normal_cdf(std::fabs(r.statistic)));
  return r;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return std::string(buf);
}

}  // namespace cea
