#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cea {

double mean(std::span<const double> xs);
// Sample variance (n-1 denominator); 0 for fewer than two values.
double sample_variance(std::span<const double> xs);
double sample_sd(std::span<const double> xs);

double normal_cdf(double z);
double normal_quantile(double p);
double student_t_cdf(double t, double df);
double student_t_quantile(double p, double df);

struct TwoSampleTest {
  double statistic = 0.0;
  double df = 0.0;      // unused for the z-test
  double p_value = 1.0;
  bool defined = true;  // false when a group has < 2 observations
};

// Unequal-variance (Welch) two-sample t-test with Welch-Satterthwaite df.
TwoSampleTest welch_t_test(std::span<const double> a, std::span<const double> b);
// Two-proportion z-test with pooled variance; inputs are 0/1 indicators.
TwoSampleTest two_proportion_z_test(std::span<const double> a, std::span<const double> b);

// Fixed-precision decimal formatting for human-readable tables.
std::string fixed(double v, int decimals);

}  // namespace cea
