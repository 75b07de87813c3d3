#pragma once

#include <span>

namespace seqjsp {

/// Regularized incomplete beta I_x(a, b), continued fraction (modified Lentz).
double incomplete_beta(double a, double b, double x);

/// P(T <= t) for Student's t with `df` degrees of freedom.
double student_t_cdf(double t, double df);

struct TTestResult {
  int n = 0;
  double mean = 0;    // mean of the paired differences
  double stddev = 0;  // sample standard deviation (n - 1)
  double t = 0;
  double p_value = 1;  // one-sided, H1: mean < 0
  bool replace = false;
};

/// One-sided paired t-test on differences d = candidate - baseline (lower is
/// better). replace iff p < alpha and mean < 0; with zero variance, replace iff
/// mean < 0.
TTestResult paired_ttest(std::span<const double> differences, double alpha);
TTestResult paired_ttest(std::span<const double> candidate, std::span<const double> baseline, double alpha);

}  // namespace seqjsp
