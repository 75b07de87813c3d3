#include "seqjsp/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "seqjsp/instance.hpp"

namespace seqjsp {

namespace {

// Continued fraction for I_x(a, b), valid for x < (a + 1) / (a + b + 2).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("incomplete beta: continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0) || !(b > 0)) throw ValidationError("incomplete beta needs a, b > 0");
  if (x < 0 || x > 1) throw ValidationError("incomplete beta needs 0 <= x <= 1");
  if (x == 0 || x == 1) return x;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0)) throw ValidationError("degrees of freedom must be positive");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double x = df / (df + t * t);
  const double tail = 0.5 * incomplete_beta(df / 2.0, 0.5, x);
  return t < 0 ? tail : 1.0 - tail;
}

TTestResult paired_ttest(std::span<const double> d, double alpha) {
  if (!(alpha > 0 && alpha < 1)) throw ValidationError("t-test alpha must lie in (0, 1)");
  if (d.size() < 2) throw ValidationError("t-test needs at least two paired samples");
  TTestResult r;
  r.n = static_cast<int>(d.size());
  double sum = 0;
  for (double x : d) sum += x;
  r.mean = sum / r.n;
  double ss = 0;
  for (double x : d) ss += (x - r.mean) * (x - r.mean);
  r.stddev = std::sqrt(ss / (r.n - 1));
  if (r.stddev == 0) {
    r.t = r.mean < 0 ? -std::numeric_limits<double>::infinity()
                     : (r.mean > 0 ? std::numeric_limits<double>::infinity() : 0.0);
    r.p_value = r.mean < 0 ? 0.0 : (r.mean > 0 ? 1.0 : 0.5);
    r.replace = r.mean < 0;
    return r;
  }
  r.t = r.mean / (r.stddev / std::sqrt(static_cast<double>(r.n)));
  r.p_value = student_t_cdf(r.t, r.n - 1);
  r.replace = r.p_value < alpha && r.mean < 0;
  return r;
}

TTestResult paired_ttest(std::span<const double> candidate, std::span<const double> baseline, double alpha) {
  if (candidate.size() != baseline.size()) throw ValidationError("paired t-test needs equal sample counts");
  std::vector<double> d(candidate.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = candidate[k] - baseline[k];
  return paired_ttest(d, alpha);
}

}  // namespace seqjsp
