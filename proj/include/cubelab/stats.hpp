#pragma once

// Small statistics helpers shared by the Monte-Carlo checks.

#include <complex>
#include <cstddef>
#include <vector>

#include "cubelab/torus.hpp"

namespace cubelab::stats {

/// Running mean / standard error with Neumaier-compensated sums.
class MeanAccumulator {
 public:
  void add(double x);
  std::size_t count() const { return n_; }
  double mean() const;
  /// Standard error of the mean (sample standard deviation / sqrt(n)).
  double stderr_of_mean() const;

 private:
  std::size_t n_ = 0;
  double sum_ = 0.0, comp_ = 0.0;
  double sum_sq_ = 0.0, comp_sq_ = 0.0;
};

/// Complex analogue; the standard error is sqrt(E|z - mean|^2 / n).
class ComplexMeanAccumulator {
 public:
  void add(std::complex<double> z);
  std::size_t count() const { return re_.count(); }
  std::complex<double> mean() const { return {re_.mean(), im_.mean()}; }
  double stderr_of_mean() const;

 private:
  MeanAccumulator re_, im_;
};

/// Neumaier-compensated sum of a sequence.
double compensated_sum(const std::vector<double>& xs);

struct TwoSampleResult {
  double statistic = 0.0;  // n_eff * S
  double z = 0.0;          // (statistic - K) / sqrt(K)
  double p_value = 1.0;    // Gamma(K, 1) upper tail at the statistic
  std::size_t frequencies = 0;
  std::size_t n1 = 0, n2 = 0;
};

/// Two-sample Fourier statistic on T^d. For every frequency m != 0 in the
/// half-space of the box |m|_inf <= max_freq, compare the empirical means of
/// e(m.x). Under equal laws, n_eff |diff|^2 is approximately Exp(1) per
/// frequency (n_eff = n1 n2 / (n1 + n2)), so the sum is approximately
/// Gamma(K, 1) and z is approximately standard normal for large K.
TwoSampleResult fourier_two_sample(const std::vector<Point>& a, const std::vector<Point>& b, int max_freq = 3);

/// Upper-tail probability of a Gamma(K, 1) variable with integer shape K.
double gamma_upper_tail(std::size_t K, double s);

/// Two-sided 3-sigma tail mass, used as the p-value gate.
inline constexpr double kThreeSigmaTail = 0.0027;

/// Kolmogorov-Smirnov statistic sqrt(n) * sup |F_n - F| against uniform [0,1).
double ks_uniform(std::vector<double> xs);

/// 3-sigma-style gate for the KS statistic: the asymptotic 0.27% quantile
/// of the Kolmogorov distribution.
inline constexpr double kKsGate = 1.78;

}  // namespace cubelab::stats
