#include "cubelab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cubelab/error.hpp"

namespace cubelab::stats {

namespace {

void neumaier_add(double& sum, double& comp, double x) {
  const double t = sum + x;
  if (std::abs(sum) >= std::abs(x))
    comp += (sum - t) + x;
  else
    comp += (x - t) + sum;
  sum = t;
}

}  // namespace

void MeanAccumulator::add(double x) {
  ++n_;
  neumaier_add(sum_, comp_, x);
  neumaier_add(sum_sq_, comp_sq_, x * x);
}

double MeanAccumulator::mean() const { return n_ == 0 ? 0.0 : (sum_ + comp_) / static_cast<double>(n_); }

double MeanAccumulator::stderr_of_mean() const {
  if (n_ < 2) return 0.0;
  const double n = static_cast<double>(n_);
  const double m = mean();
  const double var = std::max(0.0, ((sum_sq_ + comp_sq_) - n * m * m) / (n - 1.0));
  return std::sqrt(var / n);
}

void ComplexMeanAccumulator::add(std::complex<double> z) {
  re_.add(z.real());
  im_.add(z.imag());
}

double ComplexMeanAccumulator::stderr_of_mean() const {
  const double a = re_.stderr_of_mean(), b = im_.stderr_of_mean();
  return std::sqrt(a * a + b * b);
}

double compensated_sum(const std::vector<double>& xs) {
  double s = 0.0, c = 0.0;
  for (double x : xs) neumaier_add(s, c, x);
  return s + c;
}

TwoSampleResult fourier_two_sample(const std::vector<Point>& a, const std::vector<Point>& b, int max_freq) {
  if (a.empty() || b.empty()) throw PreconditionError("two-sample test needs non-empty samples");
  const std::size_t d = a.front().size();
  if (d == 0 || d > 4) throw DimensionError("two-sample Fourier test supports dimensions 1..4");
  const int side = 2 * max_freq + 1;
  std::size_t box = 1;
  for (std::size_t i = 0; i < d; ++i) box *= static_cast<std::size_t>(side);

  // Half-space: the first nonzero coordinate of m is positive.
  std::vector<std::vector<int>> freqs;
  for (std::size_t code = 0; code < box; ++code) {
    std::vector<int> m(d);
    std::size_t r = code;
    for (std::size_t i = 0; i < d; ++i) {
      m[i] = static_cast<int>(r % side) - max_freq;
      r /= side;
    }
    auto first = std::find_if(m.begin(), m.end(), [](int x) { return x != 0; });
    if (first != m.end() && *first > 0) freqs.push_back(m);
  }

  auto means = [&](const std::vector<Point>& pts) {
    std::vector<ComplexMeanAccumulator> acc(freqs.size());
    for (const auto& x : pts) {
      for (std::size_t f = 0; f < freqs.size(); ++f) {
        double phase = 0.0;
        for (std::size_t i = 0; i < d; ++i) phase += freqs[f][i] * x[i];
        phase = 2.0 * std::numbers::pi * torus::frac(phase);
        acc[f].add({std::cos(phase), std::sin(phase)});
      }
    }
    std::vector<std::complex<double>> out;
    for (const auto& m : acc) out.push_back(m.mean());
    return out;
  };
  const auto ma = means(a);
  const auto mb = means(b);
  const double n_eff = static_cast<double>(a.size()) * static_cast<double>(b.size()) /
                       static_cast<double>(a.size() + b.size());
  TwoSampleResult r;
  for (std::size_t f = 0; f < freqs.size(); ++f) r.statistic += n_eff * std::norm(ma[f] - mb[f]);
  r.frequencies = freqs.size();
  const double K = static_cast<double>(freqs.size());
  r.z = (r.statistic - K) / std::sqrt(K);
  r.p_value = gamma_upper_tail(freqs.size(), r.statistic);
  r.n1 = a.size();
  r.n2 = b.size();
  return r;
}

double gamma_upper_tail(std::size_t K, double s) {
  if (s <= 0.0) return 1.0;
  // e^{-s} sum_{i<K} s^i / i!
  double term = std::exp(-s);
  double total = term;
  for (std::size_t i = 1; i < K; ++i) {
    term *= s / static_cast<double>(i);
    total += term;
  }
  return std::min(1.0, total);
}

double ks_uniform(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    d = std::max(d, static_cast<double>(i + 1) / n - xs[i]);
    d = std::max(d, xs[i] - static_cast<double>(i) / n);
  }
  return std::sqrt(n) * d;
}

}  // namespace cubelab::stats
