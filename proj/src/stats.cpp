#include "daa/stats.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

namespace daa {

namespace {

double upper_tail(double t, std::size_t n) {
  const boost::math::students_t dist(static_cast<double>(n - 1));
  return boost::math::cdf(boost::math::complement(dist, t));
}

}  // namespace

double PairedTTest::p_greater() const { return upper_tail(t, n); }

double PairedTTest::p_less() const { return upper_tail(-t, n); }

PairedTTest paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired_t_test: samples differ in length");
  const std::size_t n = a.size();
  if (n < 2) throw std::invalid_argument("paired_t_test: need at least two pairs");
  std::vector<double> diff(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    diff[i] = a[i] - b[i];
    sum += diff[i];
  }
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double d : diff) ss += (d - mean) * (d - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw std::invalid_argument("paired_t_test: differences have zero variance");

  PairedTTest r;
  r.n = n;
  r.mean_difference = mean;
  r.sd_difference = sd;
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  r.p = std::min(1.0, 2.0 * upper_tail(std::abs(r.t), n));
  return r;
}

}  // namespace daa
