#include "canids/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>

#include "canids/error.hpp"

namespace canids::stats {

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(Errc::LengthMismatch, "pearson inputs differ in length");
  if (x.size() < 2) throw Error(Errc::LengthMismatch, "pearson needs at least two pairs");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(Errc::ZeroVariance, "pearson input is constant");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double pearson_p_value(double r, std::size_t n) {
  if (n < 3) return 1.0;
  if (std::abs(r) >= 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t = std::abs(r) * std::sqrt(df / (1.0 - r * r));
  const boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, t));
}

CorrelationMatrix correlation_matrix(std::span<const NamedColumn> columns, double alpha) {
  CorrelationMatrix out;
  const std::size_t k = columns.size();
  out.r.assign(k, std::vector<double>(k, 0.0));
  out.p_value.assign(k, std::vector<double>(k, 0.0));
  out.significant.assign(k, std::vector<bool>(k, false));
  for (const auto& c : columns) out.names.push_back(c.name);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      const double r = pearson(columns[i].values, columns[j].values);
      const double p = pearson_p_value(r, columns[i].values.size());
      out.r[i][j] = out.r[j][i] = r;
      out.p_value[i][j] = out.p_value[j][i] = p;
      out.significant[i][j] = out.significant[j][i] = p < alpha;
    }
  }
  return out;
}

double rosner_critical_value(std::size_t n, std::size_t i, double alpha) {
  const double remaining = static_cast<double>(n - i + 1);  // points before the i-th removal
  const double df = remaining - 2.0;
  const double p = 1.0 - alpha / (2.0 * remaining);
  const boost::math::students_t dist(df);
  const double t = boost::math::quantile(dist, p);
  return (remaining - 1.0) * t / std::sqrt((df + t * t) * remaining);
}

std::vector<std::size_t> rosner_outliers(std::span<const double> values, std::size_t max_outliers, double alpha) {
  const std::size_t n = values.size();
  if (n < 25) throw Error(Errc::TooFewValues, "Rosner's test needs at least 25 values");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::InvalidArgument, "alpha must lie in (0, 1)");
  if (max_outliers < 1 || max_outliers > n - 2) throw Error(Errc::InvalidArgument, "max_outliers out of range");

  std::vector<std::size_t> live(n);
  std::iota(live.begin(), live.end(), 0);
  std::vector<std::size_t> removed;
  std::size_t flagged = 0;
  for (std::size_t step = 1; step <= max_outliers; ++step) {
    const double m = static_cast<double>(live.size());
    double mean = 0.0;
    for (auto idx : live) mean += values[idx];
    mean /= m;
    double ss = 0.0;
    for (auto idx : live) ss += (values[idx] - mean) * (values[idx] - mean);
    const double sd = std::sqrt(ss / (m - 1.0));
    if (sd == 0.0) break;
    std::size_t worst = 0;
    double worst_dev = -1.0;
    for (std::size_t j = 0; j < live.size(); ++j) {
      const double dev = std::abs(values[live[j]] - mean);
      if (dev > worst_dev) {
        worst_dev = dev;
        worst = j;
      }
    }
    const double statistic = worst_dev / sd;
    removed.push_back(live[worst]);
    live.erase(live.begin() + static_cast<std::ptrdiff_t>(worst));
    if (statistic > rosner_critical_value(n, step, alpha)) flagged = step;
  }
  removed.resize(flagged);
  return removed;
}

}  // namespace canids::stats
