#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace canids::stats {

/// Pearson product-moment correlation. Throws LengthMismatch (including n < 2)
/// or ZeroVariance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Two-sided p-value of H0: rho = 0 for a sample correlation r over n pairs,
/// via t = r * sqrt((n - 2) / (1 - r^2)) with n - 2 degrees of freedom.
double pearson_p_value(double r, std::size_t n);

struct NamedColumn {
  std::string name;
  std::vector<double> values;
};

struct CorrelationMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<double>> r;
  std::vector<std::vector<double>> p_value;
  std::vector<std::vector<bool>> significant;  // p < alpha
};

CorrelationMatrix correlation_matrix(std::span<const NamedColumn> columns, double alpha = 0.05);

/// Generalized extreme Studentized deviate (Rosner) test for up to
/// `max_outliers` outliers. Returns the flagged indices into `values`, in
/// removal order. Needs at least 25 values (TooFewValues); alpha in (0,1) and
/// max_outliers in [1, n-2] (InvalidArgument). Zero variance ends the search.
std::vector<std::size_t> rosner_outliers(std::span<const double> values, std::size_t max_outliers,
                                         double alpha);

/// Rosner critical value lambda_i for removal step i (1-based) of n points.
double rosner_critical_value(std::size_t n, std::size_t i, double alpha);

}  // namespace canids::stats
