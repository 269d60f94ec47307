#pragma once

#include <span>

namespace ganimals {

struct WelchResult {
    double mean_a = 0.0;
    double mean_b = 0.0;
    double t_statistic = 0.0;
    double degrees_of_freedom = 0.0;
    double p_value = 1.0; // two-sided
};

/// Welch's unequal-variance two-sample t-test with Welch-Satterthwaite
/// degrees of freedom. Each sample needs at least two values
/// (InsufficientData otherwise).
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> xs);
/// Unbiased (n - 1) sample variance.
double sample_variance(std::span<const double> xs);

} // namespace ganimals
