#include "ganimals/stats.hpp"

#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "ganimals/error.hpp"

namespace ganimals {

double mean(std::span<const double> xs) {
    double sum = 0.0;
    for (double x : xs)
        sum += x;
    return sum / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs)
        ss += (x - m) * (x - m);
    return ss / static_cast<double>(xs.size() - 1);
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2)
        fail(ErrorCode::InsufficientData, "each group needs at least two values");
    WelchResult r;
    r.mean_a = mean(a);
    r.mean_b = mean(b);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double va = sample_variance(a) / na;
    const double vb = sample_variance(b) / nb;
    const double se2 = va + vb;
    const double diff = r.mean_a - r.mean_b;

    if (se2 == 0.0) {
        // Both groups constant: the difference is either exactly zero or
        // infinitely many standard errors away.
        r.degrees_of_freedom = na + nb - 2.0;
        if (diff == 0.0) {
            r.t_statistic = 0.0;
            r.p_value = 1.0;
        } else {
            r.t_statistic = std::copysign(std::numeric_limits<double>::infinity(), diff);
            r.p_value = 0.0;
        }
        return r;
    }

    r.t_statistic = diff / std::sqrt(se2);
    r.degrees_of_freedom = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    const boost::math::students_t dist(r.degrees_of_freedom);
    r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t_statistic)));
    r.p_value = std::min(1.0, std::max(0.0, r.p_value));
    return r;
}

} // namespace ganimals
