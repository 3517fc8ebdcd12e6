#pragma once

#include <cstddef>

namespace survsim {

double normal_cdf(double z);

// Two-sided p-value of a standard-normal z statistic.
double two_sided_normal_p(double z);

// Two-sided p-value of a t statistic with the given degrees of freedom.
double two_sided_t_p(double t, double dof);

// Upper tail of the chi-squared distribution.
double chisq_upper_p(double x, double dof);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

// 95% Wilson score interval for a binomial proportion.
Interval wilson95(std::size_t successes, std::size_t n);

}  // namespace survsim
