#pragma once

namespace tutorweb {

// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

// Upper-tail probability P(F(df1, df2) > f). Throws InvalidDf for df < 1 or f < 0.
double f_pvalue(double f, double df1, double df2);

// Student t CDF and quantile with `df` degrees of freedom.
double t_cdf(double t, double df);
double t_quantile(double probability, double df);

}  // namespace tutorweb
