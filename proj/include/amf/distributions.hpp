#pragma once

// Tail probabilities for the reference distributions used by the test
// statistics. All functions accept fractional degrees of freedom.

namespace amf::dist {

/// Regularized incomplete beta function I_x(a, b), evaluated by continued
/// fraction on whichever side of the mean converges fastest.
double incomplete_beta(double a, double b, double x);

/// P(T <= t) for Student-t with `df` degrees of freedom.
double student_t_cdf(double t, double df);

/// P(|T| >= |t|).
double student_t_two_sided(double t, double df);

/// P(F >= f) for the F distribution with (df1, df2) degrees of freedom.
double f_survival(double f, double df1, double df2);

}  // namespace amf::dist
