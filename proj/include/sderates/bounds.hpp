#pragma once

#include <functional>

namespace sderates::bounds {

// Shared constants for the closed-form error bounds.
struct BoundContext {
  double d_upper_D = 0.0;     // D_X(K)
  double density_sup = 0.0;   // sup f_X
  double lp_error = 0.0;      // ||X - X_hat||_p (or _q)
  double p = 1.0;             // outer moment
  double q = 1.0;             // inner norm index
  double theta = 0.5;         // interpolation weight in (0,1)
  double mesh = 0.0;
  double constant_M = 1.0;    // strong-error constant exponent scale
  std::function<double(double)> scheme_constant_Cp;  // p -> C_p
  double gamma_scheme = 0.5;  // strong order of the scheme
  double variation = 0.0;     // V(g) or V_{p,phi}(g)
};

// E|chi(X) - chi(X_hat)| <= 3 D^{p/(p+1)} ||X - X_hat||_p^{p/(p+1)}.
double indicator_bound(double D, double lp_err, double p);

// E|g(X) - g(X_hat)|^p <= 3^{p+1} (sup f)^{q/(q+1)} V(g)^p ||X - X_hat||_q^{q/(q+1)}.
double bv_bound(double density_sup, double variation_V, double lq_err, double p, double q);

// E|g(X)-g(X_hat)|^p <= 3 2^p (sup f)^{q(1-theta)/(q+1)} V_{p,phi}(g)^p ||..||_q^{q(1-theta)/(q+1)}.
double gclass_bound(double density_sup, double v_p_phi, double lq_err, double p, double q,
                    double theta);

struct RateExponent {
  double p_choice = 0.0;
  double exponent = 0.0;
};

// The moment index p = (theta - eps)/eps turns the rate theta*p/(p+1) into
// exactly theta - eps.
RateExponent scheme_rate_exponent(double scheme_order_theta, double epsilon);

// 1/2 - (2+M)/(-log mesh)^{1/3}; valid for mesh < e^{-16}.
double euler_log_corrected_exponent(double mesh, double M);

// Same exponent parameterized by -log(mesh), which stays representable for
// meshes far below the double underflow threshold.
double euler_log_corrected_exponent_from_log(double minus_log_mesh, double M);

enum class CorollaryKind { IndicatorCor36, BvCor44, GclassCor64 };

// Full mesh-dependent corollary bound with the epsilon-optimized index choice.
double corollary_rate_bound(CorollaryKind kind, const BoundContext& context, double epsilon);

}  // namespace sderates::bounds
