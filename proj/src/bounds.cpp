#include "sderates/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace sderates::bounds {

double indicator_bound(double D, double lp_err, double p) {
  if (!(D > 0.0)) throw std::invalid_argument("indicator_bound: D must be > 0");
  if (lp_err < 0.0) throw std::invalid_argument("indicator_bound: lp_err must be >= 0");
  if (!(p > 0.0)) throw std::invalid_argument("indicator_bound: p must be > 0");
  const double e = p / (p + 1.0);
  return 3.0 * std::pow(D, e) * std::pow(lp_err, e);
}

double bv_bound(double density_sup, double variation_V, double lq_err, double p, double q) {
  if (density_sup < 0.0 || variation_V < 0.0 || lq_err < 0.0)
    throw std::invalid_argument("bv_bound: arguments must be nonnegative");
  if (!(p >= 1.0 && q >= 1.0)) throw std::invalid_argument("bv_bound: p,q must be >= 1");
  const double e = q / (q + 1.0);
  return std::pow(3.0, p + 1.0) * std::pow(density_sup, e) * std::pow(variation_V, p) *
         std::pow(lq_err, e);
}

double gclass_bound(double density_sup, double v_p_phi, double lq_err, double p, double q,
                    double theta) {
  if (!(theta > 0.0 && theta < 1.0))
    throw std::invalid_argument("gclass_bound: theta must lie in (0,1)");
  if (density_sup < 0.0 || v_p_phi < 0.0 || lq_err < 0.0)
    throw std::invalid_argument("gclass_bound: arguments must be nonnegative");
  if (!(p >= 1.0 && q >= 1.0)) throw std::invalid_argument("gclass_bound: p,q must be >= 1");
  const double e = q * (1.0 - theta) / (q + 1.0);
  return 3.0 * std::pow(2.0, p) * std::pow(density_sup, e) * std::pow(v_p_phi, p) *
         std::pow(lq_err, e);
}

RateExponent scheme_rate_exponent(double scheme_order_theta, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < scheme_order_theta))
    throw std::invalid_argument("scheme_rate_exponent: need 0 < epsilon < theta");
  RateExponent out;
  out.p_choice = (scheme_order_theta - epsilon) / epsilon;
  out.exponent = scheme_order_theta * out.p_choice / (out.p_choice + 1.0);
  return out;
}

double euler_log_corrected_exponent(double mesh, double M) {
  const double threshold = std::exp(-16.0);
  if (!(mesh > 0.0 && mesh < threshold))
    throw std::invalid_argument(
        "euler_log_corrected_exponent: valid only for mesh < e^{-16}");
  return euler_log_corrected_exponent_from_log(-std::log(mesh), M);
}

double euler_log_corrected_exponent_from_log(double minus_log_mesh, double M) {
  if (!(minus_log_mesh > 16.0))
    throw std::invalid_argument(
        "euler_log_corrected_exponent: valid only for mesh < e^{-16}");
  if (!(M > 0.0)) throw std::invalid_argument("euler_log_corrected_exponent: M must be > 0");
  return 0.5 - (2.0 + M) / std::cbrt(minus_log_mesh);
}

double corollary_rate_bound(CorollaryKind kind, const BoundContext& ctx, double epsilon) {
  const double gamma = ctx.gamma_scheme;
  if (!(epsilon > 0.0 && epsilon < gamma))
    throw std::invalid_argument("corollary_rate_bound: need 0 < epsilon < scheme order");
  if (!(ctx.mesh > 0.0)) throw std::invalid_argument("corollary_rate_bound: mesh must be > 0");
  if (!ctx.scheme_constant_Cp)
    throw std::invalid_argument("corollary_rate_bound: scheme_constant_Cp not set");

  switch (kind) {
    case CorollaryKind::IndicatorCor36: {
      // 3 D^{p/(p+1)} C_p^{p/(p+1)} mesh^{gamma p/(p+1)} with p = (gamma-eps)/eps.
      const RateExponent re = scheme_rate_exponent(gamma, epsilon);
      const double e = re.p_choice / (re.p_choice + 1.0);
      return 3.0 * std::pow(ctx.d_upper_D, e) *
             std::pow(ctx.scheme_constant_Cp(re.p_choice), e) *
             std::pow(ctx.mesh, gamma * e);
    }
    case CorollaryKind::BvCor44: {
      // 3^{p+1} (sup f)^{q/(q+1)} V^p C_q^{q/(q+1)} mesh^{gamma q/(q+1)},
      // q = (gamma-eps)/eps.
      const double q = (gamma - epsilon) / epsilon;
      const double e = q / (q + 1.0);
      return std::pow(3.0, ctx.p + 1.0) * std::pow(ctx.density_sup, e) *
             std::pow(ctx.variation, ctx.p) * std::pow(ctx.scheme_constant_Cp(q), e) *
             std::pow(ctx.mesh, gamma * e);
    }
    case CorollaryKind::GclassCor64: {
      // q = 2 gamma/eps - 1 and theta = 1/q give q(1-theta)/(q+1) = 1 - eps/gamma.
      const double q = 2.0 * gamma / epsilon - 1.0;
      const double e = 1.0 - epsilon / gamma;
      return 3.0 * std::pow(2.0, ctx.p) * std::pow(ctx.density_sup, e) *
             std::pow(ctx.variation, ctx.p) * std::pow(ctx.scheme_constant_Cp(q), e) *
             std::pow(ctx.mesh, gamma - epsilon);
    }
  }
  throw std::logic_error("corollary_rate_bound: unreachable");
}

}  // namespace sderates::bounds
