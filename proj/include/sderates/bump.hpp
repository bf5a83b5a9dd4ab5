#pragma once

#include <functional>
#include <memory>
#include <string>

#include "json.hpp"

namespace sderates::bump {

enum class Construction {
  ExplicitForm,
  ChebyshevTail,
  GaussianTailEuler,
  LipschitzTailEuler,
  Envelope,
};

std::string to_string(Construction c);

// A (0,1]-valued function, nondecreasing on (-inf,0], nonincreasing on
// (0,inf), vanishing at +-inf. Encodes a tail-probability envelope.
class BumpFunction {
 public:
  double operator()(double z) const { return eval_(z); }
  Construction construction() const { return construction_; }
  const nlohmann::json& params() const { return params_; }
  // True when the construction is known to decay faster than any polynomial.
  bool superpolynomial_decay() const { return superpoly_; }

  // Numeric certificate: phi(z) * |z|^k -> 0 along z = 10^1..10^6 for each
  // k <= k_max. The analytic flag short-circuits the probe.
  bool decays_faster_than_poly(int k_max) const;

  // Checks positivity, the unit cap, unimodality about 0, and decay on probe
  // grids; throws std::logic_error on violation.
  void check_invariants() const;

  nlohmann::json to_json() const;
  static BumpFunction from_json(const nlohmann::json& j);

  // phi(z) = named closed form. Forms: "exp_abs" e^{-|z|};
  // "power_decay" (1+|z|)^{-r}; "gauss" e^{-z^2/2}.
  static BumpFunction explicit_form(const std::string& form, double exponent = 0.0);

  // phi(lambda) = [min_p ((moment_norms(p))/|lambda|)^{theta p} ^ 1] v floor,
  // with p probed geometrically in [1, p_max]. moment_norms(p) plays the role
  // of C_p + ||X||_p. The probe-grid minimum over-estimates the true infimum.
  static BumpFunction chebyshev_tail(std::function<double(double)> moment_norms,
                                     double theta, BumpFunction floor, int p_max = 64,
                                     std::string moments_name = "custom");

  // Gaussian tail envelope for schemes with bounded coefficients |sigma|,|b| <= M:
  // exp(-theta (z - (x0 +- M T))^2 / (2 M^2 T)) outside the plateau
  // [min(x0 - M T, 0), max(x0 + M T, 0)], and 1 on it.
  static BumpFunction euler_tail_bounded(double theta, double M, double x0, double T);

  // Envelope for Lipschitz coefficients: |z|^{-(2 theta / (3 sqrt(3 M))) (log|z|)^{1/2}}
  // for |z| > z0 = e^{3M}, and 1 otherwise.
  static BumpFunction euler_tail_lipschitz(double theta, double M);

  // Pointwise maximum of two bumps.
  static BumpFunction envelope(const BumpFunction& a, const BumpFunction& b);

  static BumpFunction from_registry(const std::string& name, const nlohmann::json& params);

 private:
  BumpFunction() = default;

  std::function<double(double)> eval_;
  Construction construction_ = Construction::ExplicitForm;
  nlohmann::json params_;
  bool superpoly_ = false;
};

}  // namespace sderates::bump
