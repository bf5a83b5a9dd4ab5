#include "sderates/registry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sderates/stats.hpp"

namespace sderates::registry {

std::vector<Entry> catalog() {
  std::vector<Entry> entries = {
      {"model", "additive", "dX = dW, x0 = 0; the Euler scheme is exact"},
      {"model", "gbm", "dX = X dW, x0 = 1; exact solution exp(W_t - t/2)"},
      {"model", "tanh_bounded", "bounded tanh-damped coefficients, no exact solution"},
      {"distribution", "lognormal_gbm_T1", "law of exp(W_1 - 1/2)"},
      {"distribution", "lognormal_standard", "law of exp(W_1)"},
      {"distribution", "stdnormal", "standard normal law"},
      {"distribution", "uniform01", "uniform law on [0,1]"},
      {"functional", "arctan", "arctan(x); smooth BV with V = pi"},
      {"functional", "identity", "g(x) = x as a degree-1 polynomial rep"},
      {"functional", "indicator", "chi_{[K,inf)}; params: K, shape"},
      {"functional", "poly_square", "g(x) = x^2 in G-form; params: bump"},
      {"functional", "staircase3", "three ascending/descending unit steps"},
      {"bump", "chebyshev", "moment-driven tail envelope; params: moments, theta"},
      {"bump", "euler_tail_bounded", "Gaussian tail envelope; params: theta, M, x0, T"},
      {"bump", "euler_tail_lipschitz", "log-power tail envelope; params: theta, M"},
      {"bump", "exp_abs", "exp(-|z|)"},
      {"bump", "gauss", "exp(-z^2/2)"},
      {"bump", "power_decay", "(1+|z|)^{-r}; params: exponent"},
  };
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.kind == b.kind ? a.name < b.name : a.kind < b.kind;
  });
  return entries;
}

sde::SdeSpec model_by_name(const std::string& name, const nlohmann::json& overrides) {
  sde::SdeSpec spec;
  spec.name = name;
  if (name == "gbm") {
    spec.sigma = [](double, double x) { return x; };
    spec.drift = [](double, double) { return 0.0; };
    spec.sigma_dx = [](double, double) { return 1.0; };
    spec.drift_dx = [](double, double) { return 0.0; };
    spec.x0 = 1.0;
    spec.horizon = 1.0;
    spec.coefficients_lipschitz = true;
    spec.exact_solution = [](double w, double t) { return std::exp(w - 0.5 * t); };
  } else if (name == "additive") {
    spec.sigma = [](double, double) { return 1.0; };
    spec.drift = [](double, double) { return 0.0; };
    spec.sigma_dx = [](double, double) { return 0.0; };
    spec.drift_dx = [](double, double) { return 0.0; };
    spec.x0 = 0.0;
    spec.horizon = 1.0;
    spec.coefficients_bounded = true;
    spec.exact_solution = [](double w, double) { return w; };
  } else if (name == "tanh_bounded") {
    spec.sigma = [](double, double x) { return std::tanh(x); };
    spec.drift = [](double, double x) { return -0.25 * std::tanh(x); };
    spec.sigma_dx = [](double, double x) {
      const double th = std::tanh(x);
      return 1.0 - th * th;
    };
    spec.drift_dx = [](double, double x) {
      const double th = std::tanh(x);
      return -0.25 * (1.0 - th * th);
    };
    spec.x0 = 1.0;
    spec.horizon = 1.0;
    spec.coefficients_bounded = true;
    spec.ct_bound = 1.0;
  } else {
    throw std::invalid_argument("unknown model: " + name);
  }
  if (overrides.contains("x0")) spec.x0 = overrides.at("x0").get<double>();
  if (overrides.contains("horizon")) spec.horizon = overrides.at("horizon").get<double>();

  if (name == "gbm" && spec.x0 != 1.0) {
    const double x0 = spec.x0;
    spec.exact_solution = [x0](double w, double t) { return x0 * std::exp(w - 0.5 * t); };
  }
  spec.validate();
  return spec;
}

dist::DistributionModel distribution_by_name(const std::string& name) {
  if (name == "uniform01")
    return dist::DistributionModel::analytic(
        name, [](double x) { return std::clamp(x, 0.0, 1.0); }, 1.0, 0.0, 1.0);
  if (name == "stdnormal")
    return dist::DistributionModel::analytic(
        name, [](double x) { return stats::normal_cdf(x); }, 1.0 / stats::kSqrt2Pi,
        -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
  if (name == "lognormal_gbm_T1") {
    // log X ~ N(-1/2, 1); sup of the density is e / sqrt(2 pi).
    return dist::DistributionModel::analytic(
        name, [](double x) { return x <= 0.0 ? 0.0 : stats::normal_cdf(std::log(x) + 0.5); },
        std::exp(1.0) / stats::kSqrt2Pi, 0.0, std::numeric_limits<double>::infinity());
  }
  if (name == "lognormal_standard") {
    // log X ~ N(0, 1); sup of the density is e^{1/2} / sqrt(2 pi).
    return dist::DistributionModel::analytic(
        name, [](double x) { return x <= 0.0 ? 0.0 : stats::normal_cdf(std::log(x)); },
        std::exp(0.5) / stats::kSqrt2Pi, 0.0, std::numeric_limits<double>::infinity());
  }
  throw std::invalid_argument("unknown distribution: " + name);
}

func::FunctionalRep functional_by_name(const std::string& name, const nlohmann::json& params) {
  if (name == "indicator") {
    const double K = params.value("K", 1.0);
    const std::string shape = params.value("shape", "closed_upper");
    func::IndicatorShape s = func::IndicatorShape::ClosedUpper;
    if (shape == "open_upper") s = func::IndicatorShape::OpenUpper;
    else if (shape == "closed_lower") s = func::IndicatorShape::ClosedLower;
    else if (shape == "open_lower") s = func::IndicatorShape::OpenLower;
    else if (shape != "closed_upper") throw std::invalid_argument("unknown indicator shape");
    return func::FunctionalRep::indicator(K, s);
  }
  if (name == "staircase3") {
    // Steps of +1/2, -1/4, +1/8 around the unit level; V = 7/8.
    func::FunctionalRep rep =
        func::FunctionalRep::bv(0.0, {{0.8, 0.5}, {1.0, -0.25}, {1.25, 0.125}});
    rep.set_direct([](double x) {
      double v = 0.0;
      if (x >= 0.8) v += 0.5;
      if (x >= 1.0) v -= 0.25;
      if (x >= 1.25) v += 0.125;
      return v;
    });
    rep.set_id("staircase3");
    return rep;
  }
  if (name == "arctan") {
    func::FunctionalRep rep =
        func::FunctionalRep::bv(0.0, {}, {func::arctan_derivative_density()});
    rep.set_direct([](double x) { return std::atan(x); });
    rep.set_id("arctan");
    return rep;
  }
  if (name == "poly_square" || name == "identity") {
    bump::BumpFunction b = params.contains("bump")
                               ? bump::BumpFunction::from_json(params.at("bump"))
                               : bump::BumpFunction::explicit_form("exp_abs");
    const double p = params.value("p", 1.0);
    std::vector<double> coeffs =
        name == "poly_square" ? std::vector<double>{0.0, 0.0, 1.0} : std::vector<double>{0.0, 1.0};
    func::FunctionalRep rep = func::FunctionalRep::from_polynomial(coeffs, std::move(b), p);
    rep.set_id(name);
    return rep;
  }
  throw std::invalid_argument("unknown functional: " + name);
}

bump::BumpFunction bump_by_name(const std::string& name, const nlohmann::json& params) {
  return bump::BumpFunction::from_registry(name, params);
}

}  // namespace sderates::registry
