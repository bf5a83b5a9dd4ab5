#include "sderates/bump.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sderates/stats.hpp"

namespace sderates::bump {

std::string to_string(Construction c) {
  switch (c) {
    case Construction::ExplicitForm: return "explicit_form";
    case Construction::ChebyshevTail: return "chebyshev_tail";
    case Construction::GaussianTailEuler: return "gaussian_tail_euler";
    case Construction::LipschitzTailEuler: return "lipschitz_tail_euler";
    case Construction::Envelope: return "envelope";
  }
  return "?";
}

bool BumpFunction::decays_faster_than_poly(int k_max) const {
  if (superpoly_) return true;
  for (int k = 1; k <= k_max; ++k) {
    // phi(z) |z|^k must fall below a small threshold by the last probe.
    double prev = std::numeric_limits<double>::infinity();
    bool small_enough = false;
    for (int e = 1; e <= 6; ++e) {
      const double z = std::pow(10.0, e);
      const double v = eval_(z) * std::pow(z, k);
      if (!std::isfinite(v)) return false;
      if (v > prev * 1.0001 && v > 1e-6) return false;  // stopped decreasing too early
      prev = v;
      small_enough = v < 1e-6;
    }
    if (!small_enough) return false;
  }
  return true;
}

void BumpFunction::check_invariants() const {
  auto fail = [](const std::string& msg) { throw std::logic_error("bump invariant: " + msg); };
  std::vector<double> grid;
  for (double z = -32.0; z <= 32.0; z += 0.25) grid.push_back(z);
  double prev_neg = 0.0, prev_pos = 2.0;
  for (double z : grid) {
    const double v = eval_(z);
    if (!(v > 0.0) || v > 1.0 + 1e-15) fail("values must lie in (0,1]");
    if (z <= 0.0) {
      if (v + 1e-12 < prev_neg) fail("must be nondecreasing on (-inf,0]");
      prev_neg = v;
    } else {
      if (v > prev_pos + 1e-12) fail("must be nonincreasing on (0,inf)");
      prev_pos = v;
    }
  }
  for (int e = 1; e <= 6; ++e) {
    const double z = std::pow(10.0, e);
    if (e == 6 && (eval_(z) > 1e-3 || eval_(-z) > 1e-3)) fail("must vanish at +-infinity");
  }
}

nlohmann::json BumpFunction::to_json() const {
  return {{"construction", to_string(construction_)}, {"params", params_}};
}

BumpFunction BumpFunction::explicit_form(const std::string& form, double exponent) {
  BumpFunction b;
  b.construction_ = Construction::ExplicitForm;
  if (form == "exp_abs") {
    b.eval_ = [](double z) { return std::exp(-std::abs(z)); };
    b.superpoly_ = true;
    b.params_ = {{"form", "exp_abs"}};
  } else if (form == "gauss") {
    b.eval_ = [](double z) { return std::exp(-0.5 * z * z); };
    b.superpoly_ = true;
    b.params_ = {{"form", "gauss"}};
  } else if (form == "power_decay") {
    if (!(exponent > 1.0)) throw std::invalid_argument("power_decay needs exponent > 1");
    b.eval_ = [exponent](double z) { return std::pow(1.0 + std::abs(z), -exponent); };
    b.superpoly_ = false;
    b.params_ = {{"form", "power_decay"}, {"exponent", exponent}};
  } else if (form == "exp_half_abs") {
    b.eval_ = [](double z) { return std::exp(-0.5 * std::abs(z)); };
    b.superpoly_ = true;
    b.params_ = {{"form", "exp_half_abs"}};
  } else {
    throw std::invalid_argument("unknown explicit bump form: " + form);
  }
  return b;
}

BumpFunction BumpFunction::chebyshev_tail(std::function<double(double)> moment_norms,
                                          double theta, BumpFunction floor, int p_max,
                                          std::string moments_name) {
  if (!(theta > 0.0 && theta < 1.0))
    throw std::invalid_argument("chebyshev_tail: theta must lie in (0,1)");
  if (p_max < 1) throw std::invalid_argument("chebyshev_tail: p_max must be >= 1");
  // Geometric probe grid for p in [1, p_max].
  std::vector<double> probes;
  const int steps = 48;
  for (int i = 0; i <= steps; ++i)
    probes.push_back(std::pow(static_cast<double>(p_max), static_cast<double>(i) / steps));
  std::vector<double> log_norms(probes.size());
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const double m = moment_norms(probes[i]);
    if (!(m > 0.0) || !std::isfinite(m))
      throw std::invalid_argument("chebyshev_tail: moment_norms must be positive and finite");
    log_norms[i] = std::log(m);
  }
  auto floor_fn = floor.eval_;
  BumpFunction b;
  b.construction_ = Construction::ChebyshevTail;
  b.superpoly_ = floor.superpoly_;
  b.params_ = {{"moments", std::move(moments_name)},
               {"theta", theta},
               {"p_max", p_max},
               {"floor", floor.to_json()}};
  b.eval_ = [probes, log_norms, theta, floor_fn](double lambda) {
    if (lambda == 0.0) return 1.0;
    const double log_lam = std::log(std::abs(lambda));
    double best = 0.0;  // log scale; 0 == the unit cap
    for (std::size_t i = 0; i < probes.size(); ++i) {
      const double cand = theta * probes[i] * (log_norms[i] - log_lam);
      if (cand < best) best = cand;
    }
    return std::max(std::exp(best), floor_fn(lambda));
  };
  return b;
}

BumpFunction BumpFunction::euler_tail_bounded(double theta, double M, double x0, double T) {
  if (!(theta > 0.0 && theta < 1.0))
    throw std::invalid_argument("euler_tail_bounded: theta must lie in (0,1)");
  if (!(M > 0.0) || !(T > 0.0))
    throw std::invalid_argument("euler_tail_bounded: M and T must be > 0");
  const double hi = std::max(x0 + M * T, 0.0);
  const double lo = std::min(x0 - M * T, 0.0);
  const double denom = 2.0 * M * M * T;
  BumpFunction b;
  b.construction_ = Construction::GaussianTailEuler;
  b.superpoly_ = true;
  b.params_ = {{"theta", theta}, {"M", M}, {"x0", x0}, {"T", T}};
  const double up = x0 + M * T, down = x0 - M * T;
  b.eval_ = [theta, denom, lo, hi, up, down](double z) {
    if (z > hi) {
      const double d = z - up;
      return std::exp(-theta * d * d / denom);
    }
    if (z < lo) {
      const double d = z - down;
      return std::exp(-theta * d * d / denom);
    }
    return 1.0;
  };
  return b;
}

BumpFunction BumpFunction::euler_tail_lipschitz(double theta, double M) {
  if (!(theta > 0.0 && theta < 1.0))
    throw std::invalid_argument("euler_tail_lipschitz: theta must lie in (0,1)");
  if (!(M > 0.0)) throw std::invalid_argument("euler_tail_lipschitz: M must be > 0");
  const double z0 = std::exp(3.0 * M);
  const double coef = 2.0 * theta / (3.0 * std::sqrt(3.0 * M));
  BumpFunction b;
  b.construction_ = Construction::LipschitzTailEuler;
  b.superpoly_ = true;  // exp(-coef (log|z|)^{3/2}) beats every power of z
  b.params_ = {{"theta", theta}, {"M", M}, {"z0", z0}};
  b.eval_ = [z0, coef](double z) {
    const double a = std::abs(z);
    if (a <= z0) return 1.0;
    const double lg = std::log(a);
    return std::exp(-coef * std::sqrt(lg) * lg);
  };
  return b;
}

BumpFunction BumpFunction::envelope(const BumpFunction& a, const BumpFunction& b) {
  BumpFunction out;
  out.construction_ = Construction::Envelope;
  out.superpoly_ = a.superpoly_ && b.superpoly_;
  out.params_ = {{"a", a.to_json()}, {"b", b.to_json()}};
  auto fa = a.eval_, fb = b.eval_;
  out.eval_ = [fa, fb](double z) { return std::max(fa(z), fb(z)); };
  return out;
}

namespace {

std::function<double(double)> moments_by_name(const std::string& name,
                                              const nlohmann::json& params) {
  if (name == "ones") return [](double) { return 1.0; };
  if (name == "stdnormal") return [](double p) { return stats::normal_lp_norm(p); };
  if (name == "euler_mp2") {
    // C_p = e^{M p^2} plus the target's moments; the M is user-chosen and
    // non-normative.
    const double M = params.value("M", 1.0);
    return [M](double p) { return std::exp(M * p * p) + stats::normal_lp_norm(p); };
  }
  throw std::invalid_argument("unknown moment profile: " + name);
}

}  // namespace

BumpFunction BumpFunction::from_registry(const std::string& name,
                                         const nlohmann::json& params) {
  if (name == "exp_abs" || name == "gauss" || name == "exp_half_abs")
    return explicit_form(name);
  if (name == "power_decay") return explicit_form(name, params.value("exponent", 8.0));
  if (name == "euler_tail_bounded")
    return euler_tail_bounded(params.value("theta", 0.5), params.value("M", 1.0),
                              params.value("x0", 0.0), params.value("T", 1.0));
  if (name == "euler_tail_lipschitz")
    return euler_tail_lipschitz(params.value("theta", 0.5), params.value("M", 1.0));
  if (name == "chebyshev") {
    const std::string moments = params.value("moments", "ones");
    BumpFunction floor = params.contains("floor") ? from_json(params.at("floor"))
                                                  : explicit_form("exp_abs");
    return chebyshev_tail(moments_by_name(moments, params), params.value("theta", 0.5),
                          std::move(floor), params.value("p_max", 64), moments);
  }
  throw std::invalid_argument("unknown bump: " + name);
}

BumpFunction BumpFunction::from_json(const nlohmann::json& j) {
  const std::string construction = j.at("construction").get<std::string>();
  const nlohmann::json params = j.value("params", nlohmann::json::object());
  if (construction == "explicit_form")
    return explicit_form(params.at("form").get<std::string>(), params.value("exponent", 0.0));
  if (construction == "gaussian_tail_euler")
    return euler_tail_bounded(params.at("theta").get<double>(), params.at("M").get<double>(),
                              params.at("x0").get<double>(), params.at("T").get<double>());
  if (construction == "lipschitz_tail_euler")
    return euler_tail_lipschitz(params.at("theta").get<double>(), params.at("M").get<double>());
  if (construction == "chebyshev_tail") {
    const std::string moments = params.at("moments").get<std::string>();
    BumpFunction floor = from_json(params.at("floor"));
    return chebyshev_tail(moments_by_name(moments, params), params.at("theta").get<double>(),
                          std::move(floor), params.value("p_max", 64), moments);
  }
  if (construction == "envelope")
    return envelope(from_json(params.at("a")), from_json(params.at("b")));
  throw std::invalid_argument("unknown bump construction: " + construction);
}

}  // namespace sderates::bump
