#include "sderates/functional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sderates/quadrature.hpp"

namespace sderates::func {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sgn(double z) { return z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0); }

double horner(const std::vector<double>& coeffs, double x) {
  double v = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) v = v * x + coeffs[i];
  return v;
}

std::vector<double> derivative_coeffs(const std::vector<double>& coeffs) {
  std::vector<double> d;
  for (std::size_t i = 1; i < coeffs.size(); ++i)
    d.push_back(static_cast<double>(i) * coeffs[i]);
  return d;
}

double json_to_bound(const nlohmann::json& j) {
  if (j.is_null()) return kInf;
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw std::invalid_argument("bad support bound: " + s);
  }
  return j.get<double>();
}

nlohmann::json bound_to_json(double b) {
  if (b == kInf) return "inf";
  if (b == -kInf) return "-inf";
  return b;
}

}  // namespace

std::string to_string(ClassTag t) {
  switch (t) {
    case ClassTag::Indicator: return "indicator";
    case ClassTag::BV: return "bv";
    case ClassTag::NBV: return "nbv";
    case ClassTag::Polynomial: return "polynomial";
    case ClassTag::GClass: return "gclass";
    case ClassTag::ExponentialGrowth: return "exp_growth";
  }
  return "?";
}

namespace {
ClassTag tag_from_string(const std::string& s) {
  if (s == "indicator") return ClassTag::Indicator;
  if (s == "bv") return ClassTag::BV;
  if (s == "nbv") return ClassTag::NBV;
  if (s == "polynomial") return ClassTag::Polynomial;
  if (s == "gclass") return ClassTag::GClass;
  if (s == "exp_growth") return ClassTag::ExponentialGrowth;
  throw std::invalid_argument("unknown class tag: " + s);
}
}  // namespace

FunctionalRep::FunctionalRep(ClassTag tag, double c, std::vector<Atom> atoms,
                             std::vector<DensityPart> densities, std::vector<Jump> jumps,
                             std::optional<bump::BumpFunction> bump)
    : tag_(tag),
      c_(c),
      atoms_(std::move(atoms)),
      densities_(std::move(densities)),
      jumps_(std::move(jumps)),
      bump_(std::move(bump)) {
  for (std::size_t i = 0; i < jumps_.size(); ++i)
    for (std::size_t j = i + 1; j < jumps_.size(); ++j)
      if (jumps_[i].location == jumps_[j].location)
        throw std::invalid_argument("jump locations must be distinct");
}

double FunctionalRep::evaluate(double x) const {
  const auto phi = [this](double z) { return bump_ ? (*bump_)(z) : 1.0; };
  double value = c_;
  if (x >= 0.0) {
    for (const Atom& a : atoms_)
      if (a.location > 0.0 && a.location <= x) value += a.weight * phi(a.location);
  } else {
    for (const Atom& a : atoms_)
      if (a.location > x && a.location <= 0.0) value += a.weight * phi(a.location);
  }
  quad::Options opts;
  opts.rel_tol = 1e-9;
  for (const DensityPart& d : densities_) {
    const double lo = x >= 0.0 ? std::max(0.0, d.support_lo) : std::max(x, d.support_lo);
    const double hi = x >= 0.0 ? std::min(x, d.support_hi) : std::min(0.0, d.support_hi);
    if (!(lo < hi)) continue;
    const auto integrand = d.divided_by_bump
                               ? d.base
                               : std::function<double(double)>([&d, phi](double z) {
                                   return phi(z) * d.base(z);
                                 });
    value += quad::integrate(integrand, lo, hi, opts);
  }
  for (const Jump& j : jumps_)
    if (x == j.location) value += j.lambda * phi(j.location);
  return value;
}

double FunctionalRep::total_variation() const {
  if (tag_ != ClassTag::BV && tag_ != ClassTag::NBV && tag_ != ClassTag::Indicator)
    throw std::logic_error("total_variation: representation is not BV-tagged");
  double v = 0.0;
  for (const Atom& a : atoms_) v += std::abs(a.weight);
  quad::Options opts;
  for (const DensityPart& d : densities_) {
    if (d.divided_by_bump)
      throw std::logic_error("total_variation: bump-scaled density in a BV representation");
    v += quad::integrate_improper([&d](double z) { return std::abs(d.base(z)); },
                                  d.support_lo, d.support_hi, opts);
  }
  for (const Jump& j : jumps_) v += std::abs(j.lambda);
  return v;
}

double FunctionalRep::p_phi_variation(double p) const {
  if (!bump_) throw std::logic_error("p_phi_variation: no bump attached");
  if (!(p >= 1.0)) throw std::invalid_argument("p_phi_variation: p must be >= 1");
  const bump::BumpFunction& phi = *bump_;
  const double expo = 1.0 + 1.0 / p;
  double v = 0.0;
  for (const Atom& a : atoms_) v += std::abs(a.weight) * std::pow(phi(a.location), expo);
  quad::Options opts;
  for (const DensityPart& d : densities_) {
    // phi^{1+1/p} |rho| with rho = base/phi collapses to phi^{1/p} |base|.
    auto integrand = d.divided_by_bump
                         ? std::function<double(double)>([&d, &phi, p](double z) {
                             return std::pow(phi(z), 1.0 / p) * std::abs(d.base(z));
                           })
                         : std::function<double(double)>([&d, &phi, expo](double z) {
                             return std::pow(phi(z), expo) * std::abs(d.base(z));
                           });
    try {
      v += quad::integrate_improper(integrand, d.support_lo, d.support_hi, opts);
    } catch (const quad::QuadratureError& e) {
      throw std::runtime_error(
          std::string("p_phi_variation: integral diverged; phi is not in "
                      "L_{1+1/p}(|mu|) for this representation (") +
          e.what() + ")");
    }
  }
  for (const Jump& j : jumps_) v += std::abs(j.lambda) * std::pow(phi(j.location), expo);
  return v;
}

FunctionalRep FunctionalRep::rebased(bump::BumpFunction new_bump) const {
  const auto old_phi = [this](double z) { return bump_ ? (*bump_)(z) : 1.0; };
  FunctionalRep out;
  out.tag_ = ClassTag::GClass;
  out.c_ = c_;
  out.bump_ = std::move(new_bump);
  const bump::BumpFunction& psi = *out.bump_;
  for (const Atom& a : atoms_)
    out.atoms_.push_back({a.location, a.weight * old_phi(a.location) / psi(a.location)});
  for (const DensityPart& d : densities_) {
    if (d.divided_by_bump) {
      out.densities_.push_back(d);  // base is bump-independent
    } else {
      DensityPart nd;
      nd.name = "rebased";
      nd.params = d.params;
      nd.support_lo = d.support_lo;
      nd.support_hi = d.support_hi;
      nd.divided_by_bump = true;
      auto base = d.base;
      auto old_bump = bump_;
      nd.base = [base, old_bump](double z) {
        return (old_bump ? (*old_bump)(z) : 1.0) * base(z);
      };
      out.densities_.push_back(std::move(nd));
    }
  }
  for (const Jump& j : jumps_)
    out.jumps_.push_back({j.location, j.lambda * old_phi(j.location) / psi(j.location)});
  out.direct_ = direct_;
  out.id_ = id_;
  out.meta_ = meta_;
  return out;
}

FunctionalRep FunctionalRep::disjoint_union(const FunctionalRep& a, const FunctionalRep& b) {
  const bool ab = a.bump_.has_value(), bb = b.bump_.has_value();
  if (ab != bb || (ab && a.bump_->to_json() != b.bump_->to_json()))
    throw std::invalid_argument("disjoint_union: bump configurations differ");
  FunctionalRep out;
  out.tag_ = ab ? ClassTag::GClass : ClassTag::BV;
  out.c_ = a.c_ + b.c_;
  out.bump_ = a.bump_;
  out.atoms_ = a.atoms_;
  out.atoms_.insert(out.atoms_.end(), b.atoms_.begin(), b.atoms_.end());
  out.densities_ = a.densities_;
  out.densities_.insert(out.densities_.end(), b.densities_.begin(), b.densities_.end());
  out.jumps_ = a.jumps_;
  for (const Jump& j : b.jumps_) {
    bool merged = false;
    for (Jump& existing : out.jumps_)
      if (existing.location == j.location) {
        existing.lambda += j.lambda;
        merged = true;
        break;
      }
    if (!merged) out.jumps_.push_back(j);
  }
  return out;
}

FunctionalRep FunctionalRep::indicator(double K, IndicatorShape shape) {
  FunctionalRep base;
  base.tag_ = ClassTag::Indicator;
  if (K > 0.0) {
    base.c_ = 0.0;
    base.atoms_ = {{K, 1.0}};
  } else {
    base.c_ = 1.0;
    base.atoms_ = {{K, -1.0}};
  }
  FunctionalRep out = base;
  switch (shape) {
    case IndicatorShape::ClosedUpper:
      break;
    case IndicatorShape::OpenUpper:
      out.jumps_ = {{K, -1.0}};
      break;
    case IndicatorShape::ClosedLower:
      out.c_ = 1.0 - base.c_;
      out.atoms_ = {{K, -base.atoms_[0].weight}};
      out.jumps_ = {{K, 1.0}};
      break;
    case IndicatorShape::OpenLower:
      out.c_ = 1.0 - base.c_;
      out.atoms_ = {{K, -base.atoms_[0].weight}};
      break;
  }
  switch (shape) {
    case IndicatorShape::ClosedUpper:
      out.direct_ = [K](double x) { return x >= K ? 1.0 : 0.0; };
      break;
    case IndicatorShape::OpenUpper:
      out.direct_ = [K](double x) { return x > K ? 1.0 : 0.0; };
      break;
    case IndicatorShape::ClosedLower:
      out.direct_ = [K](double x) { return x <= K ? 1.0 : 0.0; };
      break;
    case IndicatorShape::OpenLower:
      out.direct_ = [K](double x) { return x < K ? 1.0 : 0.0; };
      break;
  }
  out.id_ = "indicator";
  const char* shapes[] = {"closed_upper", "open_upper", "closed_lower", "open_lower"};
  nlohmann::json meta = {{"K", K}, {"shape", shapes[static_cast<int>(shape)]}};
  out.meta_ = meta;
  return out;
}

FunctionalRep FunctionalRep::bv(double c, std::vector<Atom> step_atoms,
                                std::vector<DensityPart> densities,
                                std::vector<Jump> point_corrections) {
  FunctionalRep out(ClassTag::BV, c, std::move(step_atoms), std::move(densities),
                    std::move(point_corrections), std::nullopt);
  out.total_variation();  // rejects non-integrable density parts now
  return out;
}

FunctionalRep FunctionalRep::from_bv(const FunctionalRep& bv_rep, bump::BumpFunction bump,
                                     double p) {
  if (bv_rep.bump_.has_value())
    throw std::invalid_argument("from_bv: input already carries a bump");
  const double v = bv_rep.total_variation();
  if (!std::isfinite(v)) throw std::invalid_argument("from_bv: variation not finite");
  FunctionalRep out = bv_rep.rebased(std::move(bump));
  out.p_phi_variation(p);  // must be finite
  return out;
}

FunctionalRep FunctionalRep::from_polynomial(std::vector<double> coeffs,
                                             bump::BumpFunction bump, double p) {
  while (coeffs.size() > 1 && coeffs.back() == 0.0) coeffs.pop_back();
  const int degree = static_cast<int>(coeffs.size()) - 1;
  if (!bump.decays_faster_than_poly(2 * degree + 4))
    throw std::invalid_argument(
        "from_polynomial: bump does not decay faster than the required polynomial order");
  FunctionalRep out;
  out.tag_ = ClassTag::Polynomial;
  out.c_ = coeffs.empty() ? 0.0 : coeffs.front();
  out.bump_ = std::move(bump);
  if (degree >= 1) out.densities_.push_back(polynomial_derivative_density(coeffs));
  out.meta_ = {{"coeffs", coeffs}};
  auto cs = coeffs;
  out.direct_ = [cs](double x) { return horner(cs, x); };
  out.id_ = "polynomial";
  out.p_phi_variation(p);  // must be finite
  return out;
}

FunctionalRep FunctionalRep::exp_growth(double coef, double gamma, bump::BumpFunction bump) {
  if (!(coef > 0.0)) throw std::invalid_argument("exp_growth: coef must be > 0");
  if (!(gamma > 0.0 && gamma <= 2.0))
    throw std::invalid_argument("exp_growth: gamma must lie in (0,2]");
  FunctionalRep out;
  out.tag_ = ClassTag::ExponentialGrowth;
  out.c_ = 1.0;
  out.bump_ = std::move(bump);
  out.densities_.push_back(exp_growth_derivative_density(coef, gamma));
  out.meta_ = {{"coef", coef}, {"gamma", gamma}};
  out.direct_ = [coef, gamma](double x) {
    return std::exp(coef * std::pow(std::abs(x), gamma));
  };
  out.id_ = "exp_growth";
  return out;
}

ExpGrowthMembership exp_growth_membership(double coef, double gamma, double theta, double p,
                                          const bump::BumpFunction& gaussian_tail_bump) {
  if (gaussian_tail_bump.construction() != bump::Construction::GaussianTailEuler)
    throw std::invalid_argument("exp_growth_membership: expected the Gaussian tail bump");
  if (!(coef > 0.0)) throw std::invalid_argument("exp_growth_membership: coef must be > 0");
  if (!(gamma > 0.0 && gamma <= 2.0))
    throw std::invalid_argument("exp_growth_membership: gamma must lie in (0,2]");
  if (!(p >= 1.0)) throw std::invalid_argument("exp_growth_membership: p must be >= 1");
  ExpGrowthMembership out;
  out.member = gamma < 2.0 || coef < theta / p;
  if (!out.member) return out;
  const DensityPart d = exp_growth_derivative_density(coef, gamma);
  quad::Options opts;
  try {
    out.v_p_phi = quad::integrate_improper(
        [&](double z) {
          return std::pow(gaussian_tail_bump(z), 1.0 / p) * std::abs(d.base(z));
        },
        -kInf, kInf, opts);
  } catch (const quad::QuadratureError&) {
    // Near the gamma = 2 boundary the variation is finite but beyond double
    // range; the membership decision stands.
    out.v_p_phi = kInf;
  }
  return out;
}

DensityPart polynomial_derivative_density(std::vector<double> coeffs) {
  DensityPart d;
  d.name = "polynomial_derivative";
  d.params = {{"coeffs", coeffs}};
  const std::vector<double> dc = derivative_coeffs(coeffs);
  d.base = [dc](double z) { return sgn(z) * horner(dc, z); };
  d.support_lo = -kInf;
  d.support_hi = kInf;
  d.divided_by_bump = true;
  return d;
}

DensityPart arctan_derivative_density() {
  DensityPart d;
  d.name = "arctan_derivative";
  d.base = [](double z) { return 1.0 / (1.0 + z * z); };
  d.support_lo = -kInf;
  d.support_hi = kInf;
  d.divided_by_bump = false;
  return d;
}

DensityPart constant_density(double value, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("constant_density: empty support");
  DensityPart d;
  d.name = "constant";
  d.params = {{"value", value}, {"support", {bound_to_json(lo), bound_to_json(hi)}}};
  d.base = [value](double) { return value; };
  d.support_lo = lo;
  d.support_hi = hi;
  d.divided_by_bump = false;
  return d;
}

DensityPart exp_growth_derivative_density(double coef, double gamma) {
  DensityPart d;
  d.name = "exp_growth_derivative";
  d.params = {{"coef", coef}, {"gamma", gamma}};
  d.base = [coef, gamma](double z) {
    if (z == 0.0) return 0.0;  // the derivative is patched to 0 at the kink
    const double a = std::abs(z);
    return coef * gamma * std::pow(a, gamma - 1.0) * std::exp(coef * std::pow(a, gamma));
  };
  d.support_lo = -kInf;
  d.support_hi = kInf;
  d.divided_by_bump = true;
  return d;
}

DensityPart density_from_json(const nlohmann::json& j) {
  const std::string name = j.at("name").get<std::string>();
  if (name == "polynomial_derivative")
    return polynomial_derivative_density(
        j.at("params").at("coeffs").get<std::vector<double>>());
  if (name == "arctan_derivative") return arctan_derivative_density();
  if (name == "constant") {
    const auto& p = j.at("params");
    return constant_density(p.at("value").get<double>(),
                            json_to_bound(p.at("support").at(0)),
                            json_to_bound(p.at("support").at(1)));
  }
  if (name == "exp_growth_derivative") {
    const auto& p = j.at("params");
    return exp_growth_derivative_density(p.at("coef").get<double>(),
                                         p.at("gamma").get<double>());
  }
  throw std::invalid_argument("unknown density part: " + name);
}

nlohmann::json FunctionalRep::to_json() const {
  nlohmann::json j;
  j["class_tag"] = to_string(tag_);
  j["c"] = c_;
  j["atoms"] = nlohmann::json::array();
  for (const Atom& a : atoms_) j["atoms"].push_back({{"loc", a.location}, {"w", a.weight}});
  j["densities"] = nlohmann::json::array();
  for (const DensityPart& d : densities_) {
    if (d.name == "rebased")
      throw std::logic_error(
          "to_json: rebased density parts are runtime-only; serialize the source "
          "representation and re-apply the bump after loading");
    nlohmann::json dj = {{"name", d.name},
                         {"support", {bound_to_json(d.support_lo), bound_to_json(d.support_hi)}},
                         {"divided_by_bump", d.divided_by_bump}};
    if (!d.params.is_null()) dj["params"] = d.params;
    j["densities"].push_back(dj);
  }
  j["jumps"] = nlohmann::json::array();
  for (const Jump& jp : jumps_) j["jumps"].push_back({{"a", jp.location}, {"lambda", jp.lambda}});
  j["bump"] = bump_ ? bump_->to_json() : nlohmann::json();
  if (!meta_.is_null()) j["meta"] = meta_;
  if (!id_.empty()) j["id"] = id_;
  return j;
}

FunctionalRep FunctionalRep::from_json(const nlohmann::json& j) {
  const ClassTag tag = tag_from_string(j.at("class_tag").get<std::string>());
  const nlohmann::json meta = j.value("meta", nlohmann::json());

  // Rebuild through a factory when the metadata identifies one; this restores
  // the direct-evaluation closure as well.
  if (tag == ClassTag::Indicator && meta.contains("K")) {
    const std::string shape = meta.value("shape", "closed_upper");
    IndicatorShape s = IndicatorShape::ClosedUpper;
    if (shape == "open_upper") s = IndicatorShape::OpenUpper;
    if (shape == "closed_lower") s = IndicatorShape::ClosedLower;
    if (shape == "open_lower") s = IndicatorShape::OpenLower;
    FunctionalRep out = indicator(meta.at("K").get<double>(), s);
    if (!j.value("bump", nlohmann::json()).is_null())
      out = from_bv(out, bump::BumpFunction::from_json(j.at("bump")), 1.0);
    return out;
  }
  if (tag == ClassTag::Polynomial && meta.contains("coeffs"))
    return from_polynomial(meta.at("coeffs").get<std::vector<double>>(),
                           bump::BumpFunction::from_json(j.at("bump")), 1.0);
  if (tag == ClassTag::ExponentialGrowth && meta.contains("coef"))
    return exp_growth(meta.at("coef").get<double>(), meta.at("gamma").get<double>(),
                      bump::BumpFunction::from_json(j.at("bump")));

  std::vector<Atom> atoms;
  for (const auto& a : j.value("atoms", nlohmann::json::array()))
    atoms.push_back({a.at("loc").get<double>(), a.at("w").get<double>()});
  std::vector<DensityPart> densities;
  for (const auto& d : j.value("densities", nlohmann::json::array()))
    densities.push_back(density_from_json(d));
  std::vector<Jump> jumps;
  for (const auto& jp : j.value("jumps", nlohmann::json::array()))
    jumps.push_back({jp.at("a").get<double>(), jp.at("lambda").get<double>()});
  std::optional<bump::BumpFunction> b;
  if (j.contains("bump") && !j.at("bump").is_null())
    b = bump::BumpFunction::from_json(j.at("bump"));
  FunctionalRep out(tag, j.at("c").get<double>(), std::move(atoms), std::move(densities),
                    std::move(jumps), std::move(b));
  out.id_ = j.value("id", std::string());
  return out;
}

}  // namespace sderates::func
