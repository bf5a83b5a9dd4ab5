#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sderates/bump.hpp"

namespace sderates::func {

// Point mass of the representing measure mu.
struct Atom {
  double location = 0.0;
  double weight = 0.0;
};

// Absolutely continuous part of mu. When divided_by_bump is set the stored
// base function h means d mu = sgn-adjusted h / phi dz, and the phi-weighted
// integrands simplify to h and phi^{1/p} |h| — this avoids 0/0 at points
// where phi underflows.
struct DensityPart {
  std::string name;               // registry name, for serialization
  nlohmann::json params;
  std::function<double(double)> base;
  double support_lo = 0.0;        // -inf allowed
  double support_hi = 0.0;        // +inf allowed
  bool divided_by_bump = false;
};

// Point discontinuity: the function value at `location` is offset by
// lambda * phi(location) (or by lambda alone when no bump is attached).
struct Jump {
  double location = 0.0;
  double lambda = 0.0;
};

enum class ClassTag { Indicator, BV, NBV, Polynomial, GClass, ExponentialGrowth };
enum class IndicatorShape { ClosedUpper, OpenUpper, ClosedLower, OpenLower };

std::string to_string(ClassTag t);

// Canonical representation g = c + g^mu + Delta_A. Immutable after
// construction; evaluation and variation computations are pure.
class FunctionalRep {
 public:
  // Raw constructor; prefer the named factories below.
  FunctionalRep(ClassTag tag, double c, std::vector<Atom> atoms,
                std::vector<DensityPart> densities, std::vector<Jump> jumps,
                std::optional<bump::BumpFunction> bump);

  ClassTag class_tag() const { return tag_; }
  double constant() const { return c_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<DensityPart>& densities() const { return densities_; }
  const std::vector<Jump>& jumps() const { return jumps_; }
  const std::optional<bump::BumpFunction>& bump() const { return bump_; }
  const std::string& id() const { return id_; }
  void set_id(std::string id) { id_ = std::move(id); }

  // g(x) = c + integral of phi d mu over (0,x] (or (x,0]) + Delta_A(x).
  // Atoms are summed exactly; densities use adaptive quadrature (rel 1e-9).
  double evaluate(double x) const;

  // Closed-form evaluation when one is attached (registry functionals); the
  // quadrature route above is tested to agree with it.
  bool has_direct() const { return static_cast<bool>(direct_); }
  double direct(double x) const { return direct_(x); }
  void set_direct(std::function<double(double)> f) { direct_ = std::move(f); }
  // Direct when available, quadrature otherwise.
  double operator()(double x) const { return direct_ ? direct_(x) : evaluate(x); }

  // V(g) for BV-like tags: |mu|(R) plus the point-correction weights.
  double total_variation() const;

  // V_{p,phi}(g) = int phi^{1+1/p} d|mu| + sum |lambda_i| phi(a_i)^{1+1/p}.
  double p_phi_variation(double p) const;

  // Re-express the representation under a new bump (change of measure
  // d mu_new = (phi_old/phi_new) d mu_old, lambda_new = lambda old * ratio).
  FunctionalRep rebased(bump::BumpFunction new_bump) const;

  // Disjoint union: concatenates parts, adds constants. Both sides must carry
  // the same bump configuration.
  static FunctionalRep disjoint_union(const FunctionalRep& a, const FunctionalRep& b);

  nlohmann::json to_json() const;
  static FunctionalRep from_json(const nlohmann::json& j);

  // ---- named constructors ----

  // chi of [K,inf), (K,inf), (-inf,K], (-inf,K). No bump attached.
  static FunctionalRep indicator(double K, IndicatorShape shape = IndicatorShape::ClosedUpper);

  // BV function from step jumps (atoms of the BV measure), an optional
  // density, and a constant. No bump attached; evaluation uses phi == 1.
  static FunctionalRep bv(double c, std::vector<Atom> step_atoms,
                          std::vector<DensityPart> densities = {},
                          std::vector<Jump> point_corrections = {});

  // G-class member from a BV representation (measure change d mu = d mu_BV / phi).
  static FunctionalRep from_bv(const FunctionalRep& bv_rep, bump::BumpFunction bump, double p);

  // Polynomial c0 + c1 x + ... in G-form: c = g(0), d mu = sgn(z) g'(z)/phi dz.
  // Requires a bump that decays faster than any polynomial.
  static FunctionalRep from_polynomial(std::vector<double> coeffs, bump::BumpFunction bump,
                                       double p);

  // g(z) = exp(coef |z|^gamma), gamma in (0,2]; see exp_growth_membership.
  static FunctionalRep exp_growth(double coef, double gamma, bump::BumpFunction bump);

 private:
  FunctionalRep() = default;

  ClassTag tag_ = ClassTag::BV;
  double c_ = 0.0;
  std::vector<Atom> atoms_;
  std::vector<DensityPart> densities_;
  std::vector<Jump> jumps_;
  std::optional<bump::BumpFunction> bump_;
  std::function<double(double)> direct_;
  std::string id_;
  nlohmann::json meta_;  // factory parameters, kept for serialization
};

struct ExpGrowthMembership {
  bool member = false;
  double v_p_phi = 0.0;  // set when member
};

// Membership of exp(coef |z|^gamma) in the G-class of the Gaussian tail bump:
// member iff gamma < 2, or gamma == 2 and coef < theta/p. When member, the
// (p,phi)-variation is computed by quadrature.
ExpGrowthMembership exp_growth_membership(double coef, double gamma, double theta, double p,
                                          const bump::BumpFunction& gaussian_tail_bump);

// Density part helpers (registry-named, serializable).
DensityPart polynomial_derivative_density(std::vector<double> coeffs);
DensityPart arctan_derivative_density();
DensityPart constant_density(double value, double lo, double hi);
DensityPart exp_growth_derivative_density(double coef, double gamma);
DensityPart density_from_json(const nlohmann::json& j);

}  // namespace sderates::func
