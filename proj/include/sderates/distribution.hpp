#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sderates::dist {

enum class TailSide { UpperGeq, LowerLeq };

struct MinimalSlope {
  double value = 0.0;        // grid infimum of |X*(s)-K| / |s-alpha(K)|
  bool zero_flagged = false; // an atom forced a zero slope
  double min_offset = 0.0;   // smallest |s-alpha| probed (grid resolution)
  std::size_t points = 0;
};

struct DxBound {
  double d = 0.0;
  double D = 0.0;  // 1/d; +inf when unbounded
  bool unbounded = false;
};

// Law of a real random variable, either through an analytic CDF or an
// empirical sample. All operations are read-only.
class DistributionModel {
 public:
  enum class Kind { AnalyticCdf, EmpiricalSample };

  static DistributionModel analytic(std::string name, std::function<double(double)> cdf,
                                    std::optional<double> density_sup, double support_lo,
                                    double support_hi);
  static DistributionModel empirical(std::vector<double> sample);
  // One double per line (.csv/.txt) or raw little-endian doubles (anything else).
  static DistributionModel load_empirical(const std::string& path);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  std::optional<double> density_sup() const { return density_sup_; }
  const std::vector<double>& sample() const { return sample_; }

  double cdf(double x) const;  // P(X <= x)

  // Non-increasing rearrangement X*(s) = inf{c : P(X > c) <= s}, s in (0,1).
  // Analytic models use bracketing bisection (1e-12 relative tolerance,
  // 1e-300 absolute floor); empirical models use order statistics.
  double rearrangement(double s) const;

  // alpha(K) = P(X >= K).
  double alpha_level(double K) const;

  double tail_probability(double K, TailSide side) const;

  // Grid infimum of the chord slope of X* from level K. The estimate is
  // one-sided (an over-estimate) and nonincreasing as grid_size grows.
  MinimalSlope minimal_slope_dx(double K, std::size_t grid_size = 2000) const;

  // D_X(K) = 1 / d_X(K); checks D <= density_sup * (1 + grid slack) when the
  // density bound is known.
  DxBound dx_upper_bound(double K, std::size_t grid_size = 2000) const;

 private:
  DistributionModel() = default;
  void validate() const;

  Kind kind_ = Kind::EmpiricalSample;
  std::string name_;
  std::function<double(double)> cdf_;
  std::optional<double> density_sup_;
  double support_lo_ = 0.0;
  double support_hi_ = 0.0;
  std::vector<double> sample_;  // sorted ascending
};

// Thin accessor pairing a model with its rearrangement.
struct RearrangementView {
  const DistributionModel* source = nullptr;
  double operator()(double s) const { return source->rearrangement(s); }
};

}  // namespace sderates::dist
