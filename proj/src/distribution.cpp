#include "sderates/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sderates::dist {

namespace {
constexpr double kGridSlack = 0.05;  // documented one-sided d_X grid bias allowance
}

DistributionModel DistributionModel::analytic(std::string name,
                                              std::function<double(double)> cdf,
                                              std::optional<double> density_sup,
                                              double support_lo, double support_hi) {
  if (!cdf) throw std::invalid_argument("analytic model requires a cdf");
  if (!(support_lo < support_hi))
    throw std::invalid_argument("analytic model: support_lo must be < support_hi");
  DistributionModel m;
  m.kind_ = Kind::AnalyticCdf;
  m.name_ = std::move(name);
  m.cdf_ = std::move(cdf);
  m.density_sup_ = density_sup;
  m.support_lo_ = support_lo;
  m.support_hi_ = support_hi;
  m.validate();
  return m;
}

DistributionModel DistributionModel::empirical(std::vector<double> sample) {
  if (sample.empty()) throw std::invalid_argument("empirical model: sample is empty");
  for (double v : sample)
    if (!std::isfinite(v))
      throw std::invalid_argument("empirical model: sample contains non-finite values");
  DistributionModel m;
  m.kind_ = Kind::EmpiricalSample;
  m.name_ = "empirical";
  m.sample_ = std::move(sample);
  std::sort(m.sample_.begin(), m.sample_.end());
  return m;
}

DistributionModel DistributionModel::load_empirical(const std::string& path) {
  const bool text = path.ends_with(".csv") || path.ends_with(".txt");
  std::vector<double> sample;
  if (text) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        sample.push_back(std::stod(line));
      } catch (const std::exception&) {
        if (sample.empty()) continue;  // tolerate a header line
        throw std::runtime_error("non-numeric row in " + path + ": " + line);
      }
    }
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    in.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::size_t>(in.tellg());
    in.seekg(0);
    if (bytes % sizeof(double) != 0)
      throw std::runtime_error(path + ": size is not a multiple of 8 bytes");
    sample.resize(bytes / sizeof(double));
    in.read(reinterpret_cast<char*>(sample.data()), static_cast<std::streamsize>(bytes));
  }
  return empirical(std::move(sample));
}

void DistributionModel::validate() const {
  // Spot-check monotonicity and limits on a coarse grid over the support hull.
  const double lo = std::isinf(support_lo_) ? -64.0 : support_lo_;
  const double hi = std::isinf(support_hi_) ? 64.0 : support_hi_;
  double prev = -1e-12;
  for (int i = 0; i <= 64; ++i) {
    const double x = lo + (hi - lo) * i / 64.0;
    const double f = cdf_(x);
    if (!(f >= prev - 1e-12) || f < -1e-12 || f > 1.0 + 1e-12)
      throw std::invalid_argument("analytic model: cdf fails monotonicity spot check");
    if (density_sup_ && i > 0) {
      const double dx = (hi - lo) / 64.0;
      const double slope = (f - std::max(prev, 0.0)) / dx;
      if (slope > *density_sup_ * (1.0 + 1e-6) + 1e-12)
        throw std::invalid_argument(
            "analytic model: density_sup is below an observed cdf slope");
    }
    prev = f;
  }
  if (cdf_(lo - (std::isinf(support_lo_) ? 0.0 : 1.0)) > 1e-9 && !std::isinf(support_lo_))
    throw std::invalid_argument("analytic model: cdf does not vanish below the support");
}

double DistributionModel::cdf(double x) const {
  if (kind_ == Kind::AnalyticCdf) return cdf_(x);
  const auto it = std::upper_bound(sample_.begin(), sample_.end(), x);
  return static_cast<double>(it - sample_.begin()) / static_cast<double>(sample_.size());
}

double DistributionModel::rearrangement(double s) const {
  if (!(s > 0.0 && s < 1.0))
    throw std::domain_error("rearrangement: s must lie in the open interval (0,1)");
  if (kind_ == Kind::EmpiricalSample) {
    const std::size_t n = sample_.size();
    const auto m = static_cast<std::size_t>(std::floor(s * static_cast<double>(n)));
    const std::size_t idx = n - std::min(m, n - 1) - 1;
    return sample_[idx];
  }
  // Smallest c with cdf(c) >= 1 - s, by bracketing bisection.
  const double target = 1.0 - s;
  double lo = std::isinf(support_lo_) ? -1.0 : support_lo_;
  double hi = std::isinf(support_hi_) ? 1.0 : support_hi_;
  if (std::isinf(support_lo_)) {
    while (cdf_(lo) >= target) lo = lo * 2.0 - 1.0;
  }
  if (std::isinf(support_hi_)) {
    while (cdf_(hi) < target) hi = hi * 2.0 + 1.0;
  }
  // Invariant: cdf(hi) >= target; lo is either below target or the support edge.
  for (int it = 0; it < 1500; ++it) {
    const double width = hi - lo;
    if (width <= std::max(1e-12 * std::max(std::abs(lo), std::abs(hi)), 1e-300)) break;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (cdf_(mid) >= target)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double DistributionModel::alpha_level(double K) const {
  if (!std::isfinite(K)) throw std::domain_error("alpha_level: K must be finite");
  if (kind_ == Kind::EmpiricalSample) {
    const auto it = std::lower_bound(sample_.begin(), sample_.end(), K);
    return static_cast<double>(sample_.end() - it) / static_cast<double>(sample_.size());
  }
  return 1.0 - cdf_(K);
}

double DistributionModel::tail_probability(double K, TailSide side) const {
  if (side == TailSide::UpperGeq) return alpha_level(K);
  return cdf(K);
}

namespace {

struct RatioScan {
  double min_ratio = std::numeric_limits<double>::infinity();
  bool zero = false;
};

void consider(RatioScan& scan, double numerator, double denominator) {
  if (denominator <= 0.0) return;
  const double r = numerator / denominator;
  if (r < scan.min_ratio) scan.min_ratio = r;
  if (numerator == 0.0) scan.zero = true;
}

}  // namespace

MinimalSlope DistributionModel::minimal_slope_dx(double K, std::size_t grid_size) const {
  if (grid_size < 100) throw std::invalid_argument("minimal_slope_dx: grid_size must be >= 100");
  if (!std::isfinite(K)) throw std::domain_error("minimal_slope_dx: K must be finite");
  const double alpha = alpha_level(K);
  MinimalSlope out;

  if (kind_ == Kind::EmpiricalSample) {
    // X* is a step function; the infimum over each flat piece is exact:
    // |x_j - K| divided by the largest |s - alpha| within the piece.
    const std::size_t n = sample_.size();
    RatioScan scan;
    for (std::size_t j = 0; j < n; ++j) {
      const double a = static_cast<double>(n - 1 - j) / static_cast<double>(n);
      const double b = static_cast<double>(n - j) / static_cast<double>(n);
      const double far = std::max(std::abs(a - alpha), std::abs(b - alpha));
      consider(scan, std::abs(sample_[j] - K), far);
    }
    out.value = scan.zero ? 0.0 : scan.min_ratio;
    out.zero_flagged = scan.zero;
    out.min_offset = 1.0 / static_cast<double>(n);
    out.points = n;
    return out;
  }

  // Stratified grid: geometric ladders hugging alpha and both tails, plus a
  // dyadic uniform stratum. All three families are nested as grid_size grows,
  // so refinement can only lower the infimum estimate.
  std::vector<double> svals;
  const std::size_t ladder = std::min<std::size_t>(10 + grid_size / 8, 28);
  for (std::size_t j = 0; j < ladder; ++j) {
    const double delta = 0.25 * std::pow(0.5, static_cast<double>(j));
    if (delta < 1e-9) break;
    svals.push_back(alpha + delta);
    svals.push_back(alpha - delta);
  }
  const std::size_t tail = std::min<std::size_t>(10 + grid_size / 8, 45);
  for (std::size_t j = 0; j < tail; ++j) {
    const double s = std::pow(0.5, static_cast<double>(j + 2));
    svals.push_back(s);
    svals.push_back(1.0 - s);
  }
  const auto level = static_cast<std::size_t>(
      std::floor(std::log2(static_cast<double>(std::max<std::size_t>(grid_size / 2, 8)))));
  const std::size_t denom = std::size_t{1} << level;
  for (std::size_t k = 1; k < denom; ++k)
    svals.push_back(static_cast<double>(k) / static_cast<double>(denom));

  RatioScan scan;
  double min_offset = 1.0;
  for (double s : svals) {
    if (!(s > 0.0 && s < 1.0)) continue;
    const double off = std::abs(s - alpha);
    // Below the ladder floor the quantile solver cannot resolve X*(s) from
    // X*(alpha); such points carry no slope information.
    if (off < 1e-9) continue;
    min_offset = std::min(min_offset, off);
    consider(scan, std::abs(rearrangement(s) - K), off);
  }
  const bool zero = scan.zero || scan.min_ratio < 1e-14;
  out.value = zero ? 0.0 : scan.min_ratio;
  out.zero_flagged = zero;
  out.min_offset = min_offset;
  out.points = svals.size();
  return out;
}

DxBound DistributionModel::dx_upper_bound(double K, std::size_t grid_size) const {
  const MinimalSlope slope = minimal_slope_dx(K, grid_size);
  DxBound out;
  out.d = slope.value;
  if (slope.zero_flagged || slope.value <= 0.0) {
    out.unbounded = true;
    out.D = std::numeric_limits<double>::infinity();
    return out;
  }
  out.D = 1.0 / slope.value;
  if (density_sup_ && out.D > *density_sup_ * (1.0 + kGridSlack))
    throw std::runtime_error("dx_upper_bound: D_X(K) exceeds the declared density bound");
  return out;
}

}  // namespace sderates::dist
