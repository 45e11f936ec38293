#pragma once

// Error-free transformations and compensated reductions.

#include <cmath>
#include <initializer_list>
#include <span>
#include <utility>

namespace powsq::detail {

/// a + b = s + e exactly (Knuth).
inline std::pair<double, double> two_sum(double a, double b) noexcept
{
  const double s = a + b;
  const double bb = s - a;
  const double e = (a - (s - bb)) + (b - bb);
  return {s, e};
}

/// a * b = p + e exactly, via fused multiply-add.
inline std::pair<double, double> two_prod(double a, double b) noexcept
{
  const double p = a * b;
  const double e = std::fma(a, b, -p);
  return {p, e};
}

/// Dot product in twice the working precision (Ogita, Rump, Oishi "Dot2").
inline double dot2(std::span<const double> x, std::span<const double> y) noexcept
{
  double s = 0.0;
  double c = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto [p, pe] = two_prod(x[i], y[i]);
    auto [t, te] = two_sum(s, p);
    s = t;
    c += pe + te;
  }
  return s + c;
}

inline double dot2(std::initializer_list<double> x, std::initializer_list<double> y) noexcept
{
  return dot2(std::span<const double>(x.begin(), x.size()),
              std::span<const double>(y.begin(), y.size()));
}

/// Neumaier running sum.
class CompensatedSum {
public:
  void add(double v) noexcept
  {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

} // namespace powsq::detail
