#pragma once

#include <cmath>

namespace apspic {

/// Neumaier compensated sum. Charge totals add up to 1e6 nearly equal
/// weights, where plain accumulation drifts by O(n eps).
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0;
  double comp_ = 0;
};

}  // namespace apspic
