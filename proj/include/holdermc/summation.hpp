#pragma once

#include <cmath>

namespace holdermc {

// Neumaier compensated accumulator. The sqrt(n)-scaled statistics cancel
// to ~1e-5 of the raw sums at n = 1e6, so naive accumulation is not enough.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  void merge(const CompensatedSum& other) {
    add(other.sum_);
    comp_ += other.comp_;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace holdermc
