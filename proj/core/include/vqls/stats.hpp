#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace vqls {

// Neumaier-compensated accumulator; reduction order is fixed by the caller so
// sums are reproducible across thread counts.
class KahanSum {
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
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 1.0;
};

// Ordinary least squares y ~ slope*x + intercept.
inline LinearFit linear_fit(const std::vector<double>& xs,
                            const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) {
        throw std::invalid_argument("linear_fit needs >= 2 paired points");
    }
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    LinearFit fit;
    if (sxx <= 0.0) throw std::invalid_argument("linear_fit: degenerate x values");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = (syy <= 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

// Power-law fit y ~ c * x^m via regression in log-log space. All samples must
// be positive.
inline LinearFit power_law_fit(const std::vector<double>& xs,
                               const std::vector<double>& ys) {
    std::vector<double> lx(xs.size()), ly(ys.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] <= 0.0 || ys[i] <= 0.0) {
            throw std::invalid_argument("power_law_fit needs positive samples");
        }
        lx[i] = std::log(xs[i]);
        ly[i] = std::log(ys[i]);
    }
    return linear_fit(lx, ly);
}

inline double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return (v.size() % 2 == 1) ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace vqls
