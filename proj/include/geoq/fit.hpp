#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace geoq {

/// y ≈ A·x^b fitted by least squares in log–log space.
struct PowerLawFit {
    double exponent = 0.0;
    double log_prefactor = 0.0;
    double rms_residual = 0.0;  // in natural-log units
    double max_residual = 0.0;
    std::size_t points = 0;
    bool degenerate = true;
    std::string reason;
};

/// Values at or below this floor are treated as numerically zero.
inline constexpr double kFitFloor = 1e-12;

inline PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y,
                                 double floor = kFitFloor) {
    PowerLawFit f;
    f.points = x.size();
    if (x.size() != y.size()) {
        f.reason = "length mismatch";
        return f;
    }
    if (x.size() < 2) {
        f.reason = "fewer than two points";
        return f;
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > floor) || !std::isfinite(y[i])) {
            f.reason = "value at or below numerical zero";
            return f;
        }
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    const double m = static_cast<double>(lx.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx <= 1e-300) {
        f.reason = "zero variance in abscissa";
        return f;
    }
    f.exponent = sxy / sxx;
    f.log_prefactor = my - f.exponent * mx;
    double ss = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (f.log_prefactor + f.exponent * lx[i]);
        ss += r * r;
        f.max_residual = std::max(f.max_residual, std::abs(r));
    }
    f.rms_residual = std::sqrt(ss / m);
    f.degenerate = false;
    return f;
}

}  // namespace geoq
