#pragma once
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <span>
#include <sstream>
#include <vector>

#include "fracheat/errors.hpp"

namespace fracheat::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;
    double l1 = 0.0;

    Result& operator+=(const Result& o) {
        value += o.value;
        error += o.error;
        l1 += o.l1;
        return *this;
    }
};

struct Options {
    double rel_tol = 1e-10;
    double abs_tol = 1e-15;
    // An estimate this many times above the requested tolerance is a failure.
    double fail_factor = 1e4;
    bool throw_on_failure = true;
};

void check(const Result& r, const Options& o, const char* where);

// Sorted breakpoints in [a, b]: the ends, each anchor inside, and geometric
// offsets anchor +/- h * ratio^j that stay inside the interval.
std::vector<double> graded_points(double a, double b, std::span<const double> anchors,
                                  double h, double ratio = 2.0);

inline boost::math::quadrature::tanh_sinh<double>& ts_engine() {
    thread_local boost::math::quadrature::tanh_sinh<double> engine(15);
    return engine;
}

// f(x, da, db) with da = x - a and db = b - x carried to full relative
// precision near the endpoints; suited to endpoint singularities.
template <class F>
Result tanh_sinh(F&& f, double a, double b, const Options& o = {}) {
    Result r;
    if (!(b > a)) return r;
    // Integrate over the unit interval: the engine's error estimate is
    // unreliable on very short absolute intervals.
    const double w = b - a;
    auto g = [&](double u, double uc) {
        double da, db;
        if (uc <= 0) {
            da = -uc * w;
            db = w - da;
        } else {
            db = uc * w;
            da = w - db;
        }
        const double x = (u < 0.5) ? a + da : b - db;
        return w * f(x, da, db);
    };
    r.value = ts_engine().integrate(g, 0.0, 1.0, o.rel_tol, &r.error, &r.l1);
    if (!std::isfinite(r.value)) r.error = INFINITY;
    return r;
}

template <class F>
Result gauss_kronrod(F&& f, double a, double b, const Options& o = {}, unsigned depth = 15) {
    Result r;
    if (!(b > a)) return r;
    r.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, a, b, depth, o.rel_tol, &r.error, &r.l1);
    r.error = std::max(r.error, 0.0);
    if (!std::isfinite(r.value)) r.error = INFINITY;
    return r;
}

// Sum of tanh-sinh integrals over consecutive breakpoints.
template <class F>
Result piecewise(F&& f, std::span<const double> pts, const Options& o = {}) {
    Result total;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double a = pts[i], b = pts[i + 1];
        if (b > a) total += tanh_sinh(f, a, b, o);
    }
    return total;
}

}  // namespace fracheat::quad
