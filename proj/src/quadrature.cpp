#include "fracheat/quadrature.hpp"

#include <algorithm>

namespace fracheat::quad {

void check(const Result& r, const Options& o, const char* where) {
    const double allowed = o.fail_factor * std::max(o.abs_tol, o.rel_tol * std::max(std::abs(r.l1), std::abs(r.value)));
    if (std::isfinite(r.value) && r.error <= allowed) return;
    if (!o.throw_on_failure) return;
    std::ostringstream msg;
    msg << where << ": quadrature did not converge (value " << r.value << ", residual estimate "
        << r.error << ", allowed " << allowed << ")";
    throw NumericalError(msg.str());
}

std::vector<double> graded_points(double a, double b, std::span<const double> anchors, double h,
                                  double ratio) {
    std::vector<double> pts{a, b};
    if (h > 0 && ratio > 1) {
        for (double c : anchors) {
            if (c < a || c > b) continue;
            pts.push_back(c);
            for (double off = h; off < b - a; off *= ratio) {
                if (c - off > a) pts.push_back(c - off);
                if (c + off < b) pts.push_back(c + off);
            }
        }
    }
    std::sort(pts.begin(), pts.end());
    std::vector<double> out;
    for (double p : pts)
        if (out.empty() || p > out.back()) out.push_back(p);
    out.back() = b;
    out.front() = a;
    return out;
}

}  // namespace fracheat::quad
