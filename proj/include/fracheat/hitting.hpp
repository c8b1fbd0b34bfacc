#pragma once
#include <span>
#include <string>
#include <vector>

#include "fracheat/field.hpp"
#include "fracheat/potential.hpp"

namespace fracheat {

struct Interval {
    double lo = 0, hi = 0;
    double length() const { return hi - lo; }
    bool contains(double v) const { return v >= lo && v <= hi; }
};

struct TargetPart {
    enum class Kind { Ball, Box } kind = Kind::Ball;
    std::vector<double> a, b;  // ball: centre; box: lo, hi
    double radius = 0;
};

// Union of balls and boxes in [-M, M]^d; no parts is the empty set.
struct TargetSet {
    int d = 1;
    double M = 10;
    std::vector<TargetPart> parts;

    // "ball:<c_1,...,c_d>:<r>" or "box:<lo_1,...>:<hi_1,...>", one per part.
    static TargetSet parse(const std::vector<std::string>& specs, int d, double M = 10);
    static TargetSet ball(std::vector<double> centre, double radius, double M = 10);
    std::string spec() const;
    bool empty() const { return parts.empty(); }
    // 0 inside, Euclidean distance outside, +inf for the empty set.
    double distance(std::span<const double> z) const;
    // Whether the segment [lo, hi] of the line meets the set (d = 1 only).
    bool meets_interval(double lo, double hi) const;
    // Smallest ball radius or box half side.
    double feature_size() const;
    PointCloud discretize(double spacing) const;
    double diameter() const;
};

struct Wilson {
    double lo, hi;
};
Wilson wilson_interval(std::size_t k, std::size_t n, double z = 1.959963984540054);

struct HitOptions {
    bool dilate = true;
    bool enforce_resolution = true;  // throw when the mean slack exceeds half the feature size
    std::size_t first_replica = 0;
    std::size_t max_cloud = 1500;    // points of the target discretization
};

struct HitExperiment {
    std::string target_id;
    double eps = 0;  // feature size
    std::size_t n_replicas = 0, hits_lo = 0, hits_hi = 0;
    double p_lo = 0, p_hi = 0;
    double ci_lo = 0, ci_hi = 0;  // Wilson lower of p_lo, upper of p_hi
    double index = 0;             // d - beta
    double cap = 0, hausdorff_sum = 0;
    double mean_slack = 0;
    bool resolution_ok = true;
};

// Grid hits of u over I x J. The lower count uses grid values inside the
// target (and, for d = 1, sign changes between neighbours); the upper count
// dilates the target by each replica's continuity slack.
std::vector<HitExperiment> hit_probability_mc(const SimConfig& c, Interval I, Interval J,
                                              const std::vector<TargetSet>& targets, std::size_t n_replicas,
                                              const HitOptions& o = {});

struct SandwichFit {
    double c = 1;
    double c_lower = 0, c_upper = 0;
    bool finite = false;
};
// Smallest c with cap / c <= p_lo and p_hi <= c * hausdorff_sum for every row.
SandwichFit fit_sandwich(const std::vector<HitExperiment>& rows);

void write_hit_csv(const std::vector<HitExperiment>& rows, const std::string& file);

struct Cell {
    Interval I, J;
};

struct CellPartition {
    double t_step = 0, x_step = 0;
    long k_lo = 0, k_hi = 0, l_lo = 0, l_hi = 0;  // half-open index ranges
    long count() const { return (k_hi - k_lo) * (l_hi - l_lo); }
    Cell cell(long k, long l) const;
};

// Cells [k ts, (k+1) ts] x [l xs, (l+1) xs] meeting I x J with positive area,
// ts = 2^{-n/alpha}, xs = 2^{-(2n/alpha) v (n/H)}.
CellPartition cell_partition(Interval I, Interval J, int n, double alpha, double H);

struct SmallBallPoint {
    double eps = 0;
    std::size_t hits = 0;
    double p = 0, ci_lo = 0, ci_hi = 0;
    bool saturated = false, censored = false;
};

struct SmallBallFit {
    std::vector<SmallBallPoint> points;
    double slope = 0, intercept = 0;
    std::size_t n_fit = 0;
    int d = 1;
    bool verdict = false;  // |slope - d| <= 0.5
};

// P{u(I x J) meets B(z, eps)} on an m_t x m_x lattice of the cell; the field
// is evaluated pointwise from its mode coefficients. Points with p > 1/2 are
// saturated, points with fewer than min_hits hits censored; both stay out of
// the fit.
SmallBallFit small_ball_curve(const SimConfig& c, Interval I, Interval J, std::span<const double> z,
                              std::span<const double> radii, std::size_t n_replicas, int m_t = 5, int m_x = 5,
                              std::size_t min_hits = 10);

struct RangeDimension {
    double estimate = 0;
    std::vector<double> sides, counts;  // of the first sample
};

// Box counting of the grid range of each sample in R^d over dyadic scales
// below the range extent, stopping before the count reaches 1/4 of the
// point count; the mean slope over samples.
RangeDimension range_dimension_estimate(std::span<const FieldSample> samples, int min_scales = 3);

}  // namespace fracheat
