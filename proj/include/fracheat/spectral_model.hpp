#pragma once
#include <string>
#include <utility>
#include <vector>

namespace fracheat {

enum class SpectrumKind { White, Riesz, FractionalSpace, PowerLaw };

struct SpectrumModel {
    SpectrumKind kind = SpectrumKind::White;
    double param = 0.0;  // gamma, K or alpha; unused for White
    double H = 0.5;
    double q0 = 1.0;

    static SpectrumModel white(double H);
    static SpectrumModel riesz(double gamma, double H);
    static SpectrumModel fractional_space(double K, double H);
    static SpectrumModel power_law(double alpha, double H);
    // "white" | "riesz:<gamma>" | "fracspace:<K>" | "powerlaw:<alpha>"
    static SpectrumModel parse(const std::string& spectrum, double H);
    std::string spec_string() const;
};

// q_n for n >= 1.
double q_coeff(const SpectrumModel& m, long n);

// q_n = kappa * n^exponent + c_n with |c_n| <= correction * n^-2 (Riesz only).
struct Envelope {
    double kappa;
    double exponent;
    double correction;
};
Envelope envelope(const SpectrumModel& m);

struct ExistenceReport {
    bool convergent;
    double summand_exponent;  // exponent of q_n n^{-4H}
    std::vector<std::pair<long, double>> partial_sums;
    std::string reason;
};
ExistenceReport existence_margin(const SpectrumModel& m);

struct ExponentPair {
    double alpha;
    double beta;
};
ExponentPair exponents(const SpectrumModel& m);
double beta_of(double alpha, double H);

// Riesz-kernel circle coefficients: r(k) and the limit of the partial sums.
double riesz_r(double gamma, long k);
double riesz_c_infinity(double gamma);
double riesz_partial_sum(double gamma, long n);
constexpr long kRieszCap = 100000;

std::string format_double(double x);

}  // namespace fracheat
