#pragma once
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fracheat/field.hpp"
#include "fracheat/spectral_model.hpp"

namespace fracheat {

// Flat "key = value" text; '#' starts a comment; "target" may repeat.
// Errors carry the origin and line number.
class RunConfig {
public:
    static RunConfig parse(const std::string& text, const std::string& origin = "<config>");
    static RunConfig load(const std::string& file);

    // Sorted keys, repeated targets last in their original order.
    std::string serialize() const;
    // SHA-256 of serialize().
    std::string hash() const;

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, const std::string& value);
    std::string get(const std::string& key, const std::string& fallback) const;
    std::string require_string(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key, long fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const;
    const std::vector<std::string>& targets() const { return targets_; }
    void add_target(std::string spec) { targets_.push_back(std::move(spec)); }
    const std::map<std::string, std::string>& values() const { return values_; }

    bool operator==(const RunConfig& o) const { return values_ == o.values_ && targets_ == o.targets_; }

    // spectrum, H, d, t0, T, n_t, n_x, n_modes, seed, sampler
    SpectrumModel model() const;
    SimConfig sim_config() const;

private:
    std::map<std::string, std::string> values_;
    std::map<std::string, int> lines_;
    std::vector<std::string> targets_;
    std::string origin_;
    std::string where(const std::string& key) const;
};

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& file);

}  // namespace fracheat
