#include "fracheat/config.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <fstream>
#include <memory>
#include <sstream>

#include "fracheat/errors.hpp"

namespace fracheat {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char ch : k)
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.')) return false;
    return true;
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text, const std::string& origin) {
    RunConfig c;
    c.origin_ = origin;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        const auto line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string at = origin + ":" + std::to_string(lineno) + ": ";
        if (eq == std::string::npos) throw DomainError(at + "expected key = value");
        const auto key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (!valid_key(key)) throw DomainError(at + "invalid key '" + key + "'");
        if (value.empty()) throw DomainError(at + "empty value for '" + key + "'");
        if (key == "target") {
            c.targets_.push_back(value);
            continue;
        }
        if (c.values_.count(key)) throw DomainError(at + "duplicate key '" + key + "'");
        c.values_[key] = value;
        c.lines_[key] = lineno;
    }
    return c;
}

RunConfig RunConfig::load(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw DomainError("cannot read config " + file);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), file);
}

std::string RunConfig::serialize() const {
    std::string s;
    for (const auto& [k, v] : values_) s += k + " = " + v + "\n";
    for (const auto& t : targets_) s += "target = " + t + "\n";
    return s;
}

std::string RunConfig::hash() const { return sha256_hex(serialize()); }

void RunConfig::set(const std::string& key, const std::string& value) {
    require(valid_key(key) && key != "target", "invalid key '" + key + "'");
    values_[key] = value;
    lines_.erase(key);
}

std::string RunConfig::where(const std::string& key) const {
    const auto it = lines_.find(key);
    if (it == lines_.end()) return "field '" + key + "'";
    return origin_ + ":" + std::to_string(it->second) + ": field '" + key + "'";
}

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::string RunConfig::require_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw DomainError("missing field '" + key + "'");
    return it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos == it->second.size()) return v;
    } catch (const std::exception&) {
    }
    throw DomainError(where(key) + ": expected a number, got '" + it->second + "'");
}

long RunConfig::get_long(const std::string& key, long fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    long v = 0;
    const auto& s = it->second;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
        throw DomainError(where(key) + ": expected an integer, got '" + s + "'");
    return v;
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::uint64_t v = 0;
    const auto& s = it->second;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
        throw DomainError(where(key) + ": expected a nonnegative integer, got '" + s + "'");
    return v;
}

std::vector<double> RunConfig::get_list(const std::string& key, std::vector<double> fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t pos = 0;
            const auto t = trim(cell);
            out.push_back(std::stod(t, &pos));
            if (pos != t.size()) throw std::invalid_argument(t);
        } catch (const std::exception&) {
            throw DomainError(where(key) + ": expected a comma-separated list of numbers");
        }
    }
    return out;
}

SpectrumModel RunConfig::model() const {
    try {
        return SpectrumModel::parse(get("spectrum", "white"), get_double("H", 0.5));
    } catch (const DomainError& e) {
        throw DomainError(where("spectrum") + ": " + e.what());
    }
}

SimConfig RunConfig::sim_config() const {
    SimConfig c;
    c.model = model();
    c.d = int(get_long("d", 1));
    c.n_modes = get_long("n_modes", 64);
    c.n_x = get_long("n_x", 2 * c.n_modes + 1);
    c.seed = get_u64("seed", 1);
    c.sampler = parse_sampler(get("sampler", "exact"));
    c.refine = int(get_long("refine", 16));
    const double t0 = get_double("t0", 0.5), T = get_double("T", 1.0);
    const long nt = get_long("n_t", 17);
    require(t0 > 0 && T >= t0, where("T") + ": need 0 < t0 <= T");
    require(nt >= 1, where("n_t") + ": need n_t >= 1");
    for (long j = 0; j < nt; ++j) c.t_grid.push_back(nt == 1 ? T : t0 + (T - t0) * double(j) / double(nt - 1));
    return c;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
        throw std::runtime_error("SHA-256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string sha256_file(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + file);
    std::stringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

}  // namespace fracheat
