#include "fracheat/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "fracheat/config.hpp"

namespace fracheat {

void RunManifest::add_file(const std::string& out_dir, const std::string& name) {
    files.emplace_back(name, sha256_file((std::filesystem::path(out_dir) / name).string()));
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j;
    j["subcommand"] = subcommand;
    j["version"] = kVersion;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["threads"] = threads;
    j["started"] = started;
    j["finished"] = finished;
    j["exit_code"] = exit_code;
    auto& f = j["files"] = nlohmann::json::array();
    for (const auto& [name, sum] : files) f.push_back({{"path", name}, {"sha256", sum}});
    auto& v = j["checks"] = nlohmann::json::array();
    for (const auto& c : verdicts) v.push_back({{"check", c.check}, {"pass", c.pass}, {"detail", c.detail}});
    if (!extra.empty()) j["results"] = extra;
    return j;
}

void RunManifest::write(const std::string& file) const { write_atomic(file, to_json().dump(2) + "\n"); }

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_atomic(const std::string& file, const std::string& text) {
    const std::filesystem::path target(file);
    auto tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

}  // namespace fracheat
