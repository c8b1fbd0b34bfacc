#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace fracheat {

inline constexpr const char* kVersion = "0.1.0";

struct Verdict {
    std::string check;
    bool pass = false;
    std::string detail;
};

struct RunManifest {
    std::string subcommand;
    std::string config_hash;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string started, finished;  // UTC, ISO 8601
    int exit_code = 0;
    std::vector<std::pair<std::string, std::string>> files;  // name relative to the output dir, SHA-256
    std::vector<Verdict> verdicts;
    nlohmann::json extra = nlohmann::json::object();

    // Records the checksum of out_dir / name.
    void add_file(const std::string& out_dir, const std::string& name);
    nlohmann::json to_json() const;
    // Temporary file in the same directory, then rename.
    void write(const std::string& file) const;
};

std::string utc_now();
// Writes text through a temporary file and a rename.
void write_atomic(const std::string& file, const std::string& text);

}  // namespace fracheat
