#include "selftrain/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

#include "selftrain/errors.hpp"
#include "selftrain/io.hpp"
#include "selftrain/version.hpp"

namespace selftrain {

std::string hash_hex(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string config_hash(const nlohmann::json& config) {
    // dump() sorts object keys, so the digest is layout-independent.
    return hash_hex(config.dump());
}

std::string iso8601_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

RunManifest make_manifest(std::string run_id, const nlohmann::json& config,
                          std::string_view corpus_bytes) {
    RunManifest m;
    m.run_id = std::move(run_id);
    m.created_at = iso8601_utc_now();
    m.config_hash = config_hash(config);
    m.tool_version = kVersion;
    m.corpus_hash = corpus_bytes.empty() ? "" : hash_hex(corpus_bytes);
    return m;
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
    io::write_json_file(path, nlohmann::json{
                                  {"run_id", manifest.run_id},
                                  {"created_at", manifest.created_at},
                                  {"config_hash", manifest.config_hash},
                                  {"tool_version", manifest.tool_version},
                                  {"corpus_hash", manifest.corpus_hash},
                              });
}

RunManifest read_manifest(const std::string& path) {
    const auto j = io::read_json_file(path);
    RunManifest m;
    try {
        m.run_id = j.at("run_id").get<std::string>();
        m.created_at = j.at("created_at").get<std::string>();
        m.config_hash = j.at("config_hash").get<std::string>();
        m.tool_version = j.at("tool_version").get<std::string>();
        m.corpus_hash = j.value("corpus_hash", "");
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return m;
}

void verify_manifest(const RunManifest& manifest, const nlohmann::json& config) {
    const std::string recomputed = config_hash(config);
    if (recomputed != manifest.config_hash) {
        throw ValidationError("manifest config hash mismatch: stored " + manifest.config_hash +
                              ", recomputed " + recomputed);
    }
}

}  // namespace selftrain
