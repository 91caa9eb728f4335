#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace selftrain {

/// Reproducibility envelope written next to every run's outputs.
struct RunManifest {
    std::string run_id;
    std::string created_at;  // ISO-8601 UTC
    std::string config_hash;
    std::string tool_version;
    std::string corpus_hash;
};

// 64-bit FNV-1a over bytes, rendered as 16 hex chars.
std::string hash_hex(std::string_view bytes);

// Hash of the canonical (sorted-key, compact) dump of a config object.
std::string config_hash(const nlohmann::json& config);

RunManifest make_manifest(std::string run_id, const nlohmann::json& config,
                          std::string_view corpus_bytes);

void write_manifest(const std::string& path, const RunManifest& manifest);
RunManifest read_manifest(const std::string& path);

// Recomputes the config hash and compares; throws ValidationError on mismatch.
void verify_manifest(const RunManifest& manifest, const nlohmann::json& config);

std::string iso8601_utc_now();

}  // namespace selftrain
