#pragma once

#include "ringsig/modem.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace ringsig {

// Raw I/Q files: little-endian float32, I then Q for each sample, no header.

void write_iq_file(const std::filesystem::path& path, std::span<const IqSample> samples);

/// Appends to an existing file (creates it when absent).
void append_iq_file(const std::filesystem::path& path, std::span<const IqSample> samples);

std::vector<IqSample> read_iq_file(const std::filesystem::path& path);

/// Reads `count` samples starting at sample `offset`.
std::vector<IqSample> read_iq_file(const std::filesystem::path& path, std::size_t offset,
                                   std::size_t count);

/// Sidecar metadata: one `key = value` line per entry, written next to a dump
/// as <file>.meta (sample_count, scheme, I_m, I_p, es_n0_db, seed, ...).
struct IqMetadata {
    std::map<std::string, std::string> entries;

    void set(const std::string& key, const std::string& value) { entries[key] = value; }
    void set(const std::string& key, double value);
    void set(const std::string& key, std::uint64_t value);
    const std::string& get(const std::string& key) const;
};

std::filesystem::path metadata_path(const std::filesystem::path& iq_path);

void write_metadata(const std::filesystem::path& iq_path, const IqMetadata& meta);
IqMetadata read_metadata(const std::filesystem::path& iq_path);

} // namespace ringsig
