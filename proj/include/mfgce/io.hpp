#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mfgce/skorokhod.hpp"
#include "mfgce/stopping.hpp"

namespace mfgce {

std::string version_string();

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Provenance block written into every output file.
struct OutputMeta {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;

    nlohmann::ordered_json to_json() const;
};

/// Shortest round-trip decimal form; identical on every run.
std::string format_double(double v);

/// CSV: '#'-prefixed metadata lines, a header row, then one row per record.
void write_csv(const std::filesystem::path& path, const OutputMeta& meta,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

/// JSON-lines log whose first record is {"meta": {...}}.
class JsonlWriter {
public:
    JsonlWriter(const std::filesystem::path& path, const OutputMeta& meta);
    void write(const nlohmann::ordered_json& record);

private:
    std::ofstream out_;
};

void write_json(const std::filesystem::path& path, const OutputMeta& meta,
                nlohmann::ordered_json body);

/// Flat binary tensor: "MFGCEBIN", u32 format version, u32 rank, u64 dims,
/// u64 metadata length, metadata (JSON text), then little-endian doubles in
/// row-major order.
void write_tensor(const std::filesystem::path& path, const OutputMeta& meta,
                  const std::vector<std::uint64_t>& dims, const std::vector<double>& data);

struct Tensor {
    std::vector<std::uint64_t> dims;
    std::string meta;
    std::vector<double> data;
};

Tensor read_tensor(const std::filesystem::path& path);

void write_value_surface(const std::filesystem::path& dir, const OutputMeta& meta,
                         const ValueSurface& u);
void write_boundary(const std::filesystem::path& dir, const OutputMeta& meta, const Boundary& c);
void write_path_csv(const std::filesystem::path& path, const OutputMeta& meta,
                    const ControlledPath& p);

}  // namespace mfgce
