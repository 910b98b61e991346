#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "vesselfuse/partition.hpp"
#include "vesselfuse/resample.hpp"
#include "vesselfuse/vesselness.hpp"

namespace vfuse {

inline constexpr const char* kToolVersion = "0.1.0";

struct PipelineConfig {
    FilterParams filters;              ///< scales left empty are derived from the input grid
    double max_radius_mm = 3.0;        ///< upper end of derived scales
    SizeIntervals intervals = SizeIntervals::ircad();
    std::optional<double> bifurcation_radius_mm;  ///< empty: twice the local diameter
    Interpolation volume_interpolation = Interpolation::bspline;
    Interpolation mask_interpolation = Interpolation::nearest;
    std::string output_dir = ".";
    unsigned threads = 0;

    /// Validates everything that does not depend on an input grid.
    void validate() const;

    /// Filter parameters with scales resolved for `geom`.
    FilterParams filters_for(const Geometry& geom) const;
};

/// Unknown keys anywhere in the document are rejected with their path.
PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const PipelineConfig& cfg);
PipelineConfig load_config(const std::filesystem::path& path);

nlohmann::json filter_params_to_json(const FilterParams& p);

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 14695981039346656037ULL);
std::string hex64(std::uint64_t v);
std::string hash_file(const std::filesystem::path& path);
std::string hash_json(const nlohmann::json& j);

/// {"tool": ..., "version": ..., "config_hash": ..., "inputs": {name: {"path", "fnv1a64"}}}
nlohmann::json provenance(const nlohmann::json& config, const std::map<std::string, std::filesystem::path>& inputs);

Interpolation parse_interpolation(const std::string& name);
std::string interpolation_name(Interpolation mode);

}  // namespace vfuse
