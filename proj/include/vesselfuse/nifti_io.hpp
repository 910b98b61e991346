#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vesselfuse/volume.hpp"

namespace vfuse {

/// Ordered multi-channel stack of co-registered volumes; the channel index is
/// the 4th NIfTI dimension on disk.
struct HyperVolume {
    std::vector<Volume3D> channels;
    std::vector<std::string> channel_names;

    /// All channels share one grid and names match channels one-to-one.
    void validate() const;
    const Geometry& geometry() const { return channels.front().geometry(); }
    std::size_t channel_count() const { return channels.size(); }
};

/// Reads a single-channel NIfTI-1 file (.nii or .nii.gz). Intensities are
/// rescaled with scl_slope/scl_inter. Rejects 4D inputs and non-finite values.
Volume3D read_volume(const std::filesystem::path& path);

/// Writes float32 voxels; the origin goes into both qform and sform.
void write_volume(const Volume3D& vol, const std::filesystem::path& path);

/// Reads any scalar NIfTI volume as a mask; nonzero voxels become 1.
BinaryMask read_mask(const std::filesystem::path& path);

/// Writes uint8 voxels.
void write_mask(const BinaryMask& mask, const std::filesystem::path& path);

HyperVolume read_hypervolume(const std::filesystem::path& path);
void write_hypervolume(const HyperVolume& hv, const std::filesystem::path& path);

}  // namespace vfuse
