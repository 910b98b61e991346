#pragma once

#include <array>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "vesselfuse/metrics.hpp"
#include "vesselfuse/nifti_io.hpp"
#include "vesselfuse/vesselness.hpp"

namespace vfuse {

inline const std::array<std::string, 7> kChannelNames = {"Original", "Frangi",    "Jerman", "Sato",
                                                         "Zhang",    "Meijering", "RORPO"};

/// Channel-0 intensity standardisation, (v - mean) / std with statistics over the nonzero voxels.
struct Standardization {
    std::string method = "zscore";
    std::string region = "nonzero";
    double mean = 0.0;
    double std = 1.0;
    std::size_t voxels = 0;

    /// Inverse transform of a standardised value.
    double invert(double v) const { return v * (std > 0.0 ? std : 1.0) + mean; }
};

struct FusedVolume {
    HyperVolume hv;
    Standardization standardization;
};

/// Standardises the whole volume using statistics of its nonzero voxels.
Volume3D zscore_nonzero(const Volume3D& vol, Standardization* stats = nullptr);

/// Original + six normalised responses in kChannelNames order. Warns for
/// anisotropic input; a failing filter aborts with its name in the message.
FusedVolume build_hypervolume(const Volume3D& original, const FilterParams& p);

/// Voxelwise max of channels 1-6.
Volume3D enhanced_channel(const HyperVolume& hv);

struct PsnrGain {
    PsnrValue before;
    PsnrValue after;
};

PsnrGain psnr_gain_report(const Volume3D& original, const Volume3D& enhanced, const BinaryMask& gt);

/// {"channels": [...], "standardization": {...}}
nlohmann::json hypervolume_sidecar(const FusedVolume& fused);

/// "case.nii.gz" -> "case.json"
std::filesystem::path sidecar_path(const std::filesystem::path& nifti);

/// Writes the 4D NIfTI and its sidecar (plus `extra` keys merged into the sidecar).
void write_fused(const FusedVolume& fused, const std::filesystem::path& path,
                 const nlohmann::json& extra = nlohmann::json::object());

/// Reads the 4D NIfTI; channel names and standardisation come from the sidecar when present.
FusedVolume read_fused(const std::filesystem::path& path);

}  // namespace vfuse
