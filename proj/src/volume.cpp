#include "vesselfuse/volume.hpp"

#include <algorithm>
#include <cmath>

namespace vfuse {

void Geometry::validate() const {
    if (dims.nx < 1 || dims.ny < 1 || dims.nz < 1)
        throw DataError("volume dims must be >= 1 on every axis");
    for (int a = 0; a < 3; ++a) {
        if (!std::isfinite(spacing[a]) || spacing[a] <= 0.0)
            throw DataError("voxel spacing must be positive and finite (axis " + std::to_string(a) +
                            " = " + std::to_string(spacing[a]) + ")");
        if (!std::isfinite(origin[a])) throw DataError("volume origin must be finite");
    }
}

bool Geometry::same_grid(const Geometry& other, double tol) const {
    if (!(dims == other.dims)) return false;
    for (int a = 0; a < 3; ++a) {
        if (std::abs(spacing[a] - other.spacing[a]) > tol) return false;
        if (std::abs(origin[a] - other.origin[a]) > tol) return false;
    }
    return true;
}

double Geometry::min_spacing() const {
    return std::min({spacing[0], spacing[1], spacing[2]});
}

void require_finite(const Volume3D& vol, const std::string& what) {
    const auto bad = std::count_if(vol.data().begin(), vol.data().end(),
                                   [](double v) { return !std::isfinite(v); });
    if (bad > 0)
        throw DataError(what + " contains " + std::to_string(bad) + " non-finite voxel(s)");
}

void require_binary(const BinaryMask& mask) {
    const auto bad = std::count_if(mask.data().begin(), mask.data().end(),
                                   [](std::uint8_t v) { return v > 1; });
    if (bad > 0) throw DataError("mask contains " + std::to_string(bad) + " non-binary voxel(s)");
}

void require_same_grid(const Geometry& a, const Geometry& b, const std::string& what) {
    if (!a.same_grid(b))
        throw DataError("geometry mismatch: " + what + " (dims " + std::to_string(a.dims.nx) + "x" +
                        std::to_string(a.dims.ny) + "x" + std::to_string(a.dims.nz) + " vs " +
                        std::to_string(b.dims.nx) + "x" + std::to_string(b.dims.ny) + "x" +
                        std::to_string(b.dims.nz) + ")");
}

std::size_t count_nonzero(const BinaryMask& mask) {
    return static_cast<std::size_t>(
        std::count_if(mask.data().begin(), mask.data().end(), [](std::uint8_t v) { return v != 0; }));
}

BinaryMask threshold(const Volume3D& vol, double level) {
    BinaryMask out(vol.geometry());
    for (std::size_t i = 0; i < vol.size(); ++i) out[i] = vol[i] >= level ? 1 : 0;
    return out;
}

Volume3D to_volume(const BinaryMask& mask) {
    Volume3D out(mask.geometry());
    for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i];
    return out;
}

BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b) {
    require_same_grid(a.geometry(), b.geometry(), "mask intersection");
    BinaryMask out(a.geometry());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] && b[i]) ? 1 : 0;
    return out;
}

BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b) {
    require_same_grid(a.geometry(), b.geometry(), "mask union");
    BinaryMask out(a.geometry());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] || b[i]) ? 1 : 0;
    return out;
}

}  // namespace vfuse
