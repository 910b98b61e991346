#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vfuse {

/// Raised when input data (files, volumes, masks) violates a contract.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for invalid parameters or configuration.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Vec3 = std::array<double, 3>;

struct Dims {
    std::size_t nx = 1;
    std::size_t ny = 1;
    std::size_t nz = 1;

    std::size_t size() const { return nx * ny * nz; }
    std::size_t operator[](int axis) const { return axis == 0 ? nx : (axis == 1 ? ny : nz); }
    bool operator==(const Dims&) const = default;
};

/// Voxel grid geometry. Voxel (x, y, z) sits at world position
/// origin + (x * sx, y * sy, z * sz) mm. Storage order is x fastest, then y, then z
/// (the NIfTI on-disk order), so the linear index is x + nx * (y + ny * z).
struct Geometry {
    Dims dims;
    Vec3 spacing{1.0, 1.0, 1.0};
    Vec3 origin{0.0, 0.0, 0.0};

    /// Throws DataError on zero dims or non-positive / non-finite spacing.
    void validate() const;

    bool same_grid(const Geometry& other, double tol = 1e-6) const;
    bool operator==(const Geometry&) const = default;
    double min_spacing() const;
    double voxel_volume() const { return spacing[0] * spacing[1] * spacing[2]; }

    std::size_t index(std::size_t x, std::size_t y, std::size_t z) const {
        return x + dims.nx * (y + dims.ny * z);
    }
    std::array<std::size_t, 3> coords(std::size_t idx) const {
        return {idx % dims.nx, (idx / dims.nx) % dims.ny, idx / (dims.nx * dims.ny)};
    }
    bool inside(std::int64_t x, std::int64_t y, std::int64_t z) const {
        return x >= 0 && y >= 0 && z >= 0 && x < static_cast<std::int64_t>(dims.nx) &&
               y < static_cast<std::int64_t>(dims.ny) && z < static_cast<std::int64_t>(dims.nz);
    }
    Vec3 world(std::size_t x, std::size_t y, std::size_t z) const {
        return {origin[0] + x * spacing[0], origin[1] + y * spacing[1], origin[2] + z * spacing[2]};
    }
};

/// Dense scalar field on a voxel grid.
template <class T>
class Image {
public:
    using value_type = T;

    Image() = default;
    explicit Image(Geometry geom, T fill = T{}) : geom_(std::move(geom)) {
        geom_.validate();
        data_.assign(geom_.dims.size(), fill);
    }
    Image(Geometry geom, std::vector<T> data) : geom_(std::move(geom)), data_(std::move(data)) {
        geom_.validate();
        if (data_.size() != geom_.dims.size())
            throw DataError("voxel buffer length " + std::to_string(data_.size()) +
                            " does not match dims product " + std::to_string(geom_.dims.size()));
    }

    const Geometry& geometry() const { return geom_; }
    const Dims& dims() const { return geom_.dims; }
    const Vec3& spacing() const { return geom_.spacing; }
    const Vec3& origin() const { return geom_.origin; }
    std::size_t size() const { return data_.size(); }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }
    T& at(std::size_t x, std::size_t y, std::size_t z) { return data_[geom_.index(x, y, z)]; }
    const T& at(std::size_t x, std::size_t y, std::size_t z) const { return data_[geom_.index(x, y, z)]; }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    bool operator==(const Image&) const = default;

private:
    Geometry geom_;
    std::vector<T> data_;
};

using Volume3D = Image<double>;

/// Values are exactly 0 or 1.
using BinaryMask = Image<std::uint8_t>;

/// Throws DataError unless every value is finite; the message carries the offending count.
void require_finite(const Volume3D& vol, const std::string& what = "volume");

/// Throws DataError if the mask holds anything other than 0/1.
void require_binary(const BinaryMask& mask);

/// Throws DataError when the two geometries are not the same grid.
void require_same_grid(const Geometry& a, const Geometry& b, const std::string& what);

std::size_t count_nonzero(const BinaryMask& mask);

BinaryMask threshold(const Volume3D& vol, double level);
Volume3D to_volume(const BinaryMask& mask);

BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b);

}  // namespace vfuse
