#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vesselfuse/skeleton.hpp"
#include "vesselfuse/volume.hpp"

namespace vfuse {

/// One size class: sizes in (previous upper, upper] mm; the first class starts at 0 inclusive.
struct SizeClass {
    std::string name;
    double upper_mm = 0.0;  ///< +inf for the last class
    std::string label;      ///< interval text, e.g. "]3,6]"
};

/// Ordered, disjoint size classes covering [0, +inf).
struct SizeIntervals {
    std::string preset;  ///< "ircad", "bullitt" or "custom"
    std::vector<SizeClass> classes;

    void validate() const;
    std::size_t classify(double size_mm) const;
    std::optional<std::size_t> find(const std::string& name) const;

    static SizeIntervals ircad();
    static SizeIntervals bullitt();
    /// Custom classes from names and finite upper bounds (one fewer than names).
    static SizeIntervals custom(const std::vector<std::string>& names, const std::vector<double>& uppers);
    static SizeIntervals by_preset(const std::string& name);
};

/// Class index per branch, parallel to graph.branches.
std::vector<std::size_t> classify_branches(const VesselGraph& graph, const SizeIntervals& intervals);

struct PartitionMasks {
    SizeIntervals intervals;
    std::vector<BinaryMask> classes;      ///< parallel to intervals.classes
    BinaryMask m_bif;
    std::vector<double> bif_radii_mm;     ///< dilation radius used per bifurcation
    std::size_t gap_voxels = 0;           ///< gt voxels assigned by nearest-skeleton fill

    const BinaryMask* by_name(const std::string& name) const;
};

/// Each class dilates its skeleton voxels with balls of radius dist + one voxel
/// (largest spacing) and is clipped to gt. Bifurcation voxels belong to every
/// class of their adjacent branches. Remaining uncovered gt voxels join the
/// class of the geodesically nearest skeleton voxel inside gt.
PartitionMasks build_class_masks(const VesselGraph& graph, const std::vector<std::size_t>& classes,
                                 const BinaryMask& gt, const SizeIntervals& intervals);

/// Balls around every bifurcation voxel, clipped to gt. Without an explicit
/// radius each bifurcation uses twice its local diameter (4 x distance value).
BinaryMask bifurcation_mask(const VesselGraph& graph, const BinaryMask& gt, std::optional<double> radius_mm,
                            std::vector<double>* radii_used = nullptr);

/// Skeleton, graph, classes, class masks and m_bif in one call.
struct PartitionResult {
    VesselGraph graph;
    std::vector<std::size_t> branch_classes;
    PartitionMasks masks;
};

PartitionResult partition_ground_truth(const BinaryMask& gt, const SizeIntervals& intervals,
                                       std::optional<double> bif_radius_mm = std::nullopt);

/// Intervals, radii, counts and the per-class branch histogram.
nlohmann::json partition_summary(const PartitionResult& result);

nlohmann::json intervals_to_json(const SizeIntervals& intervals);
SizeIntervals intervals_from_json(const nlohmann::json& j);

}  // namespace vfuse
