#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vesselfuse/volume.hpp"

namespace vfuse {

/// Euclidean distance (mm) from each foreground voxel centre to the nearest
/// background voxel centre; 0 on background. Voxels outside the grid count as
/// background, so a lone foreground voxel has distance equal to its smallest spacing.
using DistanceField = Volume3D;

DistanceField distance_transform(const BinaryMask& mask);

/// Curve skeleton by homotopic thinning: border voxels are removed in order of
/// increasing distance-transform value while they are simple (26/6 topology)
/// and not curve end points. Terminal spurs shorter than `spur_factor` times the
/// distance value at their junction are pruned afterwards. Throws DataError
/// for an empty mask.
BinaryMask skeletonize(const BinaryMask& mask, double spur_factor = 1.5);
BinaryMask skeletonize(const BinaryMask& mask, const DistanceField& dist, double spur_factor = 1.5);

/// Simple-point test on a 3x3x3 neighbourhood given as 27 occupancy flags
/// (index x + 3y + 9z, centre 13).
bool is_simple_point(const std::array<bool, 27>& cube);

struct Branch {
    int label = 0;                      ///< 1..B
    std::vector<std::size_t> voxels;    ///< ordered along the branch
    double size_mm = 0.0;               ///< max diameter (2 x distance) along the branch
    double length_mm = 0.0;
    std::vector<int> bifurcations;      ///< indices into VesselGraph::bifurcations
};

struct Bifurcation {
    std::vector<std::size_t> voxels;    ///< merged cluster of degree >= 3 voxels
    std::size_t center = 0;             ///< cluster voxel with the largest distance value
    double radius_mm = 0.0;             ///< distance value at `center`
    int degree = 0;                     ///< branch ends meeting here
};

/// Graph node: one non-junction skeleton voxel or one merged bifurcation cluster.
struct GraphNode {
    std::vector<std::size_t> voxels;
    int degree = 0;
    int bifurcation = -1;               ///< index into bifurcations, -1 for plain voxels
};

struct VesselGraph {
    Geometry geometry;
    std::vector<std::size_t> skeleton;        ///< sorted linear indices
    std::vector<int> voxel_degree;            ///< 26-neighbour count, parallel to skeleton
    std::vector<int> voxel_label;             ///< branch label, 0 on bifurcation voxels
    std::vector<double> voxel_dist;           ///< distance value (mm), parallel to skeleton
    std::vector<Branch> branches;
    std::vector<Bifurcation> bifurcations;
    std::vector<std::size_t> endpoints;       ///< degree-1 voxels
    std::vector<GraphNode> nodes;

    std::size_t skeleton_position(std::size_t voxel) const;  ///< index into `skeleton`, npos if absent
};

/// Builds the vascular graph of a skeleton. Adjacent degree >= 3 voxels merge
/// into one bifurcation node; clusters met by fewer than 3 branch ends are
/// treated as ordinary path voxels. Branch voxels inside the inscribed ball of
/// an adjacent bifurcation do not contribute to the branch size.
VesselGraph build_graph(const BinaryMask& skeleton, const DistanceField& dist);

/// Symmetric boolean node adjacency (row-major sorted (i, j) pairs), zero diagonal.
struct SparseBoolMatrix {
    std::size_t n = 0;
    std::vector<std::pair<std::size_t, std::size_t>> entries;

    bool at(std::size_t i, std::size_t j) const;
    std::size_t row_count(std::size_t i) const;
};

SparseBoolMatrix adjacency_matrix(const VesselGraph& graph);

/// nodes (voxel coords, mm position, degree), branches (label, voxels, size) and bifurcations.
nlohmann::json graph_to_json(const VesselGraph& graph);

/// Number of 26-connected foreground components.
std::size_t count_components26(const BinaryMask& mask);

}  // namespace vfuse
