#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vesselfuse/scale_space.hpp"
#include "vesselfuse/volume.hpp"

namespace vfuse {

enum class Polarity { bright_on_dark, dark_on_bright };

enum class FilterId { frangi, jerman, sato, zhang, meijering, rorpo };

/// Hyper-volume filter order (channel i + 1).
inline constexpr std::array<FilterId, 6> kFilterOrder = {FilterId::frangi, FilterId::jerman, FilterId::sato,
                                                         FilterId::zhang,  FilterId::meijering, FilterId::rorpo};

std::string_view filter_name(FilterId id);
FilterId parse_filter(std::string_view name);
bool is_hessian_filter(FilterId id);

struct FilterParams {
    std::vector<double> scales;  ///< sigma in mm, strictly increasing
    double frangi_alpha = 0.5;
    double frangi_beta = 0.5;
    std::optional<double> frangi_c;  ///< empty: half the largest Hessian Frobenius norm over all scales
    double jerman_tau = 0.5;
    double sato_alpha1 = 0.5;
    double sato_alpha2 = 2.0;
    double meijering_alpha = -1.0 / 3.0;
    std::vector<int> rorpo_lengths{20, 30, 45};  ///< path lengths in voxels
    int rorpo_dilation = 0;                      ///< cube radius in voxels, 0 disables
    Polarity polarity = Polarity::bright_on_dark;

    void validate() const;

    /// Five log-spaced scales from the finest spacing up to `max_radius_mm`
    /// (raised to 4x the finest spacing when smaller than that).
    static FilterParams defaults_for(const Geometry& geom, double max_radius_mm = 3.0);
};

std::vector<double> log_spaced(double lo, double hi, std::size_t n);

// Pointwise responses. Eigenvalues follow the EigenTriple ordering and the
// bright-on-dark convention (tubes have l2, l3 < 0).

/// Frangi: (1 - exp(-Ra^2/2a^2)) exp(-Rb^2/2b^2) (1 - exp(-S^2/2c^2)).
double frangi_response(const EigenTriple& e, double alpha, double beta, double c);

/// Sato line filter: lc = min(-l2, -l3), penalised by exp(-l1^2 / 2 (a lc)^2) with
/// a = alpha1 for l1 <= 0 and a = alpha2 for 0 < l1 < lc / alpha2.
double sato_response(const EigenTriple& e, double alpha1, double alpha2);

/// Volume-regularised l3: l3 if l3 <= -tau * max_neg_l3, -tau * max_neg_l3 if l3 < 0
/// otherwise, 0 for l3 >= 0. `max_neg_l3` is the largest -l3 over the volume.
double jerman_lambda_rho(double l3, double tau, double max_neg_l3);

/// Jerman: with u = -l2, r = -lrho: 0 if u <= 0 or r <= 0; 1 if u >= r / 2;
/// u^2 (r - u) (3 / (u + r))^3 otherwise.
double jerman_response(double l2, double lambda_rho);

/// Zhang variant used here: the Jerman ratio term times the Frangi blob
/// suppression exp(-Rb^2 / 2 beta^2) with Rb = |l1| / sqrt(|l2 lrho|).
double zhang_response(const EigenTriple& e, double lambda_rho, double beta);

/// Largest-magnitude Meijering modified eigenvalue l'_i = l_i + alpha * sum_{j != i} l_j
/// (the more negative one on a tie).
double meijering_dominant_modified(const EigenTriple& e, double alpha);

/// Meijering neuriteness: l'_max / global_min when the dominant l'_max < 0, else 0.
/// `global_min` is the most negative l'_max over the volume (< 0).
double meijering_response(const EigenTriple& e, double alpha, double global_min);

/// Eigenvalues of every scale plus the volume-wide statistics the filters need.
struct EigenStack {
    Geometry geometry;
    std::vector<double> scales;
    std::vector<std::vector<std::array<float, 3>>> eig;  ///< [scale][voxel]
    double max_frobenius = 0.0;                          ///< over all scales
    std::vector<double> max_neg_l3;                      ///< per scale
    double meijering_global_min = 0.0;                   ///< over all scales, <= 0
};

EigenStack compute_eigen_stack(const Volume3D& vol, const FilterParams& p);

double resolve_frangi_c(const EigenStack& stack, const FilterParams& p);

/// Unnormalised response of one Hessian filter at every scale of the stack.
std::vector<Volume3D> per_scale_responses(const EigenStack& stack, FilterId filter, const FilterParams& p);

/// Directional path opening along one of the 7 RORPO orientations
/// (0-2: axes x, y, z; 3-6: the diagonals (1,1,1), (1,1,-1), (1,-1,1), (-1,1,1)).
/// Result <= input; length counts voxels.
Volume3D path_opening(const Volume3D& vol, int orientation, int length);

/// Grayscale dilation with a (2r+1)^3 cube.
Volume3D dilate_cube(const Volume3D& vol, int radius);

/// RORPO at one path length: per voxel the 7 orientation openings are ranked and
/// the largest minus the 4th largest is kept.
Volume3D rorpo_single(const Volume3D& vol, int length, int dilation = 0);

/// RORPO over all lengths, combined by voxelwise max. Unnormalised.
Volume3D rorpo_response(const Volume3D& vol, const FilterParams& p);

/// (v - min) / (max - min); a constant volume maps to zeros.
Volume3D normalize_response(const Volume3D& vol);

/// Polarity-corrected copy of the input (negated for dark-on-bright).
Volume3D apply_polarity(const Volume3D& vol, Polarity polarity);

/// Voxelwise max over scales (or RORPO lengths) before normalisation.
Volume3D multiscale_raw(const Volume3D& vol, FilterId filter, const FilterParams& p);

/// multiscale_raw followed by normalize_response.
Volume3D multiscale(const Volume3D& vol, FilterId filter, const FilterParams& p);

/// All six normalised channels in kFilterOrder, sharing one eigen stack.
std::array<Volume3D, 6> all_filters(const Volume3D& vol, const FilterParams& p);

}  // namespace vfuse
