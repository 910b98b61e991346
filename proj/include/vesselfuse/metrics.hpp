#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vesselfuse/partition.hpp"
#include "vesselfuse/volume.hpp"

namespace vfuse {

/// 2|P & G| / (|P| + |G|); 1 when both are empty.
double dice(const BinaryMask& pred, const BinaryMask& gt);

struct ClDiceParts {
    double tprec = 0.0;
    double tsens = 0.0;
    double cl_dice = 0.0;
    std::size_t pred_skeleton = 0;
    std::size_t gt_skeleton = 0;
};

/// Skeleton precision/sensitivity. Both skeletons empty gives 1, exactly one empty gives 0.
ClDiceParts cl_dice_parts(const BinaryMask& pred, const BinaryMask& gt);
double cl_dice(const BinaryMask& pred, const BinaryMask& gt);

enum class Metric { dice, cl_dice };

/// Metric of pred & region against gt & region; empty when both restrictions are empty.
std::optional<double> masked_metric(const BinaryMask& pred, const BinaryMask& gt, const BinaryMask& region,
                                    Metric which);

/// Signal = mean(fg) - mean(bg) and noise = variance of bg, both after min-max
/// normalisation of `vol`. A noise-free background yields +inf (`clean`).
struct PsnrValue {
    double db = 0.0;
    bool clean = false;
};

PsnrValue psnr(const Volume3D& vol, const BinaryMask& gt);

inline constexpr const char* kPsnrDefinition =
    "10*log10((mean_fg - mean_bg)^2 / var_bg) after min-max normalisation to [0,1]";

struct RegionScores {
    std::string region;
    bool present = false;
    std::optional<double> dice;
    std::optional<double> cl_dice;
    std::size_t pred_voxels = 0;   ///< pred & region
    std::size_t gt_voxels = 0;     ///< gt & region
    std::size_t region_voxels = 0;
};

/// Region order: global, large, medium, small, bifurcations.
inline const std::vector<std::string> kRegionNames = {"global", "large", "medium", "small", "bifurcations"};

struct MetricsReport {
    std::string case_id;
    std::vector<RegionScores> regions;  ///< in kRegionNames order
    std::optional<PsnrValue> psnr;
    nlohmann::json provenance = nlohmann::json::object();

    const RegionScores& region(const std::string& name) const;
};

/// Global scores plus one entry per partition region; classes missing from
/// the masks (e.g. "large" for two-class presets) are reported absent.
MetricsReport evaluate_case(const BinaryMask& pred, const BinaryMask& gt, const PartitionMasks* masks,
                            const Volume3D* intensity = nullptr, const std::string& case_id = "case");

struct Summary {
    double mean = 0.0;
    double std = 0.0;  ///< sample (n - 1) standard deviation, 0 for n = 1
    std::size_t n = 0;
};

struct AggregateRow {
    std::string region;
    std::optional<Summary> dice;
    std::optional<Summary> cl_dice;
};

struct AggregateReport {
    std::vector<AggregateRow> regions;
    std::optional<Summary> psnr_db;  ///< over cases with a finite PSNR
    std::size_t cases = 0;
};

/// Mean and sample std per region; absent regions do not enter the denominator.
AggregateReport aggregate_report(const std::vector<MetricsReport>& cases);

Summary summarize(const std::vector<double>& values);

nlohmann::json report_to_json(const MetricsReport& report);
nlohmann::json aggregate_to_json(const AggregateReport& agg);

/// CSV header: case,region,metric,value,present. Aggregate rows use case "mean" / "std".
std::string reports_to_csv(const std::vector<MetricsReport>& cases, const AggregateReport* agg = nullptr);

}  // namespace vfuse
