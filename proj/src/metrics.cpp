#include "vesselfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "vesselfuse/skeleton.hpp"

namespace vfuse {

namespace {

std::size_t overlap(const BinaryMask& a, const BinaryMask& b) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) n += (a[i] && b[i]) ? 1 : 0;
    return n;
}

void check_pair(const BinaryMask& pred, const BinaryMask& gt) {
    require_same_grid(pred.geometry(), gt.geometry(), "prediction vs ground truth");
    require_binary(pred);
    require_binary(gt);
}

BinaryMask skeleton_or_empty(const BinaryMask& m) {
    if (count_nonzero(m) == 0) return BinaryMask(m.geometry(), 0);
    return skeletonize(m);
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

nlohmann::json optional_number(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json summary_json(const std::optional<Summary>& s) {
    if (!s) return nullptr;
    return {{"mean", s->mean}, {"std", s->std}, {"n", s->n}};
}

}  // namespace

double dice(const BinaryMask& pred, const BinaryMask& gt) {
    check_pair(pred, gt);
    const std::size_t p = count_nonzero(pred), g = count_nonzero(gt);
    if (p + g == 0) return 1.0;
    return 2.0 * static_cast<double>(overlap(pred, gt)) / static_cast<double>(p + g);
}

ClDiceParts cl_dice_parts(const BinaryMask& pred, const BinaryMask& gt) {
    check_pair(pred, gt);
    const BinaryMask sp = skeleton_or_empty(pred);
    const BinaryMask sg = skeleton_or_empty(gt);
    ClDiceParts r;
    r.pred_skeleton = count_nonzero(sp);
    r.gt_skeleton = count_nonzero(sg);
    if (r.pred_skeleton == 0 && r.gt_skeleton == 0) {
        r.tprec = r.tsens = r.cl_dice = 1.0;
        return r;
    }
    if (r.pred_skeleton == 0 || r.gt_skeleton == 0) return r;
    r.tprec = static_cast<double>(overlap(sp, gt)) / static_cast<double>(r.pred_skeleton);
    r.tsens = static_cast<double>(overlap(sg, pred)) / static_cast<double>(r.gt_skeleton);
    r.cl_dice = r.tprec + r.tsens > 0.0 ? 2.0 * r.tprec * r.tsens / (r.tprec + r.tsens) : 0.0;
    return r;
}

double cl_dice(const BinaryMask& pred, const BinaryMask& gt) { return cl_dice_parts(pred, gt).cl_dice; }

std::optional<double> masked_metric(const BinaryMask& pred, const BinaryMask& gt, const BinaryMask& region,
                                    Metric which) {
    check_pair(pred, gt);
    require_same_grid(gt.geometry(), region.geometry(), "region mask");
    const BinaryMask p = mask_and(pred, region);
    const BinaryMask g = mask_and(gt, region);
    if (count_nonzero(p) == 0 && count_nonzero(g) == 0) return std::nullopt;
    return which == Metric::dice ? dice(p, g) : cl_dice(p, g);
}

PsnrValue psnr(const Volume3D& vol, const BinaryMask& gt) {
    require_same_grid(vol.geometry(), gt.geometry(), "intensity vs ground truth");
    require_binary(gt);
    require_finite(vol);
    const auto [lo_it, hi_it] = std::minmax_element(vol.data().begin(), vol.data().end());
    const double lo = *lo_it, range = *hi_it - *lo_it;
    if (!(range > 0.0)) throw DataError("PSNR of a constant volume is undefined");
    double sf = 0.0, sb = 0.0;
    std::size_t nf = 0, nb = 0;
    for (std::size_t i = 0; i < vol.size(); ++i) {
        const double v = (vol[i] - lo) / range;
        if (gt[i]) {
            sf += v;
            ++nf;
        } else {
            sb += v;
            ++nb;
        }
    }
    if (nf == 0) throw DataError("PSNR needs a nonempty foreground");
    if (nb == 0) throw DataError("PSNR needs a nonempty background");
    const double mf = sf / nf, mb = sb / nb;
    double ss = 0.0;
    for (std::size_t i = 0; i < vol.size(); ++i) {
        if (gt[i]) continue;
        const double d = (vol[i] - lo) / range - mb;
        ss += d * d;
    }
    const double var = ss / nb;
    const double peak = mf - mb;
    if (var == 0.0) return {std::numeric_limits<double>::infinity(), true};
    return {10.0 * std::log10(peak * peak / var), false};
}

const RegionScores& MetricsReport::region(const std::string& name) const {
    for (const auto& r : regions)
        if (r.region == name) return r;
    throw UsageError("no region '" + name + "' in report");
}

MetricsReport evaluate_case(const BinaryMask& pred, const BinaryMask& gt, const PartitionMasks* masks,
                            const Volume3D* intensity, const std::string& case_id) {
    check_pair(pred, gt);
    MetricsReport rep;
    rep.case_id = case_id;
    for (const auto& name : kRegionNames) {
        RegionScores s;
        s.region = name;
        const BinaryMask* region = nullptr;
        if (name != "global") {
            if (!masks) {
                rep.regions.push_back(s);
                continue;
            }
            region = name == "bifurcations" ? &masks->m_bif : masks->by_name(name);
            if (!region) {
                rep.regions.push_back(s);
                continue;
            }
            require_same_grid(gt.geometry(), region->geometry(), "region mask '" + name + "'");
        }
        if (region) {
            const BinaryMask p = mask_and(pred, *region);
            const BinaryMask g = mask_and(gt, *region);
            s.pred_voxels = count_nonzero(p);
            s.gt_voxels = count_nonzero(g);
            s.region_voxels = count_nonzero(*region);
            if (s.pred_voxels + s.gt_voxels > 0) {
                s.present = true;
                s.dice = dice(p, g);
                s.cl_dice = cl_dice(p, g);
            }
        } else {
            s.pred_voxels = count_nonzero(pred);
            s.gt_voxels = count_nonzero(gt);
            s.region_voxels = gt.size();
            s.present = true;
            s.dice = dice(pred, gt);
            s.cl_dice = cl_dice(pred, gt);
        }
        rep.regions.push_back(s);
    }
    if (intensity) rep.psnr = psnr(*intensity, gt);
    return rep;
}

Summary summarize(const std::vector<double>& values) {
    Summary s;
    s.n = values.size();
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / values.size();
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / (values.size() - 1));
    }
    return s;
}

AggregateReport aggregate_report(const std::vector<MetricsReport>& cases) {
    if (cases.empty()) throw UsageError("aggregate over an empty case list");
    AggregateReport agg;
    agg.cases = cases.size();
    for (const auto& name : kRegionNames) {
        std::vector<double> d, c;
        for (const auto& rep : cases) {
            const auto& r = rep.region(name);
            if (!r.present) continue;
            if (r.dice) d.push_back(*r.dice);
            if (r.cl_dice) c.push_back(*r.cl_dice);
        }
        AggregateRow row;
        row.region = name;
        if (!d.empty()) row.dice = summarize(d);
        if (!c.empty()) row.cl_dice = summarize(c);
        agg.regions.push_back(row);
    }
    std::vector<double> p;
    for (const auto& rep : cases)
        if (rep.psnr && std::isfinite(rep.psnr->db)) p.push_back(rep.psnr->db);
    if (!p.empty()) agg.psnr_db = summarize(p);
    return agg;
}

nlohmann::json report_to_json(const MetricsReport& report) {
    using nlohmann::json;
    json regions = json::object();
    for (const auto& r : report.regions) {
        regions[r.region] = {{"present", r.present},
                             {"dice", optional_number(r.dice)},
                             {"cl_dice", optional_number(r.cl_dice)},
                             {"pred_voxels", r.pred_voxels},
                             {"gt_voxels", r.gt_voxels},
                             {"region_voxels", r.region_voxels}};
    }
    json out = {{"schema_version", 1}, {"case", report.case_id}, {"regions", regions}};
    if (report.psnr) {
        out["psnr"] = {{"db", report.psnr->clean ? json(nullptr) : json(report.psnr->db)},
                       {"clean", report.psnr->clean},
                       {"definition", kPsnrDefinition}};
    }
    out["provenance"] = report.provenance;
    return out;
}

nlohmann::json aggregate_to_json(const AggregateReport& agg) {
    using nlohmann::json;
    json regions = json::object();
    for (const auto& r : agg.regions) regions[r.region] = {{"dice", summary_json(r.dice)}, {"cl_dice", summary_json(r.cl_dice)}};
    return {{"schema_version", 1}, {"cases", agg.cases}, {"regions", regions}, {"psnr_db", summary_json(agg.psnr_db)}};
}

std::string reports_to_csv(const std::vector<MetricsReport>& cases, const AggregateReport* agg) {
    std::ostringstream os;
    os << "case,region,metric,value,present\n";
    auto row = [&](const std::string& c, const std::string& region, const std::string& metric,
                   const std::optional<double>& v, bool present) {
        os << c << ',' << region << ',' << metric << ',' << (v ? format_double(*v) : "") << ','
           << (present ? 1 : 0) << '\n';
    };
    for (const auto& rep : cases) {
        for (const auto& r : rep.regions) {
            row(rep.case_id, r.region, "dice", r.dice, r.present);
            row(rep.case_id, r.region, "cl_dice", r.cl_dice, r.present);
        }
        if (rep.psnr) {
            if (rep.psnr->clean) {
                os << rep.case_id << ",global,psnr_db,inf,1\n";
            } else {
                row(rep.case_id, "global", "psnr_db", rep.psnr->db, true);
            }
        }
    }
    if (agg) {
        for (const auto& r : agg->regions) {
            for (const auto& [metric, s] : {std::pair{"dice", r.dice}, std::pair{"cl_dice", r.cl_dice}}) {
                row("mean", r.region, metric, s ? std::optional<double>(s->mean) : std::nullopt, s.has_value());
                row("std", r.region, metric, s ? std::optional<double>(s->std) : std::nullopt, s.has_value());
            }
        }
        if (agg->psnr_db) {
            row("mean", "global", "psnr_db", agg->psnr_db->mean, true);
            row("std", "global", "psnr_db", agg->psnr_db->std, true);
        }
    }
    return os.str();
}

}  // namespace vfuse
