#include "vesselfuse/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace vfuse {

namespace {

using nlohmann::json;

void allow_only(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw UsageError("config: '" + where + "' must be an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, _] : j.items())
        if (!allowed.count(k)) throw UsageError("config: unknown key '" + where + (where.empty() ? "" : ".") + k + "'");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw UsageError("config: bad value for '" + where + (where.empty() ? "" : ".") + key + "'");
    }
}

}  // namespace

Interpolation parse_interpolation(const std::string& name) {
    if (name == "nearest" || name == "nn") return Interpolation::nearest;
    if (name == "bspline") return Interpolation::bspline;
    throw UsageError("unknown interpolation '" + name + "' (nearest|nn, bspline)");
}

std::string interpolation_name(Interpolation mode) { return mode == Interpolation::nearest ? "nearest" : "bspline"; }

void PipelineConfig::validate() const {
    if (!filters.scales.empty()) filters.validate();
    FilterParams probe = filters;
    if (probe.scales.empty()) probe.scales = {1.0};
    probe.validate();
    if (!(max_radius_mm > 0.0) || !std::isfinite(max_radius_mm)) throw UsageError("config: max_radius_mm must be > 0");
    intervals.validate();
    if (bifurcation_radius_mm && !(*bifurcation_radius_mm >= 0.0))
        throw UsageError("config: bifurcation_radius_mm must be >= 0");
}

FilterParams PipelineConfig::filters_for(const Geometry& geom) const {
    FilterParams p = filters;
    if (p.scales.empty()) p.scales = FilterParams::defaults_for(geom, max_radius_mm).scales;
    p.validate();
    return p;
}

nlohmann::json filter_params_to_json(const FilterParams& p) {
    return {{"scales", p.scales},
            {"polarity", p.polarity == Polarity::bright_on_dark ? "bright" : "dark"},
            {"frangi", {{"alpha", p.frangi_alpha}, {"beta", p.frangi_beta}, {"c", p.frangi_c ? json(*p.frangi_c) : json(nullptr)}}},
            {"jerman", {{"tau", p.jerman_tau}}},
            {"sato", {{"alpha1", p.sato_alpha1}, {"alpha2", p.sato_alpha2}}},
            {"meijering", {{"alpha", p.meijering_alpha}}},
            {"rorpo", {{"lengths", p.rorpo_lengths}, {"dilation", p.rorpo_dilation}}}};
}

PipelineConfig config_from_json(const json& j) {
    PipelineConfig c;
    allow_only(j, "", {"filters", "intervals", "bifurcation_radius_mm", "interpolation", "output_dir", "threads"});
    if (j.contains("filters")) {
        const json& f = j.at("filters");
        allow_only(f, "filters", {"scales", "max_radius_mm", "polarity", "frangi", "jerman", "sato", "meijering", "rorpo"});
        read(f, "scales", c.filters.scales, "filters");
        read(f, "max_radius_mm", c.max_radius_mm, "filters");
        if (f.contains("polarity")) {
            std::string pol;
            read(f, "polarity", pol, "filters");
            if (pol == "bright") {
                c.filters.polarity = Polarity::bright_on_dark;
            } else if (pol == "dark") {
                c.filters.polarity = Polarity::dark_on_bright;
            } else {
                throw UsageError("config: filters.polarity must be 'bright' or 'dark'");
            }
        }
        if (f.contains("frangi")) {
            const json& g = f.at("frangi");
            allow_only(g, "filters.frangi", {"alpha", "beta", "c"});
            read(g, "alpha", c.filters.frangi_alpha, "filters.frangi");
            read(g, "beta", c.filters.frangi_beta, "filters.frangi");
            if (g.contains("c") && !g.at("c").is_null()) {
                double v = 0.0;
                read(g, "c", v, "filters.frangi");
                c.filters.frangi_c = v;
            }
        }
        if (f.contains("jerman")) {
            allow_only(f.at("jerman"), "filters.jerman", {"tau"});
            read(f.at("jerman"), "tau", c.filters.jerman_tau, "filters.jerman");
        }
        if (f.contains("sato")) {
            allow_only(f.at("sato"), "filters.sato", {"alpha1", "alpha2"});
            read(f.at("sato"), "alpha1", c.filters.sato_alpha1, "filters.sato");
            read(f.at("sato"), "alpha2", c.filters.sato_alpha2, "filters.sato");
        }
        if (f.contains("meijering")) {
            allow_only(f.at("meijering"), "filters.meijering", {"alpha"});
            read(f.at("meijering"), "alpha", c.filters.meijering_alpha, "filters.meijering");
        }
        if (f.contains("rorpo")) {
            allow_only(f.at("rorpo"), "filters.rorpo", {"lengths", "dilation"});
            read(f.at("rorpo"), "lengths", c.filters.rorpo_lengths, "filters.rorpo");
            read(f.at("rorpo"), "dilation", c.filters.rorpo_dilation, "filters.rorpo");
        }
    }
    if (j.contains("intervals")) c.intervals = intervals_from_json(j.at("intervals"));
    if (j.contains("bifurcation_radius_mm") && !j.at("bifurcation_radius_mm").is_null()) {
        double r = 0.0;
        read(j, "bifurcation_radius_mm", r, "");
        c.bifurcation_radius_mm = r;
    }
    if (j.contains("interpolation")) {
        const json& ip = j.at("interpolation");
        allow_only(ip, "interpolation", {"volume", "mask"});
        std::string v;
        if (ip.contains("volume")) {
            read(ip, "volume", v, "interpolation");
            c.volume_interpolation = parse_interpolation(v);
        }
        if (ip.contains("mask")) {
            read(ip, "mask", v, "interpolation");
            c.mask_interpolation = parse_interpolation(v);
        }
    }
    read(j, "output_dir", c.output_dir, "");
    read(j, "threads", c.threads, "");
    c.validate();
    return c;
}

nlohmann::json config_to_json(const PipelineConfig& c) {
    json f = filter_params_to_json(c.filters);
    f["max_radius_mm"] = c.max_radius_mm;
    json intervals;
    if (c.intervals.preset == "custom") {
        std::vector<std::string> names;
        std::vector<double> uppers;
        for (const auto& k : c.intervals.classes) {
            names.push_back(k.name);
            if (std::isfinite(k.upper_mm)) uppers.push_back(k.upper_mm);
        }
        intervals = {{"names", names}, {"upper_mm", uppers}};
    } else {
        intervals = c.intervals.preset;
    }
    return {{"filters", f},
            {"intervals", intervals},
            {"bifurcation_radius_mm", c.bifurcation_radius_mm ? json(*c.bifurcation_radius_mm) : json(nullptr)},
            {"interpolation",
             {{"volume", interpolation_name(c.volume_interpolation)}, {"mask", interpolation_name(c.mask_interpolation)}}},
            {"output_dir", c.output_dir},
            {"threads", c.threads}};
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw UsageError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw UsageError("config " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t h) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string hash_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot read " + path.string());
    std::uint64_t h = 14695981039346656037ULL;
    std::vector<char> buf(1 << 16);
    while (is) {
        is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h = fnv1a64(buf.data(), static_cast<std::size_t>(is.gcount()), h);
    }
    return hex64(h);
}

std::string hash_json(const json& j) {
    const std::string s = j.dump();
    return hex64(fnv1a64(s.data(), s.size()));
}

nlohmann::json provenance(const json& config, const std::map<std::string, std::filesystem::path>& inputs) {
    json in = json::object();
    for (const auto& [name, path] : inputs)
        in[name] = {{"path", path.filename().string()}, {"fnv1a64", hash_file(path)}};
    return {{"tool", "vesselfuse"}, {"version", kToolVersion}, {"config_hash", hash_json(config)}, {"inputs", in}};
}

}  // namespace vfuse
