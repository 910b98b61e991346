#include "vesselfuse/vesselness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "vesselfuse/parallel.hpp"

namespace vfuse {

std::string_view filter_name(FilterId id) {
    switch (id) {
        case FilterId::frangi: return "Frangi";
        case FilterId::jerman: return "Jerman";
        case FilterId::sato: return "Sato";
        case FilterId::zhang: return "Zhang";
        case FilterId::meijering: return "Meijering";
        case FilterId::rorpo: return "RORPO";
    }
    return "?";
}

FilterId parse_filter(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    for (FilterId id : kFilterOrder) {
        std::string n(filter_name(id));
        std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::tolower(c); });
        if (n == lower) return id;
    }
    throw UsageError("unknown filter '" + std::string(name) + "'");
}

bool is_hessian_filter(FilterId id) { return id != FilterId::rorpo; }

std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
    if (n == 0) return {};
    if (n == 1 || hi == lo) return std::vector<double>(n == 1 ? 1 : n, lo);
    std::vector<double> out(n);
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(a + (b - a) * static_cast<double>(i) / (n - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

void FilterParams::validate() const {
    if (scales.empty()) throw UsageError("filter scales must not be empty");
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (!(scales[i] > 0.0) || !std::isfinite(scales[i])) throw UsageError("filter scales must be > 0");
        if (i > 0 && !(scales[i] > scales[i - 1])) throw UsageError("filter scales must be strictly increasing");
    }
    auto unit = [](double v, const char* name) {
        if (!(v > 0.0 && v <= 1.0)) throw UsageError(std::string(name) + " must lie in (0, 1]");
    };
    unit(frangi_alpha, "frangi_alpha");
    unit(frangi_beta, "frangi_beta");
    unit(jerman_tau, "jerman_tau");
    if (frangi_c && !(*frangi_c > 0.0 && std::isfinite(*frangi_c))) throw UsageError("frangi_c must be > 0");
    if (!(sato_alpha1 > 0.0) || !(sato_alpha2 > 0.0)) throw UsageError("sato alphas must be > 0");
    if (!std::isfinite(meijering_alpha)) throw UsageError("meijering_alpha must be finite");
    if (rorpo_lengths.empty()) throw UsageError("rorpo_lengths must not be empty");
    for (std::size_t i = 0; i < rorpo_lengths.size(); ++i) {
        if (rorpo_lengths[i] < 2) throw UsageError("rorpo_lengths must be >= 2");
        if (i > 0 && rorpo_lengths[i] <= rorpo_lengths[i - 1])
            throw UsageError("rorpo_lengths must be strictly increasing");
    }
    if (rorpo_dilation < 0) throw UsageError("rorpo_dilation must be >= 0");
}

FilterParams FilterParams::defaults_for(const Geometry& geom, double max_radius_mm) {
    FilterParams p;
    const double lo = geom.min_spacing();
    const double hi = std::max(max_radius_mm, 4.0 * lo);
    p.scales = log_spaced(lo, hi, 5);
    return p;
}

double frangi_response(const EigenTriple& e, double alpha, double beta, double c) {
    if (e.l2 >= 0.0 || e.l3 >= 0.0 || c <= 0.0) return 0.0;
    const double a2 = std::abs(e.l2), a3 = std::abs(e.l3);
    const double ra = a2 / a3;
    const double rb = std::abs(e.l1) / std::sqrt(a2 * a3);
    const double s2 = e.l1 * e.l1 + e.l2 * e.l2 + e.l3 * e.l3;
    return (1.0 - std::exp(-ra * ra / (2.0 * alpha * alpha))) * std::exp(-rb * rb / (2.0 * beta * beta)) *
           (1.0 - std::exp(-s2 / (2.0 * c * c)));
}

double sato_response(const EigenTriple& e, double alpha1, double alpha2) {
    const double lc = std::min(-e.l2, -e.l3);
    if (lc <= 0.0) return 0.0;
    if (e.l1 <= 0.0) return lc * std::exp(-e.l1 * e.l1 / (2.0 * alpha1 * alpha1 * lc * lc));
    if (e.l1 < lc / alpha2) return lc * std::exp(-e.l1 * e.l1 / (2.0 * alpha2 * alpha2 * lc * lc));
    return 0.0;
}

double jerman_lambda_rho(double l3, double tau, double max_neg_l3) {
    if (l3 >= 0.0) return 0.0;
    const double floor_mag = tau * max_neg_l3;
    return -l3 >= floor_mag ? l3 : -floor_mag;
}

double jerman_response(double l2, double lambda_rho) {
    const double u = -l2, r = -lambda_rho;
    if (u <= 0.0 || r <= 0.0) return 0.0;
    if (u >= r / 2.0) return 1.0;
    const double k = 3.0 / (u + r);
    return u * u * (r - u) * k * k * k;
}

double zhang_response(const EigenTriple& e, double lambda_rho, double beta) {
    const double j = jerman_response(e.l2, lambda_rho);
    if (j <= 0.0) return 0.0;
    const double rb = std::abs(e.l1) / std::sqrt(std::abs(e.l2 * lambda_rho));
    return j * std::exp(-rb * rb / (2.0 * beta * beta));
}

double meijering_dominant_modified(const EigenTriple& e, double alpha) {
    const double sum = e.l1 + e.l2 + e.l3;
    double best = 0.0;
    for (double l : {e.l1, e.l2, e.l3}) {
        const double m = l + alpha * (sum - l);
        if (std::abs(m) > std::abs(best) || (std::abs(m) == std::abs(best) && m < best)) best = m;
    }
    return best;
}

double meijering_response(const EigenTriple& e, double alpha, double global_min) {
    const double m = meijering_dominant_modified(e, alpha);
    if (m >= 0.0 || global_min >= 0.0) return 0.0;
    return std::min(1.0, m / global_min);
}

EigenStack compute_eigen_stack(const Volume3D& vol, const FilterParams& p) {
    p.validate();
    EigenStack st;
    st.geometry = vol.geometry();
    st.scales = p.scales;
    st.meijering_global_min = 0.0;
    for (double sigma : p.scales) {
        const SymMat3Field h = hessian_at_scale(vol, sigma);
        std::vector<std::array<float, 3>> eig(h.data.size());
        parallel_ranges(0, eig.size(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                const EigenTriple e = eig_sym3(h.data[i]);
                eig[i] = {static_cast<float>(e.l1), static_cast<float>(e.l2), static_cast<float>(e.l3)};
            }
        });
        double max_neg = 0.0;
        for (const auto& e : eig) {
            const double l1 = e[0], l2 = e[1], l3 = e[2];
            st.max_frobenius = std::max(st.max_frobenius, std::sqrt(l1 * l1 + l2 * l2 + l3 * l3));
            max_neg = std::max(max_neg, -l3);
            st.meijering_global_min =
                std::min(st.meijering_global_min, meijering_dominant_modified({l1, l2, l3}, p.meijering_alpha));
        }
        st.max_neg_l3.push_back(max_neg);
        st.eig.push_back(std::move(eig));
    }
    return st;
}

double resolve_frangi_c(const EigenStack& stack, const FilterParams& p) {
    return p.frangi_c ? *p.frangi_c : 0.5 * stack.max_frobenius;
}

std::vector<Volume3D> per_scale_responses(const EigenStack& stack, FilterId filter, const FilterParams& p) {
    if (!is_hessian_filter(filter)) throw UsageError("per_scale_responses covers Hessian filters only");
    const double c = resolve_frangi_c(stack, p);
    std::vector<Volume3D> out;
    for (std::size_t s = 0; s < stack.scales.size(); ++s) {
        Volume3D r(stack.geometry, 0.0);
        const auto& eig = stack.eig[s];
        const double max_neg = stack.max_neg_l3[s];
        parallel_ranges(0, eig.size(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                const EigenTriple e{eig[i][0], eig[i][1], eig[i][2]};
                double v = 0.0;
                switch (filter) {
                    case FilterId::frangi: v = frangi_response(e, p.frangi_alpha, p.frangi_beta, c); break;
                    case FilterId::sato: v = sato_response(e, p.sato_alpha1, p.sato_alpha2); break;
                    case FilterId::jerman:
                        v = jerman_response(e.l2, jerman_lambda_rho(e.l3, p.jerman_tau, max_neg));
                        break;
                    case FilterId::zhang:
                        v = zhang_response(e, jerman_lambda_rho(e.l3, p.jerman_tau, max_neg), p.frangi_beta);
                        break;
                    case FilterId::meijering:
                        v = meijering_response(e, p.meijering_alpha, stack.meijering_global_min);
                        break;
                    case FilterId::rorpo: break;
                }
                r[i] = v;
            }
        });
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

struct Offset3 {
    int dx, dy, dz;
};

std::vector<Offset3> orientation_cone(int orientation) {
    if (orientation < 0 || orientation > 6) throw UsageError("RORPO orientation must be in [0, 6]");
    if (orientation < 3) {
        std::vector<Offset3> cone;
        const int a = orientation;
        const int b = (a + 1) % 3, c = (a + 2) % 3;
        int base[3] = {0, 0, 0};
        base[a] = 1;
        cone.push_back({base[0], base[1], base[2]});
        for (int axis : {b, c}) {
            for (int sgn : {-1, 1}) {
                int v[3] = {base[0], base[1], base[2]};
                v[axis] = sgn;
                cone.push_back({v[0], v[1], v[2]});
            }
        }
        return cone;
    }
    static constexpr int diag[4][3] = {{1, 1, 1}, {1, 1, -1}, {1, -1, 1}, {-1, 1, 1}};
    const int* d = diag[orientation - 3];
    std::vector<Offset3> cone{{d[0], d[1], d[2]}};
    for (int zero = 0; zero < 3; ++zero) {
        int v[3] = {d[0], d[1], d[2]};
        v[zero] = 0;
        cone.push_back({v[0], v[1], v[2]});
    }
    return cone;
}

}  // namespace

Volume3D path_opening(const Volume3D& vol, int orientation, int length) {
    if (length < 1) throw UsageError("path length must be >= 1");
    const Dims& d = vol.dims();
    const std::size_t px = d.nx + 2, py = d.ny + 2, pz = d.nz + 2;
    const std::size_t padded = px * py * pz;
    constexpr float kNone = -std::numeric_limits<float>::infinity();
    auto pidx = [&](std::size_t x, std::size_t y, std::size_t z) { return (x + 1) + px * ((y + 1) + py * (z + 1)); };

    std::vector<float> f(padded, kNone);
    for (std::size_t z = 0; z < d.nz; ++z)
        for (std::size_t y = 0; y < d.ny; ++y)
            for (std::size_t x = 0; x < d.nx; ++x) f[pidx(x, y, z)] = static_cast<float>(vol.at(x, y, z));

    std::vector<std::ptrdiff_t> offsets;
    for (const auto& o : orientation_cone(orientation))
        offsets.push_back(o.dx + static_cast<std::ptrdiff_t>(px) *
                                     (o.dy + static_cast<std::ptrdiff_t>(py) * o.dz));

    // step(prev, out, sign): out(p) = min(f(p), max_s prev(p + sign * s)).
    auto step = [&](const std::vector<float>& prev, std::vector<float>& out, int sign) {
        parallel_for(0, d.nz, [&](std::size_t z) {
            for (std::size_t y = 0; y < d.ny; ++y) {
                const std::size_t i0 = pidx(0, y, z);
                float* dst = out.data() + i0;
                const float* src = f.data() + i0;
                const float* first = prev.data() + i0 + sign * offsets[0];
                for (std::size_t x = 0; x < d.nx; ++x) dst[x] = first[x];
                for (std::size_t k = 1; k < offsets.size(); ++k) {
                    const float* q = prev.data() + i0 + sign * offsets[k];
                    for (std::size_t x = 0; x < d.nx; ++x) dst[x] = std::max(dst[x], q[x]);
                }
                for (std::size_t x = 0; x < d.nx; ++x) dst[x] = std::min(src[x], dst[x]);
            }
        });
    };

    const auto L = static_cast<std::size_t>(length);
    // Forward layer k: best bottleneck of a path of exactly k + 1 voxels starting at p.
    // Only every B-th layer is kept; a block is recomputed from its checkpoint
    // when the backward sweep reaches it, so memory grows with sqrt(L).
    const auto B = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(L))));
    std::vector<std::vector<float>> checkpoints;
    {
        std::vector<float> cur = f, nxt(padded, kNone);
        for (std::size_t k = 0; k < L; ++k) {
            if (k % B == 0) checkpoints.push_back(cur);
            if (k + 1 < L) {
                step(cur, nxt, +1);
                std::swap(cur, nxt);
            }
        }
    }
    std::vector<std::vector<float>> block(B);
    std::size_t block_id = static_cast<std::size_t>(-1);
    auto forward_layer = [&](std::size_t k) -> const std::vector<float>& {
        const std::size_t c = k / B;
        if (c != block_id) {
            block[0] = checkpoints[c];
            for (std::size_t j = 1; j < B && c * B + j < L; ++j) {
                block[j].assign(padded, kNone);
                step(block[j - 1], block[j], +1);
            }
            block_id = c;
        }
        return block[k - c * B];
    };

    std::vector<float> best(padded, kNone);
    std::vector<float> back = f, next(padded, kNone);
    for (std::size_t a = 1; a <= L; ++a) {
        const std::vector<float>& ahead = forward_layer(L - a);
        parallel_for(0, d.nz, [&](std::size_t z) {
            for (std::size_t y = 0; y < d.ny; ++y) {
                std::size_t i = pidx(0, y, z);
                for (std::size_t x = 0; x < d.nx; ++x, ++i) best[i] = std::max(best[i], std::min(back[i], ahead[i]));
            }
        });
        if (a < L) {
            step(back, next, -1);
            std::swap(back, next);
        }
    }

    Volume3D out(vol.geometry(), 0.0);
    for (std::size_t z = 0; z < d.nz; ++z)
        for (std::size_t y = 0; y < d.ny; ++y)
            for (std::size_t x = 0; x < d.nx; ++x) {
                const float v = best[pidx(x, y, z)];
                // No complete path through this voxel: the opening is the volume minimum.
                out.at(x, y, z) = v == kNone ? std::numeric_limits<double>::quiet_NaN()
                                             : std::min(static_cast<double>(v), vol.at(x, y, z));
            }
    double lowest = std::numeric_limits<double>::infinity();
    for (double v : vol.data()) lowest = std::min(lowest, static_cast<double>(static_cast<float>(v)));
    for (auto& v : out.data())
        if (std::isnan(v)) v = lowest;
    return out;
}

Volume3D dilate_cube(const Volume3D& vol, int radius) {
    if (radius <= 0) return vol;
    Volume3D out = vol;
    const Dims& d = vol.dims();
    for (int axis = 0; axis < 3; ++axis) {
        const Volume3D src = out;
        const auto n = static_cast<std::int64_t>(d[axis]);
        const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? d.nx : d.nx * d.ny);
        parallel_for(0, d.size(), [&](std::size_t i) {
            const auto c = vol.geometry().coords(i);
            const auto pos = static_cast<std::int64_t>(c[axis]);
            double m = src[i];
            for (std::int64_t k = std::max<std::int64_t>(0, pos - radius); k <= std::min(n - 1, pos + radius); ++k)
                m = std::max(m, src[i + (k - pos) * static_cast<std::ptrdiff_t>(stride)]);
            out[i] = m;
        });
    }
    return out;
}

Volume3D rorpo_single(const Volume3D& vol, int length, int dilation) {
    const Volume3D source = dilation > 0 ? dilate_cube(vol, dilation) : vol;
    std::array<Volume3D, 7> openings;
    for (int o = 0; o < 7; ++o) {
        openings[o] = path_opening(source, o, length);
        if (dilation > 0)
            for (std::size_t i = 0; i < vol.size(); ++i) openings[o][i] = std::min(openings[o][i], vol[i]);
    }
    Volume3D out(vol.geometry(), 0.0);
    parallel_ranges(0, vol.size(), [&](std::size_t lo, std::size_t hi) {
        std::array<double, 7> r;
        for (std::size_t i = lo; i < hi; ++i) {
            for (int o = 0; o < 7; ++o) r[o] = openings[o][i];
            std::nth_element(r.begin(), r.begin() + 3, r.end(), std::greater<>());
            const double fourth = r[3];
            const double top = *std::max_element(r.begin(), r.begin() + 3);
            out[i] = std::max(0.0, top - fourth);
        }
    });
    return out;
}

Volume3D rorpo_response(const Volume3D& vol, const FilterParams& p) {
    p.validate();
    const Dims& d = vol.dims();
    const auto longest = static_cast<std::size_t>(p.rorpo_lengths.back());
    if (std::max({d.nx, d.ny, d.nz}) < longest)
        throw DataError("volume is smaller than the longest RORPO path (" + std::to_string(longest) + " voxels)");
    Volume3D out(vol.geometry(), 0.0);
    for (int L : p.rorpo_lengths) {
        const Volume3D r = rorpo_single(vol, L, p.rorpo_dilation);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], r[i]);
    }
    return out;
}

Volume3D normalize_response(const Volume3D& vol) {
    require_finite(vol, "filter response");
    const auto [lo_it, hi_it] = std::minmax_element(vol.data().begin(), vol.data().end());
    const double lo = *lo_it, hi = *hi_it;
    Volume3D out(vol.geometry(), 0.0);
    if (hi > lo) {
        const double inv = 1.0 / (hi - lo);
        for (std::size_t i = 0; i < vol.size(); ++i) out[i] = (vol[i] - lo) * inv;
        // Pin the extrema exactly.
        for (std::size_t i = 0; i < vol.size(); ++i) {
            if (vol[i] == hi) out[i] = 1.0;
            if (vol[i] == lo) out[i] = 0.0;
        }
    }
    return out;
}

Volume3D apply_polarity(const Volume3D& vol, Polarity polarity) {
    if (polarity == Polarity::bright_on_dark) return vol;
    Volume3D out = vol;
    for (auto& v : out.data()) v = -v;
    return out;
}

Volume3D multiscale_raw(const Volume3D& vol, FilterId filter, const FilterParams& p) {
    p.validate();
    const Volume3D src = apply_polarity(vol, p.polarity);
    if (filter == FilterId::rorpo) return rorpo_response(src, p);
    const EigenStack stack = compute_eigen_stack(src, p);
    std::vector<Volume3D> per = per_scale_responses(stack, filter, p);
    Volume3D out = std::move(per.front());
    for (std::size_t s = 1; s < per.size(); ++s)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], per[s][i]);
    return out;
}

Volume3D multiscale(const Volume3D& vol, FilterId filter, const FilterParams& p) {
    return normalize_response(multiscale_raw(vol, filter, p));
}

std::array<Volume3D, 6> all_filters(const Volume3D& vol, const FilterParams& p) {
    p.validate();
    const Volume3D src = apply_polarity(vol, p.polarity);
    const EigenStack stack = compute_eigen_stack(src, p);
    std::array<Volume3D, 6> out;
    for (std::size_t k = 0; k < kFilterOrder.size(); ++k) {
        const FilterId id = kFilterOrder[k];
        const auto t0 = std::chrono::steady_clock::now();
        try {
            Volume3D raw;
            if (id == FilterId::rorpo) {
                raw = rorpo_response(src, p);
            } else {
                std::vector<Volume3D> per = per_scale_responses(stack, id, p);
                raw = std::move(per.front());
                for (std::size_t s = 1; s < per.size(); ++s)
                    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = std::max(raw[i], per[s][i]);
            }
            out[k] = normalize_response(raw);
        } catch (const UsageError& e) {
            throw UsageError("filter " + std::string(filter_name(id)) + " failed: " + e.what());
        } catch (const std::exception& e) {
            throw DataError("filter " + std::string(filter_name(id)) + " failed: " + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        log_info("filter " + std::string(filter_name(id)) + ": " + std::to_string(secs) + " s");
    }
    return out;
}

}  // namespace vfuse
