#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "featsize/feature_systems.hpp"
#include "featsize/homotopy.hpp"

namespace featsize {

// Dense sample of the real variety used to verify that a candidate feature is
// realized by nearest points. epsilon = covering radius on the variety,
// delta = accuracy of the sample points. Verification is only meaningful when
// the sample covers the whole bounded variety.
struct SampleView {
    const std::vector<RealPoint>* points = nullptr;
    double epsilon = 0.0;
    double delta = 0.0;

    bool available() const { return points != nullptr && !points->empty(); }
    double min_distance(const RealPoint& z) const {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : *points) {
            double s = 0.0;
            for (std::size_t a = 0; a < z.size(); ++a) {
                double d = p[a] - z[a];
                s += d * d;
            }
            best = std::min(best, s);
        }
        return std::sqrt(best);
    }
};

struct FeatureOptions {
    TrackerOptions tracker;
    double gamma_tol = 1e-6;        // degenerate-locus filter tolerance
    double real_tol = 1e-8;         // realness of witnesses and values
    double value_rel_tol = 1e-7;    // grouping of equal critical values
    double singular_rel_tol = 1e-5; // widened grouping near singular witnesses
    double value_floor = 1e-7;      // distances below this count as degenerate
    int max_order = 0;              // highest bottleneck order; 0 means n+1
    SampleView sample;              // optional nearest-point verification
};

struct CriticalRecord {
    double value = 0.0;   // sqrt of the critical value of the squared objective
    Complex raw;          // the squared objective itself
    ComplexPoint witness; // full solution vector of the producing system
    std::vector<ComplexPoint> feet;  // variety points of the configuration
    ComplexPoint center;             // the equidistant center z
    int order = 2;        // feet count: 1 for curvature centers, k for bottlenecks
    int multiplicity = 1;
    bool real_witness = false;  // feet, center, and weights are real
    bool singular = false;
    std::string note;
};

struct CriticalReport {
    Quantity quantity = Quantity::reach;
    double lower_bound = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> exact_value;
    std::optional<ComplexPoint> attained_at;  // center of the accepted witness
    std::vector<CriticalRecord> records;  // ascending by value
    std::vector<std::string> caveats;
    long long paths_tracked = 0;
    int distinct_count = 0;
    int filtered_count = 0;

    bool has_bound() const { return std::isfinite(lower_bound); }
};

// tier 0: isolated over C; 1: center is real; 2: feet on the real variety with
// interior hull weights; 3: verified as nearest points against a dense sample
enum class WitnessTier { algebraic = 0, real_variety = 1, real_x = 2, geometric = 3 };

inline const char* to_string(WitnessTier t) {
    switch (t) {
        case WitnessTier::algebraic: return "algebraic";
        case WitnessTier::real_variety: return "real_variety";
        case WitnessTier::real_x: return "real_x";
        default: return "geometric";
    }
}

struct OrbitRecord {
    ComplexPoint rep;
    Complex raw;
    double value = std::numeric_limits<double>::quiet_NaN();  // set when raw is positive real
    int members = 0;
    WitnessTier tier = WitnessTier::algebraic;
    bool singular = false;
};

struct BottleneckTable {
    int order = 2;
    long long paths_tracked = 0;
    int distinct_solutions = 0;  // after the degenerate-locus filter
    int filtered = 0;
    int algebraic = 0;      // orbit counts, nested: algebraic >= real_variety >= ...
    int real_variety = 0;
    int real_x = 0;
    int geometric = 0;
    std::vector<OrbitRecord> orbits;
    std::vector<std::string> notes;
};

// the spec's junk predicate rides along unless the caller set their own
inline TrackerOptions with_junk(const CorrespondenceSpec& spec, const TrackerOptions& topt) {
    TrackerOptions opt = topt;
    if (!opt.junk_test && spec.junk) opt.junk_test = spec.junk;
    return opt;
}

inline EndpointSet solve_correspondence(const CorrespondenceSpec& spec,
                                        const TrackerOptions& topt = {}) {
    if (spec.kind == Quantity::medial)
        throw std::invalid_argument("the pair variety is not square; solve reach/lfs/wfs systems");
    const ProductStructure* ps = spec.structure.eq_factors.empty() ? nullptr : &spec.structure;
    return solve_linear_product(spec.system, with_junk(spec, topt), ps);
}

namespace detail {

// Coordinates of an ill-conditioned endpoint are only accurate to roughly
// cond * machine epsilon, so membership in the degenerate locus has to be
// tested at that scale; capped so genuinely separated configurations never
// fall in.
inline double gamma_tol_for(const DistinctSolution& d, const FeatureOptions& opt) {
    return std::max(opt.gamma_tol, std::min(1e-3, d.condition_estimate * 1e-13));
}

inline bool block_real(const ComplexPoint& v, double tol) {
    return max_imag(v) <= tol * (1.0 + norm2(v));
}

inline RealPoint real_part(const ComplexPoint& v) {
    RealPoint out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].real();
    return out;
}

// feet + center (+ weights) real; the multiplier and critical blocks are
// determined by the geometry and may stay complex (the patch row is complex)
inline bool witness_real(const CorrespondenceSpec& spec, const ComplexPoint& sol, double tol) {
    for (int i = 0; i < spec.layout.k; ++i)
        if (!block_real(foot_of(spec, sol, i), tol)) return false;
    if (!block_real(center_of(spec, sol), tol)) return false;
    ComplexPoint t = weights_of(spec, sol);
    if (!t.empty() && !block_real(t, tol)) return false;
    return true;
}

inline WitnessTier witness_tier(const CorrespondenceSpec& spec, const ComplexPoint& sol,
                                const FeatureOptions& opt) {
    ComplexPoint z = center_of(spec, sol);
    if (!block_real(z, opt.real_tol)) return WitnessTier::algebraic;
    bool feet_real = true;
    for (int i = 0; i < spec.layout.k && feet_real; ++i)
        feet_real = block_real(foot_of(spec, sol, i), opt.real_tol);
    if (feet_real) {
        ComplexPoint t = weights_of(spec, sol);
        if (!t.empty() && !block_real(t, opt.real_tol)) feet_real = false;
        for (const auto& ti : t)
            if (ti.real() <= opt.real_tol || ti.real() >= 1.0 - opt.real_tol) feet_real = false;
    }
    if (!feet_real) return WitnessTier::real_variety;
    if (!opt.sample.available()) return WitnessTier::real_x;

    RealPoint zr = real_part(z);
    RealPoint x0 = real_part(foot_of(spec, sol, 0));
    double r = 0.0;
    for (std::size_t a = 0; a < zr.size(); ++a) r += (x0[a] - zr[a]) * (x0[a] - zr[a]);
    r = std::sqrt(r);
    double slack = opt.sample.epsilon + opt.sample.delta + 1e-6 * (1.0 + r);
    return opt.sample.min_distance(zr) >= r - slack ? WitnessTier::geometric
                                                    : WitnessTier::real_x;
}

// positive real critical value (as the squared objective); returns sqrt
inline std::optional<double> usable_value(Complex raw, double real_tol, double floor) {
    if (std::abs(raw.imag()) > real_tol * (1.0 + std::abs(raw))) return std::nullopt;
    if (raw.real() <= floor * floor) return std::nullopt;
    return std::sqrt(raw.real());
}

// ascending records grouped by value; a group is widened when it contains a
// singular witness, whose value is known with less accuracy
inline std::vector<std::vector<int>> group_by_value(const std::vector<CriticalRecord>& recs,
                                                    const FeatureOptions& opt) {
    std::vector<std::vector<int>> groups;
    for (int i = 0; i < static_cast<int>(recs.size()); ++i) {
        bool merged = false;
        if (!groups.empty()) {
            const auto& g = groups.back();
            double anchor = recs[g.front()].value;
            bool sing = recs[i].singular;
            for (int j : g) sing = sing || recs[j].singular;
            double rel = sing ? opt.singular_rel_tol : opt.value_rel_tol;
            if (recs[i].value <= anchor * (1.0 + rel) + rel) merged = true;
        }
        if (merged)
            groups.back().push_back(i);
        else
            groups.push_back({i});
    }
    return groups;
}

inline void finish_report(CriticalReport& rep, const FeatureOptions& opt, bool require_geometric) {
    std::sort(rep.records.begin(), rep.records.end(),
              [](const CriticalRecord& a, const CriticalRecord& b) { return a.value < b.value; });
    if (rep.records.empty()) {
        rep.caveats.push_back("no positive real critical values were found");
        return;
    }
    rep.lower_bound = rep.records.front().value;

    auto groups = group_by_value(rep.records, opt);
    for (const auto& g : groups) {
        bool any_real = false, any_sing = false;
        int best = -1;
        for (int i : g) {
            any_sing = any_sing || rep.records[i].singular;
            bool ok = rep.records[i].real_witness;
            if (require_geometric && opt.sample.available())
                ok = ok && rep.records[i].note == to_string(WitnessTier::geometric);
            if (ok) {
                any_real = true;
                if (best < 0 || (rep.records[best].singular && !rep.records[i].singular))
                    best = i;
            }
        }
        if (any_real) {
            rep.exact_value = rep.records[g.front()].value;
            rep.attained_at = rep.records[best].center;
            if (require_geometric && !opt.sample.available())
                rep.caveats.push_back(
                    "exact value inferred without nearest-point verification (no sample)");
            return;
        }
        if (groups.size() == 1) {
            rep.exact_value = rep.records.front().value;
            rep.attained_at = rep.records.front().center;
            rep.caveats.push_back(
                "single positive critical value; accepted as exact without a real witness");
            return;
        }
        if (any_sing) {
            rep.caveats.push_back(
                "smallest unresolved critical value " +
                format_double(rep.records[g.front()].value) +
                " has only singular witnesses; exactness undecided");
            return;
        }
        // an isolated, nonsingular group without real witnesses cannot carry a
        // real feature; move up the ladder
    }
}

// orbit partition of order-k solutions under permutations of the copies; the
// critical value is an orbit invariant, so only equal-value pairs are matched
inline std::vector<std::vector<int>> orbit_partition(const CorrespondenceSpec& spec,
                                                     const std::vector<const DistinctSolution*>& sols,
                                                     const std::vector<Complex>& raws) {
    const int m = static_cast<int>(sols.size());
    const int k = spec.layout.k;
    std::vector<std::vector<int>> perms;
    {
        std::vector<int> p(k);
        std::iota(p.begin(), p.end(), 0);
        do perms.push_back(p);
        while (std::next_permutation(p.begin(), p.end()));
    }
    std::vector<int> parent(m);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    std::vector<std::vector<ComplexPoint>> feet(m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < k; ++j) feet[i].push_back(foot_of(spec, sols[i]->rep, j));

    for (int a = 0; a < m; ++a) {
        for (int b = a + 1; b < m; ++b) {
            if (find(a) == find(b)) continue;
            if (std::abs(raws[a] - raws[b]) > 1e-6 * (1.0 + std::abs(raws[a]))) continue;
            double scale = 1.0;
            for (int j = 0; j < k; ++j) scale = std::max(scale, norm2(feet[a][j]));
            double tol = 1e-6 * (1.0 + scale);
            bool same = false;
            for (const auto& p : perms) {
                bool all = true;
                for (int j = 0; j < k && all; ++j)
                    all = dist2(feet[a][p[j]], feet[b][j]) <= tol;
                if (all) {
                    same = true;
                    break;
                }
            }
            if (same) parent[find(a)] = find(b);
        }
    }
    std::map<int, std::vector<int>> buckets;
    for (int i = 0; i < m; ++i) buckets[find(i)].push_back(i);
    std::vector<std::vector<int>> out;
    for (auto& [root, idx] : buckets) out.push_back(std::move(idx));
    return out;
}

}  // namespace detail

inline BottleneckTable classify_bottlenecks(const CorrespondenceSpec& spec, const EndpointSet& es,
                                            const FeatureOptions& opt = {}) {
    BottleneckTable table;
    table.order = spec.layout.k;
    table.paths_tracked = static_cast<long long>(es.endpoints.size());

    std::vector<const DistinctSolution*> passing;
    for (const auto& d : es.distinct) {
        if (in_gamma(spec, d.rep, detail::gamma_tol_for(d, opt))) {
            ++table.filtered;
            continue;
        }
        passing.push_back(&d);
    }
    table.distinct_solutions = static_cast<int>(passing.size());

    std::vector<Complex> raws(passing.size());
    for (std::size_t i = 0; i < passing.size(); ++i)
        raws[i] = eval_critical_value(spec, passing[i]->rep);

    auto orbits = detail::orbit_partition(spec, passing, raws);
    for (const auto& orbit : orbits) {
        OrbitRecord rec;
        rec.members = static_cast<int>(orbit.size());
        rec.raw = raws[orbit.front()];
        WitnessTier best_tier = WitnessTier::algebraic;
        int best_idx = orbit.front();
        double best_res = std::numeric_limits<double>::infinity();
        for (int i : orbit) {
            rec.singular = rec.singular || passing[i]->is_singular;
            WitnessTier t = detail::witness_tier(spec, passing[i]->rep, opt);
            if (static_cast<int>(t) > static_cast<int>(best_tier) ||
                (t == best_tier && passing[i]->residual < best_res)) {
                best_tier = t;
                best_idx = i;
                best_res = passing[i]->residual;
            }
        }
        rec.tier = best_tier;
        rec.rep = passing[best_idx]->rep;
        if (auto v = detail::usable_value(rec.raw, opt.real_tol, opt.value_floor)) rec.value = *v;
        table.orbits.push_back(std::move(rec));
    }
    std::sort(table.orbits.begin(), table.orbits.end(), [](const OrbitRecord& a, const OrbitRecord& b) {
        double av = std::isnan(a.value) ? std::numeric_limits<double>::infinity() : a.value;
        double bv = std::isnan(b.value) ? std::numeric_limits<double>::infinity() : b.value;
        return av < bv;
    });
    for (const auto& o : table.orbits) {
        ++table.algebraic;
        if (static_cast<int>(o.tier) >= 1) ++table.real_variety;
        if (static_cast<int>(o.tier) >= 2) ++table.real_x;
        if (static_cast<int>(o.tier) >= 3) ++table.geometric;
    }
    if (!opt.sample.available())
        table.notes.push_back("nearest-point verification skipped: no sample provided");
    else
        table.notes.push_back("geometric tier verified numerically against a sample (epsilon=" +
                              format_double(opt.sample.epsilon) + ")");
    return table;
}

namespace detail {

// append the usable critical records of one solved system to a report
inline void collect_records(const CorrespondenceSpec& spec, const EndpointSet& es,
                            CriticalReport& rep, const FeatureOptions& opt) {
    rep.paths_tracked += static_cast<long long>(es.endpoints.size());
    rep.distinct_count += static_cast<int>(es.distinct.size());
    int complex_values = 0;

    for (const auto& d : es.distinct) {
        if (in_gamma(spec, d.rep, detail::gamma_tol_for(d, opt))) {
            ++rep.filtered_count;
            continue;
        }
        Complex raw = eval_critical_value(spec, d.rep);
        auto v = usable_value(raw, opt.real_tol, opt.value_floor);
        if (!v) {
            if (std::abs(raw.imag()) > opt.real_tol * (1.0 + std::abs(raw))) ++complex_values;
            continue;
        }
        CriticalRecord rec;
        rec.value = *v;
        rec.raw = raw;
        rec.witness = d.rep;
        rec.order = spec.layout.focal ? 1 : spec.layout.k;
        rec.multiplicity = d.multiplicity;
        rec.real_witness = witness_real(spec, d.rep, opt.real_tol);
        rec.singular = d.is_singular;
        for (int i = 0; i < spec.layout.k; ++i) rec.feet.push_back(foot_of(spec, d.rep, i));
        rec.center = center_of(spec, d.rep);
        rec.note = spec.layout.focal ? "curvature_center" : "two_point";
        rep.records.push_back(std::move(rec));
    }
    if (complex_values > 0)
        rep.caveats.push_back(std::string(to_string(spec.kind)) + " system: " +
                              std::to_string(complex_values) +
                              " nonreal critical values excluded from the bound");
}

}  // namespace detail

// smallest positive critical distance over the pair variety (two-point
// configurations) merged with the focal system (curvature centers); the reach
// is attained in one of the two families
inline CriticalReport reach_lower_bound(const PolySystem& base, const FeatureOptions& opt = {}) {
    CriticalReport rep;
    rep.quantity = Quantity::reach;
    {
        CorrespondenceSpec spec = build_reach_system(base, opt.tracker.seed);
        EndpointSet es = solve_correspondence(spec, opt.tracker);
        detail::collect_records(spec, es, rep, opt);
    }
    {
        CorrespondenceSpec spec = build_focal_system(base, opt.tracker.seed);
        EndpointSet es = solve_correspondence(spec, opt.tracker);
        detail::collect_records(spec, es, rep, opt);
    }
    detail::finish_report(rep, opt, /*require_geometric=*/false);
    return rep;
}

// critical distances from the query point to the medial variety; interior
// critical points of the algebraic medial already bound the boundary values
// (their objective stays real even at complex feet), so no focal merge here
inline CriticalReport lfs_lower_bound(const PolySystem& base, const RealPoint& w,
                                      const FeatureOptions& opt = {}) {
    CorrespondenceSpec spec = build_lfs_system(base, w, opt.tracker.seed);
    EndpointSet es = solve_correspondence(spec, opt.tracker);
    CriticalReport rep;
    rep.quantity = Quantity::lfs;
    detail::collect_records(spec, es, rep, opt);
    detail::finish_report(rep, opt, /*require_geometric=*/false);
    return rep;
}

inline PolySystem lfs_substituted(const CorrespondenceSpec& spec, const ComplexPoint& w);

// one ab initio solve at a generic complex query point, then parameter
// continuation to every requested point
inline std::vector<CriticalReport> lfs_sweep(const PolySystem& base,
                                             const std::vector<RealPoint>& points,
                                             const FeatureOptions& opt = {}) {
    std::vector<CriticalReport> out;
    if (points.empty()) return out;
    CorrespondenceSpec spec = build_lfs_system(base, points.front(), opt.tracker.seed);
    const int n = spec.layout.n;

    Rng rng(opt.tracker.seed ^ 0x5feeb1e5ULL);
    TrackerOptions topt = with_junk(spec, opt.tracker);
    ComplexPoint w0(n);
    for (auto& c : w0) c = rng.complex_normal();
    PolySystem sys0 = lfs_substituted(spec, w0);
    ProductStructure ps0 = infer_product_structure(sys0);
    EndpointSet es0 = solve_linear_product(sys0, topt, &ps0);

    std::vector<ComplexPoint> starts;
    for (const auto& e : es0.endpoints)
        if (e.status == PathStatus::success) starts.push_back(e.point);

    for (const auto& w : points) {
        ComplexPoint wt(n);
        for (int a = 0; a < n; ++a) wt[a] = w[a];
        EndpointSet es = parameter_track(spec.param_system, n, w0, wt, starts, topt);
        CorrespondenceSpec at = spec;
        at.w = w;
        at.system = lfs_substituted(spec, w);
        CriticalReport rep;
        rep.quantity = Quantity::lfs;
        detail::collect_records(at, es, rep, opt);
        if (rep.records.empty()) {
            // When every critical solution is nonisolated (highly symmetric
            // varieties), the continuation paths start on singular points and
            // fail; solve this query point from scratch instead.
            ProductStructure ps = infer_product_structure(at.system);
            EndpointSet direct = solve_linear_product(at.system, topt, &ps);
            rep.caveats.push_back(
                "parameter continuation produced no usable records; solved directly");
            detail::collect_records(at, direct, rep, opt);
        }
        detail::finish_report(rep, opt, /*require_geometric=*/false);
        out.push_back(std::move(rep));
    }
    return out;
}

namespace detail {

// substitute trailing parameter values and reindex into the variable ring
inline PolySystem strip_params(const PolySystem& joint, int N, std::vector<std::string> names,
                               const ComplexPoint& vals) {
    PolySystem out;
    out.nvars = N;
    out.var_names = std::move(names);
    for (const auto& p : joint.polys) {
        Polynomial q = p;
        for (std::size_t a = 0; a < vals.size(); ++a)
            q = q.substitute(N + static_cast<int>(a),
                             Polynomial::constant(joint.nvars, vals[a]));
        Polynomial r(N);
        for (const auto& t : q.terms()) {
            std::vector<int> e(t.expo.begin(), t.expo.begin() + N);
            r.add_term(t.coeff, std::move(e));
        }
        r.normalize();
        out.polys.push_back(std::move(r));
    }
    return out;
}

}  // namespace detail

// lfs_substituted for a complex query point (ab initio solves)
inline PolySystem lfs_substituted(const CorrespondenceSpec& spec, const ComplexPoint& w) {
    return detail::strip_params(spec.param_system, spec.layout.total(),
                                detail::layout_names(spec.layout), w);
}

inline CriticalReport wfs_lower_bound(const PolySystem& base, const FeatureOptions& opt = {},
                                      std::vector<BottleneckTable>* tables = nullptr,
                                      std::optional<double> reach_exact = std::nullopt) {
    CriticalReport rep;
    rep.quantity = Quantity::wfs;
    const int max_order = opt.max_order > 0 ? opt.max_order : base.nvars + 1;
    if (max_order < base.nvars + 1)
        rep.caveats.push_back("orders above " + std::to_string(max_order) +
                              " were not searched; the bound may miss features");

    for (int k = 2; k <= max_order; ++k) {
        CorrespondenceSpec spec = build_bottleneck_system(base, k, opt.tracker.seed);
        EndpointSet es = solve_correspondence(spec, opt.tracker);
        BottleneckTable table = classify_bottlenecks(spec, es, opt);
        rep.paths_tracked += table.paths_tracked;
        rep.distinct_count += table.distinct_solutions;
        rep.filtered_count += table.filtered;
        int complex_values = 0;
        for (const auto& o : table.orbits) {
            if (std::isnan(o.value)) {
                if (std::abs(o.raw.imag()) > opt.real_tol * (1.0 + std::abs(o.raw)))
                    ++complex_values;
                continue;
            }
            CriticalRecord rec;
            rec.value = o.value;
            rec.raw = o.raw;
            rec.witness = o.rep;
            for (int i = 0; i < k; ++i) rec.feet.push_back(foot_of(spec, o.rep, i));
            rec.center = center_of(spec, o.rep);
            rec.order = k;
            rec.multiplicity = o.members;
            rec.real_witness = static_cast<int>(o.tier) >= 2;
            rec.singular = o.singular;
            rec.note = to_string(o.tier);
            rep.records.push_back(std::move(rec));
        }
        if (complex_values > 0)
            rep.caveats.push_back("order " + std::to_string(k) + ": " +
                                  std::to_string(complex_values) +
                                  " nonreal critical values excluded from the bound");
        if (tables) tables->push_back(std::move(table));

        // wfs is squeezed between the reach and the smallest witnessed
        // bottleneck value, so once the order-2 value meets the reach no
        // higher order can undercut it
        if (k == 2 && reach_exact && k < max_order) {
            CriticalReport probe = rep;
            detail::finish_report(probe, opt, /*require_geometric=*/true);
            if (probe.exact_value && std::abs(*probe.exact_value - *reach_exact) <=
                                         opt.value_rel_tol * (1.0 + *reach_exact)) {
                rep.caveats.push_back(
                    "orders above 2 skipped: the order-2 value already attains the reach");
                break;
            }
        }
    }
    detail::finish_report(rep, opt, /*require_geometric=*/true);
    return rep;
}

// Carry the order-k bottlenecks of `from` onto `to` along the straight
// coefficient segment (rank rows are polynomial in the base coefficients, so
// the segment stays inside the family). Symmetric target instances often have
// start counts far above their root counts, or solutions that are limits of
// merging orbits; continuation from a nearby generic instance reaches those
// endpoints at the cost of the generic solve only.
inline BottleneckTable continue_bottlenecks(const PolySystem& from, const PolySystem& to, int k,
                                            const FeatureOptions& opt = {},
                                            EndpointSet* endpoints = nullptr) {
    CorrespondenceSpec spec = build_bottleneck_blend(from, to, k, opt.tracker.seed);
    const int N = spec.layout.total();
    TrackerOptions topt = with_junk(spec, opt.tracker);

    PolySystem at_from = detail::strip_params(spec.param_system, N,
                                              detail::layout_names(spec.layout), {Complex(1.0)});
    ProductStructure ps = infer_product_structure(at_from);
    EndpointSet es_from = solve_linear_product(at_from, topt, &ps);
    std::vector<ComplexPoint> starts;
    for (const auto& e : es_from.endpoints)
        if (e.status == PathStatus::success) starts.push_back(e.point);

    EndpointSet es = parameter_track(spec.param_system, 1, ComplexPoint{Complex(1.0)},
                                     ComplexPoint{Complex(0.0)}, starts, topt);
    spec.system = detail::strip_params(spec.param_system, N,
                                       detail::layout_names(spec.layout), {Complex(0.0)});
    BottleneckTable table = classify_bottlenecks(spec, es, opt);
    table.notes.push_back("continued from a nearby instance (" + std::to_string(starts.size()) +
                          " start solutions)");
    if (endpoints) *endpoints = std::move(es);
    return table;
}

struct FeatureSizeBundle {
    CriticalReport reach;
    CriticalReport wfs;
    std::vector<BottleneckTable> tables;
};

// reach and wfs in one pass; the reach's exact value, when attained, lets the
// bottleneck ladder stop at order 2
inline FeatureSizeBundle feature_sizes(const PolySystem& base, const FeatureOptions& opt = {}) {
    FeatureSizeBundle out;
    out.reach = reach_lower_bound(base, opt);
    out.wfs = wfs_lower_bound(base, opt, &out.tables, out.reach.exact_value);
    return out;
}

}  // namespace featsize
