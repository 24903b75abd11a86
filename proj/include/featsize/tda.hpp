#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "featsize/common.hpp"

namespace featsize {

inline constexpr double kInfDeath = std::numeric_limits<double>::infinity();
inline constexpr std::size_t kSimplexGuard = 50'000'000;

struct Simplex {
    std::vector<int> verts;  // ascending vertex ids
    double value = 0.0;
    int dim() const { return static_cast<int>(verts.size()) - 1; }
};

struct FilteredComplex {
    int npoints = 0;
    int max_dim = 0;
    std::vector<Simplex> simplices;  // sorted by (value, dim, lex)
    std::vector<std::string> warnings;
};

// Filtered flag complex of a symmetric dissimilarity matrix: a simplex enters
// at its largest pairwise entry. This is the common core of the plain and the
// adaptive Vietoris-Rips constructions and doubles as the distance-matrix
// input mode.
inline FilteredComplex filtration_from_distances(const std::vector<std::vector<double>>& dist,
                                                 int max_dim, double threshold,
                                                 std::size_t guard = kSimplexGuard) {
    const int n = static_cast<int>(dist.size());
    if (max_dim < 0) throw std::invalid_argument("filtration: max_dim must be >= 0");
    if (!(threshold > 0)) throw std::invalid_argument("filtration: threshold must be positive");
    for (const auto& row : dist)
        if (static_cast<int>(row.size()) != n)
            throw std::invalid_argument("filtration: distance matrix must be square");

    FilteredComplex fc;
    fc.npoints = n;
    fc.max_dim = max_dim;

    // coincident points collapse onto the earlier index
    std::vector<char> alive(n, 1);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < j && alive[j]; ++i)
            if (alive[i] && dist[i][j] <= 0.0) {
                alive[j] = 0;
                fc.warnings.push_back("point " + std::to_string(j) + " coincides with point " +
                                      std::to_string(i) + " and was collapsed");
            }

    auto check_guard = [&](std::size_t count) {
        if (count > guard)
            throw std::runtime_error("filtration: simplex count exceeds the memory guard (" +
                                     std::to_string(guard) + ")");
    };

    for (int i = 0; i < n; ++i)
        if (alive[i]) fc.simplices.push_back({{i}, 0.0});

    if (max_dim >= 1) {
        std::vector<std::vector<int>> nbr(n);  // j > i with d(i,j) <= threshold
        for (int i = 0; i < n; ++i) {
            if (!alive[i]) continue;
            for (int j = i + 1; j < n; ++j)
                if (alive[j] && dist[i][j] <= threshold) {
                    nbr[i].push_back(j);
                    fc.simplices.push_back({{i, j}, dist[i][j]});
                    check_guard(fc.simplices.size());
                }
        }
        // incremental expansion: extend each simplex by common upper neighbors
        std::size_t dim_begin = 0;
        while (dim_begin < fc.simplices.size() && fc.simplices[dim_begin].dim() == 0) ++dim_begin;
        for (int d = 2; d <= max_dim; ++d) {
            std::size_t dim_end = fc.simplices.size();
            for (std::size_t s = dim_begin; s < dim_end; ++s) {
                if (fc.simplices[s].dim() != d - 1) continue;
                const Simplex base = fc.simplices[s];  // copy: push_back reallocates
                // candidates: upper neighbors of the last vertex adjacent to all
                for (int u : nbr[base.verts.back()]) {
                    double val = base.value;
                    bool ok = true;
                    for (int w : base.verts) {
                        if (w == base.verts.back()) continue;
                        const auto& lw = nbr[w];
                        if (!std::binary_search(lw.begin(), lw.end(), u)) {
                            ok = false;
                            break;
                        }
                        val = std::max(val, dist[w][u]);
                    }
                    if (!ok) continue;
                    val = std::max(val, dist[base.verts.back()][u]);
                    Simplex ext = base;
                    ext.verts.push_back(u);
                    ext.value = val;
                    fc.simplices.push_back(std::move(ext));
                    check_guard(fc.simplices.size());
                }
            }
            dim_begin = dim_end;
        }
    }

    std::sort(fc.simplices.begin(), fc.simplices.end(), [](const Simplex& a, const Simplex& b) {
        if (a.value != b.value) return a.value < b.value;
        if (a.verts.size() != b.verts.size()) return a.verts.size() < b.verts.size();
        return a.verts < b.verts;
    });
    return fc;
}

inline std::vector<std::vector<double>> pairwise_distances(const std::vector<RealPoint>& pts) {
    const int n = static_cast<int>(pts.size());
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double s = 0;
            for (std::size_t a = 0; a < pts[i].size(); ++a) {
                double t = pts[i][a] - pts[j][a];
                s += t * t;
            }
            d[i][j] = d[j][i] = std::sqrt(s);
        }
    return d;
}

inline FilteredComplex vr_filtration(const std::vector<RealPoint>& pts, int max_dim,
                                     double threshold, std::size_t guard = kSimplexGuard) {
    return filtration_from_distances(pairwise_distances(pts), max_dim, threshold, guard);
}

// Vietoris-Rips under the radius-rescaled diameter |p-q| / (r(p)+r(q)).
// With r constant 1/2 this reproduces vr_filtration exactly.
inline FilteredComplex adaptive_vr_filtration(const std::vector<RealPoint>& pts,
                                              const std::vector<double>& r, int max_dim,
                                              double threshold,
                                              std::size_t guard = kSimplexGuard) {
    if (r.size() != pts.size())
        throw std::invalid_argument("adaptive_vr_filtration: one radius per point required");
    for (double ri : r)
        if (!(ri > 0)) throw std::invalid_argument("adaptive_vr_filtration: radii must be positive");
    auto d = pairwise_distances(pts);
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < pts.size(); ++j)
            if (i != j) d[i][j] /= r[i] + r[j];
    return filtration_from_distances(d, max_dim, threshold, guard);
}

struct DiagramPoint {
    double birth = 0.0;
    double death = kInfDeath;
};

struct PersistenceDiagram {
    std::vector<std::vector<DiagramPoint>> by_degree;

    const std::vector<DiagramPoint>& at(int degree) const {
        static const std::vector<DiagramPoint> empty;
        if (degree < 0 || degree >= static_cast<int>(by_degree.size())) return empty;
        return by_degree[degree];
    }
    std::size_t total_points() const {
        std::size_t s = 0;
        for (const auto& d : by_degree) s += d.size();
        return s;
    }
};

// Boundary-matrix reduction over F2 with the clearing optimization: dimensions
// are processed top-down, and every pivot row found in dimension d+1 marks a
// column of dimension d as a known cycle that needs no reduction of its own.
inline PersistenceDiagram persistence(const FilteredComplex& fc) {
    const std::size_t m = fc.simplices.size();
    std::map<std::vector<int>, int> position;
    for (std::size_t s = 0; s < m; ++s) position[fc.simplices[s].verts] = static_cast<int>(s);

    std::vector<char> cleared(m, 0);   // known creators, paired as a pivot row above
    std::vector<char> creator(m, 0);
    std::vector<int> killer(m, -1);    // destroyer column for each pivot row
    std::vector<int> pivot_owner(m, -1);
    std::vector<std::vector<int>> stored(m);  // reduced destroyer columns, by pivot

    auto sym_diff = [](const std::vector<int>& a, const std::vector<int>& b) {
        std::vector<int> out;
        out.reserve(a.size() + b.size());
        std::size_t i = 0, j = 0;
        while (i < a.size() && j < b.size()) {
            if (a[i] < b[j]) out.push_back(a[i++]);
            else if (b[j] < a[i]) out.push_back(b[j++]);
            else { ++i; ++j; }
        }
        while (i < a.size()) out.push_back(a[i++]);
        while (j < b.size()) out.push_back(b[j++]);
        return out;
    };

    for (int d = fc.max_dim; d >= 1; --d) {
        for (std::size_t s = 0; s < m; ++s) {
            if (fc.simplices[s].dim() != d) continue;
            if (cleared[s]) {
                creator[s] = 1;
                continue;
            }
            std::vector<int> col;
            std::vector<int> face = fc.simplices[s].verts;
            for (std::size_t drop = 0; drop < face.size(); ++drop) {
                std::vector<int> f;
                for (std::size_t t = 0; t < face.size(); ++t)
                    if (t != drop) f.push_back(face[t]);
                col.push_back(position.at(f));
            }
            std::sort(col.begin(), col.end());
            while (!col.empty() && pivot_owner[col.back()] >= 0)
                col = sym_diff(col, stored[col.back()]);
            if (col.empty()) {
                creator[s] = 1;
            } else {
                int low = col.back();
                pivot_owner[low] = static_cast<int>(s);
                stored[low] = std::move(col);
                killer[low] = static_cast<int>(s);
                cleared[low] = 1;
            }
        }
    }
    for (std::size_t s = 0; s < m; ++s)
        if (fc.simplices[s].dim() == 0) creator[s] = 1;

    PersistenceDiagram out;
    out.by_degree.assign(fc.max_dim + 1, {});
    for (std::size_t s = 0; s < m; ++s) {
        if (!creator[s]) continue;
        int deg = fc.simplices[s].dim();
        double birth = fc.simplices[s].value;
        if (killer[s] >= 0) {
            double death = fc.simplices[killer[s]].value;
            if (death > birth) out.by_degree[deg].push_back({birth, death});
        } else {
            out.by_degree[deg].push_back({birth, kInfDeath});
        }
    }
    for (auto& pts : out.by_degree)
        std::sort(pts.begin(), pts.end(), [](const DiagramPoint& a, const DiagramPoint& b) {
            if (a.birth != b.birth) return a.birth < b.birth;
            return a.death < b.death;
        });
    return out;
}

// rank of the map H(R(a) <= R(b)): classes born by a and still alive after b
inline int rank_at(const PersistenceDiagram& dgm, int degree, double a, double b) {
    if (!(a < b)) throw std::invalid_argument("rank_at: need a < b");
    int count = 0;
    for (const auto& p : dgm.at(degree))
        if (p.birth <= a && p.death > b) ++count;
    return count;
}

struct InferenceParams {
    double a = 0.0;
    double b = 0.0;
    double delta_prime = 0.0;
    double validity_threshold = 0.0;  // inference is valid when this is < wfs
};

inline InferenceParams inference_params(int n, double delta, double epsilon) {
    if (delta > epsilon) throw std::invalid_argument("inference_params: need delta <= epsilon");
    double A = std::sqrt(2.0 * n / (n + 1.0));
    InferenceParams p;
    p.a = 2.0 * epsilon;
    p.b = 2.0 * (2.0 * epsilon * A + delta);
    p.delta_prime = 2.0 * epsilon * (A * A - 1.0) + delta * A;
    p.validity_threshold = 2.0 * (epsilon + p.delta_prime);
    return p;
}

// Betti number from one filtration: the rank of degree-ell homology between
// the two Rips scales dictated by the sample contract. The weak-feature-size
// precondition is checked when a value is supplied; violation only warns, the
// rank is still returned.
inline int infer_betti(const std::vector<RealPoint>& pts, int n, double delta, double epsilon,
                       int ell, std::optional<double> wfs_value = std::nullopt,
                       std::string* warning = nullptr) {
    InferenceParams p = inference_params(n, delta, epsilon);
    if (wfs_value && !(p.validity_threshold < *wfs_value) && warning)
        *warning = "inference precondition violated: 2(epsilon + delta') = " +
                   format_double(p.validity_threshold) + " is not below the weak feature size " +
                   format_double(*wfs_value);
    FilteredComplex fc = vr_filtration(pts, ell + 1, p.b);
    PersistenceDiagram dgm = persistence(fc);
    return rank_at(dgm, ell, p.a, p.b);
}

struct AdaptiveParams {
    double alpha_prime = 0.0;
    double beta_prime = 0.0;
    double M_K = 0.0;
    double M_K_hat = 0.0;
    double rips_lo = 0.0;   // lower Rips scale M_K * a
    double rips_hi = 0.0;   // upper Rips scale 2 M_K^2 M_K_hat * a
    bool order_check = false;      // 4 (M_K M_K_hat)^2 a < 1/3 - delta_R
    std::string retract_check = "external";  // deformation-retract inequality not evaluated here
};

// Scale bookkeeping for inference on adaptive complexes built from an
// estimated local-feature-size field: estimation error E_lfs, reach proxy R,
// minimum estimated value R_hat, and the sample/subsample budgets mu, lambda.
inline AdaptiveParams adaptive_inference_params(double mu, double lambda, double delta_R,
                                                double E_lfs, double R, double R_hat, double a) {
    if (!(R > 0) || !(R_hat > 0)) throw std::invalid_argument("adaptive_inference_params: R, R_hat must be positive");
    AdaptiveParams p;
    p.beta_prime = mu + 3.0 * delta_R + lambda * (1.0 + delta_R);
    p.alpha_prime = p.beta_prime > 0 ? delta_R / p.beta_prime : 0.0;
    p.M_K = E_lfs / R + delta_R + 1.0;
    p.M_K_hat = E_lfs / (R_hat * (1.0 - delta_R)) + 1.0 / (1.0 - delta_R);
    p.rips_lo = p.M_K * a;
    p.rips_hi = 2.0 * p.M_K * p.M_K * p.M_K_hat * a;
    p.order_check = 4.0 * (p.M_K * p.M_K_hat) * (p.M_K * p.M_K_hat) * a < 1.0 / 3.0 - delta_R;
    return p;
}

// Greedy sparsification: repeatedly accept the pending point with the largest
// deletion radius (ties to the lower index) and delete everything it covers.
// Returns accepted indices in acceptance order.
inline std::vector<int> subsample(const std::vector<RealPoint>& pts, const std::vector<double>& s) {
    if (s.size() != pts.size())
        throw std::invalid_argument("subsample: one radius per point required");
    const int n = static_cast<int>(pts.size());
    std::vector<char> pending(n, 1);
    std::vector<int> out;
    for (;;) {
        int pick = -1;
        for (int i = 0; i < n; ++i)
            if (pending[i] && (pick < 0 || s[i] > s[pick])) pick = i;
        if (pick < 0) break;
        pending[pick] = 0;
        out.push_back(pick);
        double r = s[pick];
        for (int j = 0; j < n; ++j) {
            if (!pending[j]) continue;
            double d2 = 0;
            for (std::size_t a = 0; a < pts[pick].size(); ++a) {
                double t = pts[pick][a] - pts[j][a];
                d2 += t * t;
            }
            if (d2 <= r * r) pending[j] = 0;
        }
    }
    return out;
}

namespace detail {

// orthonormal basis of the hyperplane orthogonal to v (2-D and 3-D)
inline std::vector<RealPoint> perp_basis(const RealPoint& v) {
    std::vector<RealPoint> out;
    if (v.size() == 2) {
        double len = std::hypot(v[0], v[1]);
        if (len > 0) out.push_back({-v[1] / len, v[0] / len});
    } else if (v.size() == 3) {
        double len = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        if (len > 0) {
            RealPoint w = {v[0] / len, v[1] / len, v[2] / len};
            int axis = std::abs(w[0]) <= std::abs(w[1])
                           ? (std::abs(w[0]) <= std::abs(w[2]) ? 0 : 2)
                           : (std::abs(w[1]) <= std::abs(w[2]) ? 1 : 2);
            RealPoint e(3, 0.0);
            e[axis] = 1.0;
            RealPoint u1 = {w[1] * e[2] - w[2] * e[1], w[2] * e[0] - w[0] * e[2],
                            w[0] * e[1] - w[1] * e[0]};
            double l1 = std::sqrt(u1[0] * u1[0] + u1[1] * u1[1] + u1[2] * u1[2]);
            for (auto& c : u1) c /= l1;
            out.push_back(u1);
            out.push_back({w[1] * u1[2] - w[2] * u1[1], w[2] * u1[0] - w[0] * u1[2],
                           w[0] * u1[1] - w[1] * u1[0]});
        }
    }
    return out;
}

}  // namespace detail

// Medial-axis proxy built from pair midpoints. m = (p+q)/2 is retained when
//   1. the ball spanned by p and q contains no third point, and
//   2. that empty ball is locally maximal: recentering by its own radius in
//      any direction orthogonal to pq runs into the sample again (a midpoint
//      whose ball can grow sideways hugs the shape instead of its axis).
// This keeps centers of wide-aperture maximal empty balls, an effective
// stand-in for the exact angle-based lean-set construction, and is isolated
// here so a faithful implementation can replace it.
inline std::vector<RealPoint> lean_set(const std::vector<RealPoint>& pts) {
    const int n = static_cast<int>(pts.size());
    if (n < 2) throw std::invalid_argument("lean_set: need at least 2 points");
    const std::size_t dim = pts[0].size();
    const double grow_factor = 1.3;  // between 1 and sqrt(2), the touching-pair distance
    std::vector<RealPoint> out;
    RealPoint mid(dim), chord(dim), probe(dim);
    auto min_dist2 = [&](const RealPoint& c) {
        double best = std::numeric_limits<double>::infinity();
        for (int k = 0; k < n; ++k) {
            double d2 = 0;
            for (std::size_t a = 0; a < dim; ++a) {
                double t = pts[k][a] - c[a];
                d2 += t * t;
            }
            best = std::min(best, d2);
        }
        return best;
    };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double r2 = 0;
            for (std::size_t a = 0; a < dim; ++a) {
                mid[a] = 0.5 * (pts[i][a] + pts[j][a]);
                chord[a] = pts[i][a] - pts[j][a];
                double t = chord[a];
                r2 += t * t;
            }
            r2 *= 0.25;  // (|p-q|/2)^2
            if (r2 <= 0) continue;
            bool blocked = false;
            for (int k = 0; k < n && !blocked; ++k) {
                if (k == i || k == j) continue;
                double d2 = 0;
                for (std::size_t a = 0; a < dim; ++a) {
                    double t = pts[k][a] - mid[a];
                    d2 += t * t;
                }
                blocked = d2 < r2 * (1.0 - 1e-12);
            }
            if (blocked) continue;
            double r = std::sqrt(r2);
            bool grows = false;
            for (const RealPoint& u : detail::perp_basis(chord)) {
                for (double sign : {1.0, -1.0}) {
                    for (std::size_t a = 0; a < dim; ++a) probe[a] = mid[a] + sign * r * u[a];
                    if (min_dist2(probe) > grow_factor * grow_factor * r2) {
                        grows = true;
                        break;
                    }
                }
                if (grows) break;
            }
            if (!grows) out.push_back(mid);
        }
    return out;
}

inline double distance_to_set(const std::vector<RealPoint>& set, const RealPoint& q) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : set) {
        double d2 = 0;
        for (std::size_t a = 0; a < q.size(); ++a) {
            double t = p[a] - q[a];
            d2 += t * t;
        }
        best = std::min(best, d2);
    }
    return std::sqrt(best);
}

inline double lean_distance(const std::vector<RealPoint>& pts, const RealPoint& query) {
    return distance_to_set(lean_set(pts), query);
}

enum class SubsampleKind { uniform, lfs, lean };

inline std::string to_string(SubsampleKind k) {
    switch (k) {
        case SubsampleKind::uniform: return "uniform";
        case SubsampleKind::lfs: return "lfs";
        case SubsampleKind::lean: return "lean";
    }
    return "?";
}

struct RipsScales {
    double a = 0.0;
    double b = 0.0;
};

// Rips interval for Betti inference after sparsification with budget lambda on
// top of a sample at density mu * T. Uniform deletion keeps absolute scales:
// births read at the base density, deaths at the thinned density. The adaptive
// kinds build lfs-normalized complexes, so their scales are relative and carry
// no factor of T.
inline RipsScales subsample_rips_scales(SubsampleKind kind, int n, double mu, double lambda,
                                        double T, double delta = 0.0) {
    if (kind == SubsampleKind::uniform) {
        RipsScales s;
        s.a = inference_params(n, delta, mu * T).a;
        s.b = inference_params(n, delta, (mu + lambda) * T).b;
        return s;
    }
    return {2.0 * mu + lambda, 12.0 * lambda};
}

// One member of a subsampling family: evaluates the deletion-radius function
// s_lambda over a sample. uniform carries a constant, lfs a per-point field
// aligned with the sample, lean a precomputed midpoint set.
struct SubsampleFunction {
    SubsampleKind kind = SubsampleKind::uniform;
    double lambda = 0.0;
    double omega = 0.0;
    std::vector<double> field;        // lfs kind
    std::vector<RealPoint> lean_pts;  // lean kind

    std::vector<double> values(const std::vector<RealPoint>& pts) const {
        std::vector<double> s(pts.size(), 0.0);
        switch (kind) {
            case SubsampleKind::uniform:
                for (auto& v : s) v = lambda * omega;
                break;
            case SubsampleKind::lfs:
                if (field.size() != pts.size())
                    throw std::invalid_argument("subsample function: field size mismatch");
                for (std::size_t i = 0; i < s.size(); ++i) s[i] = lambda * field[i];
                break;
            case SubsampleKind::lean:
                for (std::size_t i = 0; i < s.size(); ++i)
                    s[i] = lambda * distance_to_set(lean_pts, pts[i]);
                break;
        }
        return s;
    }
};

inline SubsampleFunction make_subsample_function(SubsampleKind kind, double lambda, double omega) {
    if (kind != SubsampleKind::uniform)
        throw std::invalid_argument("make_subsample_function: scalar payload is for the uniform kind");
    if (omega < 0) throw std::invalid_argument("make_subsample_function: omega must be nonnegative");
    SubsampleFunction f;
    f.kind = kind;
    f.lambda = lambda;
    f.omega = omega;
    return f;
}

inline SubsampleFunction make_subsample_function(SubsampleKind kind, double lambda,
                                                 std::vector<double> field) {
    if (kind != SubsampleKind::lfs)
        throw std::invalid_argument("make_subsample_function: per-point payload is for the lfs kind");
    for (double v : field)
        if (v < 0) throw std::invalid_argument("make_subsample_function: negative field value");
    SubsampleFunction f;
    f.kind = kind;
    f.lambda = lambda;
    f.field = std::move(field);
    return f;
}

inline SubsampleFunction make_subsample_function(SubsampleKind kind, double lambda,
                                                 std::vector<RealPoint> lean_pts) {
    if (kind != SubsampleKind::lean)
        throw std::invalid_argument("make_subsample_function: point-set payload is for the lean kind");
    SubsampleFunction f;
    f.kind = kind;
    f.lambda = lambda;
    f.lean_pts = std::move(lean_pts);
    return f;
}

namespace detail {

// exact min-cost perfect matching on a square cost matrix (Hungarian method
// with potentials, O(n^3))
inline double hungarian(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    if (n == 0) return 0.0;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = -1;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    double total = 0.0;
    for (int j = 1; j <= n; ++j) total += cost[p[j] - 1][j - 1];
    return total;
}

}  // namespace detail

// 2-Wasserstein distance between diagrams in one degree: optimal assignment
// with diagonal augmentation, squared Euclidean ground cost. Points at
// infinity match only each other (by sorted birth); a count mismatch makes
// the distance infinite.
inline double wasserstein2(const PersistenceDiagram& d1, const PersistenceDiagram& d2, int degree) {
    std::vector<DiagramPoint> f1, f2;
    std::vector<double> inf1, inf2;
    for (const auto& p : d1.at(degree)) {
        if (std::isinf(p.death)) inf1.push_back(p.birth);
        else f1.push_back(p);
    }
    for (const auto& p : d2.at(degree)) {
        if (std::isinf(p.death)) inf2.push_back(p.birth);
        else f2.push_back(p);
    }

    if (inf1.size() != inf2.size()) return std::numeric_limits<double>::infinity();
    double total = 0.0;
    std::sort(inf1.begin(), inf1.end());
    std::sort(inf2.begin(), inf2.end());
    for (std::size_t i = 0; i < inf1.size(); ++i) {
        double d = inf1[i] - inf2[i];
        total += d * d;
    }

    const int n1 = static_cast<int>(f1.size()), n2 = static_cast<int>(f2.size());
    const int n = n1 + n2;
    if (n > 1000)
        throw std::invalid_argument("wasserstein2: exact assignment limited to 500 points per diagram");
    if (n > 0) {
        auto diag_cost = [](const DiagramPoint& p) {
            double t = (p.death - p.birth);
            return t * t / 2.0;  // squared distance to the diagonal
        };
        std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
        for (int i = 0; i < n1; ++i)
            for (int j = 0; j < n2; ++j) {
                double db = f1[i].birth - f2[j].birth;
                double dd = f1[i].death - f2[j].death;
                cost[i][j] = db * db + dd * dd;
            }
        for (int i = 0; i < n1; ++i)
            for (int j = n2; j < n; ++j) cost[i][j] = diag_cost(f1[i]);
        for (int i = n1; i < n; ++i)
            for (int j = 0; j < n2; ++j) cost[i][j] = diag_cost(f2[j]);
        // diagonal-to-diagonal entries stay 0
        total += detail::hungarian(cost);
    }
    return std::sqrt(total);
}

// Truncate essential classes at the filtration build scale so lifetimes and
// distances stay finite and diagrams built to the same threshold compare.
inline PersistenceDiagram cap_deaths(const PersistenceDiagram& dgm, double cap) {
    PersistenceDiagram out = dgm;
    for (auto& pts : out.by_degree) {
        for (auto& p : pts) p.death = std::min(p.death, cap);
        pts.erase(std::remove_if(pts.begin(), pts.end(),
                                 [](const DiagramPoint& p) { return !(p.death > p.birth); }),
                  pts.end());
    }
    return out;
}

struct ScoreRow {
    double lambda = 0.0;
    std::size_t cost = 0;                 // points kept at this level
    std::optional<double> inference;      // persistence-gap ratio against lambda = 0
    std::optional<double> wasserstein;    // W2 distance ratio against the empty diagram
};

// Persistence gap: largest minus second largest lifetime in one degree.
inline double persistence_gap(const PersistenceDiagram& dgm, int degree) {
    double p1 = 0.0, p2 = 0.0;
    for (const auto& p : dgm.at(degree)) {
        double life = std::isinf(p.death) ? std::numeric_limits<double>::infinity() : p.death - p.birth;
        if (life > p1) {
            p2 = p1;
            p1 = life;
        } else if (life > p2) {
            p2 = life;
        }
    }
    if (std::isinf(p1)) return p1;
    return p1 - p2;
}

// Scores of a sparsification sweep. The entry at lambda = 0 is the baseline:
// inference scores divide its persistence gap, Wasserstein scores divide the
// distance from its diagram to the empty diagram.
inline std::vector<ScoreRow> scores(const std::vector<double>& lambdas,
                                    const std::vector<PersistenceDiagram>& diagrams,
                                    const std::vector<std::size_t>& sizes, int degree = 1) {
    if (lambdas.size() != diagrams.size() || lambdas.size() != sizes.size())
        throw std::invalid_argument("scores: series lengths differ");
    if (lambdas.empty() || lambdas[0] != 0.0)
        throw std::invalid_argument("scores: the lambda = 0 baseline must come first");

    double gap0 = persistence_gap(diagrams[0], degree);
    PersistenceDiagram empty;
    double w0 = wasserstein2(diagrams[0], empty, degree);

    std::vector<ScoreRow> out;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        ScoreRow row;
        row.lambda = lambdas[i];
        row.cost = sizes[i];
        if (gap0 > 0 && std::isfinite(gap0))
            row.inference = persistence_gap(diagrams[i], degree) / gap0;
        if (w0 > 0 && std::isfinite(w0))
            row.wasserstein = wasserstein2(diagrams[0], diagrams[i], degree) / w0;
        out.push_back(row);
    }
    return out;
}

}  // namespace featsize
