#pragma once

#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "featsize/linear_product.hpp"
#include "featsize/poly.hpp"

namespace featsize {

enum class Quantity { medial, reach, lfs, wfs, focal };

inline const char* to_string(Quantity q) {
    switch (q) {
        case Quantity::medial: return "medial";
        case Quantity::reach: return "reach";
        case Quantity::lfs: return "lfs";
        case Quantity::focal: return "focal";
        default: return "wfs";
    }
}

// Index map into the correspondence ring. Medial/reach/lfs systems use copies
// x1,x2 and an explicit center z; normality of z - x_i is written as a rank
// condition on [z - x_i; JF(x_i)] (the det layouts), so no multipliers appear
// and feet with a degenerate Jacobian stay in play. The reach/lfs variants
// append the critical block (d0, d1) that witnesses a rank drop of the
// distance objective along the correspondence variety. Order-k systems use
// copies x1..xk: order 2 eliminates z as the midpoint, order n+1 keeps z
// explicit (both det), and intermediate orders use multipliers l1..lk with
// hull weights t1..tk and z = sum_i t_i x_i. Focal systems use a single copy
// x with center z plus a degeneracy direction (v, m) of the normal
// exponential map.
struct VariableLayout {
    int n = 0;  // ambient dimension
    int c = 0;  // number of equations cutting X
    int k = 2;  // number of correspondence copies
    bool has_z = false;
    bool has_delta = false;
    bool focal = false;
    bool det = false;  // normality written as rank conditions; no multiplier variables

    int x_begin(int i) const { return i * n; }
    int z_begin() const { return k * n; }
    int lambda_begin(int i) const { return k * n + (has_z ? n : 0) + i * c; }
    int t_begin() const { return k * n + k * c; }
    int v_begin() const { return 2 * n + c; }
    int mu_begin() const { return 3 * n + c; }
    int delta_begin() const { return det ? 3 * n : 3 * n + 2 * c; }
    int delta_len() const { return det ? 2 * n + 2 : 2 * n + 2 * c + 2; }  // d0 + one d1 per row
    int total() const {
        int base;
        if (focal)
            base = 3 * n + 2 * c;
        else if (det)
            base = k * n + (has_z ? n : 0);
        else
            base = k * n + (has_z ? n : 0) + k * c + (has_z ? 0 : k);
        return base + (has_delta ? delta_len() : 0);
    }
};

struct CorrespondenceSpec {
    Quantity kind = Quantity::medial;
    PolySystem base;    // F
    PolySystem system;  // correspondence system (square except for medial)
    VariableLayout layout;
    ProductStructure structure;  // start structure for the solver
    ComplexPoint patch;          // random coefficients of the projective patch row
    ComplexPoint dir_patch;      // focal only: patch on the degeneracy direction (v, m)
    RealPoint w;                 // lfs query point
    PolySystem param_system;     // lfs only: w kept symbolic as trailing parameters
    int nparams = 0;
    bool det_combos = false;     // rank rows are random combinations of the maximal minors
    std::function<bool(const Complex*)> junk;  // early tracker exit on the degenerate locus
};

namespace detail {

inline std::vector<std::string> layout_names(const VariableLayout& L) {
    std::vector<std::string> names;
    if (L.focal) {
        for (int a = 0; a < L.n; ++a) names.push_back("x_" + std::to_string(a + 1));
        for (int a = 0; a < L.n; ++a) names.push_back("z_" + std::to_string(a + 1));
        for (int m = 0; m < L.c; ++m) names.push_back("l_" + std::to_string(m + 1));
        for (int a = 0; a < L.n; ++a) names.push_back("v_" + std::to_string(a + 1));
        for (int m = 0; m < L.c; ++m) names.push_back("m_" + std::to_string(m + 1));
    } else {
        for (int i = 0; i < L.k; ++i)
            for (int a = 0; a < L.n; ++a)
                names.push_back("x" + std::to_string(i + 1) + "_" + std::to_string(a + 1));
        if (L.has_z)
            for (int a = 0; a < L.n; ++a) names.push_back("z_" + std::to_string(a + 1));
        if (!L.det) {
            for (int i = 0; i < L.k; ++i)
                for (int m = 0; m < L.c; ++m)
                    names.push_back("l" + std::to_string(i + 1) + "_" + std::to_string(m + 1));
            if (!L.has_z)
                for (int i = 0; i < L.k; ++i) names.push_back("t" + std::to_string(i + 1));
        }
    }
    if (L.has_delta) {
        names.push_back("d0");
        for (int j = 1; j < L.delta_len(); ++j) names.push_back("d1_" + std::to_string(j));
    }
    return names;
}

// F and its Jacobian embedded at the i-th copy block of an N-variable ring
struct EmbeddedCopy {
    std::vector<Polynomial> F;                    // c polys
    std::vector<std::vector<Polynomial>> dF;      // c x n gradient entries
};

inline EmbeddedCopy embed_copy(const PolySystem& base, int N, int x_begin) {
    EmbeddedCopy out;
    std::vector<int> map(base.nvars);
    for (int a = 0; a < base.nvars; ++a) map[a] = x_begin + a;
    for (const auto& f : base.polys) {
        out.F.push_back(f.embedded(N, map));
        std::vector<Polynomial> grad;
        for (int a = 0; a < base.nvars; ++a) grad.push_back(f.derivative(a).embedded(N, map));
        out.dF.push_back(std::move(grad));
    }
    return out;
}

// determinant of a square slice of a polynomial matrix, Laplace expansion
// along the first listed row (the matrices here are at most (c+1) x (c+1))
inline Polynomial poly_minor(const std::vector<std::vector<Polynomial>>& M,
                             const std::vector<int>& rows, const std::vector<int>& cols, int N) {
    if (rows.size() == 1) return M[rows[0]][cols[0]];
    std::vector<int> sub_rows(rows.begin() + 1, rows.end());
    Polynomial out(N);
    double sgn = 1.0;
    for (std::size_t j = 0; j < cols.size(); ++j) {
        std::vector<int> sub_cols;
        for (std::size_t l = 0; l < cols.size(); ++l)
            if (l != j) sub_cols.push_back(cols[l]);
        Polynomial term = M[rows[0]][cols[j]] * poly_minor(M, sub_rows, sub_cols, N);
        if (sgn > 0.0)
            out += term;
        else
            out -= term;
        sgn = -sgn;
    }
    out.normalize();
    return out;
}

// Rows cutting rank [diff; J] <= c, i.e. diff in the row span of the c x n
// Jacobian: all (c+1)-minors vanish. A single minor suffices when c = n - 1;
// otherwise the rank locus has codimension n - c inside the C(n, c+1) minors
// and generic combinations of them cut it properly (spurious zeros of the
// combinations are removed later by an explicit rank test on the endpoints).
inline std::vector<Polynomial> rank_rows(const std::vector<Polynomial>& diff,
                                         const std::vector<std::vector<Polynomial>>& J, int N,
                                         Rng& rng, bool& used_combos) {
    const int n = static_cast<int>(diff.size());
    const int c = static_cast<int>(J.size());
    std::vector<std::vector<Polynomial>> M;
    M.push_back(diff);
    for (const auto& row : J) M.push_back(row);
    std::vector<int> all_rows(c + 1);
    std::iota(all_rows.begin(), all_rows.end(), 0);

    std::vector<Polynomial> minors;
    std::vector<int> cols(c + 1);
    std::iota(cols.begin(), cols.end(), 0);
    while (true) {
        minors.push_back(poly_minor(M, all_rows, cols, N));
        int i = c;
        while (i >= 0 && cols[i] == n - (c + 1) + i) --i;
        if (i < 0) break;
        ++cols[i];
        for (int j = i + 1; j <= c; ++j) cols[j] = cols[j - 1] + 1;
    }
    const int need = n - c;
    if (static_cast<int>(minors.size()) == need) return minors;
    used_combos = true;
    std::vector<Polynomial> out;
    for (int r = 0; r < need; ++r) {
        Polynomial row(N);
        for (const auto& m : minors) row += rng.complex_normal() * m;
        row.normalize();
        out.push_back(std::move(row));
    }
    return out;
}

// correspondence rows with an explicit equidistant center: every foot on X,
// z - x_i normal to X at x_i as a rank condition, and all squared distances
// to z equal (differences written so the z^2 parts cancel)
inline std::vector<Polynomial> center_rows(const std::vector<EmbeddedCopy>& cps, int N,
                                           const VariableLayout& L, Rng& rng,
                                           bool& used_combos) {
    const int n = L.n;
    std::vector<Polynomial> rows;
    for (const auto& cp : cps)
        for (const auto& f : cp.F) rows.push_back(f);
    for (int i = 0; i < L.k; ++i) {
        std::vector<Polynomial> diff;
        for (int a = 0; a < n; ++a)
            diff.push_back(Polynomial::variable(N, L.z_begin() + a) -
                           Polynomial::variable(N, L.x_begin(i) + a));
        for (auto& r : rank_rows(diff, cps[i].dF, N, rng, used_combos))
            rows.push_back(std::move(r));
    }
    for (int j = 1; j < L.k; ++j) {
        Polynomial row(N);
        for (int a = 0; a < n; ++a) {
            Polynomial x1 = Polynomial::variable(N, L.x_begin(0) + a);
            Polynomial xj = Polynomial::variable(N, L.x_begin(j) + a);
            Polynomial z = Polynomial::variable(N, L.z_begin() + a);
            row += x1 * x1 - xj * xj - Complex(2.0) * z * (x1 - xj);
        }
        row.normalize();
        rows.push_back(std::move(row));
    }
    return rows;
}

// order-2 rows with the center eliminated: the midpoint of a double normal is
// automatically equidistant, so the segment x1 - x2 itself must be normal to
// X at both feet
inline std::vector<Polynomial> midpoint_rows(const std::vector<EmbeddedCopy>& cps, int N,
                                             const VariableLayout& L, Rng& rng,
                                             bool& used_combos) {
    std::vector<Polynomial> rows;
    for (const auto& cp : cps)
        for (const auto& f : cp.F) rows.push_back(f);
    std::vector<Polynomial> diff;
    for (int a = 0; a < L.n; ++a)
        diff.push_back(Polynomial::variable(N, L.x_begin(0) + a) -
                       Polynomial::variable(N, L.x_begin(1) + a));
    for (int i = 0; i < 2; ++i)
        for (auto& r : rank_rows(diff, cps[i].dF, N, rng, used_combos))
            rows.push_back(std::move(r));
    return rows;
}

// s * A + (1 - s) * B, entrywise over a copy; used for coefficient homotopies
// between two base systems of the same shape
inline EmbeddedCopy blend_copies(const EmbeddedCopy& A, const EmbeddedCopy& B, int N, int s_var) {
    Polynomial s = Polynomial::variable(N, s_var);
    Polynomial t = Polynomial::constant(N, 1.0) - s;
    EmbeddedCopy out;
    for (std::size_t m = 0; m < A.F.size(); ++m) {
        out.F.push_back(s * A.F[m] + t * B.F[m]);
        std::vector<Polynomial> grad;
        for (std::size_t a = 0; a < A.dF[m].size(); ++a)
            grad.push_back(s * A.dF[m][a] + t * B.dF[m][a]);
        out.dF.push_back(std::move(grad));
    }
    return out;
}

// Paths that settle onto the positive-dimensional junk of a correspondence
// (a foot onto another foot, or a foot onto the center) never leave it again
// near t = 0, so the tracker can stop paying for them early. The squared
// relative threshold 1e-6 is far below the separation of genuine
// configurations and far above endgame drift.
inline std::function<bool(const Complex*)> block_collision_junk(
        std::vector<std::pair<int, int>> pairs, int n) {
    return [pairs = std::move(pairs), n](const Complex* x) {
        for (auto [b1, b2] : pairs) {
            double d = 0.0, s = 1.0;
            for (int a = 0; a < n; ++a) {
                d += std::norm(x[b1 + a] - x[b2 + a]);
                s += std::norm(x[b1 + a]);
            }
            if (d <= 1e-6 * s) return true;
        }
        return false;
    };
}

inline std::vector<std::pair<int, int>> all_block_pairs(const VariableLayout& L) {
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < L.k; ++i)
        for (int j = i + 1; j < L.k; ++j) pairs.push_back({L.x_begin(i), L.x_begin(j)});
    if (L.has_z)
        for (int i = 0; i < L.k; ++i) pairs.push_back({L.x_begin(i), L.z_begin()});
    return pairs;
}

// critical system of `objective` restricted to the variety cut by `rows`:
// for every variety variable v, d0 * d objective/dv + sum_j d1_j * d rows_j/dv
inline std::vector<Polynomial> critical_rows(const std::vector<Polynomial>& rows,
                                             const Polynomial& objective, int N,
                                             const VariableLayout& L) {
    std::vector<Polynomial> out;
    const int nvariety = L.delta_begin();
    for (int v = 0; v < nvariety; ++v) {
        Polynomial row = Polynomial::variable(N, L.delta_begin()) * objective.derivative(v);
        for (std::size_t j = 0; j < rows.size(); ++j)
            row += Polynomial::variable(N, L.delta_begin() + 1 + static_cast<int>(j)) *
                   rows[j].derivative(v);
        row.normalize();
        out.push_back(std::move(row));
    }
    return out;
}

inline Polynomial patch_row(int N, const VariableLayout& L, const ComplexPoint& coeffs) {
    Polynomial p = Polynomial::constant(N, -1.0);
    for (int j = 0; j < L.delta_len(); ++j)
        p += Polynomial::variable(N, L.delta_begin() + j, coeffs[j]);
    return p;
}

}  // namespace detail

inline CorrespondenceSpec build_medial_system(const PolySystem& base,
                                              std::uint64_t seed = kDefaultSeed) {
    CorrespondenceSpec spec;
    spec.kind = Quantity::medial;
    spec.base = base;
    spec.layout = {base.nvars, base.neqs(), 2, true, false, false, true};
    const int N = spec.layout.total();
    Rng rng(seed);
    std::vector<detail::EmbeddedCopy> cps;
    for (int i = 0; i < 2; ++i) cps.push_back(detail::embed_copy(base, N, spec.layout.x_begin(i)));
    spec.system.nvars = N;
    spec.system.var_names = detail::layout_names(spec.layout);
    spec.system.polys = detail::center_rows(cps, N, spec.layout, rng, spec.det_combos);
    spec.system.codim_hint = spec.system.neqs();
    spec.junk = detail::block_collision_junk(detail::all_block_pairs(spec.layout), spec.layout.n);
    return spec;
}

// objective d(x1,z)^2; its critical points over the pair variety include the
// two-point configurations and, on the coincident-feet locus, the centers of
// curvature, so the smallest positive critical value bounds the reach
inline CorrespondenceSpec build_reach_system(const PolySystem& base,
                                             std::uint64_t seed = kDefaultSeed) {
    CorrespondenceSpec spec;
    spec.kind = Quantity::reach;
    spec.base = base;
    spec.layout = {base.nvars, base.neqs(), 2, true, true, false, true};
    const VariableLayout& L = spec.layout;
    const int N = L.total();
    Rng rng(seed);

    std::vector<detail::EmbeddedCopy> cps;
    for (int i = 0; i < 2; ++i) cps.push_back(detail::embed_copy(base, N, L.x_begin(i)));
    auto rows = detail::center_rows(cps, N, L, rng, spec.det_combos);
    Polynomial objective(N);
    for (int a = 0; a < L.n; ++a) {
        Polynomial d = Polynomial::variable(N, L.x_begin(0) + a) -
                       Polynomial::variable(N, L.z_begin() + a);
        objective += d * d;
    }
    auto crit = detail::critical_rows(rows, objective, N, L);

    spec.patch.resize(L.delta_len());
    for (auto& c : spec.patch) c = rng.complex_normal();

    spec.system.nvars = N;
    spec.system.var_names = detail::layout_names(L);
    spec.system.polys = std::move(rows);
    for (auto& r : crit) spec.system.polys.push_back(std::move(r));
    spec.system.polys.push_back(detail::patch_row(N, L, spec.patch));
    spec.structure = infer_product_structure(spec.system);
    spec.junk = detail::block_collision_junk(detail::all_block_pairs(L), L.n);
    return spec;
}

// Focal configurations: z = x + JF(x)^T l is a center where the normal
// exponential map degenerates along a tangent direction v, meaning
// (I + sum_m l_m H_m(x)) v falls back into the row span of JF(x). Critical
// points of d(x,z)^2 over this variety are the curvature-extremal radii. They
// are isolated (so continuation is guaranteed to find them), unlike their
// counterparts on the coincident-feet locus of the pair variety, which sit on
// positive-dimensional multiplier fibers and are filtered there as degenerate.
inline CorrespondenceSpec build_focal_system(const PolySystem& base,
                                             std::uint64_t seed = kDefaultSeed) {
    CorrespondenceSpec spec;
    spec.kind = Quantity::focal;
    spec.base = base;
    spec.layout = {base.nvars, base.neqs(), 1, true, true, true};
    const VariableLayout& L = spec.layout;
    const int N = L.total();
    const int n = L.n, c = L.c;

    std::vector<int> map(n);
    for (int a = 0; a < n; ++a) map[a] = L.x_begin(0) + a;
    std::vector<std::vector<Polynomial>> dF(c);
    std::vector<std::vector<std::vector<Polynomial>>> HF(c);
    std::vector<Polynomial> rows;
    for (int m = 0; m < c; ++m) {
        rows.push_back(base.polys[m].embedded(N, map));
        HF[m].assign(n, {});
        for (int a = 0; a < n; ++a) {
            Polynomial da = base.polys[m].derivative(a);
            dF[m].push_back(da.embedded(N, map));
            for (int b = 0; b < n; ++b) HF[m][a].push_back(da.derivative(b).embedded(N, map));
        }
    }
    for (int a = 0; a < n; ++a) {
        Polynomial row = Polynomial::variable(N, L.x_begin(0) + a) -
                         Polynomial::variable(N, L.z_begin() + a);
        for (int m = 0; m < c; ++m)
            row += Polynomial::variable(N, L.lambda_begin(0) + m) * dF[m][a];
        rows.push_back(std::move(row));
    }
    for (int m = 0; m < c; ++m) {
        Polynomial row(N);
        for (int a = 0; a < n; ++a) row += dF[m][a] * Polynomial::variable(N, L.v_begin() + a);
        rows.push_back(std::move(row));
    }
    for (int a = 0; a < n; ++a) {
        Polynomial row = Polynomial::variable(N, L.v_begin() + a);
        for (int m = 0; m < c; ++m) {
            for (int b = 0; b < n; ++b)
                row += Polynomial::variable(N, L.lambda_begin(0) + m) * HF[m][a][b] *
                       Polynomial::variable(N, L.v_begin() + b);
            row += Polynomial::variable(N, L.mu_begin() + m) * dF[m][a];
        }
        row.normalize();
        rows.push_back(std::move(row));
    }
    Rng rng(seed);
    spec.dir_patch.resize(n + c);
    for (auto& coeff : spec.dir_patch) coeff = rng.complex_normal();
    Polynomial vpatch = Polynomial::constant(N, -1.0);
    for (int j = 0; j < n + c; ++j)
        vpatch += Polynomial::variable(N, L.v_begin() + j, spec.dir_patch[j]);
    rows.push_back(std::move(vpatch));

    Polynomial objective(N);
    for (int a = 0; a < n; ++a) {
        Polynomial d = Polynomial::variable(N, L.x_begin(0) + a) -
                       Polynomial::variable(N, L.z_begin() + a);
        objective += d * d;
    }
    auto crit = detail::critical_rows(rows, objective, N, L);

    spec.patch.resize(L.delta_len());
    for (auto& coeff : spec.patch) coeff = rng.complex_normal();

    spec.system.nvars = N;
    spec.system.var_names = detail::layout_names(L);
    spec.system.polys = std::move(rows);
    for (auto& r : crit) spec.system.polys.push_back(std::move(r));
    spec.system.polys.push_back(detail::patch_row(N, L, spec.patch));
    spec.structure = infer_product_structure(spec.system);
    spec.junk = detail::block_collision_junk(detail::all_block_pairs(L), L.n);
    return spec;
}

inline PolySystem lfs_substituted(const CorrespondenceSpec& spec, const RealPoint& w);

// objective d(w,z)^2 over the same pair variety; w is kept symbolic in
// param_system (trailing parameters) so batches of query points can be swept
// with parameter continuation from one ab initio solve
inline CorrespondenceSpec build_lfs_system(const PolySystem& base, const RealPoint& w,
                                           std::uint64_t seed = kDefaultSeed) {
    CorrespondenceSpec spec;
    spec.kind = Quantity::lfs;
    spec.base = base;
    spec.w = w;
    spec.layout = {base.nvars, base.neqs(), 2, true, true, false, true};
    const int N = spec.layout.total();
    const VariableLayout& L = spec.layout;
    const int M = N + L.n;  // ring with w parameters appended
    Rng rng(seed);

    std::vector<detail::EmbeddedCopy> cps;
    for (int i = 0; i < 2; ++i) cps.push_back(detail::embed_copy(base, M, L.x_begin(i)));
    auto rows = detail::center_rows(cps, M, L, rng, spec.det_combos);
    Polynomial objective(M);
    for (int a = 0; a < L.n; ++a) {
        Polynomial d = Polynomial::variable(M, N + a) - Polynomial::variable(M, L.z_begin() + a);
        objective += d * d;
    }
    auto crit = detail::critical_rows(rows, objective, M, L);

    spec.patch.resize(L.delta_len());
    for (auto& c : spec.patch) c = rng.complex_normal();

    spec.param_system.nvars = M;
    spec.param_system.var_names = detail::layout_names(L);
    for (int a = 0; a < L.n; ++a)
        spec.param_system.var_names.push_back("w_" + std::to_string(a + 1));
    spec.param_system.polys = std::move(rows);
    for (auto& r : crit) spec.param_system.polys.push_back(std::move(r));
    spec.param_system.polys.push_back(detail::patch_row(M, L, spec.patch));
    spec.nparams = L.n;

    spec.system = lfs_substituted(spec, w);
    spec.structure = infer_product_structure(spec.system);
    spec.junk = detail::block_collision_junk(detail::all_block_pairs(L), L.n);
    return spec;
}

// the square system at a concrete query point
inline PolySystem lfs_substituted(const CorrespondenceSpec& spec, const RealPoint& w) {
    const int N = spec.layout.total();
    PolySystem out;
    out.nvars = N;
    out.var_names = detail::layout_names(spec.layout);
    for (const auto& p : spec.param_system.polys) {
        Polynomial q = p;
        for (int a = 0; a < spec.layout.n; ++a)
            q = q.substitute(N + a, Polynomial::constant(spec.param_system.nvars, w[a]));
        // all w-variables are gone; reindex into the N-variable ring
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

namespace detail {

// hull-weight rows for the orders where the center cannot be eliminated:
// z = sum t_i x_i with sum t_i = 1, feet balanced against multipliers
inline std::vector<Polynomial> hull_rows(const std::vector<EmbeddedCopy>& cps, int N,
                                         const VariableLayout& L) {
    const int n = L.n, c = L.c, k = L.k;
    std::vector<Polynomial> z(n, Polynomial(N));
    for (int a = 0; a < n; ++a)
        for (int i = 0; i < k; ++i)
            z[a] += Polynomial::variable(N, L.t_begin() + i) *
                    Polynomial::variable(N, L.x_begin(i) + a);

    std::vector<Polynomial> rows;
    for (const auto& cp : cps)
        for (const auto& f : cp.F) rows.push_back(f);
    for (int i = 0; i < k; ++i) {
        for (int a = 0; a < n; ++a) {
            Polynomial row = Polynomial::variable(N, L.x_begin(i) + a) - z[a];
            for (int m = 0; m < c; ++m)
                row += Polynomial::variable(N, L.lambda_begin(i) + m) * cps[i].dF[m][a];
            row.normalize();
            rows.push_back(std::move(row));
        }
    }
    auto dist2_to_z = [&](int i) {
        Polynomial s(N);
        for (int a = 0; a < n; ++a) {
            Polynomial d = Polynomial::variable(N, L.x_begin(i) + a) - z[a];
            s += d * d;
        }
        return s;
    };
    Polynomial d1 = dist2_to_z(0);
    for (int j = 1; j < k; ++j) {
        Polynomial row = d1 - dist2_to_z(j);
        row.normalize();  // the z^2 parts cancel exactly
        rows.push_back(std::move(row));
    }
    Polynomial tsum = Polynomial::constant(N, -1.0);
    for (int i = 0; i < k; ++i) tsum += Polynomial::variable(N, L.t_begin() + i);
    rows.push_back(std::move(tsum));
    return rows;
}

}  // namespace detail

// Order-k bottleneck system. Order 2 eliminates the center (midpoints of
// double normals); order n+1 keeps z explicit and needs no hull constraint
// (the affine hull of n+1 generic feet is everything); intermediate orders
// carry hull weights, which force z onto the junction stratum where the
// squared distance is actually critical.
inline CorrespondenceSpec build_bottleneck_system(const PolySystem& base, int k,
                                                  std::uint64_t seed = kDefaultSeed) {
    if (k < 2) throw std::invalid_argument("bottleneck order must be at least 2");
    CorrespondenceSpec spec;
    spec.kind = Quantity::wfs;
    spec.base = base;
    const int n = base.nvars, c = base.neqs();
    Rng rng(seed);

    if (k == 2)
        spec.layout = {n, c, 2, false, false, false, true};
    else if (k == n + 1)
        spec.layout = {n, c, k, true, false, false, true};
    else
        spec.layout = {n, c, k, false, false};
    const VariableLayout& L = spec.layout;
    const int N = L.total();

    std::vector<detail::EmbeddedCopy> cps;
    for (int i = 0; i < k; ++i) cps.push_back(detail::embed_copy(base, N, L.x_begin(i)));

    spec.system.nvars = N;
    spec.system.var_names = detail::layout_names(L);
    if (k == 2)
        spec.system.polys = detail::midpoint_rows(cps, N, L, rng, spec.det_combos);
    else if (k == n + 1)
        spec.system.polys = detail::center_rows(cps, N, L, rng, spec.det_combos);
    else
        spec.system.polys = detail::hull_rows(cps, N, L);
    spec.structure = infer_product_structure(spec.system);
    spec.junk = detail::block_collision_junk(detail::all_block_pairs(L), L.n);
    return spec;
}

// The same system with the base coefficients blended between two systems of
// identical shape: trailing parameter s, rows of s*from + (1-s)*to. Solving
// at s = 1 and tracking the parameter to 0 carries the bottlenecks of `from`
// onto `to`; useful when `to` is too symmetric to solve ab initio (its
// solutions then sit at the ends of the parameter paths, multiplicities and
// all) or when many nearby instances share one expensive start solve.
inline CorrespondenceSpec build_bottleneck_blend(const PolySystem& from, const PolySystem& to,
                                                 int k, std::uint64_t seed = kDefaultSeed) {
    if (from.nvars != to.nvars || from.neqs() != to.neqs())
        throw std::invalid_argument("bottleneck blend: systems must have the same shape");
    if (k < 2) throw std::invalid_argument("bottleneck order must be at least 2");
    CorrespondenceSpec spec;
    spec.kind = Quantity::wfs;
    spec.base = to;
    const int n = to.nvars, c = to.neqs();
    Rng rng(seed);

    if (k == 2)
        spec.layout = {n, c, 2, false, false, false, true};
    else if (k == n + 1)
        spec.layout = {n, c, k, true, false, false, true};
    else
        spec.layout = {n, c, k, false, false};
    const VariableLayout& L = spec.layout;
    const int N = L.total();
    const int M = N + 1;  // ring with the blend parameter appended

    std::vector<detail::EmbeddedCopy> cps;
    for (int i = 0; i < k; ++i)
        cps.push_back(detail::blend_copies(detail::embed_copy(from, M, L.x_begin(i)),
                                           detail::embed_copy(to, M, L.x_begin(i)), M, N));

    spec.param_system.nvars = M;
    spec.param_system.var_names = detail::layout_names(L);
    spec.param_system.var_names.push_back("s");
    if (k == 2)
        spec.param_system.polys = detail::midpoint_rows(cps, M, L, rng, spec.det_combos);
    else if (k == n + 1)
        spec.param_system.polys = detail::center_rows(cps, M, L, rng, spec.det_combos);
    else
        spec.param_system.polys = detail::hull_rows(cps, M, L);
    spec.nparams = 1;
    spec.junk = detail::block_collision_junk(detail::all_block_pairs(L), L.n);
    return spec;
}

// ---------------------------------------------------------------------------
// solution accessors and the degenerate-locus filter
// ---------------------------------------------------------------------------

inline ComplexPoint foot_of(const CorrespondenceSpec& spec, const ComplexPoint& sol, int i) {
    const VariableLayout& L = spec.layout;
    return ComplexPoint(sol.begin() + L.x_begin(i), sol.begin() + L.x_begin(i) + L.n);
}

inline ComplexPoint center_of(const CorrespondenceSpec& spec, const ComplexPoint& sol) {
    const VariableLayout& L = spec.layout;
    if (L.has_z)
        return ComplexPoint(sol.begin() + L.z_begin(), sol.begin() + L.z_begin() + L.n);
    if (L.det) {  // order 2 with the center eliminated: the midpoint
        ComplexPoint z(L.n);
        for (int a = 0; a < L.n; ++a)
            z[a] = 0.5 * (sol[L.x_begin(0) + a] + sol[L.x_begin(1) + a]);
        return z;
    }
    ComplexPoint z(L.n, Complex(0.0));
    for (int i = 0; i < L.k; ++i)
        for (int a = 0; a < L.n; ++a) z[a] += sol[L.t_begin() + i] * sol[L.x_begin(i) + a];
    return z;
}

// Hull weights of the center in the feet. Stored for the multiplier layouts,
// constant (1/2, 1/2) for eliminated midpoints, recovered by a linear solve
// for order n+1 (only well defined when the feet are affinely independent;
// degenerate hulls are filtered before weights matter). Empty for the pair
// layouts, whose center is generally not on the segment.
inline ComplexPoint weights_of(const CorrespondenceSpec& spec, const ComplexPoint& sol) {
    const VariableLayout& L = spec.layout;
    if (L.det && !L.has_z) return ComplexPoint(2, Complex(0.5));
    if (L.det && L.has_z && L.k >= 3) {
        Eigen::MatrixXcd A(L.n + 1, L.k);
        Eigen::VectorXcd b(L.n + 1);
        for (int i = 0; i < L.k; ++i) {
            for (int a = 0; a < L.n; ++a) A(a, i) = sol[L.x_begin(i) + a];
            A(L.n, i) = 1.0;
        }
        for (int a = 0; a < L.n; ++a) b(a) = sol[L.z_begin() + a];
        b(L.n) = 1.0;
        Eigen::VectorXcd t = A.partialPivLu().solve(b);
        return ComplexPoint(t.data(), t.data() + L.k);
    }
    if (L.has_z) return {};
    return ComplexPoint(sol.begin() + L.t_begin(), sol.begin() + L.t_begin() + L.k);
}

// Degenerate configurations excluded from feature-size bounds: a foot onto
// another foot or onto the center (pair values lost this way are recovered by
// the focal system, whose own degenerate locus is just z = x), a vanishing
// hull weight or affinely dependent feet at order >= 3, and endpoints where
// random minor combinations vanish without the actual rank drop they imply.
inline bool in_gamma(const CorrespondenceSpec& spec, const ComplexPoint& sol, double tol = 1e-6) {
    const VariableLayout& L = spec.layout;
    // a displacement near the isotropic cone (sum of squares tiny against the
    // Hermitian length) makes the squared-distance objective meaningless; such
    // configurations sit on degenerate components through the complex singular
    // locus and carry arbitrary small values
    auto isotropic = [&](const ComplexPoint& a, const ComplexPoint& b) {
        double h2 = 0.0;
        Complex q(0.0);
        for (std::size_t i = 0; i < a.size(); ++i) {
            Complex d = a[i] - b[i];
            h2 += std::norm(d);
            q += d * d;
        }
        return h2 > 0.0 && std::abs(q) <= tol * h2;
    };
    if (L.focal) {
        ComplexPoint x = foot_of(spec, sol, 0);
        ComplexPoint z = center_of(spec, sol);
        return dist2(x, z) <= tol * (1.0 + norm2(z)) || isotropic(x, z);
    }
    std::vector<ComplexPoint> feet;
    for (int i = 0; i < L.k; ++i) feet.push_back(foot_of(spec, sol, i));
    ComplexPoint z = center_of(spec, sol);
    double scale = 1.0 + norm2(z);
    for (const auto& f : feet) scale = std::max(scale, 1.0 + norm2(f));
    for (int i = 0; i < L.k; ++i) {
        if (dist2(feet[i], z) <= tol * scale || isotropic(feet[i], z)) return true;
        for (int j = i + 1; j < L.k; ++j)
            if (dist2(feet[i], feet[j]) <= tol * scale) return true;
    }

    if (L.k >= 3) {
        Eigen::MatrixXcd D(L.n, L.k - 1);
        for (int j = 1; j < L.k; ++j)
            for (int a = 0; a < L.n; ++a) D(a, j - 1) = feet[j][a] - feet[0][a];
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(D);
        if (svd.singularValues().minCoeff() <= tol * scale) return true;
        ComplexPoint t = weights_of(spec, sol);
        for (const auto& ti : t)
            if (std::abs(ti) <= tol) return true;
    }

    if (spec.det_combos) {
        // the combinations only imply the rank drop; verify it numerically
        for (int i = 0; i < L.k; ++i) {
            Eigen::MatrixXcd M(L.c + 1, L.n);
            const ComplexPoint& other = L.has_z ? z : feet[1 - i];
            for (int a = 0; a < L.n; ++a) M(0, a) = other[a] - feet[i][a];
            for (int m = 0; m < L.c; ++m)
                for (int a = 0; a < L.n; ++a)
                    M(m + 1, a) = spec.base.polys[m].derivative(a).eval(feet[i].data());
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
            double s = 1.0 + M.cwiseAbs().maxCoeff();
            if (svd.singularValues()(L.c) > std::sqrt(std::max(tol, 1e-10)) * s) return true;
        }
    }
    return false;
}

// The distance-squared objective at a solution (complex bilinear form, so
// nonreal values are possible and meaningful). Pair systems: d(x1,z)^2 or
// d(w,z)^2; order-k systems: the mean of d(x_i,z)^2.
inline Complex eval_critical_value(const CorrespondenceSpec& spec, const ComplexPoint& sol) {
    {
        CompiledSystem cs(spec.system);
        EvalScratch ws;
        ComplexPoint f(spec.system.neqs());
        cs.eval(sol.data(), f.data(), ws);
        if (norm2(f) > 1e-6 * (1.0 + norm2(sol)))
            throw std::invalid_argument("eval_critical_value: point is not on the system");
    }
    const VariableLayout& L = spec.layout;
    ComplexPoint z = center_of(spec, sol);
    auto d2 = [&](const ComplexPoint& a, const ComplexPoint& b) {
        Complex s = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) {
            Complex d = a[j] - b[j];
            s += d * d;
        }
        return s;
    };
    if (spec.kind == Quantity::lfs) {
        ComplexPoint wc(L.n);
        for (int a = 0; a < L.n; ++a) wc[a] = spec.w[a];
        return d2(wc, z);
    }
    if (L.has_z) return d2(foot_of(spec, sol, 0), z);
    Complex s = 0.0;
    for (int i = 0; i < L.k; ++i) s += d2(foot_of(spec, sol, i), z);
    return s / static_cast<double>(L.k);
}

}  // namespace featsize
