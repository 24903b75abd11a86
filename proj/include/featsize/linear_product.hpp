#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "featsize/homotopy.hpp"
#include "featsize/poly.hpp"

namespace featsize {

// Product structure for a start system: equation i is a product of random
// affine forms, factor l supported on the variable subset eq_factors[i][l].
// The number of factors equals the equation degree, so the start and target
// degrees match and no paths are lost to a degree drop at t=0.
struct ProductStructure {
    std::vector<std::vector<std::vector<int>>> eq_factors;
};

namespace detail {

// can every unit of the monomial be assigned to a distinct factor containing
// its variable? (bipartite matching, Kuhn)
inline bool monomial_coverable(const std::vector<int>& expo,
                               const std::vector<std::vector<int>>& factors) {
    std::vector<int> units;
    for (int v = 0; v < static_cast<int>(expo.size()); ++v)
        for (int e = 0; e < expo[v]; ++e) units.push_back(v);
    if (units.empty()) return true;
    if (units.size() > factors.size()) return false;

    const int nf = static_cast<int>(factors.size());
    std::vector<int> match(nf, -1);
    std::vector<char> visited(nf);
    std::function<bool(int)> try_assign = [&](int u) -> bool {
        for (int f = 0; f < nf; ++f) {
            if (visited[f]) continue;
            bool contains = false;
            for (int fv : factors[f])
                if (fv == units[u]) { contains = true; break; }
            if (!contains) continue;
            visited[f] = 1;
            if (match[f] < 0 || try_assign(match[f])) {
                match[f] = u;
                return true;
            }
        }
        return false;
    };
    for (int u = 0; u < static_cast<int>(units.size()); ++u) {
        std::fill(visited.begin(), visited.end(), 0);
        if (!try_assign(u)) return false;
    }
    return true;
}

}  // namespace detail

inline bool structure_covers(const ProductStructure& ps, const PolySystem& sys) {
    if (static_cast<int>(ps.eq_factors.size()) != sys.neqs()) return false;
    for (int i = 0; i < sys.neqs(); ++i) {
        Polynomial p = sys.polys[i];
        p.normalize();
        for (const auto& t : p.terms())
            if (!detail::monomial_coverable(t.expo, ps.eq_factors[i])) return false;
    }
    return true;
}

// Builds a product structure from the monomial supports alone: each monomial
// is written as its sorted variable sequence, right-aligned to the equation
// degree, and factor l is the union of the l-th entries. By construction the
// identity assignment covers every monomial, so the structure always
// validates; sparse supports give far fewer start solutions than the dense
// total-degree count.
inline ProductStructure infer_product_structure(const PolySystem& sys) {
    ProductStructure ps;
    ps.eq_factors.resize(sys.neqs());
    for (int i = 0; i < sys.neqs(); ++i) {
        Polynomial p = sys.polys[i];
        p.normalize();
        const int d = p.degree();
        if (d < 1) throw std::invalid_argument("product structure: zero-degree equation");
        std::vector<std::vector<char>> cols(d, std::vector<char>(sys.nvars, 0));
        for (const auto& t : p.terms()) {
            std::vector<int> seq;
            for (int v = 0; v < sys.nvars; ++v)
                for (int e = 0; e < t.expo[v]; ++e) seq.push_back(v);
            const int off = d - static_cast<int>(seq.size());
            for (int l = 0; l < static_cast<int>(seq.size()); ++l) cols[off + l][seq[l]] = 1;
        }
        for (int l = 0; l < d; ++l) {
            std::vector<int> vars;
            for (int v = 0; v < sys.nvars; ++v)
                if (cols[l][v]) vars.push_back(v);
            if (vars.empty())  // all-constant column, give it full support
                for (int v = 0; v < sys.nvars; ++v) vars.push_back(v);
            ps.eq_factors[i].push_back(std::move(vars));
        }
    }
    return ps;
}

inline ProductStructure total_degree_structure(const PolySystem& sys) {
    ProductStructure ps;
    ps.eq_factors.resize(sys.neqs());
    std::vector<int> all(sys.nvars);
    for (int v = 0; v < sys.nvars; ++v) all[v] = v;
    auto degs = total_degrees(sys);
    for (int i = 0; i < sys.neqs(); ++i)
        ps.eq_factors[i].assign(degs[i], all);
    return ps;
}

// Start system g_i = prod_l L_{i,l}(x) with random affine forms L on the
// structure's supports. Start points are enumerated as the solutions of all
// square form selections (one factor per equation) that admit a system of
// distinct representatives.
class LinearProductStart final : public StartSystem, public SystemEval {
public:
    struct Form {
        std::vector<int> vars;
        std::vector<Complex> coeffs;
        Complex c0;

        Complex value(const Complex* x) const {
            Complex s = c0;
            for (std::size_t k = 0; k < vars.size(); ++k) s += coeffs[k] * x[vars[k]];
            return s;
        }
    };

    LinearProductStart(const PolySystem& sys, const ProductStructure& ps, Rng& rng)
        : n_(sys.nvars) {
        if (!structure_covers(ps, sys))
            throw std::invalid_argument("product structure does not cover the system support");
        forms_.resize(ps.eq_factors.size());
        for (std::size_t i = 0; i < ps.eq_factors.size(); ++i) {
            for (const auto& sup : ps.eq_factors[i]) {
                Form f;
                f.vars = sup;
                f.coeffs.reserve(sup.size());
                for (std::size_t k = 0; k < sup.size(); ++k) f.coeffs.push_back(rng.complex_normal());
                f.c0 = rng.complex_normal();
                forms_[i].push_back(std::move(f));
            }
        }
        enumerate_starts();
    }

    const SystemEval& eval() const override { return *this; }
    long long path_count() const override { return static_cast<long long>(starts_.size()); }
    ComplexPoint start_point(long long index) const override { return starts_[index]; }

    int nvars() const override { return n_; }
    int neqs() const override { return static_cast<int>(forms_.size()); }

    void eval(const Complex* x, Complex* f, EvalScratch&) const override {
        for (std::size_t i = 0; i < forms_.size(); ++i) {
            Complex prod = 1.0;
            for (const auto& form : forms_[i]) prod *= form.value(x);
            f[i] = prod;
        }
    }

    void eval_jac(const Complex* x, Complex* f, Complex* jac, EvalScratch& ws) const override {
        const std::size_t nn = static_cast<std::size_t>(n_);
        std::fill(jac, jac + nn * forms_.size(), Complex(0.0));
        for (std::size_t i = 0; i < forms_.size(); ++i) {
            const auto& fl = forms_[i];
            const int m = static_cast<int>(fl.size());
            ws.pre.resize(m + 1);
            ws.suf.resize(m + 1);
            ws.pre[0] = 1.0;
            for (int l = 0; l < m; ++l) ws.pre[l + 1] = ws.pre[l] * fl[l].value(x);
            ws.suf[m] = 1.0;
            for (int l = m - 1; l >= 0; --l) ws.suf[l] = ws.suf[l + 1] * fl[l].value(x);
            f[i] = ws.pre[m];
            Complex* jrow = jac + i * nn;
            for (int l = 0; l < m; ++l) {
                Complex outer = ws.pre[l] * ws.suf[l + 1];
                for (std::size_t k = 0; k < fl[l].vars.size(); ++k)
                    jrow[fl[l].vars[k]] += outer * fl[l].coeffs[k];
            }
        }
    }

private:
    void enumerate_starts() {
        const int ne = static_cast<int>(forms_.size());
        std::vector<int> match(n_, -1);     // var -> equation currently using it
        std::vector<int> selection(ne, -1);
        std::vector<std::vector<std::pair<int, int>>> journal(ne);
        std::vector<char> visited(n_);

        // augmenting path for equation e given current selections
        std::function<bool(int, std::vector<std::pair<int, int>>&)> augment =
            [&](int e, std::vector<std::pair<int, int>>& jl) -> bool {
            const auto& sup = forms_[e][selection[e]].vars;
            for (int v : sup) {
                if (visited[v]) continue;
                visited[v] = 1;
                if (match[v] < 0 || augment(match[v], jl)) {
                    jl.push_back({v, match[v]});
                    match[v] = e;
                    return true;
                }
            }
            return false;
        };

        std::function<void(int)> dfs = [&](int e) {
            if (e == ne) {
                starts_.push_back(solve_selection(selection));
                return;
            }
            for (int c = 0; c < static_cast<int>(forms_[e].size()); ++c) {
                selection[e] = c;
                std::fill(visited.begin(), visited.end(), 0);
                journal[e].clear();
                if (augment(e, journal[e])) {
                    dfs(e + 1);
                    for (auto it = journal[e].rbegin(); it != journal[e].rend(); ++it)
                        match[it->first] = it->second;
                }
            }
            selection[e] = -1;
        };
        dfs(0);
    }

    ComplexPoint solve_selection(const std::vector<int>& selection) const {
        const int ne = static_cast<int>(forms_.size());
        Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(ne, n_);
        Eigen::VectorXcd b(ne);
        for (int e = 0; e < ne; ++e) {
            const Form& f = forms_[e][selection[e]];
            for (std::size_t k = 0; k < f.vars.size(); ++k) A(e, f.vars[k]) = f.coeffs[k];
            b(e) = -f.c0;
        }
        Eigen::VectorXcd x = A.partialPivLu().solve(b);
        ComplexPoint p(n_);
        for (int v = 0; v < n_; ++v) p[v] = x(v);
        return p;
    }

    int n_;
    std::vector<std::vector<Form>> forms_;
    std::vector<ComplexPoint> starts_;
};

// Solves a square system by continuation from a linear-product start. With no
// structure given, one is inferred from the monomial supports (falling back
// to dense total-degree factors if the check fails).
inline EndpointSet solve_linear_product(const PolySystem& sys, const TrackerOptions& opt = {},
                                        const ProductStructure* structure = nullptr) {
    if (sys.neqs() != sys.nvars)
        throw std::invalid_argument("solve_linear_product: system must be square");
    Rng rng(opt.seed);
    Complex gamma = rng.unit_circle();
    ProductStructure ps = structure ? *structure : infer_product_structure(sys);
    if (!structure_covers(ps, sys)) ps = total_degree_structure(sys);
    LinearProductStart start(sys, ps, rng);
    CompiledSystem target(sys);
    return solve_with_start(target, start, gamma, opt, opt.seed);
}

}  // namespace featsize
