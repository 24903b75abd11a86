#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

#include "featsize/poly.hpp"

namespace featsize {

// Per-thread scratch for the evaluators (power tables, prefix/suffix buffers,
// plus joint-point buffers used by wrapper evaluators).
struct EvalScratch {
    std::vector<Complex> pow;   // var-power table, stride (maxdeg+1)
    std::vector<Complex> pre;   // prefix products within one term
    std::vector<Complex> suf;   // suffix products
    std::vector<Complex> adapter_joint;
    std::vector<Complex> adapter_jac;
};

// Abstract view of "a system I can evaluate together with its Jacobian".
// Implemented by CompiledSystem (expanded polynomials) and by the start
// systems, which have cheaper closed forms.
class SystemEval {
public:
    virtual ~SystemEval() = default;
    virtual int nvars() const = 0;
    virtual int neqs() const = 0;
    virtual void eval(const Complex* x, Complex* f, EvalScratch& ws) const = 0;
    // jac is row-major neqs x nvars; f is filled as well
    virtual void eval_jac(const Complex* x, Complex* f, Complex* jac, EvalScratch& ws) const = 0;
};

// Flattened term table for fast repeated evaluation. Derivatives are formed
// per term with prefix/suffix partial products, so no symbolic Jacobian is
// stored.
class CompiledSystem final : public SystemEval {
public:
    CompiledSystem() = default;

    explicit CompiledSystem(const PolySystem& sys) : nvars_(sys.nvars), neqs_(sys.neqs()) {
        eq_begin_.push_back(0);
        max_deg_.assign(nvars_, 1);
        for (const auto& poly : sys.polys) {
            Polynomial p = poly;
            p.normalize();
            for (const auto& t : p.terms()) {
                TermRef tr;
                tr.coeff = t.coeff;
                tr.first = static_cast<std::uint32_t>(varexp_.size());
                int nv = 0;
                for (int v = 0; v < nvars_; ++v) {
                    if (t.expo[v] == 0) continue;
                    varexp_.push_back({static_cast<std::uint16_t>(v),
                                       static_cast<std::uint16_t>(t.expo[v])});
                    max_deg_[v] = std::max(max_deg_[v], t.expo[v]);
                    ++nv;
                }
                tr.nv = static_cast<std::uint16_t>(nv);
                max_term_vars_ = std::max(max_term_vars_, nv);
                terms_.push_back(tr);
            }
            eq_begin_.push_back(static_cast<std::uint32_t>(terms_.size()));
        }
        pow_stride_ = 1;
        for (int v = 0; v < nvars_; ++v) pow_stride_ = std::max(pow_stride_, max_deg_[v] + 1);
    }

    int nvars() const override { return nvars_; }
    int neqs() const override { return neqs_; }

    void prepare(EvalScratch& ws) const {
        ws.pow.resize(static_cast<std::size_t>(nvars_) * pow_stride_);
        ws.pre.resize(max_term_vars_ + 1);
        ws.suf.resize(max_term_vars_ + 1);
    }

    void eval(const Complex* x, Complex* f, EvalScratch& ws) const override {
        prepare(ws);
        fill_powers(x, ws);
        for (int i = 0; i < neqs_; ++i) {
            Complex s = 0.0;
            for (std::uint32_t ti = eq_begin_[i]; ti < eq_begin_[i + 1]; ++ti) {
                const TermRef& t = terms_[ti];
                Complex m = t.coeff;
                const VarExp* ve = varexp_.data() + t.first;
                for (int k = 0; k < t.nv; ++k)
                    m *= ws.pow[static_cast<std::size_t>(ve[k].var) * pow_stride_ + ve[k].exp];
                s += m;
            }
            f[i] = s;
        }
    }

    void eval_jac(const Complex* x, Complex* f, Complex* jac, EvalScratch& ws) const override {
        prepare(ws);
        fill_powers(x, ws);
        const std::size_t nv = static_cast<std::size_t>(nvars_);
        for (std::size_t k = 0; k < nv * static_cast<std::size_t>(neqs_); ++k) jac[k] = 0.0;
        Complex* pre = ws.pre.data();
        Complex* suf = ws.suf.data();
        for (int i = 0; i < neqs_; ++i) {
            Complex s = 0.0;
            Complex* jrow = jac + static_cast<std::size_t>(i) * nv;
            for (std::uint32_t ti = eq_begin_[i]; ti < eq_begin_[i + 1]; ++ti) {
                const TermRef& t = terms_[ti];
                const VarExp* ve = varexp_.data() + t.first;
                const int m = t.nv;
                pre[0] = t.coeff;
                for (int k = 0; k < m; ++k)
                    pre[k + 1] = pre[k] * ws.pow[static_cast<std::size_t>(ve[k].var) * pow_stride_ + ve[k].exp];
                s += pre[m];
                if (m == 0) continue;
                suf[m] = 1.0;
                for (int k = m - 1; k >= 0; --k)
                    suf[k] = suf[k + 1] * ws.pow[static_cast<std::size_t>(ve[k].var) * pow_stride_ + ve[k].exp];
                for (int k = 0; k < m; ++k) {
                    const int e = ve[k].exp;
                    // d/dx of x^e contributes e * x^(e-1)
                    Complex d = pre[k] * suf[k + 1] * static_cast<double>(e) *
                                ws.pow[static_cast<std::size_t>(ve[k].var) * pow_stride_ + (e - 1)];
                    jrow[ve[k].var] += d;
                }
            }
            f[i] = s;
        }
    }

private:
    struct VarExp {
        std::uint16_t var;
        std::uint16_t exp;
    };
    struct TermRef {
        Complex coeff;
        std::uint32_t first;
        std::uint16_t nv;
    };

    void fill_powers(const Complex* x, EvalScratch& ws) const {
        for (int v = 0; v < nvars_; ++v) {
            Complex* row = ws.pow.data() + static_cast<std::size_t>(v) * pow_stride_;
            row[0] = 1.0;
            for (int e = 1; e <= max_deg_[v]; ++e) row[e] = row[e - 1] * x[v];
        }
    }

    int nvars_ = 0;
    int neqs_ = 0;
    std::vector<TermRef> terms_;
    std::vector<std::uint32_t> eq_begin_;
    std::vector<VarExp> varexp_;
    std::vector<int> max_deg_;
    int pow_stride_ = 1;
    int max_term_vars_ = 0;
};

}  // namespace featsize
