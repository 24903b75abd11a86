#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <thread>
#include <vector>

#include "featsize/evaluator.hpp"
#include "featsize/poly.hpp"

namespace featsize {

struct TrackerOptions {
    double initial_step = 0.1;
    double min_step = 1e-14;
    double newton_tol = 1e-11;
    int max_corrector_iters = 3;
    double infinity_norm_cutoff = 1e8;
    double endgame_start = 0.1;  // below this t the step size is capped by t/2
    std::uint64_t seed = kDefaultSeed;
    int threads = 1;
    // Optional early bailout for paths that have settled onto a degenerate
    // locus of the target (diagonals, vanishing multipliers, ...). Checked
    // deep in the endgame and before the final polish; a true return ends the
    // path as truncated_junk so it never pays the stall or polish cost.
    std::function<bool(const Complex* x)> junk_test;
};

enum class PathStatus { success, diverged_to_infinity, step_failure, truncated_junk };

inline const char* to_string(PathStatus s) {
    switch (s) {
        case PathStatus::success: return "success";
        case PathStatus::diverged_to_infinity: return "diverged_to_infinity";
        case PathStatus::truncated_junk: return "truncated_junk";
        default: return "step_failure";
    }
}

struct PathEndpoint {
    ComplexPoint point;
    double residual = 0.0;           // ||target(point)||_2
    PathStatus status = PathStatus::step_failure;
    double condition_estimate = 0.0;
    bool winding_flagged = false;    // reached t=0 only via a stalled final polish
    double t_final = 0.0;            // where tracking stopped (0 when landed)
};

struct DistinctSolution {
    ComplexPoint rep;
    int multiplicity = 0;
    bool is_real = false;
    bool is_singular = false;
    double residual = 0.0;
    double condition_estimate = 0.0;
    std::vector<int> paths;  // contributing path indices
};

struct EndpointSet {
    std::vector<PathEndpoint> endpoints;  // one per path, in path order
    std::vector<DistinctSolution> distinct;
    Complex gamma{1.0, 0.0};
    std::uint64_t seed = kDefaultSeed;
    double cluster_tol = 1e-6;  // scaled by (1+||p||) when comparing
    double real_tol = 1e-8;

    int count(PathStatus s) const {
        int k = 0;
        for (const auto& e : endpoints) k += (e.status == s);
        return k;
    }
};

using RowMatXcd = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TrackWorkspace {
    EvalScratch ws;
    std::vector<Complex> fa, fb, ja, jb;   // scratch for blended homotopies
    std::vector<Complex> joint, jfull;     // scratch for parameter homotopies
    RowMatXcd J;
    Eigen::PartialPivLU<RowMatXcd> lu;
    Eigen::VectorXcd dx;
    ComplexPoint h, ht, xs, xc, k1, k2, k3, k4;

    void resize(int n) {
        J.resize(n, n);
        dx.resize(n);
        h.resize(n);
        ht.resize(n);
        xs.resize(n);
        xc.resize(n);
        k1.resize(n);
        k2.resize(n);
        k3.resize(n);
        k4.resize(n);
    }
};

// ---------------------------------------------------------------------------
// homotopies
// ---------------------------------------------------------------------------

class HomotopyEval {
public:
    virtual ~HomotopyEval() = default;
    virtual int dim() const = 0;
    virtual void eval_H(const Complex* x, double t, Complex* H, TrackWorkspace& w) const = 0;
    // H, Jx (row-major dim x dim) and Ht at (x,t)
    virtual void eval_all(const Complex* x, double t, Complex* H, Complex* Jx, Complex* Ht,
                          TrackWorkspace& w) const = 0;
};

// H(x,t) = gamma * t * G(x) + (1-t) * F(x)
class LinearBlendHomotopy final : public HomotopyEval {
public:
    LinearBlendHomotopy(const SystemEval& start, const SystemEval& target, Complex gamma)
        : g_(start), f_(target), gamma_(gamma), n_(target.nvars()) {}

    int dim() const override { return n_; }

    void eval_H(const Complex* x, double t, Complex* H, TrackWorkspace& w) const override {
        w.fa.resize(n_);
        w.fb.resize(n_);
        g_.eval(x, w.fa.data(), w.ws);
        f_.eval(x, w.fb.data(), w.ws);
        const Complex a = gamma_ * t, b = 1.0 - t;
        for (int i = 0; i < n_; ++i) H[i] = a * w.fa[i] + b * w.fb[i];
    }

    void eval_all(const Complex* x, double t, Complex* H, Complex* Jx, Complex* Ht,
                  TrackWorkspace& w) const override {
        const std::size_t nn = static_cast<std::size_t>(n_) * n_;
        w.fa.resize(n_);
        w.fb.resize(n_);
        w.ja.resize(nn);
        w.jb.resize(nn);
        g_.eval_jac(x, w.fa.data(), w.ja.data(), w.ws);
        f_.eval_jac(x, w.fb.data(), w.jb.data(), w.ws);
        const Complex a = gamma_ * t, b = 1.0 - t;
        for (int i = 0; i < n_; ++i) {
            H[i] = a * w.fa[i] + b * w.fb[i];
            Ht[i] = gamma_ * w.fa[i] - w.fb[i];
        }
        for (std::size_t k = 0; k < nn; ++k) Jx[k] = a * w.ja[k] + b * w.jb[k];
    }

private:
    const SystemEval& g_;
    const SystemEval& f_;
    Complex gamma_;
    int n_;
};

// F(x, p(s)) with p(s) = p_target + (p_start - p_target) * gamma*s/(1 - s + gamma*s).
// The bend keeps intermediate parameter values away from the real segment.
class ParameterHomotopy final : public HomotopyEval {
public:
    ParameterHomotopy(const SystemEval& joint, ComplexPoint p_start, ComplexPoint p_target,
                      Complex gamma)
        : joint_(joint),
          p_start_(std::move(p_start)),
          p_target_(std::move(p_target)),
          gamma_(gamma),
          np_(static_cast<int>(p_start_.size())),
          n_(joint.nvars() - np_) {}

    int dim() const override { return n_; }

    void params_at(double s, Complex* p) const {
        const Complex phi = gamma_ * s / (1.0 - s + gamma_ * s);
        for (int i = 0; i < np_; ++i) p[i] = p_target_[i] + (p_start_[i] - p_target_[i]) * phi;
    }

    void eval_H(const Complex* x, double s, Complex* H, TrackWorkspace& w) const override {
        w.joint.resize(n_ + np_);
        std::copy(x, x + n_, w.joint.begin());
        params_at(s, w.joint.data() + n_);
        joint_.eval(w.joint.data(), H, w.ws);
    }

    void eval_all(const Complex* x, double s, Complex* H, Complex* Jx, Complex* Ht,
                  TrackWorkspace& w) const override {
        const int m = n_ + np_;
        w.joint.resize(m);
        w.jfull.resize(static_cast<std::size_t>(n_) * m);
        std::copy(x, x + n_, w.joint.begin());
        params_at(s, w.joint.data() + n_);
        joint_.eval_jac(w.joint.data(), H, w.jfull.data(), w.ws);

        const Complex den = 1.0 - s + gamma_ * s;
        const Complex dphi = gamma_ / (den * den);
        for (int i = 0; i < n_; ++i) {
            const Complex* row = w.jfull.data() + static_cast<std::size_t>(i) * m;
            std::copy(row, row + n_, Jx + static_cast<std::size_t>(i) * n_);
            Complex ht = 0.0;
            for (int j = 0; j < np_; ++j) ht += row[n_ + j] * (p_start_[j] - p_target_[j]) * dphi;
            Ht[i] = ht;
        }
    }

private:
    const SystemEval& joint_;
    ComplexPoint p_start_, p_target_;
    Complex gamma_;
    int np_, n_;
};

// joint system with the trailing parameter block frozen
class FixedParamsEval final : public SystemEval {
public:
    FixedParamsEval(const SystemEval& joint, ComplexPoint params)
        : joint_(joint), params_(std::move(params)),
          np_(static_cast<int>(params_.size())), n_(joint.nvars() - np_) {}

    int nvars() const override { return n_; }
    int neqs() const override { return joint_.neqs(); }

    void eval(const Complex* x, Complex* f, EvalScratch& ws) const override {
        ws.adapter_joint.resize(n_ + np_);
        std::copy(x, x + n_, ws.adapter_joint.begin());
        std::copy(params_.begin(), params_.end(), ws.adapter_joint.begin() + n_);
        joint_.eval(ws.adapter_joint.data(), f, ws);
    }

    void eval_jac(const Complex* x, Complex* f, Complex* jac, EvalScratch& ws) const override {
        const int m = n_ + np_;
        ws.adapter_joint.resize(m);
        std::copy(x, x + n_, ws.adapter_joint.begin());
        std::copy(params_.begin(), params_.end(), ws.adapter_joint.begin() + n_);
        ws.adapter_jac.resize(static_cast<std::size_t>(joint_.neqs()) * m);
        joint_.eval_jac(ws.adapter_joint.data(), f, ws.adapter_jac.data(), ws);
        for (int i = 0; i < joint_.neqs(); ++i)
            std::copy(ws.adapter_jac.data() + static_cast<std::size_t>(i) * m,
                      ws.adapter_jac.data() + static_cast<std::size_t>(i) * m + n_,
                      jac + static_cast<std::size_t>(i) * n_);
    }

private:
    const SystemEval& joint_;
    ComplexPoint params_;
    int np_, n_;
};

// ---------------------------------------------------------------------------
// start systems
// ---------------------------------------------------------------------------

class StartSystem {
public:
    virtual ~StartSystem() = default;
    virtual const SystemEval& eval() const = 0;
    virtual long long path_count() const = 0;
    virtual ComplexPoint start_point(long long index) const = 0;
};

// g_i = x_i^{d_i} - 1, starts at tuples of roots of unity
class TotalDegreeStart final : public StartSystem, public SystemEval {
public:
    explicit TotalDegreeStart(std::vector<int> degrees) : degs_(std::move(degrees)) {
        count_ = 1;
        for (int d : degs_) count_ *= d;
    }

    const SystemEval& eval() const override { return *this; }
    long long path_count() const override { return count_; }

    ComplexPoint start_point(long long index) const override {
        const int n = static_cast<int>(degs_.size());
        ComplexPoint p(n);
        for (int i = 0; i < n; ++i) {
            long long k = index % degs_[i];
            index /= degs_[i];
            double a = 6.283185307179586 * static_cast<double>(k) / degs_[i];
            p[i] = {std::cos(a), std::sin(a)};
        }
        return p;
    }

    int nvars() const override { return static_cast<int>(degs_.size()); }
    int neqs() const override { return static_cast<int>(degs_.size()); }

    void eval(const Complex* x, Complex* f, EvalScratch&) const override {
        for (std::size_t i = 0; i < degs_.size(); ++i) f[i] = ipow(x[i], degs_[i]) - 1.0;
    }

    void eval_jac(const Complex* x, Complex* f, Complex* jac, EvalScratch&) const override {
        const int n = nvars();
        std::fill(jac, jac + static_cast<std::size_t>(n) * n, Complex(0.0));
        for (int i = 0; i < n; ++i) {
            Complex pm1 = ipow(x[i], degs_[i] - 1);
            f[i] = pm1 * x[i] - 1.0;
            jac[static_cast<std::size_t>(i) * n + i] = static_cast<double>(degs_[i]) * pm1;
        }
    }

private:
    static Complex ipow(Complex b, int e) {
        Complex r = 1.0;
        while (e > 0) {
            if (e & 1) r *= b;
            b *= b;
            e >>= 1;
        }
        return r;
    }

    std::vector<int> degs_;
    long long count_ = 1;
};

inline std::unique_ptr<TotalDegreeStart> total_degree_start(const PolySystem& sys) {
    auto degs = total_degrees(sys);
    for (int d : degs)
        if (d < 1) throw std::invalid_argument("total_degree_start: zero-degree equation");
    return std::make_unique<TotalDegreeStart>(std::move(degs));
}

// ---------------------------------------------------------------------------
// Newton polish
// ---------------------------------------------------------------------------

struct RefineResult {
    ComplexPoint point;
    double residual = 0.0;
    double condition_estimate = 0.0;
    int iterations = 0;
};

// Damped Gauss-Newton with a rank-revealing solve, so smooth points of
// positive-dimensional solution sets polish cleanly too. Returns the best
// point seen, its residual, and an SVD condition estimate of the Jacobian.
inline RefineResult newton_refine(const SystemEval& sys, const ComplexPoint& x0, double tol,
                                  int max_iters, EvalScratch& ws) {
    const int n = sys.nvars();
    const int m = sys.neqs();
    Eigen::MatrixXcd J(m, n);
    Eigen::VectorXcd f(m), dx(n);
    ComplexPoint x = x0, best = x0, xt(n);
    std::vector<Complex> jrow(static_cast<std::size_t>(m) * n), fv(m);

    auto eval_res = [&](const ComplexPoint& p) {
        sys.eval(p.data(), fv.data(), ws);
        double s = 0;
        for (int i = 0; i < m; ++i) s += std::norm(fv[i]);
        return std::sqrt(s);
    };

    double best_res = eval_res(x0);
    int it = 0;
    for (; it < max_iters; ++it) {
        sys.eval_jac(x.data(), fv.data(), jrow.data(), ws);
        double cur = 0;
        for (int i = 0; i < m; ++i) {
            f(i) = fv[i];
            cur += std::norm(fv[i]);
            for (int j = 0; j < n; ++j) J(i, j) = jrow[static_cast<std::size_t>(i) * n + j];
        }
        cur = std::sqrt(cur);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(J);
        qr.setThreshold(1e-14);
        dx = qr.solve(f);
        if (!dx.allFinite()) break;

        double lambda = 1.0;
        bool accepted = false;
        for (int h = 0; h < 10; ++h) {
            for (int j = 0; j < n; ++j) xt[j] = x[j] - lambda * dx(j);
            double r = eval_res(xt);
            if (r < cur) {
                x = xt;
                cur = r;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (cur < best_res) {
            best = x;
            best_res = cur;
        }
        if (!accepted) break;
        double nx = 0;
        for (int j = 0; j < n; ++j) nx = std::max(nx, std::abs(x[j]));
        if (lambda * dx.norm() <= tol * (1.0 + nx)) {
            ++it;
            break;
        }
    }

    RefineResult out;
    out.point = best;
    out.residual = best_res;
    out.iterations = it;
    sys.eval_jac(best.data(), fv.data(), jrow.data(), ws);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) J(i, j) = jrow[static_cast<std::size_t>(i) * n + j];
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(J);
    double smin = svd.singularValues().minCoeff();
    double smax = svd.singularValues().maxCoeff();
    out.condition_estimate = (smin > 0) ? smax / smin : std::numeric_limits<double>::infinity();
    return out;
}

inline RefineResult newton_refine(const PolySystem& sys, const ComplexPoint& x0, double tol = 1e-11,
                                  int max_iters = 40) {
    CompiledSystem cs(sys);
    EvalScratch ws;
    return newton_refine(cs, x0, tol, max_iters, ws);
}

// ---------------------------------------------------------------------------
// the tracker
// ---------------------------------------------------------------------------

namespace detail {

// one adaptive step: RK4 predictor on the Davidenko field dx/dt = -Jx^{-1} Ht,
// then a short Newton corrector at the new t. Returns false when the corrector
// fails or the linear algebra breaks down; x is updated only on success.
inline bool predict_correct(const HomotopyEval& hom, ComplexPoint& x, double t, double t2,
                            const TrackerOptions& opt, TrackWorkspace& w) {
    const int n = hom.dim();
    const double dt = t2 - t;  // negative

    auto velocity = [&](const ComplexPoint& at, double ts, ComplexPoint& k) -> bool {
        hom.eval_all(at.data(), ts, w.h.data(), w.J.data(), w.ht.data(), w);
        w.lu.compute(w.J);
        w.dx = w.lu.solve(-Eigen::Map<const Eigen::VectorXcd>(w.ht.data(), n));
        if (!w.dx.allFinite()) return false;
        for (int i = 0; i < n; ++i) k[i] = w.dx(i);
        return true;
    };

    if (!velocity(x, t, w.k1)) return false;
    for (int i = 0; i < n; ++i) w.xs[i] = x[i] + (0.5 * dt) * w.k1[i];
    if (!velocity(w.xs, t + 0.5 * dt, w.k2)) return false;
    for (int i = 0; i < n; ++i) w.xs[i] = x[i] + (0.5 * dt) * w.k2[i];
    if (!velocity(w.xs, t + 0.5 * dt, w.k3)) return false;
    for (int i = 0; i < n; ++i) w.xs[i] = x[i] + dt * w.k3[i];
    if (!velocity(w.xs, t2, w.k4)) return false;
    for (int i = 0; i < n; ++i)
        w.xc[i] = x[i] + (dt / 6.0) * (w.k1[i] + 2.0 * w.k2[i] + 2.0 * w.k3[i] + w.k4[i]);

    for (int iter = 0; iter < opt.max_corrector_iters; ++iter) {
        hom.eval_all(w.xc.data(), t2, w.h.data(), w.J.data(), w.ht.data(), w);
        w.lu.compute(w.J);
        w.dx = w.lu.solve(Eigen::Map<const Eigen::VectorXcd>(w.h.data(), n));
        if (!w.dx.allFinite()) return false;
        double ndx = 0, nx = 0;
        for (int i = 0; i < n; ++i) {
            w.xc[i] -= w.dx(i);
            ndx = std::max(ndx, std::abs(w.dx(i)));
            nx = std::max(nx, std::abs(w.xc[i]));
        }
        if (!std::isfinite(nx)) return false;
        if (ndx <= opt.newton_tol * (1.0 + nx)) {
            x = w.xc;
            return true;
        }
    }
    return false;
}

}  // namespace detail

// Tracks one path of `hom` from t=1 to t=0 and polishes the endpoint against
// the target system (the t=0 slice of the homotopy).
inline PathEndpoint track_core(const HomotopyEval& hom, const SystemEval& target,
                               const ComplexPoint& x0, const TrackerOptions& opt,
                               TrackWorkspace& w) {
    const int n = hom.dim();
    w.resize(n);
    const double t_jump = 1e-6;  // close enough to hand over to the final polish
    const double t_tiny = 1e-4;  // stalls below this still get the polish attempt
    const double t_junk = 1e-2;  // below this a junk_test hit ends the path

    ComplexPoint x = x0;
    double t = 1.0;
    double step = opt.initial_step;
    int streak = 0;
    bool stalled = false;
    PathEndpoint out;

    auto fill_residual = [&](const ComplexPoint& p) {
        ComplexPoint f(target.neqs());
        target.eval(p.data(), f.data(), w.ws);
        return norm2(f);
    };

    while (t > t_jump) {
        double dt = std::min(step, t);
        if (t < opt.endgame_start) dt = std::min(dt, std::max(0.5 * t, 100 * opt.min_step));
        double t2 = t - dt;
        if (t2 < t_jump) t2 = t_jump;

        if (detail::predict_correct(hom, x, t, t2, opt, w)) {
            t = t2;
            if (norm_inf(x) > opt.infinity_norm_cutoff) {
                out.status = PathStatus::diverged_to_infinity;
                out.point = x;
                out.t_final = t;
                out.residual = fill_residual(x);
                return out;
            }
            if (t < t_junk && opt.junk_test && opt.junk_test(x.data())) {
                out.status = PathStatus::truncated_junk;
                out.point = x;
                out.t_final = t;
                return out;
            }
            if (++streak >= 2) {
                step = std::min(step * 2.0, opt.initial_step);
                streak = 0;
            }
        } else {
            step *= 0.4;
            streak = 0;
            if (step < opt.min_step) {
                if (t <= t_tiny) {
                    stalled = true;
                    break;
                }
                out.point = x;
                out.t_final = t;
                out.residual = fill_residual(x);
                out.status = (norm2(x) >= 1e6) ? PathStatus::diverged_to_infinity
                                               : PathStatus::step_failure;
                return out;
            }
        }
    }

    if (opt.junk_test && opt.junk_test(x.data())) {
        out.status = PathStatus::truncated_junk;
        out.point = x;
        out.t_final = t;
        return out;
    }
    RefineResult ref = newton_refine(target, x, opt.newton_tol, 50, w.ws);
    out.point = ref.point;
    out.residual = ref.residual;
    out.condition_estimate = ref.condition_estimate;
    out.winding_flagged = stalled;
    out.t_final = 0.0;
    double np = norm2(ref.point);
    // A polish that moved the point far from where tracking stopped has
    // jumped basins; those paths were heading to infinity, not to this root.
    double drift = dist2(ref.point, x);
    bool anchored = drift <= 0.25 * (1.0 + norm2(x));
    if (finite(ref.point) && anchored &&
        ref.residual <= 100.0 * opt.newton_tol * (1.0 + np)) {
        out.status = PathStatus::success;
    } else if (!finite(ref.point) || norm2(x) >= 1e3) {
        out.status = PathStatus::diverged_to_infinity;
        out.point = x;
        out.residual = fill_residual(x);
        out.condition_estimate = 0.0;
    } else {
        out.status = PathStatus::step_failure;
    }
    return out;
}

inline PathEndpoint track_path(const PolySystem& start, const PolySystem& target, Complex gamma,
                               const ComplexPoint& x0, const TrackerOptions& opt = {}) {
    CompiledSystem cs_start(start), cs_target(target);
    LinearBlendHomotopy h(cs_start, cs_target, gamma);
    TrackWorkspace w;
    return track_core(h, cs_target, x0, opt, w);
}

// ---------------------------------------------------------------------------
// parallel map over paths (deterministic: results land by index)
// ---------------------------------------------------------------------------

inline void parallel_for(long long count, int threads,
                         const std::function<void(long long, int)>& fn) {
    threads = std::max(1, threads);
    if (threads == 1 || count <= 1) {
        for (long long i = 0; i < count; ++i) fn(i, 0);
        return;
    }
    std::atomic<long long> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w]() {
            for (;;) {
                long long i = next.fetch_add(1);
                if (i >= count) return;
                fn(i, w);
            }
        });
    }
    for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------------------
// endpoint clustering
// ---------------------------------------------------------------------------

namespace detail {

class UnionFind {
public:
    explicit UnionFind(int n) : parent_(n) {
        for (int i = 0; i < n; ++i) parent_[i] = i;
    }
    int find(int a) {
        while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
        return a;
    }
    void unite(int a, int b) { parent_[find(a)] = find(b); }

private:
    std::vector<int> parent_;
};

}  // namespace detail

// Groups successful endpoints into distinct solutions. Distance and reality
// tolerances scale with (1+||p||). When `target` is given, multiplicity
// clusters are re-polished from their centroid: path endpoints around an
// m-fold root spread symmetrically, so the centroid cancels the leading error
// and recovers a sharper representative (and an honest condition estimate).
inline EndpointSet classify_endpoints(std::vector<PathEndpoint> endpoints, Complex gamma,
                                      std::uint64_t seed, double cluster_tol = 1e-6,
                                      double real_tol = 1e-8,
                                      const SystemEval* target = nullptr) {
    EndpointSet out;
    out.gamma = gamma;
    out.seed = seed;
    out.cluster_tol = cluster_tol;
    out.real_tol = real_tol;

    std::vector<int> ok;
    for (int i = 0; i < static_cast<int>(endpoints.size()); ++i)
        if (endpoints[i].status == PathStatus::success) ok.push_back(i);

    const int m = static_cast<int>(ok.size());
    std::vector<double> key(m);
    for (int a = 0; a < m; ++a) {
        double s = 0;
        for (const auto& c : endpoints[ok[a]].point) s += std::abs(c.real()) + std::abs(c.imag());
        key[a] = s;
    }
    std::vector<int> order(m);
    for (int a = 0; a < m; ++a) order[a] = a;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return key[a] < key[b]; });

    detail::UnionFind uf(m);
    for (int qi = 0; qi < m; ++qi) {
        int a = order[qi];
        const auto& pa = endpoints[ok[a]].point;
        double na = norm2(pa);
        double width = 4.0 * std::sqrt(static_cast<double>(pa.size()) + 1.0) * cluster_tol *
                       (1.0 + key[a]);
        for (int qj = qi + 1; qj < m; ++qj) {
            int b = order[qj];
            if (key[b] - key[a] > width) break;
            const auto& pb = endpoints[ok[b]].point;
            double tol = cluster_tol * (1.0 + std::min(na, norm2(pb)));
            if (dist2(pa, pb) <= tol) uf.unite(a, b);
        }
    }

    std::map<int, std::vector<int>> clusters;  // find-root -> contributing path indices
    for (int a = 0; a < m; ++a) clusters[uf.find(a)].push_back(ok[a]);

    EvalScratch ws;
    for (auto& [root, members] : clusters) {
        std::sort(members.begin(), members.end());
        int best = members[0];
        for (int idx : members)
            if (endpoints[idx].residual < endpoints[best].residual) best = idx;

        DistinctSolution d;
        d.rep = endpoints[best].point;
        d.multiplicity = static_cast<int>(members.size());
        d.residual = endpoints[best].residual;
        d.condition_estimate = endpoints[best].condition_estimate;
        d.paths = members;

        if (target && d.multiplicity > 1) {
            ComplexPoint centroid(d.rep.size(), Complex(0.0));
            for (int idx : members)
                for (std::size_t j = 0; j < centroid.size(); ++j)
                    centroid[j] += endpoints[idx].point[j];
            for (auto& c : centroid) c /= static_cast<double>(members.size());
            RefineResult ref = newton_refine(*target, centroid, 1e-14, 30, ws);
            if (ref.residual <= d.residual * (1.0 + 1e-9)) {
                d.rep = ref.point;
                d.residual = ref.residual;
                d.condition_estimate = ref.condition_estimate;
            }
        }

        d.is_real = max_imag(d.rep) <= real_tol * (1.0 + norm2(d.rep));
        d.is_singular = d.condition_estimate > 1e12;
        out.distinct.push_back(std::move(d));
    }

    std::sort(out.distinct.begin(), out.distinct.end(),
              [](const DistinctSolution& a, const DistinctSolution& b) {
                  for (std::size_t i = 0; i < std::min(a.rep.size(), b.rep.size()); ++i) {
                      if (a.rep[i].real() != b.rep[i].real()) return a.rep[i].real() < b.rep[i].real();
                      if (a.rep[i].imag() != b.rep[i].imag()) return a.rep[i].imag() < b.rep[i].imag();
                  }
                  return a.rep.size() < b.rep.size();
              });

    out.endpoints = std::move(endpoints);
    return out;
}

// ---------------------------------------------------------------------------
// solvers
// ---------------------------------------------------------------------------

inline EndpointSet solve_with_start(const SystemEval& target, const StartSystem& start,
                                    Complex gamma, const TrackerOptions& opt,
                                    std::uint64_t seed_for_record) {
    const long long total = start.path_count();
    std::vector<PathEndpoint> eps(total);
    const int threads = std::max(1, opt.threads);
    std::vector<TrackWorkspace> wss(threads);
    LinearBlendHomotopy h(start.eval(), target, gamma);
    parallel_for(total, threads, [&](long long i, int worker) {
        ComplexPoint x0 = start.start_point(i);
        eps[i] = track_core(h, target, x0, opt, wss[worker]);
    });
    return classify_endpoints(std::move(eps), gamma, seed_for_record, 1e-6, 1e-8, &target);
}

inline EndpointSet solve_total_degree(const PolySystem& sys, const TrackerOptions& opt = {}) {
    if (sys.neqs() != sys.nvars)
        throw std::invalid_argument("solve_total_degree: system must be square");
    Rng rng(opt.seed);
    Complex gamma = rng.unit_circle();
    auto start = total_degree_start(sys);
    CompiledSystem target(sys);
    return solve_with_start(target, *start, gamma, opt, opt.seed);
}

// Tracks the given start solutions from p_start to p_target along the bent
// parameter arc. The trailing `nparams` variables of joint_sys are the
// parameters; starts[i] produces endpoints[i].
inline EndpointSet parameter_track(const PolySystem& joint_sys, int nparams,
                                   const ComplexPoint& p_start, const ComplexPoint& p_target,
                                   const std::vector<ComplexPoint>& starts,
                                   const TrackerOptions& opt = {}) {
    const int n = joint_sys.nvars - nparams;
    if (joint_sys.neqs() != n)
        throw std::invalid_argument("parameter_track: system must be square in the variables");
    Rng rng(opt.seed);
    Complex gamma = rng.unit_circle();
    CompiledSystem joint(joint_sys);
    ParameterHomotopy h(joint, p_start, p_target, gamma);
    FixedParamsEval target(joint, p_target);

    const long long total = static_cast<long long>(starts.size());
    std::vector<PathEndpoint> eps(total);
    const int threads = std::max(1, opt.threads);
    std::vector<TrackWorkspace> wss(threads);
    parallel_for(total, threads, [&](long long i, int worker) {
        eps[i] = track_core(h, target, starts[i], opt, wss[worker]);
    });
    return classify_endpoints(std::move(eps), gamma, opt.seed, 1e-6, 1e-8, &target);
}

}  // namespace featsize
