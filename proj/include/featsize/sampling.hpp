#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "featsize/feature_reports.hpp"

namespace featsize {

struct Box {
    RealPoint lo;
    RealPoint hi;

    int dim() const { return static_cast<int>(lo.size()); }
    bool contains(const RealPoint& p, double slack = 0.0) const {
        for (std::size_t a = 0; a < lo.size(); ++a)
            if (p[a] < lo[a] - slack || p[a] > hi[a] + slack) return false;
        return true;
    }
};

// Discrete sample of the real variety with its accuracy contract: every point
// lies within `delta` of the variety and every variety point in the box lies
// within `epsilon` of the sample.
struct PointSample {
    std::vector<RealPoint> points;
    double delta = 0.0;
    double epsilon = 0.0;
    Box box;
    int grid_resolution = 0;  // vertices per axis of the generating grid
    std::uint64_t seed = kDefaultSeed;

    SampleView view() const { return SampleView{&points, epsilon, delta}; }
};

struct SampleCheck {
    double max_residual_distance = 0.0;
    double empirical_covering_radius = 0.0;
    bool pass = false;
};

// Uniform spatial hash over a point cloud for nearest-neighbor queries.
// Queries walk outward one cell shell at a time and stop as soon as the best
// distance found is smaller than the nearest unexplored shell.
class PointGrid {
public:
    PointGrid(const std::vector<RealPoint>& pts, double cell)
        : pts_(&pts), cell_(cell > 0 ? cell : 1.0), dim_(pts.empty() ? 0 : int(pts[0].size())) {
        for (std::size_t i = 0; i < pts.size(); ++i) cells_[key(pts[i])].push_back(i);
    }

    // index of the nearest stored point, or -1 for an empty cloud
    long long nearest(const RealPoint& q, double* dist_out = nullptr) const {
        if (pts_->empty()) return -1;
        std::vector<long long> base = coords(q);
        long long best = -1;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (int ring = 0; ring <= 4096; ++ring) {
            // cells at ring m hold points at distance >= (m-1)*cell from q, so
            // once the best is under that floor no farther ring can improve it
            double floor_d = ring > 0 ? (ring - 1) * cell_ : 0.0;
            if (best >= 0 && best_d2 <= floor_d * floor_d) break;
            scan_ring(q, base, ring, best, best_d2);
        }
        if (best < 0) {  // grid walk exhausted (extreme cell/spread ratio)
            for (std::size_t i = 0; i < pts_->size(); ++i) {
                double d2 = 0;
                for (int a = 0; a < dim_; ++a) {
                    double d = (*pts_)[i][a] - q[a];
                    d2 += d * d;
                }
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = static_cast<long long>(i);
                }
            }
        }
        if (dist_out) *dist_out = std::sqrt(best_d2);
        return best;
    }

    bool has_point_within(const RealPoint& q, double r) const {
        double d = 0;
        long long i = nearest(q, &d);
        return i >= 0 && d <= r;
    }

private:
    std::vector<long long> coords(const RealPoint& p) const {
        std::vector<long long> c(dim_);
        for (int a = 0; a < dim_; ++a) c[a] = static_cast<long long>(std::floor(p[a] / cell_));
        return c;
    }

    std::vector<long long> key(const RealPoint& p) const { return coords(p); }

    // visit all cells with Chebyshev distance exactly `ring` from base
    bool scan_ring(const RealPoint& q, const std::vector<long long>& base, int ring,
                   long long& best, double& best_d2) const {
        std::vector<long long> off(dim_, -ring);
        bool any = false;
        for (;;) {
            long long cheb = 0;
            for (int a = 0; a < dim_; ++a) cheb = std::max(cheb, std::llabs(off[a]));
            if (cheb == ring) {
                std::vector<long long> c(dim_);
                for (int a = 0; a < dim_; ++a) c[a] = base[a] + off[a];
                auto it = cells_.find(c);
                if (it != cells_.end()) {
                    any = true;
                    for (std::size_t i : it->second) {
                        double d2 = 0;
                        for (int a = 0; a < dim_; ++a) {
                            double d = (*pts_)[i][a] - q[a];
                            d2 += d * d;
                        }
                        if (d2 < best_d2) {
                            best_d2 = d2;
                            best = static_cast<long long>(i);
                        }
                    }
                }
            }
            int a = 0;
            while (a < dim_ && ++off[a] > ring) off[a++] = -ring;
            if (a == dim_) break;
        }
        return any;
    }

    const std::vector<RealPoint>* pts_;
    double cell_;
    int dim_;
    std::map<std::vector<long long>, std::vector<std::size_t>> cells_;
};

// Gauss-Newton projection of a real point onto the variety. Returns the
// projected point; callers measure |p - project(p)| as the residual distance.
inline RealPoint newton_project(const PolySystem& F, RealPoint p, int max_iters = 50) {
    const int n = F.nvars;
    const int c = static_cast<int>(F.polys.size());
    ComplexPoint z(n);
    Eigen::MatrixXd J(c, n);
    Eigen::VectorXd r(c);
    for (int it = 0; it < max_iters; ++it) {
        for (int a = 0; a < n; ++a) z[a] = Complex(p[a], 0.0);
        double rmax = 0.0;
        for (int m = 0; m < c; ++m) {
            r(m) = F.polys[m].eval(z.data()).real();
            rmax = std::max(rmax, std::abs(r(m)));
            for (int a = 0; a < n; ++a) J(m, a) = F.polys[m].derivative(a).eval(z.data()).real();
        }
        if (rmax < 1e-15) break;
        // minimal-norm step: J J^T y = r, step = J^T y
        Eigen::MatrixXd JJt = J * J.transpose();
        Eigen::VectorXd y = JJt.ldlt().solve(r);
        Eigen::VectorXd step = J.transpose() * y;
        double smax = step.lpNorm<Eigen::Infinity>();
        if (!std::isfinite(smax)) break;
        for (int a = 0; a < n; ++a) p[a] -= step(a);
        if (smax < 1e-15) break;
    }
    return p;
}

inline double residual_distance(const PolySystem& F, const RealPoint& p) {
    RealPoint q = newton_project(F, p);
    double s = 0;
    for (std::size_t a = 0; a < p.size(); ++a) s += (p[a] - q[a]) * (p[a] - q[a]);
    return std::sqrt(s);
}

namespace detail {

inline double eval_real(const Polynomial& f, const RealPoint& p) {
    ComplexPoint z(p.size());
    for (std::size_t a = 0; a < p.size(); ++a) z[a] = Complex(p[a], 0.0);
    return f.eval(z.data()).real();
}

// root of f on the segment [a,b] assuming a sign change, by bisection
inline RealPoint bisect_edge(const Polynomial& f, RealPoint a, RealPoint b, double fa) {
    for (int it = 0; it < 80; ++it) {
        RealPoint mid(a.size());
        for (std::size_t k = 0; k < a.size(); ++k) mid[k] = 0.5 * (a[k] + b[k]);
        double fm = eval_real(f, mid);
        if (fm == 0.0) return mid;
        if ((fm > 0) == (fa > 0)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    RealPoint mid(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) mid[k] = 0.5 * (a[k] + b[k]);
    return mid;
}

// substitute x_axis = value into every polynomial, producing a system in the
// remaining n-1 variables
inline PolySystem slice_system(const PolySystem& F, int axis, double value) {
    const int n = F.nvars;
    PolySystem out;
    out.nvars = n - 1;
    for (const auto& f : F.polys) {
        Polynomial g = Polynomial::constant(n - 1, 0.0);
        for (const auto& t : f.terms()) {
            Complex coeff = t.coeff;
            std::vector<int> e;
            for (int a = 0; a < n; ++a) {
                int ex = t.expo[a];
                if (a == axis) {
                    coeff *= std::pow(Complex(value, 0.0), ex);
                } else {
                    e.push_back(ex);
                }
            }
            g.add_term(coeff, e);
        }
        g.normalize();
        out.polys.push_back(std::move(g));
    }
    out.default_names();
    return out;
}

inline void dedupe_points(std::vector<RealPoint>& pts, double tol) {
    if (pts.empty()) return;
    const int n = static_cast<int>(pts[0].size());
    const double cell = std::max(tol, 1e-12);
    std::map<std::vector<long long>, std::vector<std::size_t>> cells;
    std::vector<RealPoint> out;
    std::vector<long long> c(n), nb(n);
    for (const auto& p : pts) {
        for (int a = 0; a < n; ++a) c[a] = static_cast<long long>(std::floor(p[a] / cell));
        bool dup = false;
        // scan the 3^n neighborhood; tol <= cell so a duplicate must be there
        std::vector<int> off(n, -1);
        for (;;) {
            for (int a = 0; a < n; ++a) nb[a] = c[a] + off[a];
            if (auto it = cells.find(nb); it != cells.end()) {
                for (std::size_t i : it->second) {
                    double d2 = 0;
                    for (int a = 0; a < n; ++a) {
                        double d = out[i][a] - p[a];
                        d2 += d * d;
                    }
                    if (d2 <= tol * tol) {
                        dup = true;
                        break;
                    }
                }
            }
            if (dup) break;
            int a = 0;
            while (a < n && ++off[a] > 1) off[a++] = -1;
            if (a == n) break;
        }
        if (!dup) {
            cells[c].push_back(out.size());
            out.push_back(p);
        }
    }
    pts.swap(out);
}

}  // namespace detail

// Hypersurface and space-curve sampler on a bounding box. Hypersurfaces
// (c = 1, n = 2 or 3) are located by sign changes of F along grid edges and
// refined onto the variety; space curves (c = 2, n = 3) are cut by axis
// slices whose square 2-variable subsystems are solved by continuation.
inline PointSample sample_variety(const PolySystem& F, const Box& box, double epsilon,
                                  double delta, std::uint64_t seed = kDefaultSeed) {
    const int n = F.nvars;
    const int c = static_cast<int>(F.polys.size());
    if (!(epsilon > delta && delta > 0))
        throw std::invalid_argument("sample_variety: need epsilon > delta > 0");
    if (box.dim() != n) throw std::invalid_argument("sample_variety: box dimension mismatch");

    PointSample out;
    out.delta = delta;
    out.epsilon = epsilon;
    out.box = box;
    out.seed = seed;

    if (c == 1 && (n == 2 || n == 3)) {
        const Polynomial& f = F.polys[0];
        double cell = epsilon / (2.0 * std::sqrt(double(n)));
        int res = 1;
        for (int a = 0; a < n; ++a)
            res = std::max(res, int(std::ceil((box.hi[a] - box.lo[a]) / cell)));
        out.grid_resolution = res + 1;
        std::vector<double> step(n);
        for (int a = 0; a < n; ++a) step[a] = (box.hi[a] - box.lo[a]) / res;

        // evaluate f on all grid vertices
        int nz = n == 3 ? res + 1 : 1;
        auto vid = [&](int i, int j, int k) { return (std::size_t(k) * (res + 1) + j) * (res + 1) + i; };
        std::vector<double> val(std::size_t(res + 1) * (res + 1) * nz);
        ComplexPoint z(n);
        for (int k = 0; k < nz; ++k)
            for (int j = 0; j <= res; ++j)
                for (int i = 0; i <= res; ++i) {
                    z[0] = Complex(box.lo[0] + step[0] * i, 0.0);
                    z[1] = Complex(box.lo[1] + step[1] * j, 0.0);
                    if (n == 3) z[2] = Complex(box.lo[2] + step[2] * k, 0.0);
                    val[vid(i, j, k)] = f.eval(z.data()).real();
                }

        auto vertex = [&](int i, int j, int k) {
            RealPoint p(n);
            p[0] = box.lo[0] + step[0] * i;
            p[1] = box.lo[1] + step[1] * j;
            if (n == 3) p[2] = box.lo[2] + step[2] * k;
            return p;
        };
        auto edge = [&](int i0, int j0, int k0, int i1, int j1, int k1) {
            double fa = val[vid(i0, j0, k0)];
            double fb = val[vid(i1, j1, k1)];
            if (fa == 0.0) {
                out.points.push_back(newton_project(F, vertex(i0, j0, k0)));
            } else if ((fa > 0) != (fb > 0)) {
                RealPoint root = detail::bisect_edge(f, vertex(i0, j0, k0), vertex(i1, j1, k1), fa);
                out.points.push_back(newton_project(F, root));
            }
        };
        for (int k = 0; k < nz; ++k)
            for (int j = 0; j <= res; ++j)
                for (int i = 0; i <= res; ++i) {
                    if (i < res) edge(i, j, k, i + 1, j, k);
                    if (j < res) edge(i, j, k, i, j + 1, k);
                    if (n == 3 && k < nz - 1) edge(i, j, k, i, j, k + 1);
                }
    } else if (c == 2 && n == 3) {
        double spacing = epsilon / 2.0;
        TrackerOptions topt;
        topt.seed = seed;
        int res = 1;
        for (int axis = 0; axis < 3; ++axis)
            res = std::max(res, int(std::ceil((box.hi[axis] - box.lo[axis]) / spacing)));
        out.grid_resolution = res + 1;
        for (int axis = 0; axis < 3; ++axis) {
            double step = (box.hi[axis] - box.lo[axis]) / res;
            for (int i = 0; i <= res; ++i) {
                double v = box.lo[axis] + step * i;
                PolySystem sl = detail::slice_system(F, axis, v);
                // a slice that collapses an equation to a constant has either
                // no solutions or a positive-dimensional set; other axes cover it
                bool degenerate = false;
                for (const auto& g : sl.polys)
                    if (g.degree() == 0) degenerate = true;
                if (degenerate) continue;
                EndpointSet es = solve_total_degree(sl, topt);
                for (const auto& ep : es.distinct) {
                    if (max_imag(ep.rep) > 1e-8) continue;
                    RealPoint p(3);
                    int b = 0;
                    for (int a = 0; a < 3; ++a) p[a] = a == axis ? v : ep.rep[b++].real();
                    p = newton_project(F, p);
                    if (box.contains(p, epsilon)) out.points.push_back(p);
                }
            }
        }
    } else {
        throw std::invalid_argument("sample_variety: supported shapes are curves and surfaces in R^2/R^3 (c=1, n=2,3) and space curves (c=2, n=3)");
    }

    // drop stray points that projected outside the box and exact duplicates
    std::vector<RealPoint> in_box;
    for (auto& p : out.points)
        if (box.contains(p, epsilon)) in_box.push_back(std::move(p));
    out.points.swap(in_box);
    detail::dedupe_points(out.points, delta);
    return out;
}

// Empirical check of the sample contract: residuals of the points themselves,
// and covering radius measured against a finer reference sample of the same
// variety. Not a certification; the reference sample has the same blind spots
// as the sampler.
inline SampleCheck verify_sample(const PolySystem& F, const PointSample& sample, int probes = 500,
                                 std::uint64_t seed = kDefaultSeed) {
    SampleCheck rep;
    for (const auto& p : sample.points)
        rep.max_residual_distance = std::max(rep.max_residual_distance, residual_distance(F, p));

    if (!sample.points.empty()) {
        PointSample ref = sample_variety(F, sample.box, sample.epsilon / 4.0,
                                         std::min(sample.delta, sample.epsilon / 100.0), seed + 1);
        std::vector<std::size_t> order(ref.points.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng rng(seed);
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[std::size_t(rng.unit() * i)]);
        std::size_t take = std::min<std::size_t>(probes, order.size());

        PointGrid grid(sample.points, sample.epsilon);
        for (std::size_t t = 0; t < take; ++t) {
            double d = 0;
            grid.nearest(ref.points[order[t]], &d);
            rep.empirical_covering_radius = std::max(rep.empirical_covering_radius, d);
        }
    }
    rep.pass = rep.max_residual_distance <= sample.delta * (1.0 + 1e-9) &&
               rep.empirical_covering_radius <= sample.epsilon * (1.0 + 1e-9);
    return rep;
}

// CSV round trip. Header records the sample contract; rows are plain decimals.
inline void write_points_csv(std::ostream& os, const PointSample& sample) {
    os << "# delta=" << format_double(sample.delta) << ", epsilon=" << format_double(sample.epsilon)
       << "\n";
    for (const auto& p : sample.points) {
        for (std::size_t a = 0; a < p.size(); ++a) {
            if (a) os << ",";
            os << format_double(p[a]);
        }
        os << "\n";
    }
}

inline void write_points_csv(const std::string& path, const PointSample& sample) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    write_points_csv(os, sample);
}

inline PointSample read_points_csv(std::istream& is) {
    PointSample out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto grab = [&](const std::string& tag) {
                auto pos = line.find(tag);
                if (pos == std::string::npos) return 0.0;
                return std::stod(line.substr(pos + tag.size()));
            };
            out.delta = grab("delta=");
            out.epsilon = grab("epsilon=");
            continue;
        }
        RealPoint p;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) p.push_back(std::stod(cell));
        if (!p.empty()) out.points.push_back(std::move(p));
    }
    return out;
}

inline PointSample read_points_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    return read_points_csv(is);
}

}  // namespace featsize
