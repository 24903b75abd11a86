#include <catch2/catch_amalgamated.hpp>

#include "featsize/homotopy.hpp"
#include "featsize/linear_product.hpp"

using namespace featsize;

namespace {

bool near(const Complex& a, const Complex& b, double tol = 1e-9) {
    return std::abs(a - b) <= tol;
}

// sorted canonical fingerprint of the distinct reps, for cross-seed compares
std::vector<ComplexPoint> reps(const EndpointSet& es) {
    std::vector<ComplexPoint> r;
    for (const auto& d : es.distinct) r.push_back(d.rep);
    return r;
}

}  // namespace

TEST_CASE("total-degree solve of an intersected circle and line") {
    auto sys = parse_system("x1^2 + x2^2 - 5\nx1 - x2 - 1");
    auto es = solve_total_degree(sys);

    REQUIRE(es.endpoints.size() == 2);
    REQUIRE(es.count(PathStatus::success) + es.count(PathStatus::diverged_to_infinity) == 2);
    REQUIRE(es.distinct.size() == 2);

    // canonical sort puts (-1,-2) first
    REQUIRE(near(es.distinct[0].rep[0], {-1.0, 0.0}));
    REQUIRE(near(es.distinct[0].rep[1], {-2.0, 0.0}));
    REQUIRE(near(es.distinct[1].rep[0], {2.0, 0.0}));
    REQUIRE(near(es.distinct[1].rep[1], {1.0, 0.0}));

    for (const auto& d : es.distinct) {
        REQUIRE(d.is_real);
        REQUIRE_FALSE(d.is_singular);
        REQUIRE(d.multiplicity == 1);
    }
    for (const auto& e : es.endpoints) {
        REQUIRE(e.status == PathStatus::success);
        REQUIRE(e.residual <= 1e-8 * (1.0 + norm2(e.point)));
    }
}

TEST_CASE("path counts: successes plus divergences equal the Bezout count") {
    // x1 = +-1, x2 = 1/x1: two finite roots, two paths to infinity
    auto sys = parse_system("x1^2 - 1\nx1*x2 - 1");
    auto es = solve_total_degree(sys);
    REQUIRE(es.endpoints.size() == 4);
    REQUIRE(es.count(PathStatus::success) + es.count(PathStatus::diverged_to_infinity) == 4);
    REQUIRE(es.count(PathStatus::success) == 2);
    REQUIRE(es.distinct.size() == 2);
}

TEST_CASE("distinct solutions are invariant under gamma reseeding") {
    auto sys = parse_system("x1^2 + x2^2 - 5\nx1 - x2 - 1");
    auto base = reps(solve_total_degree(sys));
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        TrackerOptions opt;
        opt.seed = seed;
        auto r = reps(solve_total_degree(sys, opt));
        REQUIRE(r.size() == base.size());
        for (std::size_t i = 0; i < r.size(); ++i)
            for (std::size_t j = 0; j < r[i].size(); ++j)
                REQUIRE(near(r[i][j], base[i][j], 1e-6));
    }
}

TEST_CASE("systems with all-real roots get is_real endpoints") {
    // products of real linear forms
    auto sys = parse_system("(x1 - 1)*(x1 + 2)\n(x2 - 3)*(x2 + 1)");
    auto es = solve_total_degree(sys);
    REQUIRE(es.distinct.size() == 4);
    for (const auto& d : es.distinct) REQUIRE(d.is_real);
}

TEST_CASE("a double root clusters into one singular distinct solution") {
    auto sys = parse_system("(x1 - 1)^2\nx2 - 1");
    auto es = solve_total_degree(sys);
    REQUIRE(es.endpoints.size() == 2);
    REQUIRE(es.distinct.size() == 1);
    REQUIRE(es.distinct[0].multiplicity == 2);
    REQUIRE(es.distinct[0].is_singular);
    REQUIRE(near(es.distinct[0].rep[0], {1.0, 0.0}, 1e-6));
}

TEST_CASE("track_path follows a single root between quadratics") {
    auto start = parse_system("x1^2 - 1");
    auto target = parse_system("x1^2 - 4");
    auto ep = track_path(start, target, Complex(0.8, 0.6), {Complex(1.0)});
    REQUIRE(ep.status == PathStatus::success);
    REQUIRE((near(ep.point[0], {2.0, 0.0}, 1e-9) || near(ep.point[0], {-2.0, 0.0}, 1e-9)));
}

TEST_CASE("parameter_track carries roots along the bent arc") {
    // joint system in (x1, p): x1^2 - p, parameter p moves 1 -> 4
    auto joint = parse_system("x1^2 - x2", 2);
    std::vector<ComplexPoint> starts = {{Complex(1.0)}, {Complex(-1.0)}};
    auto es = parameter_track(joint, 1, {Complex(1.0)}, {Complex(4.0)}, starts);
    REQUIRE(es.endpoints.size() == 2);
    REQUIRE(es.distinct.size() == 2);
    REQUIRE(near(es.distinct[0].rep[0], {-2.0, 0.0}, 1e-9));
    REQUIRE(near(es.distinct[1].rep[0], {2.0, 0.0}, 1e-9));
    // start i lands at endpoint i: same sign convention as the starts
    REQUIRE(near(es.endpoints[0].point[0], {2.0, 0.0}, 1e-9));
    REQUIRE(near(es.endpoints[1].point[0], {-2.0, 0.0}, 1e-9));
}

TEST_CASE("newton_refine polishes to machine accuracy and reports conditioning") {
    auto sys = parse_system("x1^2 + x2^2 - 5\nx1 - x2 - 1");
    auto ref = newton_refine(sys, {Complex(2.05), Complex(0.93)});
    REQUIRE(ref.residual < 1e-12);
    REQUIRE(near(ref.point[0], {2.0, 0.0}, 1e-10));
    REQUIRE(ref.condition_estimate < 1e3);

    // double root: near-singular Jacobian at the polished point
    auto dbl = parse_system("(x1 - 1)^2\nx2 - 1");
    auto refs = newton_refine(dbl, {Complex(1.001), Complex(1.0)});
    REQUIRE(refs.condition_estimate > 1e5);
}

TEST_CASE("newton_refine reaches positive-dimensional zero sets") {
    // underdetermined: one equation, two unknowns; Gauss-Newton lands on the circle
    auto circle = parse_system("x1^2 + x2^2 - 1");
    auto ref = newton_refine(circle, {Complex(1.08), Complex(0.13)});
    REQUIRE(ref.residual < 1e-13);
    double r = std::abs(ref.point[0] * ref.point[0] + ref.point[1] * ref.point[1] - Complex(1.0));
    REQUIRE(r < 1e-13);
}

TEST_CASE("inferred product structures cover and shrink the start count") {
    auto sys = parse_system("x1^2*x2 - 1\nx1^3*x2^2 - 2");
    auto ps = infer_product_structure(sys);
    REQUIRE(structure_covers(ps, sys));
    REQUIRE(ps.eq_factors[0].size() == 3);
    REQUIRE(ps.eq_factors[1].size() == 5);

    Rng rng(kDefaultSeed);
    LinearProductStart start(sys, ps, rng);
    REQUIRE(start.path_count() == 7);  // vs 15 dense paths
    REQUIRE(start.path_count() >= 1);

    auto es = solve_linear_product(sys);
    REQUIRE(es.distinct.size() == 1);
    REQUIRE(near(es.distinct[0].rep[0], {0.5, 0.0}, 1e-9));
    REQUIRE(near(es.distinct[0].rep[1], {4.0, 0.0}, 1e-9));
}

TEST_CASE("linear-product solve matches the total-degree solution set") {
    auto sys = parse_system("x1^2 + x2^2 - 5\nx1 - x2 - 1");
    auto td = reps(solve_total_degree(sys));
    auto lp = reps(solve_linear_product(sys));
    REQUIRE(lp.size() == td.size());
    for (std::size_t i = 0; i < lp.size(); ++i)
        for (std::size_t j = 0; j < lp[i].size(); ++j) REQUIRE(near(lp[i][j], td[i][j], 1e-8));
}

TEST_CASE("linear-product start evaluator agrees with expanded polynomials") {
    auto sys = parse_system("x1^2*x2 - 1\nx1*x2 - 2");
    auto ps = infer_product_structure(sys);
    Rng rng(42);
    LinearProductStart start(sys, ps, rng);

    // expand the product symbolically and compare values and Jacobians
    PolySystem expanded;
    expanded.nvars = 2;
    expanded.default_names();
    {
        Rng rng2(42);  // replay the same coefficients
        ProductStructure ps2 = ps;
        for (const auto& eq : ps2.eq_factors) {
            Polynomial prod = Polynomial::constant(2, 1.0);
            for (const auto& sup : eq) {
                Polynomial form = Polynomial::constant(2, 0.0);
                for (int v : sup) form += Polynomial::variable(2, v, rng2.complex_normal());
                form += Polynomial::constant(2, rng2.complex_normal());
                prod = prod * form;
            }
            expanded.polys.push_back(prod);
        }
    }

    EvalScratch ws;
    Rng prng(4242);
    for (int it = 0; it < 20; ++it) {
        ComplexPoint x = {prng.complex_normal(), prng.complex_normal()};
        ComplexPoint f(2), fref(2);
        std::vector<Complex> J(4), Jref(4);
        start.eval_jac(x.data(), f.data(), J.data(), ws);
        CompiledSystem cs(expanded);
        cs.eval_jac(x.data(), fref.data(), Jref.data(), ws);
        for (int i = 0; i < 2; ++i) {
            REQUIRE(near(f[i], fref[i], 1e-10 * (1 + std::abs(fref[i]))));
            for (int j = 0; j < 2; ++j)
                REQUIRE(near(J[2 * i + j], Jref[2 * i + j], 1e-10 * (1 + std::abs(Jref[2 * i + j]))));
        }
    }

    // every enumerated start point is a root of its start system
    for (long long i = 0; i < start.path_count(); ++i) {
        auto p = start.start_point(i);
        ComplexPoint f(2);
        start.eval(p.data(), f.data(), ws);
        REQUIRE(std::abs(f[0]) < 1e-10);
        REQUIRE(std::abs(f[1]) < 1e-10);
    }
}

TEST_CASE("solver results do not depend on the thread count") {
    auto sys = parse_system("x1^3 - x2\nx1*x2 - 2\n", 2);
    TrackerOptions one, four;
    four.threads = 4;
    auto a = solve_total_degree(sys, one);
    auto b = solve_total_degree(sys, four);
    REQUIRE(a.distinct.size() == b.distinct.size());
    for (std::size_t i = 0; i < a.distinct.size(); ++i)
        for (std::size_t j = 0; j < a.distinct[i].rep.size(); ++j)
            REQUIRE(a.distinct[i].rep[j] == b.distinct[i].rep[j]);
}
