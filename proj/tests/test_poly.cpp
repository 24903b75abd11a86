#include <catch2/catch_amalgamated.hpp>

#include "featsize/evaluator.hpp"
#include "featsize/poly.hpp"

using namespace featsize;

namespace {

Polynomial random_poly(Rng& rng, int nvars, int max_deg, int max_terms) {
    Polynomial p(nvars);
    int nterms = 1 + static_cast<int>(rng.unit() * max_terms);
    for (int t = 0; t < nterms; ++t) {
        std::vector<int> e(nvars, 0);
        int budget = static_cast<int>(rng.unit() * (max_deg + 1));
        for (int d = 0; d < budget; ++d) e[static_cast<int>(rng.unit() * nvars)]++;
        double c = std::round(rng.uniform(-8, 8) * 4) / 4;  // exact in binary
        if (c == 0) c = 1;
        p.add_term(c, std::move(e));
    }
    p.normalize();
    return p;
}

}  // namespace

TEST_CASE("parse and evaluate the butterfly curve") {
    auto sys = parse_system("x1^4 - x1^2*x2^2 + x2^4 - 4*x1^2 - 2*x2^2 - x1 - 4*x2 + 1");
    REQUIRE(sys.nvars == 2);
    REQUIRE(sys.polys.size() == 1);
    REQUIRE(total_degrees(sys) == std::vector<int>{4});

    auto v = evaluate(sys, {Complex(0.0), Complex(0.0)});
    REQUIRE(v[0] == Complex(1.0));

    // canonical graded-lex print reproduces the input text exactly
    REQUIRE(to_text(sys.polys[0], sys.var_names) ==
            "x1^4 - x1^2*x2^2 + x2^4 - 4*x1^2 - 2*x2^2 - x1 - 4*x2 + 1");
}

TEST_CASE("circle jacobian at (1,0)") {
    auto sys = parse_system("x1^2 + x2^2 - 1");
    auto J = jacobian(sys, {Complex(1.0), Complex(0.0)});
    REQUIRE(J.size() == 1);
    REQUIRE(J[0][0] == Complex(2.0));
    REQUIRE(J[0][1] == Complex(0.0));
}

TEST_CASE("rational coefficients, comments, blank lines") {
    auto sys = parse_system("# a comment\n1/2*x1^3 - x2\n\nx1 - 2 # trailing\n");
    REQUIRE(sys.polys.size() == 2);
    REQUIRE(total_degrees(sys) == std::vector<int>{3, 1});
    auto v = evaluate(sys, {Complex(2.0), Complex(4.0)});
    REQUIRE(std::abs(v[0]) == 0.0);
    REQUIRE(std::abs(v[1]) == 0.0);
}

TEST_CASE("parenthesized input") {
    auto p = parse_polynomial("(x1 - 1)*(x1 + 1) - (x1^2 - 1)", 1);
    REQUIRE(p.is_zero());
}

TEST_CASE("known roots of a small substitution system") {
    auto sys = parse_system("x1^2 + x2^2 - 5\nx1 - x2 - 1");
    for (auto pt : {ComplexPoint{2.0, 1.0}, ComplexPoint{-1.0, -2.0}}) {
        auto v = evaluate(sys, pt);
        REQUIRE(std::abs(v[0]) < 1e-14);
        REQUIRE(std::abs(v[1]) < 1e-14);
    }
}

TEST_CASE("parse errors are reported") {
    REQUIRE_THROWS_AS(parse_polynomial("x0 + 1", 2), ParseError);
    REQUIRE_THROWS_AS(parse_polynomial("x3 + 1", 2), ParseError);
    REQUIRE_THROWS_AS(parse_polynomial("x1 + + 2 y", 2), ParseError);
    REQUIRE_THROWS_AS(parse_polynomial("x1 ^ -2", 2), ParseError);
    REQUIRE_THROWS(parse_system("   \n# only comments\n"));
}

TEST_CASE("print/parse round trip on random polynomials") {
    Rng rng(7);
    std::vector<std::string> names;
    for (int i = 1; i <= 4; ++i) names.push_back("x" + std::to_string(i));
    for (int iter = 0; iter < 200; ++iter) {
        int nv = 1 + static_cast<int>(rng.unit() * 4);
        Polynomial p = random_poly(rng, nv, 5, 12);
        std::string text = to_text(p, names);
        Polynomial q = parse_polynomial(text, nv);
        q.normalize();
        Polynomial r = p;
        r.normalize();
        REQUIRE(q == r);
    }
}

TEST_CASE("jacobian matches central finite differences") {
    Rng rng(11);
    const double h = 1e-6;
    for (int iter = 0; iter < 60; ++iter) {
        int nv = 2 + static_cast<int>(rng.unit() * 3);
        PolySystem sys;
        sys.nvars = nv;
        sys.default_names();
        int ne = 1 + static_cast<int>(rng.unit() * 3);
        for (int i = 0; i < ne; ++i) sys.polys.push_back(random_poly(rng, nv, 4, 8));

        ComplexPoint x(nv);
        for (auto& c : x) c = Complex(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5));

        auto J = jacobian(sys, x);
        for (int i = 0; i < ne; ++i) {
            for (int v = 0; v < nv; ++v) {
                ComplexPoint xp = x, xm = x;
                xp[v] += h;
                xm[v] -= h;
                Complex fd = (sys.polys[i].eval(xp) - sys.polys[i].eval(xm)) / (2 * h);
                REQUIRE(std::abs(J[i][v] - fd) < 1e-5 * (1.0 + std::abs(J[i][v])));
            }
        }
    }
}

TEST_CASE("compiled evaluator agrees with the symbolic one") {
    Rng rng(13);
    for (int iter = 0; iter < 40; ++iter) {
        int nv = 2 + static_cast<int>(rng.unit() * 4);
        PolySystem sys;
        sys.nvars = nv;
        sys.default_names();
        int ne = 1 + static_cast<int>(rng.unit() * 4);
        for (int i = 0; i < ne; ++i) sys.polys.push_back(random_poly(rng, nv, 6, 14));

        CompiledSystem cs(sys);
        EvalScratch ws;
        ComplexPoint x(nv);
        for (auto& c : x) c = Complex(rng.uniform(-2, 2), rng.uniform(-2, 2));

        ComplexPoint f(ne);
        std::vector<Complex> J(static_cast<std::size_t>(ne) * nv);
        cs.eval_jac(x.data(), f.data(), J.data(), ws);

        auto fref = evaluate(sys, x);
        auto Jref = jacobian(sys, x);
        for (int i = 0; i < ne; ++i) {
            REQUIRE(std::abs(f[i] - fref[i]) < 1e-10 * (1.0 + std::abs(fref[i])));
            for (int v = 0; v < nv; ++v)
                REQUIRE(std::abs(J[static_cast<std::size_t>(i) * nv + v] - Jref[i][v]) <
                        1e-10 * (1.0 + std::abs(Jref[i][v])));
        }

        ComplexPoint f2(ne);
        cs.eval(x.data(), f2.data(), ws);
        for (int i = 0; i < ne; ++i) REQUIRE(f2[i] == f[i]);
    }
}

TEST_CASE("evaluate is linear in the coefficient field") {
    Rng rng(17);
    for (int iter = 0; iter < 30; ++iter) {
        Polynomial a = random_poly(rng, 3, 4, 6);
        Polynomial b = random_poly(rng, 3, 4, 6);
        ComplexPoint x = {Complex(rng.uniform(-1, 1), rng.uniform(-1, 1)),
                          Complex(rng.uniform(-1, 1), rng.uniform(-1, 1)),
                          Complex(rng.uniform(-1, 1), rng.uniform(-1, 1))};
        Complex lhs = (a + b).eval(x);
        Complex rhs = a.eval(x) + b.eval(x);
        REQUIRE(std::abs(lhs - rhs) < 1e-11 * (1.0 + std::abs(rhs)));
    }
}

TEST_CASE("substitute composes correctly") {
    // f = x1^2 + x2, substitute x2 -> x1^3 - 1: expect x1^3 + x1^2 - 1
    auto f = parse_polynomial("x1^2 + x2", 2);
    auto g = parse_polynomial("x1^3 - 1", 2);
    auto h = f.substitute(1, g);
    auto expect = parse_polynomial("x1^3 + x1^2 - 1", 2);
    expect.normalize();
    h.normalize();
    REQUIRE(h == expect);
}

TEST_CASE("embed relocates variables") {
    auto sys = parse_system("x1^2 + x2^2 - 1");
    auto big = embed(sys, 5, {1, 3});
    REQUIRE(big.nvars == 5);
    ComplexPoint p = {9.0, 0.6, 9.0, 0.8, 9.0};
    auto v = evaluate(big, p);
    REQUIRE(std::abs(v[0]) < 1e-15);
    REQUIRE(total_degrees(big) == std::vector<int>{2});
}

TEST_CASE("derivative of a product obeys the Leibniz rule") {
    Rng rng(23);
    for (int iter = 0; iter < 20; ++iter) {
        Polynomial a = random_poly(rng, 2, 3, 5);
        Polynomial b = random_poly(rng, 2, 3, 5);
        for (int v = 0; v < 2; ++v) {
            Polynomial lhs = (a * b).derivative(v);
            Polynomial rhs = a.derivative(v) * b + a * b.derivative(v);
            lhs.normalize();
            rhs.normalize();
            REQUIRE(lhs == rhs);
        }
    }
}
