#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "featsize/tda.hpp"

using namespace featsize;

namespace {

// Independent check of persistent ranks: rank H_l(K_a -> K_b) computed from
// boundary-matrix ranks over F2 by plain Gaussian elimination,
//   rank = [n_l(a) - rank d_l(a)] - [rank d_{l+1}(b) - rank d_{l+1}(b) without
//          the rows present in K_a].
// Shares no code with the reduction in persistence().
int f2_rank(std::vector<std::vector<char>> m) {
    int rank = 0;
    std::size_t rows = m.size();
    if (rows == 0) return 0;
    std::size_t cols = m[0].size();
    for (std::size_t c = 0, r = 0; c < cols && r < rows; ++c) {
        std::size_t piv = r;
        while (piv < rows && !m[piv][c]) ++piv;
        if (piv == rows) continue;
        std::swap(m[piv], m[r]);
        for (std::size_t i = 0; i < rows; ++i)
            if (i != r && m[i][c])
                for (std::size_t j = c; j < cols; ++j) m[i][j] ^= m[r][j];
        ++r;
        ++rank;
    }
    return rank;
}

int brute_persistent_rank(const FilteredComplex& fc, int ell, double a, double b) {
    // simplex indices by dimension, restricted to a sublevel set
    auto collect = [&](int d, double cut) {
        std::vector<int> out;
        for (std::size_t s = 0; s < fc.simplices.size(); ++s)
            if (fc.simplices[s].dim() == d && fc.simplices[s].value <= cut)
                out.push_back(static_cast<int>(s));
        return out;
    };
    auto boundary = [&](const std::vector<int>& rows, const std::vector<int>& cols) {
        std::vector<std::vector<char>> m(rows.size(), std::vector<char>(cols.size(), 0));
        std::map<std::vector<int>, std::size_t> row_of;
        for (std::size_t r = 0; r < rows.size(); ++r) row_of[fc.simplices[rows[r]].verts] = r;
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const auto& verts = fc.simplices[cols[c]].verts;
            for (std::size_t drop = 0; drop < verts.size(); ++drop) {
                std::vector<int> f;
                for (std::size_t t = 0; t < verts.size(); ++t)
                    if (t != drop) f.push_back(verts[t]);
                auto it = row_of.find(f);
                if (it != row_of.end()) m[it->second][c] = 1;
            }
        }
        return m;
    };

    auto ell_a = collect(ell, a);
    auto ellm1_a = collect(ell - 1, a);
    int z_a = static_cast<int>(ell_a.size()) - f2_rank(boundary(ellm1_a, ell_a));

    auto ellp1_b = collect(ell + 1, b);
    auto ell_b = collect(ell, b);
    std::vector<int> ell_b_outside;  // ell-simplices of K_b not in K_a
    for (int s : ell_b)
        if (fc.simplices[s].value > a) ell_b_outside.push_back(s);
    int rank_full = f2_rank(boundary(ell_b, ellp1_b));
    int rank_outside = f2_rank(boundary(ell_b_outside, ellp1_b));
    return z_a - (rank_full - rank_outside);
}

std::vector<RealPoint> random_points(std::mt19937_64& rng, int count, int dim) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<RealPoint> pts(count, RealPoint(dim));
    for (auto& p : pts)
        for (auto& c : p) c = u(rng);
    return pts;
}

std::vector<RealPoint> circle_points(int n, double radius = 1.0) {
    std::vector<RealPoint> pts;
    for (int i = 0; i < n; ++i) {
        double t = 2.0 * M_PI * i / n;
        pts.push_back({radius * std::cos(t), radius * std::sin(t)});
    }
    return pts;
}

PersistenceDiagram random_diagram(std::mt19937_64& rng, int max_points, int essential) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> count(0, max_points);
    PersistenceDiagram d;
    d.by_degree.assign(2, {});
    int m = count(rng);
    for (int i = 0; i < m; ++i) {
        double b = u(rng);
        d.by_degree[1].push_back({b, b + u(rng) + 1e-3});
    }
    for (int i = 0; i < essential; ++i) d.by_degree[1].push_back({u(rng), kInfDeath});
    return d;
}

}  // namespace

TEST_CASE("filtration shapes on pinned configurations") {
    SECTION("unit square corners") {
        std::vector<RealPoint> sq = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        auto fc = vr_filtration(sq, 2, 2.0);
        REQUIRE(fc.simplices.size() == 14);  // 4 vertices, 6 edges, 4 triangles
        auto dgm = persistence(fc);
        REQUIRE(dgm.at(1).size() == 1);
        CHECK(dgm.at(1)[0].birth == Catch::Approx(1.0));
        CHECK(dgm.at(1)[0].death == Catch::Approx(std::sqrt(2.0)));
        REQUIRE(dgm.at(0).size() == 4);
        int finite0 = 0, infinite0 = 0;
        for (const auto& p : dgm.at(0)) {
            CHECK(p.birth == 0.0);
            if (std::isinf(p.death)) ++infinite0;
            else {
                CHECK(p.death == Catch::Approx(1.0));
                ++finite0;
            }
        }
        CHECK(finite0 == 3);
        CHECK(infinite0 == 1);
    }
    SECTION("equilateral triangle fills immediately") {
        double h = std::sqrt(3.0) / 2.0;
        std::vector<RealPoint> tri = {{0, 0}, {1, 0}, {0.5, h}};
        auto fc = vr_filtration(tri, 2, 2.0);
        bool has_triangle = false;
        for (const auto& s : fc.simplices)
            if (s.dim() == 2) {
                has_triangle = true;
                CHECK(s.value == Catch::Approx(1.0));
            }
        CHECK(has_triangle);
        auto dgm = persistence(fc);
        CHECK(dgm.at(1).empty());  // cycle and filler both at value 1
        REQUIRE(dgm.at(0).size() == 3);
    }
    SECTION("two points") {
        std::vector<RealPoint> two = {{0, 0}, {1, 0}};
        auto dgm = persistence(vr_filtration(two, 1, 3.0));
        REQUIRE(dgm.at(0).size() == 2);
        CHECK(dgm.at(0)[0].death == Catch::Approx(1.0));
        CHECK(std::isinf(dgm.at(0)[1].death));
    }
    SECTION("duplicate points collapse with a warning") {
        std::vector<RealPoint> dup = {{0, 0}, {1, 0}, {0, 0}};
        auto fc = vr_filtration(dup, 1, 3.0);
        REQUIRE(fc.warnings.size() == 1);
        CHECK(fc.warnings[0].find("point 2") != std::string::npos);
        auto dgm = persistence(fc);
        CHECK(dgm.at(0).size() == 2);  // same as the deduplicated input
    }
    SECTION("memory guard throws") {
        auto pts = circle_points(12);
        CHECK_THROWS_AS(vr_filtration(pts, 2, 3.0, 10), std::runtime_error);
    }
    SECTION("non-Euclidean distance matrix input") {
        std::vector<std::vector<double>> d = {{0, 1, 2}, {1, 0, 4}, {2, 4, 0}};
        auto fc = filtration_from_distances(d, 2, 5.0);
        double tri_value = -1;
        for (const auto& s : fc.simplices)
            if (s.dim() == 2) tri_value = s.value;
        CHECK(tri_value == Catch::Approx(4.0));
    }
}

TEST_CASE("persistence matches a brute-force rank oracle on random point sets") {
    std::mt19937_64 rng(20260815);
    for (int trial = 0; trial < 50; ++trial) {
        int n = 4 + static_cast<int>(rng() % 5);  // 4..8 points
        auto pts = random_points(rng, n, 2);
        auto fc = vr_filtration(pts, 2, 1.6);
        auto dgm = persistence(fc);

        std::set<double> values;
        for (const auto& s : fc.simplices) values.insert(s.value);
        std::vector<double> cuts(values.begin(), values.end());
        // a few midpoints too, to probe between critical values
        for (std::size_t i = 0; i + 1 < cuts.size() && cuts.size() < 24; i += 3)
            cuts.push_back(0.5 * (cuts[i] + cuts[i + 1]));
        std::sort(cuts.begin(), cuts.end());

        for (std::size_t i = 0; i < cuts.size(); i += 2)
            for (std::size_t j = i + 1; j < cuts.size(); j += 2)
                for (int ell = 0; ell <= 1; ++ell) {
                    int fast = rank_at(dgm, ell, cuts[i], cuts[j]);
                    int slow = brute_persistent_rank(fc, ell, cuts[i], cuts[j]);
                    INFO("trial " << trial << " ell " << ell << " a " << cuts[i] << " b "
                                  << cuts[j]);
                    REQUIRE(fast == slow);
                }
    }
}

TEST_CASE("rank_at is monotone in interval inclusion") {
    std::mt19937_64 rng(77);
    auto pts = random_points(rng, 12, 2);
    auto dgm = persistence(vr_filtration(pts, 2, 1.5));
    std::uniform_real_distribution<double> u(0.0, 1.5);
    for (int t = 0; t < 200; ++t) {
        double v[4] = {u(rng), u(rng), u(rng), u(rng)};
        std::sort(v, v + 4);
        if (!(v[1] < v[2])) continue;
        for (int ell = 0; ell <= 1; ++ell)
            CHECK(rank_at(dgm, ell, v[0], v[3]) <= rank_at(dgm, ell, v[1], v[2]));
    }
}

TEST_CASE("adaptive filtration: constant radius 1/2 reproduces the plain one, scaling divides values") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        auto pts = random_points(rng, 10, 2);
        auto plain = vr_filtration(pts, 2, 1.4);
        auto adapt = adaptive_vr_filtration(pts, std::vector<double>(pts.size(), 0.5), 2, 1.4);
        REQUIRE(plain.simplices.size() == adapt.simplices.size());
        for (std::size_t i = 0; i < plain.simplices.size(); ++i) {
            CHECK(plain.simplices[i].verts == adapt.simplices[i].verts);
            CHECK(plain.simplices[i].value == Catch::Approx(adapt.simplices[i].value).margin(1e-12));
        }

        std::vector<double> r(pts.size());
        std::uniform_real_distribution<double> u(0.2, 2.0);
        for (auto& x : r) x = u(rng);
        double s = 3.0;
        std::vector<double> rs(r);
        for (auto& x : rs) x *= s;
        auto base = adaptive_vr_filtration(pts, r, 2, 2.0);
        auto scaled = adaptive_vr_filtration(pts, rs, 2, 2.0 / s);
        REQUIRE(base.simplices.size() == scaled.simplices.size());
        for (std::size_t i = 0; i < base.simplices.size(); ++i)
            CHECK(scaled.simplices[i].value == Catch::Approx(base.simplices[i].value / s).margin(1e-12));
    }
    CHECK_THROWS_AS(
        adaptive_vr_filtration({{0, 0}, {1, 0}}, std::vector<double>{0.5, 0.0}, 1, 1.0),
        std::invalid_argument);
}

TEST_CASE("inference parameters") {
    SECTION("closed forms at delta = 0") {
        auto p = inference_params(2, 0.0, 0.1);
        CHECK(p.a == Catch::Approx(0.2));
        CHECK(p.b == Catch::Approx(0.4 * std::sqrt(4.0 / 3.0)));
        CHECK(p.delta_prime == Catch::Approx(0.2 / 3.0));
        CHECK(p.validity_threshold == Catch::Approx(2.0 * (0.1 + 0.2 / 3.0)));
    }
    SECTION("adaptive zero-error limit") {
        auto q = adaptive_inference_params(0.05, 0.0, 0.0, 0.0, 1.0, 1.0, 0.05);
        CHECK(q.beta_prime == Catch::Approx(0.05));
        CHECK(q.M_K == Catch::Approx(1.0));
        CHECK(q.M_K_hat == Catch::Approx(1.0));
        CHECK(q.rips_lo == Catch::Approx(0.05));
        CHECK(q.rips_hi == Catch::Approx(0.1));
        CHECK(q.order_check);  // 4a = 0.2 < 1/3
        CHECK(q.retract_check == "external");
    }
    SECTION("published sweep scales are reproduced at printed precision") {
        auto half_ulp_match = [](double computed, double printed, double ulp) {
            return std::abs(computed - printed) <= 0.5 * ulp + 1e-12;
        };
        auto u = subsample_rips_scales(SubsampleKind::uniform, 2, 0.15, 0.15, 0.251);
        CHECK(half_ulp_match(u.a, 0.0753, 1e-4));
        CHECK(half_ulp_match(u.b, 0.348, 1e-3));
        auto l1 = subsample_rips_scales(SubsampleKind::lfs, 2, 0.0046, 0.0019, 0.103);
        CHECK(half_ulp_match(l1.a, 0.0111, 1e-4));
        CHECK(half_ulp_match(l1.b, 0.023, 1e-3));
        auto l2 = subsample_rips_scales(SubsampleKind::lean, 2, 0.0046, 0.009, 0.103);
        CHECK(half_ulp_match(l2.a, 0.018, 1e-3));
        CHECK(half_ulp_match(l2.b, 0.108, 1e-3));
    }
}

TEST_CASE("circle Betti inference") {
    auto pts = circle_points(60);
    std::string warn;
    CHECK(infer_betti(pts, 2, 0.0, 0.15, 1, 1.0, &warn) == 1);
    CHECK(warn.empty());  // 2(eps + delta') = 0.5 < wfs = 1
    CHECK(infer_betti(pts, 2, 0.0, 0.15, 0) == 1);
    // requesting an invalid scale pair warns but still returns the rank
    infer_betti(pts, 2, 0.0, 0.15, 1, 0.4, &warn);
    CHECK(!warn.empty());
}

TEST_CASE("subsample postconditions") {
    std::mt19937_64 rng(4242);
    SECTION("random samples and radius fields") {
        std::uniform_real_distribution<double> u(0.0, 0.6);
        for (int trial = 0; trial < 100; ++trial) {
            auto pts = random_points(rng, 30, 2);
            std::vector<double> s(pts.size());
            for (auto& x : s) x = u(rng);
            auto kept = subsample(pts, s);
            REQUIRE(!kept.empty());
            auto dist = [&](int i, int j) {
                return std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
            };
            // accepted points are pairwise separated by the earlier point's radius
            for (std::size_t i = 0; i < kept.size(); ++i)
                for (std::size_t j = i + 1; j < kept.size(); ++j)
                    CHECK(dist(kept[i], kept[j]) > s[kept[i]]);
            // every deleted point is covered by some accepted point
            std::vector<char> is_kept(pts.size(), 0);
            for (int k : kept) is_kept[k] = 1;
            for (std::size_t q = 0; q < pts.size(); ++q) {
                if (is_kept[q]) continue;
                bool covered = false;
                for (int k : kept)
                    if (dist(k, static_cast<int>(q)) <= s[k]) {
                        covered = true;
                        break;
                    }
                CHECK(covered);
            }
        }
    }
    SECTION("zero radii keep everything") {
        auto pts = random_points(rng, 15, 2);
        auto kept = subsample(pts, std::vector<double>(pts.size(), 0.0));
        CHECK(kept.size() == pts.size());
    }
    SECTION("radius beyond the diameter keeps only the first point") {
        auto pts = random_points(rng, 15, 2);
        auto kept = subsample(pts, std::vector<double>(pts.size(), 10.0));
        REQUIRE(kept.size() == 1);
        CHECK(kept[0] == 0);
    }
    SECTION("pinned collinear example") {
        std::vector<RealPoint> line = {{0}, {1}, {2}, {3}};
        auto kept = subsample(line, std::vector<double>(4, 1.5));
        CHECK(kept == std::vector<int>{0, 2});
    }
}

TEST_CASE("subsample function kinds") {
    std::vector<RealPoint> pts = {{0, 0}, {1, 0}, {2, 0}};
    auto uni = make_subsample_function(SubsampleKind::uniform, 0.5, 0.4);
    CHECK(uni.values(pts) == std::vector<double>{0.2, 0.2, 0.2});
    auto lfs = make_subsample_function(SubsampleKind::lfs, 2.0, std::vector<double>{1.0, 2.0, 3.0});
    CHECK(lfs.values(pts) == std::vector<double>{2.0, 4.0, 6.0});
    CHECK_THROWS_AS(make_subsample_function(SubsampleKind::uniform, 0.5, -1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        make_subsample_function(SubsampleKind::lfs, 0.5, std::vector<double>{1.0, -2.0}),
        std::invalid_argument);
    CHECK_THROWS_AS(make_subsample_function(SubsampleKind::lean, 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("lean set is a usable medial proxy") {
    SECTION("square corners give the center") {
        std::vector<RealPoint> sq = {{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}};
        auto ls = lean_set(sq);
        REQUIRE(!ls.empty());
        for (const auto& m : ls) {
            CHECK(std::abs(m[0]) < 1e-12);
            CHECK(std::abs(m[1]) < 1e-12);
        }
        CHECK(lean_distance(sq, {0.5, 0.5}) == Catch::Approx(std::sqrt(0.5)));
    }
    SECTION("dense circle collapses to its center") {
        auto pts = circle_points(40);
        auto ls = lean_set(pts);
        REQUIRE(!ls.empty());
        for (const auto& m : ls) CHECK(std::hypot(m[0], m[1]) < 1e-9);
        CHECK(lean_distance(pts, {1.0, 0.0}) == Catch::Approx(1.0).margin(1e-9));
    }
}

TEST_CASE("wasserstein distance") {
    PersistenceDiagram a, b, empty;
    a.by_degree = {{}, {{0, 2}}};
    b.by_degree = {{}, {{0, 4}}};
    SECTION("pinned values") {
        CHECK(wasserstein2(a, empty, 1) == Catch::Approx(std::sqrt(2.0)));
        CHECK(wasserstein2(a, b, 1) == Catch::Approx(2.0));
        CHECK(wasserstein2(a, a, 1) == 0.0);
    }
    SECTION("unmatched essential classes give infinity") {
        PersistenceDiagram e;
        e.by_degree = {{}, {{0.5, kInfDeath}}};
        CHECK(std::isinf(wasserstein2(a, e, 1)));
        PersistenceDiagram e2;
        e2.by_degree = {{}, {{0.7, kInfDeath}}};
        CHECK(wasserstein2(e, e2, 1) == Catch::Approx(0.2));
    }
    SECTION("metric axioms on random diagrams") {
        std::mt19937_64 rng(31337);
        for (int t = 0; t < 100; ++t) {
            int ess = static_cast<int>(rng() % 2);
            auto d1 = random_diagram(rng, 10, ess);
            auto d2 = random_diagram(rng, 10, ess);
            auto d3 = random_diagram(rng, 10, ess);
            double w12 = wasserstein2(d1, d2, 1);
            double w21 = wasserstein2(d2, d1, 1);
            double w13 = wasserstein2(d1, d3, 1);
            double w23 = wasserstein2(d2, d3, 1);
            CHECK(w12 == Catch::Approx(w21).margin(1e-9));
            CHECK(wasserstein2(d1, d1, 1) < 1e-12);
            CHECK(w13 <= w12 + w23 + 1e-9);
        }
    }
}

TEST_CASE("sweep scores") {
    // baseline with a clear degree-1 signal, then a weaker and an empty level
    PersistenceDiagram d0, d1, d2;
    d0.by_degree = {{}, {{0.1, 1.1}, {0.2, 0.4}}};   // gap 0.8
    d1.by_degree = {{}, {{0.15, 0.75}, {0.2, 0.3}}}; // gap 0.5
    d2.by_degree = {{}, {}};
    auto rows = scores({0.0, 0.5, 1.0}, {d0, d1, d2}, {40, 25, 10});

    REQUIRE(rows.size() == 3);
    CHECK(rows[0].cost == 40);
    REQUIRE(rows[0].inference.has_value());
    CHECK(*rows[0].inference == Catch::Approx(1.0));
    REQUIRE(rows[0].wasserstein.has_value());
    CHECK(*rows[0].wasserstein == Catch::Approx(0.0));

    CHECK(*rows[1].inference == Catch::Approx(0.5 / 0.8));
    CHECK(*rows[2].inference == Catch::Approx(0.0));
    CHECK(*rows[2].wasserstein == Catch::Approx(1.0));  // empty level normalizes to 1

    CHECK_THROWS_AS(scores({0.5, 1.0}, {d0, d1}, {2, 1}), std::invalid_argument);

    SECTION("death capping keeps ratios finite") {
        PersistenceDiagram e;
        e.by_degree = {{}, {{0.1, kInfDeath}, {0.2, 0.4}}};
        auto capped = cap_deaths(e, 1.0);
        REQUIRE(capped.at(1).size() == 2);
        CHECK(capped.at(1)[0].death == Catch::Approx(1.0));
        auto dropped = cap_deaths(e, 0.2);  // capping at a birth removes that class
        CHECK(dropped.at(1).size() == 1);
        CHECK(dropped.at(1)[0].death == Catch::Approx(0.2));
    }
}
