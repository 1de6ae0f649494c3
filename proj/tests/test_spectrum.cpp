#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "omdce/spectrum.hpp"

using namespace omdce;

TEST_CASE("decoupled spectrum is the bare ladder") {
    auto s = make_space(4, 4, 4);
    SystemParams p;
    p.omega_c = 0.7;
    p.omega_2 = 0.94;
    auto es = diagonalize(build_H(s, p), p);
    std::vector<double> bare;
    for (int i = 0; i < s.dim(); ++i) {
        auto [k, q, n] = s.unflat(i);
        bare.push_back(p.omega_c * n + p.omega_1 * k + p.omega_2 * q);
    }
    std::sort(bare.begin(), bare.end());
    for (int i = 0; i < s.dim(); ++i)
        REQUIRE(std::abs(es.energies(i) - bare[i]) < 1e-10);
}

TEST_CASE("polaron formula matches the photon-conserving Hamiltonian exactly") {
    // without the pair term the spectrum is analytic; the mirror cutoffs only
    // have to absorb the displacement, which is tiny at these couplings
    auto s = make_space(4, 10, 10);
    SystemParams p;
    p.omega_c = 0.85;
    p.omega_2 = 0.94;
    p.g_1 = 0.05;
    p.g_2 = 0.05;
    auto es = diagonalize(build_H0(s, p) + build_V_om(s, p), p);
    std::vector<double> expect;
    for (int n = 0; n < 4; ++n)
        for (int k = 0; k < 6; ++k)
            for (int q = 0; q < 6; ++q) expect.push_back(analytic_om_spectrum(p, k, q, n));
    std::sort(expect.begin(), expect.end());
    // the low spectrum must reproduce the formula to solver precision
    for (int j = 0; j < 20; ++j) REQUIRE(std::abs(es.energies(j) - expect[j]) < 1e-9);
}

TEST_CASE("diagonalize validates its input") {
    SystemParams p;
    Mat bad = Mat::Random(6, 6); // not Hermitian
    REQUIRE_THROWS_AS(diagonalize(bad, p), Error);
    Mat rect = Mat::Zero(4, 5);
    REQUIRE_THROWS_AS(diagonalize(rect, p), Error);
}

TEST_CASE("diagonalization is deterministic including eigenvector phases") {
    auto s = make_space(5, 5, 5);
    SystemParams p;
    p.omega_c = 0.495;
    p.g_1 = 0.03;
    p.g_2 = 0.03;
    Mat H = build_H(s, p);
    auto e1 = diagonalize(H, p);
    auto e2 = diagonalize(H, p);
    REQUIRE((e1.states - e2.states).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((e1.energies - e2.energies).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("level curves at zero coupling are straight lines") {
    auto s = make_space(3, 3, 3);
    SystemParams p;
    p.omega_c = 0.7;
    std::vector<double> grid;
    for (int i = 0; i <= 40; ++i) grid.push_back(0.9 + 0.005 * i);
    auto sw = sweep_levels(s, p, grid, 6);
    REQUIRE_FALSE(sw.tracking_degraded);
    // each tracked curve is affine in omega_2: second differences vanish
    for (const auto& curve : sw.level_curves) {
        for (size_t i = 2; i < curve.size(); ++i) {
            const double dd = curve[i] - 2.0 * curve[i - 1] + curve[i - 2];
            REQUIRE(std::abs(dd) < 1e-9);
        }
    }
    // one of the curves is the |0,1,0> level: E - E0 = omega_2 throughout,
    // even after it crosses |1,0,0> at resonance
    bool found = false;
    for (const auto& curve : sw.level_curves) {
        bool match = true;
        for (size_t i = 0; i < grid.size(); ++i)
            if (std::abs(curve[i] - grid[i]) > 1e-9) match = false;
        found = found || match;
    }
    REQUIRE(found);
}

TEST_CASE("sweep rejects a degenerate grid") {
    auto s = make_space(3, 3, 3);
    SystemParams p;
    REQUIRE_THROWS_AS(sweep_levels(s, p, {1.0}, 4), Error);
    REQUIRE_THROWS_AS(sweep_levels(s, p, {1.0, 0.9}, 4), Error);
}

TEST_CASE("one-phonon anticrossing at the strong-coupling point") {
    auto s = make_space(8, 8, 8);
    SystemParams p;
    p.omega_c = 0.85;
    p.g_1 = 0.1;
    p.g_2 = 0.1;
    const std::vector<int> sel{s.flat(1, 0, 0), s.flat(0, 1, 0)};
    auto rep = find_min_splitting(s, p, sel, 0.95, 1.05, 21);
    // the hybridized pair is close to (|100> +- |010>)/sqrt(2); at g=0.1 the
    // polaron dressing shaves a couple percent off the bare-basis overlap
    REQUIRE(rep.hybridization_check[0] > 0.95);
    REQUIRE(rep.hybridization_check[1] > 0.95);
    REQUIRE(rep.gap > 0.019);
    REQUIRE(rep.gap < 0.024);
    REQUIRE(std::abs(rep.omega2_min - 1.0) < 0.02);
}

TEST_CASE("refined minimum does not depend on the coarse grid") {
    auto s = make_space(6, 6, 6);
    SystemParams p;
    p.omega_c = 0.85;
    p.g_1 = 0.05;
    p.g_2 = 0.05;
    const std::vector<int> sel{s.flat(1, 0, 0), s.flat(0, 1, 0)};
    auto rep1 = find_min_splitting(s, p, sel, 0.95, 1.05, 21);
    auto rep2 = find_min_splitting(s, p, sel, 0.95, 1.05, 34);
    REQUIRE(std::abs(rep2.omega2_min - rep1.omega2_min) < 1e-4);
    REQUIRE(std::abs(rep2.gap - rep1.gap) < 1e-8);
}

TEST_CASE("splitting search diagnoses bad brackets") {
    auto s = make_space(4, 4, 4);
    SystemParams p;
    p.omega_c = 0.85;
    p.g_1 = 0.05;
    p.g_2 = 0.05;
    const std::vector<int> sel{s.flat(1, 0, 0), s.flat(0, 1, 0)};
    REQUIRE_THROWS_AS(find_min_splitting(s, p, sel, 1.1, 0.9), Error);
    REQUIRE_THROWS_AS(find_min_splitting(s, p, {s.flat(1, 0, 0)}, 0.9, 1.1), Error);
    // a bracket that misses the crossing ends on an edge
    try {
        find_min_splitting(s, p, sel, 1.05, 1.2, 16);
        FAIL("expected a resonance error");
    } catch (const Error& e) {
        REQUIRE(std::string(e.category()) == "resonance");
    }
}

TEST_CASE("low levels are converged at the working cutoffs") {
    SystemParams p;
    p.omega_c = 0.495;
    p.omega_2 = 0.98;
    p.g_1 = 0.03;
    p.g_2 = 0.03;
    auto e8 = diagonalize(build_H(make_space(8, 8, 8), p), p);
    auto e10 = diagonalize(build_H(make_space(10, 10, 10), p), p);
    for (int j = 0; j < 8; ++j)
        REQUIRE(std::abs((e8.energies(j) - e8.energies(0))
                         - (e10.energies(j) - e10.energies(0))) < 1e-6);
}

TEST_CASE("splitting grows quadratically with the coupling") {
    auto s = make_space(6, 6, 6);
    SystemParams p;
    p.omega_c = 0.85;
    auto table = splitting_vs_coupling(s, p, {0.01, 0.02}, 0.98, 1.02);
    REQUIRE(table.size() == 2);
    const double ratio = table[1].second / table[0].second;
    REQUIRE(std::abs(ratio - 4.0) < 4.0 * 0.15);
}
