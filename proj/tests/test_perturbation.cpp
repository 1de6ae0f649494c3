#include <catch2/catch_amalgamated.hpp>

#include "omdce/perturbation.hpp"

using namespace omdce;

namespace {

// Independent reconstruction of the two-photon creation element: build the
// displaced bra states as explicit vectors and contract them against a dense
// quadrature matrix, instead of the closed-form ladder recursion the library
// uses. Sector 2 phonons are displaced by -2 beta_i relative to sector 0.
double a_reference(const SystemParams& p, int k, int q, int kp, int qp) {
    const int C = 40;
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(C, C);
    for (int j = 0; j + 1 < C; ++j) {
        X(j, j + 1) = std::sqrt(j + 1.0);
        X(j + 1, j) = std::sqrt(j + 1.0);
    }
    RVec w1 = displaced_fock_state(k, -2.0 * p.beta1(), C);
    RVec w2 = displaced_fock_state(q, -2.0 * p.beta2(), C);
    Eigen::VectorXd e1 = Eigen::VectorXd::Unit(C, kp);
    Eigen::VectorXd e2 = Eigen::VectorXd::Unit(C, qp);
    return std::sqrt(2.0) * (0.5 * p.g_1 * w1.dot(X * e1) * w2.dot(e2)
                             + 0.5 * p.g_2 * w1.dot(e1) * w2.dot(X * e2));
}

SystemParams table_point() {
    SystemParams p;
    p.omega_c = 0.85;
    p.omega_2 = 0.94;
    p.g_1 = 0.1;
    p.g_2 = 0.07;
    return p;
}

} // namespace

TEST_CASE("pair-creation matrix elements against a dense-contraction oracle") {
    auto p = table_point();
    for (int kp = 0; kp < 3; ++kp) {
        for (int qp = 0; qp < 3; ++qp) {
            for (int k = 0; k < 5; ++k) {
                for (int q = 0; q < 5; ++q) {
                    const double got = a_coefficient(p, k, q, kp, qp);
                    const double ref = a_reference(p, k, q, kp, qp);
                    INFO("k=" << k << " q=" << q << " k'=" << kp << " q'=" << qp);
                    REQUIRE(std::abs(got - ref) < 1e-8);
                }
            }
        }
    }
}

TEST_CASE("vacuum-to-vacuum element has a closed form") {
    auto p = table_point();
    const double b1 = p.beta1(), b2 = p.beta2();
    const double expect = -std::sqrt(2.0) * (p.g_1 * b1 + p.g_2 * b2)
                          * std::exp(-2.0 * (b1 * b1 + b2 * b2));
    REQUIRE(std::abs(a_coefficient(p, 0, 0, 0, 0) - expect) < 1e-12);
}

TEST_CASE("A coefficient rejects bad indices") {
    auto p = table_point();
    REQUIRE_THROWS_AS(a_coefficient(p, -1, 0, 0, 0), Error);
    try {
        a_coefficient(p, 64, 0, 0, 0, 64);
        FAIL("expected a truncation error");
    } catch (const Error& e) {
        REQUIRE(e.category() == "truncation");
    }
}

TEST_CASE("exchange coupling is symmetric under swapping the mirrors") {
    SystemParams p1;
    p1.omega_c = 0.85;
    p1.omega_1 = 1.0;
    p1.omega_2 = 0.94;
    p1.g_1 = 0.1;
    p1.g_2 = 0.07;
    SystemParams p2 = p1;
    std::swap(p2.omega_1, p2.omega_2);
    std::swap(p2.g_1, p2.g_2);
    auto c1 = effective_coupling_1phonon(p1);
    auto c2 = effective_coupling_1phonon(p2);
    REQUIRE(std::abs(c1.lambda_10_01 - c2.lambda_10_01) < 1e-12);
    REQUIRE(std::abs(c1.delta_10 - c2.delta_01) < 1e-12);
    REQUIRE(std::abs(c1.delta_01 - c2.delta_10) < 1e-12);
}

TEST_CASE("exchange coupling scales as g squared") {
    SystemParams pa;
    pa.omega_c = 0.85;
    pa.g_1 = 0.01;
    pa.g_2 = 0.01;
    SystemParams pb = pa;
    pb.g_1 = 0.02;
    pb.g_2 = 0.02;
    const double la = effective_coupling_1phonon(pa).lambda_10_01;
    const double lb = effective_coupling_1phonon(pb).lambda_10_01;
    REQUIRE(la != 0.0);
    REQUIRE(std::abs(lb / la - 4.0) < 4.0 * 0.05);
}

TEST_CASE("intermediate-state sum is converged at the default cutoff") {
    auto p = table_point();
    auto c14 = effective_coupling_1phonon(p, 14);
    auto c20 = effective_coupling_1phonon(p, 20);
    REQUIRE(std::abs(c14.lambda_10_01 - c20.lambda_10_01) < 1e-9);
    REQUIRE(std::abs(c14.delta_10 - c20.delta_10) < 1e-9);
    REQUIRE_THROWS_AS(effective_coupling_1phonon(p, 3), Error);
}

TEST_CASE("two-phonon chain structure") {
    auto p = table_point();
    auto c1 = effective_coupling_1phonon(p);
    auto c2 = effective_coupling_2phonon(p);
    REQUIRE(c2.lambda_20_02 == 0.0);
    REQUIRE(std::abs(c2.lambda_20_11 - std::sqrt(2.0) * c1.lambda_10_01) < 1e-14);
    REQUIRE(std::abs(c2.lambda_02_11 - c2.lambda_20_11) < 1e-14);

    // the degenerate three-site chain splits into e - 2|l|, e, e + 2|l|
    SystemParams pr = p;
    pr.omega_2 = 1.0;
    auto sub = two_phonon_subspace(pr);
    auto spec = effective_subspace_spectrum(sub);
    const double lam = std::abs(effective_coupling_1phonon(pr).lambda_10_01);
    REQUIRE(spec.splittings.size() == 2);
    REQUIRE(std::abs(spec.splittings[0] - 2.0 * lam) < 1e-12);
    REQUIRE(std::abs(spec.splittings[1] - 2.0 * lam) < 1e-12);
}

TEST_CASE("resonant one-phonon doublet splits by twice the coupling") {
    SystemParams p;
    p.omega_c = 0.85;
    p.g_1 = 0.1;
    p.g_2 = 0.1;
    auto sub = one_phonon_subspace(p);
    auto spec = effective_subspace_spectrum(sub);
    const double lam = effective_coupling_1phonon(p).lambda_10_01;
    // identical mirrors at omega_2 = omega_1 shift both levels equally, so
    // the full gap is the off-diagonal alone
    REQUIRE(spec.splittings.size() == 1);
    REQUIRE(std::abs(spec.splittings[0] - 2.0 * std::abs(lam)) < 1e-12);
}

TEST_CASE("effective model tracks the exact anticrossing") {
    auto s = make_space(6, 6, 6);
    SystemParams p;
    p.omega_c = 0.85;
    p.g_1 = 0.05;
    p.g_2 = 0.05;
    auto rows = compare_perturbation_vs_numerics(s, {p}, 0.95, 1.05);
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].numerical_gap > 0.0);
    REQUIRE(rows[0].rel_deviation < 0.10);
}

TEST_CASE("an intermediate state degenerate with the subspace is refused") {
    SystemParams p;
    p.omega_c = 0.5; // two-photon cost exactly one phonon quantum
    try {
        effective_coupling_1phonon(p);
        FAIL("expected a resonance error");
    } catch (const Error& e) {
        REQUIRE(e.category() == "resonance");
    }
}

TEST_CASE("platform coupling estimate") {
    REQUIRE(std::abs(platform_coupling_estimate(0.02, 1.0, 5.0) - 0.0016) < 1e-15);
    REQUIRE_THROWS_AS(platform_coupling_estimate(0.02, 1.0, 0.0), Error);
}
