#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "qdress/dressed.hpp"

using namespace qdress;

namespace {

// Closed-form eigenvalues of the resonant H-driven block with delta = 0:
// the {G, XX} / X_H sector gives {(d - s)/2, 0, (d + s)/2} with
// s = sqrt(d^2 + 2 (hbar Omega)^2), and X_V stays at d.
std::array<double, 4> analytic_resonant_energies(double d, double hbar_omega) {
    const double s = std::sqrt(d * d + 2.0 * hbar_omega * hbar_omega);
    std::array<double, 4> e = {0.5 * (d - s), 0.0, d, 0.5 * (d + s)};
    std::sort(e.begin(), e.end());
    return e;
}

Matrix4cd random_hermitian(std::mt19937& rng, double scale) {
    std::normal_distribution<double> g(0.0, scale);
    Matrix4cd a;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a(i, j) = complexd(g(rng), g(rng));
    return 0.5 * (a + a.adjoint());
}

}  // namespace

TEST_CASE("dress: diagonal input, bare-aligned eigenbasis in the degenerate subspace") {
    SystemParameters p;
    p.binding_energy = 2.1;
    p.fss = 0.2;
    DriveField d = DriveField::pulse(0.0, 14.0);
    DressedFrame f = dress(build_hamiltonian(p, d, 0.0));
    // Sorted energies {0, 0, d - delta/2, d + delta/2}.
    CHECK(f.energies(0) == Catch::Approx(0.0).margin(1e-14));
    CHECK(f.energies(1) == Catch::Approx(0.0).margin(1e-14));
    CHECK(f.energies(2) == Catch::Approx(1.05 - 0.1));
    CHECK(f.energies(3) == Catch::Approx(1.05 + 0.1));
    // Despite the G/XX degeneracy, the mixing matrix is a (permuted) identity.
    for (int i = 0; i < 4; ++i) {
        Eigen::Vector4cd row = f.mixing.row(i);
        int argmax = 0;
        row.cwiseAbs().maxCoeff(&argmax);
        CHECK(std::abs(row(argmax)) == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("dress: resonant driven energies match the closed-form block solution") {
    SystemParameters p;
    p.binding_energy = 2.1;
    p.fss = 0.0;
    DriveField d = DriveField::cw(0.5);
    DressedFrame f = dress(build_hamiltonian(p, d, 0.0));
    auto expected = analytic_resonant_energies(1.05, 0.5);
    for (int i = 0; i < 4; ++i) CHECK(f.energies(i) == Catch::Approx(expected[i]).margin(1e-10));
    // Spot values from the block formula.
    CHECK(f.energies(0) == Catch::Approx(-0.10794945).margin(1e-6));
    CHECK(f.energies(3) == Catch::Approx(1.15794945).margin(1e-6));
    CHECK(f.energies(2) == Catch::Approx(1.05).margin(1e-12));
}

TEST_CASE("dress: X_V eigenvector is untouched by H-polarized driving") {
    SystemParameters p;
    p.fss = 0.0;
    DriveField d = DriveField::cw(0.5);
    DressedFrame f = dress(build_hamiltonian(p, d, 0.0));
    // One dressed state must be exactly |X_V>.
    bool found = false;
    for (int i = 0; i < 4; ++i) {
        if (std::abs(std::abs(f.mixing(i, kXV)) - 1.0) < 1e-12) {
            found = true;
            for (int j = 0; j < 4; ++j)
                if (j != kXV) CHECK(std::abs(f.mixing(i, j)) < 1e-12);
        }
    }
    CHECK(found);
}

TEST_CASE("dress: rejects non-Hermitian input") {
    Matrix4cd h = Matrix4cd::Zero();
    h(0, 1) = 0.5;  // no conjugate partner
    CHECK_THROWS_AS(dress(h), std::invalid_argument);
}

TEST_CASE("dress: eigen-reconstruction on random Hermitian inputs") {
    std::mt19937 rng(42);
    for (int trial = 0; trial < 10000; ++trial) {
        Matrix4cd h = random_hermitian(rng, 2.0);
        DressedFrame f = dress(h);
        Matrix4cd rebuilt = Matrix4cd::Zero();
        for (int i = 0; i < 4; ++i) {
            Eigen::Vector4cd ket = f.mixing.row(i).transpose();
            rebuilt += f.energies(i) * (ket * ket.adjoint());
        }
        REQUIRE((rebuilt - h).cwiseAbs().maxCoeff() < 1e-9);
        // Unit norm and unitarity of the mixing matrix.
        Matrix4cd gram = f.mixing * f.mixing.adjoint();
        REQUIRE((gram - Matrix4cd::Identity()).cwiseAbs().maxCoeff() < 1e-9);
        // Ascending order before tracking.
        for (int i = 1; i < 4; ++i) REQUIRE(f.energies(i) >= f.energies(i - 1) - 1e-12);
    }
}

TEST_CASE("track_branches: constant Hamiltonian keeps the identity permutation") {
    SystemParameters p;
    DriveField d = DriveField::cw(0.4);
    Matrix4cd h = build_hamiltonian(p, d, 0.0);
    std::vector<DressedFrame> frames;
    for (int k = 0; k < 100; ++k) frames.push_back(dress(h, 0.1 * k));
    auto tracked = track_branches(frames);
    for (const auto& f : tracked)
        for (int i = 0; i < 4; ++i) REQUIRE(f.permutation(i) == i);
}

TEST_CASE("track_branches: branch energies return to their initial values after the pulse") {
    SystemParameters p;
    p.fss = 0.0;
    DriveField d = DriveField::pulse(10.0 * M_PI, 14.0);
    std::vector<double> times;
    for (double t = -70.0; t <= 70.0; t += 0.05) times.push_back(t);
    auto tracked = track_branches(dress_sequence(p, d, times));
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(tracked.back().energies(i) - tracked.front().energies(i)) < 1e-6);
    }
    // Branch energies are continuous: no jump larger than the local spacing scale.
    for (std::size_t k = 1; k < tracked.size(); ++k) {
        for (int i = 0; i < 4; ++i) {
            REQUIRE(std::abs(tracked[k].energies(i) - tracked[k - 1].energies(i)) < 0.05);
        }
    }
}

TEST_CASE("track_branches: X_V branch flat to 1e-12 under alpha_V = 0 driving") {
    SystemParameters p;
    p.fss = 0.04;
    DriveField d = DriveField::pulse(6.0 * M_PI, 10.0);
    std::vector<double> times;
    for (double t = -40.0; t <= 40.0; t += 0.05) times.push_back(t);
    auto tracked = track_branches(dress_sequence(p, d, times));
    const double expected = 0.5 * p.binding_energy - 0.5 * p.fss;
    int xv_branch = -1;
    for (int i = 0; i < 4; ++i)
        if (std::abs(std::abs(tracked.front().mixing(i, kXV)) - 1.0) < 1e-10) xv_branch = i;
    REQUIRE(xv_branch >= 0);
    for (const auto& f : tracked) REQUIRE(std::abs(f.energies(xv_branch) - expected) < 1e-12);
}

TEST_CASE("track_branches: output is a permutation of the dress energies at each step") {
    SystemParameters p;
    DriveField d = DriveField::pulse(4.0 * M_PI, 8.0);
    std::vector<double> times;
    for (double t = -30.0; t <= 30.0; t += 0.1) times.push_back(t);
    auto frames = dress_sequence(p, d, times);
    auto tracked = track_branches(frames);
    for (std::size_t k = 0; k < frames.size(); ++k) {
        std::array<bool, 4> used = {false, false, false, false};
        for (int i = 0; i < 4; ++i) {
            int j = tracked[k].permutation(i);
            REQUIRE(!used[j]);
            used[j] = true;
            REQUIRE(tracked[k].energies(i) == Catch::Approx(frames[k].energies(j)).margin(1e-14));
        }
    }
}

TEST_CASE("track_branches: under-sampled sequence raises AmbiguousTracking") {
    SystemParameters p;
    p.fss = 0.0;
    // Two frames whose eigenbases differ by nearly 90 degrees in the G/XX sector.
    DriveField weak = DriveField::cw(1e-6);
    DriveField strong = DriveField::cw(3.0);
    std::vector<DressedFrame> frames;
    frames.push_back(dress(build_hamiltonian(p, weak, 0.0), 0.0));
    frames.push_back(dress(build_hamiltonian(p, strong, 0.0), 1.0));
    CHECK_THROWS_AS(track_branches(frames), AmbiguousTracking);
}

TEST_CASE("track_branches: cw detuning sweep shows an anticrossing at resonance") {
    SystemParameters p;
    p.fss = 0.0;
    const double hbar_omega = 0.3;
    std::vector<DressedFrame> frames;
    std::vector<double> detunings;
    for (double dl = -0.3; dl <= 0.3001; dl += 0.005) {
        detunings.push_back(dl);
        DriveField d = DriveField::cw(hbar_omega, dl);
        frames.push_back(dress(build_hamiltonian(p, d, 0.0), dl));
    }
    auto tracked = track_branches(frames);
    // The smallest gap between adjacent levels stays strictly positive over
    // the whole sweep: shifting and non-shifting branches anticross.
    double min_gap = 1e9;
    for (const auto& f : tracked) {
        Eigen::Vector4d e = f.energies;
        std::sort(e.data(), e.data() + 4);
        for (int i = 1; i < 4; ++i) min_gap = std::min(min_gap, e(i) - e(i - 1));
    }
    CHECK(min_gap > 0.0);
    // At resonance the gap around E = 0 equals (sqrt(d^2 + 2 hO^2) - d)/2.
    const double d0 = 1.05;
    const double expected_gap = 0.5 * (std::sqrt(d0 * d0 + 2.0 * hbar_omega * hbar_omega) - d0);
    std::size_t res_idx = 0;
    for (std::size_t k = 0; k < detunings.size(); ++k)
        if (std::abs(detunings[k]) < 2.5e-3) res_idx = k;
    Eigen::Vector4d e = tracked[res_idx].energies;
    std::sort(e.data(), e.data() + 4);
    CHECK(e(1) - e(0) == Catch::Approx(expected_gap).margin(1e-9));
}

TEST_CASE("transition_catalog: bare-state limit gives the two cascade lines") {
    SystemParameters p;
    p.binding_energy = 2.1;
    p.fss = 0.0;
    DriveField d = DriveField::pulse(0.0, 14.0);
    DressedFrame f = dress(build_hamiltonian(p, d, 0.0));
    auto lines = transition_catalog(f, Polarization::V);
    REQUIRE(lines.size() == 2);
    CHECK(lines.front().energy == Catch::Approx(-1.05));
    CHECK(lines.back().energy == Catch::Approx(1.05));
    CHECK(lines.front().weight == Catch::Approx(1.0));
    CHECK(lines.back().weight == Catch::Approx(1.0));
    CHECK(lines.front().cls == TransitionClass::xx_to_x);
    CHECK(lines.back().cls == TransitionClass::x_to_g);
}

TEST_CASE("transition_catalog: resonant cw drive yields six lines, mirror-symmetric classes") {
    SystemParameters p;
    p.binding_energy = 2.1;
    p.fss = 0.0;
    DriveField d = DriveField::cw(0.5);
    DressedFrame f = dress(build_hamiltonian(p, d, 0.0));
    auto lines = transition_catalog(f, Polarization::V);
    REQUIRE(lines.size() == 6);
    std::vector<double> dark, light;
    for (const auto& l : lines) {
        if (l.cls == TransitionClass::xx_to_x)
            dark.push_back(l.energy);
        else
            light.push_back(l.energy);
    }
    REQUIRE(dark.size() == 3);
    REQUIRE(light.size() == 3);
    std::sort(dark.begin(), dark.end());
    std::sort(light.begin(), light.end());
    for (int i = 0; i < 3; ++i) CHECK(dark[i] == Catch::Approx(-light[2 - i]).margin(1e-9));
}

TEST_CASE("transition_catalog: weights sum to the Frobenius norm of sigma_V") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    SystemParameters p;
    for (int trial = 0; trial < 200; ++trial) {
        p.fss = 0.3 * (u01(rng) - 0.5);
        DriveField d = DriveField::cw(2.0 * u01(rng) + 1e-3, (u01(rng) - 0.5));
        const double angle = 2.0 * M_PI * u01(rng);
        d.alpha_h = std::cos(angle);
        d.alpha_v = std::sin(angle);
        DressedFrame f = dress(build_hamiltonian(p, d, 0.0));
        for (auto pol : {Polarization::H, Polarization::V}) {
            auto lines = transition_catalog(f, pol);
            double sum = 0.0;
            for (const auto& l : lines) sum += l.weight;
            REQUIRE(std::abs(sum - 2.0) < 1e-9);
        }
    }
}
