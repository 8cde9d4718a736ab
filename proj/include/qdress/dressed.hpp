#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "qdress/errors.hpp"
#include "qdress/system.hpp"

namespace qdress {

/// Instantaneous eigen-decomposition of the driven Hamiltonian.
/// Row i of mixing holds the expansion of dressed state psi_i over the bare
/// basis {G, X_H, X_V, XX}. permutation(i) points at the index the branch had
/// in the plain ascending-energy ordering of its own frame (identity until
/// track_branches relabels).
struct DressedFrame {
    double time = 0.0;
    Eigen::Vector4d energies = Eigen::Vector4d::Zero();
    Matrix4cd mixing = Matrix4cd::Identity();
    Eigen::Vector4i permutation = Eigen::Vector4i(0, 1, 2, 3);
};

enum class TransitionClass { xx_to_x, x_to_g };

/// One allowed optical transition between dressed states.
/// energy is the rotating-frame offset E_from - E_to (meV relative to the
/// laser carrier); weight is |<to| sigma_pol |from>|^2.
struct TransitionLine {
    int from_index = 0;
    int to_index = 0;
    double energy = 0.0;
    double weight = 0.0;
    TransitionClass cls = TransitionClass::xx_to_x;
};

namespace detail {

// Re-picks the eigenbasis inside (near-)degenerate clusters so that the
// vectors align with the bare states whenever the cluster subspace allows it.
// This pins the pre-pulse labels of the G/XX pair, which is degenerate at the
// two-photon resonance.
inline void bare_align_degenerate(Eigen::Vector4d& energies, Matrix4cd& vectors /* columns */) {
    const double scale = std::max(1.0, energies.cwiseAbs().maxCoeff());
    const double cluster_tol = 1e-9 * scale;
    int start = 0;
    while (start < 4) {
        int end = start + 1;
        while (end < 4 && energies(end) - energies(end - 1) <= cluster_tol) ++end;
        const int m = end - start;
        if (m >= 2) {
            Eigen::MatrixXcd block = vectors.middleCols(start, m);
            Matrix4cd proj = block * block.adjoint();
            // Rank bare vectors by their weight inside the subspace and
            // orthonormalize their projections (modified Gram-Schmidt).
            std::array<int, 4> order = {0, 1, 2, 3};
            std::array<double, 4> weight;
            for (int b = 0; b < 4; ++b) weight[b] = proj.col(b).norm();
            std::sort(order.begin(), order.end(), [&](int a, int b) { return weight[a] > weight[b]; });
            std::vector<Eigen::Vector4cd> basis;
            for (int b : order) {
                if (static_cast<int>(basis.size()) == m) break;
                Eigen::Vector4cd v = proj.col(b);
                for (const auto& prev : basis) v -= (prev.adjoint() * v)(0) * prev;
                const double norm = v.norm();
                if (norm > 1e-6) basis.push_back(v / norm);
            }
            if (static_cast<int>(basis.size()) == m) {
                for (int k = 0; k < m; ++k) vectors.col(start + k) = basis[k];
            }
        }
        start = end;
    }
}

// Global phase convention: largest-magnitude component real and positive.
inline void fix_phase(Eigen::Ref<Eigen::Vector4cd> v) {
    int argmax = 0;
    v.cwiseAbs().maxCoeff(&argmax);
    const complexd z = v(argmax);
    if (std::abs(z) > 0.0) v *= std::conj(z) / std::abs(z);
}

}  // namespace detail

/// Diagonalizes a Hermitian 4x4 Hamiltonian (meV). Eigenvalues come out
/// ascending; degenerate subspaces are aligned with the bare basis.
inline DressedFrame dress(const Matrix4cd& h, double time = 0.0) {
    if (hermiticity_defect(h) > 1e-9) throw std::invalid_argument("dress: input is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix4cd> es(0.5 * (h + h.adjoint()));
    Eigen::Vector4d energies = es.eigenvalues();
    Matrix4cd vectors = es.eigenvectors();
    detail::bare_align_degenerate(energies, vectors);
    DressedFrame frame;
    frame.time = time;
    frame.energies = energies;
    for (int i = 0; i < 4; ++i) {
        Eigen::Vector4cd v = vectors.col(i);
        detail::fix_phase(v);
        frame.mixing.row(i) = v.transpose();
    }
    return frame;
}

/// Dresses H(t) on a given time grid.
inline std::vector<DressedFrame> dress_sequence(const SystemParameters& params, const DriveField& drive,
                                                const std::vector<double>& times) {
    std::vector<DressedFrame> frames;
    frames.reserve(times.size());
    for (double t : times) frames.push_back(dress(build_hamiltonian(params, drive, t), t));
    return frames;
}

/// Relabels a sequence of frames so that branch i follows the eigenvector
/// with maximal overlap from step to step (energies may cross, vectors do
/// not for this Hamiltonian family). Throws AmbiguousTracking when the best
/// overlap drops to 1/sqrt(2) or below, which signals an under-sampled grid.
inline std::vector<DressedFrame> track_branches(const std::vector<DressedFrame>& frames) {
    std::vector<DressedFrame> tracked;
    tracked.reserve(frames.size());
    if (frames.empty()) return tracked;
    tracked.push_back(frames.front());
    tracked.front().permutation = Eigen::Vector4i(0, 1, 2, 3);
    for (std::size_t k = 1; k < frames.size(); ++k) {
        const DressedFrame& prev = tracked.back();
        const DressedFrame& cur = frames[k];
        Eigen::Matrix4d overlap;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                overlap(i, j) = std::abs((prev.mixing.row(i).conjugate() * cur.mixing.row(j).transpose())(0));
        std::array<int, 4> assign = {-1, -1, -1, -1};
        std::array<bool, 4> row_used = {false, false, false, false};
        std::array<bool, 4> col_used = {false, false, false, false};
        for (int pick = 0; pick < 4; ++pick) {
            int bi = -1, bj = -1;
            double best = -1.0;
            for (int i = 0; i < 4; ++i) {
                if (row_used[i]) continue;
                for (int j = 0; j < 4; ++j) {
                    if (col_used[j]) continue;
                    if (overlap(i, j) > best) {
                        best = overlap(i, j);
                        bi = i;
                        bj = j;
                    }
                }
            }
            if (best <= 1.0 / std::sqrt(2.0))
                throw AmbiguousTracking("track_branches: overlap <= 1/sqrt(2) between steps " +
                                        std::to_string(k - 1) + " and " + std::to_string(k) +
                                        "; refine the time grid");
            assign[bi] = bj;
            row_used[bi] = true;
            col_used[bj] = true;
        }
        DressedFrame out;
        out.time = cur.time;
        for (int i = 0; i < 4; ++i) {
            out.energies(i) = cur.energies(assign[i]);
            out.mixing.row(i) = cur.mixing.row(assign[i]);
            out.permutation(i) = assign[i];
        }
        tracked.push_back(out);
    }
    return tracked;
}

/// All dressed-state transitions with nonzero sigma_pol matrix element.
/// Lines carrying weight below 1e-12 are dropped; lines that coincide in
/// energy and class (exact degeneracies) are merged. Sorted by energy.
inline std::vector<TransitionLine> transition_catalog(const DressedFrame& frame, Polarization detect) {
    const Matrix4cd sigma = polarization_operator(detect);
    Matrix4cd upper = Matrix4cd::Zero();  // |X_pol><XX| part
    const int x = (detect == Polarization::H) ? kXH : kXV;
    upper(x, kXX) = 1.0;
    const Matrix4cd lower = sigma - upper;  // |G><X_pol| part

    std::vector<TransitionLine> lines;
    for (int from = 0; from < 4; ++from) {
        const Eigen::Vector4cd vi = frame.mixing.row(from).transpose();
        for (int to = 0; to < 4; ++to) {
            const Eigen::Vector4cd vf = frame.mixing.row(to).transpose();
            const complexd elem = (vf.adjoint() * sigma * vi)(0);
            const double w = std::norm(elem);
            if (w < 1e-12) continue;
            const complexd via_upper = (vf.adjoint() * upper * vi)(0);
            const complexd via_lower = (vf.adjoint() * lower * vi)(0);
            TransitionLine line;
            line.from_index = from;
            line.to_index = to;
            line.energy = frame.energies(from) - frame.energies(to);
            line.weight = w;
            line.cls = (std::abs(via_upper) >= std::abs(via_lower)) ? TransitionClass::xx_to_x
                                                                    : TransitionClass::x_to_g;
            lines.push_back(line);
        }
    }
    std::sort(lines.begin(), lines.end(), [](const TransitionLine& a, const TransitionLine& b) {
        if (a.energy != b.energy) return a.energy < b.energy;
        return a.cls < b.cls;
    });
    std::vector<TransitionLine> merged;
    for (const auto& l : lines) {
        if (!merged.empty() && std::abs(merged.back().energy - l.energy) < 1e-9 && merged.back().cls == l.cls) {
            merged.back().weight += l.weight;
        } else {
            merged.push_back(l);
        }
    }
    return merged;
}

}  // namespace qdress
