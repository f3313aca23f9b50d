// Pair-creation operator of the four-ring source: coefficient algebra,
// channel-pair amplitude table, effective pair amplitude and the two-photon
// state.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <map>
#include <utility>

#include "pathghz/errors.hpp"
#include "pathghz/fock.hpp"
#include "pathghz/modes.hpp"
#include "pathghz/params.hpp"
#include "pathghz/spectral.hpp"

namespace pathghz {

// Pump amplitude reaching ring n (two coupler hops plus arm phases and the
// common propagation phase):
//   A1 = (it)^2 e^{i phi1} e^{ik(L1+L2)}     A2 = itr e^{ik(L1+L2)}
//   A3 = r^2 e^{i phi} e^{ik(L1+L2)}         A4 = itr e^{i(phi+phi2)} e^{ik(L1+L2)}
inline Complex a_coeff(int n, double k, const SourceParams& p) {
    const Complex it(0.0, p.t);
    const Complex common = std::exp(Complex(0.0, k * (p.L1 + p.L2) + p.pump_phase));
    switch (n) {
        case 1: return it * it * std::exp(Complex(0.0, p.phi1)) * common;
        case 2: return it * p.r * common;
        case 3: return p.r * p.r * std::exp(Complex(0.0, p.phi)) * common;
        case 4: return it * p.r * std::exp(Complex(0.0, p.phi + p.phi2)) * common;
        default: throw validation_error("a_coeff: ring index must be in [1,4]");
    }
}

// Amplitude for a photon generated in ring n to exit channel p. Block 1
// (rings 1, 2) feeds channels 1, 2; block 2 (rings 3, 4) feeds channels 3, 4
// through the mirror-symmetric output coupler. Unrouted pairs are zero.
inline Complex b_coeff(int n, Channel p, double k, const SourceParams& sp) {
    if (n < 1 || n > 4) throw validation_error("b_coeff: ring index must be in [1,4]");
    const Complex prop = std::exp(Complex(0.0, -k * sp.L3));
    const Complex through(sp.r, 0.0);
    const Complex cross(0.0, sp.t);
    switch (p) {
        case Channel::S1: return n == 1 ? through * prop : (n == 2 ? cross * prop : Complex{});
        case Channel::S2: return n == 2 ? through * prop : (n == 1 ? cross * prop : Complex{});
        case Channel::S3: return n == 3 ? through * prop : (n == 4 ? cross * prop : Complex{});
        case Channel::S4: return n == 4 ? through * prop : (n == 3 ? cross * prop : Complex{});
        default: return Complex{};
    }
}

// Channel pairs the ring arrangement can populate: both photons always exit
// the same block.
inline const std::vector<std::pair<Channel, Channel>>& allowed_channel_pairs() {
    static const std::vector<std::pair<Channel, Channel>> pairs = {
        {Channel::S1, Channel::S1}, {Channel::S2, Channel::S1}, {Channel::S1, Channel::S2},
        {Channel::S2, Channel::S2}, {Channel::S3, Channel::S3}, {Channel::S4, Channel::S3},
        {Channel::S3, Channel::S4}, {Channel::S4, Channel::S4}};
    return pairs;
}

// Normalized per-channel-pair biphoton amplitudes phi_{p,q}(k1,k2).
// raw_norm is the table norm per unit beta_ring before normalization, which
// fixes the effective pair amplitude of the whole source.
struct PairAmplitudeTable {
    KGrid grid;
    std::map<std::pair<Channel, Channel>, Eigen::MatrixXcd> entries;
    double raw_norm = 0.0;

    const Eigen::MatrixXcd* entry(Channel p, Channel q) const {
        auto it = entries.find({p, q});
        return it == entries.end() ? nullptr : &it->second;
    }

    double norm_squared() const {
        double w = grid.measure();
        double n2 = 0.0;
        for (const auto& [pq, m] : entries) n2 += m.cwiseAbs2().sum() * w * w;
        return n2;
    }
};

// phi_{p,q}(k1,k2) = sum_n A_n A_n B_{n,p}(k1) B_{n,q}(k2) * phi_ring(k1,k2),
// normalized so that sum over pairs of the squared table is 1. The pump pair
// product depends only on k1+k2, so it is evaluated at the degenerate point.
inline PairAmplitudeTable pair_amplitudes(const SourceParams& params, const BWFMatrix& bwf,
                                          PsiVariant variant = PsiVariant::direct) {
    params.validate();
    bwf.require_normalized();

    PairAmplitudeTable table;
    table.grid = bwf.grid;
    const int n_bins = bwf.grid.n_bins;
    const double w = bwf.grid.measure();

    for (const auto& pq : allowed_channel_pairs())
        table.entries.emplace(pq, Eigen::MatrixXcd::Zero(n_bins, n_bins));

    double norm2 = 0.0;
    for (auto& [pq, matrix] : table.entries) {
        const auto [p, q] = pq;
        for (int i = 0; i < n_bins; ++i) {
            for (int j = 0; j < n_bins; ++j) {
                const double k1 = bwf.grid.wavevector(i);
                const double k2 = bwf.grid.wavevector(j);
                Complex sum(0.0, 0.0);
                for (int n = 1; n <= 4; ++n) {
                    Complex pump = a_coeff(n, 0.5 * (k1 + k2), params);
                    sum += pump * pump * b_coeff(n, p, k1, params) * b_coeff(n, q, k2, params);
                }
                Complex value = sum * bwf.values(i, j);
                if (variant == PsiVariant::paper)
                    value *= std::exp(
                        Complex(0.0, (k1 + k2) * (params.L1 + params.L2 - params.L3)));
                matrix(i, j) = value;
                norm2 += std::norm(value) * w * w;
            }
        }
    }

    if (norm2 < 1e-300)
        throw validation_error("pair amplitude table vanished for these parameters");
    table.raw_norm = std::sqrt(norm2);
    for (auto& [pq, matrix] : table.entries) matrix /= table.raw_norm;
    return table;
}

// beta so that the normalized table satisfies the overall pair-probability
// budget; |beta|^2 = |beta_ring|^2 / 4 at balanced settings.
inline Complex effective_beta(double table_raw_norm, Complex beta_ring) {
    if (!(table_raw_norm > 0.0))
        throw validation_error("effective_beta: table raw norm must be > 0");
    return beta_ring * table_raw_norm;
}

// C† = (1/sqrt(2)) sum over pairs and bins of phi_{p,q} * w * b†_{k1,p} b†_{k2,q}.
// apply(C†, |vac>) has unit norm for a normalized table.
inline OperatorPoly pair_creation_operator(const PairAmplitudeTable& table) {
    OperatorPoly op(source_universe(table.grid));
    const double w = table.grid.measure();
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (const auto& [pq, matrix] : table.entries) {
        const auto [p, q] = pq;
        for (int i = 0; i < table.grid.n_bins; ++i)
            for (int j = 0; j < table.grid.n_bins; ++j) {
                Complex coeff = inv_sqrt2 * matrix(i, j) * w;
                if (std::abs(coeff) < kCoeffEps) continue;
                ModePowers factors =
                    ModePowers::single(ModeId{p, i}).merged(ModePowers::single(ModeId{q, j}));
                op.add(coeff, CreationMonomial{factors});
            }
    }
    return op;
}

inline KetVector two_photon_state(const SourceParams& params, const BWFMatrix& bwf,
                                  PsiVariant variant = PsiVariant::direct) {
    OperatorPoly op = pair_creation_operator(pair_amplitudes(params, bwf, variant));
    return apply(op, KetVector::vacuum(op.universe()));
}

// Reference Bell state (|1_1 1_2> - |1_3 1_4>)/sqrt(2) with the spectral
// profile of the given BWF. Qubit encoding: channels {1,4} are qubit one,
// {2,3} qubit two, so this is |Psi-> in the logical basis.
inline KetVector bell_psi_minus_reference(const BWFMatrix& bwf) {
    KetVector ket(source_universe(bwf.grid));
    const double w = bwf.grid.measure();
    for (int i = 0; i < bwf.grid.n_bins; ++i)
        for (int j = 0; j < bwf.grid.n_bins; ++j) {
            Complex amp = bwf.values(i, j) * w;
            if (std::abs(amp) < kCoeffEps) continue;
            ket.add(amp, FockBasisState{ModePowers::single(ModeId{Channel::S1, i})
                                            .merged(ModePowers::single(ModeId{Channel::S2, j}))});
            ket.add(-amp, FockBasisState{ModePowers::single(ModeId{Channel::S3, i})
                                             .merged(ModePowers::single(ModeId{Channel::S4, j}))});
        }
    return normalize(ket).first;
}

}  // namespace pathghz
