// Brute-force verifier, kept independent of the analytic pipeline: photon
// histories are enumerated against the declared circuit topology with literal
// amplitude factors, and the truncated exponential is expanded over a dense
// basis with explicit ladder arithmetic. Shares only the basis types and the
// parameter declarations with the modules it certifies.
#pragma once

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pathghz/errors.hpp"
#include "pathghz/fock.hpp"
#include "pathghz/modes.hpp"
#include "pathghz/params.hpp"
#include "pathghz/pipeline.hpp"
#include "pathghz/source.hpp"
#include "pathghz/spectral.hpp"

namespace pathghz::oracle {

// One photon's route: where it was created (ring 1-4, or 0 for an injected
// photon), the component/port choices taken, the terminal mode and the
// resulting amplitude product.
struct History {
    int ring = 0;
    std::vector<std::pair<std::string, std::string>> choices;  // (component, port)
    ModeId terminal{Channel::S1, 0};
    Complex amplitude{1.0, 0.0};
};

namespace detail {

// Source topology (two MZI blocks behind one pump splitter). Pump segments
// multiply e^{+ikL}, generated-photon segments e^{-ikL}; couplers contribute
// r straight through and i*t across.
inline void walk_cross(History& h, const char* component, double t) {
    h.amplitude *= Complex(0.0, t);
    h.choices.emplace_back(component, "cross");
}
inline void walk_through(History& h, const char* component, double r) {
    h.amplitude *= Complex(r, 0.0);
    h.choices.emplace_back(component, "through");
}
inline void walk_phase(History& h, const char* component, double phi) {
    h.amplitude *= std::exp(Complex(0.0, phi));
    h.choices.emplace_back(component, "phase");
}
inline void walk_propagate(History& h, const char* component, double k, double length, int sign) {
    h.amplitude *= std::exp(Complex(0.0, sign * k * length));
    h.choices.emplace_back(component, sign > 0 ? "forward" : "return");
}

}  // namespace detail

// Pump photon of wavevector k travelling from the input to ring `ring`.
inline History pump_history(int ring, double k, const SourceParams& p) {
    History h;
    h.ring = ring;
    detail::walk_phase(h, "laser", p.pump_phase);
    switch (ring) {
        case 1:
            detail::walk_cross(h, "pump_splitter", p.t);
            detail::walk_propagate(h, "L1", k, p.L1, +1);
            detail::walk_cross(h, "block1_coupler", p.t);
            detail::walk_phase(h, "phi1", p.phi1);
            detail::walk_propagate(h, "L2", k, p.L2, +1);
            break;
        case 2:
            detail::walk_cross(h, "pump_splitter", p.t);
            detail::walk_propagate(h, "L1", k, p.L1, +1);
            detail::walk_through(h, "block1_coupler", p.r);
            detail::walk_propagate(h, "L2", k, p.L2, +1);
            break;
        case 3:
            detail::walk_through(h, "pump_splitter", p.r);
            detail::walk_phase(h, "phi", p.phi);
            detail::walk_propagate(h, "L1", k, p.L1, +1);
            detail::walk_through(h, "block2_coupler", p.r);
            detail::walk_propagate(h, "L2", k, p.L2, +1);
            break;
        case 4:
            detail::walk_through(h, "pump_splitter", p.r);
            detail::walk_phase(h, "phi", p.phi);
            detail::walk_propagate(h, "L1", k, p.L1, +1);
            detail::walk_cross(h, "block2_coupler", p.t);
            detail::walk_phase(h, "phi2", p.phi2);
            detail::walk_propagate(h, "L2", k, p.L2, +1);
            break;
        default: throw validation_error("pump_history: ring index must be in [1,4]");
    }
    return h;
}

// Generated photon of wavevector k leaving ring `ring` through the block
// output coupler into `out`. Empty amplitude (no route) stays at zero.
inline History output_history(int ring, Channel out, double k, const SourceParams& p) {
    History h;
    h.ring = ring;
    h.terminal = ModeId{out, 0};
    auto blocked = [&]() {
        h.amplitude = Complex(0.0, 0.0);
        return h;
    };
    switch (ring) {
        case 1:
            if (out == Channel::S1) detail::walk_through(h, "block1_out", p.r);
            else if (out == Channel::S2) detail::walk_cross(h, "block1_out", p.t);
            else return blocked();
            break;
        case 2:
            if (out == Channel::S2) detail::walk_through(h, "block1_out", p.r);
            else if (out == Channel::S1) detail::walk_cross(h, "block1_out", p.t);
            else return blocked();
            break;
        case 3:
            if (out == Channel::S3) detail::walk_through(h, "block2_out", p.r);
            else if (out == Channel::S4) detail::walk_cross(h, "block2_out", p.t);
            else return blocked();
            break;
        case 4:
            if (out == Channel::S4) detail::walk_through(h, "block2_out", p.r);
            else if (out == Channel::S3) detail::walk_cross(h, "block2_out", p.t);
            else return blocked();
            break;
        default: throw validation_error("output_history: ring index must be in [1,4]");
    }
    detail::walk_propagate(h, "L3", k, p.L3, -1);
    return h;
}

// Fan-out routes of one photon from a source channel (literal factors; the
// cross arm carries -i*t and every run to a detector e^{-ikL}).
inline std::vector<History> fanout_histories(Channel source, double k, const FanoutParams& f) {
    auto leg = [&](Channel dest, Complex split, const char* component, const char* port,
                   double length) {
        History h;
        h.terminal = ModeId{dest, 0};
        h.amplitude = split * std::exp(Complex(0.0, -k * length));
        h.choices.emplace_back(component, port);
        return h;
    };
    switch (source) {
        case Channel::S1: return {leg(Channel::T, Complex(1.0, 0.0), "run_T", "straight", f.L_T)};
        case Channel::S2:
            return {leg(Channel::D3_0, Complex(0.0, -f.t1), "fan_coupler1", "cross", f.L_3_0),
                    leg(Channel::D2_0, Complex(f.r1, 0.0), "fan_coupler1", "through", f.L_2_0)};
        case Channel::S3:
            return {leg(Channel::D3_1, Complex(0.0, -f.t2), "fan_coupler2", "cross", f.L_3_1),
                    leg(Channel::D1_1, Complex(f.r2, 0.0), "fan_coupler2", "through", f.L_1_1)};
        case Channel::S4:
            return {leg(Channel::D2_1, Complex(0.0, -f.t3), "fan_coupler3", "cross", f.L_2_1),
                    leg(Channel::D1_0, Complex(f.r3, 0.0), "fan_coupler3", "through", f.L_1_0)};
        default: throw validation_error("fanout_histories: not a source channel");
    }
}

// Re-derivation of the pair amplitude table by summing history products over
// generation sites and port choices. Restricted to single-bin grids.
inline PairAmplitudeTable enumerate_pair_amplitudes(const SourceParams& params,
                                                    const BWFMatrix& bwf) {
    params.validate();
    bwf.require_normalized();
    if (bwf.grid.n_bins != 1)
        throw validation_error("oracle enumerate_pair_amplitudes covers single-bin grids only");
    const double k = bwf.grid.k0;

    PairAmplitudeTable table;
    table.grid = bwf.grid;
    double norm2 = 0.0;
    for (const auto& pq : allowed_channel_pairs()) {
        Complex sum(0.0, 0.0);
        for (int ring = 1; ring <= 4; ++ring) {
            // two pump photons in, two generated photons out
            Complex pump = pump_history(ring, k, params).amplitude;
            Complex out1 = output_history(ring, pq.first, k, params).amplitude;
            Complex out2 = output_history(ring, pq.second, k, params).amplitude;
            sum += pump * pump * out1 * out2;
        }
        Complex value = sum * bwf.values(0, 0);
        table.entries.emplace(pq, Eigen::MatrixXcd::Constant(1, 1, value));
        norm2 += std::norm(value);
    }
    if (norm2 < 1e-300) throw numeric_check_error("oracle: pair amplitude table vanished");
    table.raw_norm = std::sqrt(norm2);
    for (auto& [pq, m] : table.entries) m /= table.raw_norm;
    return table;
}

// The source pair operator already routed to the detectors, built only from
// oracle histories.
inline OperatorPoly detector_pair_operator(const SourceParams& params, const FanoutParams& fanout,
                                           const BWFMatrix& bwf) {
    PairAmplitudeTable table = enumerate_pair_amplitudes(params, bwf);
    OperatorPoly op(detector_universe(bwf.grid));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const double k = bwf.grid.k0;
    for (const auto& [pq, m] : table.entries) {
        Complex base = inv_sqrt2 * m(0, 0);
        if (std::abs(base) < kCoeffEps) continue;
        for (const History& h1 : fanout_histories(pq.first, k, fanout))
            for (const History& h2 : fanout_histories(pq.second, k, fanout)) {
                Complex coeff = base * h1.amplitude * h2.amplitude;
                if (std::abs(coeff) < kCoeffEps) continue;
                op.add(coeff, CreationMonomial{ModePowers::single(h1.terminal).merged(
                                  ModePowers::single(h2.terminal))});
            }
    }
    return op;
}

// Dense state vector over every occupation of the declared modes with at
// most four photons (the truncation order of the expansion).
class DenseKet {
   public:
    explicit DenseKet(ModeUniverse universe) : universe_(std::move(universe)) {
        const auto& chans = universe_.channels();
        const int bins = universe_.grid().n_bins;
        if (chans.size() > 8 || bins > 3)
            throw validation_error(
                "oracle dense basis guard exceeded: " + std::to_string(chans.size()) +
                " channels x " + std::to_string(bins) + " bins (limit 8 x 3)");
        const int slots = universe_.mode_count();
        std::vector<int> occ(slots, 0);
        build(occ, 0, 4);
        comps_.assign(basis_.size(), Complex(0.0, 0.0));
    }

    const ModeUniverse& universe() const { return universe_; }
    std::size_t dimension() const { return basis_.size(); }
    Complex& at(std::size_t i) { return comps_[i]; }
    Complex at(std::size_t i) const { return comps_[i]; }
    const std::vector<int>& occupancy(std::size_t i) const { return basis_[i]; }

    int slot(ModeId m) const {
        const auto& chans = universe_.channels();
        auto it = std::lower_bound(chans.begin(), chans.end(), m.channel);
        if (it == chans.end() || *it != m.channel)
            throw validation_error("oracle: mode outside dense universe: " + mode_name(m));
        return static_cast<int>(it - chans.begin()) * universe_.grid().n_bins + m.kbin;
    }

    ModeId mode_of_slot(int s) const {
        const int bins = universe_.grid().n_bins;
        return ModeId{universe_.channels()[s / bins], s % bins};
    }

    int index_of(const std::vector<int>& occ) const {
        auto it = index_.find(occ);
        return it == index_.end() ? -1 : it->second;
    }

    double norm() const {
        double n2 = 0.0;
        for (const Complex& c : comps_) n2 += std::norm(c);
        return std::sqrt(n2);
    }

   private:
    void build(std::vector<int>& occ, int slot, int budget) {
        if (slot == static_cast<int>(occ.size())) {
            index_[occ] = static_cast<int>(basis_.size());
            basis_.push_back(occ);
            return;
        }
        for (int n = 0; n <= budget; ++n) {
            occ[slot] = n;
            build(occ, slot + 1, budget - n);
        }
        occ[slot] = 0;
    }

    ModeUniverse universe_;
    std::vector<std::vector<int>> basis_;
    std::map<std::vector<int>, int> index_;
    std::vector<Complex> comps_;
};

// One dense application of a creation polynomial with explicit ladder
// factors; targets above four photons fall outside the truncated basis.
inline DenseKet dense_apply(const OperatorPoly& op, const DenseKet& in) {
    DenseKet out(in.universe());
    for (std::size_t i = 0; i < in.dimension(); ++i) {
        Complex amp = in.at(i);
        if (std::abs(amp) == 0.0) continue;
        const std::vector<int>& occ = in.occupancy(i);
        for (const auto& [mono, coeff] : op.terms()) {
            std::vector<int> target = occ;
            double ladder = 1.0;
            for (const auto& [mode, power] : mono.factors.items()) {
                int s = out.slot(mode);
                for (int j = 1; j <= power; ++j) ladder *= static_cast<double>(target[s] + j);
                target[s] += power;
            }
            int idx = out.index_of(target);
            if (idx < 0) continue;
            out.at(idx) += amp * coeff * std::sqrt(ladder);
        }
    }
    return out;
}

// (1 + beta C + (1/2) beta^2 C^2) |vac> over the dense basis.
inline DenseKet dense_expand(const OperatorPoly& pair_op, Complex beta) {
    DenseKet vac(pair_op.universe());
    std::vector<int> empty(pair_op.universe().mode_count(), 0);
    vac.at(vac.index_of(empty)) = Complex(1.0, 0.0);

    DenseKet once = dense_apply(pair_op, vac);
    DenseKet twice = dense_apply(pair_op, once);

    DenseKet out(pair_op.universe());
    for (std::size_t i = 0; i < out.dimension(); ++i)
        out.at(i) = vac.at(i) + beta * once.at(i) + 0.5 * beta * beta * twice.at(i);
    return out;
}

struct CompareReport {
    double max_deviation = 0.0;
    bool pass = false;
};

// Component-wise deviation after aligning the global phase of b onto a.
inline CompareReport compare(const KetVector& a, const DenseKet& b, double tol) {
    if (a.universe() != b.universe())
        throw validation_error("oracle compare: mode universes differ");
    // sparse -> dense index
    std::map<int, Complex> a_dense;
    for (const auto& [state, amp] : a.amplitudes()) {
        std::vector<int> occ(a.universe().mode_count(), 0);
        for (const auto& [mode, n] : state.occupations.items()) occ[b.slot(mode)] = n;
        int idx = b.index_of(occ);
        if (idx < 0)
            throw numeric_check_error("oracle compare: state outside dense basis: " +
                                      state_name(state));
        a_dense[idx] = amp;
    }
    Complex overlap(0.0, 0.0);
    for (const auto& [idx, amp] : a_dense) overlap += std::conj(b.at(idx)) * amp;
    Complex phase =
        std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex(1.0, 0.0);

    double dev = 0.0;
    for (std::size_t i = 0; i < b.dimension(); ++i) {
        auto it = a_dense.find(static_cast<int>(i));
        Complex ai = it == a_dense.end() ? Complex(0.0, 0.0) : it->second;
        dev = std::max(dev, std::abs(ai - phase * b.at(i)));
    }
    return {dev, dev <= tol};
}

// Probability of an exact detection pattern read from the dense vector.
inline double pattern_probability(const DenseKet& ket, const DetectionPattern& pattern) {
    double p = 0.0;
    for (std::size_t i = 0; i < ket.dimension(); ++i) {
        Complex amp = ket.at(i);
        if (std::abs(amp) == 0.0) continue;
        const std::vector<int>& occ = ket.occupancy(i);
        ModePowers powers;
        for (int s = 0; s < static_cast<int>(occ.size()); ++s)
            if (occ[s] > 0) powers = powers.merged(ModePowers::single(ket.mode_of_slot(s), occ[s]));
        if (matches(FockBasisState{powers}, pattern)) p += std::norm(amp);
    }
    return p;
}

// Sum over fan-out histories of |amplitude|^2 for one injected photon; 1 for
// a lossless circuit.
inline double single_photon_history_weight(Channel source, double k, const FanoutParams& f) {
    double total = 0.0;
    for (const History& h : fanout_histories(source, k, f)) total += std::norm(h.amplitude);
    return total;
}

}  // namespace pathghz::oracle
