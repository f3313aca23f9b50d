// k-resolved linear components and Heisenberg rewriting of creation
// operators through a circuit.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "pathghz/errors.hpp"
#include "pathghz/fock.hpp"
#include "pathghz/modes.hpp"
#include "pathghz/params.hpp"

namespace pathghz {

// Sign of the cross amplitude: +it on the source side, -it on the detector
// fan-out. Both conventions are unitary; downstream detection probabilities
// are invariant under a global flip.
enum class CouplerSign : int { source = +1, fanout = -1 };

struct DirectionalCoupler {
    double t;
    double r;
    CouplerSign sign = CouplerSign::source;
};

struct PhaseShift {
    double phi;
};

// Propagation over a length; sign selects e^{+ikL} or e^{-ikL}.
struct Delay {
    double length;
    int sign = -1;
};

struct Swap {};

using ComponentSpec = std::variant<DirectionalCoupler, PhaseShift, Delay, Swap>;

// 2x2 (couplers, swap) or 1x1 (phase, delay) unitary at wavevector k.
// Coupler convention: through amplitude r on the diagonal, cross amplitude
// sigma*i*t off the diagonal.
inline Eigen::MatrixXcd component_matrix(const ComponentSpec& spec, double k) {
    return std::visit(
        [k](const auto& s) -> Eigen::MatrixXcd {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, DirectionalCoupler>) {
                require_coupler(s.t, s.r, "directional coupler");
                Eigen::MatrixXcd m(2, 2);
                Complex cross = Complex(0.0, static_cast<int>(s.sign) * s.t);
                m << Complex(s.r, 0.0), cross, cross, Complex(s.r, 0.0);
                return m;
            } else if constexpr (std::is_same_v<S, PhaseShift>) {
                Eigen::MatrixXcd m(1, 1);
                m(0, 0) = std::exp(Complex(0.0, s.phi));
                return m;
            } else if constexpr (std::is_same_v<S, Delay>) {
                require_length(s.length, "delay");
                if (s.sign != 1 && s.sign != -1)
                    throw validation_error("delay sign must be +1 or -1");
                Eigen::MatrixXcd m(1, 1);
                m(0, 0) = std::exp(Complex(0.0, s.sign * k * s.length));
                return m;
            } else {
                Eigen::MatrixXcd m(2, 2);
                m << 0.0, 1.0, 1.0, 0.0;
                return m;
            }
        },
        spec);
}

// k-diagonal linear transformation from input-mode to output-mode creation
// operators: b†_{in,k} -> sum over targets of amp(k) b†_{out,k}.
class ModeMap {
   public:
    struct Target {
        Channel out;
        std::vector<Complex> amp;  // one amplitude per k bin
    };

    ModeMap(ModeUniverse in, ModeUniverse out) : in_(std::move(in)), out_(std::move(out)) {
        if (in_.grid() != out_.grid())
            throw validation_error("mode map: input and output grids differ");
    }

    void add_route(Channel in_channel, Channel out_channel, std::vector<Complex> amp) {
        in_.require(ModeId{in_channel, 0});
        out_.require(ModeId{out_channel, 0});
        if (static_cast<int>(amp.size()) != in_.grid().n_bins)
            throw validation_error("mode map route needs one amplitude per k bin");
        auto& targets = routes_[in_channel];
        for (auto& t : targets)
            if (t.out == out_channel) {
                for (int b = 0; b < static_cast<int>(amp.size()); ++b) t.amp[b] += amp[b];
                return;
            }
        targets.push_back({out_channel, std::move(amp)});
        std::sort(targets.begin(), targets.end(),
                  [](const Target& a, const Target& b) { return a.out < b.out; });
    }

    const std::vector<Target>& routes_for(Channel in_channel) const {
        auto it = routes_.find(in_channel);
        if (it == routes_.end())
            throw validation_error("mode map has no route for channel " +
                                   std::string(channel_name(in_channel)));
        return it->second;
    }

    bool has_route(Channel in_channel) const { return routes_.count(in_channel) != 0; }

    const std::map<Channel, std::vector<Target>>& routes() const { return routes_; }
    const ModeUniverse& in_universe() const { return in_; }
    const ModeUniverse& out_universe() const { return out_; }

   private:
    ModeUniverse in_;
    ModeUniverse out_;
    std::map<Channel, std::vector<Target>> routes_;
};

inline ModeMap identity_map(const ModeUniverse& u) {
    ModeMap m(u, u);
    for (Channel c : u.channels())
        m.add_route(c, c, std::vector<Complex>(u.grid().n_bins, Complex(1.0, 0.0)));
    return m;
}

// Apply `first`, then `then`.
inline ModeMap compose(const ModeMap& first, const ModeMap& then) {
    if (first.out_universe() != then.in_universe())
        throw validation_error("compose: intermediate universes differ");
    ModeMap out(first.in_universe(), then.out_universe());
    const int bins = first.in_universe().grid().n_bins;
    for (const auto& [in_ch, targets] : first.routes()) {
        std::map<Channel, std::vector<Complex>> acc;
        for (const auto& mid : targets) {
            for (const auto& fin : then.routes_for(mid.out)) {
                auto& amp = acc.try_emplace(fin.out, std::vector<Complex>(bins)).first->second;
                for (int b = 0; b < bins; ++b) amp[b] += mid.amp[b] * fin.amp[b];
            }
        }
        for (auto& [out_ch, amp] : acc) out.add_route(in_ch, out_ch, std::move(amp));
    }
    return out;
}

// Reverse map with conjugated amplitudes.
inline ModeMap adjoint(const ModeMap& m) {
    ModeMap out(m.out_universe(), m.in_universe());
    const int bins = m.in_universe().grid().n_bins;
    for (const auto& [in_ch, targets] : m.routes())
        for (const auto& t : targets) {
            std::vector<Complex> amp(bins);
            for (int b = 0; b < bins; ++b) amp[b] = std::conj(t.amp[b]);
            out.add_route(t.out, in_ch, std::move(amp));
        }
    return out;
}

struct UnitarityReport {
    double max_deviation = 0.0;
    bool ok = false;
};

// Columns (images of the mapped inputs) must be orthonormal: for square maps
// this is unitarity, for the 4-into-7 fan-out it is the isometry property.
inline UnitarityReport check_unitary(const ModeMap& map, int kbin, double tol = 1e-12) {
    const auto& ins = map.routes();
    std::vector<Channel> outs;
    for (const auto& [in_ch, targets] : ins)
        for (const auto& t : targets) outs.push_back(t.out);
    std::sort(outs.begin(), outs.end());
    outs.erase(std::unique(outs.begin(), outs.end()), outs.end());

    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<int>(outs.size()),
                                                static_cast<int>(ins.size()));
    int col = 0;
    for (const auto& [in_ch, targets] : ins) {
        for (const auto& t : targets) {
            int row = static_cast<int>(std::lower_bound(outs.begin(), outs.end(), t.out) -
                                       outs.begin());
            m(row, col) = t.amp[kbin];
        }
        ++col;
    }
    Eigen::MatrixXcd gram = m.adjoint() * m;
    double dev = (gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    return {dev, dev <= tol};
}

// Substitute every input creation operator by its image and expand. For
// unitary maps this preserves the norm of apply(op, |vac>).
inline OperatorPoly heisenberg_rewrite(const OperatorPoly& op, const ModeMap& map) {
    if (op.universe() != map.in_universe())
        throw validation_error("heisenberg_rewrite: operator universe does not match map input");
    OperatorPoly out(map.out_universe());
    for (const auto& [mono, coeff] : op.terms()) {
        OperatorPoly term = OperatorPoly::constant(map.out_universe(), coeff);
        for (const auto& [mode, power] : mono.factors.items()) {
            if (!map.has_route(mode.channel))
                throw validation_error("heisenberg_rewrite: no route for mode " + mode_name(mode));
            OperatorPoly subst(map.out_universe());
            for (const auto& t : map.routes_for(mode.channel))
                subst.add(t.amp[mode.kbin],
                          CreationMonomial{ModePowers::single(ModeId{t.out, mode.kbin})});
            for (int j = 0; j < power; ++j) term = term.times(subst);
        }
        out = out + term;
    }
    return out;
}

// Detector fan-out: channel 1 runs straight to T; channels 2, 3, 4 each hit
// one output coupler whose arms run to the detector ports,
//   1 -> T                      with e^{-ik L_T}
//   2 -> D3_0 (cross), D2_0     with -i t1 e^{-ik L_3_0}, r1 e^{-ik L_2_0}
//   3 -> D3_1 (cross), D1_1     with -i t2 e^{-ik L_3_1}, r2 e^{-ik L_1_1}
//   4 -> D2_1 (cross), D1_0     with -i t3 e^{-ik L_2_1}, r3 e^{-ik L_1_0}
// All branches carry e^{-ikL}; the sign flag exists for convention studies.
inline ModeMap build_fanout(const FanoutParams& p, const KGrid& grid,
                            CouplerSign sign = CouplerSign::fanout) {
    p.validate();
    ModeMap map(source_universe(grid), detector_universe(grid));
    const int bins = grid.n_bins;

    auto delayed = [&](Complex base, double length) {
        std::vector<Complex> amp(bins);
        for (int b = 0; b < bins; ++b)
            amp[b] = base * component_matrix(Delay{length, -1}, grid.wavevector(b))(0, 0);
        return amp;
    };
    auto coupler = [&](double t, double r) {
        // k-independent split; entries read off the 2x2 coupler matrix.
        Eigen::MatrixXcd m = component_matrix(DirectionalCoupler{t, r, sign}, 0.0);
        return std::pair<Complex, Complex>{m(0, 0), m(1, 0)};  // through, cross
    };

    map.add_route(Channel::S1, Channel::T, delayed(Complex(1.0, 0.0), p.L_T));

    auto [thru1, cross1] = coupler(p.t1, p.r1);
    map.add_route(Channel::S2, Channel::D3_0, delayed(cross1, p.L_3_0));
    map.add_route(Channel::S2, Channel::D2_0, delayed(thru1, p.L_2_0));

    auto [thru2, cross2] = coupler(p.t2, p.r2);
    map.add_route(Channel::S3, Channel::D3_1, delayed(cross2, p.L_3_1));
    map.add_route(Channel::S3, Channel::D1_1, delayed(thru2, p.L_1_1));

    auto [thru3, cross3] = coupler(p.t3, p.r3);
    map.add_route(Channel::S4, Channel::D2_1, delayed(cross3, p.L_2_1));
    map.add_route(Channel::S4, Channel::D1_0, delayed(thru3, p.L_1_0));

    return map;
}

}  // namespace pathghz
