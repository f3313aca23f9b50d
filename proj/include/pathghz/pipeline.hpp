// End-to-end state pipeline: second-order expansion in beta, detector
// fan-out, post-selection on coincidence patterns and GHZ extraction.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "pathghz/circuit.hpp"
#include "pathghz/errors.hpp"
#include "pathghz/fock.hpp"
#include "pathghz/modes.hpp"
#include "pathghz/params.hpp"

namespace pathghz {

// |psi> = (1 + O(|beta|^2))|vac> + beta|II> + nu beta^2 |IV> + ...
// The vacuum coefficient is carried as an unevaluated placeholder; |II> and
// |IV> are stored unit-normalized with their stage coefficients. nu is
// measured from the algebra, not asserted (sqrt(3)/2 for separable BWFs).
struct ExpansionState {
    Complex beta;
    KetVector two_photon;
    Complex two_coefficient;
    KetVector four_photon;
    Complex four_coefficient;
    double four_norm_factor = 0.0;  // nu = || (1/2) C^2 |vac> ||
};

inline ExpansionState expand_output(const OperatorPoly& pair_op, Complex beta) {
    KetVector two = apply(pair_op, KetVector::vacuum(pair_op.universe()));
    if (std::abs(two.norm() - 1.0) > 1e-9)
        throw numeric_check_error("expand_output: pair creation operator is not normalized");
    KetVector half_square = apply(pair_op, two).scaled(Complex(0.5, 0.0));
    auto [four, nu] = normalize(half_square);
    return ExpansionState{beta, std::move(two), beta, std::move(four), nu * beta * beta, nu};
}

// Normalized (1/2) C^2 |vac>.
inline KetVector four_photon_state(const OperatorPoly& pair_op) {
    KetVector two = apply(pair_op, KetVector::vacuum(pair_op.universe()));
    return normalize(apply(pair_op, two).scaled(Complex(0.5, 0.0))).first;
}

// Truncated output state with the vacuum coefficient taken as 1.
inline KetVector truncated_state(const ExpansionState& e) {
    return KetVector::vacuum(e.two_photon.universe()) + e.two_photon.scaled(e.two_coefficient) +
           e.four_photon.scaled(e.four_coefficient);
}

enum class DetectorMode { number_resolving, bucket };

// Required photon counts per detector port, plus group constraints (an exact
// total over a set of ports, e.g. "one photon in either port of D1"). Ports
// not listed anywhere must be empty unless marked unobserved. Bucket mode
// only distinguishes clicked (>= 1) from empty.
struct DetectionPattern {
    std::map<Channel, int> ports;
    std::vector<std::pair<std::vector<Channel>, int>> groups;
    std::set<Channel> unobserved;
    DetectorMode mode = DetectorMode::number_resolving;

    void validate() const {
        for (const auto& [c, n] : ports)
            if (n < 1) throw validation_error("detection pattern counts must be >= 1");
        for (const auto& [g, n] : groups) {
            if (n < 1) throw validation_error("detection pattern counts must be >= 1");
            if (g.empty()) throw validation_error("detection pattern group must list ports");
        }
    }
};

inline std::map<Channel, int> port_totals(const FockBasisState& s) {
    std::map<Channel, int> totals;
    for (const auto& [mode, n] : s.occupations.items()) totals[mode.channel] += n;
    return totals;
}

inline bool matches(const FockBasisState& s, const DetectionPattern& pattern) {
    const auto totals = port_totals(s);
    auto total_of = [&](Channel c) {
        auto it = totals.find(c);
        return it == totals.end() ? 0 : it->second;
    };
    const bool bucket = pattern.mode == DetectorMode::bucket;

    std::set<Channel> constrained(pattern.unobserved);
    for (const auto& [c, n] : pattern.ports) {
        constrained.insert(c);
        int have = total_of(c);
        if (bucket ? have < 1 : have != n) return false;
    }
    for (const auto& [group, n] : pattern.groups) {
        int have = 0;
        for (Channel c : group) {
            constrained.insert(c);
            have += total_of(c);
        }
        if (bucket ? have < 1 : have != n) return false;
    }
    for (const auto& [c, n] : totals)
        if (n > 0 && !constrained.count(c)) return false;
    return true;
}

struct PostselectResult {
    double probability = 0.0;
    KetVector conditional;
    bool empty = true;  // no matching support: probability 0, conditional unset
};

// Probability mass of the matching support and the renormalized conditional
// state. Stage coefficients must already be folded into `state`. An empty
// match is reported, never divided through.
inline PostselectResult postselect(const KetVector& state, const DetectionPattern& pattern) {
    pattern.validate();
    PostselectResult out{0.0, KetVector(state.universe()), true};
    for (const auto& [basis, amp] : state.amplitudes()) {
        if (!matches(basis, pattern)) continue;
        out.probability += std::norm(amp);
        out.conditional.add(amp, basis);
        out.empty = false;
    }
    if (!out.empty) out.conditional = normalize(out.conditional).first;
    return out;
}

inline std::vector<Channel> detector_group(int n) {
    switch (n) {
        case 1: return {Channel::D1_0, Channel::D1_1};
        case 2: return {Channel::D2_0, Channel::D2_1};
        case 3: return {Channel::D3_0, Channel::D3_1};
        default: throw validation_error("detector index must be 1, 2 or 3");
    }
}

// Fourfold coincidence: one photon in T and one in either port of each of
// D1, D2, D3.
inline DetectionPattern fourfold_with_target(DetectorMode mode = DetectorMode::number_resolving) {
    DetectionPattern p;
    p.ports[Channel::T] = 1;
    p.groups = {{detector_group(1), 1}, {detector_group(2), 1}, {detector_group(3), 1}};
    p.mode = mode;
    return p;
}

inline bool is_fourfold_with_target(const FockBasisState& s) {
    return matches(s, fourfold_with_target());
}

// Theta = k1 (L11 - L31) + k2 (L21 - L10) + k2' (L30 - L20) + pi/2,
// the relative phase between the |110> and |001> components.
inline double theta_formula(double k1, double k2, double k2_prime, const FanoutParams& f) {
    return k1 * (f.L_1_1 - f.L_3_1) + k2 * (f.L_2_1 - f.L_1_0) + k2_prime * (f.L_3_0 - f.L_2_0) +
           kPi / 2.0;
}

// Logical qubit readout: port D_{n,1} -> |1>, D_{n,0} -> |0>, ordered
// (D1, D2, D3). The conditioned state is (|110> + e^{i Theta} |001>)/sqrt(2).
struct GhzReport {
    double probability = 0.0;  // pattern probability, filled by the caller
    double weight = 1.0;       // share of the conditional norm in this k group
    KetVector conditional;
    double theta_measured = 0.0;
    double theta_formula = 0.0;
    double fidelity = 0.0;
    double gamma = 0.0;  // global phase of the |110> amplitude, reported only
    std::array<int, 4> kbins{0, 0, 0, 0};  // T, D1, D2, D3
};

namespace detail {

// Classify a fourfold-with-target basis state as the |110> or |001> pattern;
// returns logical index (1 or 0 per detector read off port m) and the k bins.
struct FourfoldShape {
    bool is_110 = false;
    std::array<int, 4> kbins{0, 0, 0, 0};  // T, D1, D2, D3
};

inline std::optional<FourfoldShape> classify_fourfold(const FockBasisState& s) {
    if (!is_fourfold_with_target(s)) return std::nullopt;
    FourfoldShape shape;
    std::array<int, 3> logical{-1, -1, -1};
    for (const auto& [mode, n] : s.occupations.items()) {
        switch (mode.channel) {
            case Channel::T: shape.kbins[0] = mode.kbin; break;
            case Channel::D1_0: logical[0] = 0; shape.kbins[1] = mode.kbin; break;
            case Channel::D1_1: logical[0] = 1; shape.kbins[1] = mode.kbin; break;
            case Channel::D2_0: logical[1] = 0; shape.kbins[2] = mode.kbin; break;
            case Channel::D2_1: logical[1] = 1; shape.kbins[2] = mode.kbin; break;
            case Channel::D3_0: logical[2] = 0; shape.kbins[3] = mode.kbin; break;
            case Channel::D3_1: logical[2] = 1; shape.kbins[3] = mode.kbin; break;
            default: return std::nullopt;
        }
    }
    if (logical == std::array<int, 3>{1, 1, 0})
        shape.is_110 = true;
    else if (logical == std::array<int, 3>{0, 0, 1})
        shape.is_110 = false;
    else
        return std::nullopt;
    return shape;
}

}  // namespace detail

// Extract the GHZ structure from a fourfold conditional state, one report per
// detector k assignment. Support outside the two expected patterns is a
// structural mismatch and is listed in the error.
inline std::vector<GhzReport> ghz_extract_by_k(const KetVector& conditional,
                                               const FanoutParams& fanout) {
    struct Pair {
        Complex a110{0.0, 0.0}, a001{0.0, 0.0};
        FockBasisState s110, s001;
        bool has110 = false, has001 = false;
    };
    std::map<std::array<int, 4>, Pair> groups;
    std::string mismatches;
    for (const auto& [basis, amp] : conditional.amplitudes()) {
        auto shape = detail::classify_fourfold(basis);
        if (!shape) {
            mismatches += (mismatches.empty() ? "" : ", ") + state_name(basis);
            continue;
        }
        Pair& g = groups[shape->kbins];
        if (shape->is_110) {
            g.a110 = amp;
            g.s110 = basis;
            g.has110 = true;
        } else {
            g.a001 = amp;
            g.s001 = basis;
            g.has001 = true;
        }
    }
    if (!mismatches.empty())
        throw numeric_check_error("ghz_extract: unexpected support outside the GHZ patterns: " +
                                  mismatches);
    if (groups.empty()) throw numeric_check_error("ghz_extract: empty conditional state");

    const KGrid& grid = conditional.universe().grid();
    std::vector<GhzReport> reports;
    for (const auto& [kbins, g] : groups) {
        if (!g.has110 || !g.has001)
            throw numeric_check_error("ghz_extract: GHZ component missing in one k group");
        GhzReport rep;
        rep.kbins = kbins;
        rep.weight = std::norm(g.a110) + std::norm(g.a001);
        rep.conditional = KetVector(conditional.universe());
        double scale = 1.0 / std::sqrt(rep.weight);
        rep.conditional.add(g.a110 * scale, g.s110);
        rep.conditional.add(g.a001 * scale, g.s001);
        rep.theta_measured = wrap_angle(std::arg(g.a001) - std::arg(g.a110));
        rep.gamma = std::arg(g.a110);
        rep.theta_formula = theta_formula(grid.wavevector(kbins[1]), grid.wavevector(kbins[2]),
                                          grid.wavevector(kbins[3]), fanout);
        // overlap with (|110> + e^{i Theta_formula} |001>)/sqrt(2)
        const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
        Complex overlap = inv_sqrt2 * (g.a110 * scale) +
                          std::conj(std::exp(Complex(0.0, rep.theta_formula))) * inv_sqrt2 *
                              (g.a001 * scale);
        rep.fidelity = std::norm(overlap);
        reports.push_back(std::move(rep));
    }
    return reports;
}

// Single k assignment expected (the single-bin pipeline); more than one group
// is reported as a structural mismatch.
inline GhzReport ghz_extract(const KetVector& conditional, const FanoutParams& fanout) {
    auto reports = ghz_extract_by_k(conditional, fanout);
    if (reports.size() != 1)
        throw numeric_check_error("ghz_extract: conditional spans " +
                                  std::to_string(reports.size()) +
                                  " detector k assignments; use ghz_extract_by_k");
    return reports.front();
}

// Fourfold event rate: |beta^2/4|^2 per pulse times the repetition rate.
inline double generation_rate(Complex beta, double rep_rate_hz) {
    if (rep_rate_hz < 0.0) throw validation_error("rep_rate_hz must be >= 0");
    double pair_prob = std::norm(beta);
    return pair_prob * pair_prob / 16.0 * rep_rate_hz;
}

inline bool generation_rate_warning(Complex beta) { return std::norm(beta) > 0.2; }

// Every distinct exact port-count pattern present in the support of a state.
// Summing postselect probabilities over these reproduces the state norm.
inline std::vector<DetectionPattern> enumerate_exact_patterns(const KetVector& state) {
    std::set<std::map<Channel, int>> seen;
    for (const auto& [basis, amp] : state.amplitudes()) seen.insert(port_totals(basis));
    std::vector<DetectionPattern> out;
    for (const auto& totals : seen) {
        DetectionPattern p;
        for (const auto& [c, n] : totals)
            if (n > 0) p.ports[c] = n;
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace pathghz
