// Sparse algebra of bosonic creation operators and Fock-basis kets.
//
// Everything is a value: operators and kets are immutable after construction
// and all operations are pure, so concurrent evaluation over shared inputs
// needs no coordination. Coefficients below kCoeffEps are pruned, which keeps
// every container in canonical form (sorted keys, no zero terms).
#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <utility>
#include <vector>

#include "pathghz/errors.hpp"
#include "pathghz/modes.hpp"

namespace pathghz {

// Sorted (mode, positive count) list. Shared representation for monomial
// factors and basis-state occupations.
class ModePowers {
   public:
    ModePowers() = default;

    // Accepts any order and duplicate modes; entries are merged and sorted.
    ModePowers(std::initializer_list<std::pair<ModeId, int>> entries) {
        for (const auto& [m, p] : entries) bump(m, p);
    }

    static ModePowers single(ModeId m, int power = 1) {
        ModePowers out;
        out.bump(m, power);
        return out;
    }

    ModePowers merged(const ModePowers& other) const {
        ModePowers out = *this;
        for (const auto& [m, p] : other.items_) out.bump(m, p);
        return out;
    }

    int count(ModeId m) const {
        for (const auto& [mode, p] : items_)
            if (mode == m) return p;
        return 0;
    }

    int total() const {
        int n = 0;
        for (const auto& [m, p] : items_) n += p;
        return n;
    }

    bool empty() const { return items_.empty(); }
    const std::vector<std::pair<ModeId, int>>& items() const { return items_; }

    auto operator<=>(const ModePowers&) const = default;

   private:
    void bump(ModeId m, int power) {
        if (power <= 0) throw validation_error("mode powers must be positive");
        auto it = std::lower_bound(items_.begin(), items_.end(), m,
                                   [](const auto& e, ModeId v) { return e.first < v; });
        if (it != items_.end() && it->first == m)
            it->second += power;
        else
            items_.insert(it, {m, power});
    }

    std::vector<std::pair<ModeId, int>> items_;
};

// Product of creation operators, e.g. (b†_a)^2 b†_c.
struct CreationMonomial {
    ModePowers factors;

    int degree() const { return factors.total(); }
    auto operator<=>(const CreationMonomial&) const = default;
};

// Occupation-number basis state; the empty mapping is the vacuum.
struct FockBasisState {
    ModePowers occupations;

    int photons() const { return occupations.total(); }
    bool is_vacuum() const { return occupations.empty(); }
    auto operator<=>(const FockBasisState&) const = default;
};

inline std::string state_name(const FockBasisState& s) {
    if (s.is_vacuum()) return "vac";
    std::string out;
    for (const auto& [m, n] : s.occupations.items()) {
        if (!out.empty()) out += ";";
        out += mode_name(m) + ":" + std::to_string(n);
    }
    return out;
}

// Complex-weighted sum of creation monomials over one mode universe.
class OperatorPoly {
   public:
    explicit OperatorPoly(ModeUniverse universe) : universe_(std::move(universe)) {}

    static OperatorPoly zero(const ModeUniverse& u) { return OperatorPoly(u); }

    static OperatorPoly constant(const ModeUniverse& u, Complex c) {
        OperatorPoly out(u);
        out.add(c, CreationMonomial{});
        return out;
    }

    void add(Complex coeff, const CreationMonomial& mono) {
        for (const auto& [m, p] : mono.factors.items()) universe_.require(m);
        auto [it, inserted] = terms_.try_emplace(mono, coeff);
        if (!inserted) it->second += coeff;
        if (std::abs(it->second) < kCoeffEps) terms_.erase(it);
    }

    OperatorPoly scaled(Complex c) const {
        OperatorPoly out(universe_);
        for (const auto& [mono, coeff] : terms_) out.add(coeff * c, mono);
        return out;
    }

    OperatorPoly operator+(const OperatorPoly& other) const {
        require_same_universe(other);
        OperatorPoly out = *this;
        for (const auto& [mono, coeff] : other.terms_) out.add(coeff, mono);
        return out;
    }

    // Polynomial product; creation operators commute so this is a plain
    // convolution of monomials.
    OperatorPoly times(const OperatorPoly& other) const {
        require_same_universe(other);
        OperatorPoly out(universe_);
        for (const auto& [ma, ca] : terms_)
            for (const auto& [mb, cb] : other.terms_)
                out.add(ca * cb, CreationMonomial{ma.factors.merged(mb.factors)});
        return out;
    }

    const std::map<CreationMonomial, Complex>& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }
    const ModeUniverse& universe() const { return universe_; }

    void require_same_universe(const OperatorPoly& other) const {
        if (universe_ != other.universe_)
            throw validation_error("operator polynomials live in different mode universes");
    }

   private:
    ModeUniverse universe_;
    std::map<CreationMonomial, Complex> terms_;
};

// Sparse complex amplitudes over Fock basis states.
class KetVector {
   public:
    KetVector() = default;  // null ket over the empty universe
    explicit KetVector(ModeUniverse universe) : universe_(std::move(universe)) {}

    static KetVector vacuum(const ModeUniverse& u) {
        KetVector out(u);
        out.add(Complex(1.0, 0.0), FockBasisState{});
        return out;
    }

    void add(Complex amp, const FockBasisState& state) {
        for (const auto& [m, p] : state.occupations.items()) universe_.require(m);
        auto [it, inserted] = amps_.try_emplace(state, amp);
        if (!inserted) it->second += amp;
        if (std::abs(it->second) < kCoeffEps) amps_.erase(it);
    }

    KetVector scaled(Complex c) const {
        KetVector out(universe_);
        for (const auto& [state, amp] : amps_) out.add(amp * c, state);
        return out;
    }

    KetVector operator+(const KetVector& other) const {
        require_same_universe(other);
        KetVector out = *this;
        for (const auto& [state, amp] : other.amps_) out.add(amp, state);
        return out;
    }

    Complex amplitude(const FockBasisState& s) const {
        auto it = amps_.find(s);
        return it == amps_.end() ? Complex(0.0, 0.0) : it->second;
    }

    double norm_squared() const {
        double n2 = 0.0;
        for (const auto& [state, amp] : amps_) n2 += std::norm(amp);
        return n2;
    }

    double norm() const { return std::sqrt(norm_squared()); }

    const std::map<FockBasisState, Complex>& amplitudes() const { return amps_; }
    std::size_t support_size() const { return amps_.size(); }
    bool is_zero() const { return amps_.empty(); }
    const ModeUniverse& universe() const { return universe_; }

    void require_same_universe(const KetVector& other) const {
        if (universe_ != other.universe_)
            throw validation_error("kets live in different mode universes");
    }

   private:
    ModeUniverse universe_;
    std::map<FockBasisState, Complex> amps_;
};

// Apply a creation polynomial: each b† raises n -> n+1 with amplitude
// sqrt(n+1), extended linearly over terms and input amplitudes.
inline KetVector apply(const OperatorPoly& op, const KetVector& ket) {
    if (op.universe() != ket.universe())
        throw validation_error("apply: operator and ket live in different mode universes");
    KetVector out(ket.universe());
    for (const auto& [state, amp] : ket.amplitudes()) {
        for (const auto& [mono, coeff] : op.terms()) {
            double ladder = 1.0;
            for (const auto& [mode, power] : mono.factors.items()) {
                int n = state.occupations.count(mode);
                for (int j = 1; j <= power; ++j) ladder *= static_cast<double>(n + j);
            }
            out.add(amp * coeff * std::sqrt(ladder),
                    FockBasisState{state.occupations.merged(mono.factors)});
        }
    }
    return out;
}

// <a|b>, conjugate-linear in a.
inline Complex inner(const KetVector& a, const KetVector& b) {
    a.require_same_universe(b);
    Complex acc(0.0, 0.0);
    const bool a_smaller = a.support_size() <= b.support_size();
    const KetVector& small = a_smaller ? a : b;
    const KetVector& large = a_smaller ? b : a;
    for (const auto& [state, amp] : small.amplitudes()) {
        Complex other = large.amplitude(state);
        acc += a_smaller ? std::conj(amp) * other : std::conj(other) * amp;
    }
    return acc;
}

inline double fidelity(const KetVector& a, const KetVector& b) { return std::norm(inner(a, b)); }

// Unit-norm copy plus the original norm. The zero vector is rejected
// explicitly, never divided through.
inline std::pair<KetVector, double> normalize(const KetVector& ket) {
    double n = ket.norm();
    if (n < kCoeffEps) throw validation_error("normalize: zero vector");
    return {ket.scaled(Complex(1.0 / n, 0.0)), n};
}

}  // namespace pathghz
