// Parameter bundles for the four-ring source and the detector fan-out.
#pragma once

#include <cmath>
#include <complex>

#include "pathghz/errors.hpp"
#include "pathghz/modes.hpp"

namespace pathghz {

inline void require_coupler(double t, double r, const char* where) {
    if (t < 0.0 || r < 0.0)
        throw validation_error(std::string(where) + ": coupler amplitudes must be >= 0");
    if (std::abs(t * t + r * r - 1.0) > 1e-12)
        throw validation_error(std::string(where) + ": t^2 + r^2 must equal 1");
}

inline void require_length(double length, const char* where) {
    if (length < 0.0) throw validation_error(std::string(where) + ": lengths must be >= 0");
}

// Four identical ring resonators in two Mach-Zehnder blocks, coherently
// pumped through one splitter. All source couplers share (t, r). phi is the
// pump phase between the blocks, phi1/phi2 the intra-block arm phases,
// pump_phase a common phase on both blocks (physically the laser phase).
// L1: splitter to block coupler, L2: block coupler to ring, L3: output
// coupler to the channel reference plane.
struct SourceParams {
    double t = 1.0 / std::sqrt(2.0);
    double r = 1.0 / std::sqrt(2.0);
    double phi = kPi;
    double phi1 = kPi / 2.0;
    double phi2 = kPi / 2.0;
    double L1 = 0.0;
    double L2 = 0.0;
    double L3 = 0.0;
    double pump_phase = 0.0;
    Complex beta_ring = Complex(0.0, 0.0);

    void validate() const {
        require_coupler(t, r, "source");
        require_length(L1, "source.L1");
        require_length(L2, "source.L2");
        require_length(L3, "source.L3");
    }
};

inline SourceParams balanced_source(double phi = kPi) {
    SourceParams p;
    p.phi = phi;
    return p;
}

// Output couplers and waveguide runs between the source and the detectors:
// coupler i = (t_i, r_i); L_n_m is the run to detector port D_{n,m} and L_T
// the run to the target detector.
struct FanoutParams {
    double t1 = 1.0 / std::sqrt(2.0), r1 = 1.0 / std::sqrt(2.0);
    double t2 = 1.0 / std::sqrt(2.0), r2 = 1.0 / std::sqrt(2.0);
    double t3 = 1.0 / std::sqrt(2.0), r3 = 1.0 / std::sqrt(2.0);
    double L_T = 0.0;
    double L_1_0 = 0.0, L_1_1 = 0.0;
    double L_2_0 = 0.0, L_2_1 = 0.0;
    double L_3_0 = 0.0, L_3_1 = 0.0;

    void validate() const {
        require_coupler(t1, r1, "fanout.coupler1");
        require_coupler(t2, r2, "fanout.coupler2");
        require_coupler(t3, r3, "fanout.coupler3");
        for (double len : {L_T, L_1_0, L_1_1, L_2_0, L_2_1, L_3_0, L_3_1})
            require_length(len, "fanout");
    }
};

}  // namespace pathghz
