// Discretized biphoton wave function models, Schmidt analysis and the
// propagation phase of the generated pair.
#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "pathghz/errors.hpp"
#include "pathghz/modes.hpp"
#include "pathghz/params.hpp"

namespace pathghz {

// Single nonzero bin: the single-mode idealization of a narrow resonance.
struct SingleBin {};

// phi(k1,k2) = v(k1) v(k2) with Gaussian v of width sigma. Exactly rank 1.
struct SeparableGaussian {
    double sigma;
};

// phi(k1,k2) ~ exp(-(k1+k2-2k0)^2 / (4 sigma_s^2)) exp(-(k1-k2)^2 / (4 sigma_a^2)).
// sigma_s = sigma_a reduces to the separable model.
struct CorrelatedGaussian {
    double sigma_s;
    double sigma_a;
};

using BWFModel = std::variant<SingleBin, SeparableGaussian, CorrelatedGaussian>;

// phi_ring on the grid, unit L2 norm: sum |values|^2 * measure^2 = 1.
struct BWFMatrix {
    KGrid grid;
    Eigen::MatrixXcd values;

    double measure() const { return grid.measure(); }

    double norm_squared() const {
        double w = measure();
        return values.cwiseAbs2().sum() * w * w;
    }

    void require_normalized(double tol = 1e-9) const {
        if (std::abs(norm_squared() - 1.0) > tol)
            throw validation_error("biphoton wave function is not normalized");
    }
};

struct Discretized {
    BWFMatrix bwf;
    std::vector<std::string> warnings;
};

inline Discretized discretize(const BWFModel& model, const KGrid& grid) {
    grid.validate();
    Discretized out;
    out.bwf.grid = grid;
    const int n = grid.n_bins;
    Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(n, n);

    std::visit(
        [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, SingleBin>) {
                v((n - 1) / 2, (n - 1) / 2) = Complex(1.0, 0.0);
            } else if constexpr (std::is_same_v<M, SeparableGaussian>) {
                if (!(m.sigma > 0.0)) throw validation_error("bwf.sigma must be > 0");
                if (n > 1 && m.sigma < grid.dk)
                    out.warnings.push_back("grid too coarse: bwf width " +
                                           std::to_string(m.sigma) + " < dk");
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        double k1 = grid.wavevector(i) - grid.k0;
                        double k2 = grid.wavevector(j) - grid.k0;
                        v(i, j) = std::exp(-(k1 * k1 + k2 * k2) / (2.0 * m.sigma * m.sigma));
                    }
            } else {
                if (!(m.sigma_s > 0.0) || !(m.sigma_a > 0.0))
                    throw validation_error("bwf widths must be > 0");
                if (n > 1 && std::min(m.sigma_s, m.sigma_a) < grid.dk)
                    out.warnings.push_back("grid too coarse: bwf width " +
                                           std::to_string(std::min(m.sigma_s, m.sigma_a)) +
                                           " < dk");
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        double s = grid.wavevector(i) + grid.wavevector(j) - 2.0 * grid.k0;
                        double a = grid.wavevector(i) - grid.wavevector(j);
                        v(i, j) = std::exp(-s * s / (4.0 * m.sigma_s * m.sigma_s) -
                                           a * a / (4.0 * m.sigma_a * m.sigma_a));
                    }
            }
        },
        model);

    double w = grid.measure();
    double raw = std::sqrt(v.cwiseAbs2().sum()) * w;
    if (raw < 1e-300) throw validation_error("biphoton wave function vanished on this grid");
    out.bwf.values = v / raw;
    return out;
}

struct SchmidtResult {
    std::vector<double> coefficients;  // descending, sum of squares = 1
    double purity = 0.0;               // sum of fourth powers; 1 iff separable
};

inline SchmidtResult schmidt(const BWFMatrix& bwf) {
    bwf.require_normalized();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(bwf.values * bwf.measure());
    Eigen::VectorXd s = svd.singularValues();
    double total = s.squaredNorm();
    SchmidtResult out;
    out.coefficients.reserve(s.size());
    double p = 0.0;
    for (int i = 0; i < s.size(); ++i) {
        double c = s(i) / std::sqrt(total);
        out.coefficients.push_back(c);
        p += c * c * c * c;
    }
    out.purity = p;
    return out;
}

enum class PsiVariant { paper, direct };

// Propagation phase acquired by a pair between generation and the channel
// reference plane. The direct variant follows per-photon bookkeeping (each
// pump photon e^{+ik(L1+L2)}, each generated photon e^{-ikL3}); the paper
// variant carries an extra factor 2. A global phase on the post-selected
// state either way.
inline double psi_phase(double k1, double k2, const SourceParams& p, PsiVariant variant) {
    double base = (k1 + k2) * (p.L1 + p.L2 - p.L3);
    return variant == PsiVariant::paper ? 2.0 * base : base;
}

}  // namespace pathghz
