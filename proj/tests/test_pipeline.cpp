#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "pathghz/oracle.hpp"
#include "pathghz/pipeline.hpp"
#include "pathghz/source.hpp"
#include "pathghz/spectral.hpp"
#include "test_helpers.hpp"

using namespace pathghz;
using testutil::single_bin_bwf;
using testutil::single_bin_grid;

namespace {

struct GhzEnd {
    ExpansionState expansion;
    PostselectResult fourfold;
    GhzReport report;
    Complex beta;
};

GhzEnd run_ghz(const SourceParams& params, const FanoutParams& fanout, const BWFMatrix& bwf,
               PsiVariant variant = PsiVariant::direct,
               CouplerSign sign = CouplerSign::fanout) {
    PairAmplitudeTable table = pair_amplitudes(params, bwf, variant);
    Complex beta = effective_beta(table.raw_norm, params.beta_ring);
    OperatorPoly detector_op =
        heisenberg_rewrite(pair_creation_operator(table), build_fanout(fanout, bwf.grid, sign));
    ExpansionState expansion = expand_output(detector_op, beta);
    PostselectResult post = postselect(expansion.four_photon.scaled(expansion.four_coefficient),
                                       fourfold_with_target());
    GhzReport report = ghz_extract(post.conditional, fanout);
    report.probability = post.probability;
    return {std::move(expansion), std::move(post), std::move(report), beta};
}

SourceParams source_with_beta(double phi, double beta_ring_abs2) {
    SourceParams p = balanced_source(phi);
    p.beta_ring = Complex(std::sqrt(beta_ring_abs2), 0.0);
    return p;
}

}  // namespace

TEST_CASE("the four-photon normalization factor emerges as sqrt(3)/2") {
    BWFMatrix bwf = single_bin_bwf();
    OperatorPoly op = pair_creation_operator(pair_amplitudes(balanced_source(kPi), bwf));
    ExpansionState e = expand_output(op, Complex(0.3, 0.0));
    CHECK_THAT(e.four_norm_factor, Catch::Matchers::WithinAbs(std::sqrt(3.0) / 2.0, 1e-12));
    CHECK_THAT(std::abs(e.four_coefficient - Complex(std::sqrt(3.0) / 2.0 * 0.09, 0.0)),
               Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK_THAT(e.two_photon.norm(), Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THAT(e.four_photon.norm(), Catch::Matchers::WithinAbs(1.0, 1e-12));
    for (const auto& [basis, amp] : e.four_photon.amplitudes()) CHECK(basis.photons() == 4);
}

TEST_CASE("a bare single-mode creator gives the sqrt(2)/2 combinatorics instead") {
    auto u = source_universe(single_bin_grid());
    OperatorPoly op(u);
    op.add(Complex(1.0, 0.0), CreationMonomial{ModePowers::single(ModeId{Channel::S1, 0})});
    ExpansionState e = expand_output(op, Complex(0.1, 0.0));
    CHECK_THAT(e.four_norm_factor, Catch::Matchers::WithinAbs(std::sqrt(2.0) / 2.0, 1e-12));
}

TEST_CASE("correlated spectra shift the normalization factor, confirmed two ways") {
    KGrid grid{0.0, 0.4, 2};
    BWFMatrix bwf = discretize(CorrelatedGaussian{3.0, 0.5}, grid).bwf;
    OperatorPoly op = pair_creation_operator(pair_amplitudes(balanced_source(kPi), bwf));
    ExpansionState e = expand_output(op, Complex(0.2, 0.0));

    CHECK(std::abs(e.four_norm_factor - std::sqrt(3.0) / 2.0) > 1e-3);

    // dense-oracle route
    Complex beta(0.2, 0.0);
    oracle::DenseKet dense = oracle::dense_expand(op, beta);
    double dense_four = 0.0;
    for (std::size_t i = 0; i < dense.dimension(); ++i) {
        int photons = 0;
        for (int n : dense.occupancy(i)) photons += n;
        if (photons == 4) dense_four += std::norm(dense.at(i));
    }
    double nu_dense = std::sqrt(dense_four) / std::norm(beta);
    CHECK_THAT(e.four_norm_factor, Catch::Matchers::WithinAbs(nu_dense, 1e-10));

    // Schmidt route: nu = sqrt(2 + purity)/2 for the balanced source
    double purity = schmidt(bwf).purity;
    CHECK_THAT(e.four_norm_factor, Catch::Matchers::WithinAbs(std::sqrt(2.0 + purity) / 2.0, 1e-9));
}

TEST_CASE("four-photon structure of the balanced single-bin source") {
    BWFMatrix bwf = single_bin_bwf();
    OperatorPoly op = pair_creation_operator(pair_amplitudes(balanced_source(kPi), bwf));
    KetVector four = four_photon_state(op);

    CHECK(four.support_size() == 3);
    for (const auto& [basis, amp] : four.amplitudes()) CHECK(basis.photons() == 4);

    // operator-level ratio: cross term vs double-pair term is -2 before the
    // bosonic factors, -1 after the two sqrt(2) ladder factors.
    OperatorPoly squared = op.times(op);
    CreationMonomial cross{ModePowers{{ModeId{Channel::S1, 0}, 1},
                                      {ModeId{Channel::S2, 0}, 1},
                                      {ModeId{Channel::S3, 0}, 1},
                                      {ModeId{Channel::S4, 0}, 1}}};
    CreationMonomial pair12{ModePowers{{ModeId{Channel::S1, 0}, 2}, {ModeId{Channel::S2, 0}, 2}}};
    Complex ratio_op = squared.terms().at(cross) / squared.terms().at(pair12);
    CHECK_THAT(std::abs(ratio_op - Complex(-2.0, 0.0)), Catch::Matchers::WithinAbs(0.0, 1e-12));

    FockBasisState state_cross{ModePowers{{ModeId{Channel::S1, 0}, 1},
                                          {ModeId{Channel::S2, 0}, 1},
                                          {ModeId{Channel::S3, 0}, 1},
                                          {ModeId{Channel::S4, 0}, 1}}};
    FockBasisState state_pair{ModePowers{{ModeId{Channel::S1, 0}, 2}, {ModeId{Channel::S2, 0}, 2}}};
    Complex ratio_ket = four.amplitude(state_cross) / four.amplitude(state_pair);
    CHECK_THAT(std::abs(ratio_ket - Complex(-1.0, 0.0)), Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("fourfold probability is |beta^2/4|^2") {
    BWFMatrix bwf = single_bin_bwf();
    for (double beta2 : {0.01, 0.1}) {
        GhzEnd end = run_ghz(source_with_beta(kPi, 4.0 * beta2), FanoutParams{}, bwf);
        CHECK_THAT(std::norm(end.beta), Catch::Matchers::WithinAbs(beta2, 1e-14));
        CHECK_THAT(end.fourfold.probability,
                   Catch::Matchers::WithinAbs(beta2 * beta2 / 16.0, 1e-12));
    }
}

TEST_CASE("double pairs from one block never reach the target detector") {
    BWFMatrix bwf = single_bin_bwf();
    ModeMap fanout = build_fanout(FanoutParams{}, bwf.grid);
    OperatorPoly block2(source_universe(bwf.grid));
    block2.add(Complex(1.0, 0.0), CreationMonomial{ModePowers{{ModeId{Channel::S3, 0}, 2},
                                                              {ModeId{Channel::S4, 0}, 2}}});
    KetVector routed = apply(heisenberg_rewrite(block2, fanout),
                             KetVector::vacuum(detector_universe(bwf.grid)));
    double t_weight = 0.0;
    for (const auto& [basis, amp] : routed.amplitudes())
        if (port_totals(basis).count(Channel::T)) t_weight += std::norm(amp);
    CHECK(t_weight == 0.0);

    DetectionPattern fourfold = fourfold_with_target();
    CHECK(postselect(normalize(routed).first, fourfold).probability == 0.0);
    CHECK(postselect(normalize(routed).first, fourfold).empty);
}

TEST_CASE("threefold coincidence without the target matches the oracle") {
    std::mt19937_64 rng(55);
    SourceParams params = testutil::random_source(rng);
    FanoutParams fanout = testutil::random_fanout(rng);
    BWFMatrix bwf = single_bin_bwf(1.2);

    PairAmplitudeTable table = pair_amplitudes(params, bwf);
    Complex beta = effective_beta(table.raw_norm, params.beta_ring);
    OperatorPoly detector_op =
        heisenberg_rewrite(pair_creation_operator(table), build_fanout(fanout, bwf.grid));
    KetVector truncated = truncated_state(expand_output(detector_op, beta));

    DetectionPattern threefold;
    threefold.groups = {{detector_group(1), 1}, {detector_group(2), 1}, {detector_group(3), 1}};
    threefold.unobserved = {Channel::T};
    double pipeline_prob = postselect(truncated, threefold).probability;

    oracle::DenseKet dense =
        oracle::dense_expand(oracle::detector_pair_operator(params, fanout, bwf), beta);
    double oracle_prob = oracle::pattern_probability(dense, threefold);
    CHECK_THAT(pipeline_prob, Catch::Matchers::WithinAbs(oracle_prob, 1e-12));
    CHECK(pipeline_prob > 0.0);
}

TEST_CASE("postselect reports empty support without dividing") {
    BWFMatrix bwf = single_bin_bwf();
    KetVector vac = KetVector::vacuum(detector_universe(bwf.grid));
    PostselectResult res = postselect(vac, fourfold_with_target());
    CHECK(res.probability == 0.0);
    CHECK(res.empty);
    CHECK(res.conditional.is_zero());
}

TEST_CASE("ideal settings give the canonical GHZ state") {
    GhzEnd end = run_ghz(source_with_beta(kPi, 0.4), FanoutParams{}, single_bin_bwf());
    CHECK_THAT(end.report.theta_measured, Catch::Matchers::WithinAbs(kPi / 2.0, 1e-12));
    CHECK_THAT(end.report.theta_formula, Catch::Matchers::WithinAbs(kPi / 2.0, 1e-15));
    CHECK_THAT(end.report.fidelity, Catch::Matchers::WithinAbs(1.0, 1e-10));
    CHECK_THAT(end.report.weight, Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("equal nonzero fan-out lengths keep theta at pi/2") {
    FanoutParams f;
    f.L_T = 1.7;
    f.L_1_0 = f.L_1_1 = f.L_2_0 = f.L_2_1 = f.L_3_0 = f.L_3_1 = 1.7;
    GhzEnd end = run_ghz(source_with_beta(kPi, 0.4), f, single_bin_bwf(0.9));
    CHECK_THAT(end.report.theta_measured, Catch::Matchers::WithinAbs(kPi / 2.0, 1e-12));
    CHECK_THAT(end.report.fidelity, Catch::Matchers::WithinAbs(1.0, 1e-10));
}

TEST_CASE("a length perturbation shifts theta by k times delta") {
    const double k0 = 1.4;
    BWFMatrix bwf = single_bin_bwf(k0);
    SourceParams params = source_with_beta(kPi, 0.4);

    FanoutParams base;
    GhzEnd ref = run_ghz(params, base, bwf);
    for (double delta : {0.3, 1.1}) {
        FanoutParams moved = base;
        moved.L_1_1 = base.L_1_1 + delta;
        GhzEnd end = run_ghz(params, moved, bwf);
        double shift = wrap_angle(end.report.theta_measured - ref.report.theta_measured);
        CHECK_THAT(shift, Catch::Matchers::WithinAbs(wrap_angle(k0 * delta), 1e-12));
        CHECK_THAT(end.report.theta_measured,
                   Catch::Matchers::WithinAbs(wrap_angle(end.report.theta_formula), 1e-12));
    }
}

TEST_CASE("theta matches the closed formula over random lengths") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> length(0.0, 3.0);
    for (int trial = 0; trial < 10; ++trial) {
        double k0 = 0.5 + 0.21 * trial;
        FanoutParams f;  // 50:50 couplers, randomized runs
        f.L_T = length(rng);
        f.L_1_0 = length(rng);
        f.L_1_1 = length(rng);
        f.L_2_0 = length(rng);
        f.L_2_1 = length(rng);
        f.L_3_0 = length(rng);
        f.L_3_1 = length(rng);
        GhzEnd end = run_ghz(source_with_beta(kPi, 0.4), f, single_bin_bwf(k0));
        CHECK_THAT(wrap_angle(end.report.theta_measured - end.report.theta_formula),
                   Catch::Matchers::WithinAbs(0.0, 1e-10));
        CHECK_THAT(end.report.fidelity, Catch::Matchers::WithinAbs(1.0, 1e-10));
    }
}

TEST_CASE("theta still matches the formula with unbalanced fan-out couplers") {
    // the split imbalance skews the component weights (fidelity drops), but
    // the phases stay on the closed formula
    std::mt19937_64 rng(78);
    FanoutParams f = testutil::random_fanout(rng);
    GhzEnd end = run_ghz(source_with_beta(kPi, 0.4), f, single_bin_bwf(1.1));
    CHECK_THAT(wrap_angle(end.report.theta_measured - end.report.theta_formula),
               Catch::Matchers::WithinAbs(0.0, 1e-10));
    CHECK(end.report.fidelity < 1.0);
}

TEST_CASE("theta formula closed-form values") {
    FanoutParams f;
    CHECK_THAT(theta_formula(0.7, 1.1, 2.9, f), Catch::Matchers::WithinAbs(kPi / 2.0, 1e-15));
    f.L_1_1 = 0.5;
    CHECK_THAT(theta_formula(2.0, 0.0, 0.0, f), Catch::Matchers::WithinAbs(1.0 + kPi / 2.0, 1e-15));
}

TEST_CASE("conditionals outside the GHZ patterns are a structural mismatch") {
    GhzEnd end = run_ghz(source_with_beta(kPi, 0.4), FanoutParams{}, single_bin_bwf());
    KetVector polluted = end.fourfold.conditional;
    FockBasisState stray{ModePowers{{ModeId{Channel::T, 0}, 1},
                                    {ModeId{Channel::D1_0, 0}, 1},
                                    {ModeId{Channel::D2_0, 0}, 1},
                                    {ModeId{Channel::D3_0, 0}, 1}}};
    polluted.add(Complex(0.1, 0.0), stray);
    CHECK_THROWS_WITH(ghz_extract(polluted, FanoutParams{}),
                      Catch::Matchers::ContainsSubstring("D1_0") &&
                          Catch::Matchers::ContainsSubstring("D3_0"));
}

TEST_CASE("generation rates") {
    CHECK_THAT(generation_rate(Complex(std::sqrt(0.1), 0.0), 1e6),
               Catch::Matchers::WithinAbs(625.0, 1e-9));
    CHECK(generation_rate(Complex(0.0, 0.0), 5e6) == 0.0);

    double rate = generation_rate(Complex(std::sqrt(0.05), 0.0), 1e7);
    CHECK_THAT(rate, Catch::Matchers::WithinAbs(1562.5, 1e-9));

    // consistency with the post-selected probability at the same beta
    GhzEnd end = run_ghz(source_with_beta(kPi, 0.2), FanoutParams{}, single_bin_bwf());
    CHECK_THAT(std::norm(end.beta), Catch::Matchers::WithinAbs(0.05, 1e-14));
    CHECK_THAT(end.fourfold.probability * 1e7, Catch::Matchers::WithinAbs(rate, 1e-9));

    CHECK(generation_rate_warning(Complex(0.5, 0.0)));
    CHECK_FALSE(generation_rate_warning(Complex(0.3, 0.0)));
}

TEST_CASE("postselection probabilities over all patterns recover the truncated norm") {
    std::mt19937_64 rng(91);
    for (int trial = 0; trial < 2; ++trial) {
        SourceParams params = trial == 0 ? source_with_beta(kPi, 0.4) : testutil::random_source(rng);
        FanoutParams fanout = trial == 0 ? FanoutParams{} : testutil::random_fanout(rng);
        BWFMatrix bwf = single_bin_bwf(1.1);

        PairAmplitudeTable table = pair_amplitudes(params, bwf);
        Complex beta = effective_beta(table.raw_norm, params.beta_ring);
        OperatorPoly detector_op =
            heisenberg_rewrite(pair_creation_operator(table), build_fanout(fanout, bwf.grid));
        KetVector truncated = truncated_state(expand_output(detector_op, beta));

        double total = 0.0;
        for (const DetectionPattern& pattern : enumerate_exact_patterns(truncated))
            total += postselect(truncated, pattern).probability;
        CHECK_THAT(total, Catch::Matchers::WithinAbs(truncated.norm_squared(), 1e-10));
    }
}

TEST_CASE("every four-photon component outside the GHZ pair fails the fourfold test") {
    // the deterministic-splitting regime: 50:50 source couplers and
    // phi_i = pi/2; pump phase, propagation lengths and the fan-out are free
    std::mt19937_64 rng(93);
    SourceParams params = balanced_source(1.77);
    params.L1 = 0.6;
    params.L2 = 1.4;
    params.L3 = 0.8;
    params.pump_phase = 0.9;
    params.beta_ring = Complex(0.4, 0.1);
    FanoutParams fanout = testutil::random_fanout(rng);
    BWFMatrix bwf = single_bin_bwf();

    OperatorPoly detector_op = heisenberg_rewrite(
        pair_creation_operator(pair_amplitudes(params, bwf)), build_fanout(fanout, bwf.grid));
    KetVector four = four_photon_state(detector_op);

    int ghz_members = 0, violations = 0;
    for (const auto& [basis, amp] : four.amplitudes()) {
        auto totals = port_totals(basis);
        bool is_ghz_pattern =
            totals.count(Channel::T) &&
            ((totals.count(Channel::D1_1) && totals.count(Channel::D2_1) &&
              totals.count(Channel::D3_0)) ||
             (totals.count(Channel::D1_0) && totals.count(Channel::D2_0) &&
              totals.count(Channel::D3_1)));
        if (is_ghz_pattern && is_fourfold_with_target(basis))
            ++ghz_members;
        else if (is_fourfold_with_target(basis))
            ++violations;
    }
    CHECK(ghz_members == 2);
    CHECK(violations == 0);

    // off the deterministic-splitting point the claim genuinely fails: a
    // block-2 double pair (3,3) plus a (1,2) pair covers T, D1, D2, D3 in a
    // non-GHZ arrangement (detuning phi1 alone is still safe, since the T
    // photon's partner is always channel 2)
    SourceParams detuned = params;
    detuned.phi2 = 0.9;
    OperatorPoly detuned_op = heisenberg_rewrite(
        pair_creation_operator(pair_amplitudes(detuned, bwf)), build_fanout(fanout, bwf.grid));
    KetVector detuned_four = four_photon_state(detuned_op);
    int detuned_violations = 0;
    for (const auto& [basis, amp] : detuned_four.amplitudes()) {
        auto totals = port_totals(basis);
        bool ghz_pattern = (totals.count(Channel::D1_1) && totals.count(Channel::D2_1) &&
                            totals.count(Channel::D3_0)) ||
                           (totals.count(Channel::D1_0) && totals.count(Channel::D2_0) &&
                            totals.count(Channel::D3_1));
        if (is_fourfold_with_target(basis) && !ghz_pattern) ++detuned_violations;
    }
    CHECK(detuned_violations > 0);
}

TEST_CASE("the GHZ conditional ignores the psi bookkeeping variant") {
    SourceParams params = source_with_beta(kPi, 0.4);
    params.L1 = 0.8;
    params.L2 = 0.3;
    params.L3 = 1.9;
    std::mt19937_64 rng(97);
    FanoutParams fanout = testutil::random_fanout(rng);
    BWFMatrix bwf = single_bin_bwf(1.3);

    GhzEnd direct = run_ghz(params, fanout, bwf, PsiVariant::direct);
    GhzEnd paper = run_ghz(params, fanout, bwf, PsiVariant::paper);
    CHECK_THAT(direct.fourfold.probability,
               Catch::Matchers::WithinAbs(paper.fourfold.probability, 1e-12));
    CHECK_THAT(direct.report.theta_measured,
               Catch::Matchers::WithinAbs(paper.report.theta_measured, 1e-12));
    CHECK_THAT(direct.report.fidelity, Catch::Matchers::WithinAbs(paper.report.fidelity, 1e-12));
}

TEST_CASE("global pump and ring phases do not move the GHZ observables") {
    SourceParams params = source_with_beta(kPi, 0.4);
    std::mt19937_64 rng(101);
    FanoutParams fanout = testutil::random_fanout(rng);
    BWFMatrix bwf = single_bin_bwf(0.7);
    GhzEnd base = run_ghz(params, fanout, bwf);

    SourceParams shifted = params;
    shifted.pump_phase = 2.13;
    shifted.beta_ring = params.beta_ring * std::exp(Complex(0.0, 0.77));
    GhzEnd moved = run_ghz(shifted, fanout, bwf);
    CHECK_THAT(moved.fourfold.probability,
               Catch::Matchers::WithinAbs(base.fourfold.probability, 1e-12));
    CHECK_THAT(moved.report.theta_measured,
               Catch::Matchers::WithinAbs(base.report.theta_measured, 1e-12));
    CHECK_THAT(moved.report.fidelity, Catch::Matchers::WithinAbs(base.report.fidelity, 1e-12));
}

TEST_CASE("flipping the coupler sign convention only shifts the phase") {
    std::mt19937_64 rng(103);
    FanoutParams fanout = testutil::random_fanout(rng);
    BWFMatrix bwf = single_bin_bwf(1.0);
    SourceParams params = source_with_beta(kPi, 0.4);

    GhzEnd minus = run_ghz(params, fanout, bwf, PsiVariant::direct, CouplerSign::fanout);
    GhzEnd plus = run_ghz(params, fanout, bwf, PsiVariant::direct, CouplerSign::source);
    CHECK_THAT(plus.fourfold.probability,
               Catch::Matchers::WithinAbs(minus.fourfold.probability, 1e-12));
    CHECK_THAT(std::abs(wrap_angle(plus.report.theta_measured - minus.report.theta_measured)),
               Catch::Matchers::WithinAbs(kPi, 1e-12));
}

TEST_CASE("the fourfold stage is invariant in the pump phase difference") {
    BWFMatrix bwf = single_bin_bwf();
    GhzEnd at_pi = run_ghz(source_with_beta(kPi, 0.4), FanoutParams{}, bwf);
    for (double phi : {kPi / 2.0, 3.0 * kPi / 4.0, 1.0, 2.5}) {
        GhzEnd end = run_ghz(source_with_beta(phi, 0.4), FanoutParams{}, bwf);
        CHECK_THAT(end.fourfold.probability,
                   Catch::Matchers::WithinAbs(at_pi.fourfold.probability, 1e-12));
        CHECK_THAT(end.report.fidelity, Catch::Matchers::WithinAbs(at_pi.report.fidelity, 1e-12));
        CHECK_THAT(end.report.theta_measured,
                   Catch::Matchers::WithinAbs(at_pi.report.theta_measured, 1e-12));
    }
}

TEST_CASE("multi-bin runs report one GHZ extraction per detector k assignment") {
    KGrid grid{0.0, 0.6, 2};
    SourceParams params = source_with_beta(kPi, 0.4);

    SECTION("separable spectrum, equal lengths: every assignment is ideal") {
        BWFMatrix bwf = discretize(SeparableGaussian{1.0}, grid).bwf;
        PairAmplitudeTable table = pair_amplitudes(params, bwf);
        Complex beta = effective_beta(table.raw_norm, params.beta_ring);
        OperatorPoly detector_op = heisenberg_rewrite(pair_creation_operator(table),
                                                      build_fanout(FanoutParams{}, grid));
        ExpansionState e = expand_output(detector_op, beta);
        CHECK_THAT(e.four_norm_factor, Catch::Matchers::WithinAbs(std::sqrt(3.0) / 2.0, 1e-10));

        PostselectResult post = postselect(e.four_photon.scaled(e.four_coefficient),
                                           fourfold_with_target());
        CHECK_THAT(post.probability,
                   Catch::Matchers::WithinAbs(std::norm(beta) * std::norm(beta) / 16.0, 1e-12));

        auto reports = ghz_extract_by_k(post.conditional, FanoutParams{});
        CHECK(reports.size() == 16);  // 2^4 wavevector assignments
        double weight_total = 0.0;
        for (const GhzReport& rep : reports) {
            weight_total += rep.weight;
            CHECK_THAT(rep.theta_measured, Catch::Matchers::WithinAbs(kPi / 2.0, 1e-12));
            CHECK_THAT(rep.fidelity, Catch::Matchers::WithinAbs(1.0, 1e-10));
            CHECK(rep.conditional.support_size() == 2);
        }
        CHECK_THAT(weight_total, Catch::Matchers::WithinAbs(1.0, 1e-12));
    }

    SECTION("correlated spectrum: weights split but stay normalized") {
        BWFMatrix bwf = discretize(CorrelatedGaussian{2.5, 0.7}, grid).bwf;
        PairAmplitudeTable table = pair_amplitudes(params, bwf);
        Complex beta = effective_beta(table.raw_norm, params.beta_ring);
        OperatorPoly detector_op = heisenberg_rewrite(pair_creation_operator(table),
                                                      build_fanout(FanoutParams{}, grid));
        ExpansionState e = expand_output(detector_op, beta);
        PostselectResult post = postselect(e.four_photon.scaled(e.four_coefficient),
                                           fourfold_with_target());
        auto reports = ghz_extract_by_k(post.conditional, FanoutParams{});
        double weight_total = 0.0;
        for (const GhzReport& rep : reports) weight_total += rep.weight;
        CHECK_THAT(weight_total, Catch::Matchers::WithinAbs(1.0, 1e-12));
        CHECK(reports.size() == 16);
    }
}

TEST_CASE("bucket detectors match number-resolving ones on the four-photon stage") {
    BWFMatrix bwf = single_bin_bwf();
    SourceParams params = source_with_beta(kPi, 0.4);
    PairAmplitudeTable table = pair_amplitudes(params, bwf);
    OperatorPoly detector_op = heisenberg_rewrite(pair_creation_operator(table),
                                                  build_fanout(FanoutParams{}, bwf.grid));
    ExpansionState e = expand_output(detector_op, effective_beta(table.raw_norm, params.beta_ring));
    KetVector scaled = e.four_photon.scaled(e.four_coefficient);
    double exact = postselect(scaled, fourfold_with_target(DetectorMode::number_resolving)).probability;
    double bucket = postselect(scaled, fourfold_with_target(DetectorMode::bucket)).probability;
    CHECK_THAT(exact, Catch::Matchers::WithinAbs(bucket, 1e-15));
}

TEST_CASE("bucket detectors only distinguish clicked from empty") {
    auto u = detector_universe(single_bin_grid());
    KetVector state(u);
    state.add(Complex(0.6, 0.0), FockBasisState{ModePowers::single(ModeId{Channel::T, 0}, 1)});
    state.add(Complex(0.8, 0.0), FockBasisState{ModePowers::single(ModeId{Channel::T, 0}, 2)});

    DetectionPattern exact_one;
    exact_one.ports[Channel::T] = 1;
    CHECK_THAT(postselect(state, exact_one).probability, Catch::Matchers::WithinAbs(0.36, 1e-15));

    DetectionPattern clicked = exact_one;
    clicked.mode = DetectorMode::bucket;
    CHECK_THAT(postselect(state, clicked).probability, Catch::Matchers::WithinAbs(1.0, 1e-15));
}
