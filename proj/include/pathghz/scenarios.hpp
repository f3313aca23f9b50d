// Scenario runner behind the CLI: each scenario drives the library end to end
// and emits deterministic CSV files into the output directory.
#pragma once

#include <cstdint>
#include <filesystem>
#include <future>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "pathghz/config.hpp"
#include "pathghz/csv.hpp"
#include "pathghz/oracle.hpp"
#include "pathghz/pipeline.hpp"
#include "pathghz/source.hpp"

namespace pathghz {

enum class Scenario { bell, ghz, rate, schmidt, oracle_check, sweep };

inline Scenario parse_scenario(const std::string& name) {
    if (name == "bell") return Scenario::bell;
    if (name == "ghz") return Scenario::ghz;
    if (name == "rate") return Scenario::rate;
    if (name == "schmidt") return Scenario::schmidt;
    if (name == "oracle-check") return Scenario::oracle_check;
    if (name == "sweep") return Scenario::sweep;
    throw validation_error("unknown scenario '" + name +
                           "' (bell, ghz, rate, schmidt, oracle-check, sweep)");
}

namespace detail {

struct Resolved {
    BWFMatrix bwf;
    std::vector<std::string> warnings;
    PairAmplitudeTable table;
    Complex beta;
};

inline Resolved resolve(const RunConfig& cfg) {
    Resolved r;
    Discretized d = discretize(cfg.bwf, cfg.grid);
    r.bwf = std::move(d.bwf);
    r.warnings = std::move(d.warnings);
    r.table = pair_amplitudes(cfg.source, r.bwf, cfg.psi_variant);
    r.beta = cfg.beta ? *cfg.beta : effective_beta(r.table.raw_norm, *cfg.beta_ring);
    return r;
}

struct GhzRun {
    std::vector<GhzReport> reports;
    double probability = 0.0;       // fourfold pattern probability
    double four_norm_factor = 0.0;  // nu
    Complex beta;
};

inline GhzRun run_ghz(const RunConfig& cfg) {
    Resolved r = resolve(cfg);
    OperatorPoly pair_op = pair_creation_operator(r.table);
    ModeMap fanout = build_fanout(cfg.fanout, cfg.grid);
    OperatorPoly detector_op = heisenberg_rewrite(pair_op, fanout);
    ExpansionState expansion = expand_output(detector_op, r.beta);

    PostselectResult post = postselect(expansion.four_photon.scaled(expansion.four_coefficient),
                                       fourfold_with_target(cfg.detector_mode));
    if (post.empty) throw numeric_check_error("ghz: fourfold pattern has no support");

    GhzRun run;
    run.reports = ghz_extract_by_k(post.conditional, cfg.fanout);
    run.probability = post.probability;
    run.four_norm_factor = expansion.four_norm_factor;
    run.beta = r.beta;
    for (auto& rep : run.reports) rep.probability = post.probability * rep.weight;
    return run;
}

inline void emit_warnings(CsvWriter& csv, const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) csv.comment("warning: " + w);
}

}  // namespace detail

inline void write_pair_table(const PairAmplitudeTable& table, const std::filesystem::path& path,
                             std::uint64_t digest) {
    CsvWriter csv(path, digest, {"k1_index", "k2_index", "p", "q", "re", "im"});
    for (const auto& [pq, m] : table.entries)
        for (int i = 0; i < table.grid.n_bins; ++i)
            for (int j = 0; j < table.grid.n_bins; ++j)
                csv.row({std::to_string(i), std::to_string(j),
                         std::string(channel_name(pq.first)), std::string(channel_name(pq.second)),
                         csv_number(m(i, j).real()), csv_number(m(i, j).imag())});
}

inline void write_ket(const KetVector& ket, const std::filesystem::path& path,
                      std::uint64_t digest) {
    CsvWriter csv(path, digest, {"state", "re", "im"});
    for (const auto& [basis, amp] : ket.amplitudes())
        csv.row({state_name(basis), csv_number(amp.real()), csv_number(amp.imag())});
}

inline void scenario_bell(const RunConfig& cfg, const std::filesystem::path& out,
                          std::uint64_t digest) {
    detail::Resolved r = detail::resolve(cfg);
    KetVector two = apply(pair_creation_operator(r.table),
                          KetVector::vacuum(source_universe(cfg.grid)));
    double fid = fidelity(bell_psi_minus_reference(r.bwf), two);
    CsvWriter csv(out / "bell.csv", digest, {"phi", "fidelity_psi_minus", "two_photon_norm"});
    detail::emit_warnings(csv, r.warnings);
    csv.row({csv_number(cfg.source.phi), csv_number(fid), csv_number(two.norm())});
    write_pair_table(r.table, out / "pair_table.csv", digest);
    write_ket(two, out / "two_photon_state.csv", digest);
}

inline void scenario_ghz(const RunConfig& cfg, const std::filesystem::path& out,
                         std::uint64_t digest) {
    detail::GhzRun run = detail::run_ghz(cfg);
    CsvWriter csv(out / "ghz.csv", digest,
                  {"k_T", "k_D1", "k_D2", "k_D3", "probability", "theta_measured",
                   "theta_formula", "theta_residual", "fidelity", "gamma", "weight"});
    csv.comment("psi_variant=" + std::string(cfg.psi_variant == PsiVariant::paper ? "paper"
                                                                                  : "direct"));
    csv.comment("beta_abs2=" + csv_number(std::norm(run.beta)));
    csv.comment("four_norm_factor=" + csv_number(run.four_norm_factor));
    const KGrid& grid = cfg.grid;
    KetVector conditional;
    for (const GhzReport& rep : run.reports) {
        double residual = wrap_angle(rep.theta_measured - rep.theta_formula);
        csv.row({csv_number(grid.wavevector(rep.kbins[0])), csv_number(grid.wavevector(rep.kbins[1])),
                 csv_number(grid.wavevector(rep.kbins[2])), csv_number(grid.wavevector(rep.kbins[3])),
                 csv_number(rep.probability), csv_number(rep.theta_measured),
                 csv_number(rep.theta_formula), csv_number(residual), csv_number(rep.fidelity),
                 csv_number(rep.gamma), csv_number(rep.weight)});
        conditional = conditional.universe() == rep.conditional.universe()
                          ? conditional + rep.conditional.scaled(std::sqrt(rep.weight))
                          : rep.conditional.scaled(std::sqrt(rep.weight));
    }
    write_ket(conditional, out / "ghz_conditional.csv", digest);
}

inline void scenario_rate(const RunConfig& cfg, const std::filesystem::path& out,
                          std::uint64_t digest) {
    detail::Resolved r = detail::resolve(cfg);
    double rate = generation_rate(r.beta, cfg.rep_rate_hz);
    CsvWriter csv(out / "rate.csv", digest, {"beta_abs2", "rep_rate_hz", "rate_hz"});
    detail::emit_warnings(csv, r.warnings);
    if (generation_rate_warning(r.beta))
        csv.comment("warning: |beta|^2 > 0.2, the low-gain expansion is strained");
    csv.row({csv_number(std::norm(r.beta)), csv_number(cfg.rep_rate_hz), csv_number(rate)});
}

inline void scenario_schmidt(const RunConfig& cfg, const std::filesystem::path& out,
                             std::uint64_t digest) {
    Discretized d = discretize(cfg.bwf, cfg.grid);
    SchmidtResult s = schmidt(d.bwf);
    CsvWriter csv(out / "schmidt.csv", digest, {"index", "coefficient"});
    detail::emit_warnings(csv, d.warnings);
    csv.comment("purity=" + csv_number(s.purity));
    csv.comment("schmidt_number=" + csv_number(1.0 / s.purity));
    for (std::size_t i = 0; i < s.coefficients.size(); ++i)
        csv.row({std::to_string(i), csv_number(s.coefficients[i])});

    CsvWriter bwf_csv(out / "bwf.csv", digest, {"k1_index", "k2_index", "re", "im"});
    for (int i = 0; i < cfg.grid.n_bins; ++i)
        for (int j = 0; j < cfg.grid.n_bins; ++j)
            bwf_csv.row({std::to_string(i), std::to_string(j),
                         csv_number(d.bwf.values(i, j).real()),
                         csv_number(d.bwf.values(i, j).imag())});
}

inline void scenario_oracle_check(const RunConfig& cfg, const std::filesystem::path& out,
                                  std::uint64_t digest, std::uint64_t seed) {
    constexpr int kCases = 5;
    constexpr double kStateTol = 1e-10;
    constexpr double kTableTol = 1e-12;

    CsvWriter csv(out / "oracle_check.csv", digest,
                  {"case", "table_deviation", "state_deviation", "history_weight_error", "pass"});
    bool all_pass = true;
    for (int i = 0; i < kCases; ++i) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(i));
        auto uniform = [&](double lo, double hi) {
            return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        };
        // unbalanced couplers, pump phase kept away from 0 and pi
        RunConfig rc = cfg;
        rc.grid = KGrid{uniform(0.5, 2.0), 0.0, 1};
        rc.bwf = SingleBin{};
        rc.source.t = uniform(0.3, 0.95);
        rc.source.r = std::sqrt(1.0 - rc.source.t * rc.source.t);
        rc.source.phi = uniform(0.25, 2.0 * kPi - 0.25);
        if (std::abs(rc.source.phi - kPi) < 0.2) rc.source.phi += 0.35;
        rc.source.phi1 = uniform(0.0, 2.0 * kPi);
        rc.source.phi2 = uniform(0.0, 2.0 * kPi);
        rc.source.L1 = uniform(0.0, 2.0);
        rc.source.L2 = uniform(0.0, 2.0);
        rc.source.L3 = uniform(0.0, 2.0);
        rc.source.pump_phase = uniform(0.0, 2.0 * kPi);
        auto rand_coupler = [&](double& t, double& r) {
            t = uniform(0.3, 0.95);
            r = std::sqrt(1.0 - t * t);
        };
        rand_coupler(rc.fanout.t1, rc.fanout.r1);
        rand_coupler(rc.fanout.t2, rc.fanout.r2);
        rand_coupler(rc.fanout.t3, rc.fanout.r3);
        rc.fanout.L_T = uniform(0.0, 2.0);
        rc.fanout.L_1_0 = uniform(0.0, 2.0);
        rc.fanout.L_1_1 = uniform(0.0, 2.0);
        rc.fanout.L_2_0 = uniform(0.0, 2.0);
        rc.fanout.L_2_1 = uniform(0.0, 2.0);
        rc.fanout.L_3_0 = uniform(0.0, 2.0);
        rc.fanout.L_3_1 = uniform(0.0, 2.0);
        rc.beta = std::nullopt;
        rc.beta_ring = uniform(0.1, 0.5) * std::exp(Complex(0.0, uniform(0.0, 2.0 * kPi)));
        rc.source.beta_ring = *rc.beta_ring;
        rc.psi_variant = PsiVariant::direct;

        BWFMatrix bwf = discretize(rc.bwf, rc.grid).bwf;

        // 1. pair table: closed forms vs history enumeration
        PairAmplitudeTable analytic = pair_amplitudes(rc.source, bwf, rc.psi_variant);
        PairAmplitudeTable enumerated = oracle::enumerate_pair_amplitudes(rc.source, bwf);
        double table_dev = std::abs(analytic.raw_norm - enumerated.raw_norm);
        for (const auto& [pq, m] : analytic.entries)
            table_dev = std::max(table_dev,
                                 (m - *enumerated.entry(pq.first, pq.second)).cwiseAbs().maxCoeff());

        // 2. full truncated state at the detectors: pipeline vs dense oracle
        Complex beta = effective_beta(analytic.raw_norm, *rc.beta_ring);
        OperatorPoly detector_op =
            heisenberg_rewrite(pair_creation_operator(analytic), build_fanout(rc.fanout, rc.grid));
        KetVector truncated = truncated_state(expand_output(detector_op, beta));
        oracle::DenseKet dense = oracle::dense_expand(
            oracle::detector_pair_operator(rc.source, rc.fanout, bwf), beta);
        oracle::CompareReport state_cmp = oracle::compare(truncated, dense, kStateTol);

        // 3. lossless routing: per-channel history weights sum to 1
        double weight_err = 0.0;
        for (Channel c : kSourceChannels)
            weight_err = std::max(
                weight_err,
                std::abs(oracle::single_photon_history_weight(c, rc.grid.k0, rc.fanout) - 1.0));

        bool pass = table_dev <= kTableTol && state_cmp.pass && weight_err <= 1e-12;
        all_pass = all_pass && pass;
        csv.row({std::to_string(i), csv_number(table_dev), csv_number(state_cmp.max_deviation),
                 csv_number(weight_err), pass ? "1" : "0"});
    }
    if (!all_pass) throw numeric_check_error("oracle-check: pipeline and oracle disagree");
}

inline void scenario_sweep(const RunConfig& cfg, const std::filesystem::path& out,
                           std::uint64_t digest) {
    if (!cfg.sweep) throw validation_error("sweep scenario requires a 'sweep' config section");
    const SweepSpec& sweep = *cfg.sweep;

    struct Row {
        double value;
        double probability, theta_measured, theta_formula, fidelity;
    };
    std::vector<std::future<Row>> futures;
    futures.reserve(sweep.values.size());
    for (double value : sweep.values)
        futures.push_back(std::async(std::launch::async, [&, value]() {
            RunConfig point = cfg;
            set_parameter(point, sweep.parameter, value);
            point.source.validate();
            point.fanout.validate();
            detail::GhzRun run = detail::run_ghz(point);
            const GhzReport& rep = run.reports.front();
            return Row{value, run.probability, rep.theta_measured, rep.theta_formula,
                       rep.fidelity};
        }));

    CsvWriter csv(out / "sweep.csv", digest,
                  {"parameter", "value", "probability", "theta_measured", "theta_formula",
                   "fidelity"});
    for (auto& f : futures) {  // rows ordered by sweep index, not completion
        Row row = f.get();
        csv.row({sweep.parameter, csv_number(row.value), csv_number(row.probability),
                 csv_number(row.theta_measured), csv_number(row.theta_formula),
                 csv_number(row.fidelity)});
    }
}

// Exit codes: 0 success, 1 validation failure, 2 numerical-check failure.
inline int run_scenario(const RunConfig& cfg, Scenario scenario,
                        const std::filesystem::path& out_dir, std::uint64_t seed) {
    try {
        std::filesystem::create_directories(out_dir);
        std::uint64_t digest = config_digest(cfg.canonical);
        switch (scenario) {
            case Scenario::bell: scenario_bell(cfg, out_dir, digest); break;
            case Scenario::ghz: scenario_ghz(cfg, out_dir, digest); break;
            case Scenario::rate: scenario_rate(cfg, out_dir, digest); break;
            case Scenario::schmidt: scenario_schmidt(cfg, out_dir, digest); break;
            case Scenario::oracle_check: scenario_oracle_check(cfg, out_dir, digest, seed); break;
            case Scenario::sweep: scenario_sweep(cfg, out_dir, digest); break;
        }
    } catch (const validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const numeric_check_error& e) {
        std::cerr << "numerical check failed: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace pathghz
