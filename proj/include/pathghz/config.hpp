// Run configuration: JSON schema mirroring the parameter types, with field
// paths in every error, plus the canonical config digest stamped into CSVs.
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathghz/errors.hpp"
#include "pathghz/modes.hpp"
#include "pathghz/params.hpp"
#include "pathghz/pipeline.hpp"
#include "pathghz/spectral.hpp"

namespace pathghz {

using nlohmann::json;

struct SweepSpec {
    std::string parameter;
    std::vector<double> values;
};

struct RunConfig {
    SourceParams source;
    FanoutParams fanout;
    BWFModel bwf = SingleBin{};
    KGrid grid;
    std::optional<Complex> beta;       // exactly one of beta / beta_ring
    std::optional<Complex> beta_ring;
    double rep_rate_hz = 1e6;
    PsiVariant psi_variant = PsiVariant::direct;
    DetectorMode detector_mode = DetectorMode::number_resolving;
    std::optional<SweepSpec> sweep;
    json canonical;  // parsed document, reserialized for the digest
};

namespace detail {

inline validation_error field_error(const std::string& path, const std::string& what) {
    return validation_error("config field '" + path + "': " + what);
}

inline double get_number(const json& obj, const std::string& path, const std::string& key,
                         std::optional<double> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        throw field_error(path + "." + key, "missing");
    }
    const json& v = obj.at(key);
    if (!v.is_number()) throw field_error(path + "." + key, "expected a number");
    return v.get<double>();
}

inline int get_int(const json& obj, const std::string& path, const std::string& key,
                   std::optional<int> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        throw field_error(path + "." + key, "missing");
    }
    const json& v = obj.at(key);
    if (!v.is_number_integer()) throw field_error(path + "." + key, "expected an integer");
    return v.get<int>();
}

inline const json& get_object(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) throw field_error(path.empty() ? key : path + "." + key, "missing");
    const json& v = obj.at(key);
    if (!v.is_object())
        throw field_error(path.empty() ? key : path + "." + key, "expected an object");
    return v;
}

// Complex amplitudes are given as {"abs":..,"phase":..} or a plain number.
inline Complex get_complex(const json& v, const std::string& path) {
    if (v.is_number()) return Complex(v.get<double>(), 0.0);
    if (v.is_object()) {
        double mag = get_number(v, path, "abs");
        double phase = v.contains("phase") ? get_number(v, path, "phase") : 0.0;
        return mag * std::exp(Complex(0.0, phase));
    }
    throw field_error(path, "expected a number or {abs, phase}");
}

inline void check_known_keys(const json& obj, const std::string& path,
                             std::initializer_list<const char*> known) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* k : known)
            if (key == k) ok = true;
        if (!ok) throw field_error(path.empty() ? key : path + "." + key, "unknown field");
    }
}

}  // namespace detail

inline RunConfig parse_config(const json& doc) {
    using namespace detail;
    if (!doc.is_object()) throw validation_error("config root must be a JSON object");
    check_known_keys(doc, "",
                     {"source", "fanout", "bwf", "grid", "beta", "beta_ring", "rep_rate_hz",
                      "psi_variant", "detector_mode", "sweep"});

    RunConfig cfg;
    cfg.canonical = doc;

    const json& src = get_object(doc, "", "source");
    check_known_keys(src, "source", {"t", "r", "phi", "phi1", "phi2", "L1", "L2", "L3",
                                     "pump_phase"});
    cfg.source.t = get_number(src, "source", "t");
    cfg.source.r = src.contains("r") ? get_number(src, "source", "r")
                                     : std::sqrt(std::max(0.0, 1.0 - cfg.source.t * cfg.source.t));
    cfg.source.phi = get_number(src, "source", "phi", kPi);
    cfg.source.phi1 = get_number(src, "source", "phi1", kPi / 2.0);
    cfg.source.phi2 = get_number(src, "source", "phi2", kPi / 2.0);
    cfg.source.L1 = get_number(src, "source", "L1", 0.0);
    cfg.source.L2 = get_number(src, "source", "L2", 0.0);
    cfg.source.L3 = get_number(src, "source", "L3", 0.0);
    cfg.source.pump_phase = get_number(src, "source", "pump_phase", 0.0);

    if (doc.contains("fanout")) {
        const json& fan = get_object(doc, "", "fanout");
        check_known_keys(fan, "fanout", {"t1", "r1", "t2", "r2", "t3", "r3", "L_T", "L_1_0",
                                         "L_1_1", "L_2_0", "L_2_1", "L_3_0", "L_3_1"});
        auto coupler = [&](const char* tk, const char* rk, double& t, double& r) {
            t = get_number(fan, "fanout", tk, 1.0 / std::sqrt(2.0));
            r = fan.contains(rk) ? get_number(fan, "fanout", rk)
                                 : std::sqrt(std::max(0.0, 1.0 - t * t));
        };
        coupler("t1", "r1", cfg.fanout.t1, cfg.fanout.r1);
        coupler("t2", "r2", cfg.fanout.t2, cfg.fanout.r2);
        coupler("t3", "r3", cfg.fanout.t3, cfg.fanout.r3);
        cfg.fanout.L_T = get_number(fan, "fanout", "L_T", 0.0);
        cfg.fanout.L_1_0 = get_number(fan, "fanout", "L_1_0", 0.0);
        cfg.fanout.L_1_1 = get_number(fan, "fanout", "L_1_1", 0.0);
        cfg.fanout.L_2_0 = get_number(fan, "fanout", "L_2_0", 0.0);
        cfg.fanout.L_2_1 = get_number(fan, "fanout", "L_2_1", 0.0);
        cfg.fanout.L_3_0 = get_number(fan, "fanout", "L_3_0", 0.0);
        cfg.fanout.L_3_1 = get_number(fan, "fanout", "L_3_1", 0.0);
    }

    if (doc.contains("grid")) {
        const json& grid = get_object(doc, "", "grid");
        check_known_keys(grid, "grid", {"k0", "dk", "n_bins"});
        cfg.grid.k0 = get_number(grid, "grid", "k0", 0.0);
        cfg.grid.dk = get_number(grid, "grid", "dk", 0.0);
        cfg.grid.n_bins = get_int(grid, "grid", "n_bins", 1);
        cfg.grid.validate();
    }

    if (doc.contains("bwf")) {
        const json& bwf = get_object(doc, "", "bwf");
        check_known_keys(bwf, "bwf", {"model", "sigma", "sigma_s", "sigma_a"});
        if (!bwf.contains("model") || !bwf.at("model").is_string())
            throw field_error("bwf.model", "expected a string");
        std::string model = bwf.at("model").get<std::string>();
        if (model == "single_bin") {
            cfg.bwf = SingleBin{};
        } else if (model == "separable_gaussian") {
            cfg.bwf = SeparableGaussian{get_number(bwf, "bwf", "sigma")};
        } else if (model == "correlated_gaussian") {
            cfg.bwf = CorrelatedGaussian{get_number(bwf, "bwf", "sigma_s"),
                                         get_number(bwf, "bwf", "sigma_a")};
        } else {
            throw field_error("bwf.model",
                              "unknown model (single_bin, separable_gaussian, "
                              "correlated_gaussian)");
        }
    }

    const bool has_beta = doc.contains("beta");
    const bool has_beta_ring = doc.contains("beta_ring");
    if (has_beta == has_beta_ring)
        throw validation_error("config must set exactly one of 'beta' and 'beta_ring'");
    if (has_beta) cfg.beta = detail::get_complex(doc.at("beta"), "beta");
    if (has_beta_ring) {
        cfg.beta_ring = detail::get_complex(doc.at("beta_ring"), "beta_ring");
        cfg.source.beta_ring = *cfg.beta_ring;
    }

    if (doc.contains("rep_rate_hz")) {
        if (!doc.at("rep_rate_hz").is_number())
            throw field_error("rep_rate_hz", "expected a number");
        cfg.rep_rate_hz = doc.at("rep_rate_hz").get<double>();
        if (cfg.rep_rate_hz < 0.0) throw field_error("rep_rate_hz", "must be >= 0");
    }

    if (doc.contains("psi_variant")) {
        std::string v = doc.at("psi_variant").is_string()
                            ? doc.at("psi_variant").get<std::string>()
                            : throw field_error("psi_variant", "expected a string");
        if (v == "paper") cfg.psi_variant = PsiVariant::paper;
        else if (v == "direct") cfg.psi_variant = PsiVariant::direct;
        else throw field_error("psi_variant", "must be 'paper' or 'direct'");
    }

    if (doc.contains("detector_mode")) {
        std::string v = doc.at("detector_mode").is_string()
                            ? doc.at("detector_mode").get<std::string>()
                            : throw field_error("detector_mode", "expected a string");
        if (v == "number_resolving") cfg.detector_mode = DetectorMode::number_resolving;
        else if (v == "bucket") cfg.detector_mode = DetectorMode::bucket;
        else throw field_error("detector_mode", "must be 'number_resolving' or 'bucket'");
    }

    if (doc.contains("sweep")) {
        const json& sweep = get_object(doc, "", "sweep");
        check_known_keys(sweep, "sweep", {"parameter", "values"});
        if (!sweep.contains("parameter") || !sweep.at("parameter").is_string())
            throw field_error("sweep.parameter", "expected a string");
        if (!sweep.contains("values") || !sweep.at("values").is_array() ||
            sweep.at("values").empty())
            throw field_error("sweep.values", "expected a nonempty array of numbers");
        SweepSpec spec;
        spec.parameter = sweep.at("parameter").get<std::string>();
        for (const json& v : sweep.at("values")) {
            if (!v.is_number()) throw field_error("sweep.values", "expected numbers");
            spec.values.push_back(v.get<double>());
        }
        cfg.sweep = std::move(spec);
    }

    cfg.source.validate();
    cfg.fanout.validate();
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open config file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw validation_error("config parse error in " + path + ": " + e.what());
    }
    return parse_config(doc);
}

// FNV-1a over the canonicalized (key-sorted) serialization.
inline std::uint64_t config_digest(const json& canonical) {
    const std::string text = canonical.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Set one sweepable parameter by its dotted path. Coupler amplitudes keep
// t^2 + r^2 = 1 by adjusting the partner amplitude.
inline void set_parameter(RunConfig& cfg, const std::string& path, double value) {
    auto couple = [](double& t, double& r, double v) {
        if (v < 0.0 || v > 1.0) throw validation_error("coupler amplitude must be in [0,1]");
        t = v;
        r = std::sqrt(1.0 - v * v);
    };
    if (path == "source.t") couple(cfg.source.t, cfg.source.r, value);
    else if (path == "source.phi") cfg.source.phi = value;
    else if (path == "source.phi1") cfg.source.phi1 = value;
    else if (path == "source.phi2") cfg.source.phi2 = value;
    else if (path == "source.L1") cfg.source.L1 = value;
    else if (path == "source.L2") cfg.source.L2 = value;
    else if (path == "source.L3") cfg.source.L3 = value;
    else if (path == "source.pump_phase") cfg.source.pump_phase = value;
    else if (path == "fanout.t1") couple(cfg.fanout.t1, cfg.fanout.r1, value);
    else if (path == "fanout.t2") couple(cfg.fanout.t2, cfg.fanout.r2, value);
    else if (path == "fanout.t3") couple(cfg.fanout.t3, cfg.fanout.r3, value);
    else if (path == "fanout.L_T") cfg.fanout.L_T = value;
    else if (path == "fanout.L_1_0") cfg.fanout.L_1_0 = value;
    else if (path == "fanout.L_1_1") cfg.fanout.L_1_1 = value;
    else if (path == "fanout.L_2_0") cfg.fanout.L_2_0 = value;
    else if (path == "fanout.L_2_1") cfg.fanout.L_2_1 = value;
    else if (path == "fanout.L_3_0") cfg.fanout.L_3_0 = value;
    else if (path == "fanout.L_3_1") cfg.fanout.L_3_1 = value;
    else if (path == "beta_ring.abs") {
        if (!cfg.beta_ring) throw validation_error("sweep parameter beta_ring.abs needs beta_ring");
        double phase = std::arg(*cfg.beta_ring);
        cfg.beta_ring = value * std::exp(Complex(0.0, phase));
        cfg.source.beta_ring = *cfg.beta_ring;
    } else if (path == "beta.abs") {
        if (!cfg.beta) throw validation_error("sweep parameter beta.abs needs beta");
        double phase = std::arg(*cfg.beta);
        cfg.beta = value * std::exp(Complex(0.0, phase));
    } else if (path == "grid.k0") cfg.grid.k0 = value;
    else if (path == "rep_rate_hz") cfg.rep_rate_hz = value;
    else
        throw validation_error(
            "unknown sweep parameter '" + path +
            "' (known: source.{t,phi,phi1,phi2,L1,L2,L3,pump_phase}, "
            "fanout.{t1,t2,t3,L_T,L_1_0,L_1_1,L_2_0,L_2_1,L_3_0,L_3_1}, "
            "beta_ring.abs, beta.abs, grid.k0, rep_rate_hz)");
}

}  // namespace pathghz
