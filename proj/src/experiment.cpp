#include "qjscc/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace qjscc {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("invalid numeric value for " + what + ": '" + s + "'");
    }
}

long long to_int(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("invalid integer value for " + what + ": '" + s + "'");
    }
}

std::vector<double> to_double_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    for (const auto& tok : split_list(s)) out.push_back(to_double(tok, what));
    return out;
}

std::string join(const std::vector<std::string>& items, const std::string& sep) {
    std::string out;
    for (size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

}  // namespace

std::string format_value(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

// ---------------------------------------------------------------------------
// IniDoc

IniDoc IniDoc::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

IniDoc IniDoc::parse_text(const std::string& text) {
    IniDoc doc;
    std::stringstream ss(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("malformed section header at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            doc.sections_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value at line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("empty key at line " + std::to_string(lineno));
        doc.sections_[section][key] = value;
    }
    return doc;
}

bool IniDoc::has(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
}

std::string IniDoc::get(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return fallback;
    const auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
}

std::string IniDoc::require(const std::string& section, const std::string& key) const {
    if (!has(section, key))
        throw ConfigError("missing required config key [" + section + "] " + key);
    return get(section, key, "");
}

void IniDoc::set(const std::string& section, const std::string& key, const std::string& value) {
    sections_[section][key] = value;
}

std::string IniDoc::render() const {
    std::string out;
    for (const auto& [name, kv] : sections_) {
        out += "[" + name + "]\n";
        for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
        out += "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// ExperimentConfig

FrontEnd ExperimentConfig::front_end() const { return front_end(step); }

FrontEnd ExperimentConfig::front_end(double d) const {
    FrontEnd fe;
    fe.channel = channel;
    fe.quantizer = levels == 2 ? one_bit_quantizer() : uniform_midtread_quantizer(levels, d);
    fe.validate();
    return fe;
}

double ExperimentConfig::power_from_gamma(double gamma) const {
    return gamma * channel.noise_sigmas.square().sum() / channel.branches();
}

void ExperimentConfig::validate_scheme(const std::string& name) const {
    const bool onebit_single = channel.branches() == 1 && levels == 2;
    if ((name == "prop1" || name == "bpsk" || name == "dop" || name.rfind("pam", 0) == 0) &&
        !onebit_single)
        throw ConfigError("scheme '" + name + "' requires N = 1 with a one-bit ADC front end");
    if (name != "prop1" && name != "linear" && name != "bpsk" && name != "dop" &&
        name != "noe" && name.rfind("pam", 0) != 0)
        throw ConfigError("unknown scheme '" + name + "'");
    if (name.rfind("pam:", 0) == 0) to_int(name.substr(4), "pam levels");
}

ExperimentConfig ExperimentConfig::from_ini(const IniDoc& doc) {
    ExperimentConfig cfg;
    cfg.source.sigma_v = to_double(doc.get("source", "sigma_v", "1.0"), "[source] sigma_v");
    cfg.source.validate();

    const int branches =
        static_cast<int>(to_int(doc.get("channel", "branches", "1"), "[channel] branches"));
    if (doc.has("channel", "noise_sigmas")) {
        const auto sigmas = to_double_list(doc.require("channel", "noise_sigmas"),
                                           "[channel] noise_sigmas");
        cfg.channel.noise_sigmas =
            Eigen::Map<const Eigen::ArrayXd>(sigmas.data(), static_cast<Eigen::Index>(sigmas.size()));
        if (doc.has("channel", "branches") &&
            branches != cfg.channel.branches())
            throw ConfigError("[channel] branches disagrees with noise_sigmas length");
    } else {
        cfg.channel = ChannelSpec::uniform(
            branches, to_double(doc.get("channel", "sigma_w", "1.0"), "[channel] sigma_w"));
    }
    cfg.channel.validate();

    cfg.levels = static_cast<int>(to_int(doc.get("quantizer", "levels", "2"), "[quantizer] levels"));
    const std::string step = doc.get("quantizer", "step", "");
    if (step == "optimize") {
        cfg.optimize_step = true;
    } else if (!step.empty()) {
        cfg.step = to_double(step, "[quantizer] step");
    } else if (cfg.levels > 2) {
        throw ConfigError("[quantizer] step is required for K > 2 (or 'optimize')");
    }

    const std::string crit = doc.get("criterion", "kind", "mse");
    if (crit == "mse") {
        cfg.criterion = Criterion::mse;
    } else if (crit == "dop") {
        cfg.criterion = Criterion::dop;
        cfg.target_d = to_double(doc.require("criterion", "target_d"), "[criterion] target_d");
        if (!(cfg.target_d > 0)) throw ConfigError("[criterion] target_d must be > 0");
    } else {
        throw ConfigError("unknown criterion '" + crit + "'");
    }

    cfg.scheme = doc.get("scheme", "kind", "prop1");
    cfg.pam_levels =
        static_cast<int>(to_int(doc.get("scheme", "pam_levels", "3"), "[scheme] pam_levels"));

    cfg.gamma_db = to_double_list(doc.get("sweep", "gamma_db", "0"), "[sweep] gamma_db");
    if (doc.has("sweep", "lambda"))
        cfg.lambdas = to_double_list(doc.require("sweep", "lambda"), "[sweep] lambda");
    for (const auto& s : split_list(doc.get("sweep", "schemes", "")))
        cfg.sweep_schemes.push_back(s);
    if (cfg.sweep_schemes.empty()) cfg.sweep_schemes.push_back(cfg.scheme);

    cfg.grid_points =
        static_cast<int>(to_int(doc.get("grid", "points", "2001"), "[grid] points"));
    cfg.grid_half_width =
        to_double(doc.get("grid", "half_width_sigmas", "6"), "[grid] half_width_sigmas");

    cfg.descent.step_mu = to_double(doc.get("noe", "step_mu", "0"), "[noe] step_mu");
    cfg.descent.max_iters =
        static_cast<int>(to_int(doc.get("noe", "max_iters", "500"), "[noe] max_iters"));
    cfg.descent.grad_tol = to_double(doc.get("noe", "grad_tol", "1e-6"), "[noe] grad_tol");
    cfg.descent.backtracking =
        to_double(doc.get("noe", "backtracking", "0.5"), "[noe] backtracking");
    cfg.max_rounds = static_cast<int>(to_int(doc.get("noe", "max_rounds", "50"), "[noe] max_rounds"));

    cfg.sim_enabled = doc.get("sim", "enabled", "false") == "true";
    cfg.sim.n_samples = to_int(doc.get("sim", "n_samples", "1000000"), "[sim] n_samples");
    cfg.sim.seed = static_cast<std::uint64_t>(
        to_int(doc.get("sim", "seed", "24257"), "[sim] seed"));
    cfg.sim.batch = to_int(doc.get("sim", "batch", "65536"), "[sim] batch");

    cfg.tol.root_abs = to_double(doc.get("tolerances", "root_abs", "1e-12"), "root_abs");
    cfg.tol.quad_rel = to_double(doc.get("tolerances", "quad_rel", "1e-10"), "quad_rel");
    cfg.tol.search_abs = to_double(doc.get("tolerances", "search_abs", "1e-10"), "search_abs");
    cfg.tol.validate();

    cfg.out_dir = doc.get("output", "dir", "out");
    cfg.jobs = static_cast<int>(to_int(doc.get("output", "jobs", "1"), "[output] jobs"));

    for (const auto& s : cfg.sweep_schemes) cfg.validate_scheme(s);
    cfg.validate_scheme(cfg.scheme);
    cfg.front_end(cfg.optimize_step ? 1.0 : cfg.step);  // shape check
    return cfg;
}

IniDoc ExperimentConfig::to_ini() const {
    IniDoc doc;
    doc.set("source", "sigma_v", format_value(source.sigma_v));
    doc.set("channel", "branches", std::to_string(channel.branches()));
    std::vector<std::string> sig;
    for (double s : channel.noise_sigmas) sig.push_back(format_value(s));
    doc.set("channel", "noise_sigmas", join(sig, ","));
    doc.set("quantizer", "levels", std::to_string(levels));
    if (optimize_step)
        doc.set("quantizer", "step", "optimize");
    else if (levels > 2)
        doc.set("quantizer", "step", format_value(step));
    doc.set("criterion", "kind", criterion == Criterion::mse ? "mse" : "dop");
    if (criterion == Criterion::dop) doc.set("criterion", "target_d", format_value(target_d));
    doc.set("scheme", "kind", scheme);
    doc.set("scheme", "pam_levels", std::to_string(pam_levels));
    std::vector<std::string> g;
    for (double x : gamma_db) g.push_back(format_value(x));
    doc.set("sweep", "gamma_db", join(g, ","));
    if (!lambdas.empty()) {
        std::vector<std::string> l;
        for (double x : lambdas) l.push_back(format_value(x));
        doc.set("sweep", "lambda", join(l, ","));
    }
    doc.set("sweep", "schemes", join(sweep_schemes, ","));
    doc.set("grid", "points", std::to_string(grid_points));
    doc.set("grid", "half_width_sigmas", format_value(grid_half_width));
    doc.set("noe", "step_mu", format_value(descent.step_mu));
    doc.set("noe", "max_iters", std::to_string(descent.max_iters));
    doc.set("noe", "grad_tol", format_value(descent.grad_tol));
    doc.set("noe", "backtracking", format_value(descent.backtracking));
    doc.set("noe", "max_rounds", std::to_string(max_rounds));
    doc.set("sim", "enabled", sim_enabled ? "true" : "false");
    doc.set("sim", "n_samples", std::to_string(sim.n_samples));
    doc.set("sim", "seed", std::to_string(sim.seed));
    doc.set("sim", "batch", std::to_string(sim.batch));
    doc.set("tolerances", "root_abs", format_value(tol.root_abs));
    doc.set("tolerances", "quad_rel", format_value(tol.quad_rel));
    doc.set("tolerances", "search_abs", format_value(tol.search_abs));
    doc.set("output", "dir", out_dir);
    doc.set("output", "jobs", std::to_string(jobs));
    return doc;
}

// ---------------------------------------------------------------------------
// Design construction

namespace {

DecoderTable table_for(const ExperimentConfig& cfg, const Mapping& mapping, const FrontEnd& fe) {
    return cfg.criterion == Criterion::mse
               ? mmse_table(mapping, fe, cfg.source, cfg.tol)
               : dop_table(mapping, fe, cfg.source, cfg.target_d, cfg.tol);
}

EvalResult eval_design(const ExperimentConfig& cfg, const Mapping& mapping,
                       const DecoderTable& table, const FrontEnd& fe) {
    return cfg.criterion == Criterion::mse
               ? mse_eval(mapping, table, fe, cfg.source, cfg.tol)
               : dop_eval(mapping, table, fe, cfg.source, cfg.target_d, cfg.tol);
}

int parse_pam_levels(const ExperimentConfig& cfg, const std::string& scheme) {
    if (scheme == "bpsk") return 2;
    if (scheme.rfind("pam:", 0) == 0) return static_cast<int>(to_int(scheme.substr(4), "pam"));
    return cfg.pam_levels;
}

Eigen::ArrayXd pam_thresholds(const ExperimentConfig& cfg, int m, double gamma) {
    if (m == 2) return Eigen::ArrayXd::Zero(1);
    if (m == 3) {
        const double c = mse_pam3_optimized(gamma, cfg.source.sigma_v, cfg.tol).threshold;
        Eigen::ArrayXd t(2);
        t << -c, c;
        return t;
    }
    // Symmetric equiprobable cells for higher orders.
    Eigen::ArrayXd t(m - 1);
    for (int i = 0; i < m - 1; ++i) {
        const double p = static_cast<double>(i + 1) / m;
        // crude Gaussian quantile via bisection on Q
        const double z = bisect_monotone(
            [&](double x) { return detail::q_raw(x) - (1.0 - p); }, -10, 10, cfg.tol);
        t[i] = z * cfg.source.sigma_v;
    }
    return t;
}

/// Stateful NOE designer: consecutive lambda probes warm-start from the last
/// converged solution so power calibration stays cheap.
struct NoeDesigner {
    const ExperimentConfig& cfg;
    FrontEnd fe;
    double init_power;
    std::optional<GridMapping> mapping;
    std::optional<DecoderTable> table;

    GridMapping solve(double lambda) {
        const Eigen::ArrayXd grid =
            mapping ? mapping->v_grid
                    : default_grid(cfg.source, cfg.grid_points, cfg.grid_half_width);
        GridMapping init =
            mapping ? *mapping
                    : (cfg.criterion == Criterion::mse
                           ? linear_encoder(init_power, cfg.source, grid, cfg.tol)
                           : make_grid_mapping(grid, Eigen::ArrayXd::Zero(grid.size()),
                                               cfg.source, cfg.tol));
        AlternateResult r = alternate(init, fe, cfg.source, lambda, cfg.criterion, cfg.target_d,
                                      cfg.descent, cfg.max_rounds, 1e-8, table);
        mapping = r.mapping;
        table = r.table;
        return r.mapping;
    }
};

}  // namespace

DesignPoint build_design(const ExperimentConfig& cfg, const std::string& scheme, double gamma,
                         const DesignPoint* warm) {
    cfg.validate_scheme(scheme);
    if (cfg.optimize_step && scheme != "noe")
        throw ConfigError("quantizer step optimization is only supported for the noe scheme");
    const double power = cfg.power_from_gamma(gamma);
    if (!(power > 0)) throw ConfigError("design requires gamma > 0");
    const FrontEnd fe = cfg.front_end(cfg.step);
    const Eigen::ArrayXd grid = default_grid(cfg.source, cfg.grid_points, cfg.grid_half_width);

    DesignPoint pt;
    pt.scheme = scheme;
    pt.gamma = gamma;
    pt.quantizer_step = cfg.levels > 2 ? cfg.step : 0.0;

    if (scheme == "prop1") {
        const double sw = fe.channel.noise_sigmas[0];
        CalibratedDesign cal = calibrate_lambda(
            [&](double l) { return prop1_encoder(l, cfg.source, sw, grid, cfg.tol); }, power,
            cfg.tol);
        pt.lambda = cal.lambda;
        pt.mapping = Mapping{std::move(cal.mapping)};
        pt.table = table_for(cfg, pt.mapping, fe);
    } else if (scheme == "linear") {
        pt.mapping = Mapping{linear_encoder(power, cfg.source, grid, cfg.tol)};
        pt.table = table_for(cfg, pt.mapping, fe);
    } else if (scheme == "bpsk" || scheme.rfind("pam", 0) == 0) {
        const int m = parse_pam_levels(cfg, scheme);
        PamDesign pam = pam_encoder(m, pam_thresholds(cfg, m, gamma), power, cfg.source);
        pt.mapping = Mapping{std::move(pam.mapping)};
        pt.table = table_for(cfg, pt.mapping, fe);
    } else if (scheme == "dop") {
        if (cfg.criterion != Criterion::dop)
            throw ConfigError("scheme 'dop' requires the DOP criterion");
        const double sw = fe.channel.noise_sigmas[0];
        const double lambda = calibrate_lambda_generic(
            [&](double l) {
                const DopDesign d = dop_onebit_design(l, cfg.target_d, cfg.source, sw, cfg.tol);
                return measure_power(Mapping{d.mapping}, cfg.source, cfg.tol);
            },
            power);
        DopDesign d = dop_onebit_design(lambda, cfg.target_d, cfg.source, sw, cfg.tol);
        pt.lambda = lambda;
        pt.mapping = Mapping{std::move(d.mapping)};
        pt.table = DecoderTable{d.decoder_values(), Criterion::dop, cfg.target_d};
    } else if (scheme == "noe") {
        NoeDesigner designer{cfg, fe, power, std::nullopt, std::nullopt};
        if (warm && std::holds_alternative<GridMapping>(warm->mapping)) {
            designer.mapping = std::get<GridMapping>(warm->mapping);
            designer.table = warm->table;
        }
        CalibratedDesign cal = calibrate_lambda(
            [&](double l) { return designer.solve(l); }, power, cfg.tol);
        pt.lambda = cal.lambda;
        pt.mapping = Mapping{std::move(cal.mapping)};
        pt.table = *designer.table;
    } else {
        throw ConfigError("unknown scheme '" + scheme + "'");
    }

    pt.eval = eval_design(cfg, pt.mapping, pt.table, fe);
    return pt;
}

DesignPoint build_noe_step_searched(const ExperimentConfig& cfg, double gamma) {
    if (cfg.levels <= 2) return build_design(cfg, "noe", gamma);
    const double power = cfg.power_from_gamma(gamma);
    const double spread =
        2.0 * std::sqrt(power + cfg.channel.noise_sigmas.square().minCoeff());

    ExperimentConfig local = cfg;
    local.optimize_step = false;
    auto distortion_at = [&](double d) {
        local.step = d;
        return build_design(local, "noe", gamma);
    };

    // Coarse seed scan, then golden refinement around the best seed.
    const double d_lo = 0.02 * spread, d_hi = 1.2 * spread;
    constexpr int kSeeds = 7;
    double best_d = d_lo;
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kSeeds; ++i) {
        const double d = d_lo + (d_hi - d_lo) * i / kSeeds;
        const DesignPoint pt = distortion_at(d);
        if (pt.eval.value < best_val) {
            best_val = pt.eval.value;
            best_d = d;
        }
    }
    const double band = (d_hi - d_lo) / kSeeds;
    Tolerances search_tol = cfg.tol;
    search_tol.search_abs = 1e-3 * spread;
    const MinResult refined = golden_section_min(
        [&](double d) { return distortion_at(d).eval.value; },
        std::max(d_lo, best_d - band), std::min(d_hi, best_d + band), search_tol);
    const double d_star = refined.min < best_val ? refined.argmin : best_d;

    local.step = d_star;
    DesignPoint pt = build_design(local, "noe", gamma);
    pt.quantizer_step = d_star;
    return pt;
}

// ---------------------------------------------------------------------------
// Commands

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << contents;
}

std::string mapping_csv(const ExperimentConfig& cfg, const Mapping& mapping) {
    std::string out = "v,f\n";
    const Eigen::ArrayXd grid = default_grid(cfg.source, cfg.grid_points, cfg.grid_half_width);
    for (double v : grid)
        out += format_value(v) + "," + format_value(evaluate(mapping, v)) + "\n";
    return out;
}

std::string decoder_csv(const DecoderTable& table, const FrontEnd& fe) {
    std::string out = "outcome,bits,v_hat\n";
    for (int j = 0; j < fe.outcome_count(); ++j) {
        std::string bits;
        if (fe.branches() > 1) {
            for (int b : outcome_bits(j, fe.branches()).bits) bits += b ? '1' : '0';
        } else {
            bits = std::to_string(j);
        }
        out += std::to_string(j) + "," + bits + "," + format_value(table.v_hat[j]) + "\n";
    }
    return out;
}

std::string manifest_text(const ExperimentConfig& cfg) {
    IniDoc doc = cfg.to_ini();
    doc.set("meta", "tool", "qjscc");
    doc.set("meta", "version", "0.1.0");
    return doc.render();
}

std::string point_tag(const DesignPoint& pt, bool by_lambda) {
    std::string tag = pt.scheme;
    if (by_lambda)
        tag += "_lam" + format_value(pt.lambda);
    else
        tag += "_g" + format_value(10.0 * std::log10(pt.gamma));
    for (auto& c : tag)
        if (c == '.' || c == '+') c = 'p';
        else if (c == '-') c = 'm';
    return tag;
}

}  // namespace

int cmd_design(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const bool by_lambda = !cfg.lambdas.empty() && cfg.scheme == "dop";

    std::vector<DesignPoint> points;
    if (by_lambda) {
        const FrontEnd fe = cfg.front_end();
        for (double lambda : cfg.lambdas) {
            DopDesign d = dop_onebit_design(lambda, cfg.target_d, cfg.source,
                                            fe.channel.noise_sigmas[0], cfg.tol);
            DesignPoint pt;
            pt.scheme = "dop";
            pt.lambda = lambda;
            pt.mapping = Mapping{std::move(d.mapping)};
            pt.table = DecoderTable{d.decoder_values(), Criterion::dop, cfg.target_d};
            pt.eval = eval_design(cfg, pt.mapping, pt.table, fe);
            pt.gamma = pt.eval.snr;
            points.push_back(std::move(pt));
        }
    } else {
        DesignPoint warm;
        bool have_warm = false;
        for (double gdb : cfg.gamma_db) {
            const double gamma = std::pow(10.0, gdb / 10.0);
            DesignPoint pt = cfg.optimize_step && cfg.scheme == "noe"
                                 ? build_noe_step_searched(cfg, gamma)
                                 : build_design(cfg, cfg.scheme, gamma,
                                                have_warm ? &warm : nullptr);
            warm = pt;
            have_warm = true;
            points.push_back(std::move(pt));
        }
    }

    const FrontEnd fe = cfg.front_end(cfg.optimize_step ? 1.0 : cfg.step);
    for (const auto& pt : points) {
        const std::string tag = point_tag(pt, by_lambda);
        write_file(fs::path(cfg.out_dir) / ("mapping_" + tag + ".csv"),
                   mapping_csv(cfg, pt.mapping));
        write_file(fs::path(cfg.out_dir) / ("decoder_" + tag + ".csv"),
                   decoder_csv(pt.table, fe));
        std::printf("design %s: power=%s value=%s\n", tag.c_str(),
                    format_value(pt.eval.power).c_str(), format_value(pt.eval.value).c_str());
    }
    write_file(fs::path(cfg.out_dir) / "manifest.ini", manifest_text(cfg));
    return 0;
}

int cmd_sweep(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    struct Row {
        std::string scheme;
        double gamma_db;
        EvalResult eval;
        SimEstimate mc;
        bool has_mc = false;
    };
    std::vector<Row> rows;

    for (const auto& scheme : cfg.sweep_schemes) {
        DesignPoint warm;
        bool have_warm = false;
        for (double gdb : cfg.gamma_db) {
            const double gamma = std::pow(10.0, gdb / 10.0);
            DesignPoint pt = cfg.optimize_step && scheme == "noe"
                                 ? build_noe_step_searched(cfg, gamma)
                                 : build_design(cfg, scheme, gamma, have_warm ? &warm : nullptr);
            warm = pt;
            have_warm = true;
            Row row{scheme, gdb, pt.eval, {}, false};
            if (cfg.sim_enabled) {
                const FrontEnd fe = cfg.front_end(pt.quantizer_step > 0 ? pt.quantizer_step
                                                                        : cfg.step);
                row.mc = simulate(pt.mapping, pt.table, fe, cfg.source, cfg.criterion, cfg.sim,
                                  cfg.jobs);
                row.has_mc = true;
            }
            rows.push_back(std::move(row));
        }
    }

    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.scheme, a.gamma_db) < std::tie(b.scheme, b.gamma_db);
    });
    std::string csv = "gamma_db,power,criterion,scheme,analytical,mc_value,mc_stderr,mc_n\n";
    for (const auto& r : rows) {
        csv += format_value(r.gamma_db) + "," + format_value(r.eval.power) + "," +
               (r.eval.criterion == Criterion::mse ? "mse" : "dop") + "," + r.scheme + "," +
               format_value(r.eval.value) + ",";
        if (r.has_mc)
            csv += format_value(r.mc.mean) + "," + format_value(r.mc.std_error) + "," +
                   std::to_string(r.mc.n);
        else
            csv += ",,0";
        csv += "\n";
    }
    write_file(fs::path(cfg.out_dir) / "sweep.csv", csv);
    write_file(fs::path(cfg.out_dir) / "manifest.ini", manifest_text(cfg));
    std::printf("sweep: %zu rows -> %s/sweep.csv\n", rows.size(), cfg.out_dir.c_str());
    return 0;
}

int cmd_simulate(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const double gamma = std::pow(10.0, cfg.gamma_db.front() / 10.0);
    const DesignPoint pt = build_design(cfg, cfg.scheme, gamma);
    const FrontEnd fe = cfg.front_end(pt.quantizer_step > 0 ? pt.quantizer_step : cfg.step);
    const SimEstimate est =
        simulate(pt.mapping, pt.table, fe, cfg.source, cfg.criterion, cfg.sim, cfg.jobs);
    std::string csv = "scheme,gamma_db,analytical,mc_value,mc_stderr,mc_n\n";
    csv += cfg.scheme + "," + format_value(cfg.gamma_db.front()) + "," +
           format_value(pt.eval.value) + "," + format_value(est.mean) + "," +
           format_value(est.std_error) + "," + std::to_string(est.n) + "\n";
    write_file(fs::path(cfg.out_dir) / "simulate.csv", csv);
    std::printf("simulate %s: analytical=%s mc=%s +- %s (n=%lld)\n", cfg.scheme.c_str(),
                format_value(pt.eval.value).c_str(), format_value(est.mean).c_str(),
                format_value(est.std_error).c_str(), static_cast<long long>(est.n));
    return 0;
}

namespace {

struct SweepRow {
    double gamma_db;
    std::string scheme;
    double analytical;
};

std::vector<SweepRow> read_sweep_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open sweep file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty sweep file: " + path);
    const auto header = split_list(line);
    int gamma_col = -1, scheme_col = -1, value_col = -1;
    for (size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "gamma_db") gamma_col = static_cast<int>(i);
        if (header[i] == "scheme") scheme_col = static_cast<int>(i);
        if (header[i] == "analytical") value_col = static_cast<int>(i);
    }
    if (gamma_col < 0 || value_col < 0)
        throw ConfigError("sweep file lacks gamma_db/analytical columns: " + path);
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        SweepRow row;
        row.gamma_db = to_double(cells.at(gamma_col), "gamma_db");
        row.scheme = scheme_col >= 0 ? cells.at(scheme_col) : "";
        row.analytical = to_double(cells.at(value_col), "analytical");
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        return std::tie(a.gamma_db, a.scheme) < std::tie(b.gamma_db, b.scheme);
    });
    return rows;
}

}  // namespace

int cmd_compare(const CompareOptions& opts) {
    const auto rows_a = read_sweep_csv(opts.file_a);
    const auto rows_b = read_sweep_csv(opts.file_b);
    if (rows_a.size() != rows_b.size())
        throw ConfigError("compare: sweeps have different row counts");
    std::string csv = "gamma_db,scheme_a,scheme_b,value_a,value_b,delta\n";
    int violations = 0;
    double max_delta = 0;
    for (size_t i = 0; i < rows_a.size(); ++i) {
        if (rows_a[i].gamma_db != rows_b[i].gamma_db)
            throw ConfigError("compare: gamma grids are not aligned");
        const double delta = rows_a[i].analytical - rows_b[i].analytical;
        max_delta = std::max(max_delta, std::abs(delta));
        if (opts.expect_le && delta > opts.tolerance) ++violations;
        csv += format_value(rows_a[i].gamma_db) + "," + rows_a[i].scheme + "," +
               rows_b[i].scheme + "," + format_value(rows_a[i].analytical) + "," +
               format_value(rows_b[i].analytical) + "," + format_value(delta) + "\n";
    }
    if (!opts.out_path.empty()) write_file(opts.out_path, csv);
    std::printf("compare: %zu rows, max |delta| = %s, ordering violations = %d\n", rows_a.size(),
                format_value(max_delta).c_str(), violations);
    return violations > 0 ? 1 : 0;
}

}  // namespace qjscc
