#pragma once

#include <map>
#include <string>
#include <vector>

#include "qjscc/encoder.hpp"
#include "qjscc/optimizer.hpp"
#include "qjscc/performance.hpp"
#include "qjscc/sim.hpp"

namespace qjscc {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat key = value configuration with [section] headers; values keep their
/// textual form until queried. Comment lines start with '#' or ';'.
class IniDoc {
public:
    static IniDoc parse_file(const std::string& path);
    static IniDoc parse_text(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    std::string require(const std::string& section, const std::string& key) const;
    void set(const std::string& section, const std::string& key, const std::string& value);

    /// Deterministic rendering: sections and keys in sorted order.
    std::string render() const;

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

struct ExperimentConfig {
    SourceSpec source;
    ChannelSpec channel;
    int levels = 2;
    double step = 0.0;          ///< quantizer step d (K > 2)
    bool optimize_step = false; ///< line-search d per design point

    Criterion criterion = Criterion::mse;
    double target_d = 0.0;

    std::string scheme = "prop1";
    int pam_levels = 3;

    std::vector<double> gamma_db;           ///< design / sweep grid
    std::vector<double> lambdas;            ///< optional lambda list (dop design, ncr)
    std::vector<std::string> sweep_schemes;

    int grid_points = 2001;
    double grid_half_width = 6.0;

    DescentConfig descent;
    int max_rounds = 50;

    bool sim_enabled = false;
    SimConfig sim;

    Tolerances tol;
    std::string out_dir = "out";
    int jobs = 1;

    FrontEnd front_end() const;            ///< front end with the configured step
    FrontEnd front_end(double step) const;
    double power_from_gamma(double gamma) const;
    void validate_scheme(const std::string& scheme_name) const;

    static ExperimentConfig from_ini(const IniDoc& doc);
    IniDoc to_ini() const;
};

/// A fully built design point: mapping, decoder table and its evaluation.
struct DesignPoint {
    std::string scheme;
    double gamma = 0;
    double lambda = 0;
    double quantizer_step = 0;
    Mapping mapping;
    DecoderTable table;
    EvalResult eval;
};

/// Designs the configured scheme at channel SNR gamma (power implied by the
/// channel). For NOE schemes, `warm` carries the previous solution.
DesignPoint build_design(const ExperimentConfig& cfg, const std::string& scheme, double gamma,
                         const DesignPoint* warm = nullptr);

/// Line-search the quantizer step d for a NOE design at fixed power.
DesignPoint build_noe_step_searched(const ExperimentConfig& cfg, double gamma);

int cmd_design(const ExperimentConfig& cfg);
int cmd_sweep(const ExperimentConfig& cfg);
int cmd_simulate(const ExperimentConfig& cfg);

struct CompareOptions {
    std::string file_a;
    std::string file_b;
    bool expect_le = false;  ///< exit 1 if A > B + tolerance anywhere
    double tolerance = 1e-9;
    std::string out_path;    ///< optional delta CSV
};
int cmd_compare(const CompareOptions& opts);

/// Shared deterministic float formatting for all CSV output.
std::string format_value(double x);

}  // namespace qjscc
