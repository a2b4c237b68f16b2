#include "elca/analysis.hpp"
#include "elca/config.hpp"
#include "elca/errors.hpp"
#include "elca/simulate.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitSpec = 3;
constexpr int kExitNumeric = 4;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw elca::InputError("cannot write " + path);
    out << content;
}

elca::OutputFormat parse_format(const std::string& f) {
    if (f == "text") return elca::OutputFormat::text;
    if (f == "json") return elca::OutputFormat::json;
    if (f == "csv") return elca::OutputFormat::csv;
    throw elca::SpecError("unknown format '" + f + "' (expected text, json or csv)");
}

std::string preset_help() {
    std::string s = "Built-in presets:\n";
    for (const auto& p : elca::simulation_presets())
        s += "  " + p.name + "  -  " + p.description + "\n";
    s += "Aux term grammar: <basis><index>@<arm>[:<covariate>] with bases\n"
         "  const (no index), fsin, fcos, leg, pow, xpow;\n"
         "e.g. const@1, fsin1@1:x0, fcos2@1:x0, leg3@2:x1, pow2@3:x0, xpow1@1:x0\n";
    return s;
}

int run_analyze(const elca::AnalysisConfig& config) {
    const elca::AnalysisReport report = elca::run_analysis(config);
    switch (config.format) {
        case elca::OutputFormat::text: std::cout << report.to_text(); break;
        case elca::OutputFormat::csv: std::cout << report.to_csv(); break;
        case elca::OutputFormat::json: std::cout << report.to_json_string() << "\n"; break;
    }
    if (!config.json_path.empty()) write_file(config.json_path, report.to_json_string());
    return kExitOk;
}

int run_simulate(const std::string& preset_name, const elca::SimulationOptions& opts,
                 elca::OutputFormat format, const std::string& json_path,
                 const std::string& csv_path) {
    elca::SimPreset preset;
    if (auto p = elca::find_preset(preset_name)) {
        preset = *p;
    } else if (std::ifstream(preset_name).good()) {
        preset = elca::scenario_preset_from_file(preset_name);
    } else {
        throw elca::SpecError("unknown preset '" + preset_name +
                              "' (not a built-in name and not a readable file)");
    }

    elca::SimulationReport report = elca::run_experiment(preset.scenario, preset.methods, opts);
    report.scenario_label = preset.name;
    report.power_mode = preset.power_mode;

    switch (format) {
        case elca::OutputFormat::text: std::cout << report.to_text(); break;
        case elca::OutputFormat::csv: std::cout << report.to_csv(); break;
        case elca::OutputFormat::json: std::cout << report.to_json_string() << "\n"; break;
    }
    if (!json_path.empty()) write_file(json_path, report.to_json_string());
    if (!csv_path.empty()) write_file(csv_path, report.to_csv());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Empirical-likelihood covariate adjustment for randomized trials"};
    app.require_subcommand(1);
    app.footer(preset_help());

    // ---- analyze ----
    auto* analyze = app.add_subcommand("analyze", "Estimate and test treatment effects "
                                                  "from a CSV data file");
    std::string config_file;
    elca::AnalysisConfig config;
    std::string link_str, pi_str, format_str, aux_str, test_str, cov_str, labels_str;
    analyze->add_option("--config", config_file, "key=value config file (flags override)");
    analyze->add_option("-i,--input", config.input, "input CSV path");
    analyze->add_option("--outcome", config.schema.outcome, "outcome column name");
    analyze->add_option("--arm", config.schema.arm, "arm column name");
    analyze->add_option("--covariates", cov_str, "comma list of covariate columns");
    analyze->add_option("--arm-labels", labels_str,
                        "comma list of raw labels mapped to arms 0..K in order");
    analyze->add_option("--pi", pi_str, "comma list of allocation probabilities, or 'from-data'");
    analyze->add_option("--link", link_str, "identity or logit");
    analyze->add_option("--aux", aux_str, "comma list of aux term descriptors");
    analyze->add_option("--level", config.level, "confidence level (default 0.95)");
    analyze->add_option("--test", test_str,
                        "comma list of tested components (1-based; default: all contrasts)");
    analyze->add_option("--format", format_str, "text, json or csv (default text)");
    analyze->add_option("--json", config.json_path, "also write a JSON report here");
    analyze->add_option("--seed", config.seed, "seed for randomized fallbacks");
    analyze->add_flag("--no-standardize", "disable auxiliary column standardization");

    // ---- simulate ----
    auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo benchmark preset");
    std::string preset_name, sim_format_str = "text", sim_json, sim_csv;
    elca::SimulationOptions opts;
    bool full = false;
    opts.reps = 1000;
    simulate->add_option("preset", preset_name, "preset name or scenario file")->required();
    simulate->add_option("--reps", opts.reps, "Monte Carlo replications (default 1000)");
    simulate->add_flag("--full", full, "use 5000 replications");
    simulate->add_option("--seed", opts.seed, "RNG seed (default 1)");
    simulate->add_option("--level", opts.level, "confidence level (default 0.95)");
    simulate->add_option("--workers", opts.workers, "worker threads (output is identical "
                                                    "for any count)");
    simulate->add_option("--format", sim_format_str, "text, json or csv (default text)");
    simulate->add_option("--json", sim_json, "also write the JSON report here");
    simulate->add_option("--csv", sim_csv, "also write the CSV report here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) {
            if (!config_file.empty())
                elca::apply_analysis_config(config, elca::parse_key_value_file(config_file));
            // flags override config-file values
            if (!cov_str.empty()) config.schema.covariates = elca::split_list(cov_str);
            if (!labels_str.empty()) config.schema.arm_labels = elca::split_list(labels_str);
            if (!pi_str.empty()) {
                if (pi_str == "from-data") {
                    config.schema.pi_from_data = true;
                    config.schema.pi.clear();
                } else {
                    config.schema.pi.clear();
                    for (const auto& v : elca::split_list(pi_str)) {
                        try {
                            std::size_t used = 0;
                            config.schema.pi.push_back(std::stod(v, &used));
                            if (used != v.size()) throw std::invalid_argument("");
                        } catch (const std::exception&) {
                            throw elca::SpecError("--pi: non-numeric value '" + v + "'");
                        }
                    }
                    config.schema.pi_from_data = false;
                }
            }
            if (!link_str.empty()) {
                if (link_str == "identity") config.link = elca::Link::identity;
                else if (link_str == "logit") config.link = elca::Link::logit;
                else throw elca::SpecError("unknown link '" + link_str + "'");
            }
            if (!aux_str.empty()) config.aux = elca::split_list(aux_str);
            if (!test_str.empty()) {
                config.test_components.clear();
                for (const auto& v : elca::split_list(test_str)) {
                    try {
                        std::size_t used = 0;
                        config.test_components.push_back(std::stoi(v, &used));
                        if (used != v.size()) throw std::invalid_argument("");
                    } catch (const std::exception&) {
                        throw elca::SpecError("--test: non-integer component '" + v + "'");
                    }
                }
            }
            if (!format_str.empty()) config.format = parse_format(format_str);
            if (analyze->count("--no-standardize")) config.standardize = false;
            return run_analyze(config);
        }
        if (simulate->parsed()) {
            if (full && !simulate->count("--reps")) opts.reps = 5000;
            return run_simulate(preset_name, opts, parse_format(sim_format_str), sim_json,
                                sim_csv);
        }
    } catch (const elca::InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const elca::SpecError& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return kExitSpec;
    } catch (const elca::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const elca::ContractError& e) {
        std::cerr << "internal contract error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitOk;
}
