#include "elca/config.hpp"

#include "elca/errors.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace elca {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw SpecError("config: key '" + key + "' has non-numeric value '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const int x = std::stoi(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw SpecError("config: key '" + key + "' has non-integer value '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    throw SpecError("config: key '" + key + "' has non-boolean value '" + v + "'");
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& item : split_list(v)) out.push_back(to_double(key, item));
    return out;
}

} // namespace

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(csv);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::map<std::string, std::string> parse_key_value_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("config: cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') continue; // section header
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw SpecError("config: " + path + ":" + std::to_string(lineno) +
                            ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw SpecError("config: " + path + ":" + std::to_string(lineno) + ": empty key");
        kv[key] = value;
    }
    return kv;
}

void apply_analysis_config(AnalysisConfig& config,
                           const std::map<std::string, std::string>& kv) {
    for (const auto& [key, value] : kv) {
        if (key == "input") {
            config.input = value;
        } else if (key == "outcome") {
            config.schema.outcome = value;
        } else if (key == "arm") {
            config.schema.arm = value;
        } else if (key == "covariates") {
            config.schema.covariates = split_list(value);
        } else if (key == "arm-labels" || key == "arm_labels") {
            config.schema.arm_labels = split_list(value);
        } else if (key == "pi") {
            if (value == "from-data") {
                config.schema.pi_from_data = true;
                config.schema.pi.clear();
            } else {
                config.schema.pi = to_doubles(key, value);
                config.schema.pi_from_data = false;
            }
        } else if (key == "link") {
            if (value == "identity") config.link = Link::identity;
            else if (value == "logit") config.link = Link::logit;
            else throw SpecError("config: link must be 'identity' or 'logit', got '" + value + "'");
        } else if (key == "aux") {
            config.aux = split_list(value);
        } else if (key == "standardize") {
            config.standardize = to_bool(key, value);
        } else if (key == "level") {
            config.level = to_double(key, value);
        } else if (key == "test") {
            config.test_components.clear();
            for (const auto& item : split_list(value))
                config.test_components.push_back(to_int(key, item));
        } else if (key == "format") {
            if (value == "text") config.format = OutputFormat::text;
            else if (value == "json") config.format = OutputFormat::json;
            else if (value == "csv") config.format = OutputFormat::csv;
            else throw SpecError("config: unknown format '" + value + "'");
        } else if (key == "json") {
            config.json_path = value;
        } else if (key == "seed") {
            try {
                std::size_t used = 0;
                config.seed = std::stoull(value, &used);
                if (used != value.size()) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw SpecError("config: key 'seed' has non-integer value '" + value + "'");
            }
        } else {
            throw SpecError("config: unknown key '" + key + "'");
        }
    }
}

SimPreset scenario_preset_from_file(const std::string& path) {
    const auto kv = parse_key_value_file(path);
    auto get = [&](const std::string& key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) throw SpecError("scenario file: missing key '" + key + "'");
        return it->second;
    };

    SimPreset preset;
    preset.name = path;
    Scenario& s = preset.scenario;

    const std::string kind = get("kind");
    if (kind == "linear_x") s.id = ScenarioKind::linear_x;
    else if (kind == "quadratic_x") s.id = ScenarioKind::quadratic_x;
    else if (kind == "two_covariates") s.id = ScenarioKind::two_covariates;
    else throw SpecError("scenario file: unknown kind '" + kind + "'");

    s.sigma = to_doubles("sigma", get("sigma"));
    const auto inter = to_doubles("intercepts", get("intercepts"));
    if (inter.size() != 2) throw SpecError("scenario file: intercepts needs two values");
    s.intercepts = {inter[0], inter[1]};
    s.slopes.clear();
    for (std::size_t c = 0; c < s.sigma.size(); ++c) {
        const auto sl = to_doubles("slopes", get("slopes-x" + std::to_string(c)));
        if (sl.size() != 2)
            throw SpecError("scenario file: slopes-x" + std::to_string(c) + " needs two values");
        s.slopes.emplace_back(sl[0], sl[1]);
    }
    s.quadratic.clear();
    if (kv.count("quadratic")) {
        for (const auto& item : split_list(kv.at("quadratic")))
            s.quadratic.push_back(to_bool("quadratic", item));
    } else {
        s.quadratic.assign(s.sigma.size(), s.id == ScenarioKind::quadratic_x);
    }
    if (kv.count("n")) s.n = to_int("n", kv.at("n"));
    if (kv.count("pi")) {
        const auto pi = to_doubles("pi", kv.at("pi"));
        if (pi.size() != 2) throw SpecError("scenario file: pi needs two values");
        s.pi = {pi[0], pi[1]};
    }
    s.validate();

    preset.description = "custom scenario from " + path;
    if (kv.count("label")) preset.description = kv.at("label");
    preset.power_mode = kv.count("power") ? to_bool("power", kv.at("power")) : false;

    ConstraintSpec marginal;
    marginal.link = Link::logit;
    preset.methods.push_back({"marginal", marginal});
    if (kv.count("aux")) {
        ConstraintSpec adjusted;
        adjusted.link = Link::logit;
        for (const auto& d : split_list(kv.at("aux")))
            adjusted.aux_terms.push_back(parse_aux_term(d));
        preset.methods.push_back({"adjusted", adjusted});
    }
    return preset;
}

} // namespace elca
