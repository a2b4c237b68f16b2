#include "elca/dataset.hpp"

#include "elca/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace elca {

TrialDataset::TrialDataset(Eigen::VectorXd y, Eigen::VectorXi z, Eigen::MatrixXd x,
                           Eigen::VectorXd pi)
    : y_(std::move(y)), z_(std::move(z)), x_(std::move(x)), pi_(std::move(pi)) {
    const int n = static_cast<int>(y_.size());
    const int k_arms = static_cast<int>(pi_.size());
    if (k_arms < 2) throw InputError("TrialDataset: need at least two arms");
    if (z_.size() != n) throw InputError("TrialDataset: y and z row counts differ");
    if (x_.size() > 0 && x_.rows() != n)
        throw InputError("TrialDataset: covariate row count differs from n");
    if (x_.size() == 0 && x_.rows() != n) x_.resize(n, 0);
    if (n < k_arms + 1)
        throw InputError("TrialDataset: need n >= K+2 subjects, got n=" + std::to_string(n));

    double total = 0.0;
    for (int k = 0; k < k_arms; ++k) {
        if (!(pi_[k] > 0.0 && pi_[k] < 1.0))
            throw InputError("TrialDataset: allocation probability out of (0,1) for arm " +
                             std::to_string(k));
        total += pi_[k];
    }
    if (std::fabs(total - 1.0) > 1e-12)
        throw InputError("TrialDataset: allocation probabilities sum to " + std::to_string(total));

    for (int i = 0; i < n; ++i) {
        if (z_[i] < 0 || z_[i] >= k_arms)
            throw InputError("TrialDataset: arm label " + std::to_string(z_[i]) +
                             " out of range 0.." + std::to_string(k_arms - 1) + " at row " +
                             std::to_string(i));
        if (!std::isfinite(y_[i]))
            throw InputError("TrialDataset: non-finite outcome at row " + std::to_string(i));
    }
    if (x_.size() > 0 && !x_.allFinite())
        throw InputError("TrialDataset: non-finite covariate value");
}

bool TrialDataset::outcome_is_binary() const {
    for (int i = 0; i < y_.size(); ++i) {
        if (y_[i] != 0.0 && y_[i] != 1.0) return false;
    }
    return true;
}

double TrialDataset::arm_mean(int arm) const {
    double sum = 0.0;
    int count = 0;
    for (int i = 0; i < y_.size(); ++i) {
        if (z_[i] == arm) {
            sum += y_[i];
            ++count;
        }
    }
    if (count == 0) throw NumericError("arm_mean: arm " + std::to_string(arm) + " is empty");
    return sum / count;
}

EmpiricalCdf::EmpiricalCdf(std::vector<double> values) : sorted_(std::move(values)) {
    if (sorted_.empty()) throw InputError("EmpiricalCdf: empty sample");
    std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(double t) const {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), t);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

EmpiricalCdf empirical_cdf(const TrialDataset& data, int col) {
    if (col < 0 || col >= data.num_covariates())
        throw InputError("empirical_cdf: covariate index " + std::to_string(col) +
                         " out of range");
    std::vector<double> v(data.n());
    for (int i = 0; i < data.n(); ++i) v[i] = data.covariates()(i, col);
    return EmpiricalCdf(std::move(v));
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // trim surrounding whitespace
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    const auto res = std::from_chars(b, e, out);
    return res.ec == std::errc() && res.ptr == e && std::isfinite(out);
}

} // namespace

TrialDataset load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw InputError("load_csv: cannot open " + path);
    if (schema.outcome.empty() || schema.arm.empty())
        throw SpecError("load_csv: schema must name an outcome and an arm column");
    if (schema.pi.empty() && !schema.pi_from_data)
        throw SpecError("load_csv: allocation probabilities required "
                        "(supply pi or enable pi-from-data)");

    std::string line;
    if (!std::getline(in, line)) throw InputError("load_csv: empty file " + path);
    if (!line.empty() && line.front() == '\xEF' && line.size() >= 3) line = line.substr(3); // BOM
    const auto header = split_line(line);

    auto find_col = [&](const std::string& name) {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == name) return static_cast<int>(j);
        throw SpecError("load_csv: column '" + name + "' not found in " + path);
    };
    const int yc = find_col(schema.outcome);
    const int zc = find_col(schema.arm);
    std::vector<int> xc;
    xc.reserve(schema.covariates.size());
    for (const auto& name : schema.covariates) xc.push_back(find_col(name));

    std::unordered_map<std::string, int> label_map;
    for (std::size_t i = 0; i < schema.arm_labels.size(); ++i)
        label_map[schema.arm_labels[i]] = static_cast<int>(i);

    std::vector<double> ys;
    std::vector<int> zs;
    std::vector<std::vector<double>> xs;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = split_line(line);
        auto cell = [&](int j) -> const std::string& {
            if (j >= static_cast<int>(fields.size()))
                throw InputError("load_csv: row " + std::to_string(row) + " has too few fields");
            return fields[j];
        };

        double y;
        if (cell(yc).empty())
            throw InputError("load_csv: missing outcome at row " + std::to_string(row));
        if (!parse_double(cell(yc), y))
            throw InputError("load_csv: non-numeric outcome '" + cell(yc) + "' at row " +
                             std::to_string(row));

        int z;
        const std::string& zs_raw = cell(zc);
        if (zs_raw.empty())
            throw InputError("load_csv: missing arm label at row " + std::to_string(row));
        if (!label_map.empty()) {
            const auto it = label_map.find(zs_raw);
            if (it == label_map.end())
                throw InputError("load_csv: arm label '" + zs_raw + "' at row " +
                                 std::to_string(row) + " not in schema arm_labels");
            z = it->second;
        } else {
            double zd;
            if (!parse_double(zs_raw, zd) || zd != std::floor(zd))
                throw InputError("load_csv: non-integer arm label '" + zs_raw + "' at row " +
                                 std::to_string(row));
            z = static_cast<int>(zd);
        }

        std::vector<double> xrow(xc.size());
        for (std::size_t j = 0; j < xc.size(); ++j) {
            if (cell(xc[j]).empty())
                throw InputError("load_csv: missing covariate value at row " +
                                 std::to_string(row));
            if (!parse_double(cell(xc[j]), xrow[j]))
                throw InputError("load_csv: non-numeric covariate '" + cell(xc[j]) +
                                 "' at row " + std::to_string(row));
        }

        ys.push_back(y);
        zs.push_back(z);
        xs.push_back(std::move(xrow));
    }
    const int n = static_cast<int>(ys.size());
    if (n == 0) throw InputError("load_csv: no data rows in " + path);

    int k_arms;
    Eigen::VectorXd pi;
    if (!schema.pi.empty()) {
        k_arms = static_cast<int>(schema.pi.size());
        pi = Eigen::Map<const Eigen::VectorXd>(schema.pi.data(), k_arms);
    } else {
        k_arms = !schema.arm_labels.empty()
                     ? static_cast<int>(schema.arm_labels.size())
                     : 1 + *std::max_element(zs.begin(), zs.end());
        Eigen::VectorXi counts = Eigen::VectorXi::Zero(k_arms);
        for (std::size_t i = 0; i < zs.size(); ++i) {
            if (zs[i] < 0 || zs[i] >= k_arms)
                throw InputError("load_csv: arm label " + std::to_string(zs[i]) +
                                 " out of range at data row " + std::to_string(i + 1));
            counts[zs[i]]++;
        }
        pi = counts.cast<double>() / static_cast<double>(n);
    }
    for (std::size_t i = 0; i < zs.size(); ++i) {
        if (zs[i] < 0 || zs[i] >= k_arms)
            throw InputError("load_csv: arm label " + std::to_string(zs[i]) +
                             " outside 0.." + std::to_string(k_arms - 1) + " at data row " +
                             std::to_string(i + 1));
    }

    Eigen::VectorXd y(n);
    Eigen::VectorXi z(n);
    Eigen::MatrixXd x(n, static_cast<int>(xc.size()));
    for (int i = 0; i < n; ++i) {
        y[i] = ys[i];
        z[i] = zs[i];
        for (std::size_t j = 0; j < xc.size(); ++j) x(i, static_cast<int>(j)) = xs[i][j];
    }
    return TrialDataset(std::move(y), std::move(z), std::move(x), std::move(pi));
}

void save_csv(const TrialDataset& data, const std::string& path, const CsvSchema& schema) {
    std::ofstream out(path);
    if (!out) throw InputError("save_csv: cannot open " + path + " for writing");
    out.precision(17);

    out << (schema.outcome.empty() ? "y" : schema.outcome) << ','
        << (schema.arm.empty() ? "z" : schema.arm);
    for (int j = 0; j < data.num_covariates(); ++j) {
        if (j < static_cast<int>(schema.covariates.size()))
            out << ',' << schema.covariates[j];
        else
            out << ",x" << j;
    }
    out << '\n';
    for (int i = 0; i < data.n(); ++i) {
        out << data.outcomes()[i] << ',';
        const int z = data.arms()[i];
        if (z < static_cast<int>(schema.arm_labels.size()))
            out << schema.arm_labels[z];
        else
            out << z;
        for (int j = 0; j < data.num_covariates(); ++j) out << ',' << data.covariates()(i, j);
        out << '\n';
    }
    if (!out) throw InputError("save_csv: write failed for " + path);
}

} // namespace elca
