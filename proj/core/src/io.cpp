#include "simsig/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace simsig {

namespace {

std::vector<std::string> split_line(const std::string& line, char delimiter) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, delimiter)) fields.push_back(field);
    if (!line.empty() && line.back() == delimiter) fields.emplace_back();
    return fields;
}

char detect_delimiter(const std::string& header) {
    const auto tabs = std::count(header.begin(), header.end(), '\t');
    const auto commas = std::count(header.begin(), header.end(), ',');
    if (tabs == 0 && commas == 0) {
        throw std::runtime_error("cannot detect delimiter: header has neither tabs nor commas");
    }
    return tabs >= commas ? '\t' : ',';
}

std::size_t resolve_column(const std::vector<std::string>& header, const std::string& spec,
                           const std::string& file) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == spec) return i;
    }
    if (!spec.empty() && std::all_of(spec.begin(), spec.end(), [](unsigned char c) {
            return std::isdigit(c) != 0;
        })) {
        const std::size_t idx = std::stoul(spec);
        if (idx < header.size()) return idx;
    }
    throw std::runtime_error("missing column '" + spec + "' in " + file);
}

struct Column {
    std::vector<std::pair<std::string, double>> rows;  // id -> value
    std::size_t kept = 0;
    std::size_t dropped = 0;
};

Column read_column(const std::filesystem::path& file, const std::string& id_column,
                   const std::string& p_column, const IngestOptions& options) {
    std::ifstream in(file);
    if (!in) {
        throw std::runtime_error("cannot open '" + file.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("empty file '" + file.string() + "'");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const char delimiter = options.delimiter != '\0' ? options.delimiter : detect_delimiter(line);
    const auto header = split_line(line, delimiter);
    const std::size_t id_idx = resolve_column(header, id_column, file.string());
    const std::size_t p_idx = resolve_column(header, p_column, file.string());

    Column column;
    std::size_t row_number = 1;
    while (std::getline(in, line)) {
        ++row_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_line(line, delimiter);
        if (fields.size() <= std::max(id_idx, p_idx)) {
            if (options.strict) {
                throw std::runtime_error("row " + std::to_string(row_number) + " of '" +
                                         file.string() + "' has too few fields");
            }
            ++column.dropped;
            continue;
        }
        double value = 0.0;
        bool ok = false;
        try {
            std::size_t consumed = 0;
            value = std::stod(fields[p_idx], &consumed);
            ok = consumed == fields[p_idx].size() && std::isfinite(value);
        } catch (const std::exception&) {
            ok = false;
        }
        if (ok && options.direction == Direction::SmallIsSignificant) {
            ok = value >= 0.0 && value <= 1.0;
        }
        if (!ok) {
            if (options.strict) {
                throw std::runtime_error("row " + std::to_string(row_number) + " of '" +
                                         file.string() + "' has invalid value '" + fields[p_idx] +
                                         "'");
            }
            ++column.dropped;
            continue;
        }
        column.rows.emplace_back(fields[id_idx], value);
        ++column.kept;
    }
    return column;
}

}  // namespace

PairedStatistics ingest(const std::filesystem::path& file_a, const std::filesystem::path& file_b,
                        const std::string& id_column, const std::string& p_column,
                        const IngestOptions& options, IngestSummary* summary) {
    const Column a = read_column(file_a, id_column, p_column, options);
    const std::string p_column_b = options.p_column_b.empty() ? p_column : options.p_column_b;
    const Column b = read_column(file_b, id_column, p_column_b, options);

    std::unordered_map<std::string, double> a_by_id;
    a_by_id.reserve(a.rows.size());
    for (const auto& [id, value] : a.rows) {
        if (!a_by_id.emplace(id, value).second) {
            throw std::runtime_error("duplicate feature id '" + id + "' in '" + file_a.string() +
                                     "'");
        }
    }
    std::map<std::string, std::pair<double, double>> joined;  // sorted by id
    std::unordered_map<std::string, bool> seen_b;
    seen_b.reserve(b.rows.size());
    for (const auto& [id, value] : b.rows) {
        if (!seen_b.emplace(id, true).second) {
            throw std::runtime_error("duplicate feature id '" + id + "' in '" + file_b.string() +
                                     "'");
        }
        const auto hit = a_by_id.find(id);
        if (hit != a_by_id.end()) joined.emplace(id, std::make_pair(hit->second, value));
    }
    if (joined.empty()) {
        throw std::runtime_error("no overlapping feature ids between '" + file_a.string() +
                                 "' and '" + file_b.string() + "'");
    }

    PairedStatistics data;
    data.direction = options.direction;
    data.feature_ids.reserve(joined.size());
    data.s1.reserve(joined.size());
    data.s2.reserve(joined.size());
    for (const auto& [id, values] : joined) {
        data.feature_ids.push_back(id);
        data.s1.push_back(values.first);
        data.s2.push_back(values.second);
    }
    if (summary != nullptr) {
        *summary = IngestSummary{a.kept, b.kept, a.dropped, b.dropped, joined.size()};
    }
    data.validate();
    return data;
}

double odds_ratio_diagnostic(const PairedStatistics& data, double cutoff) {
    if (!data.pvalue_mode()) {
        throw std::invalid_argument("odds_ratio_diagnostic requires p-values");
    }
    double both = 0.0, only1 = 0.0, only2 = 0.0, neither = 0.0;
    for (std::size_t j = 0; j < data.size(); ++j) {
        const bool in1 = data.s1[j] <= cutoff;
        const bool in2 = data.s2[j] <= cutoff;
        if (in1 && in2) {
            ++both;
        } else if (in1) {
            ++only1;
        } else if (in2) {
            ++only2;
        } else {
            ++neither;
        }
    }
    if (both == 0.0 || only1 == 0.0 || only2 == 0.0 || neither == 0.0) {
        both += 0.5;
        only1 += 0.5;
        only2 += 0.5;
        neither += 0.5;
    }
    return (both * neither) / (only1 * only2);
}

namespace {

std::string direction_name(Direction d) {
    return d == Direction::SmallIsSignificant ? "small-is-significant" : "large-is-significant";
}

Direction direction_from(const std::string& name) {
    if (name == "small-is-significant") return Direction::SmallIsSignificant;
    if (name == "large-is-significant") return Direction::LargeIsSignificant;
    throw std::runtime_error("unknown direction '" + name + "'");
}

}  // namespace

std::string report_to_json(const DiscoveryReport& report) {
    nlohmann::json j;
    j["schema_version"] = report.schema_version;
    j["inputs"] = {
        {"file_a", report.file_a},       {"file_b", report.file_b},
        {"id_column", report.id_column}, {"p_column", report.p_column},
        {"p_column_b", report.p_column_b},
        {"direction", direction_name(report.direction)},
    };
    j["config"] = {
        {"alpha", report.alpha},
        {"tie_rule", report.tie_rule == TieRule::LargestArea ? "largest-area" : "smallest-area"},
        {"estimator", report.estimator == EstimatorVariant::Standard ? "standard" : "powerful"},
        {"m1", report.m1},
        {"m2", report.m2},
    };
    j["n_features"] = report.n_features;
    j["region"] = {
        {"empty", report.region.empty},
        {"t1", report.region.t1},
        {"t2", report.region.t2},
        {"n_discoveries", report.region.n_discoveries},
        {"fdr_estimate", report.region.fdr_estimate},
        {"area", report.region.area},
        {"grid_u", report.region.achieved_at_grid.first},
        {"grid_v", report.region.achieved_at_grid.second},
    };
    j["discovered_ids"] = report.discovered_ids;
    if (report.sigma12) j["sigma12"] = *report.sigma12;
    if (report.odds_ratio) j["odds_ratio"] = *report.odds_ratio;
    j["tie_set_size"] = report.tie_set_size;
    j["elapsed_seconds"] = report.elapsed_seconds;
    return j.dump(2);
}

DiscoveryReport report_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    DiscoveryReport report;
    report.schema_version = j.at("schema_version").get<int>();
    if (report.schema_version != 1) {
        throw std::runtime_error("unsupported report schema version");
    }
    const auto& inputs = j.at("inputs");
    report.file_a = inputs.at("file_a").get<std::string>();
    report.file_b = inputs.at("file_b").get<std::string>();
    report.id_column = inputs.at("id_column").get<std::string>();
    report.p_column = inputs.at("p_column").get<std::string>();
    report.p_column_b = inputs.value("p_column_b", std::string{});
    report.direction = direction_from(inputs.at("direction").get<std::string>());
    const auto& config = j.at("config");
    report.alpha = config.at("alpha").get<double>();
    report.tie_rule = config.at("tie_rule").get<std::string>() == "largest-area"
                          ? TieRule::LargestArea
                          : TieRule::SmallestArea;
    report.estimator = config.at("estimator").get<std::string>() == "standard"
                           ? EstimatorVariant::Standard
                           : EstimatorVariant::Powerful;
    report.m1 = config.at("m1").get<std::size_t>();
    report.m2 = config.at("m2").get<std::size_t>();
    report.n_features = j.at("n_features").get<std::size_t>();
    const auto& region = j.at("region");
    report.region.empty = region.at("empty").get<bool>();
    report.region.t1 = region.at("t1").get<double>();
    report.region.t2 = region.at("t2").get<double>();
    report.region.n_discoveries = region.at("n_discoveries").get<std::size_t>();
    report.region.fdr_estimate = region.at("fdr_estimate").get<double>();
    report.region.area = region.at("area").get<double>();
    report.region.achieved_at_grid = {region.at("grid_u").get<std::uint32_t>(),
                                      region.at("grid_v").get<std::uint32_t>()};
    report.discovered_ids = j.at("discovered_ids").get<std::vector<std::string>>();
    if (j.contains("sigma12")) report.sigma12 = j.at("sigma12").get<double>();
    if (j.contains("odds_ratio")) report.odds_ratio = j.at("odds_ratio").get<double>();
    report.tie_set_size = j.at("tie_set_size").get<std::size_t>();
    report.elapsed_seconds = j.at("elapsed_seconds").get<double>();
    return report;
}

void write_discoveries_tsv(std::ostream& out, const PairedStatistics& data,
                           const RejectionThresholds& region) {
    out << "feature_id\ts1\ts2\n";
    if (region.empty) return;
    for (std::size_t j = 0; j < data.size(); ++j) {
        if (inside(data.s1[j], region.t1, data.direction) &&
            inside(data.s2[j], region.t2, data.direction)) {
            out << data.feature_ids[j] << '\t' << data.s1[j] << '\t' << data.s2[j] << '\n';
        }
    }
}

namespace {

double neglog10(double p) {
    return -std::log10(std::max(p, 1e-300));  // caps at 300 for p-values of exactly zero
}

}  // namespace

void write_plot_tsv(std::ostream& out, const PairedStatistics& data,
                    const RejectionThresholds& region) {
    if (!data.pvalue_mode()) {
        throw std::invalid_argument("plot data requires p-values");
    }
    out << "feature_id\tneglog10_p1\tneglog10_p2\tdiscovered\n";
    for (std::size_t j = 0; j < data.size(); ++j) {
        const bool discovered = !region.empty && data.s1[j] <= region.t1 && data.s2[j] <= region.t2;
        out << data.feature_ids[j] << '\t' << neglog10(data.s1[j]) << '\t' << neglog10(data.s2[j])
            << '\t' << (discovered ? 1 : 0) << '\n';
    }
}

namespace {

SignalModel model_from(const std::string& name) {
    if (name == "t4") return SignalModel::NoncentralT4;
    if (name == "berk-jones") return SignalModel::CorrelatedBerkJones;
    if (name == "two-sided-normal") return SignalModel::TwoSidedNormal;
    throw std::runtime_error("unknown model '" + name + "'");
}

Method method_from(const std::string& name) {
    if (name == "proposed-max") return Method::ProposedMax;
    if (name == "proposed-min") return Method::ProposedMin;
    if (name == "powerful-max") return Method::PowerfulMax;
    if (name == "powerful-min") return Method::PowerfulMin;
    if (name == "maxp") return Method::MaxP;
    throw std::runtime_error("unknown method '" + name + "'");
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

StudySeries read_study_series(const std::filesystem::path& file, const std::string& id_column,
                              const std::string& p_column, const IngestOptions& options) {
    const Column column = read_column(file, id_column, p_column, options);
    StudySeries study;
    study.feature_ids.reserve(column.rows.size());
    study.pvalues.reserve(column.rows.size());
    std::unordered_map<std::string, bool> seen;
    seen.reserve(column.rows.size());
    for (const auto& [id, value] : column.rows) {
        if (!seen.emplace(id, true).second) {
            throw std::runtime_error("duplicate feature id '" + id + "' in '" + file.string() +
                                     "'");
        }
        study.feature_ids.push_back(id);
        study.pvalues.push_back(value);
    }
    return study;
}

std::vector<StudySeries> align_study_series(const std::vector<StudySeries>& studies,
                                            std::vector<std::size_t>* dropped_per_study) {
    if (studies.empty()) {
        throw std::invalid_argument("no studies to align");
    }
    std::unordered_map<std::string, std::size_t> frequency;
    for (const auto& study : studies) {
        for (const auto& id : study.feature_ids) ++frequency[id];
    }
    std::vector<std::string> shared;
    for (const auto& [id, count] : frequency) {
        if (count == studies.size()) shared.push_back(id);
    }
    if (shared.empty()) {
        throw std::runtime_error("no feature ids shared by all studies");
    }
    std::sort(shared.begin(), shared.end());

    std::vector<StudySeries> aligned(studies.size());
    if (dropped_per_study != nullptr) dropped_per_study->assign(studies.size(), 0);
    for (std::size_t k = 0; k < studies.size(); ++k) {
        std::unordered_map<std::string, double> by_id;
        by_id.reserve(studies[k].feature_ids.size());
        for (std::size_t j = 0; j < studies[k].feature_ids.size(); ++j) {
            by_id.emplace(studies[k].feature_ids[j], studies[k].pvalues[j]);
        }
        aligned[k].feature_ids = shared;
        aligned[k].pvalues.reserve(shared.size());
        for (const auto& id : shared) aligned[k].pvalues.push_back(by_id.at(id));
        if (dropped_per_study != nullptr) {
            (*dropped_per_study)[k] = studies[k].feature_ids.size() - shared.size();
        }
    }
    return aligned;
}

ScenarioConfig parse_scenario_text(const std::string& text) {
    ScenarioConfig config;
    config.methods.clear();
    std::optional<std::size_t> signals1, signals2, simultaneous;
    std::istringstream stream(text);
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(stream, line)) {
        ++line_number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("line " + std::to_string(line_number) +
                                     ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "p") {
                config.p = std::stoul(value);
            } else if (key == "p10") {
                config.p10 = std::stoul(value);
            } else if (key == "p01") {
                config.p01 = std::stoul(value);
            } else if (key == "p11") {
                config.p11 = std::stoul(value);
            } else if (key == "signals1") {
                signals1 = std::stoul(value);
            } else if (key == "signals2") {
                signals2 = std::stoul(value);
            } else if (key == "simultaneous") {
                simultaneous = std::stoul(value);
            } else if (key == "model") {
                config.model = model_from(value);
            } else if (key == "mean_law_mu" || key == "mean") {
                config.mean_law_mu = std::stod(value);
            } else if (key == "rho") {
                config.rho = std::stod(value);
            } else if (key == "block") {
                config.block = std::stoul(value);
            } else if (key == "nonzero") {
                config.nonzero = std::stoul(value);
            } else if (key == "alpha") {
                config.alpha = std::stod(value);
            } else if (key == "replications") {
                config.replications = std::stoul(value);
            } else if (key == "seed") {
                config.seed = std::stoull(value);
            } else if (key == "m1") {
                config.m1 = std::stoul(value);
            } else if (key == "m2") {
                config.m2 = std::stoul(value);
            } else if (key == "threads") {
                config.threads = std::stoul(value);
            } else if (key == "label") {
                config.label = value;
            } else if (key == "methods") {
                std::istringstream methods(value);
                std::string name;
                while (std::getline(methods, name, ',')) {
                    config.methods.push_back(method_from(trim(name)));
                }
            } else {
                throw std::runtime_error("unknown key '" + key + "'");
            }
        } catch (const std::invalid_argument&) {
            throw std::runtime_error("line " + std::to_string(line_number) + ": bad value for '" +
                                     key + "'");
        }
    }
    if (simultaneous) {
        config.p11 = *simultaneous;
        if (signals1) {
            if (*signals1 < config.p11) throw std::runtime_error("signals1 < simultaneous");
            config.p10 = *signals1 - config.p11;
        }
        if (signals2) {
            if (*signals2 < config.p11) throw std::runtime_error("signals2 < simultaneous");
            config.p01 = *signals2 - config.p11;
        }
    }
    config.validate();
    return config;
}

ScenarioConfig read_scenario_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw std::runtime_error("cannot open scenario file '" + file.string() + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    try {
        return parse_scenario_text(text.str());
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(file.string() + ": " + e.what());
    }
}

void write_scenario_tsv(std::ostream& out, const ScenarioResult& result, bool header) {
    if (header) out << "scenario\tmethod\tfdr\tdiscoveries\n";
    const std::string label = result.config.resolved_label();
    for (const auto& agg : result.methods) {
        out << label << '\t' << method_name(agg.method) << '\t' << agg.fdr << '\t'
            << agg.mean_discoveries << '\n';
    }
}

}  // namespace simsig
