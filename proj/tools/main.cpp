// simsig: discovers features that are significant in two independent studies
// simultaneously, keeping the estimated false discovery rate of the selected
// rectangular rejection region below a target level.

#include "simsig/io.hpp"
#include "simsig/multiseq.hpp"
#include "simsig/rank_index.hpp"
#include "simsig/search.hpp"
#include "simsig/simulation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>

namespace {

using simsig::Direction;
using simsig::EstimatorVariant;
using simsig::TieRule;

struct CommonIngestArgs {
    std::string id_column = "id";
    std::string p_column = "p";
    std::string p_column_b;
    std::string delimiter = "auto";
    bool drop_bad_rows = false;
    bool statistics = false;

    simsig::IngestOptions options() const {
        simsig::IngestOptions opts;
        if (delimiter == "tab") {
            opts.delimiter = '\t';
        } else if (delimiter == "comma") {
            opts.delimiter = ',';
        } else if (delimiter != "auto") {
            throw CLI::ValidationError("--delimiter must be auto, tab or comma");
        }
        opts.strict = !drop_bad_rows;
        opts.direction =
            statistics ? Direction::LargeIsSignificant : Direction::SmallIsSignificant;
        opts.p_column_b = p_column_b;
        return opts;
    }
};

void add_ingest_options(CLI::App* cmd, CommonIngestArgs& args) {
    cmd->add_option("--id-column", args.id_column, "feature id column (name or 0-based index)");
    cmd->add_option("--p-column", args.p_column, "statistic column (name or 0-based index)");
    cmd->add_option("--p-column-b", args.p_column_b, "statistic column for the second file");
    cmd->add_option("--delimiter", args.delimiter, "auto|tab|comma");
    cmd->add_flag("--drop-bad-rows", args.drop_bad_rows,
                  "drop unparseable/out-of-range rows instead of failing");
    cmd->add_flag("--statistics", args.statistics,
                  "inputs are test statistics where large means significant, not p-values");
}

std::filesystem::path bj_cache_dir() {
    if (const char* dir = std::getenv("SIMSIG_CACHE_DIR")) return dir;
    return std::filesystem::current_path();
}

std::filesystem::path bj_cache_file(std::uint32_t n, std::uint32_t draws) {
    return bj_cache_dir() / ("bj_null_n" + std::to_string(n) + "_B" + std::to_string(draws) + ".tsv");
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

int run_discover(const std::string& file_a, const std::string& file_b,
                 const CommonIngestArgs& ingest_args, const simsig::SearchConfig& base_config,
                 double or_cutoff, const std::string& out_json, const std::string& out_tsv,
                 const std::string& out_plot) {
    const auto started = std::chrono::steady_clock::now();
    const simsig::IngestOptions opts = ingest_args.options();
    simsig::IngestSummary summary;
    const simsig::PairedStatistics data =
        simsig::ingest(file_a, file_b, ingest_args.id_column, ingest_args.p_column, opts, &summary);
    const simsig::RankIndex index = simsig::build_rank_index(data);
    const simsig::RejectionThresholds region = simsig::search(data, index, base_config);
    const auto ties = simsig::enumerate_tie_set(data, base_config);

    simsig::DiscoveryReport report;
    report.file_a = file_a;
    report.file_b = file_b;
    report.id_column = ingest_args.id_column;
    report.p_column = ingest_args.p_column;
    report.p_column_b = opts.p_column_b;
    report.direction = data.direction;
    report.alpha = base_config.alpha;
    report.tie_rule = base_config.tie_rule;
    report.estimator = base_config.estimator;
    report.m1 = base_config.resolved_m1(data.size());
    report.m2 = base_config.resolved_m2(data.size());
    report.n_features = data.size();
    report.region = region;
    report.tie_set_size = ties.size();
    if (!region.empty) {
        for (std::size_t j = 0; j < data.size(); ++j) {
            if (simsig::inside(data.s1[j], region.t1, data.direction) &&
                simsig::inside(data.s2[j], region.t2, data.direction)) {
                report.discovered_ids.push_back(data.feature_ids[j]);
            }
        }
    }
    if (data.pvalue_mode()) {
        if (data.size() >= 2) report.sigma12 = simsig::sigma12_hat(data);
        report.odds_ratio = simsig::odds_ratio_diagnostic(data, or_cutoff);
    }
    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    write_text(out_json, simsig::report_to_json(report) + "\n");
    if (!out_tsv.empty()) {
        std::ofstream out(out_tsv);
        if (!out) throw std::runtime_error("cannot write '" + out_tsv + "'");
        simsig::write_discoveries_tsv(out, data, region);
    }
    if (!out_plot.empty()) {
        std::ofstream out(out_plot);
        if (!out) throw std::runtime_error("cannot write '" + out_plot + "'");
        simsig::write_plot_tsv(out, data, region);
    }
    std::cerr << "joined " << summary.joined << " features (dropped " << summary.dropped_a << "+"
              << summary.dropped_b << " rows); " << region.n_discoveries << " discoveries, "
              << ties.size() << " tied optimal region(s)\n";
    return 0;
}

int run_verify(const std::string& report_path, std::string file_a, std::string file_b) {
    std::ifstream in(report_path);
    if (!in) throw std::runtime_error("cannot open report '" + report_path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    const simsig::DiscoveryReport report = simsig::report_from_json(text.str());
    if (file_a.empty()) file_a = report.file_a;
    if (file_b.empty()) file_b = report.file_b;

    simsig::IngestOptions opts;
    opts.direction = report.direction;
    opts.strict = false;
    opts.p_column_b = report.p_column_b;
    const simsig::PairedStatistics data =
        simsig::ingest(file_a, file_b, report.id_column, report.p_column, opts);

    bool ok = true;
    auto check = [&ok](const std::string& field, bool pass) {
        std::cout << (pass ? "ok      " : "MISMATCH") << "  " << field << "\n";
        ok = ok && pass;
    };
    check("n_features", data.size() == report.n_features);

    simsig::SearchConfig config;
    config.alpha = report.alpha;
    config.tie_rule = report.tie_rule;
    config.estimator = report.estimator;
    config.m1 = std::min(report.m1, data.size());
    config.m2 = std::min(report.m2, data.size());

    const simsig::RankIndex index = simsig::build_rank_index(data);
    const simsig::RejectionThresholds region = simsig::search(data, index, config);
    check("region.empty", region.empty == report.region.empty);
    if (!region.empty && !report.region.empty) {
        check("region.t1", region.t1 == report.region.t1);
        check("region.t2", region.t2 == report.region.t2);
        check("region.n_discoveries", region.n_discoveries == report.region.n_discoveries);
        check("region.grid", region.achieved_at_grid == report.region.achieved_at_grid);
        check("region.area", region.area == report.region.area);

        // the reported estimate re-derived straight from the data
        simsig::FdrEstimate direct =
            report.estimator == EstimatorVariant::Standard
                ? simsig::fdr_hat_u(data, index, report.region.t1, report.region.t2)
                : simsig::fdr_hat_powerful(data, index, report.region.t1, report.region.t2,
                                           simsig::sigma12_hat(data));
        check("region.fdr_estimate", direct.value == report.region.fdr_estimate);
        check("region.fdr_estimate <= alpha", report.region.fdr_estimate <= report.alpha);

        std::vector<std::string> discovered;
        for (std::size_t j = 0; j < data.size(); ++j) {
            if (simsig::inside(data.s1[j], report.region.t1, data.direction) &&
                simsig::inside(data.s2[j], report.region.t2, data.direction)) {
                discovered.push_back(data.feature_ids[j]);
            }
        }
        check("discovered_ids", discovered == report.discovered_ids);
    } else {
        check("discovered_ids", report.discovered_ids.empty() == report.region.empty);
    }
    check("tie_set_size", simsig::enumerate_tie_set(data, config).size() == report.tie_set_size);
    if (data.pvalue_mode()) {
        if (report.sigma12) check("sigma12", simsig::sigma12_hat(data) == *report.sigma12);
        if (report.odds_ratio) {
            check("odds_ratio", simsig::odds_ratio_diagnostic(data) == *report.odds_ratio);
        }
    }
    std::cout << (ok ? "report verified\n" : "report verification FAILED\n");
    return ok ? 0 : 1;
}

int run_multiseq(const std::vector<std::string>& inputs, const CommonIngestArgs& ingest_args,
                 double alpha, const std::string& out_json) {
    const simsig::IngestOptions opts = ingest_args.options();
    std::vector<simsig::StudySeries> studies;
    studies.reserve(inputs.size());
    for (const auto& file : inputs) {
        studies.push_back(
            simsig::read_study_series(file, ingest_args.id_column, ingest_args.p_column, opts));
    }
    std::vector<std::size_t> dropped;
    const auto aligned = simsig::align_study_series(studies, &dropped);
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        std::cerr << inputs[k] << ": dropped " << dropped[k] << " unshared feature(s)\n";
    }
    const simsig::MultiseqResult result = simsig::multiseq_search(aligned, alpha);

    nlohmann::json j;
    j["schema_version"] = 1;
    j["alpha"] = alpha;
    j["n_features"] = aligned[0].feature_ids.size();
    j["overall_fdr_estimate"] = result.overall_fdr_estimate;
    j["total_discoveries"] = result.total_discoveries;
    j["passes"] = result.passes;
    for (std::size_t k = 0; k < result.thresholds.size(); ++k) {
        nlohmann::json study;
        study["input"] = inputs[k];
        study["dropped"] = dropped[k];
        if (result.thresholds[k]) {
            study["threshold"] = *result.thresholds[k];
        } else {
            study["threshold"] = nullptr;
        }
        j["studies"].push_back(study);
    }
    for (const auto& [a, b, count] : result.pair_discoveries) {
        j["pairs"].push_back({{"study_a", a}, {"study_b", b}, {"discoveries", count}});
    }
    write_text(out_json, j.dump(2) + "\n");
    return 0;
}

int run_bench(std::size_t p, std::size_t m, double alpha, std::uint64_t seed, std::size_t signals,
              std::size_t threads) {
    std::mt19937_64 engine(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    simsig::PairedStatistics data;
    data.direction = Direction::SmallIsSignificant;
    data.feature_ids.resize(p);
    data.s1.resize(p);
    data.s2.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        data.feature_ids[j] = std::to_string(j);
        data.s1[j] = uniform(engine);
        data.s2[j] = uniform(engine);
    }
    for (std::size_t j = 0; j < std::min(signals, p); ++j) {
        data.s1[j] = uniform(engine) * 1e-5;
        data.s2[j] = uniform(engine) * 1e-5;
    }

    const auto t0 = std::chrono::steady_clock::now();
    const simsig::RankIndex index = simsig::build_rank_index(data);
    const auto t1 = std::chrono::steady_clock::now();
    simsig::SearchConfig config;
    config.alpha = alpha;
    config.m1 = std::min(m, p);
    config.m2 = std::min(m, p);
    config.threads = threads;
    const simsig::RejectionThresholds region = simsig::search(data, index, config);
    const auto t2 = std::chrono::steady_clock::now();

    const double build_s = std::chrono::duration<double>(t1 - t0).count();
    const double search_s = std::chrono::duration<double>(t2 - t1).count();
    std::cout << "p=" << p << " m1=" << config.m1 << " m2=" << config.m2 << " alpha=" << alpha
              << "\n"
              << "build_seconds=" << build_s << "\n"
              << "search_seconds=" << search_s << "\n"
              << "total_seconds=" << (build_s + search_s) << "\n"
              << "discoveries=" << region.n_discoveries << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simultaneous signal discovery across two (or more) studies"};
    app.require_subcommand(1);
    bool json_errors = false;
    app.add_flag("--json-errors", json_errors, "report errors as JSON on stderr");

    // discover
    auto* discover = app.add_subcommand("discover", "find the optimal rejection region");
    std::string file_a, file_b, out_json, out_tsv, out_plot;
    CommonIngestArgs ingest_args;
    simsig::SearchConfig search_config;
    std::string tie = "largest-area", estimator = "standard";
    double or_cutoff = 0.05;
    discover->add_option("--a", file_a, "summary file of study 1")->required();
    discover->add_option("--b", file_b, "summary file of study 2")->required();
    add_ingest_options(discover, ingest_args);
    discover->add_option("--alpha", search_config.alpha, "target false discovery rate");
    discover->add_option("--tie", tie, "largest-area|smallest-area");
    discover->add_option("--estimator", estimator, "standard|powerful");
    discover->add_option("--m1", search_config.m1, "candidate depth, study 1 (0 = default)");
    discover->add_option("--m2", search_config.m2, "candidate depth, study 2 (0 = default)");
    discover->add_option("--threads", search_config.threads, "worker threads (0 = hardware)");
    discover->add_option("--or-cutoff", or_cutoff, "cutoff of the odds-ratio diagnostic");
    discover->add_option("--out", out_json, "report JSON path ('-' = stdout)");
    discover->add_option("--discoveries", out_tsv, "discovered-features TSV path");
    discover->add_option("--plot-data", out_plot, "plot-data TSV path");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run a synthetic scenario");
    std::string scenario_path, sim_out, bj_table_path;
    std::size_t sim_threads = 0;
    simulate->add_option("--config", scenario_path, "scenario file")->required();
    simulate->add_option("--out", sim_out, "TSV output path ('-' = stdout)");
    simulate->add_option("--bj-table", bj_table_path, "Berk-Jones null table (for maxp)");
    simulate->add_option("--threads", sim_threads, "worker threads (0 = hardware)");

    // calibrate-bj
    auto* calibrate = app.add_subcommand("calibrate-bj", "build a Berk-Jones null table");
    std::uint32_t cal_n = 50, cal_draws = 10000;
    std::uint64_t cal_seed = 1;
    std::string cal_out;
    std::size_t cal_threads = 0;
    calibrate->add_option("--n", cal_n, "z-scores per statistic");
    calibrate->add_option("--draws", cal_draws, "Monte-Carlo draws (B)");
    calibrate->add_option("--seed", cal_seed, "seed");
    calibrate->add_option("--out", cal_out, "table path (default: cache dir)");
    calibrate->add_option("--threads", cal_threads, "worker threads (0 = hardware)");

    // multiseq
    auto* multiseq = app.add_subcommand("multiseq", "pairwise discovery across K studies");
    std::vector<std::string> ms_inputs;
    double ms_alpha = 0.05;
    std::string ms_out;
    CommonIngestArgs ms_ingest;
    multiseq->add_option("--inputs", ms_inputs, "K summary files")->required()->expected(2, -1);
    add_ingest_options(multiseq, ms_ingest);
    multiseq->add_option("--alpha", ms_alpha, "target overall false discovery rate");
    multiseq->add_option("--out", ms_out, "result JSON path ('-' = stdout)");

    // bench
    auto* bench = app.add_subcommand("bench", "time the search on synthetic data");
    std::size_t bench_p = 1000000, bench_m = 100000, bench_signals = 100, bench_threads = 0;
    double bench_alpha = 0.05;
    std::uint64_t bench_seed = 1;
    bench->add_option("--p", bench_p, "feature count");
    bench->add_option("--m", bench_m, "candidate depth per study");
    bench->add_option("--alpha", bench_alpha, "target false discovery rate");
    bench->add_option("--seed", bench_seed, "seed");
    bench->add_option("--signals", bench_signals, "planted simultaneous signals");
    bench->add_option("--threads", bench_threads, "worker threads (0 = hardware)");

    // verify
    auto* verify = app.add_subcommand("verify", "re-derive a discovery report from raw inputs");
    std::string verify_report, verify_a, verify_b;
    verify->add_option("--report", verify_report, "report JSON path")->required();
    verify->add_option("--a", verify_a, "override study-1 file");
    verify->add_option("--b", verify_b, "override study-2 file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*discover) {
            search_config.tie_rule =
                tie == "smallest-area" ? TieRule::SmallestArea : TieRule::LargestArea;
            if (tie != "smallest-area" && tie != "largest-area") {
                throw std::runtime_error("--tie must be largest-area or smallest-area");
            }
            if (estimator != "standard" && estimator != "powerful") {
                throw std::runtime_error("--estimator must be standard or powerful");
            }
            search_config.estimator = estimator == "powerful" ? EstimatorVariant::Powerful
                                                              : EstimatorVariant::Standard;
            return run_discover(file_a, file_b, ingest_args, search_config, or_cutoff, out_json,
                                out_tsv, out_plot);
        }
        if (*simulate) {
            simsig::ScenarioConfig config = simsig::read_scenario_file(scenario_path);
            if (sim_threads != 0) config.threads = sim_threads;
            simsig::BjNullTable table;
            if (!bj_table_path.empty()) {
                table = simsig::BjNullTable::load(bj_table_path);
                config.bj_table = &table;
            } else if (config.model == simsig::SignalModel::CorrelatedBerkJones) {
                const auto cached = bj_cache_file(static_cast<std::uint32_t>(config.block), 10000);
                if (std::filesystem::exists(cached)) {
                    table = simsig::BjNullTable::load(cached);
                    config.bj_table = &table;
                }
            }
            const simsig::ScenarioResult result = simsig::run_replications(config);
            std::ostringstream out;
            simsig::write_scenario_tsv(out, result);
            write_text(sim_out, out.str());
            return 0;
        }
        if (*calibrate) {
            const simsig::BjNullTable table =
                simsig::calibrate_bj_null(cal_n, cal_draws, cal_seed, cal_threads);
            const std::filesystem::path path =
                cal_out.empty() ? bj_cache_file(cal_n, cal_draws) : std::filesystem::path(cal_out);
            table.save(path);
            std::cerr << "wrote " << path.string() << "\n";
            return 0;
        }
        if (*multiseq) return run_multiseq(ms_inputs, ms_ingest, ms_alpha, ms_out);
        if (*bench) {
            return run_bench(bench_p, bench_m, bench_alpha, bench_seed, bench_signals,
                             bench_threads);
        }
        if (*verify) return run_verify(verify_report, verify_a, verify_b);
    } catch (const std::exception& e) {
        if (json_errors) {
            nlohmann::json j;
            j["error"] = e.what();
            std::cerr << j.dump() << "\n";
        } else {
            std::cerr << "error: " << e.what() << "\n";
        }
        return 1;
    }
    return 0;
}
