// distfit: fit abundance distributions, score them, summarize and cluster.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "distfit/cluster.hpp"
#include "distfit/dataset.hpp"
#include "distfit/distzoo.hpp"
#include "distfit/error.hpp"
#include "distfit/gof.hpp"
#include "distfit/mle.hpp"
#include "distfit/report.hpp"
#include "distfit/stats.hpp"

namespace fs = std::filesystem;
using namespace distfit;

namespace {

#ifndef DISTFIT_DATA_DIR
#define DISTFIT_DATA_DIR "data"
#endif

struct RunConfig {
    bool builtin = false;
    std::string input;
    std::vector<std::string> families{"ALL"};
    FitConfig fit;
    std::string output_dir = ".";
    std::string precision = "fixed";
    std::optional<unsigned> threads;
    bool no_pooled = false;
    std::string pooled_label = "Magnoliopsida";
    std::string combine = "k";
    std::size_t bootstrap = 0;
    std::size_t points = 200;
    std::string scaling = "raw";
    std::vector<std::string> columns = summary_columns();
    std::string taxonomy = std::string(DISTFIT_DATA_DIR) + "/cronquist.csv";
    std::string cluster_mode = "both";
};

// Collects failures that do not abort the run but force a nonzero exit.
struct Outcome {
    std::vector<std::string> problems;
    std::vector<std::string> written;

    void fail(std::string what) { problems.push_back(std::move(what)); }
};

Corpus load_input(const RunConfig& cfg) {
    if (cfg.builtin == !cfg.input.empty()) throw ValidationError("give exactly one of --builtin or --input PATH");
    if (cfg.builtin) return builtin_corpus();
    if (!fs::exists(cfg.input)) throw ValidationError("input file not found: " + cfg.input);
    return load_corpus(cfg.input);
}

std::vector<FamilyId> selected_families(const RunConfig& cfg) {
    std::vector<FamilyId> out;
    for (const auto& name : cfg.families) {
        if (name == "ALL") {
            out.assign(all_families.begin(), all_families.end());
            return out;
        }
        const auto f = parse_family(name);
        if (!f) throw ValidationError("unknown family '" + name + "'");
        if (std::find(out.begin(), out.end(), *f) == out.end()) out.push_back(*f);
    }
    if (out.empty()) throw ValidationError("no families selected");
    return out;
}

unsigned thread_cap(const RunConfig& cfg) {
    if (cfg.threads) return *cfg.threads;
    if (const char* env = std::getenv("DISTFIT_THREADS"); env && *env) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (*end != '\0') throw ValidationError(std::string("DISTFIT_THREADS is not a number: ") + env);
        return static_cast<unsigned>(v);
    }
    return 0;
}

void write_file(const RunConfig& cfg, Outcome& out, const fs::path& relative, const std::string& content) {
    const fs::path path = fs::path(cfg.output_dir) / relative;
    fs::create_directories(path.parent_path());
    std::ofstream file(path, std::ios::binary);
    file << content;
    file.close();
    if (!file) throw ValidationError("cannot write " + path.string());
    out.written.push_back(path.string());
}

FitGrid run_fits(const RunConfig& cfg, const Corpus& corpus, const std::vector<FamilyId>& families, Outcome& out) {
    FitGrid grid = fit_all(corpus, families, cfg.fit, thread_cap(cfg));
    for (std::size_t f = 0; f < grid.families().size(); ++f) {
        for (std::size_t s = 0; s < grid.labels().size(); ++s) {
            const FitCell& cell = grid.cell(f, s);
            if (cell.usable()) continue;
            std::string what = std::string(family_name(grid.families()[f])) + "/" + grid.labels()[s] + ": ";
            what += cell.status == FitCell::Status::fitted ? "did not converge" : cell.message;
            out.fail(std::move(what));
        }
    }
    return grid;
}

void cmd_fit(const RunConfig& cfg, Outcome& out) {
    const Corpus corpus = load_input(cfg);
    const FitGrid grid = run_fits(cfg, corpus, selected_families(cfg), out);
    write_file(cfg, out, "fits.tsv", fits_tsv(grid, corpus, parse_precision(cfg.precision)));
}

std::vector<AggregateRow> table2_rows(const RunConfig& cfg, const Corpus& corpus, const FitGrid& grid, Outcome& out) {
    AggregateOptions options;
    if (cfg.combine == "k") {
        options.rule = CombineRule::neg_log_sum_k_df;
    } else if (cfg.combine == "2k") {
        options.rule = CombineRule::standard_fisher_2k;
    } else {
        throw ValidationError("unknown combination rule '" + cfg.combine + "' (expected k or 2k)");
    }
    options.bootstrap_replicates = cfg.bootstrap;
    options.bootstrap_fit = cfg.fit;
    std::vector<AggregateRow> rows;
    for (FamilyId family : grid.families()) {
        try {
            rows.push_back(aggregate(family, corpus, grid, options));
        } catch (const Error& e) {
            out.fail(std::string("table row omitted: ") + e.what());
        }
    }
    return rank_rows(std::move(rows));
}

void cmd_gof_table(const RunConfig& cfg, Outcome& out) {
    const Corpus corpus = load_input(cfg);
    const FitGrid grid = run_fits(cfg, corpus, selected_families(cfg), out);
    write_file(cfg, out, "table2.tsv", table2_tsv(table2_rows(cfg, corpus, grid, out), parse_precision(cfg.precision)));
}

std::vector<SummaryRow> summary_rows(const RunConfig& cfg, const Corpus& corpus, bool with_pooled) {
    std::vector<SummaryRow> rows;
    for (const auto& s : corpus.samples) rows.push_back(summarize(fit(FamilyId::Lognormal2P, s, cfg.fit), s.species_label));
    if (with_pooled) {
        const AbundanceSample pooled = pool(corpus, cfg.pooled_label);
        rows.push_back(summarize(fit(FamilyId::Lognormal2P, pooled, cfg.fit), cfg.pooled_label));
    }
    return rows;
}

void cmd_summary(const RunConfig& cfg, Outcome& out) {
    const Corpus corpus = load_input(cfg);
    write_file(cfg, out, "table3.tsv", table3_tsv(summary_rows(cfg, corpus, !cfg.no_pooled), parse_precision(cfg.precision)));
}

void cmd_curves(const RunConfig& cfg, Outcome& out) {
    const Corpus corpus = load_input(cfg);
    const Precision precision = parse_precision(cfg.precision);
    for (const auto& s : corpus.samples) {
        const FitResult r = fit(FamilyId::Lognormal2P, s, cfg.fit);
        write_file(cfg, out, fs::path("curves") / (s.species_label + ".csv"), curve_csv(r.params, cfg.points, precision));
    }
    if (!cfg.no_pooled) {
        const FitResult r = fit(FamilyId::Lognormal2P, pool(corpus, cfg.pooled_label), cfg.fit);
        write_file(cfg, out, fs::path("curves") / (cfg.pooled_label + ".csv"), curve_csv(r.params, cfg.points, precision));
    }
}

void write_dendrogram(const RunConfig& cfg, Outcome& out, const std::string& stem, const Dendrogram& dgm) {
    write_file(cfg, out, stem + ".nwk", to_newick(dgm) + "\n");
    write_file(cfg, out, stem + ".dot", to_dot(dgm));
    write_file(cfg, out, stem + ".tsv", merge_table(dgm));
}

void cmd_cluster(const RunConfig& cfg, Outcome& out) {
    if (cfg.cluster_mode != "both" && cfg.cluster_mode != "stats" && cfg.cluster_mode != "taxonomy") {
        throw ValidationError("unknown cluster mode '" + cfg.cluster_mode + "' (expected stats, taxonomy or both)");
    }
    if (cfg.cluster_mode != "taxonomy") {
        const Corpus corpus = load_input(cfg);
        const FeatureMatrix m = feature_matrix(summary_rows(cfg, corpus, false), cfg.columns, parse_scaling(cfg.scaling));
        write_dendrogram(cfg, out, "stats_dendrogram", single_linkage(distance_matrix(m), m.row_labels));
    }
    if (cfg.cluster_mode != "stats") {
        if (!fs::exists(cfg.taxonomy)) throw ValidationError("taxonomy file not found: " + cfg.taxonomy);
        const TaxonomyEncoding enc = encode_taxonomy(load_taxonomy(cfg.taxonomy));
        write_dendrogram(cfg, out, "taxonomy_dendrogram",
                         single_linkage(distance_matrix(enc.matrix), enc.matrix.row_labels));
        write_file(cfg, out, "taxonomy_codebook.tsv", serialize_codebook(enc.codebook));
    }
}

void cmd_all(const RunConfig& cfg, Outcome& out) {
    const Corpus corpus = load_input(cfg);
    const Precision precision = parse_precision(cfg.precision);
    const FitGrid grid = run_fits(cfg, corpus, selected_families(cfg), out);
    write_file(cfg, out, "fits.tsv", fits_tsv(grid, corpus, precision));
    write_file(cfg, out, "table2.tsv", table2_tsv(table2_rows(cfg, corpus, grid, out), precision));
    cmd_summary(cfg, out);
    cmd_curves(cfg, out);
    cmd_cluster(cfg, out);
}

void add_input_options(CLI::App* sub, RunConfig& cfg) {
    sub->add_flag("--builtin", cfg.builtin, "Use the built-in ten-species corpus");
    sub->add_option("--input", cfg.input, "Corpus CSV with a species,abundance header");
    sub->add_option("--output-dir", cfg.output_dir, "Directory for reports")->capture_default_str();
    sub->add_option("--precision", cfg.precision, "fixed or full")->capture_default_str();
    sub->add_option("--mle-tol", cfg.fit.tolerance, "Simplex tolerance")->capture_default_str();
    sub->add_option("--mle-max-evals", cfg.fit.max_evaluations, "Evaluations per simplex run")->capture_default_str();
    sub->add_option("--mle-restarts", cfg.fit.restarts, "Jittered restarts per fit")->capture_default_str();
    sub->add_option("--threads", cfg.threads, "Cap on worker threads (overrides DISTFIT_THREADS)");
}

void add_family_options(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--family,--families", cfg.families, "Family names, comma separated, or ALL")
        ->delimiter(',')
        ->capture_default_str();
}

void add_gof_options(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--combine", cfg.combine, "k: sum -ln p vs chi2(k); 2k: -2 sum ln p vs chi2(2k)")
        ->capture_default_str();
    sub->add_option("--bootstrap", cfg.bootstrap, "Parametric bootstrap replicates for K-S and A-D (0 = off)")
        ->capture_default_str();
}

void add_pooled_options(CLI::App* sub, RunConfig& cfg) {
    sub->add_flag("--no-pooled", cfg.no_pooled, "Omit the pooled row");
    sub->add_option("--pooled-label", cfg.pooled_label, "Label of the pooled row")->capture_default_str();
}

void add_cluster_options(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--scaling", cfg.scaling, "raw or zscore")->capture_default_str();
    sub->add_option("--columns", cfg.columns, "Summary columns used as features")->delimiter(',');
    sub->add_option("--taxonomy", cfg.taxonomy, "Taxonomy CSV (species,rank,category)")->capture_default_str();
    sub->add_option("--mode", cfg.cluster_mode, "stats, taxonomy or both")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fit, score and compare abundance distributions"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto* fit_cmd = app.add_subcommand("fit", "Fit families to every sample; writes fits.tsv");
    add_input_options(fit_cmd, cfg);
    add_family_options(fit_cmd, cfg);

    auto* gof_cmd = app.add_subcommand("gof-table", "Rank families by goodness of fit; writes table2.tsv");
    add_input_options(gof_cmd, cfg);
    add_family_options(gof_cmd, cfg);
    add_gof_options(gof_cmd, cfg);

    auto* summary_cmd = app.add_subcommand("summary", "Lognormal summary statistics; writes table3.tsv");
    add_input_options(summary_cmd, cfg);
    add_pooled_options(summary_cmd, cfg);

    auto* curves_cmd = app.add_subcommand("curves", "Fitted lognormal densities on a log grid; writes curves/*.csv");
    add_input_options(curves_cmd, cfg);
    add_pooled_options(curves_cmd, cfg);
    curves_cmd->add_option("--points", cfg.points, "Grid points over [0.01, 100]")
        ->check(CLI::Range(std::size_t{2}, std::size_t{1000000}))
        ->capture_default_str();

    auto* cluster_cmd = app.add_subcommand("cluster", "Single-linkage dendrograms; writes .nwk, .dot and .tsv");
    add_input_options(cluster_cmd, cfg);
    add_cluster_options(cluster_cmd, cfg);

    auto* all_cmd = app.add_subcommand("all", "Run every step into one output directory");
    add_input_options(all_cmd, cfg);
    add_family_options(all_cmd, cfg);
    add_gof_options(all_cmd, cfg);
    add_pooled_options(all_cmd, cfg);
    add_cluster_options(all_cmd, cfg);
    all_cmd->add_option("--points", cfg.points, "Grid points over [0.01, 100]")
        ->check(CLI::Range(std::size_t{2}, std::size_t{1000000}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    Outcome out;
    try {
        validate(cfg.fit);
        if (fit_cmd->parsed()) cmd_fit(cfg, out);
        if (gof_cmd->parsed()) cmd_gof_table(cfg, out);
        if (summary_cmd->parsed()) cmd_summary(cfg, out);
        if (curves_cmd->parsed()) cmd_curves(cfg, out);
        if (cluster_cmd->parsed()) cmd_cluster(cfg, out);
        if (all_cmd->parsed()) cmd_all(cfg, out);
    } catch (const std::exception& e) {
        std::cerr << "distfit: error: " << e.what() << "\n";
        return 1;
    }

    for (const auto& path : out.written) std::cout << "wrote " << path << "\n";
    if (!out.problems.empty()) {
        std::cerr << "distfit: " << out.problems.size() << " problem(s):\n";
        for (const auto& p : out.problems) std::cerr << "  " << p << "\n";
        return 1;
    }
    return 0;
}
