// Command-line driver: runs named curvature/spectral checks from a config,
// writes a JSON report (and CSV grids for the sampling subcommands), and
// exits 0 exactly when no check row FAILed.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "bundlecurv/runner.hpp"

namespace fs = std::filesystem;
using namespace bundlecurv;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    long long seed = -1;  ///< -1 = keep the config value
    int threads = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "configuration file (sectioned text or JSON)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", opts.out_dir, "output directory for report.json and CSV grids");
    cmd->add_option("--seed", opts.seed, "seed for every sampled sweep (default 42)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--threads", opts.threads,
                    "worker threads (default: BUNDLECURV_THREADS env, else hardware)")
        ->check(CLI::NonNegativeNumber);
}

RunConfig make_config(const CommonOpts& opts) {
    RunConfig cfg = opts.config_path.empty() ? parse_run_config("") : load_run_config(opts.config_path);
    if (opts.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed);
    if (opts.threads >= 0) cfg.threads = opts.threads;
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    return cfg;
}

void print_bundle(const ReportBundle& bundle) {
    for (const auto& row : bundle.rows)
        std::printf("%-11s %-32s value=% .9e oracle=% .9e margin=% .3e\n", row.status().c_str(),
                    row.result.check.c_str(), row.result.value, row.result.oracle, row.result.margin);
    std::printf("summary: pass=%d fail=%d report-only=%d  (%.0f ms, %d threads, seed %llu)\n",
                bundle.pass_count(), bundle.fail_count(), bundle.report_only_count(), bundle.total_ms,
                bundle.threads, static_cast<unsigned long long>(bundle.seed));
}

/// Run the selection, print rows, write report.json (+ optional CSVs).
int run_and_write(RunConfig cfg, const std::vector<std::string>& forced_groups, bool grid_csv,
                  bool moduli_csv) {
    if (!forced_groups.empty()) cfg.selected_checks = forced_groups;
    const ReportBundle bundle = run(cfg);
    print_bundle(bundle);

    if (!cfg.out_dir.empty()) {
        fs::create_directories(cfg.out_dir);
        const fs::path dir(cfg.out_dir);
        write_text_file((dir / "report.json").string(), bundle.to_json().dump(2) + "\n");
        std::printf("report: %s\n", (dir / "report.json").c_str());
        if (grid_csv) {
            write_text_file((dir / "total_curvature_grid.csv").string(),
                            csv_to_string(total_curvature_grid(cfg)));
            std::printf("grid:   %s\n", (dir / "total_curvature_grid.csv").c_str());
        }
        if (moduli_csv) {
            write_text_file((dir / "direct_image_gram.csv").string(), csv_to_string(direct_image_grid(cfg)));
            std::printf("grid:   %s\n", (dir / "direct_image_gram.csv").c_str());
        }
    }
    return bundle.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"curvature and direct-image verification for holomorphic bundle models"};
    app.require_subcommand(1);

    CommonOpts certify_opts, report_opts, tc_opts, spectral_opts, di_opts;
    std::string catalog_filter;

    CLI::App* certify = app.add_subcommand("certify", "run the full default check suite");
    add_common(certify, certify_opts);

    CLI::App* report = app.add_subcommand("report", "run the checks selected in the config");
    add_common(report, report_opts);

    CLI::App* total = app.add_subcommand(
        "total-curvature", "total-space curvature checks plus a tautological-pairing CSV grid");
    add_common(total, tc_opts);

    CLI::App* spectral =
        app.add_subcommand("spectral-verify", "sphere and torus spectral-positivity checks");
    add_common(spectral, spectral_opts);

    CLI::App* direct = app.add_subcommand(
        "direct-image", "theta-family direct-image checks plus a Gram CSV along the moduli line");
    add_common(direct, di_opts);

    CLI::App* list = app.add_subcommand("list-catalog", "list catalog entries and their analytic facts");
    list->add_option("filter", catalog_filter, "substring filter on entry names");

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) {
            std::fputs(list_catalog(catalog_filter).c_str(), stdout);
            return 0;
        }
        if (certify->parsed())
            return run_and_write(make_config(certify_opts), {group_names()}, false, false);
        if (report->parsed()) return run_and_write(make_config(report_opts), {}, false, false);
        if (total->parsed())
            return run_and_write(make_config(tc_opts),
                                 {"decomposition", "dg-norm", "tautological", "total-curvature", "ricci",
                                  "primitive"},
                                 true, false);
        if (spectral->parsed())
            return run_and_write(make_config(spectral_opts), {"sphere", "torus"}, false, false);
        if (direct->parsed())
            return run_and_write(make_config(di_opts), {"torus", "families"}, false, true);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;  // unreachable: a subcommand is required
}
