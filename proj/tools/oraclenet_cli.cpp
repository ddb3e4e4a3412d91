// oraclenet: run one scenario, sweep a matrix, or re-summarize a report.

#include "oraclenet/harness.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

using namespace oraclenet;

struct CommonFlags {
    std::optional<std::uint32_t> nodes, committee, zeta, tasks;
    std::optional<double> malicious, window, alpha;
    std::optional<std::uint64_t> seed;
    std::string config_path;
    std::string out = "oraclenet-out";
    std::vector<std::string> variants;  // empty: scenario file's variant, else the default
    std::vector<std::string> default_variants{"full"};
};

void add_common(CLI::App* app, CommonFlags& f) {
    app->add_option("--config", f.config_path, "scenario file (key = value lines)");
    app->add_option("--nodes", f.nodes, "node count N");
    app->add_option("--malicious", f.malicious, "malicious fraction");
    app->add_option("--committee", f.committee, "committee size t");
    app->add_option("--window", f.window, "filter window width w, seconds");
    app->add_option("--alpha", f.alpha, "reputation weight alpha");
    app->add_option("--zeta", f.zeta, "minimum filtered count");
    app->add_option("--tasks", f.tasks, "tasks per run");
    app->add_option("--seed", f.seed, "seed (ORACLENET_SEED overrides)");
    app->add_option("--variant", f.variants, "full, no_reputation, no_filter, baseline")->delimiter(',');
    app->add_option("--out", f.out, "output directory");
}

// Returns false (with diagnostics printed) on a bad scenario.
bool build_config(const CommonFlags& f, SimConfig& cfg, std::vector<SchemeVariant>& variants) {
    std::vector<std::string> errs;
    std::vector<std::string> names = f.variants;
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path, std::ios::binary);
        if (!in) {
            std::cerr << "cannot read " << f.config_path << "\n";
            return false;
        }
        std::stringstream ss;
        ss << in.rdbuf();
        ParsedScenario p = parse_scenario(ss.str());
        errs = std::move(p.errors);
        cfg = p.config;
        if (names.empty() && p.variant) names.emplace_back(to_string(*p.variant));
    }
    if (names.empty()) names = f.default_variants;
    if (f.nodes) cfg.node_count = *f.nodes;
    if (f.malicious) cfg.malicious_fraction = *f.malicious;
    if (f.committee) cfg.committee_size = *f.committee;
    if (f.window) cfg.window_width = *f.window;
    if (f.alpha) cfg.alpha = *f.alpha;
    if (f.zeta) cfg.min_count = *f.zeta;
    if (f.tasks) cfg.task_count = *f.tasks;
    if (f.seed) cfg.seed = *f.seed;
    if (const char* env = std::getenv("ORACLENET_SEED")) {
        std::uint64_t s = 0;
        if (detail::parse_number(std::string_view(env), s)) {
            cfg.seed = s;
        } else {
            errs.push_back("ORACLENET_SEED: not an unsigned integer");
        }
    }
    for (const auto& name : names) {
        if (auto v = variant_from_string(name)) {
            variants.push_back(*v);
        } else {
            errs.push_back("variant: unknown '" + name + "'");
        }
    }
    for (auto& e : cfg.validate()) errs.push_back(std::move(e));
    for (const auto& e : errs) std::cerr << "error: " << e << "\n";
    return errs.empty();
}

int finish(std::span<const RunMetrics> rows, const std::string& out) {
    std::string msg;
    const ReportStatus st = emit_report(rows, out, &msg);
    if (st != ReportStatus::Ok) {
        std::cerr << "error: " << msg << "\n";
        return static_cast<int>(st);
    }
    std::cout << summary_text(rows);
    std::cout << "wrote " << out << "/metrics.csv, traces.csv, summary.txt\n";
    return 0;
}

template <class T>
std::vector<T> parse_list(const std::vector<std::string>& items, const char* flag, std::vector<std::string>& errs) {
    std::vector<T> out;
    for (const auto& s : items) {
        T v{};
        if (detail::parse_number(std::string_view(s), v)) {
            out.push_back(v);
        } else {
            errs.push_back(std::string(flag) + ": bad value '" + s + "'");
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"oraclenet - blockchain oracle simulator"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    auto* run = app.add_subcommand("run", "run a single scenario");
    add_common(run, run_flags);

    CommonFlags mx_flags;
    mx_flags.default_variants = {"full", "baseline"};
    std::vector<std::string> sw_mal, sw_com, sw_win, sw_alpha, sw_zeta;
    std::uint32_t reps = 1;
    unsigned jobs = 0;
    auto* matrix = app.add_subcommand("matrix", "sweep a parameter grid");
    add_common(matrix, mx_flags);
    matrix->add_option("--sweep-malicious", sw_mal)->delimiter(',');
    matrix->add_option("--sweep-committee", sw_com)->delimiter(',');
    matrix->add_option("--sweep-window", sw_win)->delimiter(',');
    matrix->add_option("--sweep-alpha", sw_alpha)->delimiter(',');
    matrix->add_option("--sweep-zeta", sw_zeta)->delimiter(',');
    matrix->add_option("--replications", reps, "seeds per grid point")->check(CLI::PositiveNumber);
    matrix->add_option("--jobs", jobs, "worker threads (0 = all cores)");

    std::string in_path;
    std::string report_out;
    auto* report = app.add_subcommand("report", "summarize an existing metrics.csv");
    report->add_option("metrics", in_path, "path to metrics.csv")->required();
    report->add_option("--out", report_out, "also write summary.txt into this directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            SimConfig cfg;
            std::vector<SchemeVariant> variants;
            if (!build_config(run_flags, cfg, variants)) return 1;
            std::vector<MatrixCell> cells;
            for (auto v : variants) cells.push_back(MatrixCell{cfg, v});
            return finish(run_cells(cells), run_flags.out);
        }
        if (matrix->parsed()) {
            SimConfig cfg;
            std::vector<SchemeVariant> variants;
            if (!build_config(mx_flags, cfg, variants)) return 1;
            std::vector<std::string> errs;
            SweepGrid grid;
            grid.malicious = parse_list<double>(sw_mal, "--sweep-malicious", errs);
            grid.committee = parse_list<std::uint32_t>(sw_com, "--sweep-committee", errs);
            grid.window = parse_list<double>(sw_win, "--sweep-window", errs);
            grid.alpha = parse_list<double>(sw_alpha, "--sweep-alpha", errs);
            grid.zeta = parse_list<std::uint32_t>(sw_zeta, "--sweep-zeta", errs);
            grid.variants = variants;
            grid.replications = reps;
            for (const auto& c : expand_grid(cfg, grid)) {
                for (auto& e : c.config.validate()) errs.push_back(std::move(e));
            }
            if (!errs.empty()) {
                std::sort(errs.begin(), errs.end());
                errs.erase(std::unique(errs.begin(), errs.end()), errs.end());
                for (const auto& e : errs) std::cerr << "error: " << e << "\n";
                return 1;
            }
            return finish(run_matrix(cfg, grid, jobs), mx_flags.out);
        }
        if (report->parsed()) {
            std::ifstream in(in_path, std::ios::binary);
            if (!in) {
                std::cerr << "error: cannot read " << in_path << "\n";
                return 1;
            }
            std::stringstream ss;
            ss << in.rdbuf();
            std::vector<std::string> errs;
            const auto rows = parse_metrics_csv(ss.str(), &errs);
            for (const auto& e : errs) std::cerr << "warning: " << e << "\n";
            if (rows.empty()) {
                std::cerr << "error: no metrics rows in " << in_path << "\n";
                return 1;
            }
            const std::string text = summary_text(rows);
            std::cout << text;
            if (!report_out.empty()) {
                std::error_code ec;
                std::filesystem::create_directories(report_out, ec);
                std::ofstream f(std::filesystem::path(report_out) / "summary.txt", std::ios::binary);
                if (ec || !f || !(f << text) || !f.flush()) {
                    std::cerr << "error: cannot write " << report_out << "/summary.txt\n";
                    return 2;
                }
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
