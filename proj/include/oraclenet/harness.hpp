// Experiment harness: scheme variants, run metrics, parameter sweeps, CSV
// and summary output, and the flat scenario-file format.

#pragma once

#include "oraclenet/simulation.hpp"

#include <atomic>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace oraclenet {

struct RunMetrics {
    SchemeVariant variant = SchemeVariant::Full;
    SimConfig config;
    std::string error;  // non-empty when the run itself failed

    std::uint32_t completed_tasks = 0;
    std::uint32_t failed_tasks = 0;
    double accuracy = 0.0;            // over completed tasks
    double mean_variance = 0.0;
    double mean_response_time = 0.0;
    std::uint32_t retry_count = 0;
    double mean_node_accuracy = 0.0;  // mean per-node A over all registered nodes
    double mean_selection_comparisons = 0.0;
    double mean_filter_comparisons = 0.0;
    std::size_t audit_violations = 0;
    Tokens freeloader_rewards = 0;
    bool conserved = true;
    std::string trace_digest;

    std::map<NodeId, std::uint64_t> selection_counts;
    std::vector<ReputationSample> reputation_traces;
};

inline RunMetrics summarize(const SimConfig& cfg, SchemeVariant variant, const SimulationOutput& out) {
    RunMetrics m;
    m.variant = variant;
    m.config = cfg;
    std::uint32_t accurate = 0;
    double var = 0.0;
    double rt = 0.0;
    double sel = 0.0;
    double filt = 0.0;
    for (const auto& t : out.tasks) {
        sel += static_cast<double>(t.selection_comparisons);
        filt += static_cast<double>(t.filter_comparisons);
        m.retry_count += t.retries;
        if (!t.finalized) {
            ++m.failed_tasks;
            continue;
        }
        ++m.completed_tasks;
        accurate += t.accurate ? 1 : 0;
        var += t.variance;
        rt += t.response_time;
    }
    if (m.completed_tasks > 0) {
        const double n = m.completed_tasks;
        m.accuracy = accurate / n;
        m.mean_variance = var / n;
        m.mean_response_time = rt / n;
    }
    if (!out.tasks.empty()) {
        m.mean_selection_comparisons = sel / static_cast<double>(out.tasks.size());
        m.mean_filter_comparisons = filt / static_cast<double>(out.tasks.size());
    }
    double acc_sum = 0.0;
    for (const auto& [_, a] : out.final_accuracy) acc_sum += a;
    if (!out.final_accuracy.empty()) m.mean_node_accuracy = acc_sum / static_cast<double>(out.final_accuracy.size());
    m.audit_violations = out.audit_violations;
    for (const auto& [node, st] : out.node_stats) {
        m.selection_counts[node] = st.selected;
        if (out.behaviors.at(node).kind == BehaviorKind::Freeloader) m.freeloader_rewards += st.earned;
    }
    m.conserved = out.conserved_every_task;
    m.trace_digest = out.trace_digest;
    m.reputation_traces = out.reputation_trace;
    if (out.status != LoopStatus::Completed) m.error = "horizon exceeded";
    return m;
}

/// Throws std::invalid_argument with field diagnostics on a bad config.
inline RunMetrics run_scenario(const SimConfig& cfg, SchemeVariant variant) {
    const auto errs = cfg.validate();
    if (!errs.empty()) {
        std::string msg = "invalid config:";
        for (const auto& e : errs) msg += "\n  " + e;
        throw std::invalid_argument(msg);
    }
    return summarize(cfg, variant, simulate(cfg, variant));
}

// ---------------------------------------------------------------------------
// Sweeps

/// Cartesian grid over the swept fields. An empty axis keeps the base value.
struct SweepGrid {
    std::vector<double> malicious;
    std::vector<std::uint32_t> committee;
    std::vector<double> window;
    std::vector<double> alpha;
    std::vector<std::uint32_t> zeta;
    std::vector<SchemeVariant> variants{SchemeVariant::Full, SchemeVariant::Baseline};
    std::uint32_t replications = 1;  // seeds base.seed, base.seed + 1, ...
};

struct MatrixCell {
    SimConfig config;
    SchemeVariant variant = SchemeVariant::Full;
};

/// Row order: grid point (malicious, committee, window, alpha, zeta, each
/// in the given order), then variant, then replication.
inline std::vector<MatrixCell> expand_grid(const SimConfig& base, const SweepGrid& grid) {
    auto axis = [](const auto& v, auto fallback) {
        using T = std::decay_t<decltype(fallback)>;
        return v.empty() ? std::vector<T>{fallback} : std::vector<T>(v.begin(), v.end());
    };
    std::vector<MatrixCell> cells;
    for (double d : axis(grid.malicious, base.malicious_fraction))
        for (std::uint32_t t : axis(grid.committee, base.committee_size))
            for (double w : axis(grid.window, base.window_width))
                for (double a : axis(grid.alpha, base.alpha))
                    for (std::uint32_t z : axis(grid.zeta, base.min_count))
                        for (SchemeVariant v : grid.variants)
                            for (std::uint32_t r = 0; r < grid.replications; ++r) {
                                SimConfig c = base;
                                c.malicious_fraction = d;
                                c.committee_size = t;
                                c.window_width = w;
                                c.alpha = a;
                                c.min_count = z;
                                c.seed = base.seed + r;
                                cells.push_back(MatrixCell{c, v});
                            }
    return cells;
}

/// Runs every cell; each cell owns its simulator. A failing cell is reported
/// in its row's error field and the sweep continues.
inline std::vector<RunMetrics> run_cells(const std::vector<MatrixCell>& cells, unsigned workers = 0) {
    std::vector<RunMetrics> rows(cells.size());
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, cells.size())));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            try {
                rows[i] = run_scenario(cells[i].config, cells[i].variant);
            } catch (const std::exception& e) {
                rows[i] = RunMetrics{};
                rows[i].variant = cells[i].variant;
                rows[i].config = cells[i].config;
                rows[i].error = e.what();
            }
        }
    };
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    pool.clear();
    return rows;
}

inline std::vector<RunMetrics> run_matrix(const SimConfig& base, const SweepGrid& grid, unsigned workers = 0) {
    if (grid.variants.empty() || grid.replications == 0) throw std::invalid_argument("run_matrix: empty grid");
    return run_cells(expand_grid(base, grid), workers);
}

// ---------------------------------------------------------------------------
// CSV and report

inline std::string fmt_float(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

inline constexpr std::string_view kMetricsHeader =
    "variant,seed,nodes,malicious,committee,window,alpha,zeta,tasks,completed,failed,accuracy,mean_variance,"
    "mean_response_time,retries,mean_node_accuracy,selection_comparisons,filter_comparisons,audit_violations,"
    "freeloader_rewards,conserved,trace_digest,error";

inline constexpr std::string_view kTracesHeader = "variant,seed,task_index,node_id,S,T,A,R";

inline std::string metrics_row(const RunMetrics& m) {
    const SimConfig& c = m.config;
    std::string r;
    r += std::string(to_string(m.variant)) + "," + std::to_string(c.seed) + "," + std::to_string(c.node_count) + ",";
    r += fmt_float(c.malicious_fraction) + "," + std::to_string(c.committee_size) + "," + fmt_float(c.window_width) + ",";
    r += fmt_float(c.alpha) + "," + std::to_string(c.min_count) + "," + std::to_string(c.task_count) + ",";
    r += std::to_string(m.completed_tasks) + "," + std::to_string(m.failed_tasks) + "," + fmt_float(m.accuracy) + ",";
    r += fmt_float(m.mean_variance) + "," + fmt_float(m.mean_response_time) + "," + std::to_string(m.retry_count) + ",";
    r += fmt_float(m.mean_node_accuracy) + "," + fmt_float(m.mean_selection_comparisons) + ",";
    r += fmt_float(m.mean_filter_comparisons) + "," + std::to_string(m.audit_violations) + ",";
    r += std::to_string(m.freeloader_rewards) + "," + (m.conserved ? "1" : "0") + "," + m.trace_digest + ",";
    r += csv_escape(m.error);
    return r;
}

inline std::string metrics_csv(std::span<const RunMetrics> rows) {
    std::string out(kMetricsHeader);
    out += '\n';
    for (const auto& m : rows) out += metrics_row(m) + '\n';
    return out;
}

inline std::string traces_csv(std::span<const RunMetrics> rows) {
    std::string out(kTracesHeader);
    out += '\n';
    for (const auto& m : rows) {
        const std::string prefix = std::string(to_string(m.variant)) + "," + std::to_string(m.config.seed) + ",";
        for (const auto& s : m.reputation_traces) {
            out += prefix + std::to_string(s.task) + "," + s.node + "," + std::to_string(s.services) + "," +
                   fmt_float(s.mean_response_time) + "," + fmt_float(s.accuracy) + "," + fmt_float(s.reputation) + "\n";
        }
    }
    return out;
}

inline double median(std::vector<double> v) { return v.empty() ? 0.0 : median_of(std::move(v)); }

/// Linear-interpolated quantile, q in [0, 1].
inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
}

/// Medians and IQRs per (grid point, variant), then Full vs Baseline.
inline std::string summary_text(std::span<const RunMetrics> rows) {
    struct Key {
        double d, w, a;
        std::uint32_t t, z, n;
        auto operator<=>(const Key&) const = default;
    };
    std::map<Key, std::map<SchemeVariant, std::vector<const RunMetrics*>>> groups;
    for (const auto& m : rows) {
        if (!m.error.empty()) continue;
        const SimConfig& c = m.config;
        groups[Key{c.malicious_fraction, c.window_width, c.alpha, c.committee_size, c.min_count, c.node_count}][m.variant]
            .push_back(&m);
    }
    std::ostringstream os;
    std::size_t errors = 0;
    for (const auto& m : rows) errors += m.error.empty() ? 0 : 1;
    os << "runs: " << rows.size() << " (errors: " << errors << ")\n";
    for (const auto& [k, by_variant] : groups) {
        os << "\nnodes=" << k.n << " malicious=" << fmt_float(k.d) << " committee=" << k.t << " window=" << fmt_float(k.w)
           << " alpha=" << fmt_float(k.a) << " zeta=" << k.z << "\n";
        std::map<SchemeVariant, std::map<std::string, double>> med;
        for (const auto& [v, ms] : by_variant) {
            std::vector<double> acc, var, rt;
            for (const auto* m : ms) {
                acc.push_back(m->accuracy);
                var.push_back(m->mean_variance);
                rt.push_back(m->mean_response_time);
            }
            med[v] = {{"acc", median(acc)}, {"var", median(var)}, {"rt", median(rt)}};
            os << "  " << to_string(v) << " (" << ms.size() << " runs): accuracy " << fmt_float(median(acc)) << " [IQR "
               << fmt_float(quantile(acc, 0.25)) << ", " << fmt_float(quantile(acc, 0.75)) << "], variance "
               << fmt_float(median(var)) << " [IQR " << fmt_float(quantile(var, 0.25)) << ", "
               << fmt_float(quantile(var, 0.75)) << "], response time " << fmt_float(median(rt)) << " s\n";
        }
        if (med.count(SchemeVariant::Full) && med.count(SchemeVariant::Baseline)) {
            const auto& f = med[SchemeVariant::Full];
            const auto& b = med[SchemeVariant::Baseline];
            os << "  full vs baseline: accuracy " << fmt_float(100.0 * (f.at("acc") - b.at("acc"))) << " pp, variance "
               << fmt_float(b.at("var") > 0 ? 100.0 * (1.0 - f.at("var") / b.at("var")) : 0.0) << "% lower\n";
        }
    }
    return os.str();
}

enum class ReportStatus : int { Ok = 0, UsageError = 1, Unwritable = 2 };

/// Writes metrics.csv, traces.csv and summary.txt under `dir`.
inline ReportStatus emit_report(std::span<const RunMetrics> rows, const std::filesystem::path& dir,
                                std::string* message = nullptr) {
    auto fail = [&](ReportStatus s, std::string msg) {
        if (message) *message = std::move(msg);
        return s;
    };
    if (rows.empty()) return fail(ReportStatus::UsageError, "no metrics to report");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) return fail(ReportStatus::Unwritable, "cannot create " + dir.string());
    const std::pair<const char*, std::string> files[] = {
        {"metrics.csv", metrics_csv(rows)}, {"traces.csv", traces_csv(rows)}, {"summary.txt", summary_text(rows)}};
    for (const auto& [name, body] : files) {
        std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
        if (!f || !f.write(body.data(), static_cast<std::streamsize>(body.size())) || !f.flush()) {
            return fail(ReportStatus::Unwritable, "cannot write " + (dir / name).string());
        }
    }
    return ReportStatus::Ok;
}

// ---------------------------------------------------------------------------
// Scenario files: one "key = value" per line, '#' starts a comment.

namespace detail {

template <class T>
bool parse_number(std::string_view s, T& out) {
    if constexpr (std::is_floating_point_v<T>) {
        std::string tmp(s);
        char* end = nullptr;
        errno = 0;
        const double v = std::strtod(tmp.c_str(), &end);
        if (tmp.empty() || end != tmp.c_str() + tmp.size() || errno == ERANGE || !std::isfinite(v)) return false;
        out = static_cast<T>(v);
        return true;
    } else {
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc{} && p == s.data() + s.size();
    }
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace detail

/// Applies one field; returns an error message or empty.
inline std::string apply_setting(SimConfig& c, std::string_view key, std::string_view value) {
    auto num = [&](auto& field) -> std::string {
        return detail::parse_number(value, field) ? "" : "bad value for " + std::string(key) + ": '" + std::string(value) + "'";
    };
    if (key == "nodes" || key == "node_count") return num(c.node_count);
    if (key == "malicious" || key == "malicious_fraction") return num(c.malicious_fraction);
    if (key == "committee" || key == "committee_size") return num(c.committee_size);
    if (key == "window" || key == "window_width") return num(c.window_width);
    if (key == "alpha") return num(c.alpha);
    if (key == "zeta" || key == "min_count") return num(c.min_count);
    if (key == "latency_mean") return num(c.latency_mean);
    if (key == "latency_std") return num(c.latency_std);
    if (key == "latency_jitter_std") return num(c.latency_jitter_std);
    if (key == "tasks" || key == "task_count") return num(c.task_count);
    if (key == "seed") return num(c.seed);
    if (key == "false_offset_std") return num(c.false_offset_std);
    if (key == "lazy_extra_delay") return num(c.lazy_extra_delay);
    if (key == "targeted_trigger") return num(c.targeted_trigger);
    if (key == "sybil_clusters") return num(c.sybil_clusters);
    if (key == "source_count") return num(c.source_count);
    if (key == "source_base") return num(c.source_base);
    if (key == "source_drift") return num(c.source_drift);
    if (key == "source_noise") return num(c.source_noise);
    if (key == "collection_timeout") return num(c.collection_timeout);
    if (key == "reveal_delay") return num(c.reveal_delay);
    if (key == "round_delay") return num(c.round_delay);
    if (key == "task_gap") return num(c.task_gap);
    if (key == "max_retries") return num(c.max_retries);
    if (key == "standby") return num(c.standby);
    if (key == "min_deposit") return num(c.min_deposit);
    if (key == "node_funds") return num(c.node_funds);
    if (key == "reward") return num(c.reward);
    if (key == "fee") return num(c.fee);
    if (key == "slash_threshold") return num(c.slash_threshold);
    if (key == "outlier_k_mad") return num(c.outlier_k_mad);
    if (key == "eps_rel") return num(c.eps_rel);
    if (key == "eps_abs") return num(c.eps_abs);
    if (key == "crashes_per_task") return num(c.crashes_per_task);
    if (key == "strategy") {
        if (value == "median") c.strategy = AggregationStrategy::Median;
        else if (value == "mean") c.strategy = AggregationStrategy::Mean;
        else return "bad value for strategy: '" + std::string(value) + "'";
        return "";
    }
    if (key == "adversary_mix") {
        // behavior:fraction pairs separated by commas; "none" clears the mix
        std::map<BehaviorKind, double> mix;
        if (value != "none" && !value.empty()) {
            std::string_view rest = value;
            while (!rest.empty()) {
                const auto comma = rest.find(',');
                const std::string_view item = detail::trim(rest.substr(0, comma));
                rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
                const auto colon = item.find(':');
                double f = 0.0;
                const auto kind = behavior_from_string(detail::trim(item.substr(0, colon)));
                if (colon == std::string_view::npos || !kind ||
                    !detail::parse_number(detail::trim(item.substr(colon + 1)), f)) {
                    return "bad adversary_mix entry: '" + std::string(item) + "'";
                }
                mix[*kind] = f;
            }
        }
        c.adversary_mix = std::move(mix);
        return "";
    }
    return "unknown key: " + std::string(key);
}

struct ParsedScenario {
    SimConfig config;
    std::optional<SchemeVariant> variant;
    std::vector<std::string> errors;  // "line N: ..."
};

inline ParsedScenario parse_scenario(std::string_view text, SimConfig base = {}) {
    ParsedScenario out;
    out.config = std::move(base);
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            out.errors.push_back("line " + std::to_string(line_no) + ": expected key = value");
            continue;
        }
        const std::string_view key = detail::trim(line.substr(0, eq));
        const std::string_view value = detail::trim(line.substr(eq + 1));
        if (key == "variant") {
            out.variant = variant_from_string(value);
            if (!out.variant) out.errors.push_back("line " + std::to_string(line_no) + ": unknown variant");
            continue;
        }
        if (auto err = apply_setting(out.config, key, value); !err.empty()) {
            out.errors.push_back("line " + std::to_string(line_no) + ": " + err);
        }
    }
    return out;
}

inline std::string to_scenario_text(const SimConfig& c) {
    std::ostringstream os;
    auto f = [](double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    os << "nodes = " << c.node_count << "\nmalicious = " << f(c.malicious_fraction) << "\ncommittee = " << c.committee_size
       << "\nwindow = " << f(c.window_width) << "\nalpha = " << f(c.alpha) << "\nzeta = " << c.min_count
       << "\nlatency_mean = " << f(c.latency_mean) << "\nlatency_std = " << f(c.latency_std)
       << "\nlatency_jitter_std = " << f(c.latency_jitter_std) << "\ntasks = " << c.task_count << "\nseed = " << c.seed
       << "\nadversary_mix = ";
    if (c.adversary_mix.empty()) os << "none";
    bool first = true;
    for (const auto& [k, v] : c.adversary_mix) {
        os << (first ? "" : ",") << to_string(k) << ":" << f(v);
        first = false;
    }
    os << "\nfalse_offset_std = " << f(c.false_offset_std) << "\nlazy_extra_delay = " << f(c.lazy_extra_delay)
       << "\ntargeted_trigger = " << c.targeted_trigger << "\nsybil_clusters = " << c.sybil_clusters
       << "\nsource_count = " << c.source_count << "\nsource_base = " << f(c.source_base)
       << "\nsource_drift = " << f(c.source_drift) << "\nsource_noise = " << f(c.source_noise)
       << "\ncollection_timeout = " << f(c.collection_timeout) << "\nreveal_delay = " << f(c.reveal_delay)
       << "\nround_delay = " << f(c.round_delay) << "\ntask_gap = " << f(c.task_gap) << "\nmax_retries = " << c.max_retries
       << "\nstandby = " << c.standby << "\nmin_deposit = " << c.min_deposit << "\nnode_funds = " << c.node_funds
       << "\nreward = " << c.reward << "\nfee = " << c.fee << "\nslash_threshold = " << f(c.slash_threshold)
       << "\nstrategy = " << to_string(c.strategy) << "\noutlier_k_mad = " << f(c.outlier_k_mad)
       << "\neps_rel = " << f(c.eps_rel) << "\neps_abs = " << f(c.eps_abs) << "\ncrashes_per_task = " << c.crashes_per_task
       << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Reading reports back

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cells.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cells.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.emplace_back();
        } else {
            cells.back() += c;
        }
    }
    return cells;
}

/// Reads rows written by metrics_csv back (config columns and scalar
/// metrics; traces are not part of metrics.csv).
inline std::vector<RunMetrics> parse_metrics_csv(std::string_view text, std::vector<std::string>* errors = nullptr) {
    std::vector<RunMetrics> rows;
    std::size_t line_no = 0;
    auto err = [&](std::string msg) {
        if (errors) errors->push_back("line " + std::to_string(line_no) + ": " + msg);
    };
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != kMetricsHeader) err("unexpected header");
            continue;
        }
        const auto c = split_csv_line(line);
        if (c.size() != 23) {
            err("expected 23 columns, got " + std::to_string(c.size()));
            continue;
        }
        RunMetrics m;
        const auto v = variant_from_string(c[0]);
        bool ok = v.has_value();
        if (ok) m.variant = *v;
        ok = ok && detail::parse_number(c[1], m.config.seed) && detail::parse_number(c[2], m.config.node_count) &&
             detail::parse_number(c[3], m.config.malicious_fraction) &&
             detail::parse_number(c[4], m.config.committee_size) && detail::parse_number(c[5], m.config.window_width) &&
             detail::parse_number(c[6], m.config.alpha) && detail::parse_number(c[7], m.config.min_count) &&
             detail::parse_number(c[8], m.config.task_count) && detail::parse_number(c[9], m.completed_tasks) &&
             detail::parse_number(c[10], m.failed_tasks) && detail::parse_number(c[11], m.accuracy) &&
             detail::parse_number(c[12], m.mean_variance) && detail::parse_number(c[13], m.mean_response_time) &&
             detail::parse_number(c[14], m.retry_count) && detail::parse_number(c[15], m.mean_node_accuracy) &&
             detail::parse_number(c[16], m.mean_selection_comparisons) &&
             detail::parse_number(c[17], m.mean_filter_comparisons) && detail::parse_number(c[18], m.audit_violations) &&
             detail::parse_number(c[19], m.freeloader_rewards) && (c[20] == "0" || c[20] == "1");
        if (!ok) {
            err("malformed row");
            continue;
        }
        m.conserved = c[20] == "1";
        m.trace_digest = c[21];
        m.error = c[22];
        rows.push_back(std::move(m));
    }
    return rows;
}

}  // namespace oraclenet
