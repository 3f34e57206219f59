// mvt: batch front end for the mean-value counting laboratory.
// Thin by design: flags are assembled into a JSON run request and handed to
// the shared library through the C API; the library does all the work.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "mvt.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitCapacity = 2;
constexpr int kExitPrecondition = 3;
constexpr int kExitViolated = 4;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) {
        std::cerr << "mvt: cannot read file '" << path << "'\n";
        std::exit(kExitPrecondition);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    if (!out.good()) {
        std::cerr << "mvt: cannot write file '" << path << "'\n";
        std::exit(kExitPrecondition);
    }
    out << content;
}

struct CommonFlags {
    std::string preset;
    std::string spec_path;
    std::string output_path;
    std::string csv_path;
    std::string cache_dir;
    long long N = 0;
    std::string delta_exp, Delta, Delta_exp, lambda_exp;
    std::string ladder;
    double window_constant = 0.0;
    long long seed = -1;
    long long samples = 0;
    long long budget = 0;
    int threads = 0;
    double audit = 0.0;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_params = true) {
    cmd->add_option("--output", f.output_path, "write the JSON report to this path");
    cmd->add_option("--csv", f.csv_path, "write ladder points as CSV to this path");
    cmd->add_option("--cache-dir", f.cache_dir,
                    "directory for record-table caching (env MVT_CACHE_DIR)");
    cmd->add_option("--threads", f.threads, "worker threads (0 = hardware)");
    cmd->add_option("--budget", f.budget, "memory budget in bytes");
    if (with_params) {
        cmd->add_option("--N", f.N, "range parameter N");
        cmd->add_option("--delta-exp", f.delta_exp, "delta = N^e, e.g. -2 or -9/5");
        cmd->add_option("--Delta", f.Delta, "Delta rule, e.g. delta*N or 0.5*delta*N");
        cmd->add_option("--Delta-exp", f.Delta_exp, "Delta = N^e");
        cmd->add_option("--lambda-exp", f.lambda_exp, "lambda = N^e, e.g. -3 or -5/3");
        cmd->add_option("--window-constant", f.window_constant,
                        "window half-width multiplier (default 1)");
        cmd->add_option("--ladder", f.ladder, "comma-separated ladder, e.g. 24,32,48,64");
        cmd->add_option("--seed", f.seed, "RNG seed for sampling commands");
        cmd->add_option("--samples", f.samples, "Monte Carlo sample count");
        cmd->add_option("--audit-constant", f.audit,
                        "audit constant for implicit-constant checks (default 10)");
    }
}

json overrides_from(const CommonFlags& f) {
    json ov = json::object();
    if (f.N > 0) ov["N"] = f.N;
    if (!f.delta_exp.empty()) ov["delta_exp"] = f.delta_exp;
    if (!f.Delta.empty()) ov["Delta"] = f.Delta;
    if (!f.Delta_exp.empty()) ov["Delta_exp"] = f.Delta_exp;
    if (!f.lambda_exp.empty()) ov["lambda_exp"] = f.lambda_exp;
    if (f.window_constant > 0.0) ov["window_constant"] = f.window_constant;
    if (f.seed >= 0) ov["seed"] = f.seed;
    if (f.samples > 0) ov["samples"] = f.samples;
    if (f.budget > 0) ov["budget_bytes"] = f.budget;
    if (f.threads > 0) ov["threads"] = f.threads;
    if (f.audit > 0.0) ov["audit_constant"] = f.audit;
    if (!f.ladder.empty()) {
        json rungs = json::array();
        std::stringstream ss(f.ladder);
        std::string item;
        while (std::getline(ss, item, ',')) rungs.push_back(std::stoll(item));
        ov["ladder"] = rungs;
    }
    return ov;
}

int dispatch(const std::string& command, const CommonFlags& f, json overrides,
             json extra_request = json::object()) {
    json request;
    request["command"] = command;
    if (!f.preset.empty()) request["preset"] = f.preset;
    if (!f.spec_path.empty()) request["spec_text"] = read_file(f.spec_path);
    request["overrides"] = std::move(overrides);
    std::string cache = f.cache_dir;
    if (cache.empty()) {
        if (const char* env = std::getenv("MVT_CACHE_DIR")) cache = env;
    }
    if (!cache.empty()) request["cache_dir"] = cache;
    for (auto& [k, v] : extra_request.items()) request[k] = v;

    char* report_text = nullptr;
    const mvt_status status = mvt_run_json(request.dump().c_str(), &report_text);
    if (status != MVT_OK) {
        std::cerr << "mvt: " << mvt_status_name(status) << ": " << mvt_last_error() << "\n";
        return status == MVT_ERROR_CAPACITY ? kExitCapacity : kExitPrecondition;
    }
    const json report = json::parse(report_text);
    mvt_string_free(report_text);

    const std::string dumped = report.dump(2) + "\n";
    if (f.output_path.empty()) {
        std::cout << dumped;
    } else {
        write_file(f.output_path, dumped);
    }
    if (!f.csv_path.empty()) {
        if (report.contains("csv")) {
            write_file(f.csv_path, report.at("csv").get<std::string>());
        } else {
            std::cerr << "mvt: this command produced no CSV payload\n";
        }
    }
    return report.value("exit_code", kExitOk);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mvt: exact counting, exponent ladders and geometry checks for "
                 "exponential-sum mean values"};
    app.require_subcommand(1);
    app.set_version_flag("--version", mvt_version());
    app.failure_message(CLI::FailureMessage::help);

    CommonFlags f;

    auto* count = app.add_subcommand("count", "count one system exactly");
    count->add_option("--preset", f.preset, "n8 | n10 | n12 | i6 | i8 | i10 | bilinear-n3");
    count->add_option("--spec", f.spec_path, "spec file (key = value format)");
    add_common(count, f);

    auto* ladder = app.add_subcommand("ladder", "count along an N-ladder and fit the slope");
    ladder->add_option("--preset", f.preset)->required();
    add_common(ladder, f);

    auto* bilinear = app.add_subcommand("bilinear", "mixed count for separated blocks");
    bilinear->add_option("--preset", f.preset);
    add_common(bilinear, f);

    auto* weyl = app.add_subcommand("weyl", "Weyl sum vs. its bound");
    long long weyl_a = 1, weyl_q = 1, weyl_scan = 0;
    int weyl_k = 8;
    std::string sigma;
    weyl->add_option("--a", weyl_a, "numerator a");
    weyl->add_option("--q", weyl_q, "denominator q");
    weyl->add_option("--k", weyl_k, "power k (default 8)");
    weyl->add_option("--sigma", sigma, "bi | wooley | improved | rational value");
    weyl->add_option("--scan", weyl_scan, "scan this many (a, q) pairs up to q ~ N^4");
    add_common(weyl, f);

    auto* vdc = app.add_subcommand("vdc", "partitioned square sums vs. curvature bounds");
    std::string vdc_power, vdc_amp;
    bool vdc_unnormalized = false;
    long long vdc_D = 0;
    vdc->add_option("--power", vdc_power, "phase power (default 3/2)");
    vdc->add_option("--amp-exp", vdc_amp, "amplitude exponent e in N^e (default 1)");
    vdc->add_flag("--unnormalized", vdc_unnormalized, "phase uses n^power, not (n/N)^power");
    vdc->add_option("--D", vdc_D, "block size (default sqrt(N))");
    add_common(vdc, f);

    auto* inter = app.add_subcommand("interchange", "window-interchange inequality check");
    double inter_T = 0.0, inter_C = 0.0;
    inter->add_option("--T", inter_T, "interchange parameter T >= 2");
    inter->add_option("--C", inter_C, "tail constant C (default 1)");
    add_common(inter, f);

    auto* lower = app.add_subcommand("lowerbound", "short-window lower bound construction");
    double lower_c = 0.0;
    lower->add_option("--lower-c", lower_c, "lower-bound constant (default 0.01)");
    add_common(lower, f);

    auto* geom = app.add_subcommand("geom", "curve non-degeneracy scan and curvature checks");
    std::string curves_path, curve_name;
    long long grid = 0;
    double fd_h = 0.0;
    geom->add_option("--curves", curves_path, "curve library file (default: built-in)");
    geom->add_option("--curve", curve_name, "restrict to one named curve");
    geom->add_option("--grid", grid, "grid points per axis (default 8)");
    geom->add_option("--step", fd_h, "finite-difference step (default 1e-4)");
    add_common(geom, f, false);

    auto* mc = app.add_subcommand("mc-check", "Monte Carlo moment vs. exact count");
    mc->add_option("--preset", f.preset);
    mc->add_option("--spec", f.spec_path, "spec file (key = value format)");
    add_common(mc, f);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitPrecondition;
    }

    json ov = overrides_from(f);
    if (count->parsed()) return dispatch("count", f, std::move(ov));
    if (ladder->parsed()) return dispatch("ladder", f, std::move(ov));
    if (bilinear->parsed()) return dispatch("bilinear", f, std::move(ov));
    if (weyl->parsed()) {
        if (weyl->count("--a")) ov["a"] = weyl_a;
        if (weyl->count("--q")) ov["q"] = weyl_q;
        ov["k"] = weyl_k;
        if (!sigma.empty()) ov["sigma"] = sigma;
        if (weyl_scan > 0) ov["scan"] = weyl_scan;
        return dispatch("weyl", f, std::move(ov));
    }
    if (vdc->parsed()) {
        if (!vdc_power.empty()) ov["power"] = vdc_power;
        if (!vdc_amp.empty()) ov["amp_exp"] = vdc_amp;
        if (vdc_unnormalized) ov["normalized"] = false;
        if (vdc_D > 0) ov["D"] = vdc_D;
        return dispatch("vdc", f, std::move(ov));
    }
    if (inter->parsed()) {
        if (inter_T > 0.0) ov["T"] = inter_T;
        if (inter_C > 0.0) ov["C"] = inter_C;
        return dispatch("interchange", f, std::move(ov));
    }
    if (lower->parsed()) {
        if (lower_c > 0.0) ov["lower_c"] = lower_c;
        return dispatch("lowerbound", f, std::move(ov));
    }
    if (geom->parsed()) {
        if (!curve_name.empty()) ov["curve"] = curve_name;
        if (grid > 0) ov["grid"] = grid;
        if (fd_h > 0.0) ov["h"] = fd_h;
        json extra = json::object();
        if (!curves_path.empty()) extra["curves_text"] = read_file(curves_path);
        return dispatch("geom", f, std::move(ov), std::move(extra));
    }
    if (mc->parsed()) return dispatch("mc-check", f, std::move(ov));
    std::cerr << app.help() << "\n";
    return kExitPrecondition;
}
