#include "mvt/report.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mvt/explab.hpp"
#include "mvt/geometry.hpp"
#include "mvt/sums.hpp"

namespace mvt {

namespace {

using nlohmann::json;

Rational rational_from_json(const json& v, const std::string& what) {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<i64>());
    fail(ErrorCode::invalid_argument,
         what + " must be an integer or a rational/decimal string");
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RequestView {
    std::string command;
    std::optional<std::string> preset;
    std::optional<std::string> spec_text;
    std::optional<std::string> curves_text;
    json overrides = json::object();
    std::string cache_dir;

    bool has(const std::string& key) const { return overrides.contains(key); }
    i64 get_int(const std::string& key, i64 fallback) const {
        return has(key) ? overrides.at(key).get<i64>() : fallback;
    }
    i64 require_int(const std::string& key) const {
        require(has(key), ErrorCode::precondition, "missing required parameter '" + key + "'");
        return overrides.at(key).get<i64>();
    }
    double get_double(const std::string& key, double fallback) const {
        return has(key) ? overrides.at(key).get<double>() : fallback;
    }
    Rational get_rational(const std::string& key, const Rational& fallback) const {
        return has(key) ? rational_from_json(overrides.at(key), key) : fallback;
    }
    std::string get_string(const std::string& key, const std::string& fallback) const {
        return has(key) ? overrides.at(key).get<std::string>() : fallback;
    }
};

RequestView parse_request(const json& request) {
    require(request.is_object(), ErrorCode::invalid_argument, "request must be a JSON object");
    RequestView view;
    require(request.contains("command"), ErrorCode::invalid_argument,
            "request is missing 'command'");
    view.command = request.at("command").get<std::string>();
    if (request.contains("preset")) view.preset = request.at("preset").get<std::string>();
    if (request.contains("spec_text"))
        view.spec_text = request.at("spec_text").get<std::string>();
    if (request.contains("curves_text"))
        view.curves_text = request.at("curves_text").get<std::string>();
    if (request.contains("overrides")) {
        view.overrides = request.at("overrides");
        require(view.overrides.is_object(), ErrorCode::invalid_argument,
                "'overrides' must be an object");
    }
    if (request.contains("cache_dir")) view.cache_dir = request.at("cache_dir").get<std::string>();
    return view;
}

PresetConfig preset_config(const RequestView& view) {
    require(view.preset.has_value(), ErrorCode::precondition,
            "this command needs a --preset");
    PresetConfig cfg = PresetConfig::make(*view.preset);
    apply_preset_overrides(cfg, view.overrides);
    return cfg;
}

std::vector<i64> ladder_from(const RequestView& view, const std::string& preset) {
    if (view.has("ladder")) {
        std::vector<i64> ladder;
        for (const auto& v : view.overrides.at("ladder")) ladder.push_back(v.get<i64>());
        return ladder;
    }
    // default ladders sized so each family finishes in minutes
    if (preset == "n10" || preset == "n12" || preset == "i10") return {24, 32, 48, 64, 96};
    if (preset == "bilinear-n3") return {16, 32, 64};
    return {32, 48, 64, 96, 128};
}

MomentSpec spec_for(const RequestView& view) {
    const bool has_preset = view.preset.has_value();
    const bool has_text = view.spec_text.has_value();
    require(has_preset != has_text, ErrorCode::precondition,
            "exactly one of a preset or a spec file is required");
    if (has_text) {
        MomentSpec spec = parse_spec_text(*view.spec_text);
        if (view.has("N")) {
            spec.N = view.require_int("N");
            spec.range = Interval::dyadic(spec.N);
            spec.validate();
        }
        return spec;
    }
    PresetConfig cfg = preset_config(view);
    return build_preset_spec(cfg, view.require_int("N"));
}

json count_command(const RequestView& view, const CountOptions& opts) {
    json body;
    WindowSystem sys;
    const double window_constant = view.get_double("window_constant", 1.0);
    if (view.preset.has_value()) {
        PresetConfig cfg = preset_config(view);
        cfg.window_constant = window_constant;
        const i64 N = view.require_int("N");
        sys = build_preset_system(cfg, N);
        body["preset"] = cfg.preset;
        body["description"] = preset_description(cfg.preset);
        body["resolved_params"] = resolved_params(cfg, N);
    } else {
        const MomentSpec spec = spec_for(view);
        sys = spec_to_system(spec, window_constant);
        body["spec"] = spec_to_json(spec);
    }
    const CountResult res = count_auto(sys, opts);
    body["resolved_system"] = sys.to_json();
    body["result"] = res.to_json();
    body["exit_code"] = 0;
    body["wall_time"] = res.wall_time;
    return body;
}

json verdict_block(const LadderRun& run, const PresetConfig& cfg, const RequestView& view) {
    json verdicts = json::array();
    if (const auto claimed = claimed_exponent(cfg)) {
        const double low = view.get_double("band_low", 1.0);
        const double high = view.get_double("band_high", 0.35);
        verdicts.push_back(check_bound(run.fit, *claimed, low, high).to_json());
    }
    return verdicts;
}

std::string ladder_csv(const FitResult& fit) {
    std::ostringstream out;
    out << "N,count,log2_N,log2_count\n";
    for (const auto& p : fit.points) {
        char log_n[32], log_c[32];
        std::snprintf(log_n, sizeof(log_n), "%.6f", std::log2(double(p.N)));
        std::snprintf(log_c, sizeof(log_c), "%.6f", log2_u128(p.count));
        out << p.N << "," << to_string_u128(p.count) << "," << log_n << "," << log_c << "\n";
    }
    return out.str();
}

json ladder_command(const RequestView& view, const CountOptions& opts) {
    PresetConfig cfg = preset_config(view);
    cfg.window_constant = view.get_double("window_constant", 1.0);
    const std::vector<i64> ladder = ladder_from(view, cfg.preset);
    const LadderTemplate tmpl = LadderTemplate::from_preset(cfg);
    const LadderRun run = run_ladder(tmpl, ladder, opts);

    json body;
    body["preset"] = cfg.preset;
    body["description"] = preset_description(cfg.preset);
    body["resolved_system"] = build_preset_system(cfg, ladder.front()).to_json();
    body["fit"] = run.fit.to_json();
    if (run.capacity_error) body["capacity_error"] = *run.capacity_error;
    const json verdicts = verdict_block(run, cfg, view);
    body["verdicts"] = verdicts;
    body["csv"] = ladder_csv(run.fit);
    bool violated = false;
    for (const auto& v : verdicts)
        if (v.at("verdict") == "violated") violated = true;
    body["exit_code"] = violated ? 4 : 0;
    return body;
}

json bilinear_command(const RequestView& view, const CountOptions& opts) {
    PresetConfig cfg = view.preset.has_value() ? preset_config(view)
                                               : PresetConfig::make("bilinear-n3");
    require(cfg.preset == "bilinear-n3", ErrorCode::precondition,
            "the bilinear command works on the bilinear-n3 preset");
    cfg.window_constant = view.get_double("window_constant", 1.0);
    const i64 N = view.require_int("N");
    const WindowSystem sys = build_preset_system(cfg, N);
    const CountResult res = count_bilinear(sys, opts);
    json body;
    body["preset"] = cfg.preset;
    body["description"] = preset_description(cfg.preset);
    body["resolved_system"] = sys.to_json();
    body["result"] = res.to_json();
    body["exit_code"] = 0;
    return body;
}

json weyl_command(const RequestView& view) {
    const i64 N = view.get_int("N", 1024);
    const int k = int(view.get_int("k", 8));
    Rational sigma;
    const std::string sigma_text = view.get_string("sigma", "improved");
    try {
        sigma = weyl_sigma_preset(sigma_text);
    } catch (const Error&) {
        sigma = parse_rational(sigma_text);
    }
    json body;
    body["sigma"] = sigma.str();
    body["k"] = k;
    body["N"] = N;
    if (view.has("scan")) {
        const i64 points = view.require_int("scan");
        require(points >= 1 && points <= 10000, ErrorCode::invalid_argument,
                "scan size out of range");
        json table = json::array();
        double max_ratio = 0.0;
        const double top_log2 = 4.0 * std::log2(double(N));
        i64 prev_q = 1;
        for (i64 i = 0; i < points; ++i) {
            i64 q = i64(std::llround(std::pow(2.0, top_log2 * double(i + 1) / double(points))));
            if (q <= prev_q) q = prev_q + 1;
            prev_q = q;
            const i64 a = (i % 2 == 0) ? 1 : (q > 1 ? q - 1 : 1);
            const SumValue f = weyl_sum(a, q, N, k);
            const double rhs = weyl_bound_rhs(a, q, N, sigma);
            const double ratio = f.abs() / rhs;
            max_ratio = std::max(max_ratio, ratio);
            table.push_back({{"a", a}, {"q", q}, {"abs", f.abs()}, {"rhs", rhs},
                             {"ratio", ratio}});
        }
        body["scan"] = table;
        body["max_ratio"] = max_ratio;
        body["all_below_bound"] = max_ratio < 1.0;
        body["exit_code"] = max_ratio < 1.0 ? 0 : 4;
        return body;
    }
    const i64 a = view.require_int("a");
    const i64 q = view.require_int("q");
    const SumValue f = weyl_sum(a, q, N, k);
    const double rhs = weyl_bound_rhs(a, q, N, sigma);
    body["a"] = a;
    body["q"] = q;
    body["abs"] = f.abs();
    body["real"] = f.real;
    body["imag"] = f.imag;
    body["rhs"] = rhs;
    body["ratio"] = f.abs() / rhs;
    body["exit_code"] = 0;
    return body;
}

json vdc_command(const RequestView& view) {
    const i64 N = view.get_int("N", 4096);
    PhaseTerm phase;
    phase.power = view.get_rational("power", Rational(3, 2));
    phase.amplitude_exponent = view.get_rational("amp_exp", Rational(1));
    phase.normalized = view.has("normalized") ? view.overrides.at("normalized").get<bool>() : true;
    const i64 D = view.get_int("D", i64(std::llround(std::sqrt(double(N)))));
    const double audit = view.get_double("audit_constant", 10.0);
    const VdcResult r = vdc_partition_sum(phase, D, N);
    json body;
    body["N"] = N;
    body["phase"] = {{"power", phase.power.str()},
                     {"amplitude_exponent", phase.amplitude_exponent.str()},
                     {"normalized", phase.normalized}};
    body["result"] = r.to_json();
    const double ratio = r.bound_a > 0 ? r.partition_sum / r.bound_a : 0.0;
    body["ratio_to_bound_a"] = ratio;
    body["audit_constant"] = audit;
    body["flagged"] = !r.degenerate_phase && ratio > audit;
    body["exit_code"] = 0;
    return body;
}

json interchange_command(const RequestView& view, const CountOptions& opts) {
    const i64 N = view.require_int("N");
    const Rational dexp = view.get_rational("delta_exp", Rational(-9, 5));
    const double delta = std::pow(double(N), dexp.to_double());
    const DeltaRule rule = DeltaRule::parse(view.get_string("Delta", "0.5*delta*N"));
    const double Delta = rule.resolve(N, delta);
    const double T = view.get_double("T", 2.0);
    const double C = view.get_double("C", 1.0);
    const double audit = view.get_double("audit_constant", 10.0);
    const InterchangeReport rep = interchange_check(N, delta, Delta, T, C, opts, audit);
    json body;
    body["report"] = rep.to_json();
    body["exit_code"] = 0;
    return body;
}

json lowerbound_command(const RequestView& view, const CountOptions& opts) {
    const i64 N = view.require_int("N");
    const Rational dexp = view.get_rational("delta_exp", Rational(-3, 2));
    const Rational Dexp = view.get_rational("Delta_exp", Rational(-1));
    const double delta = std::pow(double(N), dexp.to_double());
    const double Delta = std::pow(double(N), Dexp.to_double());
    const double lower_c = view.get_double("lower_c", 1e-2);
    const double audit = view.get_double("audit_constant", 10.0);
    const LowerBoundReport rep = lower_bound_check(N, delta, Delta, opts, lower_c, audit);
    json body;
    body["report"] = rep.to_json();
    body["exit_code"] = (rep.lower_holds && rep.upper_holds) ? 0 : 4;
    return body;
}

json geom_command(const RequestView& view) {
    const std::string text =
        view.curves_text.has_value() ? *view.curves_text : default_curve_library();
    const auto library = parse_curve_library(text);
    const std::string only = view.get_string("curve", "");
    const int grid = int(view.get_int("grid", 8));
    const double h = view.get_double("h", 1e-4);
    const double threshold = view.get_double("threshold", 1e-9);

    json curves = json::array();
    bool matched = false;
    for (const auto& [name, curve] : library) {
        if (!only.empty() && name != only) continue;
        matched = true;
        json entry;
        entry["name"] = name;
        const GeometryReport scan = nondegeneracy_scan(curve, grid, threshold);
        entry["scan"] = scan.to_json();
        if (!scan.degenerate) {
            std::vector<double> mid;
            for (const auto& [lo, hi] : curve.sub_intervals) mid.push_back((lo + hi) / 2.0);
            entry["quadratic_fit"] = quadratic_fit_check(curve, mid, h).to_json();
            // exact-vs-double agreement at a rational point of the domain
            const double tm = (curve.dom_lo + curve.dom_hi) / 2.0;
            const Rational tr(i64(std::llround(tm * 64.0)), 64);
            const double dv = wronskian(curve, 2, tr.to_double());
            const BigRat ev = wronskian_exact(curve, 2, tr);
            const double evd = ev.convert_to<double>();
            entry["wronskian_check"] = {
                {"t", tr.str()},
                {"double_value", dv},
                {"exact_value", evd},
                {"rel_error", std::abs(dv - evd) / std::max(std::abs(evd), 1e-300)}};
        }
        curves.push_back(entry);
    }
    require(matched, ErrorCode::precondition,
            only.empty() ? "curve library is empty" : "no curve named '" + only + "'");
    json body;
    body["curves"] = curves;
    body["exit_code"] = 0;
    return body;
}

json mc_check_command(const RequestView& view, const CountOptions& opts) {
    const double window_constant = view.get_double("window_constant", 1.0);
    const MomentSpec spec = spec_for(view);
    const i64 samples = view.get_int("samples", 20000);
    const u64 seed = u64(view.get_int("seed", 1));
    const MCEstimate mc = mc_moment(spec, samples, seed, opts.threads);
    const WindowSystem sys = spec_to_system(spec, window_constant);
    const CountResult res = count_auto(sys, opts);
    const double count = double(u128_to_ld(res.count));
    json body;
    body["spec"] = spec_to_json(spec);
    body["resolved_system"] = sys.to_json();
    body["mc"] = mc.to_json();
    body["count"] = res.to_json();
    body["abs_difference"] = std::abs(mc.mean - count);
    body["within_4_stderr"] = std::abs(mc.mean - count) <= 4.0 * mc.stderr_;
    body["ratio"] = count > 0 ? mc.mean / count : 0.0;
    body["exit_code"] = 0;
    return body;
}

} // namespace

CountOptions count_options_from_json(const json& j) {
    CountOptions opts;
    if (j.contains("threads")) opts.threads = j.at("threads").get<int>();
    if (j.contains("budget_bytes")) opts.budget_bytes = j.at("budget_bytes").get<u64>();
    if (j.contains("brute_ceiling")) opts.brute_ceiling = j.at("brute_ceiling").get<double>();
    if (j.contains("cache_dir")) opts.cache_dir = j.at("cache_dir").get<std::string>();
    return opts;
}

void apply_preset_overrides(PresetConfig& cfg, const nlohmann::json& overrides) {
    if (overrides.contains("delta_exp"))
        cfg.delta_exp = rational_from_json(overrides.at("delta_exp"), "delta_exp");
    if (overrides.contains("Delta"))
        cfg.Delta = DeltaRule::parse(overrides.at("Delta").get<std::string>());
    if (overrides.contains("Delta_exp"))
        cfg.Delta = DeltaRule::from_exponent(
            rational_from_json(overrides.at("Delta_exp"), "Delta_exp"));
    if (overrides.contains("lambda_exp"))
        cfg.lambda_exp = rational_from_json(overrides.at("lambda_exp"), "lambda_exp");
    if (overrides.contains("window_constant"))
        cfg.window_constant = overrides.at("window_constant").get<double>();
}

nlohmann::json run_request(const nlohmann::json& request) {
    StopWatch timer;
    const RequestView view = parse_request(request);
    CountOptions opts = count_options_from_json(view.overrides);
    if (!view.cache_dir.empty()) opts.cache_dir = view.cache_dir;

    json body;
    if (view.command == "count") body = count_command(view, opts);
    else if (view.command == "ladder") body = ladder_command(view, opts);
    else if (view.command == "bilinear") body = bilinear_command(view, opts);
    else if (view.command == "weyl") body = weyl_command(view);
    else if (view.command == "vdc") body = vdc_command(view);
    else if (view.command == "interchange") body = interchange_command(view, opts);
    else if (view.command == "lowerbound") body = lowerbound_command(view, opts);
    else if (view.command == "geom") body = geom_command(view);
    else if (view.command == "mc-check") body = mc_check_command(view, opts);
    else
        fail(ErrorCode::precondition, "unknown command '" + view.command + "'");

    json report;
    report["report_version"] = 1;
    report["command"] = view.command;
    for (auto& [key, value] : body.items()) report[key] = value;
    report["metadata"] = {{"timestamp", iso_timestamp()},
                          {"total_wall_seconds", timer.seconds()},
                          {"threads_requested", opts.threads}};
    return report;
}

} // namespace mvt
