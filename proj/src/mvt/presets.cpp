#include "mvt/presets.hpp"

#include <algorithm>
#include <cmath>

namespace mvt {

DeltaRule DeltaRule::from_exponent(const Rational& e) {
    DeltaRule r;
    r.kind = Kind::exponent;
    r.exponent = e;
    return r;
}

DeltaRule DeltaRule::parse(const std::string& text) {
    DeltaRule r;
    const auto star = text.find("delta*N");
    if (star != std::string::npos) {
        r.kind = Kind::delta_times_n;
        r.coefficient = 1.0;
        if (star > 0) {
            std::string coef = text.substr(0, star);
            require(!coef.empty() && coef.back() == '*', ErrorCode::invalid_argument,
                    "Delta rule must look like '<coef>*delta*N', got '" + text + "'");
            coef.pop_back();
            r.coefficient = parse_rational(coef).to_double();
            require(r.coefficient > 0, ErrorCode::invalid_argument,
                    "Delta coefficient must be positive");
        }
        require(text.substr(star) == "delta*N", ErrorCode::invalid_argument,
                "Delta rule must end with 'delta*N', got '" + text + "'");
        return r;
    }
    return from_exponent(parse_rational(text));
}

double DeltaRule::resolve(i64 N, double delta) const {
    switch (kind) {
    case Kind::exponent: return std::pow(double(N), exponent.to_double());
    case Kind::delta_times_n: return coefficient * delta * double(N);
    case Kind::unset: break;
    }
    fail(ErrorCode::internal, "unresolved Delta rule");
}

std::string DeltaRule::str() const {
    switch (kind) {
    case Kind::exponent: return "N^" + exponent.str();
    case Kind::delta_times_n:
        return coefficient == 1.0 ? "delta*N" : std::to_string(coefficient) + "*delta*N";
    case Kind::unset: break;
    }
    return "unset";
}

namespace {

const std::vector<std::string> kPresetNames = {"n8",  "n10", "n12",        "i6",
                                               "i8",  "i10", "bilinear-n3"};

bool is_first_spacing(const std::string& name) {
    return name == "n8" || name == "n10" || name == "n12";
}

bool is_rs_family(const std::string& name) {
    return name == "i6" || name == "i8" || name == "i10";
}

int preset_order(const std::string& name) {
    if (name == "n8" || name == "i8") return 8;
    if (name == "n10" || name == "i10") return 10;
    if (name == "n12") return 12;
    if (name == "i6") return 6;
    if (name == "bilinear-n3") return 8;  // 2+2 slots per side
    fail(ErrorCode::precondition, "unknown preset '" + name + "'");
}

} // namespace

std::vector<std::string> preset_names() { return kPresetNames; }

bool is_preset(const std::string& name) {
    return std::find(kPresetNames.begin(), kPresetNames.end(), name) != kPresetNames.end();
}

PresetConfig PresetConfig::make(const std::string& name) {
    require(is_preset(name), ErrorCode::precondition, "unknown preset '" + name + "'");
    PresetConfig cfg;
    cfg.preset = name;
    cfg.delta_exp = Rational(-2);
    if (is_first_spacing(name)) cfg.Delta = DeltaRule::parse("delta*N");
    if (name == "i6") cfg.lambda_exp = Rational(-3);
    if (name == "i8") cfg.lambda_exp = Rational(-7, 3);
    if (name == "i10") cfg.lambda_exp = Rational(-5, 3);
    return cfg;
}

std::string preset_description(const std::string& name) {
    if (name == "n8")
        return "first spacing problem, 8th moment N_8(delta): linear and square phases "
               "plus a delta-windowed 3/2-power form";
    if (name == "n10")
        return "first spacing problem, 10th moment N_10(delta, Delta) with 3/2- and "
               "1/2-power windows";
    if (name == "n12")
        return "12th-moment variant of the first spacing system N_12(delta, Delta)";
    if (name == "i6") return "Robert-Sargos family, 6th moment I_6(lambda): exact squares "
                             "plus a lambda-windowed quartic form";
    if (name == "i8") return "Robert-Sargos family, 8th moment I_8(lambda)";
    if (name == "i10") return "Robert-Sargos family, 10th moment I_10(lambda)";
    if (name == "bilinear-n3")
        return "bilinear mean value for two separated dyadic blocks with a 3/2-power phase "
               "(4th power of the product norm)";
    fail(ErrorCode::precondition, "unknown preset '" + name + "'");
}

std::map<std::string, double> resolved_params(const PresetConfig& cfg, i64 N) {
    std::map<std::string, double> out;
    if (is_first_spacing(cfg.preset)) {
        const double delta = std::pow(double(N), cfg.delta_exp.to_double());
        out["delta"] = delta;
        out["Delta"] = cfg.Delta.resolve(N, delta);
    } else if (is_rs_family(cfg.preset)) {
        out["lambda"] = std::pow(double(N), cfg.lambda_exp.to_double());
    }
    return out;
}

WindowSystem make_n10_system(i64 N, double delta, double Delta, double window_constant) {
    return make_n10_system_on_interval(N, delta, Delta, Interval::dyadic(N), window_constant);
}

WindowSystem make_n10_system_on_interval(i64 N, double delta, double Delta, const Interval& iv,
                                         double window_constant) {
    require(delta > 0 && Delta > 0, ErrorCode::invalid_argument,
            "delta and Delta must be positive");
    WindowSystem sys;
    sys.N = N;
    sys.groups.push_back({iv, 5, Side::left});
    sys.groups.push_back({iv, 5, Side::right});
    sys.exact_forms = {1, 2};
    sys.windowed_forms.push_back({Rational(3, 2), window_constant * delta, true});
    sys.windowed_forms.push_back({Rational(1, 2), window_constant * Delta, true});
    sys.validate();
    return sys;
}

WindowSystem build_preset_system(const PresetConfig& cfg, i64 N) {
    require(N >= 8, ErrorCode::invalid_argument, "preset systems want N >= 8");
    const std::string& name = cfg.preset;
    if (name == "bilinear-n3") {
        WindowSystem sys;
        sys.N = N;
        const Interval u1(N / 2 + 1, 5 * N / 8);
        const Interval u2(7 * N / 8 + 1, N);
        for (Side side : {Side::left, Side::right}) {
            sys.groups.push_back({u1, 2, side});
            sys.groups.push_back({u2, 2, side});
        }
        sys.exact_forms = {1, 2};
        // O(1) window on the N (k/N)^{3/2} phase = N^{-1} on the normalized sums
        sys.windowed_forms.push_back(
            {Rational(3, 2), cfg.window_constant / double(N), true});
        sys.validate();
        return sys;
    }
    if (is_rs_family(name)) {
        const double lambda = std::pow(double(N), cfg.lambda_exp.to_double());
        WindowSystem sys;
        sys.N = N;
        const int s = preset_order(name) / 2;
        sys.groups.push_back({Interval::dyadic(N), s, Side::left});
        sys.groups.push_back({Interval::dyadic(N), s, Side::right});
        sys.exact_forms = {2};
        sys.windowed_forms.push_back({Rational(4), cfg.window_constant / lambda, false});
        sys.validate();
        return sys;
    }
    const double delta = std::pow(double(N), cfg.delta_exp.to_double());
    if (name == "n8") {
        WindowSystem sys;
        sys.N = N;
        sys.groups.push_back({Interval::dyadic(N), 4, Side::left});
        sys.groups.push_back({Interval::dyadic(N), 4, Side::right});
        sys.exact_forms = {1, 2};
        sys.windowed_forms.push_back({Rational(3, 2), cfg.window_constant * delta, true});
        sys.validate();
        return sys;
    }
    if (name == "n10" || name == "n12") {
        const double Delta = cfg.Delta.resolve(N, delta);
        WindowSystem sys = make_n10_system(N, delta, Delta, cfg.window_constant);
        if (name == "n12") {
            for (auto& g : sys.groups) g.multiplicity = 6;
        }
        return sys;
    }
    fail(ErrorCode::precondition, "unknown preset '" + name + "'");
}

MomentSpec build_preset_spec(const PresetConfig& cfg, i64 N) {
    require(N >= 8, ErrorCode::invalid_argument, "preset specs want N >= 8");
    const std::string& name = cfg.preset;
    require(name != "bilinear-n3", ErrorCode::precondition,
            "the bilinear preset is a counting system, not a single moment spec");
    std::vector<PhaseTerm> terms;
    if (is_first_spacing(name)) {
        terms.push_back({Rational(1), Rational(0), false});
        terms.push_back({Rational(2), Rational(0), false});
        terms.push_back({Rational(3, 2), -cfg.delta_exp, false});
        terms.back().normalized = true;
        if (name != "n8") {
            require(cfg.Delta.kind == DeltaRule::Kind::exponent ||
                        (cfg.Delta.kind == DeltaRule::Kind::delta_times_n &&
                         cfg.Delta.coefficient == 1.0),
                    ErrorCode::precondition,
                    "Delta rule " + cfg.Delta.str() + " is not a pure power of N; the "
                    "moment-spec form needs one");
            const Rational delta_amp =
                cfg.Delta.kind == DeltaRule::Kind::exponent
                    ? -cfg.Delta.exponent
                    : -(cfg.delta_exp + Rational(1));  // 1/Delta = N^{-1-delta_exp}
            terms.push_back({Rational(1, 2), delta_amp, true});
        }
    } else {
        terms.push_back({Rational(2), Rational(0), false});
        terms.push_back({Rational(4), cfg.lambda_exp, false});
    }
    MomentSpec spec(N, preset_order(name), std::move(terms));
    spec.validate();
    return spec;
}

std::optional<Rational> claimed_exponent(const PresetConfig& cfg) {
    const std::string& name = cfg.preset;
    if (name == "bilinear-n3") return Rational(4);
    if (name == "n8") {
        // delta N^5 + N^4 envelope
        const Rational first = Rational(5) + cfg.delta_exp;
        return first < Rational(4) ? Rational(4) : first;
    }
    if (name == "n10") {
        if (cfg.Delta.kind != DeltaRule::Kind::delta_times_n || cfg.Delta.coefficient != 1.0)
            return std::nullopt;
        // N^5 below the -33/18 threshold, delta N^7 above it
        if (cfg.delta_exp <= Rational(-33, 18)) return Rational(5);
        return Rational(7) + cfg.delta_exp;
    }
    if (name == "i6" && cfg.lambda_exp == Rational(-3)) return Rational(3);
    if (name == "i8") {
        if (cfg.lambda_exp == Rational(-5, 2)) return Rational(9, 2);
        if (cfg.lambda_exp == Rational(-7, 3)) return Rational(13, 3);
    }
    if (name == "i10") {
        if (cfg.lambda_exp == Rational(-17, 8)) return Rational(49, 8);
        if (cfg.lambda_exp == Rational(-5, 3)) return Rational(17, 3);
    }
    return std::nullopt;
}

} // namespace mvt
