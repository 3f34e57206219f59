#include "mvt/systems.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace mvt {

void MomentSpec::validate() const {
    require(N >= 4, ErrorCode::invalid_argument, "spec requires N >= 4");
    require(p >= 2 && p % 2 == 0, ErrorCode::precondition,
            "moment order p must be a positive even integer, got " + std::to_string(p));
    require(!terms.empty(), ErrorCode::invalid_argument, "spec needs at least one term");
    std::set<std::pair<i64, i64>> powers;
    for (const auto& t : terms) {
        t.validate();
        const bool fresh = powers.insert({t.power.num, t.power.den}).second;
        require(fresh, ErrorCode::precondition,
                "duplicate phase power " + t.power.str());
    }
    require(range.hi <= N, ErrorCode::invalid_argument, "range exceeds N");
}

int WindowSystem::slots(Side side) const {
    int s = 0;
    for (const auto& g : groups)
        if (g.side == side) s += g.multiplicity;
    return s;
}

std::vector<SlotGroup> WindowSystem::side_groups(Side side) const {
    std::vector<SlotGroup> out;
    for (const auto& g : groups)
        if (g.side == side) out.push_back(g);
    return out;
}

void WindowSystem::validate() const {
    require(N >= 2, ErrorCode::invalid_argument, "system requires N >= 2");
    require(!groups.empty(), ErrorCode::invalid_argument, "system has no slot groups");
    for (const auto& g : groups)
        require(g.multiplicity >= 1, ErrorCode::invalid_argument,
                "slot multiplicity must be >= 1");
    const int s_left = slots(Side::left);
    const int s_right = slots(Side::right);
    require(s_left >= 1, ErrorCode::invalid_argument, "system needs slots on each side");
    require(s_left == s_right, ErrorCode::invalid_argument,
            "left/right slot counts differ: " + std::to_string(s_left) + " vs " +
                std::to_string(s_right));
    for (Side side : {Side::left, Side::right}) {
        const auto gs = side_groups(side);
        for (size_t i = 0; i < gs.size(); ++i)
            for (size_t j = i + 1; j < gs.size(); ++j)
                require(!gs[i].interval.overlaps(gs[j].interval), ErrorCode::precondition,
                        std::string("overlapping intervals on the ") + side_name(side) +
                            " side: " + gs[i].interval.str() + " and " + gs[j].interval.str());
    }
    std::set<i64> exact_seen;
    for (i64 gamma : exact_forms) {
        require(gamma >= 0, ErrorCode::invalid_argument, "negative exact form power");
        require(exact_seen.insert(gamma).second, ErrorCode::precondition,
                "duplicate exact form power " + std::to_string(gamma));
    }
    for (const auto& w : windowed_forms) {
        require(w.tolerance >= 0, ErrorCode::invalid_argument, "negative window tolerance");
        require(!w.power.is_integer() || w.tolerance > 0 || w.normalized,
                ErrorCode::invalid_argument,
                "integer-power window with zero tolerance should be an exact form");
    }
    require(scale_bits >= 8 && scale_bits <= 96, ErrorCode::invalid_argument,
            "scale_bits out of range");
}

nlohmann::json WindowSystem::to_json() const {
    nlohmann::json j;
    j["N"] = N;
    j["scale_bits"] = scale_bits;
    j["slots_per_side"] = slots(Side::left);
    nlohmann::json groups_json = nlohmann::json::array();
    for (const auto& g : groups) {
        groups_json.push_back({{"lo", g.interval.lo},
                               {"hi", g.interval.hi},
                               {"multiplicity", g.multiplicity},
                               {"side", side_name(g.side)}});
    }
    j["groups"] = groups_json;
    j["exact_forms"] = exact_forms;
    nlohmann::json windows = nlohmann::json::array();
    for (const auto& w : windowed_forms) {
        windows.push_back({{"power", w.power.str()},
                           {"tolerance", w.tolerance},
                           {"normalized", w.normalized}});
    }
    j["windowed_forms"] = windows;
    return j;
}

i64 exact_form_value(i64 power, i64 n) {
    i64 v = 1;
    for (i64 i = 0; i < power; ++i) {
        require(v <= (i64(1) << 62) / (n > 0 ? n : 1), ErrorCode::capacity,
                "exact form value overflows 64 bits");
        v *= n;
    }
    return v;
}

FixedPoint windowed_form_value(const WindowedForm& form, i64 n, i64 N, int scale_bits) {
    if (!form.normalized && form.power.is_integer()) {
        // integer samples are converted without any floating-point round trip
        return FixedPoint::from_integer(exact_form_value(form.power.num, n), scale_bits);
    }
    const long double base = form.normalized
                                 ? (long double)(n) / (long double)(N)
                                 : (long double)(n);
    const long double v = std::pow(base, (long double)form.power.to_double());
    return FixedPoint::from_double(v, scale_bits);
}

WindowSystem spec_to_system(const MomentSpec& spec, double window_constant) {
    spec.validate();
    require(window_constant > 0, ErrorCode::invalid_argument,
            "window constant must be positive");
    WindowSystem sys;
    sys.N = spec.N;
    const int s = spec.p / 2;
    sys.groups.push_back({spec.range, s, Side::left});
    sys.groups.push_back({spec.range, s, Side::right});
    for (const auto& term : spec.terms) {
        if (term.exact()) {
            sys.exact_forms.push_back(term.power.num);
        } else {
            WindowedForm w;
            w.power = term.power;
            w.normalized = term.normalized;
            // coefficient N^e against an O(1) dual window means the g-sums
            // must agree within N^{-e}
            w.tolerance =
                window_constant * std::pow(double(spec.N), -term.amplitude_exponent.to_double());
            sys.windowed_forms.push_back(w);
        }
    }
    sys.validate();
    return sys;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char delim) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, delim)) out.push_back(trim(item));
    return out;
}

} // namespace

MomentSpec parse_spec_text(const std::string& text) {
    MomentSpec spec;
    bool have_N = false, have_p = false, have_range = false;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        require(eq != std::string::npos, ErrorCode::invalid_argument,
                "spec line " + std::to_string(lineno) + " is not key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "N") {
            spec.N = std::stoll(value);
            have_N = true;
        } else if (key == "p") {
            spec.p = std::stoi(value);
            have_p = true;
        } else if (key == "range") {
            const auto parts = split(value, ',');
            require(parts.size() == 2, ErrorCode::invalid_argument,
                    "range wants 'lo, hi'");
            spec.range = Interval(std::stoll(parts[0]), std::stoll(parts[1]));
            have_range = true;
        } else if (key == "term") {
            const auto parts = split(value, ',');
            require(parts.size() == 3, ErrorCode::invalid_argument,
                    "term wants 'power, amplitude_exponent, normalized|unnormalized'");
            PhaseTerm t;
            t.power = parse_rational(parts[0]);
            t.amplitude_exponent = parse_rational(parts[1]);
            if (parts[2] == "normalized") t.normalized = true;
            else if (parts[2] == "unnormalized") t.normalized = false;
            else fail(ErrorCode::invalid_argument,
                      "term flag must be normalized or unnormalized, got " + parts[2]);
            spec.terms.push_back(t);
        } else {
            fail(ErrorCode::invalid_argument, "unknown spec key '" + key + "'");
        }
    }
    require(have_N, ErrorCode::invalid_argument, "spec file missing N");
    require(have_p, ErrorCode::invalid_argument, "spec file missing p");
    if (!have_range) spec.range = Interval::dyadic(spec.N);
    spec.validate();
    return spec;
}

std::string spec_to_text(const MomentSpec& spec) {
    std::ostringstream out;
    out << "N = " << spec.N << "\n";
    out << "p = " << spec.p << "\n";
    out << "range = " << spec.range.lo << ", " << spec.range.hi << "\n";
    for (const auto& t : spec.terms) {
        out << "term = " << t.power.str() << ", " << t.amplitude_exponent.str() << ", "
            << (t.normalized ? "normalized" : "unnormalized") << "\n";
    }
    return out.str();
}

nlohmann::json spec_to_json(const MomentSpec& spec) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : spec.terms) {
        terms.push_back({{"power", t.power.str()},
                         {"amplitude_exponent", t.amplitude_exponent.str()},
                         {"normalized", t.normalized}});
    }
    return {{"N", spec.N},
            {"p", spec.p},
            {"range", {{"lo", spec.range.lo}, {"hi", spec.range.hi}}},
            {"terms", terms}};
}

} // namespace mvt
