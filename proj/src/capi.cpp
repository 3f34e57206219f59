#include "mvt.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "json.hpp"

#include "mvt/report.hpp"
#include "mvt/sums.hpp"

using nlohmann::json;

struct mvt_spec {
    mvt::MomentSpec value;
};
struct mvt_system {
    mvt::WindowSystem value;
};
struct mvt_result {
    mvt::CountResult value;
};

namespace {

thread_local std::string g_last_error;

mvt_status status_of(mvt::ErrorCode code) {
    switch (code) {
    case mvt::ErrorCode::invalid_argument: return MVT_ERROR_INVALID_ARGUMENT;
    case mvt::ErrorCode::precondition: return MVT_ERROR_PRECONDITION;
    case mvt::ErrorCode::capacity: return MVT_ERROR_CAPACITY;
    case mvt::ErrorCode::precision: return MVT_ERROR_PRECISION;
    case mvt::ErrorCode::io: return MVT_ERROR_IO;
    case mvt::ErrorCode::internal: return MVT_ERROR_INTERNAL;
    }
    return MVT_ERROR_INTERNAL;
}

template <typename Fn>
mvt_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return MVT_OK;
    } catch (const mvt::Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const json::exception& e) {
        g_last_error = e.what();
        return MVT_ERROR_INVALID_ARGUMENT;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return MVT_ERROR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = new (std::nothrow) char[s.size() + 1];
    if (!out) return nullptr;
    std::memcpy(out, s.data(), s.size() + 1);
    return out;
}

json parse_optional_json(const char* text, const char* what) {
    if (text == nullptr || *text == '\0') return json::object();
    const json j = json::parse(text, nullptr, false);
    mvt::require(!j.is_discarded(), mvt::ErrorCode::invalid_argument,
                 std::string(what) + " is not valid JSON");
    mvt::require(j.is_object(), mvt::ErrorCode::invalid_argument,
                 std::string(what) + " must be a JSON object");
    return j;
}

mvt::CountOptions options_from(const char* options_json) {
    return mvt::count_options_from_json(parse_optional_json(options_json, "options_json"));
}

} // namespace

extern "C" {

const char* mvt_version(void) { return "1.0.0"; }

const char* mvt_status_name(mvt_status status) {
    switch (status) {
    case MVT_OK: return "ok";
    case MVT_ERROR_INVALID_ARGUMENT: return "invalid_argument";
    case MVT_ERROR_PRECONDITION: return "precondition";
    case MVT_ERROR_CAPACITY: return "capacity";
    case MVT_ERROR_PRECISION: return "precision";
    case MVT_ERROR_IO: return "io";
    case MVT_ERROR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* mvt_last_error(void) { return g_last_error.c_str(); }

void mvt_string_free(char* s) { delete[] s; }

mvt_status mvt_spec_from_text(const char* text, mvt_spec** out) {
    return guarded([&]() {
        mvt::require(text != nullptr && out != nullptr, mvt::ErrorCode::invalid_argument,
                     "null argument");
        auto spec = std::make_unique<mvt_spec>();
        spec->value = mvt::parse_spec_text(text);
        *out = spec.release();
    });
}

mvt_status mvt_spec_from_preset(const char* preset, long long N,
                                const char* overrides_json, mvt_spec** out) {
    return guarded([&]() {
        mvt::require(preset != nullptr && out != nullptr, mvt::ErrorCode::invalid_argument,
                     "null argument");
        mvt::PresetConfig cfg = mvt::PresetConfig::make(preset);
        mvt::apply_preset_overrides(cfg, parse_optional_json(overrides_json, "overrides_json"));
        auto spec = std::make_unique<mvt_spec>();
        spec->value = mvt::build_preset_spec(cfg, N);
        *out = spec.release();
    });
}

void mvt_spec_free(mvt_spec* spec) { delete spec; }

int mvt_spec_moment_order(const mvt_spec* spec) { return spec ? spec->value.p : 0; }

long long mvt_spec_range_size(const mvt_spec* spec) {
    return spec ? spec->value.range.size() : 0;
}

mvt_status mvt_spec_to_system(const mvt_spec* spec, double window_constant,
                              mvt_system** out) {
    return guarded([&]() {
        mvt::require(spec != nullptr && out != nullptr, mvt::ErrorCode::invalid_argument,
                     "null argument");
        auto sys = std::make_unique<mvt_system>();
        sys->value = mvt::spec_to_system(spec->value, window_constant);
        *out = sys.release();
    });
}

mvt_status mvt_system_from_preset(const char* preset, long long N,
                                  const char* overrides_json, mvt_system** out) {
    return guarded([&]() {
        mvt::require(preset != nullptr && out != nullptr, mvt::ErrorCode::invalid_argument,
                     "null argument");
        mvt::PresetConfig cfg = mvt::PresetConfig::make(preset);
        mvt::apply_preset_overrides(cfg, parse_optional_json(overrides_json, "overrides_json"));
        auto sys = std::make_unique<mvt_system>();
        sys->value = mvt::build_preset_system(cfg, N);
        *out = sys.release();
    });
}

void mvt_system_free(mvt_system* system) { delete system; }

int mvt_system_slots_per_side(const mvt_system* system) {
    return system ? system->value.slots(mvt::Side::left) : 0;
}

int mvt_system_exact_form_count(const mvt_system* system) {
    return system ? int(system->value.exact_forms.size()) : 0;
}

int mvt_system_window_form_count(const mvt_system* system) {
    return system ? int(system->value.windowed_forms.size()) : 0;
}

mvt_status mvt_system_describe(const mvt_system* system, char** json_out) {
    return guarded([&]() {
        mvt::require(system != nullptr && json_out != nullptr,
                     mvt::ErrorCode::invalid_argument, "null argument");
        *json_out = dup_string(system->value.to_json().dump(2));
        mvt::require(*json_out != nullptr, mvt::ErrorCode::internal, "allocation failed");
    });
}

mvt_status mvt_count(const mvt_system* system, const char* options_json, mvt_result** out) {
    return guarded([&]() {
        mvt::require(system != nullptr && out != nullptr, mvt::ErrorCode::invalid_argument,
                     "null argument");
        auto res = std::make_unique<mvt_result>();
        res->value = mvt::count_auto(system->value, options_from(options_json));
        *out = res.release();
    });
}

mvt_status mvt_count_brute(const mvt_system* system, const char* options_json,
                           mvt_result** out) {
    return guarded([&]() {
        mvt::require(system != nullptr && out != nullptr, mvt::ErrorCode::invalid_argument,
                     "null argument");
        auto res = std::make_unique<mvt_result>();
        res->value = mvt::brute_oracle(system->value, options_from(options_json));
        *out = res.release();
    });
}

void mvt_result_free(mvt_result* result) { delete result; }

mvt_status mvt_result_count_decimal(const mvt_result* result, char* buf, size_t buflen) {
    return guarded([&]() {
        mvt::require(result != nullptr && buf != nullptr, mvt::ErrorCode::invalid_argument,
                     "null argument");
        const std::string s = mvt::to_string_u128(result->value.count);
        mvt::require(buflen > s.size(), mvt::ErrorCode::capacity,
                     "buffer too small for the decimal count");
        std::memcpy(buf, s.data(), s.size() + 1);
    });
}

const char* mvt_result_engine(const mvt_result* result) {
    return result ? mvt::engine_name(result->value.engine) : "unknown";
}

unsigned long long mvt_result_enumerated(const mvt_result* result) {
    return result ? result->value.enumerated_multisets : 0;
}

double mvt_result_wall_seconds(const mvt_result* result) {
    return result ? result->value.wall_time : 0.0;
}

int mvt_result_cache_hit(const mvt_result* result) {
    return result && result->value.cache_hit ? 1 : 0;
}

mvt_status mvt_run_json(const char* request_json, char** report_json_out) {
    return guarded([&]() {
        mvt::require(request_json != nullptr && report_json_out != nullptr,
                     mvt::ErrorCode::invalid_argument, "null argument");
        const json request = json::parse(request_json, nullptr, false);
        mvt::require(!request.is_discarded(), mvt::ErrorCode::invalid_argument,
                     "request is not valid JSON");
        const json report = mvt::run_request(request);
        *report_json_out = dup_string(report.dump(2));
        mvt::require(*report_json_out != nullptr, mvt::ErrorCode::internal,
                     "allocation failed");
    });
}

} // extern "C"
