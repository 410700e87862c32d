#include "cylperc/cylperc.h"

#include <cstring>
#include <string>

#include "lineproc.hpp"
#include "runners.hpp"

struct cp_sample {
    cylperc::ProcessSample s;
};

namespace {

thread_local std::string last_error;

char* dup(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (p) std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

template <class F>
cp_status guard(F&& f) {
    last_error.clear();
    try {
        f();
        return CP_OK;
    } catch (const cylperc::Error& e) {
        last_error = e.what();
        return static_cast<cp_status>(e.code());
    } catch (const nlohmann::json::exception& e) {
        last_error = std::string("config: ") + e.what();
        return CP_INVALID_ARGUMENT;
    } catch (const std::exception& e) {
        last_error = e.what();
        return CP_INTERNAL;
    }
}

cylperc::Vec vec(int d, const double* x) {
    cylperc::Vec v(d);
    for (int i = 0; i < d; ++i) v[i] = x[i];
    return v;
}

} // namespace

extern "C" {

const char* cp_version(void) { return cylperc::git_describe(); }

const char* cp_status_name(cp_status s) {
    if (s == CP_OK) return "ok";
    if (s < CP_INVALID_ARGUMENT || s > CP_INTERNAL) return "unknown";
    return cylperc::error_name(static_cast<cylperc::ErrorCode>(s));
}

const char* cp_last_error(void) { return last_error.c_str(); }

cp_status cp_sample_ball(int d, double u_max, const double* center, double R, uint64_t seed, cp_sample** out) {
    return guard([&] {
        cylperc::require(out && center, "null argument");
        cylperc::require(d >= 1 && d <= cylperc::kMaxDim, "dimension out of range");
        *out = new cp_sample{cylperc::sample_hitting_ball(u_max, vec(d, center), R, seed)};
    });
}

cp_status cp_sample_from_csv(const char* text, cp_sample** out) {
    return guard([&] {
        cylperc::require(text && out, "null argument");
        *out = new cp_sample{cylperc::from_csv(text)};
    });
}

cp_status cp_sample_to_csv(const cp_sample* s, char** out) {
    return guard([&] {
        cylperc::require(s && out, "null argument");
        *out = dup(cylperc::to_csv(s->s));
    });
}

size_t cp_sample_size(const cp_sample* s) { return s ? s->s.lines.size() : 0; }

cp_status cp_sample_count_hitting_box(const cp_sample* s, double u, double rho, const double* center,
                                      double radius, int* out) {
    return guard([&] {
        cylperc::require(s && center && out, "null argument");
        auto view = cylperc::make_view(s->s, u, rho);
        *out = cylperc::count_hitting(view, cylperc::BoxInf{vec(s->s.d, center), radius});
    });
}

cp_status cp_sample_is_covered(const cp_sample* s, double u, double rho, const double* x, int* out) {
    return guard([&] {
        cylperc::require(s && x && out, "null argument");
        *out = cylperc::is_covered(cylperc::make_view(s->s, u, rho), vec(s->s.d, x)) ? 1 : 0;
    });
}

void cp_sample_free(cp_sample* s) { delete s; }

cp_status cp_default_config(char** out) {
    return guard([&] {
        cylperc::require(out, "null argument");
        *out = dup(cylperc::default_config().dump());
    });
}

cp_status cp_run(const char* command, const char* config_json, char** report) {
    return guard([&] {
        cylperc::require(command && report, "null argument");
        auto cfg = config_json && *config_json ? cylperc::json::parse(config_json) : cylperc::json::object();
        *report = dup(cylperc::run_command(command, cfg).dump(2) + "\n");
    });
}

void cp_string_free(char* s) { std::free(s); }

}
