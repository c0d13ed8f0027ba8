#include "cli.hpp"

#include "nmrcage/error.hpp"
#include "nmrcage/fid.hpp"
#include "nmrcage/model.hpp"
#include "nmrcage/spectrum.hpp"
#include "nmrcage/stochastic.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#ifndef NMRCAGE_VERSION
#define NMRCAGE_VERSION "0.0.0"
#endif

namespace nmrcage::cli {

namespace {

using Json = nlohmann::ordered_json;
using Fn = std::function<double(double)>;

enum class Kind { Real, RealOrInf, Count, Seed, Choice, Text, Flag };

struct ParamSpec {
    const char* name;
    Kind kind;
    const char* help;
    std::vector<std::string> choices = {};
};

const std::vector<ParamSpec>& param_specs()
{
    static const std::vector<ParamSpec> specs = {
        {"scenario", Kind::Choice, "physical scenario", {"static", "gaussian", "vibration", "vibration-ensemble"}},
        {"units", Kind::Choice, "frequency unit of inputs and outputs: hz (default) or angular (rad/s)",
         {"hz", "angular"}},
        {"format", Kind::Choice, "output format (default csv)", {"csv", "json"}},
        {"out", Kind::Text, "output file, - for stdout (default)"},
        {"n-spins", Kind::Count, "number of spins N (default 500)"},
        {"mean-d", Kind::Real, "mean coupling <D> (frequency)"},
        {"nu", Kind::Real, "FID rate 3 |<D>| sqrt(N/2) (frequency); alternative to --mean-d"},
        {"gamma2hbar", Kind::Real, "coupling scale gamma^2 hbar (frequency x nm^3); needs form-factor, volume, theta"},
        {"form-factor", Kind::Real, "container form factor f"},
        {"volume", Kind::Real, "container volume (nm^3)"},
        {"theta", Kind::Real, "container orientation to the field (rad)"},
        {"variance", Kind::Real, "variance of the coupling noise (frequency^2)"},
        {"alpha", Kind::Real, "relative variance, variance / <D>^2"},
        {"tau-c", Kind::RealOrInf, "noise correlation time (s); inf for frozen disorder"},
        {"tauc-nu", Kind::RealOrInf, "correlation time in units of 1/nu"},
        {"epsilon", Kind::Real, "relative vibration amplitude"},
        {"omega", Kind::Real, "vibration frequency (frequency)"},
        {"omega0", Kind::Real, "mean of the vibration-frequency density (frequency)"},
        {"delta", Kind::Real, "width of the vibration-frequency density (frequency)"},
        {"fid-form", Kind::Choice,
         "FID variant: exact or large-n (static, mc), exact or regime (gaussian)", {"exact", "large-n", "regime"}},
        {"method", Kind::Choice, "spectrum method (default closed)", {"closed", "transform"}},
        {"closed-form", Kind::Choice, "gaussian-scenario closed form (default auto)",
         {"auto", "erfc", "k0", "lorentzian"}},
        {"dt", Kind::Real, "time step (s)"},
        {"t-max", Kind::Real, "last time (s); for spectra, a cap on the transform horizon"},
        {"omega-min", Kind::Real, "first spectrum frequency (frequency)"},
        {"omega-max", Kind::Real, "last spectrum frequency (frequency)"},
        {"n-omega", Kind::Count, "number of spectrum frequencies (default 401)"},
        {"decay-tol", Kind::Real, "transform horizon: |F| below this is treated as zero (default 1e-10)"},
        {"tol", Kind::Real, "relative tolerance for --compare (default 1e-5)"},
        {"trajectories", Kind::Count, "Monte Carlo trajectories (default 1000)"},
        {"seed", Kind::Seed, "Monte Carlo seed (default 0)"},
        {"threads", Kind::Count, "worker threads, 0 = all cores (default 1); never changes results"},
        {"abs", Kind::Flag, "write |I| instead of I"},
        {"compare", Kind::Flag, "compute closed form and transform; exit 3 if they disagree beyond --tol"},
    };
    return specs;
}

// Keys left out of the metadata echo: they do not influence the numbers.
bool echoed(const std::string& key)
{
    return key != "out" && key != "threads" && key != "format";
}

const ParamSpec* find_spec(const std::string& name)
{
    for (const auto& spec : param_specs()) {
        if (name == spec.name) {
            return &spec;
        }
    }
    return nullptr;
}

[[noreturn]] void fail(const std::string& message)
{
    throw ConfigError(message);
}

double parse_double(const std::string& key, const std::string& text)
{
    double value = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (!text.empty() && *first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        fail("--" + key + ": not a number: '" + text + "'");
    }
    return value;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text)
{
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        fail("--" + key + ": not a non-negative integer: '" + text + "'");
    }
    return value;
}

// Canonical JSON value for a command-line string.
Json from_text(const ParamSpec& spec, const std::string& text)
{
    switch (spec.kind) {
    case Kind::Real: {
        const double v = parse_double(spec.name, text);
        if (!std::isfinite(v)) {
            fail(std::string("--") + spec.name + " must be finite");
        }
        return v;
    }
    case Kind::RealOrInf: {
        const double v = parse_double(spec.name, text);
        if (std::isnan(v)) {
            fail(std::string("--") + spec.name + " must not be NaN");
        }
        if (std::isinf(v)) {
            if (v < 0) {
                fail(std::string("--") + spec.name + " must not be -inf");
            }
            return "inf";
        }
        return v;
    }
    case Kind::Count:
    case Kind::Seed:
        return parse_unsigned(spec.name, text);
    case Kind::Choice:
        if (std::find(spec.choices.begin(), spec.choices.end(), text) == spec.choices.end()) {
            fail(std::string("--") + spec.name + ": unknown choice '" + text + "'");
        }
        return text;
    case Kind::Text:
        return text;
    case Kind::Flag:
        return true;
    }
    return nullptr;
}

// Canonical JSON value for a config-file entry.
Json from_config(const ParamSpec& spec, const Json& value)
{
    const std::string where = std::string("config '") + spec.name + "'";
    switch (spec.kind) {
    case Kind::Real:
        if (!value.is_number()) {
            fail(where + " must be a number");
        }
        return value.get<double>();
    case Kind::RealOrInf:
        if (value.is_string()) {
            return from_text(spec, value.get<std::string>());
        }
        if (!value.is_number()) {
            fail(where + " must be a number or \"inf\"");
        }
        return value.get<double>();
    case Kind::Count:
    case Kind::Seed:
        if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<std::int64_t>() >= 0)) {
            fail(where + " must be a non-negative integer");
        }
        return value.get<std::uint64_t>();
    case Kind::Choice:
    case Kind::Text:
        if (!value.is_string()) {
            fail(where + " must be a string");
        }
        return from_text(spec, value.get<std::string>());
    case Kind::Flag:
        if (!value.is_boolean()) {
            fail(where + " must be true or false");
        }
        return value;
    }
    return nullptr;
}

// Typed access to the merged parameter object ---------------------------------

class Params {
public:
    explicit Params(Json j) : j_(std::move(j)) {}

    bool has(const char* key) const { return j_.contains(key); }
    Json& json() { return j_; }
    const Json& json() const { return j_; }

    double real(const char* key) const
    {
        const auto& v = j_.at(key);
        if (v.is_string()) {
            return kInfinity;  // only "inf" survives normalization
        }
        return v.get<double>();
    }
    std::optional<double> maybe_real(const char* key) const
    {
        return has(key) ? std::optional<double>(real(key)) : std::nullopt;
    }
    std::uint64_t count(const char* key) const { return j_.at(key).get<std::uint64_t>(); }
    std::string text(const char* key) const { return j_.at(key).get<std::string>(); }
    bool flag(const char* key) const { return has(key) && j_.at(key).get<bool>(); }

    void set_default(const char* key, Json value)
    {
        if (!has(key)) {
            j_[key] = std::move(value);
        }
    }

private:
    Json j_;
};

void require_one_of(const Params& p, std::initializer_list<const char*> keys, const char* what, bool required)
{
    int present = 0;
    std::string names;
    for (const char* k : keys) {
        present += p.has(k) ? 1 : 0;
        names += names.empty() ? "" : " | ";
        names += std::string("--") + k;
    }
    if (present > 1) {
        fail(std::string(what) + ": give only one of " + names);
    }
    if (required && present == 0) {
        fail(std::string(what) + ": one of " + names + " is required");
    }
}

// Physical setup in internal (angular) units.
struct Setup {
    Command command = Command::Fid;
    std::string scenario;
    bool hz = true;
    int n_spins = 500;
    double mean_d = 0.0;
    double nu = 0.0;
    double variance = 0.0;
    double tau_c = kInfinity;
    double epsilon = 0.0;
    double omega = 0.0;
    double omega0 = 0.0;
    double delta = 0.0;
    std::string fid_form;

    double to_internal(double f) const { return hz ? hz_to_angular(f) : f; }
    double to_user(double w) const { return hz ? angular_to_hz(w) : w; }
    double alpha() const { return variance / (mean_d * mean_d); }
    bool is_gaussian() const { return scenario == "gaussian"; }
    bool is_vibration() const { return scenario == "vibration"; }
    bool is_ensemble() const { return scenario == "vibration-ensemble"; }
    double fastest_vibration() const
    {
        return is_vibration() ? std::abs(omega) : is_ensemble() ? omega0 + 3.0 * delta : 0.0;
    }
};

void apply_defaults(Command command, Params& p)
{
    p.set_default("units", "hz");
    p.set_default("format", "csv");
    p.set_default("n-spins", 500u);
    if (command == Command::Mc) {
        p.set_default("scenario", "gaussian");
        if (!p.has("mean-d") && !p.has("nu") && !p.has("gamma2hbar")) {
            p.json()["nu"] = 1.0;
        }
        if (!p.has("variance") && !p.has("alpha")) {
            p.json()["alpha"] = 1.0;
        }
        if (!p.has("tau-c") && !p.has("tauc-nu")) {
            p.json()["tauc-nu"] = 1.0;
        }
        p.set_default("fid-form", "large-n");
        p.set_default("trajectories", 1000u);
        p.set_default("seed", 0u);
        p.set_default("threads", 1u);
    } else {
        p.set_default("fid-form", "exact");
    }
    if (command == Command::Spectrum) {
        p.set_default("method", "closed");
        p.set_default("closed-form", "auto");
        p.set_default("n-omega", 401u);
        p.set_default("decay-tol", 1e-10);
        p.set_default("tol", 1e-5);
        p.set_default("abs", false);
        p.set_default("compare", false);
    }
    if (!p.has("scenario")) {
        fail("--scenario is required");
    }
}

Setup make_setup(Command command, const Params& p)
{
    Setup s;
    s.command = command;
    s.scenario = p.text("scenario");
    s.hz = p.text("units") == "hz";
    s.fid_form = p.text("fid-form");

    const auto n = p.count("n-spins");
    if (n < 2 || n > 1'000'000'000u) {
        fail("--n-spins must lie in [2, 1e9]");
    }
    s.n_spins = static_cast<int>(n);
    const SpinEnsemble ens(s.n_spins);

    require_one_of(p, {"mean-d", "nu", "gamma2hbar"}, "coupling", true);
    if (p.has("mean-d")) {
        s.mean_d = s.to_internal(p.real("mean-d"));
    } else if (p.has("nu")) {
        const double rate = s.to_internal(p.real("nu"));
        if (rate < 0.0) {
            fail("--nu must be non-negative");
        }
        s.mean_d = rate / (3.0 * std::sqrt(0.5 * s.n_spins));
    } else {
        for (const char* key : {"form-factor", "volume", "theta"}) {
            if (!p.has(key)) {
                fail(std::string("geometry: --gamma2hbar needs --") + key);
            }
        }
        const ContainerGeometry geom(s.to_internal(p.real("gamma2hbar")), p.real("form-factor"), p.real("volume"),
                                     p.real("theta"));
        s.mean_d = coupling_from_geometry(geom);
    }
    s.nu = nu(s.mean_d, ens);

    if (s.is_gaussian()) {
        require_one_of(p, {"variance", "alpha"}, "gaussian noise", true);
        require_one_of(p, {"tau-c", "tauc-nu"}, "gaussian noise", true);
        if (p.has("variance")) {
            s.variance = s.hz ? kTwoPi * kTwoPi * p.real("variance") : p.real("variance");
        } else {
            s.variance = p.real("alpha") * s.mean_d * s.mean_d;
        }
        if (p.has("tau-c")) {
            s.tau_c = p.real("tau-c");
        } else {
            const double x = p.real("tauc-nu");
            if (std::isfinite(x) && s.nu == 0.0) {
                fail("--tauc-nu needs a non-zero coupling");
            }
            s.tau_c = std::isfinite(x) ? x / s.nu : kInfinity;
        }
        (void)GaussianFluctuationModel(s.mean_d, s.variance, s.tau_c);  // validates
    } else if (s.is_vibration()) {
        for (const char* key : {"epsilon", "omega"}) {
            if (!p.has(key)) {
                fail(std::string("vibration scenario requires --") + key);
            }
        }
        s.epsilon = p.real("epsilon");
        s.omega = s.to_internal(p.real("omega"));
        if (s.omega == 0.0) {
            fail("--omega must be non-zero");
        }
    } else if (s.is_ensemble()) {
        for (const char* key : {"epsilon", "omega0", "delta"}) {
            if (!p.has(key)) {
                fail(std::string("vibration-ensemble scenario requires --") + key);
            }
        }
        s.epsilon = p.real("epsilon");
        s.omega0 = s.to_internal(p.real("omega0"));
        s.delta = s.to_internal(p.real("delta"));
        (void)FrequencyDistribution(s.omega0, s.delta);
    }
    if (command == Command::Mc && !s.is_gaussian()) {
        fail("mc supports only --scenario gaussian");
    }
    if (s.is_vibration() || s.is_ensemble()) {
        if (s.nu == 0.0) {
            fail("vibration scenarios need a non-zero coupling");
        }
    }
    return s;
}

// FIDs ---------------------------------------------------------------------

enum class ClosedKind { GaussianLine, Erfc, K0, Lorentzian, Satellites, Inhomogeneous };

ClosedKind closed_kind(const Setup& s, const Params& p)
{
    if (s.scenario == "static") {
        return ClosedKind::GaussianLine;
    }
    if (s.is_vibration()) {
        return ClosedKind::Satellites;
    }
    if (s.is_ensemble()) {
        return ClosedKind::Inhomogeneous;
    }
    const std::string form = p.has("closed-form") ? p.text("closed-form") : "auto";
    if (form == "erfc") {
        return ClosedKind::Erfc;
    }
    if (form == "k0") {
        return ClosedKind::K0;
    }
    if (form == "lorentzian") {
        return ClosedKind::Lorentzian;
    }
    if (s.variance == 0.0) {
        return ClosedKind::GaussianLine;
    }
    // Fast fluctuations relative to the noise amplitude favour the erfc form.
    if (std::isfinite(s.tau_c) && s.tau_c * s.tau_c * s.variance < 1.0) {
        return ClosedKind::Erfc;
    }
    return ClosedKind::K0;
}

void need_alpha(const Setup& s)
{
    if (s.mean_d == 0.0) {
        fail("this closed form is parameterized by alpha and needs a non-zero coupling");
    }
}

// The FID whose cosine transform is exactly the selected closed form.
Fn generating_fid(const Setup& s, ClosedKind kind)
{
    switch (kind) {
    case ClosedKind::GaussianLine: {
        const double rate = s.nu;
        return [rate](double t) { return std::exp(-0.25 * rate * rate * t * t); };
    }
    case ClosedKind::Erfc: {
        need_alpha(s);
        const double a = s.alpha();
        const double tau = s.tau_c;
        const double rate = s.nu;
        if (!std::isfinite(tau)) {
            fail("the erfc form needs a finite --tau-c");
        }
        return [a, tau, rate](double t) { return fid_fast_fluct_regime(t, a, tau, rate); };
    }
    case ClosedKind::K0: {
        need_alpha(s);
        const double a = s.alpha();
        const double rate = s.nu;
        return [a, rate](double t) { return fid_static_disorder_regime(t, a, rate); };
    }
    case ClosedKind::Lorentzian: {
        need_alpha(s);
        const double a = s.alpha();
        const double tau = s.tau_c;
        if (!std::isfinite(tau)) {
            fail("the lorentzian form needs a finite --tau-c");
        }
        return [a, tau](double t) { return std::exp(-t / (4.0 * a * tau)); };
    }
    case ClosedKind::Satellites: {
        const double rate = s.nu, eps = s.epsilon, w = s.omega;
        return [rate, eps, w](double t) { return fid_vibration(t, rate, eps, w); };
    }
    case ClosedKind::Inhomogeneous: {
        const double rate = s.nu, eps = s.epsilon;
        const FrequencyDistribution dist(s.omega0, s.delta);
        return [rate, eps, dist](double t) { return fid_vibration_ensemble(t, rate, eps, dist); };
    }
    }
    fail("unreachable closed form");
}

Fn selected_fid(const Setup& s, const Params& p)
{
    const SpinEnsemble ens(s.n_spins);
    if (s.scenario == "static") {
        const double d = s.mean_d;
        if (s.fid_form == "exact") {
            return [d, ens](double t) { return fid_exact(0.5 * d * t, ens); };
        }
        if (s.fid_form == "large-n") {
            return [d, ens](double t) { return fid_large_n(0.5 * d * t, ens); };
        }
        fail("--fid-form regime applies to the gaussian scenario only");
    }
    if (s.is_gaussian()) {
        if (s.fid_form == "exact") {
            const GaussianFluctuationModel model(s.mean_d, s.variance, s.tau_c);
            return [ens, model](double t) { return fid_gaussian(t, ens, model); };
        }
        if (s.fid_form == "regime") {
            return generating_fid(s, closed_kind(s, p));
        }
        fail("--fid-form for the gaussian scenario is exact or regime");
    }
    if (s.fid_form != "exact") {
        fail("--fid-form for vibration scenarios is exact");
    }
    return generating_fid(s, s.is_vibration() ? ClosedKind::Satellites : ClosedKind::Inhomogeneous);
}

Fn closed_lineshape(const Setup& s, ClosedKind kind)
{
    switch (kind) {
    case ClosedKind::GaussianLine: {
        const double rate = s.nu;
        return [rate](double w) { return gaussian_line(w, rate); };
    }
    case ClosedKind::Erfc: {
        need_alpha(s);
        const double a = s.alpha(), tau = s.tau_c, rate = s.nu;
        return [a, tau, rate](double w) { return lineshape_fast_fluct(w, a, tau, rate); };
    }
    case ClosedKind::K0: {
        need_alpha(s);
        const double a = s.alpha(), rate = s.nu;
        return [a, rate](double w) { return lineshape_static_disorder(w, a, rate); };
    }
    case ClosedKind::Lorentzian: {
        need_alpha(s);
        const double a = s.alpha(), tau = s.tau_c;
        return [a, tau](double w) { return lorentzian_core(w, a, tau); };
    }
    case ClosedKind::Satellites: {
        const double eps = s.epsilon, w0 = s.omega, rate = s.nu;
        return [eps, w0, rate](double w) { return lineshape_satellites(w, eps, w0, rate); };
    }
    case ClosedKind::Inhomogeneous: {
        const double eps = s.epsilon, rate = s.nu;
        const FrequencyDistribution dist(s.omega0, s.delta);
        return [eps, rate, dist](double w) { return lineshape_inhomogeneous(w, eps, rate, dist); };
    }
    }
    fail("unreachable closed form");
}

// Grids ----------------------------------------------------------------------

constexpr double kFallbackDt = 0.01;
constexpr double kFallbackTMax = 1.0;

double default_dt(const Setup& s)
{
    const double dt = max_time_step(s.nu, s.fastest_vibration(), s.tau_c);
    return std::isfinite(dt) ? dt : kFallbackDt;
}

TimeGrid grid_from(const Params& p)
{
    const double dt = p.real("dt");
    const double t_max = p.real("t-max");
    if (!(dt > 0.0)) {
        fail("--dt must be positive");
    }
    if (t_max < 0.0) {
        fail("--t-max must be non-negative");
    }
    const double steps = std::floor(t_max / dt + 1e-9);
    if (steps > 1e8) {
        fail("--t-max / --dt exceeds 1e8 samples");
    }
    return {0.0, dt, static_cast<std::size_t>(steps) + 1};
}

// Fills dt and t-max for time-series output when absent.
void complete_time_grid(const Setup& s, const Fn& horizon_fid, Params& p)
{
    p.set_default("dt", default_dt(s));
    if (!p.has("t-max")) {
        const double dt = p.real("dt");
        double t_max = kFallbackTMax;
        if (s.nu > 0.0 || s.fastest_vibration() > 0.0 || std::isfinite(s.tau_c)) {
            HorizonOptions options;
            if (s.nu > 0.0) {
                options.t_cap = 50.0 / s.nu;
            }
            t_max = fid_horizon(horizon_fid, dt, options).t_end();
        }
        p.json()["t-max"] = t_max;
    }
}

double default_omega_max(const Setup& s, ClosedKind kind)
{
    switch (kind) {
    case ClosedKind::Satellites:
        return 2.0 * std::abs(s.omega) + 5.0 * s.nu;
    case ClosedKind::Inhomogeneous:
        return 2.0 * s.omega0 + 4.0 * s.delta + 5.0 * s.nu;
    case ClosedKind::Lorentzian:
        need_alpha(s);
        return 10.0 / (4.0 * s.alpha() * s.tau_c);
    default:
        break;
    }
    const double a = s.mean_d != 0.0 ? s.alpha() : 0.0;
    return 5.0 * s.nu * std::sqrt(1.0 + a);
}

// Output ---------------------------------------------------------------------

struct Table {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
};

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string scalar_text(const Json& v)
{
    return v.is_string() ? v.get<std::string>() : v.dump();
}

void write_csv(const Json& meta, const Table& table, std::ostream& os)
{
    for (const auto& [key, value] : meta.items()) {
        if (value.is_object()) {
            for (const auto& [sub, v] : value.items()) {
                os << "# " << key << '.' << sub << ": " << scalar_text(v) << '\n';
            }
        } else if (value.is_array()) {
            std::string joined;
            for (const auto& v : value) {
                joined += (joined.empty() ? "" : ",") + scalar_text(v);
            }
            os << "# " << key << ": " << joined << '\n';
        } else {
            os << "# " << key << ": " << scalar_text(value) << '\n';
        }
    }
    for (std::size_t c = 0; c < table.names.size(); ++c) {
        os << (c ? "," : "") << table.names[c];
    }
    os << '\n';
    const std::size_t rows = table.columns.empty() ? 0 : table.columns.front().size();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            os << (c ? "," : "") << format_double(table.columns[c][r]);
        }
        os << '\n';
    }
}

void write_json(const Json& meta, const Table& table, std::ostream& os)
{
    Json doc;
    doc["metadata"] = meta;
    Json data = Json::object();
    for (std::size_t c = 0; c < table.names.size(); ++c) {
        data[table.names[c]] = table.columns[c];
    }
    doc["data"] = std::move(data);
    os << doc.dump(1) << '\n';
}

void emit(const Params& p, const Json& meta, const Table& table, std::ostream& out)
{
    const bool json = p.text("format") == "json";
    const std::string path = p.has("out") ? p.text("out") : "-";
    if (path == "-") {
        json ? write_json(meta, table, out) : write_csv(meta, table, out);
        return;
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw std::runtime_error("cannot open output file '" + path + "'");
    }
    json ? write_json(meta, table, file) : write_csv(meta, table, file);
    if (!file) {
        throw std::runtime_error("failed writing '" + path + "'");
    }
}

const char* command_name(Command c)
{
    switch (c) {
    case Command::Fid:
        return "fid";
    case Command::Spectrum:
        return "spectrum";
    case Command::Mc:
        return "mc";
    }
    return "?";
}

Json metadata(Command command, const Params& p, const std::vector<std::string>& units)
{
    Json meta;
    meta["program"] = "nmrcage";
    meta["version"] = NMRCAGE_VERSION;
    meta["command"] = command_name(command);
    meta["units"] = p.text("units");
    meta["column_units"] = units;
    Json echo = Json::object();
    for (const auto& [key, value] : p.json().items()) {
        if (echoed(key)) {
            echo[key] = value;
        }
    }
    meta["parameters"] = std::move(echo);
    return meta;
}

std::string freq_unit(const Setup& s)
{
    return s.hz ? "Hz" : "rad/s";
}

// Commands -------------------------------------------------------------------

int run_fid(const Setup& s, Params& p, std::ostream& out)
{
    const Fn fid = selected_fid(s, p);
    complete_time_grid(s, fid, p);
    const auto series = tabulate(fid, grid_from(p));
    Table table{{"t", "F"}, {{}, series.values}};
    for (std::size_t k = 0; k < series.size(); ++k) {
        table.columns[0].push_back(series.time(k));
    }
    emit(p, metadata(Command::Fid, p, {"s", "1"}), table, out);
    return kExitOk;
}

int run_mc(const Setup& s, Params& p, std::ostream& out)
{
    const SpinEnsemble ens(s.n_spins);
    const GaussianFluctuationModel model(s.mean_d, s.variance, s.tau_c);
    AveragedForm form = AveragedForm::LargeN;
    if (s.fid_form == "exact") {
        form = AveragedForm::Exact;
    } else if (s.fid_form != "large-n") {
        fail("--fid-form for mc is large-n or exact");
    }
    complete_time_grid(s, [&](double t) { return fid_gaussian(t, ens, model); }, p);

    McConfig cfg;
    cfg.grid = grid_from(p);
    cfg.n_trajectories = p.count("trajectories");
    cfg.seed = p.count("seed");
    cfg.threads = static_cast<unsigned>(std::min<std::uint64_t>(p.count("threads"), 4096));
    cfg.form = form;
    const auto result = mc_average_fid(model, ens, cfg);

    Table table{{"t", "mean", "stderr"}, {{}, result.mean.values, result.std_error}};
    for (std::size_t k = 0; k < result.mean.size(); ++k) {
        table.columns[0].push_back(result.mean.time(k));
    }
    Json meta = metadata(Command::Mc, p, {"s", "1", "1"});
    meta["rng"] = kRngAlgorithm;
    emit(p, meta, table, out);
    return kExitOk;
}

Spectrum transform_spectrum(const Setup& s, const Params& p, const Fn& fid, const TransformPlan& shape)
{
    if (s.is_gaussian() && !std::isfinite(s.tau_c)) {
        fail("transform: the frozen-disorder FID decays as 1/t and has no finite transform horizon");
    }
    HorizonOptions options;
    options.decay_tol = p.real("decay-tol");
    if (p.has("t-max")) {
        options.t_cap = p.real("t-max");
    }
    const auto series = tabulate(fid, fid_horizon(fid, p.real("dt"), options));
    TransformPlan plan = make_plan(series, shape.omega_max, shape.n_omega, Quadrature::FilonCosine,
                                   options.decay_tol);
    plan.omega_min = shape.omega_min;
    const auto threads = p.has("threads") ? static_cast<unsigned>(std::min<std::uint64_t>(p.count("threads"), 4096)) : 1u;
    return cosine_transform(series, plan, threads);
}

double max_relative_difference(const std::vector<double>& a, const std::vector<double>& ref)
{
    double diff = 0.0;
    double scale = 0.0;
    for (std::size_t j = 0; j < ref.size(); ++j) {
        diff = std::max(diff, std::abs(a[j] - ref[j]));
        scale = std::max(scale, std::abs(ref[j]));
    }
    return scale > 0.0 ? diff / scale : diff;
}

int run_spectrum(const Setup& s, Params& p, std::ostream& out, std::ostream& err)
{
    const ClosedKind kind = closed_kind(s, p);
    const bool compare = p.flag("compare");
    const bool transform = p.text("method") == "transform";
    if (compare && kind == ClosedKind::K0) {
        fail("--compare: the frozen-disorder form has no decaying generating FID to transform");
    }

    if (!p.has("omega-max")) {
        if (s.nu == 0.0 && !(s.is_gaussian() && s.variance > 0.0)) {
            fail("spectrum: zero coupling gives a delta line; nothing to sample");
        }
        p.json()["omega-max"] = s.to_user(default_omega_max(s, kind));
    }
    if (!p.has("omega-min")) {
        p.json()["omega-min"] = kind == ClosedKind::K0 ? 1e-3 * p.real("omega-max") : 0.0;
    }
    if (transform || compare) {
        p.set_default("dt", default_dt(s));
    }

    TransformPlan shape;
    shape.omega_min = s.to_internal(p.real("omega-min"));
    shape.omega_max = s.to_internal(p.real("omega-max"));
    shape.n_omega = p.count("n-omega");
    shape.t_max = 1.0;
    shape.validate();
    const auto omegas = shape.omegas();

    Spectrum closed;
    Spectrum numeric;
    if (!transform || compare) {
        closed = evaluate_lineshape(closed_lineshape(s, kind), omegas);
    }
    if (transform) {
        numeric = transform_spectrum(s, p, selected_fid(s, p), shape);
    } else if (compare) {
        numeric = transform_spectrum(s, p, generating_fid(s, kind), shape);
    }

    const double scale = s.hz ? kTwoPi : 1.0;  // density per Hz in hz mode
    auto user = [&](std::vector<double> v) {
        for (auto& x : v) {
            x *= scale;
            if (p.flag("abs")) {
                x = std::abs(x);
            }
        }
        return v;
    };
    std::vector<double> axis(omegas.size());
    for (std::size_t j = 0; j < omegas.size(); ++j) {
        axis[j] = s.to_user(omegas[j]);
    }

    const std::string iu = s.hz ? "1/Hz" : "s";
    Table table;
    std::vector<std::string> units{freq_unit(s)};
    table.names.push_back("omega");
    table.columns.push_back(axis);
    if (compare) {
        table.names.insert(table.names.end(), {"I_closed", "I_transform"});
        table.columns.push_back(user(closed.intensities));
        table.columns.push_back(user(numeric.intensities));
        units.insert(units.end(), {iu, iu});
    } else {
        table.names.push_back("I");
        table.columns.push_back(user(transform ? numeric.intensities : closed.intensities));
        units.push_back(iu);
    }
    Json meta = metadata(Command::Spectrum, p, units);
    int code = kExitOk;
    if (compare) {
        const double rel = max_relative_difference(numeric.intensities, closed.intensities);
        meta["compare_max_relative_difference"] = rel;
        if (!(rel <= p.real("tol"))) {
            err << "compare: closed form and transform differ by " << format_double(rel)
                << " (relative to max |I|), above --tol " << format_double(p.real("tol")) << '\n';
            code = kExitCompare;
        }
    }
    emit(p, meta, table, out);
    return code;
}

} // namespace

int run(Command command, const nlohmann::ordered_json& params, std::ostream& out, std::ostream& err)
{
    try {
        Params p(params);
        apply_defaults(command, p);
        const Setup s = make_setup(command, p);
        switch (command) {
        case Command::Fid:
            return run_fid(s, p, out);
        case Command::Spectrum:
            return run_spectrum(s, p, out, err);
        case Command::Mc:
            return run_mc(s, p, out);
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"NMR free-induction decays and line shapes of a spin-1/2 gas in fluctuating or vibrating "
                 "nano-containers"};
    app.name("nmrcage");
    app.set_version_flag("--version", NMRCAGE_VERSION);
    app.require_subcommand(1, 1);

    std::map<std::string, std::string> raw;
    std::string config_path;
    const std::vector<std::pair<Command, CLI::App*>> subs = {
        {Command::Fid, app.add_subcommand("fid", "free-induction decay F(t): columns t,F")},
        {Command::Spectrum, app.add_subcommand("spectrum", "line shape I(omega): columns omega,I")},
        {Command::Mc, app.add_subcommand("mc", "Monte Carlo noise average of the FID: columns t,mean,stderr")},
    };
    for (const auto& [cmd, sub] : subs) {
        sub->add_option("--config", config_path, "JSON parameter file; a JSON output file also works");
        for (const auto& spec : param_specs()) {
            const std::string flag = std::string("--") + spec.name;
            const std::string name = spec.name;
            if (spec.kind == Kind::Flag) {
                sub->add_flag_callback(flag, [&raw, name] { raw[name] = "true"; }, spec.help);
            } else {
                sub->add_option_function<std::string>(
                    flag, [&raw, name](const std::string& v) { raw[name] = v; }, spec.help);
            }
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    Command command = Command::Fid;
    for (const auto& [cmd, sub] : subs) {
        if (sub->parsed()) {
            command = cmd;
        }
    }

    Json params = Json::object();
    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) {
                fail("--config: cannot open '" + config_path + "'");
            }
            Json doc;
            try {
                doc = Json::parse(in);
            } catch (const nlohmann::json::parse_error& e) {
                fail("--config: invalid JSON: " + std::string(e.what()));
            }
            if (doc.contains("metadata") && doc["metadata"].contains("parameters")) {
                doc = doc["metadata"]["parameters"];
            }
            if (!doc.is_object()) {
                fail("--config: expected a JSON object");
            }
            for (const auto& [key, value] : doc.items()) {
                const ParamSpec* spec = find_spec(key);
                if (!spec) {
                    fail("--config: unknown parameter '" + key + "'");
                }
                params[key] = from_config(*spec, value);
            }
        }
        for (const auto& [key, text] : raw) {
            params[key] = from_text(*find_spec(key), text);
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return run(command, params, out, err);
}

} // namespace nmrcage::cli
