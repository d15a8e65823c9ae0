// SPDX-License-Identifier: Apache-2.0

#include "bdloc/config.hpp"
#include "bdloc/codebook.hpp"
#include "bdloc/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

namespace bdloc {

namespace {

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected)
{
    throw ValidationError(key + ": invalid value '" + value + "' (expected " + expected + ")");
}

double to_double(const std::string& key, const std::string& value)
{
    double out = 0;
    const char* end = value.data() + value.size();
    const auto r = std::from_chars(value.data(), end, out);
    if (r.ec != std::errc() || r.ptr != end || !std::isfinite(out))
        bad_value(key, value, "a finite number");
    return out;
}

long long to_integer(const std::string& key, const std::string& value)
{
    long long out = 0;
    const char* end = value.data() + value.size();
    const auto r = std::from_chars(value.data(), end, out);
    if (r.ec != std::errc() || r.ptr != end)
        bad_value(key, value, "an integer");
    return out;
}

std::string join(const std::vector<double>& values)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i)
        out += (i ? "," : "") + format_number(values[i]);
    return out;
}

std::string join_int(const std::vector<int>& values)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i)
        out += (i ? "," : "") + std::to_string(values[i]);
    return out;
}

std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : "auto"; }

std::optional<double> to_optional_double(const std::string& key, const std::string& value)
{
    if (value == "auto")
        return std::nullopt;
    return to_double(key, value);
}

struct Key
{
    const char* name;
    std::function<void(RunConfig&, const std::string& key, const std::string& value)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define BDLOC_DOUBLE(NAME, FIELD)                                                                                   \
    Key { NAME, [](RunConfig& c, const std::string& k, const std::string& v) { c.FIELD = to_double(k, v); },       \
          [](const RunConfig& c) { return format_number(c.FIELD); } }

const std::vector<Key>& key_table()
{
    static const std::vector<Key> table = {
        {"scenario", [](RunConfig&, const std::string&, const std::string&) {},
         [](const RunConfig& c) { return std::string(to_string(c.experiment.scenario.scenario)); }},
        {"arch",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             std::vector<Architecture> archs;
             if (v == "all")
                 archs.assign(std::begin(kAllArchitectures), std::end(kAllArchitectures));
             else
             {
                 std::stringstream ss(v);
                 for (std::string item; std::getline(ss, item, ',');)
                 {
                     try
                     {
                         const Architecture a = parse_architecture(trim(item));
                         for (Architecture seen : archs)
                             if (seen == a)
                                 bad_value(k, v, "distinct architectures");
                         archs.push_back(a);
                     }
                     catch (const ValidationError&)
                     {
                         bad_value(k, v, "all, or a comma list of bd-ris, d-ris, aaa");
                     }
                 }
             }
             if (archs.empty())
                 bad_value(k, v, "at least one architecture");
             c.experiment.architectures = archs;
         },
         [](const RunConfig& c) {
             std::string out;
             for (std::size_t i = 0; i < c.experiment.architectures.size(); ++i)
                 out += (i ? "," : "") + std::string(to_string(c.experiment.architectures[i]));
             return out;
         }},
        {"N",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             const long long n = to_integer(k, v);
             if (n < 1 || n % 2 == 0 || n > 1000001)
                 bad_value(k, v, "an odd subcarrier count >= 1");
             c.experiment.scenario.N = static_cast<int>(n);
         },
         [](const RunConfig& c) { return std::to_string(c.experiment.scenario.N); }},
        BDLOC_DOUBLE("delta_f", experiment.scenario.delta_f),
        BDLOC_DOUBLE("P_dbm", experiment.scenario.P_dbm),
        {"noise_dbm",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.experiment.scenario.noise_dbm = to_optional_double(k, v);
         },
         [](const RunConfig& c) { return format_optional(c.experiment.scenario.noise_dbm); }},
        {"seed",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             const long long s = to_integer(k, v);
             if (s < 0)
                 bad_value(k, v, "a non-negative integer");
             c.experiment.scenario.seed = static_cast<std::uint64_t>(s);
         },
         [](const RunConfig& c) { return std::to_string(c.experiment.scenario.seed); }},
        {"threads",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             const long long t = to_integer(k, v);
             if (t < 1 || t > 1024)
                 bad_value(k, v, "an integer in [1, 1024]");
             c.experiment.threads = static_cast<int>(t);
         },
         [](const RunConfig& c) { return std::to_string(c.experiment.threads); }},
        {"geometry.M",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             const long long m = to_integer(k, v);
             if (m < 2 || m > 100000)
                 bad_value(k, v, "an element count in [2, 100000]");
             c.experiment.geometry.M = static_cast<int>(m);
         },
         [](const RunConfig& c) { return std::to_string(c.experiment.geometry.M); }},
        BDLOC_DOUBLE("geometry.f_c", experiment.geometry.f_c),
        BDLOC_DOUBLE("geometry.delta_wl", experiment.geometry.delta_wl),
        BDLOC_DOUBLE("geometry.d_c_wl", experiment.geometry.d_c_wl),
        BDLOC_DOUBLE("ue.x", experiment.scenario.p_ue.x()),
        BDLOC_DOUBLE("ue.y", experiment.scenario.p_ue.y()),
        BDLOC_DOUBLE("codebook.rho_min", experiment.scenario.grid.rho_min),
        BDLOC_DOUBLE("codebook.rho_max", experiment.scenario.grid.rho_max),
        BDLOC_DOUBLE("codebook.delta_r", experiment.scenario.grid.delta_r),
        BDLOC_DOUBLE("codebook.delta_theta_deg", experiment.scenario.grid.delta_theta_deg),
        {"codebook.mode",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             if (v == "literal")
                 c.experiment.scenario.grid.mode = GridMode::Literal;
             else if (v == "truncate")
                 c.experiment.scenario.grid.mode = GridMode::Truncate;
             else
                 bad_value(k, v, "literal or truncate");
         },
         [](const RunConfig& c) {
             return std::string(c.experiment.scenario.grid.mode == GridMode::Literal ? "literal" : "truncate");
         }},
        {"codebook.T",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             const long long t = to_integer(k, v);
             if (t < 1)
                 bad_value(k, v, "a positive codebook size");
             c.experiment.scenario.grid.truncate_to = static_cast<std::size_t>(t);
         },
         [](const RunConfig& c) { return std::to_string(c.experiment.scenario.grid.truncate_to); }},
        {"signal.ff_derivative",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             if (v == "analytic")
                 c.experiment.scenario.ff_form = FfDerivativeForm::Analytic;
             else if (v == "cosine")
                 c.experiment.scenario.ff_form = FfDerivativeForm::Cosine;
             else
                 bad_value(k, v, "analytic or cosine");
         },
         [](const RunConfig& c) {
             return std::string(c.experiment.scenario.ff_form == FfDerivativeForm::Analytic ? "analytic" : "cosine");
         }},
        {"fisher.jacobian_sign",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             if (v == "reference")
                 c.experiment.scenario.jacobian_sign = JacobianSign::Reference;
             else if (v == "geometric")
                 c.experiment.scenario.jacobian_sign = JacobianSign::Geometric;
             else
                 bad_value(k, v, "reference or geometric");
         },
         [](const RunConfig& c) {
             return std::string(c.experiment.scenario.jacobian_sign == JacobianSign::Reference ? "reference" : "geometric");
         }},
        {"sweep.p", [](RunConfig& c, const std::string& k, const std::string& v) { c.sweep_p = parse_list(k, v); },
         [](const RunConfig& c) { return join(c.sweep_p); }},
        {"sweep.dc_wl",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.sweep_dc_wl = parse_list(k, v);
             for (double d : c.sweep_dc_wl)
                 if (!(d > 0.0))
                     bad_value(k, v, "positive distances in wavelengths");
         },
         [](const RunConfig& c) { return join(c.sweep_dc_wl); }},
        {"sweep.n",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.sweep_n.clear();
             for (double d : parse_list(k, v))
             {
                 if (d != std::round(d) || d < 1 || std::fmod(d, 2.0) == 0.0)
                     bad_value(k, v, "odd subcarrier counts >= 1");
                 c.sweep_n.push_back(static_cast<int>(d));
             }
         },
         [](const RunConfig& c) { return join_int(c.sweep_n); }},
        {"sweep.noise_mode",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             if (v == "both")
                 c.sweep_noise_mode.reset();
             else if (v == "track")
                 c.sweep_noise_mode = NoiseMode::TrackBandwidth;
             else if (v == "fixed")
                 c.sweep_noise_mode = NoiseMode::Fixed;
             else
                 bad_value(k, v, "both, track or fixed");
         },
         [](const RunConfig& c) {
             if (!c.sweep_noise_mode)
                 return std::string("both");
             return std::string(*c.sweep_noise_mode == NoiseMode::Fixed ? "fixed" : "track");
         }},
        BDLOC_DOUBLE("heatmap.x_min", heatmap.x_min),
        BDLOC_DOUBLE("heatmap.x_max", heatmap.x_max),
        BDLOC_DOUBLE("heatmap.y_min", heatmap.y_min),
        BDLOC_DOUBLE("heatmap.y_max", heatmap.y_max),
        BDLOC_DOUBLE("heatmap.resolution", heatmap.resolution),
        BDLOC_DOUBLE("heatmap.exclusion_radius", heatmap.exclusion_radius),
        {"heatmap.delta_theta_deg",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.heatmap.delta_theta_deg = to_optional_double(k, v);
         },
         [](const RunConfig& c) { return format_optional(c.heatmap.delta_theta_deg); }},
        BDLOC_DOUBLE("pattern.target_deg", pattern_target_deg),
        {"pattern.points",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             const long long n = to_integer(k, v);
             if (n < 2 || n > 10000000)
                 bad_value(k, v, "a point count in [2, 1e7]");
             c.pattern_points = static_cast<std::size_t>(n);
         },
         [](const RunConfig& c) { return std::to_string(c.pattern_points); }},
        {"output.dir",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             if (v.empty())
                 bad_value(k, v, "a directory path");
             c.output_dir = v;
         },
         [](const RunConfig& c) { return c.output_dir.string(); }},
        {"output.prefix", [](RunConfig& c, const std::string&, const std::string& v) { c.output_prefix = v; },
         [](const RunConfig& c) { return c.output_prefix; }},
    };
    return table;
}

#undef BDLOC_DOUBLE

const Key* find_key(const std::string& name)
{
    for (const Key& k : key_table())
        if (name == k.name)
            return &k;
    return nullptr;
}

RunConfig defaults_for(Scenario scenario)
{
    RunConfig c;
    c.experiment = ExperimentConfig::defaults(scenario);
    c.heatmap = HeatmapSpec::defaults(scenario);
    c.sweep_p = inclusive_range(0.0, 2.0, 30.0);
    c.sweep_dc_wl = {0.5, 1, 2, 5, 10, 20, 50};
    for (int n = 1; n <= 501; n += 50)
        c.sweep_n.push_back(n);
    if (const char* env = std::getenv(kOutputDirEnv); env && *env)
        c.output_dir = env;
    return c;
}

void validate(const RunConfig& c)
{
    const ScenarioConfig& sc = c.experiment.scenario;
    if (sc.scenario == Scenario::NearField && sc.N != 1)
        throw ValidationError("N: the near-field scenario requires N = 1 (got " + std::to_string(sc.N) + ")");
    if (!(sc.delta_f > 0.0))
        throw ValidationError("delta_f: must be positive");
    if (c.experiment.geometry.M < 2)
        throw ValidationError("geometry.M: must be >= 2");
    if (!(c.experiment.geometry.f_c > 0.0))
        throw ValidationError("geometry.f_c: must be positive");
    if (!(c.experiment.geometry.delta_wl > 0.0))
        throw ValidationError("geometry.delta_wl: must be positive");
    if (!(c.experiment.geometry.d_c_wl > 0.0))
        throw ValidationError("geometry.d_c_wl: must be positive");
    if (!(sc.grid.delta_theta_deg > 0.0))
        throw ValidationError("codebook.delta_theta_deg: must be positive");
    if (sc.scenario == Scenario::NearField && !(sc.grid.delta_r > 0.0))
        throw ValidationError("codebook.delta_r: must be positive");
    if (sc.scenario == Scenario::NearField && !(sc.grid.rho_min <= sc.grid.rho_max))
        throw ValidationError("codebook.rho_min: must not exceed codebook.rho_max");
    if (!(c.heatmap.resolution > 0.0))
        throw ValidationError("heatmap.resolution: must be positive");
    if (c.heatmap.x_max < c.heatmap.x_min)
        throw ValidationError("heatmap.x_max: must not be below heatmap.x_min");
    if (c.heatmap.y_max < c.heatmap.y_min)
        throw ValidationError("heatmap.y_max: must not be below heatmap.y_min");
    if (c.heatmap.exclusion_radius < 0.0)
        throw ValidationError("heatmap.exclusion_radius: must be non-negative");
    if (c.heatmap.delta_theta_deg && !(*c.heatmap.delta_theta_deg > 0.0))
        throw ValidationError("heatmap.delta_theta_deg: must be positive");
    if (c.sweep_p.empty())
        throw ValidationError("sweep.p: list must not be empty");
    if (c.sweep_dc_wl.empty())
        throw ValidationError("sweep.dc_wl: list must not be empty");
    if (c.sweep_n.empty())
        throw ValidationError("sweep.n: list must not be empty");
    const SystemGeometry geom = c.experiment.geometry.build();
    geom.validate();
    sweep_grid(geom, sc.scenario, sc.grid);
    const Vec2 d = sc.p_ue - geom.p_ris;
    if (d.x() < 0.0 || d.norm() == 0.0)
        throw ValidationError("ue.x: the UE must lie in the half-plane x >= 0 and away from the RIS");
}

} // namespace

std::pair<std::string, std::string> split_assignment(const std::string& text)
{
    const auto eq = text.find('=');
    if (eq == std::string::npos)
        throw ValidationError("expected key=value, got '" + text + "'");
    std::string key = trim(std::string_view(text).substr(0, eq));
    if (key.empty())
        throw ValidationError("empty key in '" + text + "'");
    return {key, trim(std::string_view(text).substr(eq + 1))};
}

std::vector<double> parse_list(const std::string& key, const std::string& text)
{
    if (text.find(':') != std::string::npos)
    {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string item; std::getline(ss, item, ':');)
            parts.push_back(trim(item));
        if (parts.size() != 3)
            bad_value(key, text, "first:step:last");
        const double a = to_double(key, parts[0]);
        const double step = to_double(key, parts[1]);
        const double b = to_double(key, parts[2]);
        if (!(step > 0.0) || b < a)
            bad_value(key, text, "first:step:last with step > 0 and last >= first");
        return inclusive_range(a, step, b);
    }
    std::vector<double> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');)
        out.push_back(to_double(key, trim(item)));
    if (out.empty())
        bad_value(key, text, "a nonempty list");
    return out;
}

std::vector<std::string> known_keys()
{
    std::vector<std::string> out;
    for (const Key& k : key_table())
        out.emplace_back(k.name);
    return out;
}

std::vector<std::pair<std::string, std::string>> RunConfig::resolved() const
{
    std::vector<std::pair<std::string, std::string>> out;
    for (const Key& k : key_table())
        out.emplace_back(k.name, k.get(*this));
    return out;
}

RunConfig parse_config_text(const std::string& text, const Overrides& overrides)
{
    std::map<std::string, std::string> values;
    std::istringstream in(text);
    int lineno = 0;
    for (std::string line; std::getline(in, line);)
    {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        if (trim(line).empty())
            continue;
        try
        {
            auto [k, v] = split_assignment(line);
            if (values.count(k))
                throw ValidationError(k + ": duplicate key");
            values[k] = v;
        }
        catch (const ValidationError& e)
        {
            throw ValidationError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    for (const auto& [k, v] : overrides)
        values[k] = v;

    for (const auto& [k, v] : values)
        if (!find_key(k))
            throw ValidationError(k + ": unknown key");

    Scenario scenario = Scenario::NearField;
    if (auto it = values.find("scenario"); it != values.end())
    {
        try
        {
            scenario = parse_scenario(it->second);
        }
        catch (const ValidationError&)
        {
            bad_value("scenario", it->second, "nf or ff");
        }
    }

    RunConfig config = defaults_for(scenario);
    for (const Key& k : key_table())
        if (auto it = values.find(k.name); it != values.end())
            k.set(config, it->first, it->second);
    validate(config);
    return config;
}

RunConfig parse_config(const std::filesystem::path& path, const Overrides& overrides)
{
    if (path.empty())
        return parse_config_text("", overrides);
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str(), overrides);
}

} // namespace bdloc
