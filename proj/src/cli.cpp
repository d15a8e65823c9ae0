// SPDX-License-Identifier: Apache-2.0

#include "bdloc/cli.hpp"
#include "bdloc/errors.hpp"
#include "bdloc/experiments.hpp"
#include "bdloc/selftest.hpp"
#include "bdloc/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

namespace bdloc {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr double kDeg = std::numbers::pi / 180.0;

std::string shell_quote(const std::string& s)
{
    const bool plain = !s.empty() && s.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
                                                         "0123456789_-.,:=/+") == std::string::npos;
    if (plain)
        return s;
    std::string out = "'";
    for (char c : s)
        out += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return out + "'";
}

std::uint64_t fnv1a(const std::string& text)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text)
    {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string config_hash(const RunConfig& config)
{
    std::string canonical;
    for (const auto& [k, v] : config.resolved())
        if (k.rfind("output.", 0) != 0 && k != "threads")
            canonical += k + "=" + v + "\n";
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(canonical);
    return os.str();
}

class Run
{
public:
    Run(const RunConfig& config, std::ostream& out) : config_(config), out_(out), start_(Clock::now()) {}

    std::filesystem::path path(const std::string& stem, const std::string& ext) const
    {
        return config_.output_dir / (config_.output_prefix + stem + ext);
    }

    void write(const std::filesystem::path& file, const std::string& content)
    {
        std::error_code ec;
        std::filesystem::create_directories(file.parent_path().empty() ? "." : file.parent_path(), ec);
        if (ec)
            throw IoError("cannot create directory " + file.parent_path().string() + ": " + ec.message());
        std::ofstream os(file, std::ios::binary);
        os << content;
        os.close();
        if (!os)
            throw IoError("cannot write " + file.string());
        outputs_.push_back(file.string());
    }

    // Writes the JSON sidecar; `result` holds command-specific payload.
    void sidecar(const std::filesystem::path& file, std::uint64_t seed, double phi, json result)
    {
        json j;
        j["schema_version"] = kSidecarSchemaVersion;
        j["software"] = "bdloc";
        j["version"] = kVersion;
        j["command"] = config_.command;
        json cfg = json::object();
        for (const auto& [k, v] : config_.resolved())
            cfg[k] = v;
        j["config"] = cfg;
        j["config_hash"] = config_hash(config_);
        j["seed"] = seed;
        j["phi"] = phi;
        j["reproduce"] = reproduce_command(config_);
        j["outputs"] = outputs_;
        j["wall_clock_s"] = std::chrono::duration<double>(Clock::now() - start_).count();
        j["result"] = std::move(result);
        write(file, j.dump(2) + "\n");
    }

    const RunConfig& config() const { return config_; }
    std::ostream& out() { return out_; }

private:
    const RunConfig& config_;
    std::ostream& out_;
    Clock::time_point start_;
    std::vector<std::string> outputs_;
};

json series_json(const SweepResult& s)
{
    json j;
    j["axis_name"] = s.axis_name;
    j["axis_unit"] = s.axis_unit;
    j["variant"] = s.variant;
    j["scenario"] = to_string(s.scenario);
    j["axis"] = s.axis;
    json series = json::object();
    for (std::size_t a = 0; a < s.architectures.size(); ++a)
    {
        json arr = json::array();
        for (const SeriesPoint& p : s.series[a])
            arr.push_back({{"eta_first", p.eta_first}, {"eta_theta", p.eta_theta}, {"peb", p.peb}});
        series[std::string(to_string(s.architectures[a]))] = arr;
    }
    j["series"] = series;
    return j;
}

void emit_sweep(Run& run, const std::string& stem, const SweepResult& s)
{
    std::ostringstream csv;
    write_sweep_csv(csv, s);
    const auto csv_path = run.path(stem, ".csv");
    run.write(csv_path, csv.str());
    run.sidecar(run.path(stem, ".json"), s.seed, s.phi, series_json(s));
    run.out() << run.config().command << ' ' << to_string(s.scenario) << (s.variant.empty() ? "" : " " + s.variant)
              << ": " << s.axis.size() << " points x " << s.architectures.size() << " architectures -> "
              << csv_path.string() << '\n';
}

void warn_region(const RunConfig& c, std::ostream& err)
{
    const SystemGeometry geom = c.experiment.geometry.build();
    const ScenarioConfig& sc = c.experiment.scenario;
    const double r = (sc.p_ue - geom.p_ris).norm();
    const Region region = classify_region(geom, r);
    const Region expected = sc.scenario == Scenario::NearField ? Region::FresnelNear : Region::Far;
    if (region != expected)
        err << "warning: UE range " << r << " m lies in the " << to_string(region) << " region, not the one assumed by "
            << to_string(sc.scenario) << '\n';
}

int cmd_pattern(Run& run)
{
    const RunConfig& c = run.config();
    const PatternResult res = run_beam_pattern(c.experiment, c.pattern_target_deg * kDeg, c.pattern_points);
    std::ostringstream csv;
    write_pattern_csv(csv, res);
    const auto csv_path = run.path("pattern", ".csv");
    run.write(csv_path, csv.str());

    json result;
    result["target_theta_deg"] = c.pattern_target_deg;
    json peaks = json::object();
    std::ostringstream summary;
    for (std::size_t a = 0; a < res.architectures.size(); ++a)
    {
        const auto& g = res.patterns[a].gain_normalized_db;
        const double peak = *std::max_element(g.begin(), g.end());
        peaks[std::string(to_string(res.architectures[a]))] = peak;
        summary << ' ' << to_string(res.architectures[a]) << '=' << format_number(peak) << " dB";
    }
    result["peak_normalized_gain_db"] = peaks;
    run.sidecar(run.path("pattern", ".json"), c.experiment.scenario.seed, 0.0, result);
    run.out() << "pattern: peak normalized gain" << summary.str() << " -> " << csv_path.string() << '\n';
    return kExitOk;
}

int cmd_crlb(Run& run, std::ostream& err)
{
    const RunConfig& c = run.config();
    warn_region(c, err);
    const CrlbResult res = run_crlb(c.experiment);

    std::ostringstream csv;
    csv << "arch,eta_first,eta_theta,peb\n";
    json reports = json::object();
    std::ostringstream summary;
    for (std::size_t a = 0; a < res.architectures.size(); ++a)
    {
        const FisherReport& rep = res.reports[a];
        const std::string name(to_string(res.architectures[a]));
        csv << name << ',' << format_number(rep.crlb(0)) << ',' << format_number(rep.crlb(1)) << ','
            << format_number(rep.peb) << '\n';
        reports[name] = report_to_json(rep);
        summary << ' ' << name << '=' << format_number(rep.peb) << " m";
    }
    const auto csv_path = run.path("crlb", ".csv");
    run.write(csv_path, csv.str());
    json result;
    result["p_ue"] = {c.experiment.scenario.p_ue.x(), c.experiment.scenario.p_ue.y()};
    result["reports"] = reports;
    run.sidecar(run.path("crlb", ".json"), c.experiment.scenario.seed, res.phi, result);
    run.out() << "crlb " << to_string(c.experiment.scenario.scenario) << " at (" << format_number(c.experiment.scenario.p_ue.x())
              << ", " << format_number(c.experiment.scenario.p_ue.y()) << ") m: PEB" << summary.str() << '\n';
    return kExitOk;
}

int cmd_sweep_subcarriers(Run& run)
{
    const RunConfig& c = run.config();
    std::vector<NoiseMode> modes;
    if (c.sweep_noise_mode)
        modes = {*c.sweep_noise_mode};
    else
        modes = {NoiseMode::TrackBandwidth, NoiseMode::Fixed};
    for (NoiseMode mode : modes)
    {
        const SweepResult s = sweep_subcarriers(c.experiment, c.sweep_n, mode);
        emit_sweep(run, "sweep-subcarriers-" + s.variant, s);
    }
    return kExitOk;
}

int cmd_heatmap(Run& run)
{
    const RunConfig& c = run.config();
    const HeatmapResult res = peb_heatmap(c.experiment, c.heatmap);
    std::ostringstream csv;
    write_heatmap_csv(csv, res);
    const auto csv_path = run.path("heatmap", ".csv");
    run.write(csv_path, csv.str());

    json result;
    result["scenario"] = to_string(res.scenario);
    result["nx"] = res.x.size();
    result["ny"] = res.y.size();
    json masked = json::object();
    for (std::size_t a = 0; a < res.architectures.size(); ++a)
        masked[std::string(to_string(res.architectures[a]))] = res.peb_db[a].array().isNaN().count();
    result["masked_cells"] = masked;
    run.sidecar(run.path("heatmap", ".json"), res.seed, res.phi, result);
    run.out() << "heatmap " << to_string(res.scenario) << ": " << res.x.size() << " x " << res.y.size() << " cells x "
              << res.architectures.size() << " architectures -> " << csv_path.string() << '\n';
    return kExitOk;
}

int cmd_codebook_export(Run& run)
{
    const RunConfig& c = run.config();
    const SystemGeometry geom = c.experiment.geometry.build();
    const ScenarioConfig& sc = c.experiment.scenario;
    std::ostringstream csv;
    csv << "index,arch,theta_deg,range_m\n";
    json files = json::object();
    std::size_t total = 0;
    for (Architecture arch : c.experiment.architectures)
    {
        const Codebook cb = build_codebook(geom, sc.scenario, arch, sc.grid, c.experiment.threads);
        const std::string name(to_string(arch));
        for (std::size_t t = 0; t < cb.size(); ++t)
            csv << t << ',' << name << ',' << format_number(cb.targets[t].theta / kDeg) << ','
                << (cb.targets[t].range ? format_number(*cb.targets[t].range) : std::string()) << '\n';
        const auto path = run.path("codebook-" + name, ".json");
        run.write(path, codebook_to_json(cb).dump() + "\n");
        files[name] = path.string();
        total += cb.size();
    }
    const auto csv_path = run.path("codebook", ".csv");
    run.write(csv_path, csv.str());
    run.sidecar(run.path("codebook", ".json"), sc.seed, 0.0, json{{"codebooks", files}});
    run.out() << "codebook-export " << to_string(sc.scenario) << ": " << total << " codewords -> " << csv_path.string()
              << '\n';
    return kExitOk;
}

int cmd_selftest(Run& run)
{
    const RunConfig& c = run.config();
    const SelftestReport rep = run_selftest(c.experiment.geometry.build(), c.experiment.threads);
    for (const SelftestCheck& chk : rep.checks)
        run.out() << (chk.passed ? "ok   " : "FAIL ") << chk.name << "  worst=" << format_number(chk.worst)
                  << " tol=" << format_number(chk.tolerance) << '\n';
    run.out() << "selftest: " << (rep.passed() ? "passed" : "FAILED") << '\n';
    return rep.passed() ? kExitOk : kExitNumerical;
}

int run_command(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    Run run(config, out);
    const std::string& cmd = config.command;
    if (cmd == "pattern")
        return cmd_pattern(run);
    if (cmd == "crlb")
        return cmd_crlb(run, err);
    if (cmd == "sweep-power")
    {
        emit_sweep(run, "sweep-power", sweep_power(config.experiment, config.sweep_p));
        return kExitOk;
    }
    if (cmd == "sweep-dc")
    {
        emit_sweep(run, "sweep-dc", sweep_dc(config.experiment, config.sweep_dc_wl));
        return kExitOk;
    }
    if (cmd == "sweep-subcarriers")
        return cmd_sweep_subcarriers(run);
    if (cmd == "heatmap")
        return cmd_heatmap(run);
    if (cmd == "codebook-export")
        return cmd_codebook_export(run);
    if (cmd == "selftest")
        return cmd_selftest(run);
    throw ValidationError("unknown command '" + cmd + "'");
}

} // namespace

std::vector<std::string> subcommands()
{
    return {"pattern", "crlb", "sweep-power", "sweep-dc", "sweep-subcarriers", "heatmap", "codebook-export", "selftest"};
}

std::string reproduce_command(const RunConfig& config)
{
    std::string cmd = "bdloc " + config.command;
    for (const auto& [k, v] : config.resolved())
        cmd += " " + shell_quote(k + "=" + v);
    return cmd;
}

int dispatch(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    try
    {
        return run_command(config, out, err);
    }
    catch (const ValidationError& e)
    {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    catch (const NumericalError& e)
    {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    }
    catch (const IoError& e)
    {
        err << "i/o error: " << e.what() << '\n';
        return kExitIo;
    }
    catch (const std::exception& e)
    {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"CRLB and PEB studies for RIS-aided localization"};
    app.set_version_flag("--version", std::string(kVersion));

    std::string command;
    std::string config_file;
    std::vector<std::string> assignments;
    std::vector<std::string> sets;
    std::string scenario, arch, power, out_dir;
    int threads = 0;

    app.add_option("command", command, "Subcommand")->required()->check(CLI::IsMember(subcommands()));
    app.add_option("overrides", assignments, "key=value overrides");
    app.add_option("-c,--config", config_file, "key = value config file");
    app.add_option("--set", sets, "key=value override (repeatable)");
    app.add_option("--scenario", scenario, "nf or ff");
    app.add_option("--arch", arch, "bd-ris, d-ris, aaa or all");
    app.add_option("--p", power, "Power axis in dBm for sweep-power (first:step:last or list)");
    app.add_option("--threads", threads, "Worker thread cap")->check(CLI::Range(1, 1024));
    app.add_option("--out", out_dir, "Output directory");
    app.footer("Every config key may be overridden as key=value. Output directory default: $BDLOC_OUTPUT_DIR or '.'.");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp&)
    {
        out << app.help();
        return kExitOk;
    }
    catch (const CLI::CallForVersion&)
    {
        out << kVersion << '\n';
        return kExitOk;
    }
    catch (const CLI::ParseError& e)
    {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    RunConfig config;
    try
    {
        Overrides overrides;
        for (const auto& a : assignments)
            overrides.push_back(split_assignment(a));
        for (const auto& s : sets)
            overrides.push_back(split_assignment(s));
        if (!scenario.empty())
            overrides.emplace_back("scenario", scenario);
        if (!arch.empty())
            overrides.emplace_back("arch", arch);
        if (!power.empty())
            overrides.emplace_back("sweep.p", power);
        if (threads > 0)
            overrides.emplace_back("threads", std::to_string(threads));
        if (!out_dir.empty())
            overrides.emplace_back("output.dir", out_dir);
        config = parse_config(config_file, overrides);
        config.command = command;
    }
    catch (const ValidationError& e)
    {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    catch (const IoError& e)
    {
        err << "i/o error: " << e.what() << '\n';
        return kExitIo;
    }
    return dispatch(config, out, err);
}

} // namespace bdloc
