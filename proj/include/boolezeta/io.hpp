#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "boolezeta/config.hpp"
#include "boolezeta/experiments.hpp"
#include "boolezeta/limits.hpp"

#ifndef BOOLEZETA_VERSION
#define BOOLEZETA_VERSION "0.0.0"
#endif

namespace boolezeta {

inline constexpr int kCsvSchemaVersion = 1;
inline constexpr const char* kSeriesHeader = "N,seed,estimate_re,estimate_im,se_re,se_im";

using json = nlohmann::ordered_json;

inline json complex_json(cplx v) { return json{{"re", v.real()}, {"im", v.imag()}}; }

inline json counters_json(const Counters& c) {
    return json{{"evaluations", c.evaluations}, {"singular_hits", c.singular_hits}, {"log_clips", c.log_clips},
                {"unconverged_evaluations", c.unconverged}, {"pole_hits", c.pole_hits},
                {"orbit_steps", c.orbit_steps}};
}

inline json conventions_json(const ConventionsResolution& r) {
    auto check = [](const CandidateCheck& c) {
        return json{{"accepted", c.accepted},
                    {"rejected", c.rejected},
                    {"accepted_discrepancy", c.accepted_discrepancy},
                    {"rejected_discrepancy", c.rejected_discrepancy},
                    {"discrepancy_ratio", c.rejected_discrepancy / std::max(c.accepted_discrepancy, 1e-300)},
                    {"quadrature", complex_json(c.quadrature)},
                    {"quadrature_error", c.quadrature_error},
                    {"decisive", c.decisive()}};
    };
    return json{{"pole_sign", check(r.pole_sign)}, {"line_denominator", check(r.line_denominator)}};
}

/// Per-seed rows followed by a pooled row for every scheduled N.
inline std::string series_csv(const RunResult& r) {
    std::ostringstream os;
    os << kSeriesHeader << "\n";
    for (const auto& p : r.series) {
        for (std::size_t i = 0; i < p.per_seed.size(); ++i)
            os << p.N << "," << i << "," << format_double(p.per_seed[i].real()) << ","
               << format_double(p.per_seed[i].imag()) << ",,\n";
        os << p.N << ",pooled," << format_double(p.pooled.real()) << "," << format_double(p.pooled.imag()) << ","
           << format_double(p.se_re) << "," << format_double(p.se_im) << "\n";
    }
    return os.str();
}

/// Reasons the run counts as numerically flagged (empty when clean).
inline std::vector<std::string> quality_flags(const RunResult& r) {
    std::vector<std::string> out;
    for (const auto& ref : r.references)
        if (ref.flagged) out.push_back("reference '" + ref.name + "' missed the quadrature tolerance");
    if (r.counters.unconverged) out.push_back(std::to_string(r.counters.unconverged) + " evaluations missed the accuracy target");
    if (r.counters.pole_hits) out.push_back(std::to_string(r.counters.pole_hits) + " samples landed on the pole");
    return out;
}

inline json summary_json(const RunResult& r) {
    const auto& f = r.final_point();
    json j;
    j["experiment"] = to_string(r.config.kind);
    j["family"] = describe(r.config.family);
    j["N"] = f.N;
    j["seeds"] = f.per_seed.size();
    j["estimate"] = complex_json(f.pooled);
    j["standard_error"] = json{{"re", f.se_re}, {"im", f.se_im}, {"combined", f.se()}};
    json refs = json::array();
    for (const auto& ref : r.references) {
        const double err = std::abs(f.pooled - ref.value);
        refs.push_back(json{{"name", ref.name},
                            {"value", complex_json(ref.value)},
                            {"error_bound", ref.error},
                            {"flagged", ref.flagged},
                            {"abs_error", err},
                            {"rel_error", err / std::max(std::abs(ref.value), 1e-300)},
                            {"standard_errors", f.se() > 0 ? err / f.se() : (err == 0 ? 0.0 : INFINITY)}});
    }
    j["references"] = refs;
    j["counters"] = counters_json(r.counters);
    if (r.variation) {
        const auto& v = *r.variation;
        j["variation"] = json{{"schedule", v.schedule},
                              {"block_sup", v.block_sup},
                              {"squared_increments", v.squared_increments},
                              {"absolute_increments", v.absolute_increments},
                              {"square_function", v.square_function},
                              {"windowed_square_function", v.windowed_square_function},
                              {"bound", v.bound},
                              {"empirical_C",
                               json{{"block_sup", v.C_block_sup},
                                    {"squared_increments", v.C_squared},
                                    {"square_function", v.C_square_function},
                                    {"windowed", v.C_windowed}}}};
    }
    if (r.frequency) {
        const auto& fr = *r.frequency;
        j["frequency"] = json{{"n_max", fr.n_max},         {"m_grid", fr.m_grid},
                              {"ratio", fr.ratio},         {"ratio_se", fr.ratio_se},
                              {"weak_norm", fr.weak_norm}, {"weak_norm_se", fr.weak_norm_se},
                              {"weak_norm_at_half_n_max", fr.weak_norm_half}};
    }
    j["diagnostics"] = r.diagnostics;
    j["quality_flags"] = quality_flags(r);
    return j;
}

inline json manifest_json(const RunResult& r, const ConventionsResolution& conv, std::size_t threads) {
    json j;
    j["tool"] = "boolezeta";
    j["version"] = BOOLEZETA_VERSION;
    j["csv_schema_version"] = kCsvSchemaVersion;
    j["csv_columns"] = kSeriesHeader;
    j["config_text"] = to_config_text(r.config);
    json cfg = json::object();
    std::istringstream in(to_config_text(r.config));
    for (std::string line; std::getline(in, line);) {
        const auto eq = line.find(" = ");
        if (eq != std::string::npos) cfg[line.substr(0, eq)] = line.substr(eq + 3);
    }
    j["config"] = cfg;
    j["seeds"] = json{{"master", r.config.seeds.master}, {"count", r.config.seeds.count},
                      {"streams", r.config.seeds.streams()}};
    j["conventions"] = conventions_json(conv);
    j["decisions"] = json{
        {"pole_sign", to_string(conv.conventions.pole_sign)},
        {"line_denominator", to_string(conv.conventions.line)},
        {"singular_radius", kSingularRadius},
        {"log_clip", r.config.log_clip},
        {"orbit_seed_distribution", "cauchy_sample(stationary)"},
        {"running_mean", "R_{n+1} = R_n + (f_{n+1} - R_n)/(n+1)"}};
    j["counters"] = counters_json(r.counters);
    j["timing"] = json{{"elapsed_seconds", r.elapsed_seconds}, {"threads", threads}};
    return j;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

inline void write_run(const std::filesystem::path& dir, const RunResult& r, const ConventionsResolution& conv,
                      std::size_t threads) {
    std::filesystem::create_directories(dir);
    write_text(dir / "manifest.json", manifest_json(r, conv, threads).dump(2) + "\n");
    write_text(dir / "series.csv", series_csv(r));
    write_text(dir / "summary.json", summary_json(r).dump(2) + "\n");
}

/// Output root: $BOOLEZETA_OUTPUT_ROOT, or ./runs.
inline std::filesystem::path output_root() {
    if (const char* env = std::getenv("BOOLEZETA_OUTPUT_ROOT"); env && *env) return env;
    return "runs";
}

/// Stable directory name derived from the resolved config text.
inline std::string run_name(const ExperimentConfig& c) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : to_config_text(c)) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(to_string(c.kind)) + "-" + buf;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct ReportRow {
    std::uint64_t N = 0;
    cplx estimate, reference;
    double se = 0.0;
    double abs_err = 0.0, rel_err = 0.0;
};

struct Report {
    std::string reference_name;
    std::vector<ReportRow> rows;
};

class report_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline json read_json(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw report_error("missing " + p.filename().string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw report_error("corrupt " + p.filename().string() + ": " + e.what());
    }
}

inline Report load_report(const std::filesystem::path& dir) {
    Report rep;
    const auto manifest = read_json(dir / "manifest.json");
    if (!manifest.contains("csv_schema_version") || manifest["csv_schema_version"] != kCsvSchemaVersion)
        throw report_error("manifest.json: unsupported or missing csv_schema_version");
    const auto summary = read_json(dir / "summary.json");
    cplx ref{std::nan(""), std::nan("")};
    try {
        if (!summary.at("references").empty()) {
            const auto& r0 = summary.at("references").at(0);
            rep.reference_name = r0.at("name").get<std::string>();
            ref = {r0.at("value").at("re").get<double>(), r0.at("value").at("im").get<double>()};
        }
    } catch (const json::exception& e) {
        throw report_error(std::string("summary.json: ") + e.what());
    }
    std::ifstream in(dir / "series.csv");
    if (!in) throw report_error("missing series.csv");
    std::string line;
    std::getline(in, line);
    if (line != kSeriesHeader) throw report_error("series.csv: unexpected header");
    while (std::getline(in, line)) {
        const auto cells = [&] {
            std::vector<std::string> v;
            std::stringstream ss(line);
            for (std::string c; std::getline(ss, c, ',');) v.push_back(c);
            while (v.size() < 6) v.emplace_back();
            return v;
        }();
        if (cells[1] != "pooled") continue;
        try {
            ReportRow row;
            row.N = std::stoull(cells[0]);
            row.estimate = {std::stod(cells[2]), std::stod(cells[3])};
            row.se = std::hypot(std::stod(cells[4]), std::stod(cells[5]));
            row.reference = ref;
            row.abs_err = std::abs(row.estimate - ref);
            row.rel_err = row.abs_err / std::abs(ref);
            rep.rows.push_back(row);
        } catch (const std::exception&) {
            throw report_error("series.csv: malformed row '" + line + "'");
        }
    }
    if (rep.rows.empty()) throw report_error("series.csv: no pooled rows");
    return rep;
}

enum class ReportFormat { csv, json, gnuplot };

inline std::string render_report(const Report& rep, ReportFormat fmt) {
    std::ostringstream os;
    const auto d = format_double;
    switch (fmt) {
        case ReportFormat::csv:
            os << "N,estimate_re,estimate_im,standard_error,ref_re,ref_im,abs_err,rel_err\n";
            for (const auto& r : rep.rows)
                os << r.N << "," << d(r.estimate.real()) << "," << d(r.estimate.imag()) << "," << d(r.se) << ","
                   << d(r.reference.real()) << "," << d(r.reference.imag()) << "," << d(r.abs_err) << ","
                   << d(r.rel_err) << "\n";
            break;
        case ReportFormat::gnuplot:
            os << "# reference: " << rep.reference_name << "\n# N estimate_re estimate_im ref_re ref_im abs_err\n";
            for (const auto& r : rep.rows)
                os << r.N << " " << d(r.estimate.real()) << " " << d(r.estimate.imag()) << " " << d(r.reference.real())
                   << " " << d(r.reference.imag()) << " " << d(r.abs_err) << "\n";
            break;
        case ReportFormat::json: {
            json rows = json::array();
            for (const auto& r : rep.rows)
                rows.push_back(json{{"N", r.N},
                                    {"estimate_re", r.estimate.real()},
                                    {"estimate_im", r.estimate.imag()},
                                    {"standard_error", r.se},
                                    {"ref_re", r.reference.real()},
                                    {"ref_im", r.reference.imag()},
                                    {"abs_err", r.abs_err},
                                    {"rel_err", r.rel_err}});
            os << json{{"reference", rep.reference_name}, {"rows", rows}}.dump(2) << "\n";
            break;
        }
    }
    return os.str();
}

}  // namespace boolezeta
