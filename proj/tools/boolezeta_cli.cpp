#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>

#include <CLI11.hpp>

#include "boolezeta/config.hpp"
#include "boolezeta/experiments.hpp"
#include "boolezeta/io.hpp"
#include "boolezeta/limits.hpp"
#include "boolezeta/sampling.hpp"

namespace bz = boolezeta;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitFlagged = 3;

int cmd_run(const std::string& path, const std::string& out, std::size_t threads) {
    const auto cfg = bz::load_config(path);
    const auto result = bz::run_experiment(cfg, threads);
    const auto conv = bz::resolve_conventions();
    const std::filesystem::path dir = out.empty() ? bz::output_root() / bz::run_name(cfg) : std::filesystem::path(out);
    bz::write_run(dir, result, conv, bz::detail::resolve_threads(threads, cfg.seeds.count));

    const auto& f = result.final_point();
    std::printf("%s\n", dir.string().c_str());
    std::printf("N = %llu, estimate = %.12g %+.12gi, standard error = %.3g\n", static_cast<unsigned long long>(f.N),
                f.pooled.real(), f.pooled.imag(), f.se());
    for (const auto& ref : result.references)
        std::printf("  %-36s %.12g %+.12gi  (%.2f standard errors)\n", ref.name.c_str(), ref.value.real(),
                    ref.value.imag(), f.se() > 0 ? std::abs(f.pooled - ref.value) / f.se() : 0.0);
    for (const auto& d : result.diagnostics) std::printf("  note: %s\n", d.c_str());
    const auto flags = bz::quality_flags(result);
    for (const auto& fl : flags) std::fprintf(stderr, "flag: %s\n", fl.c_str());
    return flags.empty() ? kExitOk : kExitFlagged;
}

int cmd_report(const std::string& dir, const std::string& format) {
    bz::ReportFormat fmt = bz::ReportFormat::csv;
    if (format == "json") fmt = bz::ReportFormat::json;
    else if (format == "gnuplot") fmt = bz::ReportFormat::gnuplot;
    std::cout << bz::render_report(bz::load_report(dir), fmt);
    return kExitOk;
}

int cmd_list_families() {
    std::cout << "riemann             family.k (derivative order, 0.." << bz::kMaxDerivative << ")\n"
              << "hurwitz             family.k, family.a in [0,1); zeta(s,a) = sum_{n>=1} (n+a)^-s\n"
              << "dirichlet_l         family.k, family.character = principal (family.modulus) |\n"
              << "                    kronecker (family.discriminant) | table (family.values.re, family.values.im)\n"
              << "dedekind_quadratic  family.discriminant (fundamental discriminant D); zeta_K = zeta * L(chi_D)\n"
              << "constant            family.value.re, family.value.im (test stub)\n";
    return kExitOk;
}

int cmd_check_sequence(const std::string& path) {
    const auto cfg = bz::load_config(path);
    bz::json j;
    const auto count = static_cast<std::size_t>(cfg.schedule.back());
    if (cfg.kind == bz::ExperimentKind::moving_average) {
        const auto spec = bz::stoltz_windows(cfg.windows, std::min<std::size_t>(count, 2000));
        const auto est = bz::stoltz_cone_estimate(spec, 1, 1.0, 1000);
        j["windows"] = spec.windows.size();
        j["cone"] = bz::json{{"A", est.A}, {"A_half", est.A_half}, {"argmax_lambda", est.argmax_lambda},
                             {"non_cone", est.non_cone},
                             {"statement", est.non_cone ? "cone count grows with lambda_max"
                                                        : "cone-consistent up to lambda_max = 1000"}};
        if (cfg.windows.kind == bz::StoltzKind::Kind::sublinear) {
            std::vector<double> grid;
            for (int i = 0; i <= 60; ++i) grid.push_back(std::pow(10.0, -6.0 + 0.1 * i));
            const auto adm = bz::sublinear_admissibility(cfg.windows.growth, grid);
            j["admissibility"] = bz::json{{"sup_K", adm.sup}, {"argmax_theta", adm.argmax}};
        }
    } else {
        const auto idx = bz::generate_indices(cfg.sequence, count);
        j["sequence"] = bz::sequence_name(cfg.sequence);
        j["count"] = idx.size();
        j["first"] = std::vector<bz::Index>(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(idx.size(), 10)));
        j["largest"] = *std::max_element(idx.begin(), idx.end());
        j["increasing"] = std::is_sorted(idx.begin(), idx.end()) && std::adjacent_find(idx.begin(), idx.end()) == idx.end();
        const double thetas[] = {std::numbers::sqrt2, std::numbers::phi, std::numbers::pi - 3.0};
        const char* names[] = {"sqrt2", "golden_ratio", "pi_mod_1"};
        bz::json hf = bz::json::object();
        for (int i = 0; i < 3; ++i) hf[names[i]] = std::abs(bz::hartman_F(idx, thetas[i]));
        j["hartman_abs_F"] = hf;
        bz::json res = bz::json::array();
        for (std::uint64_t m = 2; m <= 7; ++m) {
            const auto h = bz::residue_test(idx, m);
            res.push_back(bz::json{{"m", m}, {"frequencies", h.frequencies}, {"max_deviation", h.max_deviation}});
        }
        j["residues"] = res;
    }
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_oracle(const std::string& path) {
    const auto cfg = bz::load_config(path);
    bz::json j;
    j["family"] = bz::describe(cfg.family);
    j["s"] = bz::complex_json(cfg.s);
    j["map"] = bz::json{{"alpha", cfg.params.alpha}, {"beta", cfg.params.beta}};
    j["transform"] = bz::to_string(cfg.transform);
    bool flagged = false;
    if (cfg.transform == bz::Transform::identity && !bz::is_constant_family(cfg.family)) {
        try {
            const auto cf = bz::closed_form_limit({cfg.family, cfg.s, cfg.params});
            j["closed_form"] = bz::json{{"value", bz::complex_json(cf.value)}, {"region", bz::to_string(cf.region)}};
        } catch (const std::invalid_argument& e) {
            j["closed_form"] = bz::json{{"unavailable", e.what()}};
        }
    }
    const auto q = bz::cauchy_quadrature(bz::detail::integrand_of(cfg), cfg.s, cfg.params, cfg.quadrature);
    flagged = q.flagged;
    j["quadrature"] = bz::json{{"value", bz::complex_json(q.value)},
                               {"error", q.error},
                               {"quadrature_error", q.quadrature_error},
                               {"tail_uncertainty", q.tail_uncertainty},
                               {"tail", bz::complex_json(q.tail)},
                               {"tail_model", bz::to_string(q.tail_model)},
                               {"principal_value", q.principal_value},
                               {"evaluations", q.evaluations},
                               {"flagged", q.flagged}};
    j["conventions"] = bz::conventions_json(bz::resolve_conventions());
    std::cout << j.dump(2) << "\n";
    return flagged ? kExitFlagged : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"boolezeta: zeta functions sampled along Boole-map orbits"};
    app.set_version_flag("--version", std::string(BOOLEZETA_VERSION));
    app.require_subcommand(1);
    std::size_t threads = 0;
    app.add_option("--threads", threads, "Maximum worker threads (0 = hardware concurrency)");

    std::string config_path, out_dir, run_dir, format = "csv";
    auto* run = app.add_subcommand("run", "Run an experiment and write manifest.json, series.csv, summary.json");
    run->add_option("config", config_path, "Configuration file")->required();
    run->add_option("--out", out_dir, "Run directory (default: $BOOLEZETA_OUTPUT_ROOT/<kind>-<hash>)");

    auto* report = app.add_subcommand("report", "Estimate-versus-reference table of a finished run");
    report->add_option("dir", run_dir, "Run directory")->required();
    report->add_option("--format", format, "csv, json or gnuplot")->check(CLI::IsMember({"csv", "json", "gnuplot"}));

    auto* list = app.add_subcommand("list-families", "List the supported function families");
    auto* check = app.add_subcommand("check-sequence", "Equidistribution and cone diagnostics for a config's indices");
    check->add_option("config", config_path, "Configuration file")->required();
    auto* oracle = app.add_subcommand("oracle", "Closed form and quadrature reference only (no sampling)");
    oracle->add_option("config", config_path, "Configuration file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (*run) return cmd_run(config_path, out_dir, threads);
        if (*report) return cmd_report(run_dir, format);
        if (*list) return cmd_list_families();
        if (*check) return cmd_check_sequence(config_path);
        if (*oracle) return cmd_oracle(config_path);
    } catch (const bz::config_error& e) {
        std::fprintf(stderr, "invalid configuration: %s\n", e.what());
        return kExitInvalid;
    } catch (const bz::report_error& e) {
        std::fprintf(stderr, "invalid run directory: %s\n", e.what());
        return kExitInvalid;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFailure;
    }
    return kExitFailure;
}
