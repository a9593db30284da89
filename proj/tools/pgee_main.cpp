#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pgee/inference.hpp"
#include "pgee/io.hpp"
#include "pgee/linalg.hpp"
#include "pgee/simulate.hpp"
#include "pgee/tuning.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

std::string base_dir(const std::string& config_path) {
    const fs::path p(config_path);
    return p.has_parent_path() ? p.parent_path().string() : ".";
}

std::vector<double> curve_grid(double t_domain, int points = 200) {
    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i) grid[i] = t_domain * i / (points - 1.0);
    return grid;
}

int run_check(const std::string& config_path, const std::string& out_dir) {
    const pgee::RunConfig cfg = pgee::RunConfig::parse_file(config_path);
    const pgee::CrossoverDesign design = cfg.design(base_dir(config_path));
    const pgee::ModelSpec spec = cfg.model_spec();
    const pgee::EstimabilityReport report = pgee::check_estimability(design, spec.basis);

    std::cout << "estimable: " << (report.estimable ? "true" : "false")
              << ", rank " << report.rank_found << "/" << report.rank_required << "\n";
    for (const auto& a : report.assumption_results)
        std::cout << "  " << a.id << ": " << (a.pass ? "pass" : "FAIL") << " (" << a.detail << ")\n";
    for (const auto& [pair, count] : report.per_pair_active_counts)
        std::cout << "  active[" << pair << "] = " << count << "\n";

    json j;
    j["estimable"] = report.estimable;
    j["rank_found"] = report.rank_found;
    j["rank_required"] = report.rank_required;
    j["note"] = report.note;
    for (const auto& a : report.assumption_results)
        j["assumptions"][a.id] = {{"pass", a.pass}, {"detail", a.detail}};
    for (const auto& [pair, count] : report.per_pair_active_counts)
        j["active_counts"][pair] = count;

    fs::create_directories(out_dir);
    std::ofstream(fs::path(out_dir) / "report.json") << j.dump(2) << "\n";
    return report.estimable ? kExitOk : kExitValidation;
}

void write_estimates(const pgee::GeeProblem& pb, const pgee::FitResult& fit,
                     const fs::path& path) {
    std::vector<std::vector<std::string>> rows;
    const Eigen::VectorXd params = fit.full_params();
    const int q = pb.n_params();
    auto se_for = [&](int col) {
        if (col < pb.p_beta) return std::sqrt(std::max(fit.vcov_beta(col, col), 0.0));
        const int rel = col - pb.p_beta;
        const int block = rel / pb.d;
        const int off = rel % pb.d;
        const Eigen::MatrixXd& v = block == 0 ? fit.vcov_theta : fit.vcov_theta_c[block - 1];
        return std::sqrt(std::max(v(off, off), 0.0));
    };
    for (int c = 0; c < q; ++c) {
        const double est = params[c];
        const double se = se_for(c);
        const double z = se > 0 ? est / se : 0.0;
        const double p = se > 0 ? 2.0 * pgee::normal_sf(std::abs(z)) : 1.0;
        rows.push_back({pb.column_names[c], pgee::format_double(est), pgee::format_double(se),
                        pgee::format_double(z), pgee::format_double(p)});
    }
    pgee::write_csv(path.string(), {"name", "estimate", "robust_se", "z", "p"}, rows);
}

void write_curves(const pgee::GeeProblem& pb, const pgee::FitResult& fit,
                  const fs::path& path) {
    const auto grid = curve_grid(pb.spec.basis.t_domain);
    std::vector<std::vector<std::string>> rows;
    auto emit = [&](const std::string& id, pgee::BlockRef block) {
        const pgee::CurveBand band = pgee::curve_band(pb, fit, block, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double est = band.estimate[static_cast<Eigen::Index>(i)];
            auto bounds = [&](double level) {
                const double h = band.half_widths.at(level)[static_cast<Eigen::Index>(i)];
                return std::pair{est - h, est + h};
            };
            const auto [lo90, hi90] = bounds(0.90);
            const auto [lo95, hi95] = bounds(0.95);
            const auto [lo99, hi99] = bounds(0.99);
            rows.push_back({id, pgee::format_double(grid[i]), pgee::format_double(est),
                            pgee::format_double(lo90), pgee::format_double(hi90),
                            pgee::format_double(lo95), pgee::format_double(hi95),
                            pgee::format_double(lo99), pgee::format_double(hi99)});
        }
    };
    emit("time", pgee::BlockRef::time());
    for (int c = 0; c < pb.n_carry; ++c)
        emit("carryover:" + pb.pairs[c].label(), pgee::BlockRef::carry(c));
    pgee::write_csv(path.string(),
                    {"curve_id", "time", "estimate", "lo90", "hi90", "lo95", "hi95", "lo99", "hi99"},
                    rows);
}

int run_fit(const std::string& config_path, const std::string& data_path,
            const std::string& out_dir, bool force) {
    const pgee::RunConfig cfg = pgee::RunConfig::parse_file(config_path);
    const pgee::CrossoverDesign design = cfg.design(base_dir(config_path));
    pgee::ModelSpec spec = cfg.model_spec();
    if (force) spec.allow_rank_deficient = true;

    const pgee::LongDataset data = pgee::parse_long_csv_file(data_path);
    auto [y, denom] = pgee::align_response(data, design);
    const pgee::GeeProblem pb = pgee::GeeProblem::from_design(design, spec, y, denom);
    const pgee::FitResult fit = pgee::fit(pb);
    if (!fit.converged && !force) {
        std::cerr << "fit did not converge after " << fit.iterations
                  << " iterations (use --force to emit anyway)\n";
        return kExitNumerical;
    }

    fs::create_directories(out_dir);
    write_estimates(pb, fit, fs::path(out_dir) / "estimates.csv");
    write_curves(pb, fit, fs::path(out_dir) / "curves.csv");

    std::ofstream meta(fs::path(out_dir) / "fit_meta");
    meta << "iterations=" << fit.iterations << "\n"
         << "converged=" << (fit.converged ? "true" : "false") << "\n"
         << "dispersion=" << pgee::format_double(fit.dispersion) << "\n"
         << "p_effective=" << pgee::format_double(fit.p_effective) << "\n";
    for (Eigen::Index i = 0; i < fit.alpha.alpha.size(); ++i)
        meta << "alpha" << i + 1 << "=" << pgee::format_double(fit.alpha.alpha[i]) << "\n";
    meta << "qic=" << pgee::format_double(pgee::qic(pb, fit)) << "\n";

    std::cout << "converged=" << (fit.converged ? "true" : "false")
              << " iterations=" << fit.iterations
              << " dispersion=" << fit.dispersion << "\n";
    return kExitOk;
}

int run_tune(const std::string& config_path, const std::string& data_path,
             const std::string& criterion_name, const std::string& out_dir) {
    const pgee::RunConfig cfg = pgee::RunConfig::parse_file(config_path);
    const pgee::CrossoverDesign design = cfg.design(base_dir(config_path));
    const pgee::ModelSpec spec = cfg.model_spec();
    const pgee::LongDataset data = pgee::parse_long_csv_file(data_path);
    auto [y, denom] = pgee::align_response(data, design);
    const pgee::GeeProblem pb = pgee::GeeProblem::from_design(design, spec, y, denom);

    pgee::TuningGrid grid = pgee::TuningGrid::default_grid();
    if (cfg.has("tuning.grid")) {
        grid.lambda_values.clear();
        std::stringstream ss(cfg.get("tuning.grid"));
        std::string cell;
        while (std::getline(ss, cell, ',')) grid.lambda_values.push_back(std::stod(cell));
    }
    const pgee::Criterion crit = pgee::parse_criterion(criterion_name);
    const pgee::TuningResult result =
        pgee::select_lambdas(pb, grid, crit, cfg.get_int("tuning.sweeps", 1));

    fs::create_directories(out_dir);
    std::vector<std::string> header{"lambda_time"};
    for (const auto& pair : pb.pairs) header.push_back("lambda_" + pair.label());
    header.push_back("score");
    header.push_back("converged");
    std::vector<std::vector<std::string>> rows;
    auto entry_row = [&](const pgee::TuningEntry& e) {
        std::vector<std::string> row{pgee::format_double(e.lambda_time)};
        for (double l : e.lambda_carry) row.push_back(pgee::format_double(l));
        row.push_back(pgee::format_double(e.score));
        row.push_back(e.converged ? "true" : "false");
        return row;
    };
    for (const auto& e : result.table) rows.push_back(entry_row(e));
    pgee::write_csv((fs::path(out_dir) / "tuning.csv").string(), header, rows);
    pgee::write_csv((fs::path(out_dir) / "tuning_selected.csv").string(), header,
                    {entry_row(result.selected)});

    std::cout << "criterion=" << pgee::criterion_name(crit)
              << " selected lambda_time=" << result.selected.lambda_time << "\n";
    for (const auto& [pair, l] : result.per_effect_lambda)
        std::cout << "  lambda[" << pair << "] = " << l << "\n";
    return kExitOk;
}

int run_simulate(const std::string& preset, int replicates, std::uint64_t seed,
                 const std::string& models_csv, const std::string& out_dir,
                 bool bspline) {
    pgee::SimulationScenario sc;
    sc.replicates = replicates;
    sc.seed = seed;
    sc.use_bspline_basis = bspline;
    if (preset == "paper-L20-n10") {
        sc.L = 20;
        sc.n_per_sequence = 10;
    } else if (preset == "paper-L10-n2") {
        sc.L = 10;
        sc.n_per_sequence = 2;
    } else if (!preset.empty()) {
        throw pgee::ConfigError("unknown preset: " + preset);
    }

    std::vector<pgee::ComparatorModel> models;
    if (models_csv.empty()) {
        models = {pgee::ComparatorModel::GeeMain, pgee::ComparatorModel::GamTime,
                  pgee::ComparatorModel::GeeCarry, pgee::ComparatorModel::GeeInt,
                  pgee::ComparatorModel::GeeSmooth, pgee::ComparatorModel::GeeSpline};
    } else {
        std::stringstream ss(models_csv);
        std::string cell;
        while (std::getline(ss, cell, ',')) models.push_back(pgee::parse_model(cell));
    }

    const std::vector<double> beta1_values{-1.0, 0.0, 1.0};
    std::vector<pgee::SimulationSummary> summaries;
    for (double b1 : beta1_values) {
        pgee::SimulationScenario s = sc;
        s.beta1 = b1;
        s.seed = sc.seed + static_cast<std::uint64_t>(std::llround(b1 + 2.0)) * 1000003ULL;
        summaries.push_back(pgee::run_monte_carlo(s, models));
    }

    fs::create_directories(out_dir);
    std::vector<std::vector<std::string>> rows;
    for (std::size_t m = 0; m < models.size(); ++m) {
        std::vector<std::string> row{std::to_string(sc.L), std::to_string(sc.n_per_sequence),
                                     pgee::model_name(models[m])};
        for (const auto& s : summaries) row.push_back(pgee::format_double(s.models[m].mean_estimate));
        for (const auto& s : summaries) row.push_back(pgee::format_double(s.models[m].coverage));
        for (const auto& s : summaries) row.push_back(pgee::format_double(s.models[m].rmse));
        rows.push_back(std::move(row));
    }
    pgee::write_csv((fs::path(out_dir) / "summary.csv").string(),
                    {"L", "n", "model", "estimate_beta1_m1", "estimate_beta1_0", "estimate_beta1_p1",
                     "coverage_beta1_m1", "coverage_beta1_0", "coverage_beta1_p1",
                     "rmse_beta1_m1", "rmse_beta1_0", "rmse_beta1_p1"},
                    rows);
    std::cout << "wrote " << (fs::path(out_dir) / "summary.csv").string() << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Penalized semiparametric GEE for crossover designs with carry-over effects"};
    app.require_subcommand(1);

    std::string config_path, data_path, out_dir = ".", criterion = "qic";
    std::string preset, models_csv;
    int replicates = 200;
    std::uint64_t seed = 20240101;
    bool force = false, bspline = false;

    auto* check = app.add_subcommand("check", "Certify estimability of a design/basis pair");
    check->add_option("--config", config_path, "run config file")->required();
    check->add_option("--out", out_dir, "output directory");

    auto* fit_cmd = app.add_subcommand("fit", "Fit the penalized GEE model");
    fit_cmd->add_option("--config", config_path, "run config file")->required();
    fit_cmd->add_option("--data", data_path, "long-format CSV")->required();
    fit_cmd->add_option("--out", out_dir, "output directory");
    fit_cmd->add_flag("--force", force, "fit despite rank deficiency or non-convergence");

    auto* tune = app.add_subcommand("tune", "Select smoothing parameters on a grid");
    tune->add_option("--config", config_path, "run config file")->required();
    tune->add_option("--data", data_path, "long-format CSV")->required();
    tune->add_option("--criterion", criterion, "qic | loco | gcv");
    tune->add_option("--out", out_dir, "output directory");

    auto* sim = app.add_subcommand("simulate", "Run the AB/BA Monte Carlo study");
    sim->add_option("--preset", preset, "paper-L20-n10 | paper-L10-n2");
    sim->add_option("--replicates", replicates, "replicates per scenario");
    sim->add_option("--seed", seed, "RNG seed");
    sim->add_option("--models", models_csv, "comma-separated model list");
    sim->add_option("--out", out_dir, "output directory");
    sim->add_flag("--bspline", bspline, "use the cubic B-spline preset basis");

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed()) return run_check(config_path, out_dir);
        if (fit_cmd->parsed()) return run_fit(config_path, data_path, out_dir, force);
        if (tune->parsed()) return run_tune(config_path, data_path, criterion, out_dir);
        if (sim->parsed()) return run_simulate(preset, replicates, seed, models_csv, out_dir, bspline);
    } catch (const pgee::SingularSystem& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const pgee::SingularBread& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const pgee::NotPositiveDefinite& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const pgee::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
