// sdmc command line: run simulations from scene documents, slice result grids,
// and reproduce the built-in validation experiments.

#include "sdmc/optics.hpp"
#include "sdmc/scene_io.hpp"
#include "sdmc/transport.hpp"
#include "sdmc/validation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitFailedCheck = 1;
constexpr int kExitParse = 2;
constexpr int kExitValidation = 3;
constexpr int kExitIo = 4;
constexpr int kExitFormat = 5;

sdmc::ParsedScene load_or_die_later(const std::string& path)
{
    auto parsed = sdmc::load_scene(path);
    for (const auto& warning : parsed.warnings)
        std::cerr << "warning: " << warning << "\n";
    return parsed;
}

void write_summary(const sdmc::SimulationResult& result, const fs::path& path)
{
    const auto& t = result.tallies;
    json doc;
    doc["photons"] = result.n_photons;
    doc["wall_seconds"] = result.wall_seconds;
    doc["escaped_weight"] = t.escaped_weight;
    doc["absorbed_weight"] = t.absorbed_weight;
    doc["steplimit_residual_weight"] = t.steplimit_residual;
    doc["roulette_net_weight"] = t.roulette_net;
    doc["accounted_weight"] = result.accounted_weight();
    doc["face_escaped_weight"] = {{"-x", t.face_escaped_weight[0]},
                                  {"+x", t.face_escaped_weight[1]},
                                  {"-y", t.face_escaped_weight[2]},
                                  {"+y", t.face_escaped_weight[3]},
                                  {"-z", t.face_escaped_weight[4]},
                                  {"+z", t.face_escaped_weight[5]}};
    doc["packets"] = {{"escaped", t.n_escaped},
                      {"absorbed", t.n_absorbed},
                      {"step_limit", t.n_steplimit}};
    doc["mean_scatters"] = result.mean_scatters();
    doc["total_sdf_evals"] = t.total_sdf_evals;
    doc["emission_nudges"] = t.n_emission_nudges;
    doc["out_of_grid_deposits"] = result.grid.discarded();
    std::ofstream out(path);
    out << doc.dump(2) << "\n";
}

int run_command(const std::string& config, std::optional<std::int64_t> photons,
                std::optional<std::uint64_t> seed, std::optional<int> workers,
                const std::string& out_dir)
{
    auto parsed = load_or_die_later(config);
    sdmc::Scene& scene = parsed.scene;
    if (photons) scene.run.n_photons = *photons;
    if (seed) scene.run.seed = *seed;
    if (workers) scene.run.workers = *workers;
    sdmc::validate_scene(scene);

    const sdmc::SimulationResult result = sdmc::run_simulation(scene);

    fs::create_directories(out_dir);
    sdmc::GridData grid;
    grid.dims = result.grid.dims();
    grid.extents = result.grid.extents();

    grid.kind = sdmc::GridKind::Fluence;
    grid.values = result.grid.fluence(result.n_photons);
    sdmc::write_grid(grid, fs::path(out_dir) / "fluence.grid");

    grid.kind = sdmc::GridKind::Absorption;
    grid.values = result.grid.absorbed();
    sdmc::write_grid(grid, fs::path(out_dir) / "absorption.grid");

    grid.kind = sdmc::GridKind::SdfEvals;
    grid.values.assign(result.grid.sdf_evals().begin(), result.grid.sdf_evals().end());
    sdmc::write_grid(grid, fs::path(out_dir) / "sdf_evals.grid");

    write_summary(result, fs::path(out_dir) / "summary.json");

    if (scene.run.workers > 0)
        std::printf("%lld photons in %.2f s (%d workers)\n",
                    static_cast<long long>(result.n_photons), result.wall_seconds,
                    scene.run.workers);
    else
        std::printf("%lld photons in %.2f s (all hardware threads)\n",
                    static_cast<long long>(result.n_photons), result.wall_seconds);
    std::printf("escaped weight   %.6g\n", result.tallies.escaped_weight);
    std::printf("absorbed weight  %.6g\n", result.tallies.absorbed_weight);
    std::printf("results under %s\n", out_dir.c_str());
    return 0;
}

int slice_command(const std::string& grid_path, const std::string& axis_name, int index,
                  const std::string& out_path)
{
    const sdmc::GridData grid = sdmc::read_grid(grid_path);
    int axis = -1;
    if (axis_name == "x") axis = 0;
    else if (axis_name == "y") axis = 1;
    else if (axis_name == "z") axis = 2;
    else throw sdmc::ValidationError("slice: axis must be x, y or z");
    const sdmc::Slice slice = sdmc::extract_slice(grid.values, grid.dims, axis, index);
    sdmc::write_slice_csv(slice, out_path);
    std::printf("wrote %dx%d slice to %s\n", slice.n_rows, slice.n_cols, out_path.c_str());
    return 0;
}

int scatter_count_command(std::int64_t photons, std::uint64_t seed, int workers, bool bench)
{
    const std::vector<double> taus{0.1, 1.0, 5.0, 10.0, 50.0};
    bool all_pass = true;
    std::printf("%8s %14s %14s %12s %10s  %s\n", "tau", "measured", "predicted",
                "std_error", "rel_dev", "verdict");
    for (std::size_t i = 0; i < taus.size(); ++i) {
        // the thickest sphere costs ~tau^2/2 interactions per photon
        const std::int64_t n = taus[i] >= 50.0 ? photons / 10 : photons;
        const auto rows = sdmc::mean_scatter_experiment({taus[i]}, n, seed, workers);
        const auto& row = rows.front();
        const double tolerance = std::max(3.0 * row.std_error, 0.02 * row.predicted);
        const bool pass = std::abs(row.measured - row.predicted) <= tolerance;
        all_pass = all_pass && pass;
        std::printf("%8.2f %14.5f %14.5f %12.5f %9.3f%%  %s\n", row.tau, row.measured,
                    row.predicted, row.std_error,
                    100.0 * std::abs(row.measured - row.predicted) / row.predicted,
                    pass ? "PASS" : "FAIL");
        if (bench)
            std::printf("[bench] tau %.2f: %lld photons\n", row.tau,
                        static_cast<long long>(row.n_photons));
    }
    std::printf("scatter-count: %s\n", all_pass ? "PASS" : "FAIL");
    return all_pass ? 0 : kExitFailedCheck;
}

int jacques_command(int wavelength, const std::string& config,
                    std::optional<std::int64_t> photons, const std::string& csv_path,
                    bool free_delta_only, bool bench)
{
    auto parsed = load_or_die_later(config);
    sdmc::Scene& scene = parsed.scene;
    if (photons) scene.run.n_photons = *photons;

    // the tissue medium is the single SDF root
    const sdmc::OpticalProps tissue = scene.materials[scene.roots.at(0)->material];
    const double delta_analytic =
        sdmc::penetration_depth(tissue.mu_a, tissue.mu_s, tissue.g);

    const sdmc::SimulationResult result = sdmc::run_simulation(scene);
    if (bench)
        std::printf("[bench] jacques %d nm: %.2f s for %lld photons\n", wavelength,
                    result.wall_seconds, static_cast<long long>(result.n_photons));

    // recover the illuminated tissue surface by probing down the central axis
    const double tissue_top = [&] {
        const sdmc::Vec3 center = scene.bounds.center();
        const double span = scene.bounds.hi.z() - scene.bounds.lo.z();
        for (double z = scene.bounds.hi.z(); z > scene.bounds.lo.z(); z -= 1e-4 * span) {
            if (sdmc::current_material(scene, {center.x(), center.y(), z}) != scene.ambient)
                return z;
        }
        return scene.bounds.hi.z();
    }();

    const auto fluence = result.grid.fluence(result.n_photons);
    auto profile = sdmc::depth_profile(fluence, result.grid.dims(), result.grid.extents(),
                                       tissue_top);
    // fit over the first few penetration depths where the statistics are solid
    std::vector<sdmc::DepthSample> window;
    for (const auto& s : profile)
        if (s.z <= 5.0 * delta_analytic) window.push_back(s);

    const sdmc::FitResult free_fit = sdmc::fit_fluence_depth(window, std::nullopt);
    const double rel_dev = std::abs(free_fit.params.delta - delta_analytic) / delta_analytic;
    const bool pass = rel_dev <= 0.10 && !free_fit.degenerate;

    std::printf("analytic penetration depth  %.4f cm\n", delta_analytic);
    std::printf("fitted penetration depth    %.4f cm (free-delta fit, %s)\n",
                free_fit.params.delta, free_fit.converged ? "converged" : "not converged");
    std::printf("relative deviation          %.2f%%\n", 100.0 * rel_dev);
    if (!free_delta_only) {
        const sdmc::FitResult fixed_fit = sdmc::fit_fluence_depth(window, delta_analytic);
        std::printf("fixed-delta fit             C1=%.3f k1=%.3f C2=%.3f k2=%.3f\n",
                    fixed_fit.params.c1, fixed_fit.params.k1, fixed_fit.params.c2,
                    fixed_fit.params.k2);
    }

    std::ofstream csv(csv_path);
    csv.precision(10);
    csv << "z_cm,measured,model\n";
    for (const auto& s : window)
        csv << s.z << ',' << s.psi << ',' << sdmc::fluence_depth_model(s.z, free_fit.params)
            << '\n';
    std::printf("profile written to %s\n", csv_path.c_str());
    std::printf("jacques %d nm: %s\n", wavelength, pass ? "PASS" : "FAIL");
    return pass ? 0 : kExitFailedCheck;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"signed-distance-function Monte Carlo radiative transfer"};
    app.require_subcommand(1);

    // run
    std::string config, out_dir = "out";
    std::optional<std::int64_t> photons;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    auto* run = app.add_subcommand("run", "simulate a scene document");
    run->add_option("--config", config, "scene document path")->required();
    run->add_option("--photons", photons, "override run.photons");
    run->add_option("--seed", seed, "override run.seed");
    run->add_option("--workers", workers, "override run.workers");
    run->add_option("--out", out_dir, "output directory");

    // slice
    std::string grid_path, axis = "z", csv_out = "slice.csv";
    int index = 0;
    auto* slice = app.add_subcommand("slice", "extract a 2D plane from a grid file");
    slice->add_option("--grid", grid_path, "grid file path")->required();
    slice->add_option("--axis", axis, "x, y or z")->required();
    slice->add_option("--index", index, "plane index")->required();
    slice->add_option("--out", csv_out, "CSV output path");

    // validate-config
    std::string check_path;
    auto* check = app.add_subcommand("validate-config", "parse and validate a scene document");
    check->add_option("path", check_path, "scene document path")->required();

    // validate
    auto* validate = app.add_subcommand("validate", "reproduce the built-in benchmarks");
    validate->require_subcommand(1);
    std::int64_t v_photons = 1000000;
    std::uint64_t v_seed = 20260808;
    int v_workers = 0;
    bool bench = false;
    auto* scatter = validate->add_subcommand("scatter-count",
                                             "mean scatterings in an isotropic sphere");
    scatter->add_option("--photons", v_photons, "photons per tau (tau=50 uses 1/10)");
    scatter->add_option("--seed", v_seed, "rng seed");
    scatter->add_option("--workers", v_workers, "worker threads (0 = auto)");
    scatter->add_flag("--bench", bench, "print timing lines");

    int wavelength = 420;
    std::string j_config, j_csv;
    std::optional<std::int64_t> j_photons;
    bool free_delta_only = false;
    auto* jacques = validate->add_subcommand("jacques", "slab depth-fluence comparison");
    jacques->add_option("--wavelength", wavelength, "420 or 630")
        ->check(CLI::IsMember({420, 630}));
    jacques->add_option("--config", j_config, "scene document (defaults per wavelength)");
    jacques->add_option("--photons", j_photons, "override run.photons");
    jacques->add_option("--out", j_csv, "profile CSV path");
    jacques->add_flag("--free-delta-only", free_delta_only, "skip the fixed-delta fit");
    jacques->add_flag("--bench", bench, "print timing lines");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return run_command(config, photons, seed, workers, out_dir);
        if (slice->parsed())
            return slice_command(grid_path, axis, index, csv_out);
        if (check->parsed()) {
            auto parsed = load_or_die_later(check_path);
            std::printf("ok: %zu material(s), %zu SDF root(s), %lld photons\n",
                        parsed.scene.materials.size(), parsed.scene.roots.size(),
                        static_cast<long long>(parsed.scene.run.n_photons));
            return 0;
        }
        if (scatter->parsed())
            return scatter_count_command(v_photons, v_seed, v_workers, bench);
        if (jacques->parsed()) {
            if (j_config.empty())
                j_config = "scenes/jacques_" + std::to_string(wavelength) + ".json";
            if (j_csv.empty())
                j_csv = "jacques_" + std::to_string(wavelength) + ".csv";
            return jacques_command(wavelength, j_config, j_photons, j_csv, free_delta_only,
                                   bench);
        }
    } catch (const sdmc::ParseError& err) {
        std::cerr << "error[parse]: " << err.what() << "\n";
        return kExitParse;
    } catch (const sdmc::ValidationError& err) {
        std::cerr << "error[validation]: " << err.what() << "\n";
        return kExitValidation;
    } catch (const sdmc::FormatError& err) {
        std::cerr << "error[format]: " << err.what() << "\n";
        return kExitFormat;
    } catch (const std::ios_base::failure& err) {
        std::cerr << "error[io]: " << err.what() << "\n";
        return kExitIo;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitFailedCheck;
    }
    return 0;
}
