#include "sdmc/transport.hpp"

#include <chrono>
#include <exception>
#include <thread>
#include <vector>

namespace sdmc {

SimulationResult run_simulation(const Scene& scene)
{
    validate_scene(scene);

    int workers = scene.run.workers;
    if (workers == 0)
        workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const std::int64_t n_photons = scene.run.n_photons;
    workers = static_cast<int>(std::min<std::int64_t>(workers, n_photons));

    std::vector<RecordGrid> grids;
    std::vector<Tallies> tallies(workers);
    grids.reserve(workers);
    for (int w = 0; w < workers; ++w)
        grids.emplace_back(scene.grid.dims, scene.bounds);

    const auto t0 = std::chrono::steady_clock::now();

    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        const std::int64_t share = n_photons / workers + (w < n_photons % workers ? 1 : 0);
        pool.emplace_back([&, w, share] {
            try {
                Rng rng(scene.run.seed, static_cast<std::uint64_t>(w));
                for (std::int64_t i = 0; i < share; ++i)
                    simulate_packet(scene, rng, grids[w], tallies[w]);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& thread : pool) thread.join();
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);

    const auto t1 = std::chrono::steady_clock::now();

    for (int w = 1; w < workers; ++w) {
        grids[0].merge(grids[w]);
        tallies[0].merge(tallies[w]);
    }

    SimulationResult result{std::move(grids[0]), tallies[0], n_photons,
                            std::chrono::duration<double>(t1 - t0).count()};
    return result;
}

}  // namespace sdmc
