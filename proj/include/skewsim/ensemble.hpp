#pragma once

/// @file ensemble.hpp
/// @brief Path-parallel ensembles with results independent of worker count.
///
/// Every path is a pure function of (seed, path index), results land in a
/// slot indexed by path, and all reductions fold in index order afterwards.

#include "skewsim/core.hpp"
#include "skewsim/girsanov.hpp"
#include "skewsim/skew_chain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace skewsim {

/// Evaluates fn(j) for j = 0..count-1 on `threads` workers (0 = hardware
/// concurrency) and returns the results in index order.
template <typename Fn>
auto parallel_map(std::int64_t count, unsigned threads, Fn&& fn) -> std::vector<std::invoke_result_t<Fn&, std::int64_t>> {
    using Result = std::invoke_result_t<Fn&, std::int64_t>;
    std::vector<Result> out(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)));
    if (count <= 0) return out;
    if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::int64_t>(threads, count));
    if (threads == 1) {
        for (std::int64_t j = 0; j < count; ++j) out[static_cast<std::size_t>(j)] = fn(j);
        return out;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::int64_t j = t; j < count; j += threads) out[static_cast<std::size_t>(j)] = fn(j);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

/// Terminal data of one path, with local time at requested grid indices.
struct TerminalSample {
    std::vector<double> x;          // X-bar(T)
    double local_time = 0.0;        // L-bar(T)
    std::vector<double> local_time_at;
    double weight = 1.0;            // Girsanov weight; 1 for zero drift
};

/// Runs `paths` paths and keeps only terminal data. Checkpoints are grid
/// indices k (time k / n) and must be sorted.
template <SurfaceField F, DriftField A>
std::vector<TerminalSample> run_terminal(const ChainSetup& setup, const F& field, const A& drift, std::int64_t paths,
                                         unsigned threads, std::vector<std::int64_t> checkpoints = {},
                                         bool with_drift = true) {
    const double inv_root = 1.0 / std::sqrt(static_cast<double>(setup.n));
    const double dt = 1.0 / static_cast<double>(setup.n);
    const std::size_t d = setup.dim;
    return parallel_map(paths, threads, [&](std::int64_t j) {
        TerminalSample s;
        s.local_time_at.assign(checkpoints.size(), 0.0);
        if (d == 1 && !with_drift) {
            std::vector<std::int64_t> lt(checkpoints.size());
            const auto [x, l] = walk_chain_1d(setup, field, static_cast<std::uint64_t>(j), checkpoints, lt);
            s.x = {static_cast<double>(x) * inv_root};
            s.local_time = static_cast<double>(l) * inv_root;
            for (std::size_t c = 0; c < lt.size(); ++c) s.local_time_at[c] = static_cast<double>(lt[c]) * inv_root;
            return s;
        }
        GirsanovAccumulator acc(drift, dt);
        std::vector<double> xs(d), dws(d);
        std::vector<std::int64_t> x(setup.start);
        std::int64_t l = 0;
        std::size_t next_cp = 0;
        walk_chain(setup, field, static_cast<std::uint64_t>(j), [&](const StepEvent& e) {
            while (next_cp < checkpoints.size() && checkpoints[next_cp] == e.k)
                s.local_time_at[next_cp++] = static_cast<double>(l) * inv_root;
            if (with_drift) {
                for (std::size_t i = 0; i < d; ++i) {
                    xs[i] = static_cast<double>(e.state[i]) * inv_root;
                    dws[i] = static_cast<double>(e.dw[i]) * inv_root;
                }
                acc.add(xs, dws);
            }
            for (std::size_t i = 0; i < d; ++i) x[i] = e.state[i] + e.dx[i];
            if (e.on_surface) ++l;
        });
        while (next_cp < checkpoints.size() && checkpoints[next_cp] <= setup.steps)
            s.local_time_at[next_cp++] = static_cast<double>(l) * inv_root;
        s.x.resize(d);
        for (std::size_t i = 0; i < d; ++i) s.x[i] = static_cast<double>(x[i]) * inv_root;
        s.local_time = static_cast<double>(l) * inv_root;
        s.weight = with_drift ? acc.weight() : 1.0;
        return s;
    });
}

/// Terminal ensemble for a validated config (field and drift from the config).
inline std::vector<TerminalSample> run_terminal(const ValidatedConfig& cfg, unsigned threads,
                                                std::vector<std::int64_t> checkpoints = {}) {
    return run_terminal(ChainSetup::from(cfg), cfg.field(), cfg.drift(), cfg.paths(), threads, std::move(checkpoints),
                        !cfg.drift().is_zero());
}

/// Column i of the terminal positions.
inline std::vector<double> terminal_coordinate(const std::vector<TerminalSample>& samples, std::size_t i) {
    std::vector<double> out(samples.size());
    for (std::size_t j = 0; j < samples.size(); ++j) out[j] = samples[j].x[i];
    return out;
}

}  // namespace skewsim
