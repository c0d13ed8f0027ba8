#include "nmrcage/stochastic.hpp"

#include "nmrcage/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <thread>

namespace nmrcage {

namespace {

constexpr std::size_t kMaxBlocks = 32;

// Per-grid-point running mean and sum of squared deviations.
struct BlockMoments {
    std::size_t count = 0;
    std::vector<double> mean;
    std::vector<double> m2;

    explicit BlockMoments(std::size_t n) : mean(n, 0.0), m2(n, 0.0) {}

    void add(const std::vector<double>& x)
    {
        ++count;
        const double inv = 1.0 / static_cast<double>(count);
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double delta = x[k] - mean[k];
            mean[k] += delta * inv;
            m2[k] += delta * (x[k] - mean[k]);
        }
    }

    void merge(const BlockMoments& other)
    {
        if (other.count == 0) {
            return;
        }
        const double na = static_cast<double>(count);
        const double nb = static_cast<double>(other.count);
        const double n = na + nb;
        for (std::size_t k = 0; k < mean.size(); ++k) {
            const double delta = other.mean[k] - mean[k];
            mean[k] += delta * nb / n;
            m2[k] += other.m2[k] + delta * delta * na * nb / n;
        }
        count += other.count;
    }
};

} // namespace

void McConfig::validate(const GaussianFluctuationModel& model) const
{
    require(n_trajectories >= 1, "mc: n_trajectories must be at least 1");
    require(grid.n >= 2, "mc: grid needs at least two points");
    require(grid.dt > 0.0 && std::isfinite(grid.dt), "mc: grid dt must be positive");
    if (!model.frozen()) {
        require(grid.dt <= model.tau_c() / 10.0 * (1.0 + 1e-12), "mc: grid dt must not exceed tau_c / 10");
    }
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream_id)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)};
    return std::mt19937_64(seq);
}

CouplingTrajectory sample_ou_trajectory(const GaussianFluctuationModel& model, const TimeGrid& grid,
                                        std::mt19937_64& rng)
{
    require(grid.n >= 2, "sample_ou_trajectory: grid needs at least two points");
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sigma = std::sqrt(model.variance());
    std::vector<double> d(grid.n);
    double delta = sigma * normal(rng);
    if (model.frozen()) {
        std::fill(d.begin(), d.end(), model.mean_d() + delta);
        return {grid.t0, grid.dt, std::move(d)};
    }
    const double x = grid.dt / model.tau_c();
    const double decay = std::exp(-x);
    const double kick = sigma * std::sqrt(-std::expm1(-2.0 * x));
    d[0] = model.mean_d() + delta;
    for (std::size_t k = 1; k < grid.n; ++k) {
        delta = delta * decay + kick * normal(rng);
        d[k] = model.mean_d() + delta;
    }
    return {grid.t0, grid.dt, std::move(d)};
}

CouplingTrajectory sample_ou_trajectory(const GaussianFluctuationModel& model, const TimeGrid& grid,
                                        std::uint64_t seed, std::uint64_t stream_id)
{
    auto rng = make_stream(seed, stream_id);
    return sample_ou_trajectory(model, grid, rng);
}

McResult mc_average_fid(const GaussianFluctuationModel& model, const SpinEnsemble& ens, const McConfig& cfg)
{
    cfg.validate(model);
    const std::size_t n_points = cfg.grid.n;
    const std::size_t n_blocks = std::min(kMaxBlocks, cfg.n_trajectories);
    std::vector<BlockMoments> blocks(n_blocks, BlockMoments(n_points));

    auto run_block = [&](std::size_t b) {
        const std::size_t begin = b * cfg.n_trajectories / n_blocks;
        const std::size_t end = (b + 1) * cfg.n_trajectories / n_blocks;
        std::vector<double> f(n_points);
        for (std::size_t i = begin; i < end; ++i) {
            auto rng = make_stream(cfg.seed, i);
            const auto phi = phase_shift(sample_ou_trajectory(model, cfg.grid, rng));
            for (std::size_t k = 0; k < n_points; ++k) {
                f[k] = cfg.form == AveragedForm::LargeN ? fid_large_n(phi[k], ens) : fid_exact(phi[k], ens);
            }
            blocks[b].add(f);
        }
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const auto n_threads = static_cast<unsigned>(std::min<std::size_t>(cfg.threads == 0 ? hw : cfg.threads, n_blocks));
    if (n_threads <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) {
            run_block(b);
        }
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < n_threads; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t b = w; b < n_blocks; b += n_threads) {
                    run_block(b);
                }
            });
        }
    }

    BlockMoments total(n_points);
    for (const auto& block : blocks) {
        total.merge(block);
    }

    McResult result;
    result.mean = FidSeries{cfg.grid.t0, cfg.grid.dt, std::move(total.mean)};
    result.std_error.assign(n_points, 0.0);
    if (total.count > 1) {
        const double n = static_cast<double>(total.count);
        for (std::size_t k = 0; k < n_points; ++k) {
            result.std_error[k] = std::sqrt(std::max(0.0, total.m2[k]) / ((n - 1.0) * n));
        }
    }
    return result;
}

std::complex<double> exact_trace_fid_complex(double phi, int n_spins)
{
    require(n_spins >= 2 && n_spins <= 14, "exact_trace_fid: n_spins must lie in [2, 14]");
    const auto n = static_cast<unsigned>(n_spins);
    const std::uint32_t n_states = 1u << n;
    auto iz = [&](std::uint32_t state) { return std::popcount(state) - 0.5 * n_spins; };

    std::complex<double> numerator = 0.0;
    double denominator = 0.0;
    for (std::uint32_t s = 0; s < n_states; ++s) {
        const double m_s = iz(s);
        // <s| I+ P I- |s>: lower spin j, then raise spin i; only i == j returns to s.
        for (unsigned j = 0; j < n; ++j) {
            if (!(s & (1u << j))) {
                continue;
            }
            const std::uint32_t lowered = s ^ (1u << j);
            const double m_t = iz(lowered);
            for (unsigned i = 0; i < n; ++i) {
                if (lowered & (1u << i)) {
                    continue;
                }
                if ((lowered | (1u << i)) != s) {
                    continue;
                }
                numerator += std::polar(1.0, 3.0 * phi * (m_s * m_s - m_t * m_t));
                denominator += 1.0;
            }
        }
    }
    return numerator / denominator;
}

double exact_trace_fid(double phi, int n_spins)
{
    return exact_trace_fid_complex(phi, n_spins).real();
}

} // namespace nmrcage
