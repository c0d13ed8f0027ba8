#pragma once

// Numerical oracles: exact Ornstein-Uhlenbeck sampling of the coupling noise,
// Monte Carlo ensemble averages of the FID, and the exact small-N spin trace.

#include "nmrcage/fid.hpp"
#include "nmrcage/model.hpp"

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace nmrcage {

/// Name of the random stream construction, recorded in output metadata.
inline constexpr const char* kRngAlgorithm =
    "std::mt19937_64 per trajectory, seeded with std::seed_seq{seed_lo, seed_hi, index_lo, index_hi}; "
    "std::normal_distribution";

/// Which FID each trajectory contributes to the average.
enum class AveragedForm { LargeN, Exact };

struct McConfig {
    std::size_t n_trajectories = 1;
    std::uint64_t seed = 0;
    TimeGrid grid;
    unsigned threads = 1;
    AveragedForm form = AveragedForm::LargeN;

    /// Checks n_trajectories >= 1, grid.n >= 2 and dt <= tau_c / 10.
    void validate(const GaussianFluctuationModel& model) const;
};

struct McResult {
    FidSeries mean;
    std::vector<double> std_error;
};

/// Independent generator for trajectory `stream_id`; identical inputs give
/// identical streams regardless of which thread consumes them.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream_id);

/// One realization of D(t) = <D> + dD(t). dD starts from its stationary
/// distribution and advances with the exact exponential-correlation
/// transition; tau_c = +inf holds a single draw fixed over the grid.
CouplingTrajectory sample_ou_trajectory(const GaussianFluctuationModel& model, const TimeGrid& grid,
                                        std::mt19937_64& rng);

CouplingTrajectory sample_ou_trajectory(const GaussianFluctuationModel& model, const TimeGrid& grid,
                                        std::uint64_t seed, std::uint64_t stream_id);

/// Pointwise mean and standard error of the FID over sampled trajectories.
/// Trajectories are reduced in fixed blocks and merged in block order, so
/// the result is bit-identical for any thread count.
McResult mc_average_fid(const GaussianFluctuationModel& model, const SpinEnsemble& ens, const McConfig& cfg);

/// tr{exp(i 3 phi Iz^2) I+ exp(-i 3 phi Iz^2) I-} / tr{I+ I-}, summed over all
/// 2^N product states for 2 <= n_spins <= 14.
std::complex<double> exact_trace_fid_complex(double phi, int n_spins);

/// Real part of exact_trace_fid_complex.
double exact_trace_fid(double phi, int n_spins);

} // namespace nmrcage
