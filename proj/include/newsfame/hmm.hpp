#pragma once

#include "newsfame/dist_fit.hpp"
#include "newsfame/pulse.hpp"
#include "newsfame/series.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace newsfame {

enum class NewsState : std::uint8_t { normal, peak };

/// Hidden state per day, aligned to the series indices.
struct StatePath {
    std::vector<NewsState> states;

    std::size_t size() const noexcept { return states.size(); }
    std::size_t peak_days() const;
};

/// Two-state news generator.
///
/// Transition matrix rows are (1 - beta, beta) from Normal and
/// (gamma, 1 - gamma) from Peak, so each row sums to one by construction.
/// Normal days draw ln(1 + f) from `normal_log_fame`; each Peak run replays
/// one pulse whose height and rise time come from the two peak distributions.
struct HmmModel {
    double beta = 0.01;
    double gamma = 0.2;
    LogNormalFit normal_log_fame;
    LogNormalFit peak_height_dist;
    LogNormalFit rise_time_dist;

    /// Throws unless 0 <= beta <= 1, 0 < gamma <= 1 and the fits are valid.
    /// With require_beta_below_gamma the trained-model check beta < gamma applies too.
    void validate(bool require_beta_below_gamma = false) const;
};

/// Days inside any pulse extent are Peak, the rest Normal.
StatePath label_states(std::size_t length, std::span<const Pulse> pulses);
StatePath label_states(const FrequencySeries& series, std::span<const Pulse> pulses);

struct TrainOptions {
    /// Reject models whose beta is not below gamma.
    bool enforce_beta_below_gamma = true;
    /// Sigma used when a distribution has a single sample or zero spread.
    double point_mass_sigma = 1e-6;
};

/// Transition counts over consecutive day pairs give beta and gamma; the
/// normal-state fit uses ln(1 + f) over Normal days; the peak distributions are
/// fitted to the pulses' heights and rise times.
HmmModel train_hmm(const FrequencySeries& series, const StatePath& path, std::span<const Pulse> pulses,
                   const TrainOptions& options = {});

/// Convenience: detect and fit pulses, label states and train.
HmmModel train_hmm(const FrequencySeries& series, const PulseDetectionParams& params,
                   const TrainOptions& options = {});

struct Simulation {
    std::vector<double> frequencies;
    StatePath path;
    /// Height H of the pulse being replayed on each Peak day, 0 on Normal days.
    std::vector<double> peak_heights;
    /// Generation record: one entry per replayed pulse (residual 0; the last
    /// one may be cut short by the end of the run).
    std::vector<Pulse> pulses;
};

/// Level below which a replayed pulse counts as finished: the normal-state
/// median frequency, floored at half a reference per day.
double pulse_exit_level(const HmmModel& model);

/// Number of Peak days a pulse (H, q) occupies in simulation: day 1 always,
/// then every further day t while t <= q or the pulse value stays at or above
/// `exit_level`.
std::size_t pulse_duration(double height, double rise_days, double exit_level);

/// Runs the generator for `days` days starting in Normal, using a
/// std::mt19937_64 seeded with `seed`. Normal days emit exp(draw) - 1 clamped
/// at 0; on Peak entry (H, q) are drawn (q floored at 0.5) and the pulse is
/// replayed until pulse_duration ends it, after which the chain resumes in
/// Normal. gamma does not drive the simulation; see effective_gamma.
Simulation simulate(const HmmModel& model, std::size_t days, std::uint64_t seed);

FrequencySeries simulate_series(const HmmModel& model, std::size_t days, std::uint64_t seed,
                                const std::string& entity_id, Date start_date);

/// beta / (beta + gamma).
double stationary_peak_prob(const HmmModel& model);

/// 1 / beta, the expected number of days from Normal to the first Peak day.
double expected_hitting_time(const HmmModel& model);

/// Peak-exit probability implied by the pulse-replay rule: 1 / E[pulse_duration],
/// with the expectation estimated from `samples` seeded (H, q) draws.
double effective_gamma(const HmmModel& model, std::size_t samples, std::uint64_t seed);

} // namespace newsfame
