#pragma once

#include "rcm/connection.hpp"
#include "rcm/graph.hpp"
#include "rcm/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rcm {

struct WalkStats {
    std::size_t start = 0;
    std::size_t horizon = 0;
    std::size_t returns_to_start = 0;
    std::optional<std::size_t> first_return_time;
    std::size_t range = 0;  ///< distinct vertices visited, start included
};

/// Transition probabilities out of v, aligned with graph.neighbors(v):
/// P(v -> w) = c(v, w) / c(v).
std::vector<double> transition_row(const WeightedGraph& graph, std::size_t v);

/// One step of the conductance-weighted walk.
std::size_t walk_step(const WeightedGraph& graph, std::size_t v, Rng& rng);

WalkStats simulate_walk(const WeightedGraph& graph, std::size_t start, std::size_t horizon, const RngStream& stream);

enum class SolverMethod { iterative, dense_oracle };
std::string to_string(SolverMethod m);

struct SolverOptions {
    SolverMethod method = SolverMethod::iterative;
    double relative_tolerance = 1e-10;
    /// Conjugate-gradient iteration cap = factor * sqrt(vertex count).
    double iteration_cap_factor = 50.0;
    /// Largest reduced system the dense oracle accepts.
    std::size_t dense_limit = 500;
};

struct ResistanceResult {
    double value = 0.0;  ///< +infinity when no sink is reachable from the source
    double residual = 0.0;
    SolverMethod method = SolverMethod::iterative;
    std::size_t iterations = 0;
    bool connected = true;
    /// Potentials of all vertices under unit current from source, sinks at 0
    /// (vertices outside the source's component carry 0).
    std::vector<double> potential;
};

/// Effective resistance between source and the sink set (collapsed to one
/// grounded node). Throws NumericalError when the solver misses tolerance.
ResistanceResult effective_resistance(const WeightedGraph& graph, std::size_t source,
                                      std::span<const std::uint32_t> sinks, const SolverOptions& options = {});

/// Probability that the walk from source reaches the sinks before returning
/// to source: 1 / (c(source) * R_eff).
double escape_probability(const WeightedGraph& graph, std::size_t source, std::span<const std::uint32_t> sinks,
                          const SolverOptions& options = {});

struct EscapeEstimate {
    std::size_t walks = 0;
    std::size_t escapes = 0;
    [[nodiscard]] double frequency() const { return walks ? static_cast<double>(escapes) / static_cast<double>(walks) : 0.0; }
};

/// Monte Carlo frequency of hitting the sinks before returning to source.
EscapeEstimate estimate_escape_frequency(const WeightedGraph& graph, std::size_t source,
                                         std::span<const std::uint32_t> sinks, std::size_t walks,
                                         const RngStream& stream);

struct GrowthRow {
    std::size_t replica = 0;
    int radius = 0;
    double r_eff = 0.0;
    double residual = 0.0;
    bool dropped = false;
};

struct GrowthProfile {
    std::vector<int> radii;
    std::vector<GrowthRow> rows;  ///< replica-major, one row per (replica, radius)
    std::vector<double> mean;     ///< per radius, over kept replicas
    std::vector<double> std_error;
    std::size_t kept = 0;
    std::size_t dropped = 0;
    std::size_t resamples = 0;  ///< extra samples drawn because the origin missed the largest cluster
};

struct GrowthOptions {
    double half_width = 0.0;  ///< simulation box [-h, h]^d; 0 selects 1.25 * max radius + 4
    int max_attempts = 100;
    SolverOptions solver;
    EdgeSamplingOptions sampling;
};

/// Effective resistance from the Palm origin to the vertices of its cluster
/// outside [-n, n]^d, for each radius n, averaged over replicas. Replicas
/// whose origin is not in the largest cluster are redrawn up to
/// max_attempts times and then dropped.
GrowthProfile resistance_growth_profile(const ConnectionSpec& spec, double rho, const std::vector<int>& radii,
                                        std::size_t replicas, const RngStream& stream,
                                        const GrowthOptions& options = {});

}  // namespace rcm
