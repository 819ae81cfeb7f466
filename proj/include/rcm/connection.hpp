#pragma once

#include "rcm/pointprocess.hpp"
#include "rcm/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rcm {

enum class KernelKind { polynomial_tail, truncated, blob };
enum class Norm { one, two };
enum class Boundary { free, periodic };

std::string to_string(KernelKind kind);
std::string to_string(Norm norm);
std::string to_string(Boundary boundary);
KernelKind parse_kernel_kind(const std::string& s);
Norm parse_norm(const std::string& s);
Boundary parse_boundary(const std::string& s);

double norm_of(std::span<const double> x, Norm norm);

/// Connection function g. The polynomial-tail kernel is
/// g(x) = 1 - exp(-|x|^-alpha); the truncated one multiplies by 1{|x| <= M};
/// the blob kernel is 1{|x| <= R}. g(0) = 1 for every kind.
class ConnectionSpec {
public:
    /// Polynomial tail, d = 2, alpha = 4, one-norm.
    ConnectionSpec() : ConnectionSpec(KernelKind::polynomial_tail, 2, 4.0, 0.0, 0.0, Norm::one) {}

    static ConnectionSpec polynomial_tail(int dim, double alpha, Norm norm = Norm::one);
    static ConnectionSpec truncated(int dim, double alpha, double trunc_m, Norm norm = Norm::one);
    static ConnectionSpec blob(int dim, double radius, Norm norm = Norm::one);

    [[nodiscard]] KernelKind kind() const { return kind_; }
    [[nodiscard]] int dim() const { return dim_; }
    [[nodiscard]] double alpha() const { return alpha_; }
    [[nodiscard]] double trunc_m() const { return trunc_m_; }
    [[nodiscard]] double blob_r() const { return blob_r_; }
    [[nodiscard]] Norm norm() const { return norm_; }

    /// g as a function of |x| (all supported kernels are radial in the chosen norm).
    [[nodiscard]] double profile(double r) const;
    /// Radius beyond which g vanishes; infinity for the polynomial tail.
    [[nodiscard]] double support_radius() const;

    friend bool operator==(const ConnectionSpec&, const ConnectionSpec&) = default;

private:
    ConnectionSpec(KernelKind kind, int dim, double alpha, double trunc_m, double blob_r, Norm norm);

    KernelKind kind_;
    int dim_;
    double alpha_;
    double trunc_m_;
    double blob_r_;
    Norm norm_;
};

double eval_connection(const ConnectionSpec& spec, std::span<const double> displacement);

/// Displacement x_i - x_j, wrapped to the minimal image on a torus.
void displacement(const PointCloud& cloud, std::size_t i, std::size_t j, Boundary boundary, std::span<double> out);

struct EdgeList {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;  ///< i < j, sorted
    ConnectionSpec spec;
    Boundary boundary = Boundary::free;
    RngStream stream;
    std::size_t point_count = 0;
    bool cell_sampler = false;  ///< true when the accelerated sampler produced the list

    [[nodiscard]] std::size_t size() const { return pairs.size(); }
};

struct EdgeSamplingOptions {
    Boundary boundary = Boundary::free;
    /// Exact O(n^2) sweep up to this many pairs; beyond it the cell sampler runs.
    std::uint64_t pair_budget = 50'000'000;
    /// Hard cap on the cell sampler's candidate count (0 = unlimited).
    std::uint64_t candidate_budget = 2'000'000'000;
};

/// Each unordered pair {i, j} becomes an edge independently with probability
/// g(X_i - X_j).
EdgeList sample_edges(const PointCloud& cloud, const ConnectionSpec& spec, const RngStream& stream,
                      const EdgeSamplingOptions& options = {});

struct IntegralReport {
    double value = 0.0;           ///< at the base truncation
    double error_estimate = 0.0;
    bool converged = false;
    std::vector<double> truncations;  ///< T, 2T, 4T
    std::vector<double> values;
    std::vector<double> differences;  ///< values[k+1] - values[k]
};

/// Double integral of g(x - y) over y in region_a and x in W \ region_a,
/// where W is the box of half-width `truncation` around the centre of
/// region_a (d = 2). Reported at T, 2T and 4T.
IntegralReport integrate_connection(const ConnectionSpec& spec, const Region& region_a, double truncation,
                                    double tol = 1e-6);

/// Double integral of g(x - y) over y in quadrant qa and x in quadrant qb
/// (1-based, clockwise starting from {x, y >= 0}), each clipped to
/// [-T, T]^2. Reported at T, 2T and 4T.
IntegralReport integrate_quadrant_pair(const ConnectionSpec& spec, int qa, int qb, double truncation,
                                       double tol = 1e-6);

/// Double integral of g(x - y) for y in a, x in b (two boxes, d = 2).
struct BoxPairIntegral {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = false;
};
BoxPairIntegral integrate_box_pair(const ConnectionSpec& spec, const Region& a, const Region& b, double tol = 1e-6);

struct MeanDegree {
    double value = 0.0;
    double kernel_integral = 0.0;  ///< integral of g over R^d
    double error_estimate = 0.0;
    bool converged = false;
};

/// rho times the integral of g over R^d (expected degree of the Palm origin).
MeanDegree mean_degree_prediction(const ConnectionSpec& spec, double rho, double tol = 1e-9);

/// Appends "EDGES m=.. kind=.. alpha=.. M=.. R=.. norm=.. boundary=.. seed=.. stream=.."
/// and one "i j" line per edge.
void write_edges(std::ostream& out, const EdgeList& edges);
EdgeList read_edges(std::istream& in, std::size_t point_count);

}  // namespace rcm
