#include "rcm/connection.hpp"

#include "rcm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rcm {

std::string to_string(KernelKind kind) {
    switch (kind) {
        case KernelKind::polynomial_tail: return "polynomial_tail";
        case KernelKind::truncated: return "truncated";
        case KernelKind::blob: return "blob";
    }
    return "?";
}

std::string to_string(Norm norm) { return norm == Norm::one ? "one_norm" : "two_norm"; }
std::string to_string(Boundary boundary) { return boundary == Boundary::free ? "free" : "periodic"; }

KernelKind parse_kernel_kind(const std::string& s) {
    if (s == "polynomial_tail" || s == "poly") return KernelKind::polynomial_tail;
    if (s == "truncated") return KernelKind::truncated;
    if (s == "blob") return KernelKind::blob;
    throw std::invalid_argument("unknown kernel kind '" + s + "'");
}

Norm parse_norm(const std::string& s) {
    if (s == "one_norm" || s == "one" || s == "1") return Norm::one;
    if (s == "two_norm" || s == "two" || s == "2") return Norm::two;
    throw std::invalid_argument("unknown norm '" + s + "'");
}

Boundary parse_boundary(const std::string& s) {
    if (s == "free") return Boundary::free;
    if (s == "periodic" || s == "torus") return Boundary::periodic;
    throw std::invalid_argument("unknown boundary '" + s + "'");
}

double norm_of(std::span<const double> x, Norm norm) {
    double s = 0.0;
    if (norm == Norm::one) {
        for (double v : x) s += std::abs(v);
        return s;
    }
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

ConnectionSpec::ConnectionSpec(KernelKind kind, int dim, double alpha, double trunc_m, double blob_r, Norm norm)
    : kind_(kind), dim_(dim), alpha_(alpha), trunc_m_(trunc_m), blob_r_(blob_r), norm_(norm) {
    if (dim < 1) throw std::invalid_argument("connection: dim must be >= 1");
    if (kind != KernelKind::blob) {
        if (!std::isfinite(alpha) || !(alpha > dim)) {
            throw std::invalid_argument("connection: alpha must exceed the dimension (got alpha=" +
                                        format_double(alpha) + ", d=" + std::to_string(dim) + ")");
        }
    }
    if (kind == KernelKind::truncated && !(trunc_m > 0.0 && std::isfinite(trunc_m))) {
        throw std::invalid_argument("connection: truncation radius M must be > 0");
    }
    if (kind == KernelKind::blob && !(blob_r > 0.0 && std::isfinite(blob_r))) {
        throw std::invalid_argument("connection: blob radius R must be > 0");
    }
}

ConnectionSpec ConnectionSpec::polynomial_tail(int dim, double alpha, Norm norm) {
    return {KernelKind::polynomial_tail, dim, alpha, 0.0, 0.0, norm};
}

ConnectionSpec ConnectionSpec::truncated(int dim, double alpha, double trunc_m, Norm norm) {
    return {KernelKind::truncated, dim, alpha, trunc_m, 0.0, norm};
}

ConnectionSpec ConnectionSpec::blob(int dim, double radius, Norm norm) {
    return {KernelKind::blob, dim, 0.0, 0.0, radius, norm};
}

double ConnectionSpec::profile(double r) const {
    if (r <= 0.0) return 1.0;
    switch (kind_) {
        case KernelKind::blob: return r <= blob_r_ ? 1.0 : 0.0;
        case KernelKind::truncated:
            if (r > trunc_m_) return 0.0;
            [[fallthrough]];
        case KernelKind::polynomial_tail: return -std::expm1(-std::pow(r, -alpha_));
    }
    return 0.0;
}

double ConnectionSpec::support_radius() const {
    switch (kind_) {
        case KernelKind::blob: return blob_r_;
        case KernelKind::truncated: return trunc_m_;
        case KernelKind::polynomial_tail: break;
    }
    return std::numeric_limits<double>::infinity();
}

double eval_connection(const ConnectionSpec& spec, std::span<const double> x) {
    return spec.profile(norm_of(x, spec.norm()));
}

void displacement(const PointCloud& cloud, std::size_t i, std::size_t j, Boundary boundary, std::span<double> out) {
    auto a = cloud.point(i);
    auto b = cloud.point(j);
    for (std::size_t k = 0; k < a.size(); ++k) {
        double dx = a[k] - b[k];
        if (boundary == Boundary::periodic) {
            const double period = cloud.region().width(static_cast<int>(k));
            dx -= period * std::nearbyint(dx / period);
        }
        out[k] = dx;
    }
}

// ---------------------------------------------------------------------------
// Edge sampling
// ---------------------------------------------------------------------------

namespace {

using PairList = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

PairList sweep_pairs(const PointCloud& cloud, const ConnectionSpec& spec, const RngStream& stream, Boundary boundary) {
    Rng rng(stream);
    PairList pairs;
    std::vector<double> dx(cloud.dim());
    const std::size_t n = cloud.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            displacement(cloud, i, j, boundary, dx);
            const double p = eval_connection(spec, dx);
            if (p <= 0.0) continue;
            if (p >= 1.0 || rng.uniform() < p) {
                pairs.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
            }
        }
    }
    return pairs;
}

// Cell-pair sampler. Points are binned into K_a equal cells per axis. For a
// pair of cells the kernel at their minimal separation bounds g for every
// point pair across them; candidates are drawn at that bound by geometric
// skipping and thinned by the exact kernel, which keeps each pair's
// inclusion probability exactly g.
PairList cell_pairs(const PointCloud& cloud, const ConnectionSpec& spec, const RngStream& stream,
                    const EdgeSamplingOptions& options) {
    const int d = cloud.dim();
    const std::size_t n = cloud.size();
    const auto& region = cloud.region();

    const double target_cells = std::clamp(static_cast<double>(n) / 8.0, 1.0, 8000.0);
    const double side = std::pow(region.volume() / target_cells, 1.0 / d);
    std::vector<std::size_t> per_axis(d);
    std::vector<double> width(d);
    std::size_t cells = 1;
    for (int a = 0; a < d; ++a) {
        per_axis[a] = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(region.width(a) / side)));
        width[a] = region.width(a) / static_cast<double>(per_axis[a]);
        cells *= per_axis[a];
    }

    // Bucket points by cell, keeping index order inside each cell.
    std::vector<std::size_t> cell_of(n);
    std::vector<std::size_t> start(cells + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        auto p = cloud.point(i);
        std::size_t flat = 0;
        for (int a = 0; a < d; ++a) {
            const double t = std::floor((p[a] - region.lo()[a]) / width[a]);
            std::size_t idx = t <= 0.0 ? 0 : std::min(per_axis[a] - 1, static_cast<std::size_t>(t));
            flat = flat * per_axis[a] + idx;
        }
        cell_of[i] = flat;
        ++start[flat + 1];
    }
    for (std::size_t c = 0; c < cells; ++c) start[c + 1] += start[c];
    std::vector<std::uint32_t> members(n);
    {
        std::vector<std::size_t> fill(start.begin(), start.end() - 1);
        for (std::size_t i = 0; i < n; ++i) members[fill[cell_of[i]]++] = static_cast<std::uint32_t>(i);
    }

    std::vector<std::size_t> coords(cells * d);
    for (std::size_t c = 0; c < cells; ++c) {
        std::size_t rest = c;
        for (int a = d - 1; a >= 0; --a) {
            coords[c * d + a] = rest % per_axis[a];
            rest /= per_axis[a];
        }
    }

    // Kernel bound per absolute cell offset.
    const bool periodic = options.boundary == Boundary::periodic;
    std::vector<double> bound(cells);
    {
        std::vector<double> gap(d);
        for (std::size_t c = 0; c < cells; ++c) {
            for (int a = 0; a < d; ++a) {
                std::size_t off = coords[c * d + a];
                if (periodic) off = std::min(off, per_axis[a] - off);
                gap[a] = off == 0 ? 0.0 : static_cast<double>(off - 1) * width[a];
            }
            bound[c] = spec.profile(norm_of(gap, spec.norm()));
        }
    }

    PairList pairs;
    std::vector<double> dx(d);
    std::uint64_t candidates = 0;
    auto consider = [&](Rng& rng, std::uint32_t i, std::uint32_t j, double cap) {
        ++candidates;
        displacement(cloud, i, j, options.boundary, dx);
        const double p = eval_connection(spec, dx);
        if (p <= 0.0) return;
        if (p >= cap || rng.uniform() * cap < p) {
            pairs.emplace_back(std::min(i, j), std::max(i, j));
        }
    };

    for (std::size_t ca = 0; ca < cells; ++ca) {
        const std::size_t na = start[ca + 1] - start[ca];
        if (na == 0) continue;
        Rng rng(substream(stream, "cell-row", ca));
        for (std::size_t cb = ca; cb < cells; ++cb) {
            const std::size_t nb = start[cb + 1] - start[cb];
            if (nb == 0) continue;
            std::size_t offset = 0;
            for (int a = 0; a < d; ++a) {
                const auto ia = coords[ca * d + a];
                const auto ib = coords[cb * d + a];
                offset = offset * per_axis[a] + (ia > ib ? ia - ib : ib - ia);
            }
            const double cap = bound[offset];
            if (cap <= 0.0) continue;
            const std::uint32_t* A = members.data() + start[ca];
            const std::uint32_t* B = members.data() + start[cb];
            if (ca == cb) {
                for (std::size_t u = 0; u < na; ++u)
                    for (std::size_t v = u + 1; v < na; ++v) consider(rng, A[u], A[v], 1.0);
                continue;
            }
            const std::uint64_t m = static_cast<std::uint64_t>(na) * nb;
            if (cap > 0.25) {
                for (std::size_t u = 0; u < na; ++u)
                    for (std::size_t v = 0; v < nb; ++v) consider(rng, A[u], B[v], 1.0);
                continue;
            }
            std::uint64_t pos = rng.geometric_skip(cap);
            while (pos < m) {
                consider(rng, A[pos / nb], B[pos % nb], cap);
                const std::uint64_t skip = rng.geometric_skip(cap);
                if (skip >= m) break;
                pos += skip + 1;
            }
        }
        if (options.candidate_budget != 0 && candidates > options.candidate_budget) {
            throw std::invalid_argument("sample_edges: candidate budget exceeded");
        }
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

}  // namespace

EdgeList sample_edges(const PointCloud& cloud, const ConnectionSpec& spec, const RngStream& stream,
                      const EdgeSamplingOptions& options) {
    if (cloud.empty()) throw std::invalid_argument("sample_edges: cloud is empty");
    if (cloud.dim() != spec.dim()) throw std::invalid_argument("sample_edges: kernel and cloud dimension differ");
    if (cloud.size() > 0xffffffffULL) throw std::invalid_argument("sample_edges: too many points");

    EdgeList out;
    out.spec = spec;
    out.boundary = options.boundary;
    out.stream = stream;
    out.point_count = cloud.size();
    const double n = static_cast<double>(cloud.size());
    if (n * (n - 1.0) / 2.0 <= static_cast<double>(options.pair_budget)) {
        out.pairs = sweep_pairs(cloud, spec, stream, options.boundary);
    } else {
        out.pairs = cell_pairs(cloud, spec, stream, options);
        out.cell_sampler = true;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Quadrature of g over box pairs
// ---------------------------------------------------------------------------

namespace {

struct Interval {
    double lo, hi;
};

// Length of {y in a : y + z in b}.
double overlap(const Interval& a, const Interval& b, double z) {
    return std::max(0.0, std::min(a.hi, b.hi - z) - std::max(a.lo, b.lo - z));
}

void push_breaks(std::vector<double>& out, const Interval& a, const Interval& b) {
    out.insert(out.end(), {b.lo - a.hi, b.lo - a.lo, b.hi - a.hi, b.hi - a.lo});
}

// Integral over z of g(z) * w(z), w = sum_k sign_k * prod_axis overlap(a_k, b_k, z).
struct WeightTerm {
    double sign;
    Interval a[2];
    Interval b[2];
};

BoxPairIntegral integrate_weighted(const ConnectionSpec& spec, const std::vector<WeightTerm>& terms, double tol) {
    if (spec.dim() != 2) throw std::invalid_argument("box-pair quadrature is implemented for d = 2");

    double z1_lo = std::numeric_limits<double>::infinity();
    double z1_hi = -z1_lo;
    std::vector<double> breaks1;
    std::vector<double> breaks2;
    double z2_lo = std::numeric_limits<double>::infinity();
    double z2_hi = -z2_lo;
    for (const auto& t : terms) {
        z1_lo = std::min(z1_lo, t.b[0].lo - t.a[0].hi);
        z1_hi = std::max(z1_hi, t.b[0].hi - t.a[0].lo);
        z2_lo = std::min(z2_lo, t.b[1].lo - t.a[1].hi);
        z2_hi = std::max(z2_hi, t.b[1].hi - t.a[1].lo);
        push_breaks(breaks1, t.a[0], t.b[0]);
        push_breaks(breaks2, t.a[1], t.b[1]);
    }
    const double rs = spec.support_radius();
    breaks1.push_back(0.0);
    breaks2.push_back(0.0);
    if (std::isfinite(rs)) {
        z1_lo = std::max(z1_lo, -rs);
        z1_hi = std::min(z1_hi, rs);
        z2_lo = std::max(z2_lo, -rs);
        z2_hi = std::min(z2_hi, rs);
        breaks1.insert(breaks1.end(), {-rs, rs});
    }
    if (!(z1_hi > z1_lo) || !(z2_hi > z2_lo)) return {0.0, 0.0, true};

    const double inner_tol = std::max(1e-15, tol / (10.0 * (z1_hi - z1_lo)));
    bool inner_ok = true;
    double inner_err = 0.0;

    auto weight = [&](double z1, double z2) {
        double w = 0.0;
        for (const auto& t : terms) w += t.sign * overlap(t.a[0], t.b[0], z1) * overlap(t.a[1], t.b[1], z2);
        return w;
    };

    auto outer = [&](double z1) {
        std::vector<double> br = breaks2;
        if (std::isfinite(rs)) {
            const double reach = spec.norm() == Norm::one ? rs - std::abs(z1) : std::sqrt(std::max(0.0, rs * rs - z1 * z1));
            br.push_back(-reach);
            br.push_back(reach);
        }
        auto inner = [&](double z2) {
            const double w = weight(z1, z2);
            if (w == 0.0) return 0.0;
            const double z[2] = {z1, z2};
            return eval_connection(spec, z) * w;
        };
        const auto r = quad::integrate(inner, z2_lo, z2_hi, br, inner_tol, 400);
        inner_ok = inner_ok && r.converged;
        inner_err = std::max(inner_err, r.error);
        return r.value;
    };

    const auto r = quad::integrate(outer, z1_lo, z1_hi, breaks1, tol * 0.5, 4000);
    BoxPairIntegral out;
    out.value = r.value;
    out.error_estimate = r.error + inner_err * (z1_hi - z1_lo);
    out.converged = r.converged && inner_ok;
    return out;
}

WeightTerm term(double sign, const Region& a, const Region& b) {
    return WeightTerm{sign, {{a.lo()[0], a.hi()[0]}, {a.lo()[1], a.hi()[1]}}, {{b.lo()[0], b.hi()[0]}, {b.lo()[1], b.hi()[1]}}};
}

IntegralReport report_over_truncations(double truncation, const std::function<BoxPairIntegral(double)>& at) {
    IntegralReport rep;
    rep.converged = true;
    for (int k = 0; k < 3; ++k) {
        const double t = truncation * std::pow(2.0, k);
        const auto r = at(t);
        rep.truncations.push_back(t);
        rep.values.push_back(r.value);
        rep.error_estimate = std::max(rep.error_estimate, r.error_estimate);
        rep.converged = rep.converged && r.converged;
    }
    for (std::size_t k = 0; k + 1 < rep.values.size(); ++k) rep.differences.push_back(rep.values[k + 1] - rep.values[k]);
    rep.value = rep.values.front();
    return rep;
}

}  // namespace

BoxPairIntegral integrate_box_pair(const ConnectionSpec& spec, const Region& a, const Region& b, double tol) {
    if (a.dim() != 2 || b.dim() != 2) throw std::invalid_argument("integrate_box_pair: regions must be 2-dimensional");
    return integrate_weighted(spec, {term(1.0, a, b)}, tol);
}

IntegralReport integrate_connection(const ConnectionSpec& spec, const Region& region_a, double truncation, double tol) {
    if (spec.dim() != 2 || region_a.dim() != 2) throw std::invalid_argument("integrate_connection: d must be 2");
    if (!(tol > 0.0)) throw std::invalid_argument("integrate_connection: tol must be > 0");
    const double diameter = std::hypot(region_a.width(0), region_a.width(1));
    if (!(truncation >= 2.0 * diameter)) {
        throw std::invalid_argument("integrate_connection: truncation must be at least twice the region diameter");
    }
    const double c0 = 0.5 * (region_a.lo()[0] + region_a.hi()[0]);
    const double c1 = 0.5 * (region_a.lo()[1] + region_a.hi()[1]);
    return report_over_truncations(truncation, [&](double t) {
        const Region window({c0 - t, c1 - t}, {c0 + t, c1 + t});
        // y in A, x in W \ A: overlap with W minus overlap with A itself.
        return integrate_weighted(spec, {term(1.0, region_a, window), term(-1.0, region_a, region_a)}, tol);
    });
}

IntegralReport integrate_quadrant_pair(const ConnectionSpec& spec, int qa, int qb, double truncation, double tol) {
    if (spec.dim() != 2) throw std::invalid_argument("integrate_quadrant_pair: d must be 2");
    if (qa < 1 || qa > 4 || qb < 1 || qb > 4 || qa == qb) {
        throw std::invalid_argument("integrate_quadrant_pair: quadrants must be distinct and in 1..4");
    }
    if (!(truncation > 0.0)) throw std::invalid_argument("integrate_quadrant_pair: truncation must be > 0");
    auto quadrant = [](int q, double t) {
        switch (q) {
            case 1: return Region({0.0, 0.0}, {t, t});
            case 2: return Region({0.0, -t}, {t, 0.0});
            case 3: return Region({-t, -t}, {0.0, 0.0});
            default: return Region({-t, 0.0}, {0.0, t});
        }
    };
    return report_over_truncations(truncation, [&](double t) {
        return integrate_weighted(spec, {term(1.0, quadrant(qa, t), quadrant(qb, t))}, tol);
    });
}

MeanDegree mean_degree_prediction(const ConnectionSpec& spec, double rho, double tol) {
    if (!std::isfinite(rho) || rho < 0.0) throw std::invalid_argument("mean_degree_prediction: rho must be >= 0");
    const int d = spec.dim();
    // Surface measure of the unit sphere of the chosen norm: d * volume(unit ball).
    double ball;
    if (spec.norm() == Norm::one) {
        ball = std::pow(2.0, d) / std::tgamma(d + 1.0);
    } else {
        ball = std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
    }
    const double shell = d * ball;
    auto radial = [&](double r) { return spec.profile(r) * shell * std::pow(r, d - 1); };

    MeanDegree out;
    const double rs = spec.support_radius();
    if (std::isfinite(rs)) {
        const auto r = quad::integrate(radial, 0.0, rs, {1.0}, tol, 4000);
        out.kernel_integral = r.value;
        out.error_estimate = r.error;
        out.converged = r.converged;
    } else {
        const auto near = quad::integrate(radial, 0.0, 1.0, {}, tol * 0.5, 4000);
        const auto far = quad::integrate_to_infinity(radial, 1.0, tol * 0.5, 4000);
        out.kernel_integral = near.value + far.value;
        out.error_estimate = near.error + far.error;
        out.converged = near.converged && far.converged;
    }
    out.value = rho * out.kernel_integral;
    out.error_estimate *= rho;
    return out;
}

void write_edges(std::ostream& out, const EdgeList& edges) {
    const auto& s = edges.spec;
    out << "EDGES m=" << edges.pairs.size() << " kind=" << to_string(s.kind()) << " alpha=" << format_double(s.alpha())
        << " M=" << format_double(s.trunc_m()) << " R=" << format_double(s.blob_r()) << " norm=" << to_string(s.norm())
        << " d=" << s.dim() << " boundary=" << to_string(edges.boundary) << " seed=" << edges.stream.seed
        << " stream=" << edges.stream.stream_id << " sampler=" << (edges.cell_sampler ? "cell" : "sweep") << '\n';
    for (const auto& [i, j] : edges.pairs) out << i << ' ' << j << '\n';
}

EdgeList read_edges(std::istream& in, std::size_t point_count) {
    std::string line;
    while (std::getline(in, line) && line.empty()) {
    }
    std::istringstream hs(line);
    std::string magic;
    hs >> magic;
    if (magic != "EDGES") throw std::invalid_argument("snapshot: expected EDGES section");
    std::map<std::string, std::string> kv;
    std::string tok;
    while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("snapshot: malformed EDGES token " + tok);
        kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    const auto kind = parse_kernel_kind(kv.at("kind"));
    const int d = std::stoi(kv.at("d"));
    const Norm norm = parse_norm(kv.at("norm"));
    EdgeList e;
    switch (kind) {
        case KernelKind::polynomial_tail: e.spec = ConnectionSpec::polynomial_tail(d, std::stod(kv.at("alpha")), norm); break;
        case KernelKind::truncated:
            e.spec = ConnectionSpec::truncated(d, std::stod(kv.at("alpha")), std::stod(kv.at("M")), norm);
            break;
        case KernelKind::blob: e.spec = ConnectionSpec::blob(d, std::stod(kv.at("R")), norm); break;
    }
    e.boundary = parse_boundary(kv.at("boundary"));
    e.stream = RngStream{std::stoull(kv.at("seed")), std::stoull(kv.at("stream"))};
    e.point_count = point_count;
    e.cell_sampler = kv.count("sampler") && kv.at("sampler") == "cell";
    const std::size_t m = std::stoull(kv.at("m"));
    e.pairs.reserve(m);
    for (std::size_t k = 0; k < m; ++k) {
        std::uint64_t i = 0, j = 0;
        if (!(in >> i >> j)) throw std::invalid_argument("snapshot: truncated edge list");
        if (!(i < j) || j >= point_count) throw std::invalid_argument("snapshot: invalid edge pair");
        e.pairs.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
    }
    return e;
}

}  // namespace rcm
