#include "rcm/pointprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rcm {

Region::Region(std::vector<double> lo, std::vector<double> hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (lo_.empty() || lo_.size() != hi_.size()) {
        throw std::invalid_argument("region: lo and hi must be non-empty and of equal length");
    }
    for (std::size_t i = 0; i < lo_.size(); ++i) {
        if (!std::isfinite(lo_[i]) || !std::isfinite(hi_[i]) || !(hi_[i] > lo_[i])) {
            throw std::invalid_argument("region: need finite lo < hi on every axis");
        }
    }
}

Region Region::centered_cube(int dim, double half_width) {
    if (dim < 1) throw std::invalid_argument("region: dim must be >= 1");
    return Region(std::vector<double>(dim, -half_width), std::vector<double>(dim, half_width));
}

Region Region::unit_cube(int dim, double side) {
    if (dim < 1) throw std::invalid_argument("region: dim must be >= 1");
    return Region(std::vector<double>(dim, 0.0), std::vector<double>(dim, side));
}

double Region::volume() const {
    double v = 1.0;
    for (int i = 0; i < dim(); ++i) v *= width(i);
    return v;
}

bool Region::contains(std::span<const double> x) const {
    if (x.size() != lo_.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < lo_[i] || x[i] > hi_[i]) return false;
    }
    return true;
}

PointCloud::PointCloud(Region region, std::vector<double> coords, bool palm_origin, Provenance provenance)
    : region_(std::move(region)), coords_(std::move(coords)), palm_origin_(palm_origin), provenance_(provenance) {
    const auto d = static_cast<std::size_t>(region_.dim());
    if (coords_.size() % d != 0) throw std::invalid_argument("point cloud: coordinate count not a multiple of dim");
    for (std::size_t i = 0; i < size(); ++i) {
        if (!region_.contains(point(i))) throw std::invalid_argument("point cloud: point outside region");
    }
    if (palm_origin_) {
        if (empty()) throw std::invalid_argument("point cloud: palm flag set on empty cloud");
        for (double c : point(0)) {
            if (c != 0.0) throw std::invalid_argument("point cloud: palm flag set but point 0 is not the origin");
        }
    }
}

PointCloud sample_poisson(const Region& region, double rho, const RngStream& stream) {
    if (!std::isfinite(rho) || !(rho > 0.0)) throw std::invalid_argument("sample_poisson: rho must be finite and > 0");
    const double mean = rho * region.volume();
    if (!std::isfinite(mean)) throw std::invalid_argument("sample_poisson: rho * volume is not finite");

    Rng rng(stream);
    const std::uint64_t n = rng.poisson(mean);
    const int d = region.dim();
    std::vector<double> coords(n * static_cast<std::size_t>(d));
    for (std::uint64_t i = 0; i < n; ++i) {
        for (int a = 0; a < d; ++a) {
            coords[i * d + a] = rng.uniform(region.lo()[a], region.hi()[a]);
        }
    }
    return PointCloud(region, std::move(coords), false, Provenance{stream.seed, stream.stream_id, rho});
}

PointCloud palm_condition(const PointCloud& cloud) {
    if (cloud.palm_origin()) throw std::invalid_argument("palm_condition: cloud already has a palm origin");
    const std::vector<double> origin(cloud.dim(), 0.0);
    if (!cloud.region().contains(origin)) throw std::invalid_argument("palm_condition: origin outside region");

    std::vector<double> coords;
    coords.reserve(cloud.coords().size() + origin.size());
    coords.insert(coords.end(), origin.begin(), origin.end());
    coords.insert(coords.end(), cloud.coords().begin(), cloud.coords().end());
    return PointCloud(cloud.region(), std::move(coords), true, cloud.provenance());
}

PointCloud sorted_lexicographic(const PointCloud& cloud) {
    const std::size_t first = cloud.palm_origin() ? 1 : 0;
    std::vector<std::size_t> order(cloud.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(first), order.end(), [&](std::size_t a, std::size_t b) {
        auto pa = cloud.point(a);
        auto pb = cloud.point(b);
        return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
    });
    std::vector<double> coords;
    coords.reserve(cloud.coords().size());
    for (std::size_t i : order) {
        auto p = cloud.point(i);
        coords.insert(coords.end(), p.begin(), p.end());
    }
    return PointCloud(cloud.region(), std::move(coords), cloud.palm_origin(), cloud.provenance());
}

CellGrid::CellGrid(const PointCloud& cloud, double cell_size)
    : lo_(cloud.region().lo()), hi_(cloud.region().hi()), cell_size_(cell_size) {
    if (!std::isfinite(cell_size) || !(cell_size > 0.0)) throw std::invalid_argument("cell grid: cell_size must be > 0");
    const int d = cloud.dim();
    std::size_t total = 1;
    per_axis_.resize(d);
    for (int a = 0; a < d; ++a) {
        const double cells = std::ceil(cloud.region().width(a) / cell_size);
        if (cells > 1e8) throw std::invalid_argument("cell grid: too many cells");
        per_axis_[a] = std::max<std::size_t>(1, static_cast<std::size_t>(cells));
        total *= per_axis_[a];
        if (total > 200'000'000) throw std::invalid_argument("cell grid: too many cells");
    }

    std::vector<std::size_t> cell_ids(cloud.size());
    cell_start_.assign(total + 1, 0);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        cell_ids[i] = cell_of(cloud.point(i));
        ++cell_start_[cell_ids[i] + 1];
    }
    std::partial_sum(cell_start_.begin(), cell_start_.end(), cell_start_.begin());
    point_ids_.resize(cloud.size());
    std::vector<std::size_t> fill(cell_start_.begin(), cell_start_.end() - 1);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        point_ids_[fill[cell_ids[i]]++] = static_cast<std::uint32_t>(i);
    }
}

std::size_t CellGrid::cell_of(std::span<const double> x) const {
    std::size_t flat = 0;
    for (std::size_t a = 0; a < per_axis_.size(); ++a) {
        const double t = std::floor((x[a] - lo_[a]) / cell_size_);
        std::size_t idx = t <= 0.0 ? 0 : static_cast<std::size_t>(t);
        idx = std::min(idx, per_axis_[a] - 1);
        flat = flat * per_axis_[a] + idx;
    }
    return flat;
}

std::vector<std::size_t> CellGrid::cell_coords(std::size_t cell) const {
    std::vector<std::size_t> c(per_axis_.size());
    for (std::size_t a = per_axis_.size(); a-- > 0;) {
        c[a] = cell % per_axis_[a];
        cell /= per_axis_[a];
    }
    return c;
}

double CellGrid::cell_lo(std::size_t cell, int axis) const {
    const auto c = cell_coords(cell);
    return lo_[axis] + static_cast<double>(c[axis]) * cell_size_;
}

double CellGrid::cell_hi(std::size_t cell, int axis) const {
    const auto c = cell_coords(cell);
    if (c[axis] + 1 == per_axis_[axis]) return hi_[axis];
    return lo_[axis] + static_cast<double>(c[axis] + 1) * cell_size_;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += format_double(v[i]);
    }
    return s;
}

std::vector<double> split_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

}  // namespace

void write_points(std::ostream& out, const PointCloud& cloud) {
    const auto& pv = cloud.provenance();
    out << "RCM1 d=" << cloud.dim() << " rho=" << format_double(pv.rho) << " seed=" << pv.seed
        << " stream=" << pv.stream_id << " lo=" << join(cloud.region().lo()) << " hi=" << join(cloud.region().hi())
        << " n=" << cloud.size() << " palm=" << (cloud.palm_origin() ? 1 : 0) << '\n';
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        auto p = cloud.point(i);
        for (std::size_t a = 0; a < p.size(); ++a) {
            if (a) out << ' ';
            out << format_double(p[a]);
        }
        out << '\n';
    }
}

PointCloud read_points(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("snapshot: missing header");
    std::istringstream hs(line);
    std::string magic;
    hs >> magic;
    if (magic != "RCM1") throw std::invalid_argument("snapshot: bad magic '" + magic + "'");
    std::map<std::string, std::string> kv;
    std::string tok;
    while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("snapshot: malformed header token " + tok);
        kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    for (const char* key : {"d", "rho", "seed", "stream", "lo", "hi", "n", "palm"}) {
        if (!kv.count(key)) throw std::invalid_argument(std::string("snapshot: header lacks ") + key);
    }
    const int d = std::stoi(kv["d"]);
    Region region(split_doubles(kv["lo"]), split_doubles(kv["hi"]));
    if (region.dim() != d) throw std::invalid_argument("snapshot: dimension mismatch");
    const std::size_t n = std::stoull(kv["n"]);
    std::vector<double> coords(n * static_cast<std::size_t>(d));
    for (auto& c : coords) {
        if (!(in >> c)) throw std::invalid_argument("snapshot: truncated point list");
    }
    std::getline(in, line);  // rest of last point line
    Provenance pv{std::stoull(kv["seed"]), std::stoull(kv["stream"]), std::stod(kv["rho"])};
    return PointCloud(std::move(region), std::move(coords), kv["palm"] == "1", pv);
}

}  // namespace rcm
