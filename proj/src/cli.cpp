#include "rcm/cli.hpp"

#include "rcm/connection.hpp"
#include "rcm/errors.hpp"
#include "rcm/graph.hpp"
#include "rcm/lrp.hpp"
#include "rcm/parallel.hpp"
#include "rcm/pointprocess.hpp"
#include "rcm/recurrence.hpp"
#include "rcm/renormalization.hpp"
#include "rcm/stats.hpp"
#include "rcm/walk.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rcm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Defaults = std::map<std::string, std::string>;

Defaults with_model(Defaults d, const std::string& alpha) {
    d.insert({{"d", "2"}, {"kernel", "polynomial_tail"}, {"alpha", alpha}, {"trunc_M", "1"}, {"blob_R", "1"},
              {"norm", "one_norm"}, {"boundary", "free"}, {"seed", "1"}, {"pair_budget", "50000000"}});
    return d;
}

const std::map<std::string, Defaults>& all_defaults() {
    static const std::map<std::string, Defaults> table = {
        {"sample", with_model({{"rho", "1"}, {"half_width", "10"}, {"palm", "0"}, {"sort", "0"}, {"edges", "1"}}, "4")},
        {"percolate", with_model({{"rhos", "0.5,1,2,4"}, {"half_width", "10"}, {"replicas", "20"}}, "4")},
        {"walk", with_model({{"rho", "2"}, {"half_width", "10"}, {"horizon", "1000"}, {"replicas", "20"}}, "4")},
        {"resistance-profile",
         with_model({{"rho", "2"}, {"radii", "4,8,16"}, {"half_width", "0"}, {"replicas", "20"}, {"max_attempts", "100"}},
                    "4.5")},
        {"cutsets", with_model({{"rho", "2"}, {"radii", "4,8,16"}, {"replicas", "50"}, {"margin", "2"},
                                {"window_factor", "2"}, {"mode", "aligned"}, {"check", "0"}, {"bootstrap", "400"}},
                               "4.5")},
        {"renormalize", with_model({{"rho", "100"},
                                    {"epsilon", "0.16666666666666666"},
                                    {"boxes", "19"},
                                    {"beta", "5"},
                                    {"max_k", "3"},
                                    {"replicas", "4"},
                                    {"mode", "long_range"},
                                    {"lambda1", "1"},
                                    {"mu1", "0.5"},
                                    {"p_c", "0.5"},
                                    {"check", "0"}},
                                   "3")},
        {"lrp", {{"d", "2"}, {"L", "10"}, {"lambda", "1"}, {"mu", "0.8"}, {"alpha", "3"}, {"k_max", "0"},
                 {"replicas", "20"}, {"seed", "1"}}},
        {"integrals", with_model({{"rho", "1"}, {"truncation", "8"}, {"tol", "1e-6"}, {"quadrants", "1,3"}}, "4")},
        {"threshold", with_model({{"half_width", "10"},
                                  {"fraction_target", "0.5"},
                                  {"rho_lo", "0.05"},
                                  {"rho_hi", "20"},
                                  {"relative_width", "0.05"},
                                  {"replicas", "50"}},
                                 "4")},
    };
    return table;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

class Params {
public:
    explicit Params(const std::map<std::string, std::string>& v) : v_(v) {}

    const std::string& str(const std::string& key) const {
        auto it = v_.find(key);
        if (it == v_.end()) throw std::invalid_argument("missing parameter '" + key + "'");
        return it->second;
    }
    double real(const std::string& key) const {
        const auto& s = str(key);
        std::size_t pos = 0;
        double x = 0.0;
        try {
            x = std::stod(s, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != s.size() || !std::isfinite(x)) throw std::invalid_argument("parameter '" + key + "' is not a finite number: " + s);
        return x;
    }
    long long integer(const std::string& key) const {
        const auto& s = str(key);
        std::size_t pos = 0;
        long long x = 0;
        try {
            x = std::stoll(s, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != s.size() || s.empty()) throw std::invalid_argument("parameter '" + key + "' is not an integer: " + s);
        return x;
    }
    std::size_t count(const std::string& key, long long min = 1) const {
        const auto x = integer(key);
        if (x < min) throw std::invalid_argument("parameter '" + key + "' must be >= " + std::to_string(min));
        return static_cast<std::size_t>(x);
    }
    bool flag(const std::string& key) const {
        const auto x = integer(key);
        if (x != 0 && x != 1) throw std::invalid_argument("parameter '" + key + "' must be 0 or 1");
        return x == 1;
    }
    std::vector<double> reals(const std::string& key) const {
        std::vector<double> out;
        std::stringstream ss(str(key));
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            std::map<std::string, std::string> one{{key, trim(tok)}};
            out.push_back(Params(one).real(key));
        }
        if (out.empty()) throw std::invalid_argument("parameter '" + key + "' is empty");
        return out;
    }
    std::vector<int> ints(const std::string& key) const {
        std::vector<int> out;
        std::stringstream ss(str(key));
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            std::map<std::string, std::string> one{{key, trim(tok)}};
            out.push_back(static_cast<int>(Params(one).integer(key)));
        }
        if (out.empty()) throw std::invalid_argument("parameter '" + key + "' is empty");
        return out;
    }
    RngStream root() const { return RngStream{static_cast<std::uint64_t>(integer("seed")), 0}; }

private:
    const std::map<std::string, std::string>& v_;
};

ConnectionSpec make_spec(const Params& p) {
    const int d = static_cast<int>(p.integer("d"));
    const Norm norm = parse_norm(p.str("norm"));
    switch (parse_kernel_kind(p.str("kernel"))) {
        case KernelKind::polynomial_tail: return ConnectionSpec::polynomial_tail(d, p.real("alpha"), norm);
        case KernelKind::truncated: return ConnectionSpec::truncated(d, p.real("alpha"), p.real("trunc_M"), norm);
        case KernelKind::blob: return ConnectionSpec::blob(d, p.real("blob_R"), norm);
    }
    throw std::invalid_argument("unknown kernel");
}

EdgeSamplingOptions sampling(const Params& p) {
    EdgeSamplingOptions o;
    o.boundary = parse_boundary(p.str("boundary"));
    o.pair_budget = p.count("pair_budget");
    return o;
}

double positive(const Params& p, const std::string& key) {
    const double x = p.real(key);
    if (!(x > 0.0)) throw std::invalid_argument("parameter '" + key + "' must be > 0");
    return x;
}

std::string fmt(double v) { return format_double(v); }

/// Collects artifacts written to the output directory.
class Outputs {
public:
    explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, const std::string& content) {
        std::ofstream f(dir_ / name, std::ios::binary);
        if (!f) throw std::invalid_argument("cannot write " + (dir_ / name).string());
        f << content;
        f.close();
        if (!f) throw std::invalid_argument("write failed for " + (dir_ / name).string());
        names_.push_back(name);
    }
    void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }
    const std::vector<std::string>& names() const { return names_; }
    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    std::vector<std::string> names_;
};

json interval_json(const stats::Interval& i) { return json::array({i.lo, i.hi}); }

// ---------------------------------------------------------------------------

void cmd_sample(const Params& p, Outputs& out, std::ostream&) {
    const auto spec = make_spec(p);
    const Region box = Region::centered_cube(spec.dim(), positive(p, "half_width"));
    const auto root = p.root();
    auto cloud = sample_poisson(box, positive(p, "rho"), substream(root, "points"));
    if (p.flag("palm")) cloud = palm_condition(cloud);
    if (p.flag("sort")) cloud = sorted_lexicographic(cloud);
    std::ostringstream s;
    write_points(s, cloud);
    json summary = {{"points", cloud.size()}};
    if (p.flag("edges")) {
        const auto edges = sample_edges(cloud, spec, substream(root, "edges"), sampling(p));
        write_edges(s, edges);
        summary["edges"] = edges.size();
        summary["sampler"] = edges.cell_sampler ? "cell" : "sweep";
    }
    out.write("points.rcm", s.str());
    out.write_json("summary.json", summary);
}

void cmd_percolate(const Params& p, Outputs& out, std::ostream&) {
    const auto spec = make_spec(p);
    const Region box = Region::centered_cube(spec.dim(), positive(p, "half_width"));
    const auto rhos = p.reals("rhos");
    const auto replicas = p.count("replicas", 2);
    for (double r : rhos) {
        if (!(r > 0.0)) throw std::invalid_argument("parameter 'rhos' must be positive");
    }
    struct Row {
        std::size_t n = 0, m = 0;
        double fraction = 0.0, degree = 0.0;
    };
    std::vector<Row> rows(rhos.size() * replicas);
    const auto root = p.root();
    parallel_for(rows.size(), [&](std::size_t t) {
        const std::size_t ri = t / replicas, rep = t % replicas;
        const auto s = substream(substream(root, "rho", ri), "replica", rep);
        const auto cloud = sample_poisson(box, rhos[ri], substream(s, "points"));
        auto& row = rows[t];
        row.n = cloud.size();
        if (cloud.empty()) return;
        const auto edges = sample_edges(cloud, spec, substream(s, "edges"), sampling(p));
        const auto graph = WeightedGraph::from_edges(cloud, edges);
        row.m = edges.size();
        row.fraction = largest_cluster_fraction(connected_components(graph));
        row.degree = degree_stats(graph).mean;
    });
    std::ostringstream csv;
    csv << "rho,replica,n_points,n_edges,largest_fraction,mean_degree\n";
    json summary = json::array();
    for (std::size_t ri = 0; ri < rhos.size(); ++ri) {
        std::vector<double> fr;
        for (std::size_t rep = 0; rep < replicas; ++rep) {
            const auto& r = rows[ri * replicas + rep];
            csv << fmt(rhos[ri]) << ',' << rep << ',' << r.n << ',' << r.m << ',' << fmt(r.fraction) << ','
                << fmt(r.degree) << '\n';
            fr.push_back(r.fraction);
        }
        summary.push_back({{"rho", rhos[ri]},
                           {"mean_largest_fraction", stats::mean(fr)},
                           {"std_error", stats::std_error(fr)},
                           {"mean_degree_prediction", mean_degree_prediction(spec, rhos[ri]).value}});
    }
    out.write("cluster_stats.csv", csv.str());
    out.write_json("percolate_summary.json", summary);
}

void cmd_walk(const Params& p, Outputs& out, std::ostream&) {
    const auto spec = make_spec(p);
    const Region box = Region::centered_cube(spec.dim(), positive(p, "half_width"));
    const double rho = positive(p, "rho");
    const auto horizon = p.count("horizon");
    const auto replicas = p.count("replicas");
    std::vector<std::optional<WalkStats>> stats_(replicas);
    const auto root = p.root();
    parallel_for(replicas, [&](std::size_t rep) {
        const auto s = substream(root, "replica", rep);
        const auto cloud = palm_condition(sample_poisson(box, rho, substream(s, "points")));
        const auto graph = WeightedGraph::from_edges(cloud, sample_edges(cloud, spec, substream(s, "edges"), sampling(p)));
        if (graph.degree(0) == 0) return;  // isolated origin, flagged in the table
        stats_[rep] = simulate_walk(graph, 0, horizon, substream(s, "walk"));
    });
    std::ostringstream csv;
    csv << "replica,horizon,isolated,returns_to_start,first_return_time,range\n";
    std::size_t isolated = 0, returned = 0;
    for (std::size_t rep = 0; rep < replicas; ++rep) {
        const auto& w = stats_[rep];
        if (!w) {
            ++isolated;
            csv << rep << ',' << horizon << ",1,0,,1\n";
            continue;
        }
        if (w->first_return_time) ++returned;
        csv << rep << ',' << horizon << ",0," << w->returns_to_start << ','
            << (w->first_return_time ? std::to_string(*w->first_return_time) : "") << ',' << w->range << '\n';
    }
    out.write("walk_stats.csv", csv.str());
    out.write_json("walk_summary.json", {{"replicas", replicas}, {"isolated_origin", isolated}, {"returned", returned}});
}

void cmd_resistance_profile(const Params& p, Outputs& out, std::ostream& log) {
    const auto spec = make_spec(p);
    const double rho = positive(p, "rho");
    const auto radii = p.ints("radii");
    GrowthOptions opt;
    opt.half_width = p.real("half_width");
    if (opt.half_width < 0.0) throw std::invalid_argument("parameter 'half_width' must be >= 0");
    opt.max_attempts = static_cast<int>(p.count("max_attempts"));
    opt.sampling = sampling(p);
    const auto prof = resistance_growth_profile(spec, rho, radii, p.count("replicas", 2), p.root(), opt);
    std::ostringstream csv;
    csv << "d,alpha,rho,n,replica,R_eff,resid,dropped_flag\n";
    for (const auto& r : prof.rows) {
        csv << spec.dim() << ',' << fmt(spec.alpha()) << ',' << fmt(rho) << ',' << r.radius << ',' << r.replica << ','
            << (r.dropped ? "" : fmt(r.r_eff)) << ',' << (r.dropped ? "" : fmt(r.residual)) << ','
            << (r.dropped ? 1 : 0) << '\n';
    }
    json summary = {{"radii", prof.radii},       {"mean", prof.mean},       {"std_error", prof.std_error},
                    {"kept", prof.kept},         {"dropped", prof.dropped}, {"resamples", prof.resamples}};
    if (radii.size() >= 2) {
        std::vector<double> logn;
        for (int n : radii) logn.push_back(std::log(static_cast<double>(n)));
        const auto fit = stats::linear_fit(logn, prof.mean);
        summary["log_fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r_squared", fit.r_squared}};
    }
    if (prof.dropped) log << "note: " << prof.dropped << " replica(s) dropped after repeated resampling\n";
    out.write("resistance_profile.csv", csv.str());
    out.write_json("resistance_summary.json", summary);
}

void cmd_cutsets(const Params& p, Outputs& out, std::ostream& log) {
    const auto spec = make_spec(p);
    if (spec.dim() != 2) throw std::invalid_argument("cutsets: d must be 2");
    const auto& mode = p.str("mode");
    if (mode != "aligned" && mode != "contrast") throw std::invalid_argument("cutsets: mode must be aligned or contrast");
    if (spec.kind() == KernelKind::blob) throw std::invalid_argument("cutsets: needs a kernel with exponent alpha");
    if (mode == "aligned" && spec.alpha() < 4.0) {
        throw std::invalid_argument("cutsets: aligned mode needs alpha >= 4 (use mode=contrast for other alpha)");
    }
    const auto radii = p.ints("radii");
    ScalingOptions opt;
    opt.margin = p.real("margin");
    opt.window_factor = p.real("window_factor");
    opt.bootstrap_resamples = static_cast<int>(p.count("bootstrap", 10));
    opt.sampling = sampling(p);
    const double rho = positive(p, "rho");
    const auto res = cutset_scaling_experiment(spec, rho, radii, p.count("replicas", 2), p.root(), opt);

    std::ostringstream csv;
    csv << "alpha,rho,n,replica,C_n,C_n_over_nlogn\n";
    for (const auto& r : res.rows) {
        csv << fmt(spec.alpha()) << ',' << fmt(rho) << ',' << r.n << ',' << r.replica << ',' << fmt(r.c_n) << ','
            << fmt(r.normalized) << '\n';
    }
    json ci = json::array();
    for (const auto& i : res.quantile90_ci) ci.push_back(interval_json(i));
    bool non_increasing = true;
    for (std::size_t k = 0; k + 1 < radii.size(); ++k) {
        non_increasing = non_increasing && res.quantile90[k + 1] <= res.quantile90_ci[k].hi;
    }
    out.write("cutsets.csv", csv.str());
    out.write_json("cutsets_summary.json", {{"radii", res.radii},
                                            {"quantile90", res.quantile90},
                                            {"quantile90_ci95", ci},
                                            {"mean_nash_williams_sum", res.shared_window ? json(res.mean_nash_williams) : json(nullptr)},
                                            {"non_increasing_within_ci", non_increasing}});
    if (p.flag("check") && !non_increasing) {
        log << "check failed: 0.9-quantile of C_n/(n log n) increases beyond its bootstrap interval\n";
        throw StatisticalCheckError("cutsets trend check failed");
    }
}

void cmd_renormalize(const Params& p, Outputs& out, std::ostream& log) {
    const auto spec = make_spec(p);
    const double rho = positive(p, "rho");
    const double eps = positive(p, "epsilon");
    const auto boxes = p.count("boxes");
    const int beta = static_cast<int>(p.count("beta"));
    const int max_k = static_cast<int>(p.count("max_k"));
    const auto replicas = p.count("replicas");
    const Region region = Region::unit_cube(spec.dim(), 2.0 * eps * static_cast<double>(boxes));
    std::vector<CoarseConfig> configs(replicas);
    const auto root = p.root();
    parallel_for(replicas, [&](std::size_t rep) {
        const auto s = substream(root, "replica", rep);
        const auto cloud = sample_poisson(region, rho, substream(s, "points"));
        const auto edges = sample_edges(cloud, spec, substream(s, "edges"), sampling(p));
        configs[rep] = coarse_graph(cloud, edges, eps, beta, max_k);
    });

    DominationParams dp;
    const auto& mode = p.str("mode");
    if (mode == "long_range") {
        dp.mode = DominationMode::long_range;
    } else if (mode == "nearest_neighbor") {
        dp.mode = DominationMode::nearest_neighbor;
    } else {
        throw std::invalid_argument("renormalize: mode must be long_range or nearest_neighbor");
    }
    dp.lambda1 = positive(p, "lambda1");
    dp.mu1 = p.real("mu1");
    dp.p_c = p.real("p_c");
    const auto rep = domination_report(configs, dp);

    std::ostringstream csv;
    csv << "replica,epsilon,beta,rho,box_i,box_j,k,both_good,bond_open\n";
    for (std::size_t r = 0; r < replicas; ++r) {
        for (const auto& b : configs[r].bonds) {
            csv << r << ',' << fmt(eps) << ',' << beta << ',' << fmt(rho) << ',' << b.box_i << ',' << b.box_j << ','
                << b.k << ',' << (b.both_good ? 1 : 0) << ',' << (b.open ? 1 : 0) << '\n';
        }
    }
    json cells = json::array();
    for (const auto& c : rep.cells) {
        cells.push_back({{"label", c.label},
                         {"trials", c.trials},
                         {"successes", c.successes},
                         {"frequency", c.frequency},
                         {"sigma", c.sigma},
                         {"lower99", c.lower99},
                         {"reference", c.reference},
                         {"pass", c.pass}});
    }
    json tr2 = json::array();
    for (const auto& f : bond_frequencies_by_k(configs)) {
        tr2.push_back({{"k", f.distance},
                       {"trials", f.trials},
                       {"open", f.open},
                       {"frequency", f.frequency()},
                       {"connection_bound", lemma_tr2_bound(beta, f.distance, spec.alpha())}});
    }
    std::vector<double> largest;
    for (const auto& c : configs) largest.push_back(coarse_largest_fraction(c));
    out.write("coarse.csv", csv.str());
    out.write_json("domination.json", {{"mode", mode},
                                       {"site_frequency", rep.site_frequency},
                                       {"comparisons", cells},
                                       {"all_pass", rep.all_pass},
                                       {"bond_frequency_by_k", tr2},
                                       {"coarse_largest_fraction", largest}});
    if (p.flag("check") && !rep.all_pass) {
        log << "check failed: at least one domination comparison did not clear its reference\n";
        throw StatisticalCheckError("domination check failed");
    }
}

void cmd_lrp(const Params& p, Outputs& out, std::ostream&) {
    const int d = static_cast<int>(p.count("d"));
    const int L = static_cast<int>(p.count("L"));
    const double lambda = positive(p, "lambda");
    const double mu = p.real("mu");
    const double alpha = p.real("alpha");
    LrpOptions opt;
    opt.k_max = static_cast<int>(p.count("k_max", 0));
    const auto replicas = p.count("replicas");
    std::vector<LatticeConfig> cfgs(replicas);
    std::vector<LatticeClusterStats> st(replicas);
    const auto root = p.root();
    parallel_for(replicas, [&](std::size_t r) {
        cfgs[r] = sample_lrp(d, L, lambda, mu, alpha, substream(root, "replica", r), opt);
        st[r] = lattice_cluster_stats(cfgs[r]);
    });
    std::ostringstream snap;
    write_lattice(snap, cfgs.front());
    std::ostringstream csv;
    csv << "distance,pairs,bonds,frequency,probability\n";
    const auto& first = cfgs.front();
    for (int k = 1; k <= first.k_max && k < static_cast<int>(first.pairs_at.size()); ++k) {
        std::uint64_t pairs = 0, bonds = 0;
        for (const auto& c : cfgs) {
            pairs += c.pairs_at[k];
            bonds += c.bonds_at[k];
        }
        if (pairs == 0) continue;
        csv << k << ',' << pairs << ',' << bonds << ',' << fmt(static_cast<double>(bonds) / static_cast<double>(pairs))
            << ',' << fmt(lrp_bond_probability(lambda, alpha, k)) << '\n';
    }
    std::vector<double> fo, fa;
    for (const auto& s : st) {
        fo.push_back(s.largest_fraction_open);
        fa.push_back(s.largest_fraction_all);
    }
    out.write("lattice.rcm", snap.str());
    out.write("lrp_bonds.csv", csv.str());
    out.write_json("lrp_summary.json", {{"largest_fraction_open", fo},
                                        {"largest_fraction_all", fa},
                                        {"k_max", first.k_max},
                                        {"skipped_mass", first.skipped_mass}});
}

void cmd_integrals(const Params& p, Outputs& out, std::ostream& log) {
    const auto spec = make_spec(p);
    const double tol = positive(p, "tol");
    const double T = positive(p, "truncation");
    const auto md = mean_degree_prediction(spec, p.real("rho"), std::min(tol, 1e-9));
    const auto hr1 = integrate_connection(spec, Region::unit_cube(2), T, tol);
    const auto q = p.ints("quadrants");
    if (q.size() != 2) throw std::invalid_argument("parameter 'quadrants' needs two entries");
    const auto rr2 = integrate_quadrant_pair(spec, q[0], q[1], T, tol);
    auto report = [](const IntegralReport& r) {
        return json{{"truncations", r.truncations},
                    {"values", r.values},
                    {"differences", r.differences},
                    {"error_estimate", r.error_estimate},
                    {"converged", r.converged}};
    };
    out.write_json("integrals.json", {{"mean_degree", {{"value", md.value},
                                                       {"kernel_integral", md.kernel_integral},
                                                       {"error_estimate", md.error_estimate},
                                                       {"converged", md.converged}}},
                                      {"box_exterior", report(hr1)},
                                      {"quadrant_pair", report(rr2)}});
    if (!md.converged || !hr1.converged || !rr2.converged) {
        log << "quadrature did not reach the requested tolerance\n";
        throw NumericalError("integrals: quadrature non-convergence");
    }
}

void cmd_threshold(const Params& p, Outputs& out, std::ostream&) {
    const auto spec = make_spec(p);
    const Region box = Region::centered_cube(spec.dim(), positive(p, "half_width"));
    ThresholdOptions opt;
    opt.rho_lo = p.real("rho_lo");
    opt.rho_hi = p.real("rho_hi");
    opt.relative_width = positive(p, "relative_width");
    const auto est = estimate_percolation_threshold(spec, box, p.real("fraction_target"),
                                                    static_cast<int>(p.count("replicas", 2)), p.root(), opt);
    json probes = json::array();
    for (const auto& pr : est.probes) {
        probes.push_back({{"rho", pr.rho}, {"mean_fraction", pr.mean_fraction}, {"std_error", pr.std_error}});
    }
    out.write_json("threshold.json", {{"lo", est.lo},
                                      {"hi", est.hi},
                                      {"midpoint", est.midpoint},
                                      {"saturated", est.saturated},
                                      {"probes", probes}});
}

using Command = void (*)(const Params&, Outputs&, std::ostream&);

const std::map<std::string, Command>& commands() {
    static const std::map<std::string, Command> table = {
        {"sample", cmd_sample},       {"percolate", cmd_percolate},   {"walk", cmd_walk},
        {"resistance-profile", cmd_resistance_profile},               {"cutsets", cmd_cutsets},
        {"renormalize", cmd_renormalize}, {"lrp", cmd_lrp},          {"integrals", cmd_integrals},
        {"threshold", cmd_threshold},
    };
    return table;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        if (key == "command") {
            cfg.command = value;
        } else {
            cfg.values[key] = value;
        }
    }
    return cfg;
}

ExperimentConfig load_config(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw std::invalid_argument("cannot read config file " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::vector<std::string> subcommands() {
    std::vector<std::string> out;
    for (const auto& [name, fn] : commands()) out.push_back(name);
    return out;
}

const std::map<std::string, std::string>& defaults_for(const std::string& command) {
    const auto& t = all_defaults();
    auto it = t.find(command);
    if (it == t.end()) throw std::invalid_argument("unknown subcommand '" + command + "'");
    return it->second;
}

ExperimentConfig resolve(const ExperimentConfig& config, std::vector<std::string>* defaulted) {
    const auto& defs = defaults_for(config.command);
    for (const auto& [k, v] : config.values) {
        if (!defs.count(k)) throw std::invalid_argument("unknown parameter '" + k + "' for " + config.command);
    }
    ExperimentConfig out = config;
    for (const auto& [k, v] : defs) {
        if (!out.values.count(k)) {
            out.values[k] = v;
            if (defaulted) defaulted->push_back(k);
        }
    }
    return out;
}

std::string file_hash(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(ss.str());
    return hex.str();
}

int run(const ExperimentConfig& config, std::ostream& log) {
    try {
        std::vector<std::string> defaulted;
        const auto resolved = resolve(config, &defaulted);
        const auto cmd = commands().at(resolved.command);
        for (const auto& k : defaulted) log << "default " << k << "=" << resolved.values.at(k) << '\n';

        std::error_code ec;
        fs::create_directories(resolved.out_dir, ec);
        if (ec || !fs::is_directory(resolved.out_dir)) {
            log << "error: cannot create output directory " << resolved.out_dir << '\n';
            return config_error;
        }
        Outputs out(resolved.out_dir);
        const Params params(resolved.values);
        int status = ok;
        try {
            cmd(params, out, log);
        } catch (const StatisticalCheckError& e) {
            log << "statistical check failed: " << e.what() << '\n';
            status = statistical_error;
        }

        std::ostringstream m;
        m << "# rcm experiment manifest; replay with: rcm replay <this file> --out <dir>\n";
        m << "command=" << resolved.command << '\n';
        for (const auto& [k, v] : resolved.values) m << k << '=' << v << '\n';
        m << "# defaulted:";
        for (const auto& k : defaulted) m << ' ' << k;
        m << '\n';
        for (const auto& name : out.names()) m << "# artifact " << name << " fnv1a64=" << file_hash(out.dir() / name) << '\n';
        std::ofstream mf(resolved.out_dir / "manifest.txt", std::ios::binary);
        mf << m.str();
        if (!mf) {
            log << "error: cannot write manifest\n";
            return config_error;
        }
        return status;
    } catch (const NumericalError& e) {
        log << "numerical error: " << e.what() << '\n';
        return numerical_error;
    } catch (const StatisticalCheckError& e) {
        log << "statistical check failed: " << e.what() << '\n';
        return statistical_error;
    } catch (const std::invalid_argument& e) {
        log << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const std::out_of_range& e) {
        log << "config error: " << e.what() << '\n';
        return config_error;
    }
}

}  // namespace rcm::cli
