#ifndef DPKM_HARNESS_HPP
#define DPKM_HARNESS_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dpkm/dataset.hpp"
#include "dpkm/dplloyd.hpp"
#include "dpkm/error_models.hpp"
#include "dpkm/eugkm.hpp"
#include "dpkm/gkm.hpp"
#include "dpkm/hybrid.hpp"
#include "dpkm/kmeans.hpp"
#include "dpkm/mechanisms.hpp"
#include "dpkm/pgkm.hpp"

namespace dpkm {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when a repetition's ledger does not sum to its epsilon. This is a
// correctness bug in an algorithm, not a tolerable fault.
class InternalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    bool use_synthetic = true;
    std::string dataset_path;
    SyntheticSpec synthetic{2, 5, 10000, 0.45, 0.0, 1.0, 0};
    std::size_t k = 5;
    double r = 1.0;
    std::vector<double> eps_list{1.0};
    std::vector<std::string> algorithms{"lloyd_baseline", "dplloyd", "eugkm"};
    std::size_t init_sets = 30;
    std::uint64_t master_seed = 0;
    double theta = 10.0;
    double rho = 0.25;
    std::size_t max_cells = std::size_t(1) << 20;
    bool desk = false; // desk-scale defaults (init_sets=10, reps=10)
    std::map<std::string, std::size_t> reps; // per-algorithm overrides

    std::size_t reps_for(const std::string& algo) const {
        auto it = reps.find(algo);
        if (it != reps.end()) return it->second;
        if (algo == "eugkm" || algo == "hybrid_outer" || algo == "hybrid_inner") return 10;
        return desk ? 10 : 100; // dplloyd, gkm, gkm3k, pgkm
    }

    std::size_t effective_init_sets() const {
        auto it = reps.find("init_sets");
        if (it != reps.end()) return it->second;
        return desk ? std::min<std::size_t>(init_sets, 10) : init_sets;
    }
};

struct ReportRow {
    std::string algorithm;
    double eps = 0.0;
    double mean_nicv = 0.0;
    double std_nicv = 0.0;
    std::size_t n_runs = 0;
    std::int64_t wall_ms = 0;
};

struct Report {
    std::vector<ReportRow> rows;
    double baseline_nicv = 0.0;
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        // trim
        std::size_t b = item.find_first_not_of(" \t");
        std::size_t e = item.find_last_not_of(" \t");
        if (b == std::string::npos) continue;
        out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

inline double to_double(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value '" + s + "' for key '" + key + "'");
    }
}

inline std::size_t to_size(const std::string& s, const std::string& key) {
    const double v = to_double(s, key);
    if (v < 0 || v != std::floor(v))
        throw ConfigError("config: expected non-negative integer for key '" + key + "'");
    return static_cast<std::size_t>(v);
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// Two-pass mean/std (sample std, n-1 denominator) so the result does not
// depend on accumulation order beyond plain summation.
inline void mean_std(const std::vector<double>& xs, double& mean, double& stddev) {
    mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    stddev = 0.0;
    if (xs.size() > 1) {
        double acc = 0.0;
        for (double x : xs) acc += (x - mean) * (x - mean);
        stddev = std::sqrt(acc / static_cast<double>(xs.size() - 1));
    }
}

} // namespace detail

// Flat key=value config text; '#' starts a comment line.
inline ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    bool synthetic_k_set = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const std::size_t b = line.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: missing '=' at line " + std::to_string(lineno));
        auto trim = [](std::string s) {
            const std::size_t x = s.find_first_not_of(" \t");
            const std::size_t y = s.find_last_not_of(" \t");
            return x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "dataset.path") {
            cfg.dataset_path = value;
            cfg.use_synthetic = false;
        } else if (key == "synthetic.d") {
            cfg.synthetic.d = detail::to_size(value, key);
        } else if (key == "synthetic.k") {
            cfg.synthetic.k = detail::to_size(value, key);
            synthetic_k_set = true;
        } else if (key == "synthetic.n") {
            cfg.synthetic.n = detail::to_size(value, key);
        } else if (key == "synthetic.separation") {
            cfg.synthetic.separation = detail::to_double(value, key);
        } else if (key == "synthetic.std") {
            cfg.synthetic.cluster_std = detail::to_double(value, key);
        } else if (key == "k") {
            cfg.k = detail::to_size(value, key);
        } else if (key == "r") {
            cfg.r = detail::to_double(value, key);
        } else if (key == "eps") {
            cfg.eps_list.clear();
            for (const auto& item : detail::split_list(value))
                cfg.eps_list.push_back(detail::to_double(item, key));
        } else if (key == "algorithms") {
            cfg.algorithms = detail::split_list(value);
        } else if (key == "seed") {
            cfg.master_seed = static_cast<std::uint64_t>(detail::to_size(value, key));
        } else if (key == "init_sets") {
            cfg.init_sets = detail::to_size(value, key);
        } else if (key == "theta") {
            cfg.theta = detail::to_double(value, key);
        } else if (key == "rho") {
            cfg.rho = detail::to_double(value, key);
        } else if (key == "max_cells") {
            cfg.max_cells = detail::to_size(value, key);
        } else if (key.rfind("reps.", 0) == 0) {
            cfg.reps[key.substr(5)] = detail::to_size(value, key);
        } else {
            throw ConfigError("config: unknown key '" + key + "' at line " + std::to_string(lineno));
        }
    }
    if (cfg.eps_list.empty()) throw ConfigError("config: eps list must be non-empty");
    for (double e : cfg.eps_list)
        if (!(e > 0.0)) throw ConfigError("config: eps values must be positive");
    if (cfg.k == 0) throw ConfigError("config: k must be >= 1");
    if (cfg.use_synthetic && !synthetic_k_set) cfg.synthetic.k = cfg.k;
    cfg.synthetic.r = cfg.r;
    return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open '" + path + "'");
    return parse_config(in);
}

// count sphere-packing init sets with seeds derived from (master_seed, index);
// shared across all algorithms within a run.
inline std::vector<Centroids> make_init_sets(std::size_t d, std::size_t k, double r,
                                             std::size_t count, std::uint64_t master_seed) {
    if (count == 0) throw ParameterError("make_init_sets: count must be >= 1");
    std::vector<Centroids> sets;
    sets.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint64_t seed = derive_seed(master_seed, "init/" + std::to_string(i));
        sets.push_back(sphere_packing_init(d, k, r, seed).centroids);
    }
    return sets;
}

// Minimum NICV of non-private Lloyd over the shared init sets.
inline double run_baseline(const Dataset& data, const std::vector<Centroids>& init_sets) {
    double best = std::numeric_limits<double>::infinity();
    for (const Centroids& init : init_sets)
        best = std::min(best, nicv(data, lloyd(data, init)));
    return best;
}

namespace detail {

inline void audit_budget(const Budget& budget, double eps, const std::string& algo) {
    if (std::fabs(budget.spent() - eps) > Budget::kTolerance)
        throw InternalError("budget audit failed for " + algo + ": ledger " +
                            format_double(budget.spent()) + " != eps " + format_double(eps));
}

inline Rng rep_rng(std::uint64_t master, const std::string& algo, double eps, std::size_t rep) {
    return Rng(derive_seed(master, algo + "/" + format_double(eps) + "/" + std::to_string(rep)));
}

} // namespace detail

// Run the full repetition/averaging protocol and aggregate raw-data NICVs.
inline Report run_experiment(const ExperimentConfig& cfg) {
    Dataset data;
    if (cfg.use_synthetic) {
        SyntheticSpec spec = cfg.synthetic;
        spec.seed = derive_seed(cfg.master_seed, "synthetic");
        data = gen_synthetic(spec).data;
    } else {
        data = normalize(load_csv(cfg.dataset_path), cfg.r);
    }

    const std::size_t n_inits = cfg.effective_init_sets();
    const std::vector<Centroids> init_sets =
        make_init_sets(data.d, cfg.k, data.r, n_inits, cfg.master_seed);

    Report report;
    report.baseline_nicv = run_baseline(data, init_sets);

    EugkmOptions eugkm_opts;
    eugkm_opts.theta = cfg.theta;
    eugkm_opts.max_cells = cfg.max_cells;

    for (const std::string& algo : cfg.algorithms) {
        if (algo == "lloyd_baseline") {
            ReportRow row;
            row.algorithm = algo;
            row.eps = std::numeric_limits<double>::infinity();
            row.mean_nicv = report.baseline_nicv;
            row.std_nicv = 0.0;
            row.n_runs = n_inits;
            report.rows.push_back(row);
            continue;
        }
        for (double eps : cfg.eps_list) {
            const auto start = std::chrono::steady_clock::now();
            std::vector<double> nicvs;

            if (algo == "dplloyd") {
                const std::size_t reps = cfg.reps_for("dplloyd");
                std::size_t rep = 0;
                for (const Centroids& init : init_sets) {
                    for (std::size_t rr = 0; rr < reps; ++rr, ++rep) {
                        Rng rng = detail::rep_rng(cfg.master_seed, algo, eps, rep);
                        Budget budget(eps);
                        const Centroids c = dplloyd(data, init, eps, DPLloydParams{}, rng, budget);
                        detail::audit_budget(budget, eps, algo);
                        nicvs.push_back(nicv(data, c));
                    }
                }
            } else if (algo == "gkm" || algo == "gkm3k") {
                BlockPolicy policy;
                policy.mode = (algo == "gkm3k") ? BlockPolicy::Mode::THREE_K
                                                : BlockPolicy::Mode::N_POW_04;
                const std::size_t reps = cfg.reps_for(algo);
                for (std::size_t rep = 0; rep < reps; ++rep) {
                    Rng rng = detail::rep_rng(cfg.master_seed, algo, eps, rep);
                    Budget budget(eps);
                    const Centroids c = gkm(data, cfg.k, eps, policy, rng, budget);
                    detail::audit_budget(budget, eps, algo);
                    nicvs.push_back(nicv(data, c));
                }
            } else if (algo == "pgkm") {
                const std::size_t reps = cfg.reps_for("pgkm");
                for (std::size_t rep = 0; rep < reps; ++rep) {
                    Rng rng = detail::rep_rng(cfg.master_seed, algo, eps, rep);
                    Budget budget(eps);
                    const Centroids c = pgkm(data, cfg.k, eps, PgkmParams{}, rng, budget);
                    detail::audit_budget(budget, eps, algo);
                    nicvs.push_back(nicv(data, c));
                }
            } else if (algo == "eugkm") {
                const std::size_t synopses = cfg.reps_for("eugkm");
                for (std::size_t rep = 0; rep < synopses; ++rep) {
                    Rng rng = detail::rep_rng(cfg.master_seed, algo, eps, rep);
                    Budget budget(eps);
                    const EugkmResult res = eugkm(data, cfg.k, eps, init_sets, rng, budget, eugkm_opts);
                    detail::audit_budget(budget, eps, algo);
                    nicvs.push_back(nicv(data, res.centroids));
                }
            } else if (algo == "hybrid") {
                const std::size_t outer = cfg.reps_for("hybrid_outer");
                const std::size_t inner = cfg.reps_for("hybrid_inner");
                HybridParams params;
                params.rho = cfg.rho;
                params.eugkm = eugkm_opts;
                const HybridDecision dec =
                    hybrid_threshold(data.n, data.d, cfg.k, data.r, cfg.rho, params.t);
                const bool applied = dec.applied_hybrid && eps >= dec.eps_threshold;
                for (std::size_t o = 0; o < outer; ++o) {
                    Rng stage_rng = detail::rep_rng(cfg.master_seed, "hybrid/stage1", eps, o);
                    // Stage 1 is shared across the inner refinements; its eps/2
                    // spend is re-ledgered in every repetition's budget below.
                    Budget stage_budget(eps);
                    Centroids intermediate;
                    if (applied) {
                        intermediate = eugkm(data, cfg.k, eps / 2.0, init_sets, stage_rng,
                                             stage_budget, eugkm_opts)
                                           .centroids;
                    } else {
                        intermediate =
                            eugkm(data, cfg.k, eps, init_sets, stage_rng, stage_budget, eugkm_opts)
                                .centroids;
                    }
                    for (std::size_t in_rep = 0; in_rep < inner; ++in_rep) {
                        Budget budget(eps);
                        if (applied) {
                            budget.spend("eugkm", eps / 2.0);
                            Rng rng = detail::rep_rng(cfg.master_seed, "hybrid/stage2", eps,
                                                      o * inner + in_rep);
                            const Centroids c =
                                dplloyd_one_round(data, intermediate, eps / 2.0, rng, budget);
                            detail::audit_budget(budget, eps, algo);
                            nicvs.push_back(nicv(data, c));
                        } else {
                            budget.spend("eugkm", eps);
                            detail::audit_budget(budget, eps, algo);
                            nicvs.push_back(nicv(data, intermediate));
                        }
                    }
                }
            } else {
                throw ConfigError("config: unknown algorithm '" + algo + "'");
            }

            ReportRow row;
            row.algorithm = algo;
            row.eps = eps;
            detail::mean_std(nicvs, row.mean_nicv, row.std_nicv);
            row.n_runs = nicvs.size();
            row.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - start)
                              .count();
            report.rows.push_back(row);
        }
    }
    return report;
}

// Report CSV. With include_timing=false the wall_ms column is written as 0,
// making the output byte-identical across runs of the same config.
inline void write_report_csv(const Report& report, std::ostream& out, bool include_timing = true) {
    out << "algorithm,eps,mean_nicv,std_nicv,n_runs,wall_ms\n";
    for (const ReportRow& row : report.rows) {
        out << row.algorithm << ',' << detail::format_double(row.eps) << ','
            << detail::format_double(row.mean_nicv) << ','
            << detail::format_double(row.std_nicv) << ',' << row.n_runs << ','
            << (include_timing ? row.wall_ms : 0) << '\n';
    }
    out << "# baseline_nicv=" << detail::format_double(report.baseline_nicv) << '\n';
}

struct PredictLattice {
    std::vector<std::size_t> n_values{10000};
    std::vector<std::size_t> d_values{2};
    std::vector<std::size_t> k_values{5};
    std::vector<double> eps_values{1.0};
    std::size_t t = 5;
    double r = 1.0;
    double rho = 0.25;
    double theta = 10.0;
};

// Evaluate every closed-form predictor plus the hybrid threshold over the
// supplied parameter lattice; prints CSV.
inline void predict_table(const PredictLattice& lattice, std::ostream& out) {
    out << "N,d,k,t,r,rho,theta,eps,M,dplloyd_mse,eugkm_variance,eugkm_bias_bound,"
           "hybrid_one_round_mse,eps_b\n";
    for (std::size_t n : lattice.n_values)
        for (std::size_t d : lattice.d_values)
            for (std::size_t k : lattice.k_values)
                for (double eps : lattice.eps_values) {
                    ErrorModelParams p;
                    p.n = n;
                    p.d = d;
                    p.k = k;
                    p.t = lattice.t;
                    p.r = lattice.r;
                    p.rho = lattice.rho;
                    p.eps = eps;
                    p.theta = lattice.theta;
                    const double m = choose_M(n, eps, d, lattice.theta);
                    const HybridDecision dec =
                        hybrid_threshold(n, d, k, lattice.r, lattice.rho, lattice.t);
                    out << n << ',' << d << ',' << k << ',' << lattice.t << ','
                        << detail::format_double(lattice.r) << ','
                        << detail::format_double(lattice.rho) << ','
                        << detail::format_double(lattice.theta) << ','
                        << detail::format_double(eps) << ',' << detail::format_double(m) << ','
                        << detail::format_double(predict_dplloyd_mse(p)) << ','
                        << detail::format_double(predict_eugkm_variance(p)) << ','
                        << detail::format_double(predict_eugkm_bias_bound(p)) << ','
                        << detail::format_double(predict_hybrid_one_round_mse(p)) << ','
                        << detail::format_double(dec.eps_threshold) << '\n';
                }
}

} // namespace dpkm

#endif // DPKM_HARNESS_HPP
