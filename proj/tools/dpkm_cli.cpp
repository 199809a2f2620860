// Command-line benchmark harness for the private k-means toolkit.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dpkm/dataset.hpp"
#include "dpkm/eugkm.hpp"
#include "dpkm/harness.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitIoError = 3;
constexpr int kExitInternalError = 4;

void write_centroids_csv(const dpkm::Centroids& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw dpkm::IoError("cannot open '" + path + "' for writing");
    out.precision(std::numeric_limits<double>::max_digits10);
    for (std::size_t j = 0; j < c.k; ++j) {
        for (std::size_t i = 0; i < c.d; ++i) {
            if (i) out << ',';
            out << c.at(j, i);
        }
        out << '\n';
    }
}

std::vector<std::size_t> to_sizes(const std::vector<double>& xs) {
    std::vector<std::size_t> out;
    for (double x : xs) out.push_back(static_cast<std::size_t>(x));
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Differentially private k-means benchmark harness"};
    app.require_subcommand(1);

    // --- gen: synthetic dataset ---
    auto* gen = app.add_subcommand("gen", "Write a synthetic Gaussian-cluster CSV and its true centers");
    dpkm::SyntheticSpec spec;
    std::string gen_out = "synthetic.csv";
    std::string centers_out;
    gen->add_option("--d", spec.d, "Dimension")->capture_default_str();
    gen->add_option("--k", spec.k, "Cluster count")->capture_default_str();
    gen->add_option("--n", spec.n, "Point count")->capture_default_str();
    gen->add_option("--separation", spec.separation, "Minimum inter-center distance")->capture_default_str();
    gen->add_option("--std", spec.cluster_std, "Cluster standard deviation (0 = separation/6)");
    gen->add_option("--r", spec.r, "Domain half-width")->capture_default_str();
    gen->add_option("--seed", spec.seed, "Generator seed")->capture_default_str();
    gen->add_option("--out", gen_out, "Output CSV path")->capture_default_str();
    gen->add_option("--centers-out", centers_out, "Optional true-centers CSV path");

    // --- run: config-driven experiment ---
    auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
    std::string config_path;
    std::string report_out;
    bool desk = false, paper = false, no_timing = false;
    run->add_option("config", config_path, "key=value config file")->required();
    run->add_option("--out", report_out, "Write the report CSV here instead of stdout");
    run->add_flag("--desk", desk, "Desk-scale repetition counts (init_sets=10, reps=10)");
    run->add_flag("--paper", paper, "Full repetition protocol (default)");
    run->add_flag("--no-timing", no_timing, "Write wall_ms as 0 for byte-reproducible reports");

    // --- synopsis: publish a grid synopsis ---
    auto* syn = app.add_subcommand("synopsis", "Publish a noisy grid synopsis of a CSV dataset");
    std::string syn_csv;
    double syn_eps = 1.0, syn_theta = 10.0, syn_r = 1.0;
    std::uint64_t syn_seed = 0;
    std::size_t syn_max_cells = std::size_t(1) << 20;
    std::string syn_out;
    syn->add_option("csv", syn_csv, "Input CSV dataset")->required();
    syn->add_option("--eps", syn_eps, "Privacy budget")->required();
    syn->add_option("--theta", syn_theta, "Grid-sizing constant")->capture_default_str();
    syn->add_option("--r", syn_r, "Domain half-width for normalization")->capture_default_str();
    syn->add_option("--seed", syn_seed, "Generator seed")->capture_default_str();
    syn->add_option("--max-cells", syn_max_cells, "Cap on total cell count")->capture_default_str();
    syn->add_option("--out", syn_out, "Write the synopsis here instead of stdout");

    // --- predict: error-model table ---
    auto* pred = app.add_subcommand("predict", "Evaluate the closed-form error models over a lattice");
    std::vector<double> pred_n{10000}, pred_d{2}, pred_k{5}, pred_eps{1.0};
    dpkm::PredictLattice lattice;
    pred->add_option("--n", pred_n, "Dataset sizes")->delimiter(',');
    pred->add_option("--d", pred_d, "Dimensions")->delimiter(',');
    pred->add_option("--k", pred_k, "Cluster counts")->delimiter(',');
    pred->add_option("--eps", pred_eps, "Privacy budgets")->delimiter(',');
    pred->add_option("--t", lattice.t, "DPLloyd iteration count")->capture_default_str();
    pred->add_option("--r", lattice.r, "Domain half-width")->capture_default_str();
    pred->add_option("--rho", lattice.rho, "Normalized centroid magnitude")->capture_default_str();
    pred->add_option("--theta", lattice.theta, "Grid-sizing constant")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            const dpkm::SyntheticData synth = dpkm::gen_synthetic(spec);
            dpkm::write_csv(synth.data, gen_out);
            if (!centers_out.empty()) write_centroids_csv(synth.true_centers, centers_out);
            std::cerr << "wrote " << synth.data.n << " points (d=" << synth.data.d << ") to "
                      << gen_out << "\n";
        } else if (*run) {
            dpkm::ExperimentConfig cfg = dpkm::parse_config_file(config_path);
            if (desk && paper)
                throw dpkm::ConfigError("--desk and --paper are mutually exclusive");
            cfg.desk = desk;
            const dpkm::Report report = dpkm::run_experiment(cfg);
            if (report_out.empty()) {
                dpkm::write_report_csv(report, std::cout, !no_timing);
            } else {
                std::ofstream out(report_out);
                if (!out) throw dpkm::IoError("cannot open '" + report_out + "' for writing");
                dpkm::write_report_csv(report, out, !no_timing);
            }
        } else if (*syn) {
            const dpkm::Dataset data = dpkm::normalize(dpkm::load_csv(syn_csv), syn_r);
            dpkm::Grid grid = dpkm::grid_layout(
                data.d, data.r, dpkm::choose_M(data.n, syn_eps, data.d, syn_theta));
            if (grid.total_cells() > syn_max_cells) {
                const double side = std::pow(static_cast<double>(syn_max_cells),
                                             1.0 / static_cast<double>(data.d));
                grid.m = std::max<std::size_t>(
                    1, static_cast<std::size_t>(std::floor(side + 1e-9)));
            }
            dpkm::Rng rng(syn_seed);
            dpkm::Budget budget(syn_eps);
            const dpkm::Synopsis s = dpkm::publish_synopsis(data, grid, syn_eps, rng, budget);
            if (syn_out.empty()) {
                dpkm::write_synopsis(s, std::cout);
            } else {
                dpkm::write_synopsis(s, syn_out);
            }
        } else if (*pred) {
            lattice.n_values = to_sizes(pred_n);
            lattice.d_values = to_sizes(pred_d);
            lattice.k_values = to_sizes(pred_k);
            lattice.eps_values = pred_eps;
            dpkm::predict_table(lattice, std::cout);
        }
    } catch (const dpkm::InternalError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternalError;
    } catch (const dpkm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const dpkm::ParameterError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const dpkm::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIoError;
    } catch (const dpkm::FormatError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIoError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternalError;
    }
    return 0;
}
