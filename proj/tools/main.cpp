// vrmrf — variable range Markov random field pipeline for SNP data.
//
// Subcommands: qc, fit, segment, associate, simulate. Stages communicate
// through plain text files; every output starts with a header echoing the
// tool version and the full command line.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 degenerate
// statistics promoted to an error by --strict.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vrmrf/association.hpp"
#include "vrmrf/estimator.hpp"
#include "vrmrf/genotype_matrix.hpp"
#include "vrmrf/io.hpp"
#include "vrmrf/parallel.hpp"
#include "vrmrf/qc.hpp"
#include "vrmrf/segmentation.hpp"
#include "vrmrf/simulation.hpp"
#include "vrmrf/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitData = 2;
constexpr int kExitDegenerate = 3;

std::string make_header(int argc, char** argv) {
    std::ostringstream header;
    header << "# vrmrf " << vrmrf::kVersion << "\n# command:";
    for (int i = 0; i < argc; ++i) header << ' ' << argv[i];
    header << '\n';
    return header.str();
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw vrmrf::DataError("can't open file: " + path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw vrmrf::DataError("can't open file for writing: " + path);
    return out;
}

vrmrf::GenotypeMatrix load_matrix(const std::string& matrix_path,
                                  const std::string& raw_path,
                                  const std::string& meta_path,
                                  const std::string& individuals_path) {
    auto meta_in = open_input(meta_path);
    vrmrf::GenotypeMatrix matrix = [&] {
        if (!raw_path.empty()) {
            auto raw_in = open_input(raw_path);
            return vrmrf::parse_raw_genotype_files(raw_in, meta_in);
        }
        auto matrix_in = open_input(matrix_path);
        return vrmrf::parse_genotype_files(matrix_in, meta_in);
    }();
    if (!individuals_path.empty()) {
        auto ids_in = open_input(individuals_path);
        matrix.set_individual_ids(vrmrf::parse_individual_order(ids_in));
    }
    std::cerr << "INFO: " << matrix.n_individuals() << " individuals, " << matrix.n_sites()
              << " sites\n";
    return matrix;
}

struct CommonOptions {
    std::string matrix_path;
    std::string raw_path;
    std::string meta_path;
    std::string individuals_path;
    unsigned threads = vrmrf::default_thread_count();
    bool strict = false;
};

int run_qc(const CommonOptions& common, const std::string& phenotype_path,
           bool hwe_controls_only, const vrmrf::QcParams& params,
           const std::string& out_report, const std::string& out_matrix,
           const std::string& out_meta, const std::string& header) {
    const vrmrf::GenotypeMatrix matrix =
        load_matrix(common.matrix_path, common.raw_path, common.meta_path,
                    common.individuals_path);

    vrmrf::Phenotype phenotype;
    const vrmrf::Phenotype* phenotype_ptr = nullptr;
    if (!phenotype_path.empty()) {
        auto pheno_in = open_input(phenotype_path);
        phenotype = vrmrf::parse_phenotype(pheno_in, matrix);
        phenotype_ptr = &phenotype;
    }
    vrmrf::QcParams effective = params;
    effective.hwe_controls_only = hwe_controls_only;

    const auto [filtered, report] = vrmrf::apply_qc(matrix, effective, phenotype_ptr);

    int removed_maf = 0, removed_hwe = 0;
    for (const auto& site : report.sites) {
        removed_maf += site.removed_maf;
        removed_hwe += site.removed_hwe;
    }
    std::cerr << "INFO: removed " << report.n_removed() << " of " << report.sites.size()
              << " sites (MAF " << removed_maf << ", HWE " << removed_hwe << "), "
              << filtered.n_sites() << " remaining\n";

    if (!out_report.empty()) {
        auto out = open_output(out_report);
        vrmrf::write_qc_report(report, out, header);
    }
    if (!out_matrix.empty()) {
        auto out = open_output(out_matrix);
        vrmrf::serialize_matrix(filtered, out);
    }
    if (!out_meta.empty()) {
        auto out = open_output(out_meta);
        vrmrf::serialize_meta(filtered, out);
    }
    return kExitOk;
}

int run_fit(const CommonOptions& common, const vrmrf::NeighborhoodParams& params,
            const std::string& out_path, const std::string& header) {
    const vrmrf::GenotypeMatrix matrix =
        load_matrix(common.matrix_path, common.raw_path, common.meta_path,
                    common.individuals_path);

    const auto fits = vrmrf::estimate_all(matrix, params, common.threads);
    const auto summary = vrmrf::summarize_neighborhoods(fits);
    std::cerr << "INFO: neighborhood size mean " << summary.mean_total << " sd "
              << summary.sd_total << " (left " << summary.mean_left << ", right "
              << summary.mean_right << ")\n";

    long starved = 0;
    for (const auto& fit : fits) starved += fit.effective_n_at_opt == 0;
    if (starved > 0)
        std::cerr << "WARNING: " << starved << " sites had no complete window at the optimum\n";

    auto out = open_output(out_path);
    vrmrf::write_neighborhoods(fits, matrix, out, header);

    if (starved > 0 && common.strict) return kExitDegenerate;
    return kExitOk;
}

int run_segment(const std::string& neighborhoods_path, const std::string& meta_path,
                const std::string& out_path, const std::string& header) {
    auto meta_in = open_input(meta_path);
    const std::vector<vrmrf::SiteMeta> meta = vrmrf::parse_site_meta(meta_in);

    auto fits_in = open_input(neighborhoods_path);
    const auto fits = vrmrf::read_neighborhoods(fits_in);
    const auto windows = vrmrf::influence_windows(fits, meta);
    const auto summary = vrmrf::summarize_windows(windows);
    std::cerr << "INFO: " << summary.count << " influence windows, mean size "
              << summary.mean_size << ", min " << summary.min_size << ", max "
              << summary.max_size << ", sd " << summary.sd_size << "\n";

    auto out = open_output(out_path);
    vrmrf::write_windows(windows, meta, out, header);
    return kExitOk;
}

int run_associate(const CommonOptions& common, const std::string& windows_path,
                  const std::string& phenotype_path, double report_threshold,
                  const std::string& out_path, const std::string& out_plot,
                  const std::string& out_significant, const std::string& header) {
    const vrmrf::GenotypeMatrix matrix =
        load_matrix(common.matrix_path, common.raw_path, common.meta_path,
                    common.individuals_path);
    auto pheno_in = open_input(phenotype_path);
    const vrmrf::Phenotype phenotype = vrmrf::parse_phenotype(pheno_in, matrix);

    auto windows_in = open_input(windows_path);
    const auto windows = vrmrf::read_windows(windows_in, matrix.meta());

    const auto results = vrmrf::associate_all(matrix, windows, phenotype, common.threads);
    const auto hits = vrmrf::significant_windows(results, report_threshold);

    long degenerate = 0;
    for (const auto& r : results) degenerate += r.degenerate;
    if (degenerate > 0)
        std::cerr << "WARNING: " << degenerate << " windows had degenerate tables (p set to 1)\n";
    std::cerr << "INFO: " << hits.size() << " windows with p < " << report_threshold << "\n";

    {
        auto out = open_output(out_path);
        vrmrf::write_association(results, windows, matrix.meta(), out, header);
    }
    if (!out_plot.empty()) {
        auto out = open_output(out_plot);
        vrmrf::write_plot_data(results, windows, matrix.meta(), out, header);
    }
    if (!out_significant.empty()) {
        auto out = open_output(out_significant);
        std::vector<vrmrf::InfluenceWindow> hit_windows;
        for (const auto& hit : hits) hit_windows.push_back(windows[hit.window_id]);
        vrmrf::write_association(hits, hit_windows, matrix.meta(), out, header);
    }

    if (degenerate > 0 && common.strict) return kExitDegenerate;
    return kExitOk;
}

int run_simulate(std::uint64_t seed, int alphabet, const std::vector<int>& blocks,
                 double concentration, long n_sample, const std::string& out_matrix,
                 const std::string& out_meta, const std::string& out_truth,
                 const std::vector<long>& n_grid, int replicates,
                 std::vector<int> sites, const vrmrf::NeighborhoodParams& params,
                 unsigned threads, const std::string& out_experiment,
                 const std::string& header) {
    int n_sites = 0;
    for (int b : blocks) n_sites += b;
    const vrmrf::JointTable joint =
        vrmrf::random_block_model(seed, n_sites, blocks, alphabet, concentration);

    if (sites.empty()) sites.push_back(n_sites / 2);

    if (!out_truth.empty()) {
        auto out = open_output(out_truth);
        out << header << "site_index\tl_true\tr_true\n";
        for (int s = 0; s < n_sites; ++s) {
            const auto [l, r] = vrmrf::true_neighborhood(joint, s);
            out << s << '\t' << l << '\t' << r << '\n';
        }
    }
    if (!out_matrix.empty() || !out_meta.empty()) {
        if (n_sample <= 0) throw vrmrf::DataError("--n must be positive to sample a matrix");
        const vrmrf::GenotypeMatrix matrix =
            vrmrf::sample(joint, static_cast<int>(n_sample), seed);
        if (!out_matrix.empty()) {
            auto out = open_output(out_matrix);
            vrmrf::serialize_matrix(matrix, out);
        }
        if (!out_meta.empty()) {
            auto out = open_output(out_meta);
            vrmrf::serialize_meta(matrix, out);
        }
        std::cerr << "INFO: sampled " << matrix.n_individuals() << " x " << matrix.n_sites()
                  << " matrix\n";
    }
    if (!out_experiment.empty()) {
        if (n_grid.empty() || replicates <= 0)
            throw vrmrf::DataError("--n-grid and --replicates are required for an experiment");
        const auto rows = vrmrf::consistency_experiment(joint, "block_model", n_grid,
                                                        replicates, sites, params, seed,
                                                        threads);
        auto out = open_output(out_experiment);
        vrmrf::write_experiment_csv(rows, out, header);
        for (const auto& [n, rate] : vrmrf::recovery_by_n(rows))
            std::cerr << "INFO: n=" << n << " recovery " << rate << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"variable range Markov random field pipeline for SNP data"};
    app.require_subcommand(1);
    const std::string header = make_header(argc, argv);

    CommonOptions common;
    vrmrf::QcParams qc_params;
    vrmrf::NeighborhoodParams fit_params;
    std::string phenotype_path, windows_path, neighborhoods_path;
    std::string out_report, out_matrix, out_meta, out_path, out_plot, out_significant;
    std::string out_truth, out_experiment;
    bool hwe_controls_only = false;
    double report_threshold = 1e-4;
    std::uint64_t seed = 1;
    int sim_alphabet = 2;
    std::vector<int> sim_blocks{4, 3, 2};
    double concentration = 0.5;
    long n_sample = 0;
    std::vector<long> n_grid;
    int replicates = 0;
    std::vector<int> sim_sites;

    auto add_matrix_inputs = [&](CLI::App* cmd) {
        auto* matrix_opt = cmd->add_option("--matrix", common.matrix_path,
                                           "score matrix file (one line per site)");
        auto* raw_opt = cmd->add_option("--raw-genotypes", common.raw_path,
                                        "raw genotype TSV (snp_id g1 g2 ...)");
        cmd->add_option("--meta", common.meta_path, "site metadata TSV")->required();
        cmd->add_option("--individuals", common.individuals_path,
                        "individual order file (one id per line)");
        matrix_opt->excludes(raw_opt);
        raw_opt->excludes(matrix_opt);
    };

    auto* qc_cmd = app.add_subcommand("qc", "filter sites by MAF and Hardy-Weinberg");
    add_matrix_inputs(qc_cmd);
    qc_cmd->add_option("--phenotype", phenotype_path, "phenotype TSV (id label)");
    qc_cmd->add_flag("--hwe-controls-only", hwe_controls_only,
                     "compute HWE on controls instead of the pooled sample");
    qc_cmd->add_option("--maf-min", qc_params.maf_min, "minimum minor allele frequency");
    qc_cmd->add_option("--hwe-alpha", qc_params.hwe_alpha, "HWE removal significance level");
    qc_cmd->add_option("--out-report", out_report, "QC report TSV");
    qc_cmd->add_option("--out-matrix", out_matrix, "filtered matrix file");
    qc_cmd->add_option("--out-meta", out_meta, "filtered site metadata TSV");

    auto* fit_cmd = app.add_subcommand("fit", "estimate per-site neighborhoods");
    add_matrix_inputs(fit_cmd);
    fit_cmd->add_option("--penalty-c", fit_params.penalty_c, "penalty constant c > 0");
    fit_cmd->add_option("--max-left", fit_params.max_left, "left arm cap L0");
    fit_cmd->add_option("--max-right", fit_params.max_right, "right arm cap R0");
    fit_cmd->add_option("--out", out_path, "neighborhoods TSV")->required();

    auto* segment_cmd = app.add_subcommand("segment", "cut neighborhoods into influence windows");
    segment_cmd->add_option("--neighborhoods", neighborhoods_path, "fit output TSV")->required();
    segment_cmd->add_option("--meta", common.meta_path, "site metadata TSV")->required();
    segment_cmd->add_option("--out", out_path, "windows TSV")->required();

    auto* associate_cmd =
        app.add_subcommand("associate", "chi-square window/response association");
    add_matrix_inputs(associate_cmd);
    associate_cmd->add_option("--windows", windows_path, "segment output TSV")->required();
    associate_cmd->add_option("--phenotype", phenotype_path, "phenotype TSV (id label)")
        ->required();
    associate_cmd->add_option("--report-threshold", report_threshold,
                              "p-value threshold for the significant list");
    associate_cmd->add_option("--out", out_path, "association TSV")->required();
    associate_cmd->add_option("--out-plot", out_plot, "plot data TSV");
    associate_cmd->add_option("--out-significant", out_significant, "significant windows TSV");

    auto* simulate_cmd = app.add_subcommand("simulate", "block-model sampling and experiments");
    simulate_cmd->add_option("--seed", seed, "random seed");
    simulate_cmd->add_option("--alphabet", sim_alphabet, "alphabet size");
    simulate_cmd->add_option("--blocks", sim_blocks, "comma-separated block sizes")
        ->delimiter(',');
    simulate_cmd->add_option("--concentration", concentration,
                             "Dirichlet concentration of block distributions");
    simulate_cmd->add_option("--n", n_sample, "sample size for --out-matrix");
    simulate_cmd->add_option("--out-matrix", out_matrix, "sampled matrix file");
    simulate_cmd->add_option("--out-meta", out_meta, "sampled site metadata TSV");
    simulate_cmd->add_option("--out-truth", out_truth, "true neighborhoods TSV");
    simulate_cmd->add_option("--n-grid", n_grid, "comma-separated sample sizes")
        ->delimiter(',');
    simulate_cmd->add_option("--replicates", replicates, "replicates per n");
    simulate_cmd->add_option("--sites", sim_sites, "sites to evaluate (default center)")
        ->delimiter(',');
    simulate_cmd->add_option("--penalty-c", fit_params.penalty_c, "penalty constant c > 0");
    simulate_cmd->add_option("--max-left", fit_params.max_left, "left arm cap L0");
    simulate_cmd->add_option("--max-right", fit_params.max_right, "right arm cap R0");
    simulate_cmd->add_option("--out-experiment", out_experiment, "consistency experiment CSV");

    for (auto* cmd : {qc_cmd, fit_cmd, associate_cmd, simulate_cmd}) {
        cmd->add_option("--threads", common.threads, "worker threads");
        cmd->add_flag("--strict", common.strict,
                      "treat degenerate-statistics warnings as errors (exit 3)");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (qc_cmd->parsed()) {
            if (common.matrix_path.empty() && common.raw_path.empty())
                throw vrmrf::DataError("qc needs --matrix or --raw-genotypes");
            return run_qc(common, phenotype_path, hwe_controls_only, qc_params, out_report,
                          out_matrix, out_meta, header);
        }
        if (fit_cmd->parsed()) {
            if (common.matrix_path.empty() && common.raw_path.empty())
                throw vrmrf::DataError("fit needs --matrix or --raw-genotypes");
            return run_fit(common, fit_params, out_path, header);
        }
        if (segment_cmd->parsed())
            return run_segment(neighborhoods_path, common.meta_path, out_path, header);
        if (associate_cmd->parsed()) {
            if (common.matrix_path.empty() && common.raw_path.empty())
                throw vrmrf::DataError("associate needs --matrix or --raw-genotypes");
            if (common.individuals_path.empty())
                throw vrmrf::DataError("associate needs --individuals to align the phenotype");
            return run_associate(common, windows_path, phenotype_path, report_threshold,
                                 out_path, out_plot, out_significant, header);
        }
        if (simulate_cmd->parsed())
            return run_simulate(seed, sim_alphabet, sim_blocks, concentration, n_sample,
                                out_matrix, out_meta, out_truth, n_grid, replicates, sim_sites,
                                fit_params, common.threads, out_experiment, header);
    } catch (const std::exception& e) {
        std::cerr << "ERROR: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}
