#pragma once

// Ground-truth machinery for validating the estimator: explicit joint
// distributions over short site segments, brute-force neighborhoods
// computed straight from the table, i.i.d. sampling, and a string-based
// reference scorer kept deliberately independent of the estimator's
// counting path.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "vrmrf/estimator.hpp"
#include "vrmrf/genotype_matrix.hpp"

namespace vrmrf {

// Explicit joint distribution over alphabet^n_sites configurations.
// Configuration index: site 0 is the most significant base-|A| digit.
struct JointTable {
    int alphabet_size = 2;
    int n_sites = 0;
    std::vector<double> probabilities;

    static constexpr std::size_t kMaxCells = std::size_t{1} << 20;

    void validate() const;
    bool full_support() const;
    int digit(std::size_t config, int site) const;
};

// Product of independent per-block distributions over contiguous blocks
// given by their sizes. Block cells are drawn Dirichlet(concentration)
// via gamma draws, floored at 1e-3, and renormalized so the joint has
// full support. Deterministic in the seed.
JointTable random_block_model(std::uint64_t seed, int n_sites,
                              const std::vector<int>& block_sizes, int alphabet_size,
                              double concentration);

// True conditional of X_site given the (l, r) arms equals the conditional
// given every larger window, compared cell-by-cell within tolerance.
bool neighborhood_satisfied(const JointTable& joint, int site, int l, int r,
                            double tolerance = 1e-12);

// Minimal (l, r) in (l + r, l) order satisfying the window condition.
std::pair<int, int> true_neighborhood(const JointTable& joint, int site,
                                      double tolerance = 1e-12);

// n i.i.d. configurations by inverse CDF; single chromosome, no missing.
GenotypeMatrix sample(const JointTable& joint, int n_individuals, std::uint64_t seed);

// Reference PML score that materializes every context as a string; exists
// solely to cross-check the optimized estimator.
double naive_pml(const GenotypeMatrix& matrix, int site, int l, int r, double penalty_c);

SiteNeighborhood naive_neighborhood(const GenotypeMatrix& matrix, int site,
                                    const NeighborhoodParams& params);

// Kullback-Leibler divergence with logs in base |A| = P.size(). Terms with
// P(a) = 0 contribute 0; P(a) > Q(a) = 0 gives +infinity.
double kl_divergence(const std::vector<double>& p, const std::vector<double>& q);

struct ConsistencyRow {
    std::string model_id;
    long n = 0;
    int replicate = 0;
    int site = 0;
    int l_true = 0;
    int r_true = 0;
    int l_hat = 0;
    int r_hat = 0;
    bool recovered = false;
};

// Samples `replicates` independent datasets per n and records whether the
// estimate matches the table's true neighborhood at each requested site.
// Replicate seeds derive from base_seed, so output is thread-invariant.
std::vector<ConsistencyRow> consistency_experiment(
    const JointTable& joint, const std::string& model_id, const std::vector<long>& n_grid,
    int replicates, const std::vector<int>& sites, const NeighborhoodParams& params,
    std::uint64_t base_seed, unsigned n_threads = 1);

// Pooled recovery fraction per n, ascending in n.
std::vector<std::pair<long, double>> recovery_by_n(const std::vector<ConsistencyRow>& rows);

// CSV: model_id,n,replicate,site,l_true,r_true,l_hat,r_hat,recovered.
void write_experiment_csv(const std::vector<ConsistencyRow>& rows, std::ostream& out,
                          const std::string& header);

}  // namespace vrmrf
