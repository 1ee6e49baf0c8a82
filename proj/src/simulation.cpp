#include "vrmrf/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

#include "vrmrf/parallel.hpp"
#include "vrmrf/rng.hpp"

namespace vrmrf {

namespace {

std::size_t checked_table_cells(int alphabet_size, int n_sites) {
    std::size_t cells = 1;
    for (int i = 0; i < n_sites; ++i) {
        cells *= static_cast<std::size_t>(alphabet_size);
        if (cells > JointTable::kMaxCells)
            throw DataError("block too large for table budget");
    }
    return cells;
}

}  // namespace

void JointTable::validate() const {
    if (alphabet_size < 2) throw DataError("alphabet size must be at least 2");
    if (n_sites < 1) throw DataError("joint table needs at least one site");
    const std::size_t cells = checked_table_cells(alphabet_size, n_sites);
    if (probabilities.size() != cells)
        throw DataError("joint table size does not match alphabet^n_sites");
    double total = 0.0;
    for (double p : probabilities) {
        if (p < 0.0) throw DataError("joint table has a negative entry");
        total += p;
    }
    if (std::fabs(total - 1.0) > 1e-12)
        throw DataError("joint table does not sum to 1");
}

bool JointTable::full_support() const {
    return std::all_of(probabilities.begin(), probabilities.end(),
                       [](double p) { return p > 0.0; });
}

int JointTable::digit(std::size_t config, int site) const {
    std::size_t divisor = 1;
    for (int j = n_sites - 1; j > site; --j) divisor *= alphabet_size;
    return static_cast<int>(config / divisor % alphabet_size);
}

JointTable random_block_model(std::uint64_t seed, int n_sites,
                              const std::vector<int>& block_sizes, int alphabet_size,
                              double concentration) {
    if (concentration <= 0.0) throw DataError("concentration must be positive");
    int covered = 0;
    for (int k : block_sizes) {
        if (k < 1) throw DataError("block sizes must be positive");
        covered += k;
    }
    if (covered != n_sites)
        throw DataError("block sizes must partition the sites");
    checked_table_cells(alphabet_size, n_sites);

    Rng rng(seed);
    std::vector<std::vector<double>> block_dists;
    block_dists.reserve(block_sizes.size());
    for (int k : block_sizes) {
        const std::size_t cells = checked_table_cells(alphabet_size, k);
        std::vector<double> dist(cells);
        double total = 0.0;
        for (auto& cell : dist) {
            cell = rng.gamma(concentration);
            total += cell;
        }
        // Dirichlet draw, then floor at 1e-3 and renormalize: full support.
        double floored_total = 0.0;
        for (auto& cell : dist) {
            cell = std::max(cell / total, 1e-3);
            floored_total += cell;
        }
        for (auto& cell : dist) cell /= floored_total;
        block_dists.push_back(std::move(dist));
    }

    JointTable joint;
    joint.alphabet_size = alphabet_size;
    joint.n_sites = n_sites;
    joint.probabilities.assign(checked_table_cells(alphabet_size, n_sites), 1.0);
    for (std::size_t config = 0; config < joint.probabilities.size(); ++config) {
        int offset = 0;
        for (std::size_t b = 0; b < block_sizes.size(); ++b) {
            std::size_t subkey = 0;
            for (int j = 0; j < block_sizes[b]; ++j)
                subkey = subkey * alphabet_size + joint.digit(config, offset + j);
            joint.probabilities[config] *= block_dists[b][subkey];
            offset += block_sizes[b];
        }
    }
    joint.validate();
    return joint;
}

namespace {

// Conditional table of X_site given the (l, r) arms, indexed by
// ctx * |A| + a with ctx = (left digits, right digits) packed left to right.
std::vector<double> conditional_table(const JointTable& joint, int site, int l, int r) {
    const int alphabet = joint.alphabet_size;
    std::size_t n_contexts = 1;
    for (int i = 0; i < l + r; ++i) n_contexts *= alphabet;

    std::vector<double> marginal(n_contexts * alphabet, 0.0);
    for (std::size_t config = 0; config < joint.probabilities.size(); ++config) {
        std::size_t ctx = 0;
        for (int j = site - l; j < site; ++j) ctx = ctx * alphabet + joint.digit(config, j);
        for (int j = site + 1; j <= site + r; ++j)
            ctx = ctx * alphabet + joint.digit(config, j);
        marginal[ctx * alphabet + joint.digit(config, site)] += joint.probabilities[config];
    }
    for (std::size_t ctx = 0; ctx < n_contexts; ++ctx) {
        double total = 0.0;
        for (int a = 0; a < alphabet; ++a) total += marginal[ctx * alphabet + a];
        if (total <= 0.0) throw DataError("joint lacks full support");
        for (int a = 0; a < alphabet; ++a) marginal[ctx * alphabet + a] /= total;
    }
    return marginal;
}

}  // namespace

bool neighborhood_satisfied(const JointTable& joint, int site, int l, int r,
                            double tolerance) {
    joint.validate();
    if (!joint.full_support()) throw DataError("joint lacks full support");
    if (site < 0 || site >= joint.n_sites) throw DataError("site out of range");
    const int max_l = site;
    const int max_r = joint.n_sites - 1 - site;
    if (l < 0 || r < 0 || l > max_l || r > max_r) throw DataError("arms out of range");

    const int alphabet = joint.alphabet_size;
    const std::vector<double> small = conditional_table(joint, site, l, r);

    for (int big_l = l; big_l <= max_l; ++big_l) {
        for (int big_r = r; big_r <= max_r; ++big_r) {
            if (big_l == l && big_r == r) continue;
            const std::vector<double> big = conditional_table(joint, site, big_l, big_r);
            for (std::size_t config = 0; config < joint.probabilities.size(); ++config) {
                std::size_t small_ctx = 0;
                for (int j = site - l; j < site; ++j)
                    small_ctx = small_ctx * alphabet + joint.digit(config, j);
                for (int j = site + 1; j <= site + r; ++j)
                    small_ctx = small_ctx * alphabet + joint.digit(config, j);
                std::size_t big_ctx = 0;
                for (int j = site - big_l; j < site; ++j)
                    big_ctx = big_ctx * alphabet + joint.digit(config, j);
                for (int j = site + 1; j <= site + big_r; ++j)
                    big_ctx = big_ctx * alphabet + joint.digit(config, j);
                const int a = joint.digit(config, site);
                if (std::fabs(big[big_ctx * alphabet + a] - small[small_ctx * alphabet + a]) >
                    tolerance)
                    return false;
            }
        }
    }
    return true;
}

std::pair<int, int> true_neighborhood(const JointTable& joint, int site, double tolerance) {
    const int max_l = site;
    const int max_r = joint.n_sites - 1 - site;
    for (int total = 0; total <= max_l + max_r; ++total) {
        for (int l = std::max(0, total - max_r); l <= std::min(total, max_l); ++l) {
            const int r = total - l;
            if (neighborhood_satisfied(joint, site, l, r, tolerance)) return {l, r};
        }
    }
    // the full window always satisfies the condition vacuously
    return {max_l, max_r};
}

GenotypeMatrix sample(const JointTable& joint, int n_individuals, std::uint64_t seed) {
    joint.validate();
    if (n_individuals < 1) throw DataError("need at least one individual");

    std::vector<double> cdf(joint.probabilities.size());
    std::partial_sum(joint.probabilities.begin(), joint.probabilities.end(), cdf.begin());

    const int n_sites = joint.n_sites;
    std::vector<std::uint8_t> cells(
        static_cast<std::size_t>(n_sites) * static_cast<std::size_t>(n_individuals));
    Rng rng(seed);
    for (int i = 0; i < n_individuals; ++i) {
        std::size_t config = rng.sample_cdf(cdf);
        for (int s = n_sites - 1; s >= 0; --s) {
            cells[static_cast<std::size_t>(s) * n_individuals + i] =
                static_cast<std::uint8_t>(config % joint.alphabet_size);
            config /= joint.alphabet_size;
        }
    }

    std::vector<SiteMeta> meta(n_sites);
    for (int s = 0; s < n_sites; ++s) {
        meta[s].site_index = s;
        char buf[16];
        std::snprintf(buf, sizeof buf, "sim%06d", s);
        meta[s].snp_id = buf;
        meta[s].chromosome = 1;
        meta[s].position_bp = static_cast<long>(s + 1) * 1000;
    }
    return GenotypeMatrix(joint.alphabet_size, std::move(meta), n_individuals,
                          std::move(cells));
}

double naive_pml(const GenotypeMatrix& matrix, int site, int l, int r, double penalty_c) {
    const auto [span_start, span_end] = matrix.chromosome_span_of(site);
    if (site - l < span_start || site + r > span_end)
        throw DataError("context window crosses a chromosome boundary");

    const int alphabet = matrix.alphabet_size();
    std::map<std::string, std::map<char, long>> table;
    for (int i = 0; i < matrix.n_individuals(); ++i) {
        std::string context;
        char center = 0;
        bool missing = false;
        for (int k = site - l; k <= site + r; ++k) {
            const std::uint8_t v = matrix.at(i, k);
            if (v == GenotypeMatrix::kMissing) {
                missing = true;
                break;
            }
            const char symbol = static_cast<char>('0' + v);
            if (k == site) center = symbol;
            else context.push_back(symbol);
        }
        if (missing) continue;
        ++table[context][center];
    }

    double log_likelihood = 0.0;
    for (const auto& [context, center_counts] : table) {
        long total = 0;
        for (const auto& [_, count] : center_counts) total += count;
        for (const auto& [_, count] : center_counts)
            log_likelihood += static_cast<double>(count) *
                              std::log(static_cast<double>(count) / static_cast<double>(total));
    }
    log_likelihood /= std::log(static_cast<double>(alphabet));

    const double penalty = penalty_c * std::pow(static_cast<double>(alphabet), l + r) *
                           std::log(static_cast<double>(matrix.n_individuals())) /
                           std::log(static_cast<double>(alphabet));
    return log_likelihood - penalty;
}

SiteNeighborhood naive_neighborhood(const GenotypeMatrix& matrix, int site,
                                    const NeighborhoodParams& params) {
    const auto [span_start, span_end] = matrix.chromosome_span_of(site);
    const int max_l = std::min(params.max_left, site - span_start);
    const int max_r = std::min(params.max_right, span_end - site);

    SiteNeighborhood best;
    best.site = site;
    best.pml_score = -std::numeric_limits<double>::infinity();
    for (int total = 0; total <= max_l + max_r; ++total) {
        for (int l = std::max(0, total - max_r); l <= std::min(total, max_l); ++l) {
            const int r = total - l;
            const double score = naive_pml(matrix, site, l, r, params.penalty_c);
            if (score > best.pml_score) {
                best.l_hat = l;
                best.r_hat = r;
                best.pml_score = score;
            }
        }
    }
    return best;
}

double kl_divergence(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size() || p.empty())
        throw DataError("kl_divergence needs two distributions over the same alphabet");
    const double log_alphabet = std::log(static_cast<double>(p.size()));
    double divergence = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) {
        if (p[a] == 0.0) continue;
        if (q[a] == 0.0) return std::numeric_limits<double>::infinity();
        divergence += p[a] * std::log(p[a] / q[a]);
    }
    return divergence / log_alphabet;
}

std::vector<ConsistencyRow> consistency_experiment(
    const JointTable& joint, const std::string& model_id, const std::vector<long>& n_grid,
    int replicates, const std::vector<int>& sites, const NeighborhoodParams& params,
    std::uint64_t base_seed, unsigned n_threads) {
    joint.validate();
    params.validate();
    if (replicates < 0) throw DataError("replicates must be >= 0");
    if (sites.empty()) throw DataError("no sites requested");

    std::vector<std::pair<int, int>> truth(sites.size());
    for (std::size_t k = 0; k < sites.size(); ++k)
        truth[k] = true_neighborhood(joint, sites[k]);

    const std::size_t n_tasks = n_grid.size() * static_cast<std::size_t>(replicates);
    std::vector<std::vector<ConsistencyRow>> per_task(n_tasks);
    if (n_threads == 0) n_threads = default_thread_count();

    parallel_for(n_tasks, n_threads, [&](std::size_t task, unsigned) {
        const std::size_t n_index = task / replicates;
        const int replicate = static_cast<int>(task % replicates);
        const long n = n_grid[n_index];
        const GenotypeMatrix matrix =
            sample(joint, static_cast<int>(n), derive_seed(base_seed, task));
        auto& rows = per_task[task];
        rows.reserve(sites.size());
        for (std::size_t k = 0; k < sites.size(); ++k) {
            const SiteNeighborhood fit = estimate_neighborhood(matrix, sites[k], params);
            ConsistencyRow row;
            row.model_id = model_id;
            row.n = n;
            row.replicate = replicate;
            row.site = sites[k];
            row.l_true = truth[k].first;
            row.r_true = truth[k].second;
            row.l_hat = fit.l_hat;
            row.r_hat = fit.r_hat;
            row.recovered = fit.l_hat == truth[k].first && fit.r_hat == truth[k].second;
            rows.push_back(std::move(row));
        }
    });

    std::vector<ConsistencyRow> rows;
    rows.reserve(n_tasks * sites.size());
    for (auto& task_rows : per_task)
        for (auto& row : task_rows) rows.push_back(std::move(row));
    return rows;
}

std::vector<std::pair<long, double>> recovery_by_n(const std::vector<ConsistencyRow>& rows) {
    std::map<long, std::pair<long, long>> tallies;  // n -> (recovered, total)
    for (const auto& row : rows) {
        auto& [recovered, total] = tallies[row.n];
        recovered += row.recovered;
        ++total;
    }
    std::vector<std::pair<long, double>> rates;
    rates.reserve(tallies.size());
    for (const auto& [n, tally] : tallies)
        rates.emplace_back(n, static_cast<double>(tally.first) /
                                  static_cast<double>(std::max<long>(tally.second, 1)));
    return rates;
}

void write_experiment_csv(const std::vector<ConsistencyRow>& rows, std::ostream& out,
                          const std::string& header) {
    out << header;
    out << "model_id,n,replicate,site,l_true,r_true,l_hat,r_hat,recovered\n";
    for (const auto& row : rows) {
        out << row.model_id << ',' << row.n << ',' << row.replicate << ',' << row.site << ','
            << row.l_true << ',' << row.r_true << ',' << row.l_hat << ',' << row.r_hat << ','
            << (row.recovered ? 1 : 0) << '\n';
    }
}

}  // namespace vrmrf
