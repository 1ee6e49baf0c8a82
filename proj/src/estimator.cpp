#include "vrmrf/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "vrmrf/parallel.hpp"

namespace vrmrf {

namespace {

constexpr std::uint64_t kMaxKeySpace = std::uint64_t{1} << 62;

// |A|^e, throwing once the value leaves the representable key space.
std::uint64_t pow_u64(int base, int exponent) {
    std::uint64_t p = 1;
    for (int i = 0; i < exponent; ++i) {
        if (p > kMaxKeySpace / static_cast<std::uint64_t>(base))
            throw DataError("context window too large for 64-bit keys");
        p *= static_cast<std::uint64_t>(base);
    }
    return p;
}

}  // namespace

void NeighborhoodParams::validate() const {
    if (penalty_c <= 0.0) throw DataError("penalty_c must be positive");
    if (max_left < 0 || max_right < 0) throw DataError("max_left/max_right must be >= 0");
    if (dense_table_limit == 0) throw DataError("dense_table_limit must be positive");
}

ContextCounts::ContextCounts(int alphabet_size, int l, int r, std::size_t dense_limit)
    : alphabet_size_(alphabet_size), l_(l), r_(r) {
    if (alphabet_size < 2) throw DataError("alphabet size must be at least 2");
    if (l < 0 || r < 0) throw DataError("negative context arm");
    table_size_ = pow_u64(alphabet_size, l + r + 1);
    center_stride_ = pow_u64(alphabet_size, r);
    if (table_size_ <= dense_limit) dense_.assign(table_size_, 0);
}

std::uint64_t ContextCounts::key_of(std::span<const std::uint8_t> w, std::uint8_t a,
                                    std::span<const std::uint8_t> v) const {
    if (static_cast<int>(w.size()) != l_ || static_cast<int>(v.size()) != r_)
        throw DataError("context arm length mismatch");
    std::uint64_t key = 0;
    for (std::uint8_t sym : w) key = key * alphabet_size_ + sym;
    key = key * alphabet_size_ + a;
    for (std::uint8_t sym : v) key = key * alphabet_size_ + sym;
    return key;
}

long ContextCounts::count_by_key(std::uint64_t key) const {
    if (!dense_.empty()) return dense_[key];
    const auto it = sparse_.find(key);
    return it == sparse_.end() ? 0 : it->second;
}

long ContextCounts::count(std::span<const std::uint8_t> w, std::uint8_t a,
                          std::span<const std::uint8_t> v) const {
    return count_by_key(key_of(w, a, v));
}

long ContextCounts::context_total(std::span<const std::uint8_t> w,
                                  std::span<const std::uint8_t> v) const {
    const std::uint64_t base = key_of(w, 0, v);
    long total = 0;
    for (int a = 0; a < alphabet_size_; ++a)
        total += count_by_key(base + static_cast<std::uint64_t>(a) * center_stride_);
    return total;
}

ContextCounts count_contexts(const GenotypeMatrix& matrix, int site, int l, int r,
                             std::size_t dense_limit) {
    if (site < 0 || site >= matrix.n_sites()) throw DataError("site out of range");
    const auto [span_start, span_end] = matrix.chromosome_span_of(site);
    if (site - l < span_start || site + r > span_end)
        throw DataError("context window crosses a chromosome boundary");

    ContextCounts counts(matrix.alphabet_size(), l, r, dense_limit);
    const int n = matrix.n_individuals();
    const int alphabet = matrix.alphabet_size();

    for (int i = 0; i < n; ++i) {
        std::uint64_t key = 0;
        bool missing = false;
        for (int k = site - l; k <= site + r; ++k) {
            const std::uint8_t v = matrix.at(i, k);
            if (v == GenotypeMatrix::kMissing) {
                missing = true;
                break;
            }
            key = key * alphabet + v;
        }
        if (!missing) counts.add(key);
    }
    return counts;
}

std::vector<double> conditional_mle(std::span<const long> counts_for_one_context) {
    long total = 0;
    for (long c : counts_for_one_context) {
        if (c < 0) throw DataError("negative count");
        total += c;
    }
    std::vector<double> probs(counts_for_one_context.size());
    if (total == 0) {
        std::fill(probs.begin(), probs.end(), 1.0 / probs.size());
        return probs;
    }
    for (std::size_t a = 0; a < probs.size(); ++a)
        probs[a] = static_cast<double>(counts_for_one_context[a]) / total;
    return probs;
}

double log_conditional_likelihood(const ContextCounts& counts) {
    // N log N summed over cells minus over context totals, then to base |A|.
    const double log_alphabet = std::log(static_cast<double>(counts.alphabet_size()));
    const std::uint64_t center_stride = counts.center_stride();
    const int alphabet = counts.alphabet_size();

    double cell_term = 0.0;
    std::unordered_map<std::uint64_t, long> context_totals;
    counts.for_each([&](std::uint64_t key, long c) {
        cell_term += static_cast<double>(c) * std::log(static_cast<double>(c));
        const std::uint64_t v = key % center_stride;
        const std::uint64_t w = key / center_stride / alphabet;
        context_totals[w * center_stride + v] += c;
    });
    double context_term = 0.0;
    for (const auto& [_, total] : context_totals)
        context_term += static_cast<double>(total) * std::log(static_cast<double>(total));

    return (cell_term - context_term) / log_alphabet;
}

double pml_penalty(const NeighborhoodParams& params, int alphabet_size, int l, int r,
                   long n_individuals) {
    const double log_alphabet = std::log(static_cast<double>(alphabet_size));
    return params.penalty_c * std::pow(static_cast<double>(alphabet_size), l + r) *
           std::log(static_cast<double>(n_individuals)) / log_alphabet;
}

double pml_score(const GenotypeMatrix& matrix, int site, int l, int r,
                 const NeighborhoodParams& params) {
    params.validate();
    const ContextCounts counts = count_contexts(matrix, site, l, r, params.dense_table_limit);
    return log_conditional_likelihood(counts) -
           pml_penalty(params, matrix.alphabet_size(), l, r, matrix.n_individuals());
}

namespace {

// Scratch state reused across sites by one worker thread.
struct GridWorkspace {
    std::vector<std::uint32_t> keys;         // per-individual max-window key
    std::vector<std::uint8_t> incomplete;    // any missing cell in max window
    std::vector<std::vector<std::uint32_t>> pure;        // cascade tables, index l*(R0+1)+r
    std::vector<std::vector<std::uint32_t>> corrections;  // partially-missing individuals
    std::vector<long> correction_totals;
    std::vector<std::uint32_t> merged;
    std::vector<std::uint32_t> context_buffer;
};

// x * ln(x) for integer counts; shared read-only across workers.
std::vector<double> build_xlogx(long n) {
    std::vector<double> table(static_cast<std::size_t>(n) + 1);
    table[0] = 0.0;
    for (long k = 1; k <= n; ++k)
        table[k] = static_cast<double>(k) * std::log(static_cast<double>(k));
    return table;
}

double table_log_likelihood(std::span<const std::uint32_t> table, int alphabet, int l, int r,
                            std::span<const double> xlogx,
                            std::vector<std::uint32_t>& context_buffer,
                            double log_alphabet) {
    std::uint64_t right_size = 1;
    for (int i = 0; i < r; ++i) right_size *= alphabet;
    std::uint64_t left_size = 1;
    for (int i = 0; i < l; ++i) left_size *= alphabet;

    double cell_term = 0.0;
    for (std::uint32_t c : table) cell_term += xlogx[c];

    double context_term = 0.0;
    context_buffer.assign(right_size, 0);
    for (std::uint64_t w = 0; w < left_size; ++w) {
        std::fill(context_buffer.begin(), context_buffer.end(), 0u);
        for (int a = 0; a < alphabet; ++a) {
            const std::uint64_t base = (w * alphabet + a) * right_size;
            for (std::uint64_t v = 0; v < right_size; ++v)
                context_buffer[v] += table[base + v];
        }
        for (std::uint64_t v = 0; v < right_size; ++v)
            context_term += xlogx[context_buffer[v]];
    }
    return (cell_term - context_term) / log_alphabet;
}

// Dense fast path: count the maximal window once, derive nested windows by
// digit marginalization, patch in partially-missing individuals per (l, r).
std::vector<GridCell> score_grid_dense(const GenotypeMatrix& matrix, int site,
                                       const NeighborhoodParams& params, int max_l, int max_r,
                                       std::span<const double> xlogx, GridWorkspace& ws) {
    const int n = matrix.n_individuals();
    const int alphabet = matrix.alphabet_size();
    const double log_alphabet = std::log(static_cast<double>(alphabet));
    const int grid_stride = max_r + 1;

    std::vector<std::uint64_t> pow_alphabet(max_l + max_r + 2, 1);
    for (std::size_t i = 1; i < pow_alphabet.size(); ++i)
        pow_alphabet[i] = pow_alphabet[i - 1] * alphabet;

    auto table_size = [&](int l, int r) { return pow_alphabet[l + r + 1]; };

    const std::size_t n_cells = static_cast<std::size_t>(max_l + 1) * grid_stride;
    if (ws.pure.size() < n_cells) ws.pure.resize(n_cells);
    if (ws.corrections.size() < n_cells) ws.corrections.resize(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) ws.corrections[i].clear();
    ws.correction_totals.assign(n_cells, 0);

    // One pass over the maximal window builds per-individual keys.
    ws.keys.assign(n, 0);
    ws.incomplete.assign(n, 0);
    for (int k = site - max_l; k <= site + max_r; ++k) {
        const std::uint8_t* col = matrix.column(k).data();
        std::uint32_t* keys = ws.keys.data();
        std::uint8_t* incomplete = ws.incomplete.data();
        for (int i = 0; i < n; ++i) {
            const std::uint8_t v = col[i];
            const bool miss = v == GenotypeMatrix::kMissing;
            incomplete[i] |= miss;
            keys[i] = keys[i] * alphabet + (miss ? 0 : v);
        }
    }

    auto& top = ws.pure[max_l * grid_stride + max_r];
    top.assign(table_size(max_l, max_r), 0);
    long n_complete = 0;
    bool any_incomplete = false;
    for (int i = 0; i < n; ++i) {
        if (ws.incomplete[i]) {
            any_incomplete = true;
            continue;
        }
        ++top[ws.keys[i]];
        ++n_complete;
    }

    // Partially-missing individuals enter only the (l, r) windows they
    // fully cover.
    if (any_incomplete) {
        for (int i = 0; i < n; ++i) {
            if (!ws.incomplete[i]) continue;
            if (matrix.at(i, site) == GenotypeMatrix::kMissing) continue;
            int reach_l = 0;
            while (reach_l < max_l &&
                   matrix.at(i, site - reach_l - 1) != GenotypeMatrix::kMissing)
                ++reach_l;
            int reach_r = 0;
            while (reach_r < max_r &&
                   matrix.at(i, site + reach_r + 1) != GenotypeMatrix::kMissing)
                ++reach_r;

            const std::uint8_t center = matrix.at(i, site);
            std::uint64_t left_code = 0;
            for (int l = 0; l <= reach_l; ++l) {
                if (l > 0)
                    left_code += matrix.at(i, site - l) * pow_alphabet[l - 1];
                std::uint64_t key = left_code * alphabet + center;
                for (int r = 0; r <= reach_r; ++r) {
                    if (r > 0) key = key * alphabet + matrix.at(i, site + r);
                    auto& corr = ws.corrections[l * grid_stride + r];
                    if (corr.empty()) corr.assign(table_size(l, r), 0);
                    ++corr[key];
                    ++ws.correction_totals[l * grid_stride + r];
                }
            }
        }
    }

    // Cascade: drop the far-right site (low digit), then the far-left site
    // (high digit).
    for (int r = max_r - 1; r >= 0; --r) {
        const auto& src = ws.pure[max_l * grid_stride + r + 1];
        auto& dst = ws.pure[max_l * grid_stride + r];
        dst.assign(table_size(max_l, r), 0);
        for (std::size_t j = 0; j < dst.size(); ++j) {
            std::uint32_t total = 0;
            const std::size_t base = j * alphabet;
            for (int e = 0; e < alphabet; ++e) total += src[base + e];
            dst[j] = total;
        }
    }
    for (int l = max_l - 1; l >= 0; --l) {
        for (int r = 0; r <= max_r; ++r) {
            const auto& src = ws.pure[(l + 1) * grid_stride + r];
            auto& dst = ws.pure[l * grid_stride + r];
            const std::size_t dst_size = table_size(l, r);
            dst.assign(dst_size, 0);
            for (int d = 0; d < alphabet; ++d) {
                const std::size_t base = static_cast<std::size_t>(d) * dst_size;
                for (std::size_t j = 0; j < dst_size; ++j) dst[j] += src[base + j];
            }
        }
    }

    std::vector<GridCell> cells;
    cells.reserve((max_l + 1) * grid_stride);
    for (int total_arms = 0; total_arms <= max_l + max_r; ++total_arms) {
        for (int l = std::max(0, total_arms - max_r); l <= std::min(total_arms, max_l); ++l) {
            const int r = total_arms - l;
            const int idx = l * grid_stride + r;
            const std::vector<std::uint32_t>* table = &ws.pure[idx];
            if (!ws.corrections[idx].empty()) {
                ws.merged = ws.pure[idx];
                const auto& corr = ws.corrections[idx];
                for (std::size_t j = 0; j < ws.merged.size(); ++j) ws.merged[j] += corr[j];
                table = &ws.merged;
            }
            GridCell cell;
            cell.l = l;
            cell.r = r;
            cell.effective_n = n_complete + ws.correction_totals[idx];
            cell.log_likelihood = table_log_likelihood(*table, alphabet, l, r, xlogx,
                                                       ws.context_buffer, log_alphabet);
            cell.score = cell.log_likelihood - pml_penalty(params, alphabet, l, r, n);
            cells.push_back(cell);
        }
    }
    return cells;
}

// Fallback for windows too large to hold dense: count each (l, r) on its own.
std::vector<GridCell> score_grid_generic(const GenotypeMatrix& matrix, int site,
                                         const NeighborhoodParams& params, int max_l,
                                         int max_r) {
    std::vector<GridCell> cells;
    for (int total_arms = 0; total_arms <= max_l + max_r; ++total_arms) {
        for (int l = std::max(0, total_arms - max_r); l <= std::min(total_arms, max_l); ++l) {
            const int r = total_arms - l;
            const ContextCounts counts =
                count_contexts(matrix, site, l, r, params.dense_table_limit);
            GridCell cell;
            cell.l = l;
            cell.r = r;
            cell.effective_n = counts.effective_n();
            cell.log_likelihood = log_conditional_likelihood(counts);
            cell.score = cell.log_likelihood -
                         pml_penalty(params, matrix.alphabet_size(), l, r, matrix.n_individuals());
            cells.push_back(cell);
        }
    }
    return cells;
}

std::vector<GridCell> score_grid_impl(const GenotypeMatrix& matrix, int site,
                                      const NeighborhoodParams& params,
                                      std::span<const double> xlogx, GridWorkspace& ws) {
    const auto [span_start, span_end] = matrix.chromosome_span_of(site);
    const int max_l = std::min(params.max_left, site - span_start);
    const int max_r = std::min(params.max_right, span_end - site);

    // The dense path keeps per-individual keys in 32 bits.
    const std::uint64_t dense_cap =
        std::min<std::uint64_t>(params.dense_table_limit, std::uint64_t{1} << 31);
    bool dense_capable = true;
    std::uint64_t size = 1;
    for (int i = 0; i < max_l + max_r + 1; ++i) {
        size *= static_cast<std::uint64_t>(matrix.alphabet_size());
        if (size > dense_cap) {
            dense_capable = false;
            break;
        }
    }
    if (dense_capable)
        return score_grid_dense(matrix, site, params, max_l, max_r, xlogx, ws);
    return score_grid_generic(matrix, site, params, max_l, max_r);
}

SiteNeighborhood pick_argmax(int site, const std::vector<GridCell>& cells) {
    // Cells arrive in (l + r, l) ascending order; strict improvement keeps
    // the minimal neighborhood on ties.
    const GridCell* best = &cells.front();
    for (const GridCell& cell : cells)
        if (cell.score > best->score) best = &cell;
    return {site, best->l, best->r, best->score, best->effective_n};
}

}  // namespace

std::vector<GridCell> score_grid(const GenotypeMatrix& matrix, int site,
                                 const NeighborhoodParams& params) {
    params.validate();
    GridWorkspace ws;
    const auto xlogx = build_xlogx(matrix.n_individuals());
    return score_grid_impl(matrix, site, params, xlogx, ws);
}

SiteNeighborhood estimate_neighborhood(const GenotypeMatrix& matrix, int site,
                                       const NeighborhoodParams& params) {
    return pick_argmax(site, score_grid(matrix, site, params));
}

std::vector<SiteNeighborhood> estimate_all(const GenotypeMatrix& matrix,
                                           const NeighborhoodParams& params,
                                           unsigned n_threads) {
    params.validate();
    if (n_threads == 0) n_threads = default_thread_count();

    const auto xlogx = build_xlogx(matrix.n_individuals());
    std::vector<SiteNeighborhood> fits(matrix.n_sites());
    std::vector<GridWorkspace> workspaces(n_threads);

    parallel_for(matrix.n_sites(), n_threads, [&](std::size_t site, unsigned worker) {
        fits[site] = pick_argmax(
            static_cast<int>(site),
            score_grid_impl(matrix, static_cast<int>(site), params, xlogx, workspaces[worker]));
    });
    return fits;
}

NeighborhoodSummary summarize_neighborhoods(const std::vector<SiteNeighborhood>& fits) {
    NeighborhoodSummary s;
    s.n_sites = fits.size();
    if (fits.empty()) return s;
    double sum = 0.0, sum_sq = 0.0, sum_l = 0.0, sum_r = 0.0;
    for (const auto& f : fits) {
        const double total = f.l_hat + f.r_hat;
        sum += total;
        sum_sq += total * total;
        sum_l += f.l_hat;
        sum_r += f.r_hat;
    }
    const double n = static_cast<double>(fits.size());
    s.mean_total = sum / n;
    s.sd_total = std::sqrt(std::max(0.0, sum_sq / n - s.mean_total * s.mean_total));
    s.mean_left = sum_l / n;
    s.mean_right = sum_r / n;
    return s;
}

void write_neighborhoods(const std::vector<SiteNeighborhood>& fits,
                         const GenotypeMatrix& matrix, std::ostream& out,
                         const std::string& header) {
    out.precision(12);
    out << header;
    out << "site_index\tsnp_id\tchromosome\tl_hat\tr_hat\tpml_score\teffective_n\n";
    for (const auto& f : fits) {
        const SiteMeta& m = matrix.meta(f.site);
        out << f.site << '\t' << m.snp_id << '\t' << m.chromosome << '\t' << f.l_hat << '\t'
            << f.r_hat << '\t' << f.pml_score << '\t' << f.effective_n_at_opt << '\n';
    }
}

std::vector<SiteNeighborhood> read_neighborhoods(std::istream& in) {
    std::vector<SiteNeighborhood> fits;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("site_index", 0) == 0) continue;
        std::istringstream row(line);
        SiteNeighborhood f;
        std::string snp_id;
        int chromosome;
        if (!(row >> f.site >> snp_id >> chromosome >> f.l_hat >> f.r_hat >> f.pml_score >>
              f.effective_n_at_opt))
            throw DataError("malformed neighborhoods line: '" + line + "'");
        if (f.site != static_cast<int>(fits.size()))
            throw DataError("neighborhood site_index values must be contiguous from 0");
        fits.push_back(f);
    }
    if (fits.empty()) throw DataError("no neighborhoods");
    return fits;
}

}  // namespace vrmrf
