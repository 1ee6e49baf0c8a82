#pragma once

// Per-site neighborhood estimation by penalized maximum conditional
// likelihood. For a site s and arm lengths (l, r) the context of an
// individual is the window [s-l, s+r] minus the center; the score is
//
//   LL(l, r) - c * |A|^(l+r) * log_A(n)
//
// with LL the maximized conditional log-likelihood in base |A| and n the
// total number of individuals. The estimate is the argmax over the grid
// 0 <= l <= L0, 0 <= r <= R0 (arms truncated at chromosome ends), ties
// broken by smallest l+r then smallest l.
//
// Individuals with a missing cell anywhere in [s-l, s+r] are excluded from
// the counts of that (l, r) only.

#include <cstdint>
#include <iosfwd>
#include <istream>
#include <span>
#include <unordered_map>
#include <vector>

#include "vrmrf/genotype_matrix.hpp"

namespace vrmrf {

struct NeighborhoodParams {
    double penalty_c = 1.0;
    int max_left = 5;
    int max_right = 5;
    // Dense count tables are used while |A|^(l+r+1) stays at or below this;
    // larger windows fall back to hashed counts.
    std::size_t dense_table_limit = std::size_t{1} << 20;

    void validate() const;
};

// Counts N(w, a, v) for one site and fixed (l, r). Context keys concatenate
// the window symbols left to right as base-|A| digits, center included:
//   key(w, a, v) = ((w as digits) * |A| + a) * |A|^r + (v as digits)
// where w[0] is the symbol at s-l and v[r-1] the symbol at s+r.
class ContextCounts {
public:
    ContextCounts(int alphabet_size, int l, int r, std::size_t dense_limit);

    int l() const { return l_; }
    int r() const { return r_; }
    int alphabet_size() const { return alphabet_size_; }
    long effective_n() const { return effective_n_; }
    bool dense() const { return !dense_.empty() || table_size_ == 0; }

    void add(std::uint64_t key) {
        if (!dense_.empty()) ++dense_[key];
        else ++sparse_[key];
        ++effective_n_;
    }

    std::uint64_t key_of(std::span<const std::uint8_t> w, std::uint8_t a,
                         std::span<const std::uint8_t> v) const;

    long count(std::span<const std::uint8_t> w, std::uint8_t a,
               std::span<const std::uint8_t> v) const;
    long context_total(std::span<const std::uint8_t> w,
                       std::span<const std::uint8_t> v) const;

    long count_by_key(std::uint64_t key) const;

    // Calls fn(key, count) for every nonzero entry.
    template <typename Fn>
    void for_each(Fn&& fn) const {
        if (!dense_.empty()) {
            for (std::size_t k = 0; k < dense_.size(); ++k)
                if (dense_[k] != 0) fn(static_cast<std::uint64_t>(k), dense_[k]);
        } else {
            for (const auto& [k, c] : sparse_) fn(k, c);
        }
    }

    std::uint64_t table_size() const { return table_size_; }
    std::uint64_t center_stride() const { return center_stride_; }  // |A|^r

private:
    int alphabet_size_;
    int l_;
    int r_;
    std::uint64_t table_size_;     // |A|^(l+r+1)
    std::uint64_t center_stride_;  // |A|^r
    long effective_n_ = 0;
    std::vector<std::uint32_t> dense_;
    std::unordered_map<std::uint64_t, std::uint32_t> sparse_;
};

struct SiteNeighborhood {
    int site = 0;
    int l_hat = 0;
    int r_hat = 0;
    double pml_score = 0.0;
    long effective_n_at_opt = 0;
};

ContextCounts count_contexts(const GenotypeMatrix& matrix, int site, int l, int r,
                             std::size_t dense_limit = std::size_t{1} << 20);

// MLE of the conditional distribution for one context; all-zero counts give
// the uniform 1/|A| convention.
std::vector<double> conditional_mle(std::span<const long> counts_for_one_context);

// Sum of N(w,a,v) * log_A(N(w,a,v) / N(w,v)) over nonzero counts; <= 0.
double log_conditional_likelihood(const ContextCounts& counts);

double pml_penalty(const NeighborhoodParams& params, int alphabet_size, int l, int r,
                   long n_individuals);

double pml_score(const GenotypeMatrix& matrix, int site, int l, int r,
                 const NeighborhoodParams& params);

struct GridCell {
    int l = 0;
    int r = 0;
    double log_likelihood = 0.0;
    double score = 0.0;
    long effective_n = 0;
};

// Scores every feasible (l, r) for one site. Cells are ordered by
// (l + r, l) ascending, the tie-break order of the argmax.
std::vector<GridCell> score_grid(const GenotypeMatrix& matrix, int site,
                                 const NeighborhoodParams& params);

SiteNeighborhood estimate_neighborhood(const GenotypeMatrix& matrix, int site,
                                       const NeighborhoodParams& params);

std::vector<SiteNeighborhood> estimate_all(const GenotypeMatrix& matrix,
                                           const NeighborhoodParams& params,
                                           unsigned n_threads = 1);

struct NeighborhoodSummary {
    std::size_t n_sites = 0;
    double mean_total = 0.0;  // mean of l_hat + r_hat
    double sd_total = 0.0;
    double mean_left = 0.0;
    double mean_right = 0.0;
};

NeighborhoodSummary summarize_neighborhoods(const std::vector<SiteNeighborhood>& fits);

// TSV: site_index snp_id chromosome l_hat r_hat pml_score effective_n.
void write_neighborhoods(const std::vector<SiteNeighborhood>& fits,
                         const GenotypeMatrix& matrix, std::ostream& out,
                         const std::string& header);

// Reads the TSV back; meta supplies validation only.
std::vector<SiteNeighborhood> read_neighborhoods(std::istream& in);

}  // namespace vrmrf
