#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vrmrf {

// Malformed or inconsistent input data.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

struct SiteMeta {
    int site_index = 0;
    std::string snp_id;
    int chromosome = 0;   // autosomes 1..22
    long position_bp = 0;
};

// Per-individual binary response: 0 = control, 1 = case.
struct Phenotype {
    std::vector<std::uint8_t> labels;

    std::size_t size() const { return labels.size(); }
    int count(std::uint8_t label) const {
        int n = 0;
        for (auto v : labels) n += (v == label);
        return n;
    }
};

// Immutable n_individuals x n_sites score matrix. Cells hold values in
// [0, alphabet_size) or kMissing; storage is site-major so a column is
// one contiguous span. Safe to share across threads once built.
class GenotypeMatrix {
public:
    static constexpr std::uint8_t kMissing = 0xFF;

    GenotypeMatrix(int alphabet_size,
                   std::vector<SiteMeta> meta,
                   int n_individuals,
                   std::vector<std::uint8_t> cells,
                   std::vector<std::string> individual_ids = {});

    int n_individuals() const { return n_individuals_; }
    int n_sites() const { return static_cast<int>(meta_.size()); }
    int alphabet_size() const { return alphabet_size_; }

    std::span<const std::uint8_t> column(int site) const {
        return {cells_.data() + static_cast<std::size_t>(site) * n_individuals_,
                static_cast<std::size_t>(n_individuals_)};
    }
    std::uint8_t at(int individual, int site) const {
        return cells_[static_cast<std::size_t>(site) * n_individuals_ + individual];
    }

    const SiteMeta& meta(int site) const { return meta_[site]; }
    const std::vector<SiteMeta>& meta() const { return meta_; }

    // May be empty if no individual order file was supplied.
    const std::vector<std::string>& individual_ids() const { return individual_ids_; }
    void set_individual_ids(std::vector<std::string> ids);

    // Contiguous [first_site, last_site] ranges, one per chromosome, in order.
    const std::vector<std::pair<int, int>>& chromosome_spans() const { return chrom_spans_; }

    // [span_start, span_end] of the chromosome containing `site`.
    std::pair<int, int> chromosome_span_of(int site) const;

    // New matrix restricted to the given site indices (ascending).
    GenotypeMatrix subset_sites(const std::vector<int>& sites) const;

    // New matrix with scores 0 and 2 swapped at the given sites.
    GenotypeMatrix swap_homozygote_codes(const std::vector<int>& sites) const;

private:
    void validate() const;

    int alphabet_size_;
    int n_individuals_;
    std::vector<SiteMeta> meta_;
    std::vector<std::uint8_t> cells_;  // site-major
    std::vector<std::string> individual_ids_;
    std::vector<std::pair<int, int>> chrom_spans_;
    std::vector<int> span_index_of_site_;
};

}  // namespace vrmrf
