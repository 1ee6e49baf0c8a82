#include "vrmrf/genotype_matrix.hpp"

#include <algorithm>
#include <unordered_set>

namespace vrmrf {

GenotypeMatrix::GenotypeMatrix(int alphabet_size,
                               std::vector<SiteMeta> meta,
                               int n_individuals,
                               std::vector<std::uint8_t> cells,
                               std::vector<std::string> individual_ids)
    : alphabet_size_(alphabet_size),
      n_individuals_(n_individuals),
      meta_(std::move(meta)),
      cells_(std::move(cells)),
      individual_ids_(std::move(individual_ids)) {
    validate();

    span_index_of_site_.resize(meta_.size());
    for (std::size_t s = 0; s < meta_.size(); ++s) {
        if (chrom_spans_.empty() || meta_[s].chromosome != meta_[chrom_spans_.back().first].chromosome) {
            chrom_spans_.emplace_back(static_cast<int>(s), static_cast<int>(s));
        } else {
            chrom_spans_.back().second = static_cast<int>(s);
        }
        span_index_of_site_[s] = static_cast<int>(chrom_spans_.size()) - 1;
    }
}

void GenotypeMatrix::validate() const {
    if (alphabet_size_ < 2) throw DataError("alphabet size must be at least 2");
    if (meta_.empty()) throw DataError("no sites");
    if (n_individuals_ <= 0) throw DataError("no individuals");
    if (cells_.size() != meta_.size() * static_cast<std::size_t>(n_individuals_))
        throw DataError("cell count does not match n_sites x n_individuals");
    if (!individual_ids_.empty() &&
        individual_ids_.size() != static_cast<std::size_t>(n_individuals_))
        throw DataError("individual id count does not match matrix width");

    for (std::uint8_t v : cells_) {
        if (v != kMissing && v >= alphabet_size_)
            throw DataError("cell value outside alphabet");
    }

    std::unordered_set<std::string> seen_ids;
    for (std::size_t s = 0; s < meta_.size(); ++s) {
        const SiteMeta& m = meta_[s];
        if (m.site_index != static_cast<int>(s))
            throw DataError("site_index values must be contiguous 0..m-1");
        if (m.chromosome < 1 || m.chromosome > 22)
            throw DataError("chromosome out of range 1..22: " + m.snp_id);
        if (m.position_bp < 0) throw DataError("negative position: " + m.snp_id);
        if (!seen_ids.insert(m.snp_id).second)
            throw DataError("duplicate snp_id: " + m.snp_id);
        if (s > 0) {
            const SiteMeta& prev = meta_[s - 1];
            if (m.chromosome < prev.chromosome)
                throw DataError("unsorted chromosomes at " + m.snp_id);
            if (m.chromosome == prev.chromosome && m.position_bp <= prev.position_bp)
                throw DataError("unsorted positions at " + m.snp_id);
        }
    }
}

void GenotypeMatrix::set_individual_ids(std::vector<std::string> ids) {
    if (ids.size() != static_cast<std::size_t>(n_individuals_))
        throw DataError("individual id count does not match matrix width");
    individual_ids_ = std::move(ids);
}

std::pair<int, int> GenotypeMatrix::chromosome_span_of(int site) const {
    return chrom_spans_[span_index_of_site_[site]];
}

GenotypeMatrix GenotypeMatrix::subset_sites(const std::vector<int>& sites) const {
    std::vector<SiteMeta> meta;
    meta.reserve(sites.size());
    std::vector<std::uint8_t> cells;
    cells.reserve(sites.size() * static_cast<std::size_t>(n_individuals_));
    for (int s : sites) {
        SiteMeta m = meta_[s];
        m.site_index = static_cast<int>(meta.size());
        meta.push_back(std::move(m));
        const auto col = column(s);
        cells.insert(cells.end(), col.begin(), col.end());
    }
    return GenotypeMatrix(alphabet_size_, std::move(meta), n_individuals_,
                          std::move(cells), individual_ids_);
}

GenotypeMatrix GenotypeMatrix::swap_homozygote_codes(const std::vector<int>& sites) const {
    std::vector<std::uint8_t> cells = cells_;
    for (int s : sites) {
        auto* col = cells.data() + static_cast<std::size_t>(s) * n_individuals_;
        for (int i = 0; i < n_individuals_; ++i) {
            if (col[i] == 0) col[i] = 2;
            else if (col[i] == 2) col[i] = 0;
        }
    }
    return GenotypeMatrix(alphabet_size_, meta_, n_individuals_, std::move(cells),
                          individual_ids_);
}

}  // namespace vrmrf
