#pragma once

// Shared fixture builders for the test suites.

#include <string>
#include <vector>

#include "vrmrf/genotype_matrix.hpp"
#include "vrmrf/rng.hpp"

namespace vrmrf::test {

// lines[s] holds the genotypes of site s, one character per individual
// ('0'.. or '.'). chrom_of_site defaults to all chromosome 1.
inline GenotypeMatrix matrix_from_lines(const std::vector<std::string>& lines,
                                        int alphabet_size = 3,
                                        const std::vector<int>& chrom_of_site = {}) {
    const int n = static_cast<int>(lines.at(0).size());
    std::vector<SiteMeta> meta(lines.size());
    std::vector<std::uint8_t> cells;
    cells.reserve(lines.size() * static_cast<std::size_t>(n));
    for (std::size_t s = 0; s < lines.size(); ++s) {
        meta[s].site_index = static_cast<int>(s);
        meta[s].snp_id = "snp" + std::to_string(s);
        meta[s].chromosome = chrom_of_site.empty() ? 1 : chrom_of_site[s];
        meta[s].position_bp = static_cast<long>(s + 1) * 100;
        for (char ch : lines[s])
            cells.push_back(ch == '.' ? GenotypeMatrix::kMissing
                                      : static_cast<std::uint8_t>(ch - '0'));
    }
    return GenotypeMatrix(alphabet_size, std::move(meta), n, std::move(cells));
}

inline GenotypeMatrix random_matrix(Rng& rng, int n_individuals, int n_sites,
                                    int alphabet_size, double missing_fraction = 0.0,
                                    int n_chromosomes = 1) {
    std::vector<SiteMeta> meta(n_sites);
    for (int s = 0; s < n_sites; ++s) {
        meta[s].site_index = s;
        meta[s].snp_id = "snp" + std::to_string(s);
        meta[s].chromosome = 1 + s * n_chromosomes / n_sites;
        meta[s].position_bp = static_cast<long>(s + 1) * 100;
    }
    std::vector<std::uint8_t> cells(static_cast<std::size_t>(n_sites) * n_individuals);
    for (auto& cell : cells) {
        if (missing_fraction > 0.0 && rng.bernoulli(missing_fraction))
            cell = GenotypeMatrix::kMissing;
        else
            cell = static_cast<std::uint8_t>(rng.uniform_below(alphabet_size));
    }
    return GenotypeMatrix(alphabet_size, std::move(meta), n_individuals, std::move(cells));
}

}  // namespace vrmrf::test
