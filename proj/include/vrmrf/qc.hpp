#pragma once

// Site filters applied before neighborhood estimation: minor allele
// frequency and a Pearson Hardy-Weinberg test on the three genotype
// classes (1 df, no continuity correction). Score coding 0/1/2 only.

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vrmrf/genotype_matrix.hpp"

namespace vrmrf {

struct QcParams {
    double maf_min = 0.01;
    double hwe_alpha = 1e-4;
    // When set, HWE uses controls only; default pools all individuals.
    bool hwe_controls_only = false;
};

struct SiteQc {
    std::string snp_id;
    double maf = 0.0;
    double hwe_chi2 = 0.0;
    double hwe_p = 1.0;
    bool removed_maf = false;
    bool removed_hwe = false;
    bool swapped = false;  // 0<->2 re-normalization applied before testing

    bool removed() const { return removed_maf || removed_hwe; }
    std::string reason() const;
};

struct QcReport {
    std::vector<SiteQc> sites;
    int n_removed() const;
};

// Genotype class counts (n0, n1, n2) of a score column, missing excluded.
std::array<long, 3> genotype_counts(std::span<const std::uint8_t> column);

// (2*n2 + n1) / (2*n_nonmissing). Throws if every cell is missing.
double minor_allele_frequency(std::span<const std::uint8_t> column);

struct HweResult {
    double chi2 = 0.0;
    double p = 1.0;
};

// Pearson chi-square against the (p^2, 2pq, q^2) expectations; classes with
// zero expectation and zero observation contribute nothing.
HweResult hwe_chi_square(std::span<const std::uint8_t> column);
HweResult hwe_chi_square_counts(const std::array<long, 3>& counts);

// Filters sites, preserving order. Columns where count(2) > count(0) are
// re-normalized by swapping codes 0 and 2 before testing so MAF stays <= 0.5.
std::pair<GenotypeMatrix, QcReport> apply_qc(const GenotypeMatrix& matrix,
                                             const QcParams& params = {},
                                             const Phenotype* phenotype = nullptr);

// TSV: snp_id maf hwe_chi2 hwe_p status reason.
void write_qc_report(const QcReport& report, std::ostream& out,
                     const std::string& header);

}  // namespace vrmrf
