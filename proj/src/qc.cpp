#include "vrmrf/qc.hpp"

#include <cmath>
#include <ostream>

#include "vrmrf/stats.hpp"

namespace vrmrf {

std::string SiteQc::reason() const {
    if (removed_maf && removed_hwe) return "MAF;HWE";
    if (removed_maf) return "MAF";
    if (removed_hwe) return "HWE";
    return ".";
}

int QcReport::n_removed() const {
    int n = 0;
    for (const auto& s : sites) n += s.removed();
    return n;
}

std::array<long, 3> genotype_counts(std::span<const std::uint8_t> column) {
    std::array<long, 3> counts{0, 0, 0};
    for (std::uint8_t v : column) {
        if (v == GenotypeMatrix::kMissing) continue;
        if (v > 2) throw DataError("qc requires score coding 0/1/2");
        ++counts[v];
    }
    return counts;
}

namespace {

double maf_from_counts(const std::array<long, 3>& c) {
    const long n = c[0] + c[1] + c[2];
    if (n == 0) throw DataError("all cells missing");
    return static_cast<double>(2 * c[2] + c[1]) / static_cast<double>(2 * n);
}

}  // namespace

double minor_allele_frequency(std::span<const std::uint8_t> column) {
    return maf_from_counts(genotype_counts(column));
}

HweResult hwe_chi_square_counts(const std::array<long, 3>& counts) {
    const long n = counts[0] + counts[1] + counts[2];
    if (n == 0) throw DataError("all cells missing");
    const double p_major =
        static_cast<double>(2 * counts[0] + counts[1]) / static_cast<double>(2 * n);
    const double q = 1.0 - p_major;
    const double expected[3] = {n * p_major * p_major, 2.0 * n * p_major * q, n * q * q};

    double chi2 = 0.0;
    for (int k = 0; k < 3; ++k) {
        if (expected[k] <= 0.0) continue;  // obs is necessarily 0 here
        const double diff = static_cast<double>(counts[k]) - expected[k];
        chi2 += diff * diff / expected[k];
    }
    return {chi2, stats::chi_square_sf(chi2, 1)};
}

HweResult hwe_chi_square(std::span<const std::uint8_t> column) {
    return hwe_chi_square_counts(genotype_counts(column));
}

std::pair<GenotypeMatrix, QcReport> apply_qc(const GenotypeMatrix& matrix,
                                             const QcParams& params,
                                             const Phenotype* phenotype) {
    if (matrix.alphabet_size() != 3)
        throw DataError("qc requires score coding (alphabet size 3)");
    if (params.hwe_controls_only && phenotype == nullptr)
        throw DataError("hwe_controls_only requires a phenotype");
    if (phenotype && phenotype->labels.size() != static_cast<std::size_t>(matrix.n_individuals()))
        throw DataError("phenotype length does not match matrix");

    QcReport report;
    report.sites.reserve(matrix.n_sites());
    std::vector<int> swapped_sites;
    std::vector<int> kept;

    for (int s = 0; s < matrix.n_sites(); ++s) {
        const auto col = matrix.column(s);
        auto counts = genotype_counts(col);

        SiteQc qc;
        qc.snp_id = matrix.meta(s).snp_id;
        if (counts[0] + counts[1] + counts[2] == 0)
            throw DataError("site " + qc.snp_id + ": all cells missing");

        if (counts[2] > counts[0]) {
            std::swap(counts[0], counts[2]);
            qc.swapped = true;
            swapped_sites.push_back(s);
        }
        qc.maf = maf_from_counts(counts);

        std::array<long, 3> hwe_counts = counts;
        if (params.hwe_controls_only) {
            hwe_counts = {0, 0, 0};
            for (int i = 0; i < matrix.n_individuals(); ++i) {
                const std::uint8_t v = col[i];
                if (v == GenotypeMatrix::kMissing || phenotype->labels[i] != 0) continue;
                std::uint8_t w = v;
                if (qc.swapped) w = (v == 0) ? 2 : (v == 2 ? 0 : v);
                ++hwe_counts[w];
            }
            if (hwe_counts[0] + hwe_counts[1] + hwe_counts[2] == 0)
                throw DataError("site " + qc.snp_id + ": no control genotypes for HWE");
        }
        const HweResult hwe = hwe_chi_square_counts(hwe_counts);
        qc.hwe_chi2 = hwe.chi2;
        qc.hwe_p = hwe.p;

        qc.removed_maf = qc.maf < params.maf_min;
        qc.removed_hwe = qc.hwe_p < params.hwe_alpha;
        if (!qc.removed()) kept.push_back(s);
        report.sites.push_back(std::move(qc));
    }

    if (kept.empty()) throw DataError("qc removed every site");

    GenotypeMatrix normalized = swapped_sites.empty()
                                    ? matrix
                                    : matrix.swap_homozygote_codes(swapped_sites);
    if (static_cast<int>(kept.size()) == matrix.n_sites())
        return {std::move(normalized), std::move(report)};
    return {normalized.subset_sites(kept), std::move(report)};
}

void write_qc_report(const QcReport& report, std::ostream& out,
                     const std::string& header) {
    out.precision(10);
    out << header;
    out << "snp_id\tmaf\thwe_chi2\thwe_p\tstatus\treason\n";
    for (const auto& s : report.sites) {
        out << s.snp_id << '\t' << s.maf << '\t' << s.hwe_chi2 << '\t' << s.hwe_p << '\t'
            << (s.removed() ? "REMOVED" : "PASS") << '\t' << s.reason() << '\n';
    }
}

}  // namespace vrmrf
