#pragma once

// Text ingest and serialization.
//
// Matrix file: one line per site, one character per individual,
//   '0'..'9' for scores, '.' for missing, no separators.
// Site metadata: TSV snp_id<TAB>chromosome<TAB>position_bp, same order
//   as the matrix lines.
// Individual order file: one id per line, defines column order.
// Phenotype file: TSV individual_id<TAB>label with label in {0,1}.
// Raw genotypes: TSV snp_id<TAB>g1<TAB>g2... with gi like "G_A" or "NA".

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "vrmrf/genotype_matrix.hpp"

namespace vrmrf {

// Parses and validates site metadata: chromosomes in 1..22 and
// non-decreasing, positions strictly increasing within a chromosome,
// snp ids unique.
std::vector<SiteMeta> parse_site_meta(std::istream& meta_stream);

GenotypeMatrix parse_genotype_files(std::istream& matrix_stream,
                                    std::istream& meta_stream,
                                    int alphabet_size = 3);

// Matrix lines only; inverse of the matrix-file side of parse_genotype_files.
void serialize_matrix(const GenotypeMatrix& matrix, std::ostream& out);
void serialize_meta(const GenotypeMatrix& matrix, std::ostream& out);

std::vector<std::string> parse_individual_order(std::istream& in);

// Aligns labels to the matrix individual ids (which must be set).
Phenotype parse_phenotype(std::istream& in, const GenotypeMatrix& matrix);

struct AlleleReport {
    std::string major_allele;  // empty when the site is monomorphic-missing
    std::string minor_allele;  // empty when only one allele was observed
    int n_major_hom = 0;
    int n_het = 0;
    int n_minor_hom = 0;
    int n_missing = 0;
};

struct EncodedColumn {
    std::vector<std::uint8_t> scores;  // 0/1/2 or GenotypeMatrix::kMissing
    AlleleReport report;
};

// Score encoding for one biallelic site: the homozygote with the highest
// count gets 0, the heterozygote 1, the remaining homozygote 2. Genotypes
// are strings like "G_A" (orientation ignored) or "NA" for missing.
// Homozygote-count ties rank the lexicographically smaller allele as minor.
EncodedColumn encode_scores(const std::vector<std::string>& raw_genotypes);

// Raw-genotype ingestion: one TSV line per site, columns snp_id, g1..gn.
// Site order must match the meta stream.
GenotypeMatrix parse_raw_genotype_files(std::istream& raw_stream,
                                        std::istream& meta_stream,
                                        std::vector<AlleleReport>* reports = nullptr);

}  // namespace vrmrf
