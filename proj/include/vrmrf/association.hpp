#pragma once

// Case-control association per influence window: a Pearson chi-square test
// of independence between the observed genotype configurations of the
// window and the binary response. Each distinct configuration is one row;
// individuals with a missing cell anywhere in the window are excluded.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "vrmrf/genotype_matrix.hpp"
#include "vrmrf/segmentation.hpp"

namespace vrmrf {

struct ConfigurationRow {
    std::string configuration;  // window genotypes, one raw byte per site
    long n_control = 0;
    long n_case = 0;
};

struct ContingencyTable {
    std::vector<ConfigurationRow> rows;  // sorted by configuration
    long n_used = 0;
    long n_control = 0;
    long n_case = 0;
};

struct ChiSquareResult {
    double chi2 = 0.0;
    int df = 0;
    double p = 1.0;
    double min_expected = 0.0;
    bool degenerate = false;  // single row or an empty response class
};

struct AssociationResult {
    int window_id = 0;
    double chi2 = 0.0;
    int df = 0;
    double p_value = 1.0;
    double score = 0.0;  // -log10 p, capped at kMaxScore
    long n_used = 0;
    double min_expected = 0.0;
    bool degenerate = false;

    static constexpr double kMaxScore = 300.0;  // p floored at 1e-300
};

ContingencyTable window_contingency(const GenotypeMatrix& matrix,
                                    const InfluenceWindow& window,
                                    const Phenotype& phenotype);

ChiSquareResult chi_square_independence(const ContingencyTable& table);

AssociationResult associate_window(const GenotypeMatrix& matrix,
                                   const InfluenceWindow& window,
                                   const Phenotype& phenotype);

std::vector<AssociationResult> associate_all(const GenotypeMatrix& matrix,
                                             const std::vector<InfluenceWindow>& windows,
                                             const Phenotype& phenotype,
                                             unsigned n_threads = 1);

// Results with p below the threshold, sorted by ascending p.
std::vector<AssociationResult> significant_windows(
    const std::vector<AssociationResult>& results, double threshold);

// TSV: window_id chromosome start_bp end_bp n_sites n_used chi2 df p_value
//      neglog10_p min_expected_count.
void write_association(const std::vector<AssociationResult>& results,
                       const std::vector<InfluenceWindow>& windows,
                       const std::vector<SiteMeta>& meta, std::ostream& out,
                       const std::string& header);

// Manhattan-style plot data: chromosome, window midpoint in bp, -log10 p.
void write_plot_data(const std::vector<AssociationResult>& results,
                     const std::vector<InfluenceWindow>& windows,
                     const std::vector<SiteMeta>& meta, std::ostream& out,
                     const std::string& header);

}  // namespace vrmrf
