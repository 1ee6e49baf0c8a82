#pragma once

// Influence windows: maximal runs of sites whose estimated neighborhoods
// never reach across the run boundary. The gap after site g is a cut when
// no site at or before g has a right arm past g and no later site has a
// left arm reaching back to g. Chromosome boundaries are always cuts.

#include <iosfwd>
#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "vrmrf/estimator.hpp"
#include "vrmrf/genotype_matrix.hpp"

namespace vrmrf {

struct InfluenceWindow {
    int window_id = 0;
    int chromosome = 0;
    int start_site = 0;  // inclusive
    int end_site = 0;    // inclusive

    int n_sites() const { return end_site - start_site + 1; }
};

struct WindowSummary {
    std::size_t count = 0;
    double mean_size = 0.0;
    int min_size = 0;
    int max_size = 0;
    double sd_size = 0.0;
};

// Gap indices g (cut between sites g and g+1), single linear scan using a
// prefix max of i + r_i and a suffix min of j - l_j per chromosome.
// Chromosome-boundary gaps are included.
std::vector<int> find_cut_points(const std::vector<SiteNeighborhood>& neighborhoods,
                                 const std::vector<std::pair<int, int>>& chromosome_spans);

std::vector<InfluenceWindow> influence_windows(
    const std::vector<SiteNeighborhood>& neighborhoods,
    const std::vector<SiteMeta>& meta);

WindowSummary summarize_windows(const std::vector<InfluenceWindow>& windows);

// TSV: window_id chromosome start_snp_id end_snp_id start_bp end_bp n_sites.
void write_windows(const std::vector<InfluenceWindow>& windows,
                   const std::vector<SiteMeta>& meta, std::ostream& out,
                   const std::string& header);

// Reads the TSV back, resolving snp ids to site indices through meta.
std::vector<InfluenceWindow> read_windows(std::istream& in,
                                          const std::vector<SiteMeta>& meta);

}  // namespace vrmrf
