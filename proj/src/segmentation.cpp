#include "vrmrf/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace vrmrf {

std::vector<int> find_cut_points(const std::vector<SiteNeighborhood>& neighborhoods,
                                 const std::vector<std::pair<int, int>>& chromosome_spans) {
    if (neighborhoods.empty()) throw DataError("no neighborhoods");
    for (std::size_t i = 0; i < neighborhoods.size(); ++i)
        if (neighborhoods[i].site != static_cast<int>(i))
            throw DataError("neighborhoods must cover sites 0..m-1 in order");

    std::vector<int> cuts;
    for (const auto& [start, end] : chromosome_spans) {
        // prefix max of i + r_i; a gap qualifies only if nothing before
        // reaches past it
        int reach_right = std::numeric_limits<int>::min();
        std::vector<std::uint8_t> left_ok(end - start, 0);
        for (int i = start; i < end; ++i) {
            reach_right = std::max(reach_right, i + neighborhoods[i].r_hat);
            left_ok[i - start] = reach_right <= i;
        }
        // suffix min of j - l_j for the right side of each gap
        int reach_left = std::numeric_limits<int>::max();
        std::vector<std::uint8_t> right_ok(end - start, 0);
        for (int j = end; j > start; --j) {
            reach_left = std::min(reach_left, j - neighborhoods[j].l_hat);
            right_ok[j - 1 - start] = reach_left >= j;
        }
        for (int g = start; g < end; ++g)
            if (left_ok[g - start] && right_ok[g - start]) cuts.push_back(g);
        if (end + 1 < static_cast<int>(neighborhoods.size()))
            cuts.push_back(end);  // chromosome boundary
    }
    return cuts;
}

std::vector<InfluenceWindow> influence_windows(
    const std::vector<SiteNeighborhood>& neighborhoods,
    const std::vector<SiteMeta>& meta) {
    if (neighborhoods.size() != meta.size())
        throw DataError("neighborhood count does not match site count");

    std::vector<std::pair<int, int>> spans;
    for (std::size_t s = 0; s < meta.size(); ++s) {
        if (spans.empty() || meta[s].chromosome != meta[spans.back().first].chromosome)
            spans.emplace_back(static_cast<int>(s), static_cast<int>(s));
        else
            spans.back().second = static_cast<int>(s);
    }

    const std::vector<int> cuts = find_cut_points(neighborhoods, spans);

    std::vector<InfluenceWindow> windows;
    int start = 0;
    auto close_window = [&](int end) {
        InfluenceWindow w;
        w.window_id = static_cast<int>(windows.size());
        w.chromosome = meta[start].chromosome;
        w.start_site = start;
        w.end_site = end;
        windows.push_back(w);
        start = end + 1;
    };
    for (int cut : cuts) close_window(cut);
    close_window(static_cast<int>(meta.size()) - 1);
    return windows;
}

WindowSummary summarize_windows(const std::vector<InfluenceWindow>& windows) {
    WindowSummary s;
    s.count = windows.size();
    if (windows.empty()) return s;
    double sum = 0.0, sum_sq = 0.0;
    s.min_size = windows.front().n_sites();
    s.max_size = windows.front().n_sites();
    for (const auto& w : windows) {
        const int size = w.n_sites();
        sum += size;
        sum_sq += static_cast<double>(size) * size;
        s.min_size = std::min(s.min_size, size);
        s.max_size = std::max(s.max_size, size);
    }
    const double n = static_cast<double>(windows.size());
    s.mean_size = sum / n;
    s.sd_size = std::sqrt(std::max(0.0, sum_sq / n - s.mean_size * s.mean_size));
    return s;
}

void write_windows(const std::vector<InfluenceWindow>& windows,
                   const std::vector<SiteMeta>& meta, std::ostream& out,
                   const std::string& header) {
    out << header;
    out << "window_id\tchromosome\tstart_snp_id\tend_snp_id\tstart_bp\tend_bp\tn_sites\n";
    for (const auto& w : windows) {
        out << w.window_id << '\t' << w.chromosome << '\t' << meta[w.start_site].snp_id << '\t'
            << meta[w.end_site].snp_id << '\t' << meta[w.start_site].position_bp << '\t'
            << meta[w.end_site].position_bp << '\t' << w.n_sites() << '\n';
    }
}

std::vector<InfluenceWindow> read_windows(std::istream& in,
                                          const std::vector<SiteMeta>& meta) {
    std::unordered_map<std::string, int> site_of_snp;
    for (const auto& m : meta) site_of_snp.emplace(m.snp_id, m.site_index);

    std::vector<InfluenceWindow> windows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("window_id", 0) == 0) continue;
        std::istringstream row(line);
        InfluenceWindow w;
        std::string start_id, end_id;
        long start_bp, end_bp;
        int n_sites;
        if (!(row >> w.window_id >> w.chromosome >> start_id >> end_id >> start_bp >> end_bp >>
              n_sites))
            throw DataError("malformed windows line: '" + line + "'");
        const auto sit = site_of_snp.find(start_id);
        const auto eit = site_of_snp.find(end_id);
        if (sit == site_of_snp.end() || eit == site_of_snp.end())
            throw DataError("window snp_id not present in site metadata: '" + line + "'");
        w.start_site = sit->second;
        w.end_site = eit->second;
        if (w.end_site - w.start_site + 1 != n_sites)
            throw DataError("window n_sites mismatch: '" + line + "'");
        if (w.window_id != static_cast<int>(windows.size()))
            throw DataError("window_id values must be contiguous from 0");
        windows.push_back(w);
    }
    if (windows.empty()) throw DataError("no windows");
    return windows;
}

}  // namespace vrmrf
