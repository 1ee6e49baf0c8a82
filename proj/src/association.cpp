#include "vrmrf/association.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include "vrmrf/parallel.hpp"
#include "vrmrf/stats.hpp"

namespace vrmrf {

ContingencyTable window_contingency(const GenotypeMatrix& matrix,
                                    const InfluenceWindow& window,
                                    const Phenotype& phenotype) {
    if (phenotype.labels.size() != static_cast<std::size_t>(matrix.n_individuals()))
        throw DataError("phenotype length does not match matrix");
    if (window.start_site < 0 || window.end_site >= matrix.n_sites() ||
        window.start_site > window.end_site)
        throw DataError("window out of range");

    const int n = matrix.n_individuals();
    const int width = window.n_sites();

    // ordered map keeps rows canonical regardless of individual order
    std::map<std::string, std::array<long, 2>> rows;
    std::string config(static_cast<std::size_t>(width), '\0');

    ContingencyTable table;
    for (int i = 0; i < n; ++i) {
        bool missing = false;
        for (int s = window.start_site; s <= window.end_site; ++s) {
            const std::uint8_t v = matrix.at(i, s);
            if (v == GenotypeMatrix::kMissing) {
                missing = true;
                break;
            }
            config[s - window.start_site] = static_cast<char>(v);
        }
        if (missing) continue;
        auto& counts = rows.try_emplace(config, std::array<long, 2>{0, 0}).first->second;
        ++counts[phenotype.labels[i]];
        ++table.n_used;
    }

    table.rows.reserve(rows.size());
    for (auto& [config_key, counts] : rows) {
        ConfigurationRow row;
        row.configuration = config_key;
        row.n_control = counts[0];
        row.n_case = counts[1];
        table.n_control += counts[0];
        table.n_case += counts[1];
        table.rows.push_back(std::move(row));
    }
    return table;
}

ChiSquareResult chi_square_independence(const ContingencyTable& table) {
    ChiSquareResult result;
    result.df = std::max(0, static_cast<int>(table.rows.size()) - 1);

    if (table.rows.size() < 2 || table.n_control == 0 || table.n_case == 0 ||
        table.n_used == 0) {
        result.degenerate = true;
        return result;
    }

    const double total = static_cast<double>(table.n_used);
    const double column_totals[2] = {static_cast<double>(table.n_control),
                                     static_cast<double>(table.n_case)};
    double chi2 = 0.0;
    double min_expected = std::numeric_limits<double>::max();
    for (const auto& row : table.rows) {
        const double row_total = static_cast<double>(row.n_control + row.n_case);
        const double observed[2] = {static_cast<double>(row.n_control),
                                    static_cast<double>(row.n_case)};
        for (int c = 0; c < 2; ++c) {
            const double expected = row_total * column_totals[c] / total;
            min_expected = std::min(min_expected, expected);
            const double diff = observed[c] - expected;
            chi2 += diff * diff / expected;
        }
    }
    result.chi2 = chi2;
    result.min_expected = min_expected;
    result.p = stats::chi_square_sf(chi2, result.df);
    return result;
}

AssociationResult associate_window(const GenotypeMatrix& matrix,
                                   const InfluenceWindow& window,
                                   const Phenotype& phenotype) {
    const ContingencyTable table = window_contingency(matrix, window, phenotype);
    const ChiSquareResult chi = chi_square_independence(table);

    AssociationResult result;
    result.window_id = window.window_id;
    result.chi2 = chi.chi2;
    result.df = chi.df;
    result.p_value = std::max(chi.p, 1e-300);
    result.score = std::min(-std::log10(result.p_value), AssociationResult::kMaxScore);
    result.n_used = table.n_used;
    result.min_expected = chi.min_expected;
    result.degenerate = chi.degenerate;
    return result;
}

std::vector<AssociationResult> associate_all(const GenotypeMatrix& matrix,
                                             const std::vector<InfluenceWindow>& windows,
                                             const Phenotype& phenotype,
                                             unsigned n_threads) {
    if (n_threads == 0) n_threads = default_thread_count();
    std::vector<AssociationResult> results(windows.size());
    parallel_for(windows.size(), n_threads, [&](std::size_t i, unsigned) {
        results[i] = associate_window(matrix, windows[i], phenotype);
    });
    return results;
}

std::vector<AssociationResult> significant_windows(
    const std::vector<AssociationResult>& results, double threshold) {
    std::vector<AssociationResult> hits;
    for (const auto& r : results)
        if (!r.degenerate && r.p_value < threshold) hits.push_back(r);
    std::stable_sort(hits.begin(), hits.end(),
                     [](const AssociationResult& a, const AssociationResult& b) {
                         return a.p_value < b.p_value;
                     });
    return hits;
}

void write_association(const std::vector<AssociationResult>& results,
                       const std::vector<InfluenceWindow>& windows,
                       const std::vector<SiteMeta>& meta, std::ostream& out,
                       const std::string& header) {
    out.precision(10);
    out << header;
    out << "window_id\tchromosome\tstart_bp\tend_bp\tn_sites\tn_used\tchi2\tdf\tp_value\t"
           "neglog10_p\tmin_expected_count\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        const auto& w = windows[i];
        out << r.window_id << '\t' << w.chromosome << '\t' << meta[w.start_site].position_bp
            << '\t' << meta[w.end_site].position_bp << '\t' << w.n_sites() << '\t' << r.n_used
            << '\t' << r.chi2 << '\t' << r.df << '\t' << r.p_value << '\t' << r.score << '\t'
            << r.min_expected << '\n';
    }
}

void write_plot_data(const std::vector<AssociationResult>& results,
                     const std::vector<InfluenceWindow>& windows,
                     const std::vector<SiteMeta>& meta, std::ostream& out,
                     const std::string& header) {
    out.precision(10);
    out << header;
    out << "chromosome\tmidpoint_bp\tneglog10_p\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& w = windows[i];
        const long midpoint =
            (meta[w.start_site].position_bp + meta[w.end_site].position_bp) / 2;
        out << w.chromosome << '\t' << midpoint << '\t' << results[i].score << '\n';
    }
}

}  // namespace vrmrf
