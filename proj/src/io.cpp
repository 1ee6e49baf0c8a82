#include "vrmrf/io.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace vrmrf {

namespace {

std::vector<std::string> split_tab(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

long parse_long(const std::string& text, const std::string& what) {
    try {
        std::size_t pos = 0;
        const long value = std::stol(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw DataError("invalid " + what + ": '" + text + "'");
    }
}

}  // namespace

std::vector<SiteMeta> parse_site_meta(std::istream& meta_stream) {
    std::vector<SiteMeta> meta;
    std::unordered_map<std::string, int> seen;
    std::string line;
    while (std::getline(meta_stream, line)) {
        strip_cr(line);
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_tab(line);
        if (fields.size() != 3)
            throw DataError("meta line must have 3 tab-separated columns: '" + line + "'");
        SiteMeta m;
        m.site_index = static_cast<int>(meta.size());
        m.snp_id = fields[0];
        m.chromosome = static_cast<int>(parse_long(fields[1], "chromosome"));
        m.position_bp = parse_long(fields[2], "position");
        if (m.chromosome < 1 || m.chromosome > 22)
            throw DataError("chromosome out of range 1..22: " + m.snp_id);
        if (m.position_bp < 0) throw DataError("negative position: " + m.snp_id);
        if (!seen.emplace(m.snp_id, m.site_index).second)
            throw DataError("duplicate snp_id: " + m.snp_id);
        if (!meta.empty()) {
            const SiteMeta& prev = meta.back();
            if (m.chromosome < prev.chromosome)
                throw DataError("unsorted chromosomes at " + m.snp_id);
            if (m.chromosome == prev.chromosome && m.position_bp <= prev.position_bp)
                throw DataError("unsorted positions at " + m.snp_id);
        }
        meta.push_back(std::move(m));
    }
    return meta;
}

GenotypeMatrix parse_genotype_files(std::istream& matrix_stream,
                                    std::istream& meta_stream,
                                    int alphabet_size) {
    if (alphabet_size < 2 || alphabet_size > 10)
        throw DataError("alphabet size for the matrix format must be in 2..10");

    std::vector<SiteMeta> meta = parse_site_meta(meta_stream);

    std::vector<std::uint8_t> cells;
    std::string line;
    int n_individuals = -1;
    std::size_t n_lines = 0;
    while (std::getline(matrix_stream, line)) {
        strip_cr(line);
        if (line.empty()) continue;
        if (n_individuals < 0) {
            n_individuals = static_cast<int>(line.size());
            cells.reserve(meta.size() * static_cast<std::size_t>(n_individuals));
        } else if (static_cast<int>(line.size()) != n_individuals) {
            throw DataError("malformed row length at matrix line " +
                            std::to_string(n_lines + 1) + ": expected " +
                            std::to_string(n_individuals) + " got " +
                            std::to_string(line.size()));
        }
        for (char ch : line) {
            if (ch == '.') {
                cells.push_back(GenotypeMatrix::kMissing);
            } else if (ch >= '0' && ch < '0' + alphabet_size) {
                cells.push_back(static_cast<std::uint8_t>(ch - '0'));
            } else {
                throw DataError(std::string("unknown symbol '") + ch + "' at matrix line " +
                                std::to_string(n_lines + 1));
            }
        }
        ++n_lines;
    }
    if (n_lines == 0) throw DataError("no sites");
    if (n_lines != meta.size())
        throw DataError("matrix has " + std::to_string(n_lines) + " sites but meta has " +
                        std::to_string(meta.size()));

    return GenotypeMatrix(alphabet_size, std::move(meta), n_individuals, std::move(cells));
}

void serialize_matrix(const GenotypeMatrix& matrix, std::ostream& out) {
    if (matrix.alphabet_size() > 10)
        throw DataError("matrix format supports alphabet sizes up to 10");
    std::string line(static_cast<std::size_t>(matrix.n_individuals()), '.');
    for (int s = 0; s < matrix.n_sites(); ++s) {
        const auto col = matrix.column(s);
        for (int i = 0; i < matrix.n_individuals(); ++i) {
            line[i] = col[i] == GenotypeMatrix::kMissing
                          ? '.'
                          : static_cast<char>('0' + col[i]);
        }
        out << line << '\n';
    }
}

void serialize_meta(const GenotypeMatrix& matrix, std::ostream& out) {
    for (const SiteMeta& m : matrix.meta())
        out << m.snp_id << '\t' << m.chromosome << '\t' << m.position_bp << '\n';
}

std::vector<std::string> parse_individual_order(std::istream& in) {
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        strip_cr(line);
        if (line.empty() || line[0] == '#') continue;
        ids.push_back(line);
    }
    if (ids.empty()) throw DataError("individual order file is empty");
    return ids;
}

Phenotype parse_phenotype(std::istream& in, const GenotypeMatrix& matrix) {
    const auto& ids = matrix.individual_ids();
    if (ids.empty())
        throw DataError("phenotype alignment requires an individual order file");

    std::unordered_map<std::string, std::uint8_t> by_id;
    std::string line;
    while (std::getline(in, line)) {
        strip_cr(line);
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_tab(line);
        if (fields.size() == 1) {
            // allow a single space separator as well
            const auto space = line.find(' ');
            if (space != std::string::npos)
                fields = {line.substr(0, space), line.substr(space + 1)};
        }
        if (fields.size() != 2)
            throw DataError("phenotype line must be 'individual_id<TAB>label': '" + line + "'");
        const std::string& label = fields[1];
        if (label != "0" && label != "1")
            throw DataError("phenotype label outside {0,1} for individual '" + fields[0] + "'");
        if (!by_id.emplace(fields[0], static_cast<std::uint8_t>(label[0] - '0')).second)
            throw DataError("duplicate phenotype record for individual '" + fields[0] + "'");
    }

    Phenotype pheno;
    pheno.labels.reserve(ids.size());
    for (const auto& id : ids) {
        const auto it = by_id.find(id);
        if (it == by_id.end())
            throw DataError("missing phenotype for individual '" + id + "'");
        pheno.labels.push_back(it->second);
    }
    return pheno;
}

EncodedColumn encode_scores(const std::vector<std::string>& raw_genotypes) {
    // Normalized genotype -> sorted pair of allele strings; "NA" = missing.
    struct Parsed {
        bool missing = false;
        std::string a, b;
    };
    std::vector<Parsed> parsed(raw_genotypes.size());
    std::map<std::string, int> allele_index;  // ordered, so ties are stable

    for (std::size_t i = 0; i < raw_genotypes.size(); ++i) {
        const std::string& g = raw_genotypes[i];
        if (g == "NA" || g == "na" || g == "." || g.empty()) {
            parsed[i].missing = true;
            continue;
        }
        const auto sep = g.find('_');
        if (sep == std::string::npos || sep == 0 || sep + 1 >= g.size())
            throw DataError("malformed genotype '" + g + "' (expected X_X or NA)");
        std::string a = g.substr(0, sep);
        std::string b = g.substr(sep + 1);
        if (b < a) std::swap(a, b);  // heterozygote orientation is unordered
        parsed[i].a = a;
        parsed[i].b = b;
        allele_index.emplace(a, 0);
        allele_index.emplace(b, 0);
    }

    if (allele_index.size() > 2) {
        std::string alleles;
        for (const auto& [name, _] : allele_index) {
            if (!alleles.empty()) alleles += ",";
            alleles += name;
        }
        throw DataError("more than 2 distinct alleles at one site: " + alleles);
    }

    EncodedColumn out;
    out.scores.assign(raw_genotypes.size(), GenotypeMatrix::kMissing);

    if (allele_index.empty()) {
        // every record missing
        out.report.n_missing = static_cast<int>(raw_genotypes.size());
        return out;
    }

    // Count the two homozygote classes.
    std::vector<std::string> alleles;
    for (const auto& [name, _] : allele_index) alleles.push_back(name);
    std::string major = alleles.front();
    std::string minor = alleles.size() == 2 ? alleles.back() : std::string();

    if (alleles.size() == 2) {
        int hom_first = 0, hom_second = 0;
        for (const auto& p : parsed) {
            if (p.missing || p.a != p.b) continue;
            if (p.a == alleles[0]) ++hom_first; else ++hom_second;
        }
        // Higher homozygote count is major; on ties the lexicographically
        // smaller allele (alleles[0]) is designated minor.
        if (hom_second > hom_first || hom_first == hom_second) {
            major = alleles[1];
            minor = alleles[0];
        }
    }

    for (std::size_t i = 0; i < parsed.size(); ++i) {
        const Parsed& p = parsed[i];
        if (p.missing) {
            ++out.report.n_missing;
            continue;
        }
        if (p.a != p.b) {
            out.scores[i] = 1;
            ++out.report.n_het;
        } else if (p.a == major) {
            out.scores[i] = 0;
            ++out.report.n_major_hom;
        } else {
            out.scores[i] = 2;
            ++out.report.n_minor_hom;
        }
    }
    out.report.major_allele = major;
    out.report.minor_allele = minor;
    return out;
}

GenotypeMatrix parse_raw_genotype_files(std::istream& raw_stream,
                                        std::istream& meta_stream,
                                        std::vector<AlleleReport>* reports) {
    std::vector<SiteMeta> meta = parse_site_meta(meta_stream);

    std::vector<std::uint8_t> cells;
    std::string line;
    int n_individuals = -1;
    std::size_t n_lines = 0;
    while (std::getline(raw_stream, line)) {
        strip_cr(line);
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_tab(line);
        if (fields.size() < 2)
            throw DataError("raw genotype line needs snp_id plus genotypes: '" + line + "'");
        if (n_lines >= meta.size())
            throw DataError("raw genotype file has more sites than meta");
        if (fields[0] != meta[n_lines].snp_id)
            throw DataError("raw genotype snp_id '" + fields[0] + "' does not match meta '" +
                            meta[n_lines].snp_id + "'");
        const int n_here = static_cast<int>(fields.size()) - 1;
        if (n_individuals < 0) n_individuals = n_here;
        else if (n_here != n_individuals)
            throw DataError("malformed row length at raw genotype line " +
                            std::to_string(n_lines + 1));

        std::vector<std::string> raw(fields.begin() + 1, fields.end());
        EncodedColumn encoded;
        try {
            encoded = encode_scores(raw);
        } catch (const DataError& e) {
            throw DataError(std::string(e.what()) + " (site " + fields[0] + ")");
        }
        cells.insert(cells.end(), encoded.scores.begin(), encoded.scores.end());
        if (reports) reports->push_back(encoded.report);
        ++n_lines;
    }
    if (n_lines == 0) throw DataError("no sites");
    if (n_lines != meta.size())
        throw DataError("raw genotype file has " + std::to_string(n_lines) +
                        " sites but meta has " + std::to_string(meta.size()));

    return GenotypeMatrix(3, std::move(meta), n_individuals, std::move(cells));
}

}  // namespace vrmrf
