// End-to-end checks of the vrmrf binary: pipeline wiring, determinism
// across thread counts, and exit codes. Runs the real executable against
// small fixtures in a scratch directory.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

int g_failures = 0;

#define REQUIRE(cond, msg)                                                      \
    do {                                                                        \
        if (!(cond)) {                                                          \
            std::cerr << "[FAIL] " << __FILE__ << ":" << __LINE__ << " " << msg \
                      << "\n";                                                  \
            ++g_failures;                                                       \
        }                                                                       \
    } while (0)

const std::string kCli = VRMRF_CLI_PATH;

int run(const std::string& args, const std::string& log_name) {
    const std::string command =
        kCli + " " + args + " > " + log_name + ".out 2> " + log_name + ".err";
    const int status = std::system(command.c_str());
    if (status == -1) return -1;
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

// file contents ignoring '#' header lines (which echo the command line)
std::string data_lines(const std::string& path) {
    std::ifstream in(path);
    std::string line, result;
    while (std::getline(in, line))
        if (line.empty() || line[0] != '#') result += line + "\n";
    return result;
}

void test_qc_command() {
    write_file("m.txt",
               "001122001122\n"
               "000000000000\n"
               "010212010212\n");
    write_file("meta.tsv",
               "rs1\t1\t100\nrs2\t1\t200\nrs3\t1\t300\n");

    int code = run("qc --matrix m.txt --meta meta.tsv --out-report qc.tsv "
                   "--out-matrix f.txt --out-meta fmeta.tsv",
                   "qc");
    REQUIRE(code == 0, "qc exits 0");
    const std::string report = slurp("qc.tsv");
    REQUIRE(report.find("rs2\t0\t") != std::string::npos, "monomorphic site has maf 0");
    REQUIRE(report.find("REMOVED\tMAF") != std::string::npos, "rs2 removed for MAF");
    const std::string filtered = slurp("f.txt");
    REQUIRE(filtered == "001122001122\n010212010212\n", "filtered matrix drops rs2");

    code = run("qc --matrix m.txt --meta meta.tsv --maf-min 0 --out-report qc0.tsv", "qc0");
    REQUIRE(code == 0, "qc with --maf-min 0 exits 0");
    REQUIRE(slurp("qc0.tsv").find("REMOVED") == std::string::npos,
            "no removals at maf-min 0");
}

void test_fit_determinism_and_grid_of_one() {
    int code = run("simulate --seed 5 --alphabet 3 --blocks 3,2 --concentration 0.4 "
                   "--n 400 --out-matrix sim.txt --out-meta sim_meta.tsv",
                   "sim");
    REQUIRE(code == 0, "simulate exits 0");

    code = run("fit --matrix sim.txt --meta sim_meta.tsv --penalty-c 0.5 "
               "--max-left 2 --max-right 2 --threads 1 --out fit1.tsv",
               "fit1");
    REQUIRE(code == 0, "fit t1 exits 0");
    code = run("fit --matrix sim.txt --meta sim_meta.tsv --penalty-c 0.5 "
               "--max-left 2 --max-right 2 --threads 3 --out fit3.tsv",
               "fit3");
    REQUIRE(code == 0, "fit t3 exits 0");
    REQUIRE(data_lines("fit1.tsv") == data_lines("fit3.tsv"),
            "fit output is thread-invariant");
    REQUIRE(slurp("fit1.err").find("neighborhood size mean") != std::string::npos,
            "fit prints the summary line");

    code = run("fit --matrix sim.txt --meta sim_meta.tsv --max-left 0 --max-right 0 "
               "--out fit0.tsv",
               "fit0");
    REQUIRE(code == 0, "degenerate grid fit exits 0");
    std::istringstream rows(data_lines("fit0.tsv"));
    std::string line;
    std::getline(rows, line);  // column header
    while (std::getline(rows, line)) {
        std::istringstream fields(line);
        std::string site, snp, chrom, l, r;
        fields >> site >> snp >> chrom >> l >> r;
        REQUIRE(l == "0" && r == "0", "grid of one returns (0,0)");
    }
}

void test_segment_and_associate() {
    int code = run("segment --neighborhoods fit1.tsv --meta sim_meta.tsv --out win.tsv",
                   "segment");
    REQUIRE(code == 0, "segment exits 0");
    REQUIRE(slurp("segment.err").find("influence windows") != std::string::npos,
            "segment prints summary statistics");

    // single-window fixture: both sites reach each other
    write_file("nb_one.tsv", "site_index\tsnp_id\tchromosome\tl_hat\tr_hat\tpml_score\t"
                             "effective_n\n0\ta\t1\t0\t1\t0\t1\n1\tb\t1\t1\t0\t0\t1\n");
    write_file("meta_one.tsv", "a\t1\t10\nb\t1\t20\n");
    code = run("segment --neighborhoods nb_one.tsv --meta meta_one.tsv --out win_one.tsv",
               "segment_one");
    REQUIRE(code == 0, "single-window segment exits 0");
    const std::string windows_text = data_lines("win_one.tsv");
    REQUIRE(windows_text.find("0\t1\ta\tb\t10\t20\t2") != std::string::npos,
            "one window covering both sites");

    write_file("empty.tsv", "");
    code = run("segment --neighborhoods empty.tsv --meta meta_one.tsv --out win_e.tsv",
               "segment_empty");
    REQUIRE(code == 2, "empty neighborhoods input is a data error");

    // phenotype with a planted effect on the first simulated site
    std::ifstream sim("sim.txt");
    std::string first_row;
    std::getline(sim, first_row);
    const int n = static_cast<int>(first_row.size());
    std::ostringstream ids, pheno;
    for (int i = 0; i < n; ++i) {
        ids << "id" << i << "\n";
        const int label = first_row[i] == '0' ? 0 : 1;
        pheno << "id" << i << "\t" << label << "\n";
    }
    write_file("ids.txt", ids.str());
    write_file("pheno.tsv", pheno.str());

    code = run("associate --matrix sim.txt --meta sim_meta.tsv --windows win.tsv "
               "--individuals ids.txt --phenotype pheno.tsv --out assoc.tsv "
               "--out-plot plot.tsv --out-significant sig.tsv --threads 2",
               "assoc");
    REQUIRE(code == 0, "associate exits 0");
    const std::string sig = data_lines("sig.tsv");
    std::istringstream sig_rows(sig);
    std::string header_row, top_row;
    std::getline(sig_rows, header_row);
    REQUIRE(std::getline(sig_rows, top_row) && top_row.rfind("0\t", 0) == 0,
            "window containing the planted site ranks first");

    code = run("associate --matrix sim.txt --meta sim_meta.tsv --windows win.tsv "
               "--individuals ids.txt --phenotype pheno.tsv --out assoc_all.tsv "
               "--report-threshold 1.0 --out-significant sig_all.tsv",
               "assoc_all");
    REQUIRE(code == 0, "associate threshold 1.0 exits 0");
    const auto count_rows = [](const std::string& text) {
        int rows = 0;
        std::istringstream in(text);
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) rows += !line.empty();
        return rows;
    };
    REQUIRE(count_rows(data_lines("sig_all.tsv")) == count_rows(data_lines("assoc_all.tsv")),
            "threshold 1.0 lists every window");
}

void test_simulate_determinism() {
    REQUIRE(run("simulate --seed 9 --alphabet 2 --blocks 2,2 --concentration 0.5 --n 100 "
                "--out-matrix s1.txt --out-truth t1.tsv",
                "sim1") == 0,
            "simulate run 1");
    REQUIRE(run("simulate --seed 9 --alphabet 2 --blocks 2,2 --concentration 0.5 --n 100 "
                "--out-matrix s2.txt --out-truth t2.tsv",
                "sim2") == 0,
            "simulate run 2");
    REQUIRE(slurp("s1.txt") == slurp("s2.txt"), "same seed gives the same matrix");
    REQUIRE(data_lines("t1.tsv") == data_lines("t2.tsv"), "same seed gives the same truth");
}

void test_exit_codes() {
    REQUIRE(run("fit --matrix nonexistent.txt --meta meta.tsv --out x.tsv", "missing") == 2,
            "missing file is a data error");
    REQUIRE(run("frobnicate", "usage") != 0, "unknown subcommand fails");
    write_file("bad_meta.tsv", "rs1\t1\t200\nrs2\t1\t100\n");
    write_file("bad_m.txt", "00\n11\n");
    REQUIRE(run("fit --matrix bad_m.txt --meta bad_meta.tsv --out x.tsv", "unsorted") == 2,
            "unsorted positions is a data error");
    REQUIRE(slurp("unsorted.err").find("unsorted positions") != std::string::npos,
            "error message names the problem");
}

}  // namespace

int main() {
    const fs::path scratch = fs::current_path() / "cli_test_scratch";
    fs::remove_all(scratch);
    fs::create_directories(scratch);
    fs::current_path(scratch);

    test_qc_command();
    test_fit_determinism_and_grid_of_one();
    test_segment_and_associate();
    test_simulate_determinism();
    test_exit_codes();

    if (g_failures == 0) {
        std::cout << "cli_tests: all checks passed\n";
        return 0;
    }
    std::cout << "cli_tests: " << g_failures << " failures\n";
    return 1;
}
