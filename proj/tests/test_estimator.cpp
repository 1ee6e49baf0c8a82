#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "vrmrf/estimator.hpp"

using namespace vrmrf;

namespace {

const std::uint8_t W0[] = {0};
const std::uint8_t W1[] = {1};

NeighborhoodParams params_with(double c, int l0, int r0) {
    NeighborhoodParams p;
    p.penalty_c = c;
    p.max_left = l0;
    p.max_right = r0;
    return p;
}

}  // namespace

TEST_CASE("count_contexts reproduces a hand count") {
    // samples over (x_{-1}, x_0, x_1): (0,1,0), (0,1,1), (1,1,0), (0,1,0)
    const auto matrix = test::matrix_from_lines({"0010", "1111", "0100"});
    const auto counts = count_contexts(matrix, 1, 1, 1);
    CHECK(counts.effective_n() == 4);
    CHECK(counts.count(W0, 1, W0) == 2);
    CHECK(counts.count(W0, 1, W1) == 1);
    CHECK(counts.count(W1, 1, W0) == 1);
    CHECK(counts.count(W1, 1, W1) == 0);
    CHECK(counts.count(W0, 0, W0) == 0);
    CHECK(counts.context_total(W0, W0) == 2);
    CHECK(counts.context_total(W0, W1) == 1);
}

TEST_CASE("count_contexts with empty arms gives marginal frequencies") {
    const auto matrix = test::matrix_from_lines({"00112."});
    const auto counts = count_contexts(matrix, 0, 0, 0);
    CHECK(counts.effective_n() == 5);
    CHECK(counts.count({}, 0, {}) == 2);
    CHECK(counts.count({}, 1, {}) == 2);
    CHECK(counts.count({}, 2, {}) == 1);
}

TEST_CASE("count_contexts drops individuals missing anywhere in the window") {
    const auto matrix = test::matrix_from_lines({"000", "111", "0.1"});
    const auto counts = count_contexts(matrix, 1, 1, 1);
    CHECK(counts.effective_n() == 2);  // middle individual has a missing right cell
    const auto zero_arms = count_contexts(matrix, 1, 1, 0);
    CHECK(zero_arms.effective_n() == 3);
}

TEST_CASE("count_contexts refuses to cross a chromosome boundary") {
    const auto matrix = test::matrix_from_lines({"01", "10", "01", "10"}, 3, {1, 1, 2, 2});
    CHECK_THROWS_WITH_AS(count_contexts(matrix, 1, 0, 1),
                         doctest::Contains("chromosome boundary"), DataError);
    CHECK_NOTHROW(count_contexts(matrix, 1, 1, 0));
}

TEST_CASE("conditional_mle worked examples") {
    const long direct[] = {3, 1, 0};
    auto probs = conditional_mle(direct);
    CHECK(probs[0] == doctest::Approx(0.75));
    CHECK(probs[1] == doctest::Approx(0.25));
    CHECK(probs[2] == 0.0);

    const long empty[] = {0, 0, 0};
    probs = conditional_mle(empty);
    for (double p : probs) CHECK(p == doctest::Approx(1.0 / 3.0));

    const long deterministic[] = {5, 0, 0};
    probs = conditional_mle(deterministic);
    CHECK(probs[0] == 1.0);
    CHECK(probs[1] == 0.0);
}

TEST_CASE("conditional_mle outputs are a distribution") {
    Rng rng(31);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<long> counts(2 + rng.uniform_below(5));
        for (auto& c : counts) c = static_cast<long>(rng.uniform_below(50));
        const auto probs = conditional_mle(counts);
        double total = 0.0;
        for (double p : probs) {
            CHECK(p >= 0.0);
            total += p;
        }
        CHECK(std::fabs(total - 1.0) < 1e-12);
    }
}

TEST_CASE("log_conditional_likelihood worked examples") {
    // single context, center counts (2, 2, 0): 4 * log3(1/2)
    const auto matrix = test::matrix_from_lines({"0011"});
    const auto counts = count_contexts(matrix, 0, 0, 0);
    const double expected = 4.0 * std::log(0.5) / std::log(3.0);
    CHECK(log_conditional_likelihood(counts) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::fabs(expected - -2.523719) < 1e-6);
}

TEST_CASE("log_conditional_likelihood is zero for deterministic tables") {
    const auto matrix = test::matrix_from_lines({"0012", "0012", "0012"});
    const auto counts = count_contexts(matrix, 1, 1, 1);
    CHECK(log_conditional_likelihood(counts) == 0.0);
}

TEST_CASE("log_conditional_likelihood of an empty sample is zero") {
    const auto matrix = test::matrix_from_lines({"..", "00", ".."});
    const auto counts = count_contexts(matrix, 1, 1, 1);
    CHECK(counts.effective_n() == 0);
    CHECK(log_conditional_likelihood(counts) == 0.0);
}

TEST_CASE("pml penalty term follows c |A|^(l+r) log_A n") {
    const auto params = params_with(1.0, 5, 5);
    CHECK(pml_penalty(params, 3, 1, 1, 1000) ==
          doctest::Approx(9.0 * std::log(1000.0) / std::log(3.0)).epsilon(1e-12));
    CHECK(pml_penalty(params, 3, 0, 0, 3) == doctest::Approx(1.0));
    const auto half = params_with(0.5, 5, 5);
    CHECK(pml_penalty(half, 2, 2, 1, 500) ==
          doctest::Approx(0.5 * 8.0 * std::log(500.0) / std::log(2.0)));
}

TEST_CASE("pml_score decomposes into likelihood minus penalty") {
    Rng rng(32);
    const auto matrix = test::random_matrix(rng, 80, 7, 3, 0.05);
    const auto params = params_with(0.7, 2, 2);
    for (int l = 0; l <= 2; ++l) {
        for (int r = 0; r <= 2; ++r) {
            const double ll = log_conditional_likelihood(count_contexts(matrix, 3, l, r));
            const double penalty = pml_penalty(params, 3, l, r, matrix.n_individuals());
            CHECK(pml_score(matrix, 3, l, r, params) ==
                  doctest::Approx(ll - penalty).epsilon(1e-12));
        }
    }
}

TEST_CASE("pml_score with a vanishing penalty approaches the raw likelihood") {
    Rng rng(33);
    const auto matrix = test::random_matrix(rng, 60, 5, 3);
    const double ll = log_conditional_likelihood(count_contexts(matrix, 2, 1, 1));
    const auto params = params_with(1e-12, 2, 2);
    CHECK(pml_score(matrix, 2, 1, 1, params) == doctest::Approx(ll).epsilon(1e-9));
}

TEST_CASE("score_grid matches the direct per-cell computation") {
    Rng rng(34);
    for (int rep = 0; rep < 10; ++rep) {
        const auto matrix = test::random_matrix(rng, 50 + static_cast<int>(rng.uniform_below(100)),
                                                9, rep % 2 == 0 ? 3 : 2, 0.08, 2);
        const auto params = params_with(0.4, 3, 3);
        for (int site : {0, 2, 4, 8}) {
            const auto cells = score_grid(matrix, site, params);
            for (const auto& cell : cells) {
                const auto counts = count_contexts(matrix, site, cell.l, cell.r);
                CHECK(cell.effective_n == counts.effective_n());
                CHECK(cell.log_likelihood ==
                      doctest::Approx(log_conditional_likelihood(counts)).epsilon(1e-9));
                CHECK(cell.score ==
                      doctest::Approx(pml_score(matrix, site, cell.l, cell.r, params))
                          .epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("hashed counting above the dense limit matches the dense tables") {
    Rng rng(39);
    const auto matrix = test::random_matrix(rng, 120, 9, 3, 0.05);
    const auto dense = count_contexts(matrix, 4, 2, 2);
    const auto sparse = count_contexts(matrix, 4, 2, 2, /*dense_limit=*/1);
    CHECK(dense.dense());
    CHECK_FALSE(sparse.dense());
    CHECK(dense.effective_n() == sparse.effective_n());
    dense.for_each([&](std::uint64_t key, long count) {
        CHECK(sparse.count_by_key(key) == count);
    });
    CHECK(log_conditional_likelihood(dense) ==
          doctest::Approx(log_conditional_likelihood(sparse)).epsilon(1e-12));

    // the grid scorer falls back to per-cell counting below the dense limit
    NeighborhoodParams params;
    params.penalty_c = 0.5;
    params.max_left = 2;
    params.max_right = 2;
    NeighborhoodParams cramped = params;
    cramped.dense_table_limit = 1;
    const auto fast = estimate_neighborhood(matrix, 4, params);
    const auto generic = estimate_neighborhood(matrix, 4, cramped);
    CHECK(fast.l_hat == generic.l_hat);
    CHECK(fast.r_hat == generic.r_hat);
    CHECK(fast.pml_score == doctest::Approx(generic.pml_score).epsilon(1e-12));
    CHECK(fast.effective_n_at_opt == generic.effective_n_at_opt);
}

TEST_CASE("estimate_neighborhood breaks exact ties toward small l+r then small l") {
    // a site with no room for arms must return (0, 0)
    const auto one_site = test::matrix_from_lines({"0120"});
    const auto fit = estimate_neighborhood(one_site, 0, params_with(1.0, 3, 3));
    CHECK(fit.l_hat == 0);
    CHECK(fit.r_hat == 0);

    // three identical columns: the (0,1) and (1,0) tables are permutations
    // of each other and both deterministic, so their scores tie exactly and
    // both beat (0,0); the tie rule must pick (0,1)
    const std::string column = "01010101";
    const auto matrix = test::matrix_from_lines({column, column, column});
    const auto cells = score_grid(matrix, 1, params_with(1.0, 1, 1));
    REQUIRE(cells.size() == 4);
    CHECK(cells[0].l == 0);
    CHECK(cells[0].r == 0);
    CHECK(cells[1].l == 0);
    CHECK(cells[1].r == 1);
    CHECK(cells[2].l == 1);
    CHECK(cells[2].r == 0);
    CHECK(cells[1].log_likelihood == 0.0);
    CHECK(cells[2].log_likelihood == 0.0);
    CHECK(cells[1].score == cells[2].score);
    CHECK(cells[1].score > cells[0].score);
    const auto tie = estimate_neighborhood(matrix, 1, params_with(1.0, 1, 1));
    CHECK(tie.l_hat == 0);
    CHECK(tie.r_hat == 1);
}

TEST_CASE("a site independent of its flanks estimates (0,0) at large n") {
    Rng rng(35);
    const int n = 4000;
    std::vector<std::string> lines(3, std::string(n, '0'));
    for (int i = 0; i < n; ++i) {
        lines[0][i] = static_cast<char>('0' + rng.uniform_below(3));
        lines[1][i] = static_cast<char>('0' + rng.uniform_below(3));
        lines[2][i] = static_cast<char>('0' + rng.uniform_below(3));
    }
    const auto matrix = test::matrix_from_lines(lines);
    const auto fit = estimate_neighborhood(matrix, 1, params_with(1.0, 1, 1));
    CHECK(fit.l_hat == 0);
    CHECK(fit.r_hat == 0);
}

TEST_CASE("estimate_all matches the per-site estimate and truncates at boundaries") {
    Rng rng(36);
    const auto matrix = test::random_matrix(rng, 150, 12, 3, 0.05, 3);
    const auto params = params_with(0.6, 2, 2);
    const auto fits = estimate_all(matrix, params, 2);
    REQUIRE(fits.size() == static_cast<std::size_t>(matrix.n_sites()));
    for (int s = 0; s < matrix.n_sites(); ++s) {
        const auto single = estimate_neighborhood(matrix, s, params);
        CHECK(fits[s].site == s);
        CHECK(fits[s].l_hat == single.l_hat);
        CHECK(fits[s].r_hat == single.r_hat);
        CHECK(fits[s].pml_score == doctest::Approx(single.pml_score).epsilon(1e-12));
        const auto [span_start, span_end] = matrix.chromosome_span_of(s);
        CHECK(fits[s].l_hat <= s - span_start);
        CHECK(fits[s].r_hat <= span_end - s);
    }
}

TEST_CASE("single-site chromosomes always fit (0,0)") {
    const auto matrix = test::matrix_from_lines({"012", "210"}, 3, {1, 2});
    const auto fits = estimate_all(matrix, params_with(1.0, 5, 5));
    for (const auto& fit : fits) {
        CHECK(fit.l_hat == 0);
        CHECK(fit.r_hat == 0);
    }
}

TEST_CASE("estimate results are invariant to thread count and individual order") {
    Rng rng(37);
    const auto matrix = test::random_matrix(rng, 200, 20, 3, 0.1, 2);
    const auto params = params_with(0.8, 3, 3);
    const auto fits1 = estimate_all(matrix, params, 1);
    const auto fits4 = estimate_all(matrix, params, 4);
    REQUIRE(fits1.size() == fits4.size());
    for (std::size_t s = 0; s < fits1.size(); ++s) {
        CHECK(fits1[s].l_hat == fits4[s].l_hat);
        CHECK(fits1[s].r_hat == fits4[s].r_hat);
        CHECK(fits1[s].pml_score == fits4[s].pml_score);
    }

    // permuting individuals leaves every count, hence every fit, unchanged
    std::vector<int> perm(matrix.n_individuals());
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = matrix.n_individuals() - 1; i > 0; --i)
        std::swap(perm[i], perm[rng.uniform_below(i + 1)]);
    std::vector<std::uint8_t> cells(static_cast<std::size_t>(matrix.n_sites()) *
                                    matrix.n_individuals());
    for (int s = 0; s < matrix.n_sites(); ++s)
        for (int i = 0; i < matrix.n_individuals(); ++i)
            cells[static_cast<std::size_t>(s) * matrix.n_individuals() + i] =
                matrix.at(perm[i], s);
    const GenotypeMatrix shuffled(matrix.alphabet_size(), matrix.meta(),
                                  matrix.n_individuals(), std::move(cells));
    const auto fits_shuffled = estimate_all(shuffled, params, 2);
    for (std::size_t s = 0; s < fits1.size(); ++s) {
        CHECK(fits1[s].l_hat == fits_shuffled[s].l_hat);
        CHECK(fits1[s].r_hat == fits_shuffled[s].r_hat);
        CHECK(fits1[s].pml_score == doctest::Approx(fits_shuffled[s].pml_score).epsilon(1e-12));
    }
}

TEST_CASE("likelihood nesting: finer contexts never fit worse") {
    // holds with missing cells too: each (l, r) drops exactly the
    // individuals incomplete on its own window, and removals can only
    // raise a context's fitted log-likelihood
    Rng rng(38);
    for (int rep = 0; rep < 20; ++rep) {
        const auto matrix =
            test::random_matrix(rng, 30 + static_cast<int>(rng.uniform_below(100)), 7,
                                rep % 2 == 0 ? 2 : 3, rep % 3 == 0 ? 0.08 : 0.0);
        const int site = 3;
        double ll[4][4];
        for (int l = 0; l <= 3; ++l)
            for (int r = 0; r <= 3; ++r)
                ll[l][r] = log_conditional_likelihood(count_contexts(matrix, site, l, r));
        for (int l = 0; l <= 3; ++l) {
            for (int r = 0; r <= 3; ++r) {
                CHECK(ll[l][r] <= 1e-12);
                if (l > 0) CHECK(ll[l][r] >= ll[l - 1][r] - 1e-9);
                if (r > 0) CHECK(ll[l][r] >= ll[l][r - 1] - 1e-9);
            }
        }
    }
}

TEST_CASE("neighborhood summary reproduces mean and arm decomposition") {
    std::vector<SiteNeighborhood> fits = {
        {0, 1, 2, 0.0, 0}, {1, 0, 1, 0.0, 0}, {2, 2, 0, 0.0, 0}};
    const auto summary = summarize_neighborhoods(fits);
    CHECK(summary.mean_total == doctest::Approx(2.0));
    CHECK(summary.mean_left == doctest::Approx(1.0));
    CHECK(summary.mean_right == doctest::Approx(1.0));
    CHECK(summary.sd_total == doctest::Approx(std::sqrt(2.0 / 3.0)));
}
