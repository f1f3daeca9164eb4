#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "distfit/cluster.hpp"
#include "distfit/dataset.hpp"
#include "distfit/error.hpp"
#include "distfit/mle.hpp"
#include "oracles.hpp"

using namespace distfit;

namespace {

std::vector<std::string> letters(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(std::string(1, static_cast<char>('A' + i)));
    return out;
}

std::vector<double> heights(const Dendrogram& d) {
    std::vector<double> h;
    for (const auto& m : d.merges) h.push_back(m.height);
    return h;
}

const std::vector<SummaryRow>& table3_rows() {
    static const std::vector<SummaryRow> rows = [] {
        std::vector<SummaryRow> out;
        for (const auto& s : builtin_corpus().samples) {
            out.push_back(summarize(fit(FamilyId::Lognormal2P, s), s.species_label));
        }
        return out;
    }();
    return rows;
}

// Leaves below `node`.
std::set<std::string> leaves_under(const Dendrogram& d, std::size_t node) {
    if (node < d.leaf_count()) return {d.leaf_labels[node]};
    const Merge& m = d.merges[node - d.leaf_count()];
    auto out = leaves_under(d, m.left);
    auto right = leaves_under(d, m.right);
    out.insert(right.begin(), right.end());
    return out;
}

TaxonomyTable parse_taxonomy_text(const std::string& text) {
    std::istringstream in(text);
    return parse_taxonomy(in);
}

}  // namespace

TEST_SUITE("cluster") {

TEST_CASE("Euclidean distance") {
    FeatureMatrix m{{"a", "b", "c"}, {"x", "y"}, {{0.0, 0.0}, {3.0, 4.0}, {0.0, 0.0}}, Scaling::raw};
    const auto d = distance_matrix(m);
    CHECK(d[0][1] == 5.0);
    CHECK(d[1][0] == 5.0);
    CHECK(d[0][2] == 0.0);
    CHECK(d[1][1] == 0.0);
}

TEST_CASE("triangle inequality on random features") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    FeatureMatrix m;
    for (std::size_t i = 0; i < 15; ++i) {
        m.row_labels.push_back("r" + std::to_string(i));
        m.values.push_back({g(rng), g(rng), g(rng), g(rng)});
    }
    m.column_names = {"a", "b", "c", "d"};
    const auto d = distance_matrix(m);
    for (std::size_t i = 0; i < 15; ++i)
        for (std::size_t j = 0; j < 15; ++j)
            for (std::size_t k = 0; k < 15; ++k) CHECK(d[i][k] <= d[i][j] + d[j][k] + 1e-12);
}

TEST_CASE("three points on a line") {
    const DistanceMatrix d = {{0, 1, 10}, {1, 0, 9}, {10, 9, 0}};
    const Dendrogram g = single_linkage(d, {"p0", "p1", "p10"});
    REQUIRE(g.merges.size() == 2);
    CHECK(g.merges[0].left == 0);
    CHECK(g.merges[0].right == 1);
    CHECK(g.merges[0].height == 1.0);
    CHECK(g.merges[1].left == 3);
    CHECK(g.merges[1].right == 2);
    CHECK(g.merges[1].height == 9.0);
    CHECK(g.root() == 4);
}

TEST_CASE("two leaves") {
    const Dendrogram g = single_linkage({{0, 2.5}, {2.5, 0}}, {"A", "B"});
    REQUIRE(g.merges.size() == 1);
    CHECK(g.merges[0].height == 2.5);
}

TEST_CASE("merge heights equal minimum spanning tree weights") {
    std::mt19937_64 rng(20240);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + trial % 11;
        const auto d = oracle::random_distances(n, rng);
        const Dendrogram g = single_linkage(d, letters(n));
        INFO("trial " << trial << " n=" << n);
        CHECK(heights(g) == oracle::mst_weights(d));
    }
}

TEST_CASE("dendrogram structure and monotone heights") {
    std::mt19937_64 rng(3);
    const auto d = oracle::random_distances(12, rng);
    const Dendrogram g = single_linkage(d, letters(12));
    const auto h = heights(g);
    CHECK(std::is_sorted(h.begin(), h.end()));
    // Every node except the root is a child exactly once.
    std::vector<int> seen(2 * 12 - 1, 0);
    for (std::size_t k = 0; k < g.merges.size(); ++k) {
        CHECK(g.merges[k].left < 12 + k);
        CHECK(g.merges[k].right < 12 + k);
        ++seen[g.merges[k].left];
        ++seen[g.merges[k].right];
    }
    for (std::size_t node = 0; node < seen.size(); ++node) CHECK(seen[node] == (node == g.root() ? 0 : 1));
}

TEST_CASE("row permutations relabel but keep heights and clades") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 9;
        const auto d = oracle::random_distances(n, rng);
        const auto labels = letters(n);
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        DistanceMatrix dp(n, std::vector<double>(n));
        std::vector<std::string> lp(n);
        for (std::size_t i = 0; i < n; ++i) {
            lp[i] = labels[perm[i]];
            for (std::size_t j = 0; j < n; ++j) dp[i][j] = d[perm[i]][perm[j]];
        }
        const Dendrogram a = single_linkage(d, labels);
        const Dendrogram b = single_linkage(dp, lp);
        CHECK(heights(a) == heights(b));
        CHECK(clades(a) == clades(b));
    }
}

TEST_CASE("scaling features scales heights and keeps topology") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    FeatureMatrix m;
    m.column_names = {"a", "b", "c"};
    for (std::size_t i = 0; i < 10; ++i) {
        m.row_labels.push_back("s" + std::to_string(i));
        m.values.push_back({u(rng), u(rng), u(rng)});
    }
    FeatureMatrix scaled = m;
    for (auto& row : scaled.values)
        for (double& v : row) v *= 2.5;
    const Dendrogram a = single_linkage(distance_matrix(m), m.row_labels);
    const Dendrogram b = single_linkage(distance_matrix(scaled), scaled.row_labels);
    CHECK(clades(a) == clades(b));
    for (std::size_t k = 0; k < a.merges.size(); ++k) {
        CHECK(b.merges[k].left == a.merges[k].left);
        CHECK(b.merges[k].right == a.merges[k].right);
        CHECK(b.merges[k].height == doctest::Approx(2.5 * a.merges[k].height).epsilon(1e-12));
    }
}

TEST_CASE("ties go to the smallest label pair") {
    // Equilateral: every pair is at distance 1.
    const DistanceMatrix d = {{0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
    const Dendrogram g = single_linkage(d, {"C", "A", "B"});
    REQUIRE(g.merges.size() == 2);
    CHECK(leaves_under(g, 3) == std::set<std::string>{"A", "B"});
    // Repeated runs agree.
    const Dendrogram again = single_linkage(d, {"C", "A", "B"});
    CHECK(again.merges[0].left == g.merges[0].left);
    CHECK(again.merges[0].right == g.merges[0].right);
}

TEST_CASE("Newick output") {
    const Dendrogram g = single_linkage({{0, 1}, {1, 0}}, {"A", "B"});
    CHECK(to_newick(g) == "(A:0.5,B:0.5);");
    const Dendrogram q = single_linkage({{0, 1}, {1, 0}}, {"a b", "it's"});
    CHECK(parse_newick(to_newick(q)).leaf_labels.size() == 2);
    CHECK(clades(parse_newick(to_newick(q))) == clades(q));
}

TEST_CASE("Newick round trip preserves topology and heights") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + trial % 10;
        const auto d = oracle::random_distances(n, rng);
        const Dendrogram g = single_linkage(d, letters(n));
        const Dendrogram back = parse_newick(to_newick(g));
        CHECK(clades(back) == clades(g));
        auto h0 = heights(g);
        auto h1 = heights(back);
        std::sort(h1.begin(), h1.end());
        REQUIRE(h0.size() == h1.size());
        for (std::size_t k = 0; k < h0.size(); ++k) CHECK(h1[k] == doctest::Approx(h0[k]).epsilon(1e-12));
    }
    CHECK_THROWS(parse_newick("(A:1,B:1"));
}

TEST_CASE("DOT output has one statement per node") {
    std::mt19937_64 rng(1);
    for (std::size_t n : {2u, 5u, 10u}) {
        const Dendrogram g = single_linkage(oracle::random_distances(n, rng), letters(n));
        const std::string dot = to_dot(g);
        CHECK(dot.rfind("digraph", 0) == 0);
        std::size_t nodes = 0;
        std::istringstream in(dot);
        for (std::string line; std::getline(in, line);) {
            if (line.find("->") == std::string::npos && line.find(" [") != std::string::npos &&
                line.find("  n") == 0)
                ++nodes;
        }
        CHECK(nodes == 2 * n - 1);
        CHECK(to_dot(g) == dot);
    }
}

TEST_CASE("merge table") {
    const DistanceMatrix d = {{0, 1, 10}, {1, 0, 9}, {10, 9, 0}};
    const std::string t = merge_table(single_linkage(d, {"x", "y", "z"}));
    CHECK(t.rfind("left\tright\theight\n", 0) == 0);
    CHECK(t == "left\tright\theight\nx\ty\t1\nnode3\tz\t9\n");
}

TEST_CASE("feature matrix from the summary table") {
    const auto& rows = table3_rows();
    const FeatureMatrix m = feature_matrix(rows, summary_columns());
    CHECK(m.rows() == 10);
    CHECK(m.columns() == 11);
    CHECK(m.values[9][0] == rows[9].sigma);
    CHECK(m.values[9][7] == rows[9].renyi[0]);
    const auto d = distance_matrix(m);
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = 0; j < 10; ++j)
            if (i != j) CHECK(d[i][j] > 0.0);

    const FeatureMatrix one = feature_matrix(rows, {"lnKE"});
    CHECK(one.rows() == 10);
    CHECK(one.columns() == 1);
    CHECK(one.values[0][0] == rows[0].ln_kurtosis_excess);
}

TEST_CASE("zscore columns are standardized") {
    const FeatureMatrix m = feature_matrix(table3_rows(), summary_columns(), Scaling::zscore);
    CHECK(m.scaling == Scaling::zscore);
    for (std::size_t c = 0; c < m.columns(); ++c) {
        double mean = 0.0;
        for (const auto& row : m.values) mean += row[c];
        mean /= m.rows();
        double ss = 0.0;
        for (const auto& row : m.values) ss += (row[c] - mean) * (row[c] - mean);
        CHECK(std::fabs(mean) <= 1e-12);
        CHECK(std::fabs(std::sqrt(ss / (m.rows() - 1)) - 1.0) <= 1e-12);
    }
}

TEST_CASE("feature matrix errors") {
    const auto& rows = table3_rows();
    CHECK_THROWS_AS(feature_matrix(rows, {"Nope"}), ValidationError);
    CHECK_THROWS_AS(feature_matrix({rows[0]}, {"Mu"}), ValidationError);
    CHECK_THROWS_AS(feature_matrix({rows[0], rows[0]}, {"Mu"}), ValidationError);
    std::vector<SummaryRow> flat = {summarize(1.0, 0.0, "a"), summarize(1.0, 2.0, "b"), summarize(1.0, 3.0, "c")};
    try {
        feature_matrix(flat, {"Mu", "Sigma"}, Scaling::zscore);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("Sigma") != std::string::npos);
    }
    CHECK(parse_scaling("zscore") == Scaling::zscore);
    CHECK(scaling_name(Scaling::raw) == "raw");
    CHECK_THROWS(parse_scaling("minmax"));
}

TEST_CASE("taxonomy coding in first-appearance order") {
    const TaxonomyTable t = parse_taxonomy_text(
        "species,rank,category\nA,family,Lamiaceae\nB,family,Lamiaceae\nC,family,Rutaceae\n");
    const TaxonomyEncoding e = encode_taxonomy(t);
    REQUIRE(e.matrix.rows() == 3);
    CHECK(e.matrix.values[0][0] == 0.0);
    CHECK(e.matrix.values[1][0] == 0.0);
    CHECK(e.matrix.values[2][0] == 1.0);
    CHECK(distance_matrix(e.matrix)[0][1] == 0.0);
    CHECK(e.codebook.ranks == std::vector<std::string>{"family"});
    CHECK(e.codebook.categories[0] == std::vector<std::string>{"Lamiaceae", "Rutaceae"});
    CHECK(serialize_codebook(e.codebook).find("family\t1\tRutaceae") != std::string::npos);
}

TEST_CASE("taxonomy errors") {
    CHECK_THROWS_AS(
        encode_taxonomy(parse_taxonomy_text("species,rank,category\nA,family,F\nA,genus,G\nB,family,F\n")),
        ValidationError);
    CHECK_THROWS(parse_taxonomy_text("name,rank\nA,family\n"));
    CHECK_THROWS(load_taxonomy("/nonexistent/cronquist.csv"));
}

TEST_CASE("bundled Cronquist table") {
    const TaxonomyTable t = load_taxonomy(std::string(DISTFIT_DATA_DIR) + "/cronquist.csv");
    const TaxonomyEncoding e = encode_taxonomy(t);
    REQUIRE(e.matrix.rows() == 10);
    const auto at = [&](const std::string& label) {
        return static_cast<std::size_t>(std::find(e.matrix.row_labels.begin(), e.matrix.row_labels.end(), label) -
                                        e.matrix.row_labels.begin());
    };
    const std::size_t mepi = at("MEPI"), mesp = at("MESP3");
    REQUIRE(mepi < 10);
    REQUIRE(mesp < 10);
    std::vector<std::string> differing;
    for (std::size_t c = 0; c < e.matrix.columns(); ++c) {
        if (e.matrix.values[mepi][c] != e.matrix.values[mesp][c]) differing.push_back(e.matrix.column_names[c]);
    }
    CHECK(differing == std::vector<std::string>{"species"});

    const Dendrogram g = single_linkage(distance_matrix(e.matrix), e.matrix.row_labels);
    // The first merge touching either Mentha joins the two of them.
    for (std::size_t k = 0; k < g.merges.size(); ++k) {
        const auto left = leaves_under(g, g.merges[k].left);
        const auto right = leaves_under(g, g.merges[k].right);
        const bool touches = left.count("MEPI") || left.count("MESP3") || right.count("MEPI") || right.count("MESP3");
        if (!touches) continue;
        CHECK(left.size() + right.size() == 2);
        CHECK((left.count("MEPI") + right.count("MEPI") + left.count("MESP3") + right.count("MESP3")) == 2);
        break;
    }
}

}
