#pragma once

// Feature matrices, Euclidean distances and single-linkage dendrograms.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "distfit/stats.hpp"

namespace distfit {

enum class Scaling { raw, zscore };

std::string_view scaling_name(Scaling s) noexcept;
Scaling parse_scaling(std::string_view name);  // "raw" | "zscore"

struct FeatureMatrix {
    std::vector<std::string> row_labels;
    std::vector<std::string> column_names;
    std::vector<std::vector<double>> values;  // rows x columns
    Scaling scaling = Scaling::raw;

    std::size_t rows() const noexcept { return values.size(); }
    std::size_t columns() const noexcept { return column_names.size(); }
};

// Column names accepted by feature_matrix, in table order:
// Sigma Mu Mean StDev lnSk lnKE FI H.5 H1 H2 H3.
const std::vector<std::string>& summary_columns();

double summary_value(const SummaryRow& row, std::string_view column);

// Throws ValidationError for unknown columns, fewer than two rows, duplicate
// labels, or a constant column under zscore (the message names the column).
FeatureMatrix feature_matrix(const std::vector<SummaryRow>& rows, const std::vector<std::string>& columns,
                             Scaling scaling = Scaling::raw);

void apply_scaling(FeatureMatrix& m, Scaling scaling);

struct TaxonEntry {
    std::string rank;
    std::string category;
};

struct TaxonomyTable {
    std::vector<std::string> species;            // first-appearance order
    std::vector<std::vector<TaxonEntry>> ranks;  // per species, in file order
};

// CSV with header `species,rank,category`; '#' lines are comments.
TaxonomyTable parse_taxonomy(std::istream& in);
TaxonomyTable load_taxonomy(const std::string& path);

struct Codebook {
    std::vector<std::string> ranks;
    std::vector<std::vector<std::string>> categories;  // categories[r][code]
};

struct TaxonomyEncoding {
    FeatureMatrix matrix;
    Codebook codebook;
};

// Integer codes per rank in first-appearance order. Throws ValidationError
// when species do not share the same rank list.
TaxonomyEncoding encode_taxonomy(const TaxonomyTable& table);

std::string serialize_codebook(const Codebook& codebook);

using DistanceMatrix = std::vector<std::vector<double>>;

DistanceMatrix distance_matrix(const FeatureMatrix& m);

struct Merge {
    std::size_t left;
    std::size_t right;
    double height;
};

// Leaves are nodes 0..N-1; merge i creates node N+i.
struct Dendrogram {
    std::vector<std::string> leaf_labels;
    std::vector<Merge> merges;

    std::size_t leaf_count() const noexcept { return leaf_labels.size(); }
    std::size_t root() const noexcept { return leaf_labels.size() + merges.size() - 1; }
};

// Ties on distance go to the lexicographically smallest (left, right) pair of
// cluster labels, where a cluster is labelled by its smallest leaf label.
Dendrogram single_linkage(const DistanceMatrix& d, const std::vector<std::string>& labels);

// Ultrametric Newick: each merge sits at height/2 above the leaves.
std::string to_newick(const Dendrogram& dgm);
std::string to_dot(const Dendrogram& dgm);
// Tab-separated left, right, height with a header line. Leaves appear by label,
// internal nodes as node<id>.
std::string merge_table(const Dendrogram& dgm);

// Reads the Newick subset written by to_newick back into a dendrogram. Node
// heights are twice the distance to the leaves.
Dendrogram parse_newick(std::string_view text);

// Leaf-label sets of every internal node, sorted; equal for equal topologies.
std::vector<std::vector<std::string>> clades(const Dendrogram& dgm);

}  // namespace distfit
