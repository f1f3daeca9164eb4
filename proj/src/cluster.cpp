#include "distfit/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "distfit/error.hpp"
#include "text_util.hpp"

namespace distfit {

std::string_view scaling_name(Scaling s) noexcept { return s == Scaling::zscore ? "zscore" : "raw"; }

Scaling parse_scaling(std::string_view name) {
    if (name == "raw") return Scaling::raw;
    if (name == "zscore") return Scaling::zscore;
    throw ValidationError("unknown scaling '" + std::string(name) + "' (expected raw or zscore)");
}

const std::vector<std::string>& summary_columns() {
    static const std::vector<std::string> columns = {"Sigma", "Mu", "Mean", "StDev", "lnSk", "lnKE",
                                                     "FI",    "H.5", "H1",  "H2",    "H3"};
    return columns;
}

double summary_value(const SummaryRow& row, std::string_view column) {
    if (column == "Sigma") return row.sigma;
    if (column == "Mu") return row.mu;
    if (column == "Mean") return row.mean;
    if (column == "StDev") return row.stdev;
    if (column == "lnSk") return row.ln_skewness;
    if (column == "lnKE") return row.ln_kurtosis_excess;
    if (column == "FI") return row.fisher_information;
    if (column == "H.5") return row.renyi_at(0.5);
    if (column == "H1") return row.renyi_at(1.0);
    if (column == "H2") return row.renyi_at(2.0);
    if (column == "H3") return row.renyi_at(3.0);
    throw ValidationError("unknown feature column '" + std::string(column) + "'");
}

void apply_scaling(FeatureMatrix& m, Scaling scaling) {
    m.scaling = scaling;
    if (scaling == Scaling::raw) return;
    const std::size_t n = m.rows();
    if (n < 2) throw ValidationError("zscore scaling needs at least two rows");
    for (std::size_t c = 0; c < m.columns(); ++c) {
        double mean = 0.0;
        for (const auto& row : m.values) mean += row[c];
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (const auto& row : m.values) ss += (row[c] - mean) * (row[c] - mean);
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        if (!(sd > 0.0)) throw ValidationError("column '" + m.column_names[c] + "' is constant; cannot zscore");
        for (auto& row : m.values) row[c] = (row[c] - mean) / sd;
    }
}

FeatureMatrix feature_matrix(const std::vector<SummaryRow>& rows, const std::vector<std::string>& columns,
                             Scaling scaling) {
    if (rows.size() < 2) throw ValidationError("feature matrix needs at least two rows");
    if (columns.empty()) throw ValidationError("feature matrix needs at least one column");
    FeatureMatrix m;
    m.column_names = columns;
    std::set<std::string> labels;
    for (const auto& row : rows) {
        if (!labels.insert(row.label).second) throw ValidationError("duplicate row label '" + row.label + "'");
        std::vector<double> values;
        values.reserve(columns.size());
        for (const auto& c : columns) values.push_back(summary_value(row, c));
        m.row_labels.push_back(row.label);
        m.values.push_back(std::move(values));
    }
    apply_scaling(m, scaling);
    return m;
}

TaxonomyTable parse_taxonomy(std::istream& in) {
    TaxonomyTable table;
    std::map<std::string, std::size_t, std::less<>> index;
    bool header_seen = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view view = detail::trim(line);
        if (view.empty() || view.front() == '#') continue;
        const auto fields = detail::split_csv(view);
        if (!header_seen) {
            if (fields.size() != 3 || fields[0] != "species" || fields[1] != "rank" || fields[2] != "category") {
                throw ParseError(line_no, "expected header 'species,rank,category'");
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty()) {
            throw ParseError(line_no, "expected 'species,rank,category'");
        }
        const std::string species(fields[0]);
        auto it = index.find(species);
        if (it == index.end()) {
            it = index.emplace(species, table.species.size()).first;
            table.species.push_back(species);
            table.ranks.emplace_back();
        }
        table.ranks[it->second].push_back({std::string(fields[1]), std::string(fields[2])});
    }
    if (!header_seen) throw ParseError(0, "missing header 'species,rank,category'");
    return table;
}

TaxonomyTable load_taxonomy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open taxonomy file '" + path + "'");
    return parse_taxonomy(in);
}

TaxonomyEncoding encode_taxonomy(const TaxonomyTable& table) {
    if (table.species.empty()) throw ValidationError("empty taxonomy table");
    Codebook book;
    for (const auto& e : table.ranks.front()) book.ranks.push_back(e.rank);
    book.categories.resize(book.ranks.size());

    FeatureMatrix m;
    m.column_names = book.ranks;
    for (std::size_t s = 0; s < table.species.size(); ++s) {
        const auto& entries = table.ranks[s];
        bool same = entries.size() == book.ranks.size();
        for (std::size_t r = 0; same && r < entries.size(); ++r) same = entries[r].rank == book.ranks[r];
        if (!same) {
            throw ValidationError("species '" + table.species[s] + "' does not share the rank list of '" +
                                  table.species.front() + "'");
        }
        std::vector<double> row;
        for (std::size_t r = 0; r < entries.size(); ++r) {
            auto& cats = book.categories[r];
            auto it = std::find(cats.begin(), cats.end(), entries[r].category);
            if (it == cats.end()) it = cats.insert(cats.end(), entries[r].category);
            row.push_back(static_cast<double>(it - cats.begin()));
        }
        m.row_labels.push_back(table.species[s]);
        m.values.push_back(std::move(row));
    }
    return {std::move(m), std::move(book)};
}

std::string serialize_codebook(const Codebook& codebook) {
    std::string out = "rank\tcode\tcategory\n";
    for (std::size_t r = 0; r < codebook.ranks.size(); ++r) {
        for (std::size_t c = 0; c < codebook.categories[r].size(); ++c) {
            out += codebook.ranks[r] + "\t" + std::to_string(c) + "\t" + codebook.categories[r][c] + "\n";
        }
    }
    return out;
}

DistanceMatrix distance_matrix(const FeatureMatrix& m) {
    const std::size_t n = m.rows();
    if (n < 2) throw ValidationError("distance matrix needs at least two rows");
    DistanceMatrix d(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double ss = 0.0;
            for (std::size_t k = 0; k < m.columns(); ++k) {
                const double diff = m.values[i][k] - m.values[j][k];
                ss += diff * diff;
            }
            d[i][j] = d[j][i] = std::sqrt(ss);
        }
    }
    return d;
}

Dendrogram single_linkage(const DistanceMatrix& d, const std::vector<std::string>& labels) {
    const std::size_t n = labels.size();
    if (n < 2) throw ValidationError("single linkage needs at least two leaves");
    if (d.size() != n) throw ValidationError("distance matrix size does not match the label count");
    for (const auto& row : d) {
        if (row.size() != n) throw ValidationError("distance matrix is not square");
    }

    struct Cluster {
        std::size_t node;
        std::string key;  // smallest member label
        std::vector<std::size_t> members;
    };
    std::vector<Cluster> active;
    for (std::size_t i = 0; i < n; ++i) active.push_back({i, labels[i], {i}});

    auto linkage = [&](const Cluster& a, const Cluster& b) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i : a.members) {
            for (std::size_t j : b.members) best = std::min(best, d[i][j]);
        }
        return best;
    };

    Dendrogram dgm{labels, {}};
    while (active.size() > 1) {
        std::size_t bi = 0, bj = 1;
        double bd = std::numeric_limits<double>::infinity();
        std::pair<std::string, std::string> bkey;
        for (std::size_t i = 0; i < active.size(); ++i) {
            for (std::size_t j = i + 1; j < active.size(); ++j) {
                const double dist = linkage(active[i], active[j]);
                auto key = std::minmax(active[i].key, active[j].key);
                std::pair<std::string, std::string> k(key.first, key.second);
                if (dist < bd || (dist == bd && k < bkey)) {
                    bd = dist;
                    bi = i;
                    bj = j;
                    bkey = std::move(k);
                }
            }
        }
        if (active[bj].key < active[bi].key) std::swap(bi, bj);
        Cluster merged{n + dgm.merges.size(), std::min(active[bi].key, active[bj].key), active[bi].members};
        merged.members.insert(merged.members.end(), active[bj].members.begin(), active[bj].members.end());
        dgm.merges.push_back({active[bi].node, active[bj].node, bd});
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(std::max(bi, bj)));
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(std::min(bi, bj)));
        active.push_back(std::move(merged));
    }
    return dgm;
}

namespace {

double node_height(const Dendrogram& dgm, std::size_t node) {
    return node < dgm.leaf_count() ? 0.0 : dgm.merges[node - dgm.leaf_count()].height;
}

std::string newick_label(const std::string& label) {
    if (label.find_first_of(" ():;,[]'\t") == std::string::npos) return label;
    std::string quoted = "'";
    for (char c : label) {
        if (c == '\'') quoted += '\'';
        quoted += c;
    }
    return quoted + "'";
}

void write_newick(const Dendrogram& dgm, std::size_t node, std::string& out) {
    if (node < dgm.leaf_count()) {
        out += newick_label(dgm.leaf_labels[node]);
        return;
    }
    const Merge& m = dgm.merges[node - dgm.leaf_count()];
    out += '(';
    for (std::size_t child : {m.left, m.right}) {
        if (child != m.left) out += ',';
        write_newick(dgm, child, out);
        out += ':' + detail::format_shortest((m.height - node_height(dgm, child)) / 2.0);
    }
    out += ')';
}

}  // namespace

std::string to_newick(const Dendrogram& dgm) {
    if (dgm.merges.empty()) throw ValidationError("empty dendrogram");
    std::string out;
    write_newick(dgm, dgm.root(), out);
    return out + ";";
}

std::string to_dot(const Dendrogram& dgm) {
    std::ostringstream out;
    out << "digraph dendrogram {\n  rankdir=TB;\n";
    for (std::size_t i = 0; i < dgm.leaf_count(); ++i) {
        std::string label;
        for (char c : dgm.leaf_labels[i]) {
            if (c == '"' || c == '\\') label += '\\';
            label += c;
        }
        out << "  n" << i << " [shape=box, label=\"" << label << "\"];\n";
    }
    for (std::size_t k = 0; k < dgm.merges.size(); ++k) {
        out << "  n" << dgm.leaf_count() + k << " [shape=point, height_value=\""
            << detail::format_shortest(dgm.merges[k].height) << "\", xlabel=\""
            << detail::format_significant(dgm.merges[k].height, 4) << "\"];\n";
    }
    for (std::size_t k = 0; k < dgm.merges.size(); ++k) {
        const std::size_t parent = dgm.leaf_count() + k;
        out << "  n" << parent << " -> n" << dgm.merges[k].left << ";\n";
        out << "  n" << parent << " -> n" << dgm.merges[k].right << ";\n";
    }
    out << "}\n";
    return out.str();
}

std::string merge_table(const Dendrogram& dgm) {
    std::string out = "left\tright\theight\n";
    auto name = [&](std::size_t node) {
        return node < dgm.leaf_count() ? dgm.leaf_labels[node] : "node" + std::to_string(node);
    };
    for (const Merge& m : dgm.merges) {
        out += name(m.left) + "\t" + name(m.right) + "\t" + detail::format_shortest(m.height) + "\n";
    }
    return out;
}

namespace {

class NewickReader {
public:
    explicit NewickReader(std::string_view text) : s_(text) {}

    struct Node {
        std::string label;
        std::vector<std::size_t> children;
        double branch = 0.0;
        double depth = 0.0;  // distance from the node down to its leaves
    };
    std::vector<Node> nodes;

    std::size_t parse_tree() {
        const std::size_t root = parse_node();
        skip_space();
        if (!consume(';')) fail("expected ';'");
        skip_space();
        if (pos_ != s_.size()) fail("trailing text");
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(0, "newick: " + what + " at offset " + std::to_string(pos_));
    }
    void skip_space() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\n' || s_[pos_] == '\t' || s_[pos_] == '\r')) ++pos_;
    }
    bool consume(char c) {
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    std::string parse_label() {
        skip_space();
        std::string label;
        if (consume('\'')) {
            for (;;) {
                if (pos_ >= s_.size()) fail("unterminated quoted label");
                const char c = s_[pos_++];
                if (c == '\'') {
                    if (consume('\'')) {
                        label += '\'';
                        continue;
                    }
                    break;
                }
                label += c;
            }
            return label;
        }
        while (pos_ < s_.size() && std::string_view("():;,").find(s_[pos_]) == std::string_view::npos) {
            label += s_[pos_++];
        }
        return std::string(detail::trim(label));
    }
    std::size_t parse_node() {
        skip_space();
        Node node;
        if (consume('(')) {
            do {
                node.children.push_back(parse_node());
                skip_space();
            } while (consume(','));
            if (!consume(')')) fail("expected ')'");
            if (node.children.size() != 2) fail("only binary trees are supported");
        }
        node.label = parse_label();
        skip_space();
        if (consume(':')) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::string_view(",);").find(s_[pos_]) == std::string_view::npos) ++pos_;
            if (!detail::parse_double(s_.substr(start, pos_ - start), node.branch)) fail("bad branch length");
        }
        if (node.children.empty() && node.label.empty()) fail("unlabelled leaf");
        if (!node.children.empty()) {
            const Node& c = nodes[node.children.front()];
            node.depth = c.depth + c.branch;
        }
        nodes.push_back(std::move(node));
        return nodes.size() - 1;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace

Dendrogram parse_newick(std::string_view text) {
    NewickReader reader(text);
    const std::size_t root = reader.parse_tree();
    const auto& nodes = reader.nodes;

    // Leaves in left-to-right order; internal nodes in post-order, then by height.
    std::vector<std::size_t> leaves, internal;
    std::function<void(std::size_t)> walk = [&](std::size_t i) {
        for (std::size_t c : nodes[i].children) walk(c);
        if (nodes[i].children.empty()) {
            leaves.push_back(i);
        } else {
            internal.push_back(i);
        }
    };
    walk(root);
    std::stable_sort(internal.begin(), internal.end(),
                     [&](std::size_t a, std::size_t b) { return nodes[a].depth < nodes[b].depth; });

    Dendrogram dgm;
    std::map<std::size_t, std::size_t> id;
    for (std::size_t leaf : leaves) {
        id[leaf] = dgm.leaf_labels.size();
        dgm.leaf_labels.push_back(nodes[leaf].label);
    }
    for (std::size_t k = 0; k < internal.size(); ++k) id[internal[k]] = leaves.size() + k;
    for (std::size_t node : internal) {
        const auto& ch = nodes[node].children;
        dgm.merges.push_back({id.at(ch[0]), id.at(ch[1]), 2.0 * nodes[node].depth});
    }
    return dgm;
}

std::vector<std::vector<std::string>> clades(const Dendrogram& dgm) {
    const std::size_t n = dgm.leaf_count();
    std::vector<std::vector<std::string>> members(n + dgm.merges.size());
    for (std::size_t i = 0; i < n; ++i) members[i] = {dgm.leaf_labels[i]};
    std::vector<std::vector<std::string>> out;
    for (std::size_t k = 0; k < dgm.merges.size(); ++k) {
        auto& m = members[n + k];
        m = members[dgm.merges[k].left];
        m.insert(m.end(), members[dgm.merges[k].right].begin(), members[dgm.merges[k].right].end());
        std::sort(m.begin(), m.end());
        out.push_back(m);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace distfit
