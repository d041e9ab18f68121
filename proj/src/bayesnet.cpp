#include "varbn/bayesnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "varbn/csv.hpp"

namespace varbn {

std::size_t Discretization::state_of(std::size_t process, double value) const {
    const double width = bin_width[process];
    auto state = static_cast<long long>(std::ceil(value / width));
    if (state < 1) state = 1;
    if (state > static_cast<long long>(n_states)) state = static_cast<long long>(n_states);
    return static_cast<std::size_t>(state);
}

std::pair<StateMatrix, Discretization> discretize(const ExtractedDatabase& db,
                                                  std::size_t n_states) {
    if (db.n_records < 1) throw std::invalid_argument("extracted database is empty");
    if (n_states < 2) throw std::invalid_argument("need at least 2 states");
    Discretization disc;
    disc.n_states = n_states;
    disc.bin_width.resize(db.n_processes);
    disc.max_value.resize(db.n_processes);
    for (std::size_t i = 0; i < db.n_processes; ++i) {
        double mx = 0.0;
        for (std::size_t k = 0; k < db.n_records; ++k) mx = std::max(mx, db.at(k, i));
        if (!(mx > 0.0))
            throw std::invalid_argument("degenerate process " +
                                        (i < db.labels.size() ? db.labels[i]
                                                              : std::to_string(i + 1)) +
                                        ": all aggregates are zero");
        disc.max_value[i] = mx;
        disc.bin_width[i] = mx / static_cast<double>(n_states);
    }
    StateMatrix sm;
    sm.n_records = db.n_records;
    sm.n_processes = db.n_processes;
    sm.n_states = n_states;
    sm.states.resize(db.n_records * db.n_processes);
    for (std::size_t k = 0; k < db.n_records; ++k)
        for (std::size_t i = 0; i < db.n_processes; ++i)
            sm.states[k * db.n_processes + i] =
                static_cast<std::uint8_t>(disc.state_of(i, db.at(k, i)));
    return {std::move(sm), std::move(disc)};
}

bool DagStructure::has_edge(std::size_t parent, std::size_t child) const {
    return std::binary_search(edges.begin(), edges.end(), std::make_pair(parent, child));
}

void DagStructure::add_edge(std::size_t parent, std::size_t child) {
    if (parent == child) throw std::invalid_argument("self loops are not allowed");
    auto e = std::make_pair(parent, child);
    auto it = std::lower_bound(edges.begin(), edges.end(), e);
    if (it != edges.end() && *it == e) return;
    edges.insert(it, e);
}

void DagStructure::remove_edge(std::size_t parent, std::size_t child) {
    auto e = std::make_pair(parent, child);
    auto it = std::lower_bound(edges.begin(), edges.end(), e);
    if (it != edges.end() && *it == e) edges.erase(it);
}

std::vector<std::size_t> DagStructure::parents_of(std::size_t node) const {
    std::vector<std::size_t> out;
    for (const auto& [p, c] : edges)
        if (c == node) out.push_back(p);
    std::sort(out.begin(), out.end());
    return out;
}

bool DagStructure::is_acyclic() const {
    std::vector<std::size_t> indegree(n_nodes, 0);
    for (const auto& [p, c] : edges) {
        if (p >= n_nodes || c >= n_nodes) return false;
        ++indegree[c];
    }
    std::vector<std::size_t> ready;
    for (std::size_t v = 0; v < n_nodes; ++v)
        if (indegree[v] == 0) ready.push_back(v);
    std::size_t removed = 0;
    while (!ready.empty()) {
        const std::size_t v = ready.back();
        ready.pop_back();
        ++removed;
        for (const auto& [p, c] : edges)
            if (p == v && --indegree[c] == 0) ready.push_back(c);
    }
    return removed == n_nodes;
}

namespace {

// Decomposable BIC: per-node log-likelihood under MLE CPTs minus
// (ln R)/2 * (n-1) * n^{|parents|}, cached per (node, parent set).
class BicScorer {
public:
    explicit BicScorer(const StateMatrix& states) : states_(states) {
        if (states.n_records < 1) throw std::invalid_argument("state matrix is empty");
        if (states.n_processes > 32)
            throw std::invalid_argument("structure learning is capped at 32 nodes");
        log_r_ = std::log(static_cast<double>(states.n_records));
    }

    double local(std::size_t node, const std::vector<std::size_t>& parents) {
        std::uint64_t mask = 0;
        for (std::size_t p : parents) mask |= (std::uint64_t{1} << p);
        const std::uint64_t key = (static_cast<std::uint64_t>(node) << 32) | mask;
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        const double value = compute(node, parents);
        cache_.emplace(key, value);
        return value;
    }

    double structure_score(const DagStructure& g) {
        double total = 0.0;
        for (std::size_t v = 0; v < g.n_nodes; ++v) total += local(v, g.parents_of(v));
        return total;
    }

private:
    double compute(std::size_t node, const std::vector<std::size_t>& parents) const {
        const std::size_t n = states_.n_states;
        std::size_t pa_configs = 1;
        for (std::size_t p = 0; p < parents.size(); ++p) pa_configs *= n;
        std::vector<std::uint32_t> counts(pa_configs * n, 0);
        for (std::size_t k = 0; k < states_.n_records; ++k) {
            std::size_t idx = 0, mult = 1;
            for (std::size_t p : parents) {
                idx += (states_.at(k, p) - 1) * mult;
                mult *= n;
            }
            ++counts[idx * n + (states_.at(k, node) - 1)];
        }
        double ll = 0.0;
        for (std::size_t pa = 0; pa < pa_configs; ++pa) {
            std::uint32_t total = 0;
            for (std::size_t x = 0; x < n; ++x) total += counts[pa * n + x];
            if (total == 0) continue;
            for (std::size_t x = 0; x < n; ++x) {
                const std::uint32_t c = counts[pa * n + x];
                if (c > 0) ll += c * std::log(static_cast<double>(c));
            }
            ll -= total * std::log(static_cast<double>(total));
        }
        const double params = static_cast<double>((n - 1) * pa_configs);
        return ll - 0.5 * log_r_ * params;
    }

    const StateMatrix& states_;
    double log_r_ = 0.0;
    std::unordered_map<std::uint64_t, double> cache_;
};

struct Move {
    enum class Kind { remove = 0, reverse = 1, add = 2 } kind;
    std::size_t u, v;
};

DagStructure learn_greedy(const StateMatrix& states, BicScorer& scorer) {
    const std::size_t n = states.n_processes;
    DagStructure g(n);
    std::vector<double> local(n);
    for (std::size_t v = 0; v < n; ++v) local[v] = scorer.local(v, {});

    for (;;) {
        double best_delta = 0.0;
        bool have_move = false;
        Move best_move{Move::Kind::add, 0, 0};
        std::size_t best_edges = 0;

        auto consider = [&](const Move& m, double delta, std::size_t result_edges) {
            if (!(delta > 0.0)) return;
            if (have_move) {
                if (delta < best_delta) return;
                if (delta == best_delta) {
                    const auto lhs = std::make_tuple(result_edges, static_cast<int>(m.kind), m.u, m.v);
                    const auto rhs = std::make_tuple(best_edges, static_cast<int>(best_move.kind),
                                                     best_move.u, best_move.v);
                    if (!(lhs < rhs)) return;
                }
            }
            have_move = true;
            best_delta = delta;
            best_move = m;
            best_edges = result_edges;
        };

        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = 0; v < n; ++v) {
                if (u == v) continue;
                if (g.has_edge(u, v)) {
                    // remove u -> v
                    auto pa = g.parents_of(v);
                    auto without = pa;
                    without.erase(std::find(without.begin(), without.end(), u));
                    consider({Move::Kind::remove, u, v}, scorer.local(v, without) - local[v],
                             g.edges.size() - 1);
                    // reverse u -> v
                    DagStructure cand = g;
                    cand.remove_edge(u, v);
                    cand.add_edge(v, u);
                    if (cand.is_acyclic()) {
                        auto pa_u = g.parents_of(u);
                        auto with_v = pa_u;
                        with_v.insert(std::lower_bound(with_v.begin(), with_v.end(), v), v);
                        const double delta = (scorer.local(v, without) - local[v]) +
                                             (scorer.local(u, with_v) - local[u]);
                        consider({Move::Kind::reverse, u, v}, delta, g.edges.size());
                    }
                } else if (!g.has_edge(v, u)) {
                    // add u -> v
                    DagStructure cand = g;
                    cand.add_edge(u, v);
                    if (!cand.is_acyclic()) continue;
                    auto pa = g.parents_of(v);
                    auto with_u = pa;
                    with_u.insert(std::lower_bound(with_u.begin(), with_u.end(), u), u);
                    consider({Move::Kind::add, u, v}, scorer.local(v, with_u) - local[v],
                             g.edges.size() + 1);
                }
            }

        if (!have_move) break;
        switch (best_move.kind) {
            case Move::Kind::remove:
                g.remove_edge(best_move.u, best_move.v);
                local[best_move.v] = scorer.local(best_move.v, g.parents_of(best_move.v));
                break;
            case Move::Kind::reverse:
                g.remove_edge(best_move.u, best_move.v);
                g.add_edge(best_move.v, best_move.u);
                local[best_move.v] = scorer.local(best_move.v, g.parents_of(best_move.v));
                local[best_move.u] = scorer.local(best_move.u, g.parents_of(best_move.u));
                break;
            case Move::Kind::add:
                g.add_edge(best_move.u, best_move.v);
                local[best_move.v] = scorer.local(best_move.v, g.parents_of(best_move.v));
                break;
        }
    }
    return g;
}

DagStructure learn_exhaustive(const StateMatrix& states, BicScorer& scorer) {
    const std::size_t n = states.n_processes;
    if (n > 4) throw std::invalid_argument("exhaustive search capped at 4 nodes");
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v)
            if (u != v) pairs.emplace_back(u, v);

    bool have_best = false;
    double best_score = 0.0;
    DagStructure best(n);
    const std::size_t n_masks = std::size_t{1} << pairs.size();
    for (std::size_t mask = 0; mask < n_masks; ++mask) {
        DagStructure g(n);
        for (std::size_t b = 0; b < pairs.size(); ++b)
            if (mask & (std::size_t{1} << b)) g.add_edge(pairs[b].first, pairs[b].second);
        if (!g.is_acyclic()) continue;
        const double s = scorer.structure_score(g);
        if (!have_best || s > best_score ||
            (s == best_score && (g.edges.size() < best.edges.size() ||
                                 (g.edges.size() == best.edges.size() && g.edges < best.edges)))) {
            have_best = true;
            best_score = s;
            best = g;
        }
    }
    return best;
}

}  // namespace

double score(const DagStructure& structure, const StateMatrix& states) {
    if (structure.n_nodes != states.n_processes)
        throw std::invalid_argument("structure size does not match data");
    if (!structure.is_acyclic()) throw std::invalid_argument("structure has a cycle");
    BicScorer scorer(states);
    return scorer.structure_score(structure);
}

DagStructure learn_structure(const StateMatrix& states, LearnMode mode) {
    if (states.n_records < 2) throw std::invalid_argument("need at least 2 records to learn");
    BicScorer scorer(states);
    return mode == LearnMode::greedy ? learn_greedy(states, scorer)
                                     : learn_exhaustive(states, scorer);
}

DiscreteBayesNet learn_cpts(const DagStructure& structure, const StateMatrix& states) {
    if (structure.n_nodes != states.n_processes)
        throw std::invalid_argument("structure size does not match data");
    if (!structure.is_acyclic()) throw std::invalid_argument("structure has a cycle");
    const std::size_t n = states.n_states;
    DiscreteBayesNet net;
    net.structure = structure;
    net.n_states = n;
    net.labels.reserve(structure.n_nodes);
    for (std::size_t v = 0; v < structure.n_nodes; ++v)
        net.labels.push_back("P" + std::to_string(v + 1));
    net.parents.resize(structure.n_nodes);
    net.cpt.resize(structure.n_nodes);
    for (std::size_t v = 0; v < structure.n_nodes; ++v) {
        net.parents[v] = structure.parents_of(v);
        std::size_t pa_configs = 1;
        for (std::size_t p = 0; p < net.parents[v].size(); ++p) pa_configs *= n;
        std::vector<std::uint32_t> counts(pa_configs * n, 0);
        std::vector<std::uint32_t> totals(pa_configs, 0);
        for (std::size_t k = 0; k < states.n_records; ++k) {
            std::size_t idx = 0, mult = 1;
            for (std::size_t p : net.parents[v]) {
                idx += (states.at(k, p) - 1) * mult;
                mult *= n;
            }
            ++counts[idx * n + (states.at(k, v) - 1)];
            ++totals[idx];
        }
        net.cpt[v].resize(pa_configs * n);
        for (std::size_t pa = 0; pa < pa_configs; ++pa)
            for (std::size_t x = 0; x < n; ++x)
                net.cpt[v][pa * n + x] = (counts[pa * n + x] + 1.0) /
                                         (totals[pa] + static_cast<double>(n));
    }
    return net;
}

std::vector<double> joint(const DiscreteBayesNet& net) {
    const std::size_t nodes = net.structure.n_nodes;
    const std::size_t n = net.n_states;
    double size = 1.0;
    for (std::size_t v = 0; v < nodes; ++v) size *= static_cast<double>(n);
    if (size > 1e6)
        throw std::invalid_argument(
            "state space too large for exact enumeration; use per-process marginals");
    const auto total = static_cast<std::size_t>(size);
    std::vector<double> table(total, 1.0);
    std::vector<std::size_t> state(nodes, 0);  // 0-based states
    for (std::size_t idx = 0; idx < total; ++idx) {
        double p = 1.0;
        for (std::size_t v = 0; v < nodes; ++v) {
            std::size_t pa_idx = 0, mult = 1;
            for (std::size_t par : net.parents[v]) {
                pa_idx += state[par] * mult;
                mult *= n;
            }
            p *= net.cpt[v][pa_idx * n + state[v]];
        }
        table[idx] = p;
        for (std::size_t v = 0; v < nodes; ++v) {  // mixed-radix increment
            if (++state[v] < n) break;
            state[v] = 0;
        }
    }
    return table;
}

BinnedPdf marginal(const DiscreteBayesNet& net, std::size_t process,
                   const Discretization& disc) {
    if (process >= net.structure.n_nodes) throw std::invalid_argument("process index out of range");
    if (disc.bin_width.size() <= process)
        throw std::invalid_argument("discretization does not cover process");
    const std::vector<double> table = joint(net);
    const std::size_t n = net.n_states;
    std::size_t mult = 1;
    for (std::size_t v = 0; v < process; ++v) mult *= n;
    BinnedPdf pdf;
    pdf.mass.assign(n, 0.0);
    pdf.bin_width = disc.bin_width[process];
    pdf.order = 1;
    for (std::size_t idx = 0; idx < table.size(); ++idx)
        pdf.mass[(idx / mult) % n] += table[idx];
    return pdf;
}

void write_net(const std::string& path, const DiscreteBayesNet& net) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "nodes";
    for (const auto& l : net.labels) out << ' ' << l;
    out << "\nn_states " << net.n_states << "\nedges " << net.structure.edges.size() << '\n';
    for (const auto& [p, c] : net.structure.edges)
        out << net.labels[p] << ' ' << net.labels[c] << '\n';
    for (std::size_t v = 0; v < net.structure.n_nodes; ++v) {
        out << "cpt " << net.labels[v];
        if (!net.parents[v].empty()) {
            out << " |";
            for (std::size_t p : net.parents[v]) out << ' ' << net.labels[p];
        }
        out << '\n';
        std::size_t pa_configs = net.cpt[v].size() / net.n_states;
        for (std::size_t pa = 0; pa < pa_configs; ++pa) {
            for (std::size_t x = 0; x < net.n_states; ++x) {
                if (x) out << ' ';
                out << format_double(net.cpt[v][pa * net.n_states + x]);
            }
            out << '\n';
        }
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

void write_edge_list(const std::string& path, const DagStructure& structure,
                     const std::vector<std::string>& labels) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (const auto& [p, c] : structure.edges) {
        const std::string pl = p < labels.size() ? labels[p] : std::to_string(p + 1);
        const std::string cl = c < labels.size() ? labels[c] : std::to_string(c + 1);
        out << pl << ' ' << cl << '\n';
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace varbn
