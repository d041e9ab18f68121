#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "varbn/aggregate.hpp"
#include "varbn/pdf.hpp"

namespace varbn {

/// Equal-width binning of each process's aggregate losses on [0, max_i],
/// n_states bins each. Value v maps to state ceil(v / width) clamped to
/// [1, n_states]; zero maps to state 1.
struct Discretization {
    std::size_t n_states = 5;
    std::vector<double> bin_width;  // max_i / n_states, per process
    std::vector<double> max_value;  // per process

    std::size_t state_of(std::size_t process, double value) const;
};

struct StateMatrix {
    std::size_t n_records = 0;
    std::size_t n_processes = 0;
    std::size_t n_states = 5;
    std::vector<std::uint8_t> states;  // [k * n_processes + i], values 1..n_states

    std::uint8_t at(std::size_t record, std::size_t process) const {
        return states[record * n_processes + process];
    }
};

std::pair<StateMatrix, Discretization> discretize(const ExtractedDatabase& db,
                                                  std::size_t n_states = 5);

/// Directed acyclic graph over process nodes; edges are (parent, child).
struct DagStructure {
    std::size_t n_nodes = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // kept sorted

    explicit DagStructure(std::size_t n = 0) : n_nodes(n) {}

    bool has_edge(std::size_t parent, std::size_t child) const;
    void add_edge(std::size_t parent, std::size_t child);
    void remove_edge(std::size_t parent, std::size_t child);
    std::vector<std::size_t> parents_of(std::size_t node) const;
    bool is_acyclic() const;  // topological sort succeeds
};

/// Bayesian Information Criterion: maximized log-likelihood under MLE CPTs
/// minus (ln R)/2 times the number of free parameters.
double score(const DagStructure& structure, const StateMatrix& states);

enum class LearnMode { greedy, exhaustive };

/// greedy: hill-climbing over add/remove/reverse moves from the empty DAG,
/// best strictly-improving move each step. exhaustive: global BIC maximizer
/// over all labeled DAGs, capped at 4 nodes. Ties break toward fewer edges,
/// then lexicographic edge order.
DagStructure learn_structure(const StateMatrix& states, LearnMode mode);

struct DiscreteBayesNet {
    DagStructure structure;
    std::size_t n_states = 5;
    std::vector<std::string> labels;
    // Per node: sorted parent list and its CPT, laid out as
    // cpt[pa_index * n_states + (x - 1)] with pa_index mixed-radix over the
    // sorted parents (first parent least significant).
    std::vector<std::vector<std::size_t>> parents;
    std::vector<std::vector<double>> cpt;
};

/// P(x | pa) = (count(x, pa) + 1) / (count(pa) + n_states): MLE with add-one
/// smoothing, so probabilities never vanish.
DiscreteBayesNet learn_cpts(const DagStructure& structure, const StateMatrix& states);

/// Exact joint over all n_states^N configurations (capped at 1e6 entries);
/// configuration index is mixed-radix with node 0 least significant.
std::vector<double> joint(const DiscreteBayesNet& net);

/// Marginal of one process as a BinnedPdf with n_states bins of that
/// process's bin width, order 1.
BinnedPdf marginal(const DiscreteBayesNet& net, std::size_t process,
                   const Discretization& disc);

void write_net(const std::string& path, const DiscreteBayesNet& net);
void write_edge_list(const std::string& path, const DagStructure& structure,
                     const std::vector<std::string>& labels);

}  // namespace varbn
