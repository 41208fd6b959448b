#pragma once

#include "bosejj/model.hpp"
#include "bosejj/numerics.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace bosejj {

enum class PatchKind { Zd, Comb, Custom };

// Finite window into an infinite graph.  Vertices carry dense ids; for the
// built kinds `coords` holds lattice coordinates (d ints on Z^d, d+1 on the
// comb with the tooth coordinate last).  `depth` is the hop distance to the
// patch boundary; operators only act on supports with depth >= margin so the
// patch is indistinguishable from the infinite graph there.
struct GraphPatch {
    PatchKind kind = PatchKind::Custom;
    int d = 0;
    int radius = 0;
    int base_radius = 0;
    int tooth_length = 0;
    int boundary_margin = 0;

    int n = 0;
    std::vector<std::vector<int>> coords;
    std::vector<std::string> names;
    std::map<std::vector<int>, int> coord_index;
    std::map<std::string, int> name_index;

    std::vector<int> adj_offsets;
    std::vector<int> adj;
    std::vector<int> depth;

    std::span<const int> neighbors(int v) const {
        return {adj.data() + adj_offsets[v],
                adj.data() + adj_offsets[v + 1]};
    }
    int degree(int v) const { return adj_offsets[v + 1] - adj_offsets[v]; }
    bool is_interior(int v) const { return depth[v] >= boundary_margin; }
    std::optional<int> find(const std::vector<int>& c) const;
    std::optional<int> find(const std::string& name) const;
    bool is_regular() const;
};

GraphPatch make_zd_patch(int d, int radius, int margin = 3);
GraphPatch make_comb_patch(int d, int base_radius, int tooth_length, int margin = 3);

// Direction relation on the patch edges.  succ[v] and pred[v] partition the
// neighbor list of v.
struct Orientation {
    std::vector<std::vector<int>> succ;
    std::vector<std::vector<int>> pred;
};

// Each directed pair must cover exactly one patch edge, each edge exactly once.
Orientation orientation_from_pairs(const GraphPatch& g,
                                   const std::vector<std::pair<int, int>>& pairs);

// y succeeds x iff phi(y) > phi(x); throws when an edge has a zero increment.
Orientation orient_by_phi(const GraphPatch& g, const std::vector<double>& phi);

// One "u v" pair per line; '#' starts a comment.  Vertex ids are strings in
// order of first appearance.  Line order doubles as the direction relation.
struct ParsedGraph {
    GraphPatch patch;
    Orientation orient;
};
ParsedGraph parse_edge_list(const std::string& text);

// Finitely supported vector on a patch, keyed by vertex id.
struct GraphExplicit {
    std::map<int, cdouble> amp;

    cdouble at(int v) const {
        auto it = amp.find(v);
        return it == amp.end() ? cdouble{0.0, 0.0} : it->second;
    }
    double norm() const;
};

GraphExplicit delta_at(const GraphPatch& g, const std::vector<int>& coords);
cdouble inner(const GraphExplicit& a, const GraphExplicit& b);

struct AdaptedFunction {
    std::vector<double> phi;
    double lipschitz_c = 1.0;
};

// Sum of all lattice coordinates.  On the comb this includes the tooth
// coordinate and reproduces the displayed conjugate-operator formulas.
AdaptedFunction coordinate_sum_phi(const GraphPatch& g);
// Comb variant summing base coordinates only.
AdaptedFunction base_coordinate_sum_phi(const GraphPatch& g);

GraphExplicit a_apply(const GraphPatch& g, const GraphExplicit& xi);
GraphExplicit k_apply(const GraphPatch& g, const AdaptedFunction& phi,
                      const GraphExplicit& xi);

// Raw patch adjacency on dense vectors, no interior demand (Lanczos driver).
void a_matvec(const GraphPatch& g, std::span<const cdouble> in, std::span<cdouble> out);

// Checks the three adapted-function conditions over interior pairs at hop
// distance <= 2 (farther pairs share no neighbor and hold vacuously):
// edge increments bounded by lipschitz_c, the common-neighbor balance
// sum [2 phi(z) - phi(x) - phi(y)] = 0, and its cubic analogue.
struct AdaptedVerdict {
    double max_edge_increment = 0.0;
    std::vector<std::pair<int, int>> edge_violations;
    std::vector<std::pair<int, int>> balance_violations;
    std::vector<std::pair<int, int>> cubic_violations;
    long pairs_checked = 0;

    bool increments_bounded() const { return edge_violations.empty(); }
    bool balanced() const { return balance_violations.empty(); }
    bool cubic_balanced() const { return cubic_violations.empty(); }
    bool ok() const { return increments_bounded() && balanced() && cubic_balanced(); }
};
AdaptedVerdict check_adapted(const GraphPatch& g, const AdaptedFunction& phi);

// Univoque: every closed path has index zero, equivalently an integer
// position function exists (checked exactly by BFS labelling).  Uniform:
// |N^-(x) n N^-(y)| = |N^+(x) n N^+(y)| over interior pairs including x = y.
// Random closed walks up to max_path_len re-verify the index property.
struct AdmissibleVerdict {
    bool univoque = false;
    bool uniform = false;
    std::optional<std::vector<int>> position;
    std::vector<int> bad_cycle;
    std::vector<std::pair<int, int>> uniformity_violations;
    long closed_walks_checked = 0;

    bool ok() const { return univoque && uniform; }
};
AdmissibleVerdict check_admissible(const GraphPatch& g, const Orientation& o,
                                   int max_path_len = 12, std::uint64_t seed = 1234);

// Positive vector v with A v = spr(A) v on interior vertices.  ConstantOne
// covers regular graphs; the comb closed form decays along teeth with rate
// theta_d, cosh(theta_d) = sqrt(d^2+1), and carries the squared norm of the
// half-line resolvent column, sqrt(d^2+1)/(4 d^3).
struct PFWeight {
    enum class Kind { ConstantOne, CombClosedForm } kind = Kind::ConstantOne;
    int d = 0;
    double theta_d = 0.0;
    double norm_sq = 1.0;
    double spr = 0.0;

    double value(const GraphPatch& g, int v) const;
};

PFWeight pf_weight(const GraphPatch& g);

cdouble pf_pairing(const GraphPatch& g, const PFWeight& v, const GraphExplicit& psi);

// max over interior vertices of |sum_y A_xy v(y) - spr v(x)|.
double pf_relation_residual(const GraphPatch& g, const PFWeight& v);

// Maps a model-level form factor onto patch amplitudes.  KDelta sites become
// K delta_site with the coordinate-sum phi; explicit entries are looked up
// coordinate-wise.
GraphExplicit realize_on_patch(const GraphPatch& g, const FormFactor& f);

}  // namespace bosejj
