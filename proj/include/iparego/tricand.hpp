#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include <iparego/error.hpp>
#include <iparego/sampling.hpp>

namespace iparego {

inline constexpr int kMaxTriangulationDim = 5;

/// Boundary face of the triangulation, in unit-box coordinates.
struct HullFacet {
    std::vector<int> vertices; // sorted, d entries
    Eigen::VectorXd normal;    // outward, unit length
};

struct Triangulation {
    int dim = 0;
    Eigen::VectorXd lower, upper;
    std::vector<Eigen::VectorXd> vertices; // input units
    std::vector<Eigen::VectorXd> scaled;   // unit box
    std::vector<std::vector<int>> simplices; // each sorted, d + 1 entries; list sorted
    std::vector<HullFacet> hull_facets;

    Eigen::VectorXd to_input(const Eigen::VectorXd& s) const { return lower + s.cwiseProduct(upper - lower); }
};

/// Candidates with the simplex (interior) or hull facet (fringe) each came from.
struct CandidateSet {
    std::vector<Eigen::VectorXd> interior;
    std::vector<Eigen::VectorXd> fringe;
    std::vector<int> interior_source;
    std::vector<int> fringe_source;
};

namespace geometry {

    struct Hyperplane {
        Eigen::VectorXd normal; // unit length
        double offset = 0.0;    // normal . x = offset on the plane
        bool valid = false;

        double signed_distance(const Eigen::VectorXd& p) const { return normal.dot(p) - offset; }
    };

    /// Hyperplane through D points in R^D; the normal is the generalized
    /// cross product of the edge vectors.
    inline Hyperplane hyperplane_through(const std::vector<const Eigen::VectorXd*>& pts)
    {
        const Eigen::Index D = pts.front()->size();
        Eigen::MatrixXd M(D - 1, D);
        for (Eigen::Index r = 0; r + 1 < D; ++r)
            M.row(r) = (*pts[static_cast<std::size_t>(r + 1)] - *pts[0]).transpose();
        Hyperplane h;
        h.normal.resize(D);
        Eigen::MatrixXd minor(D - 1, D - 1);
        for (Eigen::Index k = 0; k < D; ++k) {
            for (Eigen::Index c = 0, cc = 0; c < D; ++c) {
                if (c == k)
                    continue;
                minor.col(cc++) = M.col(c);
            }
            const double det = D == 1 ? 1.0 : minor.determinant();
            h.normal[k] = (k % 2 == 0) ? det : -det;
        }
        const double len = h.normal.norm();
        if (!(len > 1e-300))
            return h;
        h.normal /= len;
        h.offset = h.normal.dot(*pts[0]);
        h.valid = true;
        return h;
    }

    inline double simplex_volume(const std::vector<Eigen::VectorXd>& pts, const std::vector<int>& simplex)
    {
        const Eigen::Index d = pts[static_cast<std::size_t>(simplex[0])].size();
        Eigen::MatrixXd M(d, d);
        for (Eigen::Index r = 0; r < d; ++r)
            M.col(r) = pts[static_cast<std::size_t>(simplex[static_cast<std::size_t>(r + 1)])]
                - pts[static_cast<std::size_t>(simplex[0])];
        double fact = 1.0;
        for (Eigen::Index k = 2; k <= d; ++k)
            fact *= static_cast<double>(k);
        return std::abs(M.determinant()) / fact;
    }

    /// Barycentric coordinates of p w.r.t. a d-simplex.
    inline Eigen::VectorXd barycentric(const std::vector<Eigen::VectorXd>& pts, const std::vector<int>& simplex,
        const Eigen::VectorXd& p)
    {
        const Eigen::Index d = p.size();
        Eigen::MatrixXd M(d, d);
        const Eigen::VectorXd& v0 = pts[static_cast<std::size_t>(simplex[0])];
        for (Eigen::Index r = 0; r < d; ++r)
            M.col(r) = pts[static_cast<std::size_t>(simplex[static_cast<std::size_t>(r + 1)])] - v0;
        const Eigen::VectorXd t = M.partialPivLu().solve(p - v0);
        Eigen::VectorXd b(d + 1);
        b[0] = 1.0 - t.sum();
        b.tail(d) = t;
        return b;
    }

    /// Incremental (beneath-beyond) convex hull in R^D. Facets are kept as
    /// sorted vertex index sets with hyperplanes oriented away from an
    /// interior reference point.
    class IncrementalHull {
    public:
        struct Facet {
            std::vector<int> vertices;
            Hyperplane plane;
        };

        explicit IncrementalHull(const std::vector<Eigen::VectorXd>& points) : _pts(points) {}

        /// Returns false when the points do not span R^D.
        bool build(double visibility_eps, double span_tol)
        {
            const int n = static_cast<int>(_pts.size());
            if (n == 0)
                return false;
            const Eigen::Index D = _pts.front().size();
            std::vector<int> seed = initial_simplex(span_tol);
            if (static_cast<Eigen::Index>(seed.size()) != D + 1)
                return false;

            _interior = Eigen::VectorXd::Zero(D);
            for (int i : seed)
                _interior += _pts[static_cast<std::size_t>(i)];
            _interior /= static_cast<double>(D + 1);

            for (std::size_t skip = 0; skip < seed.size(); ++skip) {
                std::vector<int> verts;
                for (std::size_t j = 0; j < seed.size(); ++j)
                    if (j != skip)
                        verts.push_back(seed[j]);
                add_facet(std::move(verts));
            }

            std::set<int> in_seed(seed.begin(), seed.end());
            for (int p = 0; p < n; ++p) {
                if (in_seed.count(p))
                    continue;
                insert(p, visibility_eps);
            }
            return true;
        }

        const std::vector<Facet>& facets() const { return _facets; }

    private:
        std::vector<int> initial_simplex(double span_tol) const
        {
            const int n = static_cast<int>(_pts.size());
            const Eigen::Index D = _pts.front().size();
            std::vector<int> chosen{0};
            std::vector<Eigen::VectorXd> basis;
            while (static_cast<Eigen::Index>(chosen.size()) < D + 1) {
                int best = -1;
                // the last direction may come only from the tie-breaking lift
                double best_norm = static_cast<Eigen::Index>(chosen.size()) == D ? span_tol * 1e-4 : span_tol;
                for (int i = 0; i < n; ++i) {
                    Eigen::VectorXd r = _pts[static_cast<std::size_t>(i)] - _pts[0];
                    for (const auto& b : basis)
                        r -= r.dot(b) * b;
                    const double nr = r.norm();
                    if (nr > best_norm) {
                        best_norm = nr;
                        best = i;
                    }
                }
                if (best < 0)
                    break;
                Eigen::VectorXd r = _pts[static_cast<std::size_t>(best)] - _pts[0];
                for (const auto& b : basis)
                    r -= r.dot(b) * b;
                basis.push_back(r / r.norm());
                chosen.push_back(best);
            }
            return chosen;
        }

        void add_facet(std::vector<int> verts)
        {
            std::sort(verts.begin(), verts.end());
            std::vector<const Eigen::VectorXd*> ptrs;
            for (int v : verts)
                ptrs.push_back(&_pts[static_cast<std::size_t>(v)]);
            Hyperplane h = hyperplane_through(ptrs);
            if (h.valid && h.signed_distance(_interior) > 0.0) {
                h.normal = -h.normal;
                h.offset = -h.offset;
            }
            _facets.push_back({std::move(verts), std::move(h)});
        }

        void insert(int p, double eps)
        {
            const Eigen::VectorXd& x = _pts[static_cast<std::size_t>(p)];
            std::vector<char> visible(_facets.size(), 0);
            bool any = false;
            for (std::size_t f = 0; f < _facets.size(); ++f) {
                if (_facets[f].plane.valid && _facets[f].plane.signed_distance(x) > eps) {
                    visible[f] = 1;
                    any = true;
                }
            }
            if (!any)
                return; // inside or on the current hull

            // Ridges seen once among visible facets form the horizon.
            std::map<std::vector<int>, int> ridge_count;
            for (std::size_t f = 0; f < _facets.size(); ++f) {
                if (!visible[f])
                    continue;
                const auto& v = _facets[f].vertices;
                for (std::size_t skip = 0; skip < v.size(); ++skip) {
                    std::vector<int> ridge;
                    ridge.reserve(v.size() - 1);
                    for (std::size_t j = 0; j < v.size(); ++j)
                        if (j != skip)
                            ridge.push_back(v[j]);
                    ++ridge_count[ridge];
                }
            }

            std::vector<Facet> kept;
            kept.reserve(_facets.size());
            for (std::size_t f = 0; f < _facets.size(); ++f)
                if (!visible[f])
                    kept.push_back(std::move(_facets[f]));
            _facets = std::move(kept);

            for (auto& [ridge, count] : ridge_count) {
                if (count != 1)
                    continue;
                std::vector<int> verts = ridge;
                verts.push_back(p);
                add_facet(std::move(verts));
            }
        }

        const std::vector<Eigen::VectorXd>& _pts;
        std::vector<Facet> _facets;
        Eigen::VectorXd _interior;
    };

    // Deterministic per-index value in [1, 2).
    inline double index_key(int i)
    {
        return 1.0 + static_cast<double>(SeededRng::splitmix(static_cast<std::uint64_t>(i)) >> 11) * 0x1.0p-53;
    }

} // namespace geometry

/// Delaunay triangulation of points in the box [lower, upper], computed in
/// unit-box coordinates as the lower convex hull of the points lifted onto a
/// paraboloid. Cospherical ties are broken by an index-keyed height offset.
inline Triangulation delaunay(const std::vector<Eigen::VectorXd>& points, const Eigen::VectorXd& lower,
    const Eigen::VectorXd& upper)
{
    const int d = static_cast<int>(lower.size());
    if (d > kMaxTriangulationDim)
        throw Error(Errc::DimensionTooHigh, "triangulation supports at most 5 input dimensions");
    if (static_cast<int>(points.size()) < d + 1)
        throw Error(Errc::TooFewPoints, "need at least d + 1 points");

    Triangulation tri;
    tri.dim = d;
    tri.lower = lower;
    tri.upper = upper;
    tri.vertices = points;
    const Eigen::VectorXd width = upper - lower;
    for (const auto& p : points) {
        if (p.size() != d)
            throw Error(Errc::DimensionMismatch, "point dimension differs from bounds");
        tri.scaled.push_back((p - lower).cwiseQuotient(width));
    }

    // Exact duplicates stay out of the hull; they would only add zero-volume cells.
    std::vector<int> ids;
    std::vector<Eigen::VectorXd> lifted;
    {
        std::set<std::vector<double>> seen;
        for (int i = 0; i < static_cast<int>(points.size()); ++i) {
            const auto& s = tri.scaled[static_cast<std::size_t>(i)];
            if (!seen.insert(std::vector<double>(s.data(), s.data() + s.size())).second)
                continue;
            Eigen::VectorXd l(d + 1);
            const Eigen::VectorXd c = s.array() - 0.5;
            l.head(d) = c;
            l[d] = c.squaredNorm() + 1e-11 * geometry::index_key(i);
            lifted.push_back(std::move(l));
            ids.push_back(i);
        }
    }

    geometry::IncrementalHull hull(lifted);
    if (static_cast<int>(lifted.size()) < d + 2 || !hull.build(1e-13, 1e-9)) {
        // d + 1 lifted points cannot span R^{d+1}; handle the single-simplex case directly.
        if (static_cast<int>(lifted.size()) == d + 1) {
            std::vector<int> s(ids.begin(), ids.end());
            if (geometry::simplex_volume(tri.scaled, s) <= 1e-12)
                throw Error(Errc::DegenerateConfiguration, "points are affinely dependent");
            tri.simplices.push_back(std::move(s));
        } else {
            throw Error(Errc::DegenerateConfiguration, "points are affinely dependent");
        }
    } else {
        for (const auto& f : hull.facets()) {
            if (!f.plane.valid || f.plane.normal[d] >= -1e-12)
                continue; // upper or vertical facet
            std::vector<int> s;
            for (int v : f.vertices)
                s.push_back(ids[static_cast<std::size_t>(v)]);
            std::sort(s.begin(), s.end());
            if (geometry::simplex_volume(tri.scaled, s) <= 1e-12)
                continue;
            tri.simplices.push_back(std::move(s));
        }
    }
    if (tri.simplices.empty())
        throw Error(Errc::DegenerateConfiguration, "points are affinely dependent");
    std::sort(tri.simplices.begin(), tri.simplices.end());

    // Faces used by exactly one simplex bound the hull.
    std::map<std::vector<int>, std::pair<int, int>> faces; // face -> (count, opposite vertex)
    for (const auto& s : tri.simplices) {
        for (std::size_t skip = 0; skip < s.size(); ++skip) {
            std::vector<int> face;
            for (std::size_t j = 0; j < s.size(); ++j)
                if (j != skip)
                    face.push_back(s[j]);
            auto& entry = faces[face];
            ++entry.first;
            entry.second = s[skip];
        }
    }
    for (const auto& [face, info] : faces) {
        if (info.first != 1)
            continue;
        HullFacet hf;
        hf.vertices = face;
        std::vector<const Eigen::VectorXd*> ptrs;
        for (int v : face)
            ptrs.push_back(&tri.scaled[static_cast<std::size_t>(v)]);
        geometry::Hyperplane h = geometry::hyperplane_through(ptrs);
        if (h.signed_distance(tri.scaled[static_cast<std::size_t>(info.second)]) > 0.0)
            h.normal = -h.normal;
        hf.normal = h.normal;
        tri.hull_facets.push_back(std::move(hf));
    }
    return tri;
}

/// Barycenter of each simplex, in input units.
inline std::vector<Eigen::VectorXd> interior_candidates(const Triangulation& tri)
{
    std::vector<Eigen::VectorXd> out;
    out.reserve(tri.simplices.size());
    for (const auto& s : tri.simplices) {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(tri.dim);
        for (int v : s)
            c += tri.scaled[static_cast<std::size_t>(v)];
        out.push_back(tri.to_input(c / static_cast<double>(s.size())));
    }
    return out;
}

struct FringeCandidate {
    Eigen::VectorXd x;
    int facet = 0;
};

/// For each hull facet: push its centroid outward along the facet normal by
/// half the distance to the box boundary. Facets flush with the box yield nothing.
inline std::vector<FringeCandidate> fringe_candidates_indexed(const Triangulation& tri)
{
    std::vector<FringeCandidate> out;
    for (std::size_t f = 0; f < tri.hull_facets.size(); ++f) {
        const auto& hf = tri.hull_facets[f];
        Eigen::VectorXd c = Eigen::VectorXd::Zero(tri.dim);
        for (int v : hf.vertices)
            c += tri.scaled[static_cast<std::size_t>(v)];
        c /= static_cast<double>(hf.vertices.size());
        double reach = std::numeric_limits<double>::infinity();
        for (int k = 0; k < tri.dim; ++k) {
            const double nk = hf.normal[k];
            if (nk > 1e-15)
                reach = std::min(reach, (1.0 - c[k]) / nk);
            else if (nk < -1e-15)
                reach = std::min(reach, (0.0 - c[k]) / nk);
        }
        if (!(reach >= 1e-9) || !std::isfinite(reach))
            continue;
        Eigen::VectorXd s = c + hf.normal * (0.5 * reach);
        s = s.cwiseMax(0.0).cwiseMin(1.0);
        out.push_back({tri.to_input(s), static_cast<int>(f)});
    }
    return out;
}

inline std::vector<Eigen::VectorXd> fringe_candidates(const Triangulation& tri)
{
    std::vector<Eigen::VectorXd> out;
    for (auto& fc : fringe_candidates_indexed(tri))
        out.push_back(std::move(fc.x));
    return out;
}

inline CandidateSet all_candidates(const Triangulation& tri)
{
    CandidateSet cs;
    cs.interior = interior_candidates(tri);
    for (std::size_t i = 0; i < cs.interior.size(); ++i)
        cs.interior_source.push_back(static_cast<int>(i));
    for (auto& fc : fringe_candidates_indexed(tri)) {
        cs.fringe.push_back(std::move(fc.x));
        cs.fringe_source.push_back(fc.facet);
    }
    return cs;
}

/// Index of the vertex equal to x within 1e-9 (max-norm), or -1.
inline int find_vertex(const Triangulation& tri, const Eigen::VectorXd& x)
{
    for (std::size_t i = 0; i < tri.vertices.size(); ++i)
        if (tri.vertices[i].size() == x.size() && (tri.vertices[i] - x).cwiseAbs().maxCoeff() <= 1e-9)
            return static_cast<int>(i);
    return -1;
}

/// Candidates touching x_P: barycenters of its incident simplices and fringe
/// points of hull facets containing it.
inline CandidateSet neighbors_of_preferred(const Triangulation& tri, const CandidateSet& candidates,
    const Eigen::VectorXd& x_p)
{
    const int v = find_vertex(tri, x_p);
    if (v < 0)
        throw Error(Errc::VertexNotFound, "preferred input is not a triangulation vertex");
    auto incident = [v](const std::vector<int>& vs) { return std::binary_search(vs.begin(), vs.end(), v); };
    CandidateSet out;
    for (std::size_t i = 0; i < candidates.interior.size(); ++i) {
        const int s = candidates.interior_source[i];
        if (incident(tri.simplices[static_cast<std::size_t>(s)])) {
            out.interior.push_back(candidates.interior[i]);
            out.interior_source.push_back(s);
        }
    }
    for (std::size_t i = 0; i < candidates.fringe.size(); ++i) {
        const int f = candidates.fringe_source[i];
        if (incident(tri.hull_facets[static_cast<std::size_t>(f)].vertices)) {
            out.fringe.push_back(candidates.fringe[i]);
            out.fringe_source.push_back(f);
        }
    }
    return out;
}

/// Debug dump: one simplex per line, space-separated vertex indices.
inline void write_triangulation(std::ostream& os, const Triangulation& tri)
{
    for (const auto& s : tri.simplices) {
        for (std::size_t j = 0; j < s.size(); ++j)
            os << (j ? " " : "") << s[j];
        os << '\n';
    }
}

} // namespace iparego
