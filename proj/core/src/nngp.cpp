#include "cgspatial/nngp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "cgspatial/errors.hpp"

namespace cgspatial {

namespace {

// Both search paths must evaluate distances with this exact expression
// so that the grid search reproduces the brute-force selection bitwise.
inline double dist2(const Location& a, const Location& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

struct Candidate {
    double d2;
    std::size_t pos;

    bool operator<(const Candidate& o) const {
        if (d2 != o.d2) return d2 < o.d2;
        return pos < o.pos;
    }
};

// Keeps the k smallest candidates under the (d2, pos) total order.
class BestK {
public:
    explicit BestK(std::size_t k) : k_(k) { kept_.reserve(k); }

    bool full() const { return kept_.size() == k_; }
    double worst_d2() const { return kept_.back().d2; }

    void offer(Candidate c) {
        if (full() && !(c < kept_.back())) return;
        auto it = std::upper_bound(kept_.begin(), kept_.end(), c);
        kept_.insert(it, c);
        if (kept_.size() > k_) kept_.pop_back();
    }

    const std::vector<Candidate>& kept() const { return kept_; }

private:
    std::size_t k_;
    std::vector<Candidate> kept_;
};

void select_brute_force(const std::vector<Location>& pts, std::size_t i,
                        std::size_t k, BestK& best) {
    for (std::size_t j = 0; j < i; ++j) {
        best.offer({dist2(pts[i], pts[j]), j});
    }
    (void)k;
}

// Uniform bucket grid over the bounding box, populated incrementally as
// the order sweep advances so only earlier positions are candidates.
class BucketGrid {
public:
    BucketGrid(const std::vector<Location>& pts, std::size_t n) {
        double min_x = std::numeric_limits<double>::infinity();
        double max_x = -min_x;
        double min_y = min_x;
        double max_y = -min_x;
        for (std::size_t i = 0; i < n; ++i) {
            min_x = std::min(min_x, pts[i].x);
            max_x = std::max(max_x, pts[i].x);
            min_y = std::min(min_y, pts[i].y);
            max_y = std::max(max_y, pts[i].y);
        }
        const auto side =
            static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
        gx_ = (max_x > min_x) ? std::max<std::size_t>(side, 1) : 1;
        gy_ = (max_y > min_y) ? std::max<std::size_t>(side, 1) : 1;
        min_x_ = min_x;
        min_y_ = min_y;
        wx_ = (gx_ > 1) ? (max_x - min_x) / static_cast<double>(gx_) : 1.0;
        wy_ = (gy_ > 1) ? (max_y - min_y) / static_cast<double>(gy_) : 1.0;
        cells_.resize(gx_ * gy_);

        double h = std::numeric_limits<double>::infinity();
        if (gx_ > 1) h = std::min(h, wx_);
        if (gy_ > 1) h = std::min(h, wy_);
        h_min_ = h;
    }

    void insert(const Location& p, std::size_t pos) {
        cells_[cell_of(p)].push_back(pos);
    }

    void query(const std::vector<Location>& pts, std::size_t i, std::size_t k,
               BestK& best) const {
        const Location q = pts[i];
        const std::size_t cx = cell_x(q);
        const std::size_t cy = cell_y(q);
        const std::size_t max_ring = std::max(
            std::max(cx, gx_ - 1 - cx), std::max(cy, gy_ - 1 - cy));

        for (std::size_t r = 0; r <= max_ring; ++r) {
            // Points not yet visited sit in rings >= r, hence at distance
            // >= (r - 1) * h_min. Strict inequality keeps exact ties in
            // play, matching the brute-force tie-break.
            if (best.full() && r >= 1 && h_min_ < std::numeric_limits<double>::infinity()) {
                const double bound = static_cast<double>(r - 1) * h_min_;
                if (best.worst_d2() < bound * bound) break;
            }
            visit_ring(pts, q, cx, cy, r, best);
        }
        (void)k;
        (void)i;
    }

private:
    std::size_t cell_x(const Location& p) const {
        if (gx_ == 1) return 0;
        const double f = (p.x - min_x_) / wx_;
        auto c = static_cast<long long>(f);
        if (c < 0) c = 0;
        if (c >= static_cast<long long>(gx_)) c = static_cast<long long>(gx_) - 1;
        return static_cast<std::size_t>(c);
    }
    std::size_t cell_y(const Location& p) const {
        if (gy_ == 1) return 0;
        const double f = (p.y - min_y_) / wy_;
        auto c = static_cast<long long>(f);
        if (c < 0) c = 0;
        if (c >= static_cast<long long>(gy_)) c = static_cast<long long>(gy_) - 1;
        return static_cast<std::size_t>(c);
    }
    std::size_t cell_of(const Location& p) const {
        return cell_y(p) * gx_ + cell_x(p);
    }

    void visit_cell(const std::vector<Location>& pts, const Location& q,
                    std::size_t cx, std::size_t cy, BestK& best) const {
        for (std::size_t pos : cells_[cy * gx_ + cx]) {
            best.offer({dist2(q, pts[pos]), pos});
        }
    }

    void visit_ring(const std::vector<Location>& pts, const Location& q,
                    std::size_t cx, std::size_t cy, std::size_t r,
                    BestK& best) const {
        if (r == 0) {
            visit_cell(pts, q, cx, cy, best);
            return;
        }
        const long long x0 = static_cast<long long>(cx) - static_cast<long long>(r);
        const long long x1 = static_cast<long long>(cx) + static_cast<long long>(r);
        const long long y0 = static_cast<long long>(cy) - static_cast<long long>(r);
        const long long y1 = static_cast<long long>(cy) + static_cast<long long>(r);
        for (long long x = x0; x <= x1; ++x) {
            if (x < 0 || x >= static_cast<long long>(gx_)) continue;
            for (long long y = y0; y <= y1; ++y) {
                if (y < 0 || y >= static_cast<long long>(gy_)) continue;
                const bool on_ring = (x == x0 || x == x1 || y == y0 || y == y1);
                if (!on_ring) continue;
                visit_cell(pts, q, static_cast<std::size_t>(x),
                           static_cast<std::size_t>(y), best);
            }
        }
    }

    std::size_t gx_ = 1;
    std::size_t gy_ = 1;
    double min_x_ = 0.0;
    double min_y_ = 0.0;
    double wx_ = 1.0;
    double wy_ = 1.0;
    double h_min_ = std::numeric_limits<double>::infinity();
    std::vector<std::vector<std::size_t>> cells_;
};

}  // namespace

std::vector<std::size_t> build_order(const std::vector<Location>& locations) {
    std::vector<std::size_t> order(locations.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (locations[a].x != locations[b].x) {
            return locations[a].x < locations[b].x;
        }
        if (locations[a].y != locations[b].y) {
            return locations[a].y < locations[b].y;
        }
        return a < b;
    });
    return order;
}

NeighborSets build_neighbor_sets(const std::vector<Location>& locations,
                                 std::vector<std::size_t> order, std::size_t m,
                                 NeighborSearch search) {
    const std::size_t n = locations.size();
    if (n == 0) throw std::invalid_argument("build_neighbor_sets: empty input");
    if (m == 0) throw std::invalid_argument("build_neighbor_sets: m must be >= 1");
    if (order.size() != n) {
        throw std::invalid_argument("build_neighbor_sets: order length mismatch");
    }

    // Points in modeling order.
    std::vector<Location> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = locations[order[i]];

    NeighborSets out;
    out.order = std::move(order);
    out.m = m;
    out.offsets.assign(n + 1, 0);
    out.indices.reserve(std::min(n, m) * n);

    BucketGrid grid(pts, n);
    if (search == NeighborSearch::Grid) grid.insert(pts[0], 0);

    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t k = std::min(i, m);
        BestK best(k);
        if (search == NeighborSearch::Grid) {
            grid.query(pts, i, k, best);
            grid.insert(pts[i], i);
        } else {
            select_brute_force(pts, i, k, best);
        }

        bool coincident = false;
        std::vector<std::size_t> sel;
        sel.reserve(k);
        for (const Candidate& c : best.kept()) {
            if (c.d2 == 0.0) coincident = true;
            sel.push_back(c.pos);
        }
        std::sort(sel.begin(), sel.end());
        out.indices.insert(out.indices.end(), sel.begin(), sel.end());
        out.offsets[i + 1] = out.indices.size();
        if (coincident) out.coincident_positions.push_back(i);
    }
    return out;
}

namespace {

// In-place dense Cholesky of a k x k SPD block; returns false on a
// non-positive pivot. Lower triangle of `a` receives L.
bool small_cholesky(DenseMatrix& a) {
    const std::size_t k = a.n_rows;
    for (std::size_t j = 0; j < k; ++j) {
        double d = a.at(j, j);
        for (std::size_t p = 0; p < j; ++p) d -= a.at(j, p) * a.at(j, p);
        if (!(d > 0.0)) return false;
        const double ljj = std::sqrt(d);
        a.at(j, j) = ljj;
        for (std::size_t i = j + 1; i < k; ++i) {
            double s = a.at(i, j);
            for (std::size_t p = 0; p < j; ++p) s -= a.at(i, p) * a.at(j, p);
            a.at(i, j) = s / ljj;
        }
    }
    return true;
}

void small_forward(const DenseMatrix& l, DenseVector& x) {
    for (std::size_t i = 0; i < l.n_rows; ++i) {
        double s = x[i];
        for (std::size_t j = 0; j < i; ++j) s -= l.at(i, j) * x[j];
        x[i] = s / l.at(i, i);
    }
}

void small_backward_t(const DenseMatrix& l, DenseVector& x) {
    for (std::size_t ii = l.n_rows; ii-- > 0;) {
        double s = x[ii];
        for (std::size_t j = ii + 1; j < l.n_rows; ++j) s -= l.at(j, ii) * x[j];
        x[ii] = s / l.at(ii, ii);
    }
}

}  // namespace

NngpFactors build_nngp_factors(const CovarianceKernel& kernel,
                               const std::vector<Location>& locations,
                               const NeighborSets& nbrs) {
    validate(kernel);
    const std::size_t n = nbrs.size();
    std::vector<Location> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = locations[nbrs.order[i]];

    TripletList triplets;
    triplets.reserve(nbrs.indices.size());
    DenseVector d_diag(n, 0.0);
    d_diag[0] = kernel.sigma2;

    for (std::size_t i = 1; i < n; ++i) {
        const auto nb = nbrs.neighbors(i);
        const std::size_t k = nb.size();

        DenseMatrix block(k, k);
        DenseVector c(k);
        for (std::size_t r = 0; r < k; ++r) {
            c[r] = cov(kernel, pts[nb[r]], pts[i]);
            for (std::size_t s = 0; s < k; ++s) {
                block.at(r, s) = cov(kernel, pts[nb[r]], pts[nb[s]]);
            }
        }
        if (!small_cholesky(block)) {
            throw not_spd_error(
                "build_nngp_factors: singular neighbor covariance block at "
                "order position " +
                    std::to_string(i),
                i);
        }
        DenseVector z = c;
        small_forward(block, z);
        const double d = kernel.sigma2 - dot(z, z);
        if (!(d > 0.0)) {
            throw not_spd_error(
                "build_nngp_factors: non-positive conditional variance at "
                "order position " +
                    std::to_string(i),
                i);
        }
        d_diag[i] = d;

        DenseVector a = z;
        small_backward_t(block, a);
        for (std::size_t r = 0; r < k; ++r) {
            triplets.push_back({i, nb[r], a[r]});
        }
    }

    NngpFactors f;
    f.a_matrix = from_triplets(triplets, n, n);
    f.d_diag = std::move(d_diag);
    return f;
}

DenseVector precision_matvec(const NngpFactors& f, const DenseVector& v) {
    const std::size_t n = f.size();
    if (v.size() != n) {
        throw std::invalid_argument("precision_matvec: length mismatch");
    }
    // u = (I - A) v
    DenseVector u = spmv(f.a_matrix, v);
    for (std::size_t i = 0; i < n; ++i) u[i] = v[i] - u[i];
    // t = D^{-1} u
    for (std::size_t i = 0; i < n; ++i) u[i] /= f.d_diag[i];
    // out = (I - A)^T t = t - A^T t
    DenseVector at = spmv_transpose(f.a_matrix, u);
    for (std::size_t i = 0; i < n; ++i) u[i] -= at[i];
    return u;
}

SparseMatrix assemble_precision(const NngpFactors& f) {
    const std::size_t n = f.size();
    TripletList triplets;
    triplets.reserve((f.a_matrix.nnz() + n) * 4);

    // Row i of (I - A) has pattern {neighbors(i), i} with values
    // {-a_ij, 1}; the precision is the sum of d_i^{-1}-weighted outer
    // products of those rows.
    std::vector<std::size_t> cols;
    std::vector<double> vals;
    for (std::size_t i = 0; i < n; ++i) {
        cols.clear();
        vals.clear();
        for (std::size_t p = f.a_matrix.row_ptr[i]; p < f.a_matrix.row_ptr[i + 1];
             ++p) {
            cols.push_back(f.a_matrix.col_idx[p]);
            vals.push_back(-f.a_matrix.values[p]);
        }
        cols.push_back(i);
        vals.push_back(1.0);
        const double w = 1.0 / f.d_diag[i];
        for (std::size_t r = 0; r < cols.size(); ++r) {
            for (std::size_t s = 0; s < cols.size(); ++s) {
                triplets.push_back({cols[r], cols[s], w * vals[r] * vals[s]});
            }
        }
    }
    return from_triplets(triplets, n, n);
}

DenseVector simulate_latent(const NngpFactors& f, RngState& rng) {
    const std::size_t n = f.size();
    DenseVector w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = std::sqrt(f.d_diag[i]) * rng.normal();
    }
    // Solve (I - A) w = D^{1/2} z by forward substitution; A is strictly
    // lower so w_i depends only on earlier entries.
    for (std::size_t i = 0; i < n; ++i) {
        double acc = w[i];
        for (std::size_t p = f.a_matrix.row_ptr[i]; p < f.a_matrix.row_ptr[i + 1];
             ++p) {
            acc += f.a_matrix.values[p] * w[f.a_matrix.col_idx[p]];
        }
        w[i] = acc;
    }
    return w;
}

}  // namespace cgspatial
