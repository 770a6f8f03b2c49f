#include "nnfe/knn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "nnfe/special.hpp"

namespace nnfe {

Sample::Sample(std::vector<double> data, std::size_t m, std::size_t d)
    : data_(std::move(data)), m_(m), d_(d) {
    if (m_ < 1 || d_ < 1) {
        throw std::invalid_argument("Sample: need m >= 1 and d >= 1, got m=" +
                                    std::to_string(m_) + " d=" + std::to_string(d_));
    }
    if (data_.size() != m_ * d_) {
        throw std::invalid_argument("Sample: data has " + std::to_string(data_.size()) +
                                    " values, expected " + std::to_string(m_ * d_));
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        if (!std::isfinite(data_[i])) {
            throw std::invalid_argument("Sample: non-finite coordinate at row " +
                                        std::to_string(i / d_) + " column " +
                                        std::to_string(i % d_));
        }
    }
    // Duplicate rows via a lexicographic sort of row indices.
    std::vector<std::uint32_t> order(m_);
    std::iota(order.begin(), order.end(), 0u);
    const double* p = data_.data();
    const std::size_t w = d_;
    std::sort(order.begin(), order.end(), [p, w](std::uint32_t a, std::uint32_t b) {
        return std::lexicographical_compare(p + a * w, p + (a + 1) * w,
                                            p + b * w, p + (b + 1) * w);
    });
    for (std::size_t i = 1; i < m_; ++i) {
        const double* a = p + order[i - 1] * w;
        const double* b = p + order[i] * w;
        if (std::equal(a, a + w, b)) {
            throw std::invalid_argument(
                "Sample: rows " + std::to_string(order[i - 1]) + " and " +
                std::to_string(order[i]) +
                " are coincident points; k-NN density estimates are undefined "
                "for duplicated data");
        }
    }
}

namespace {

constexpr int kKdTreeMaxDim = 16;
constexpr std::size_t kLeafSize = 24;
constexpr std::uint32_t kNoChild = std::numeric_limits<std::uint32_t>::max();
constexpr std::uint32_t kNoExclude = std::numeric_limits<std::uint32_t>::max();

double squared_distance(const double* a, const double* b, std::size_t d) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double diff = a[j] - b[j];
        s += diff * diff;
    }
    return s;
}

// Fixed-capacity max-heap over squared distances: keeps the k smallest
// candidates seen, with the current worst at the root.
class BoundedHeap {
public:
    explicit BoundedHeap(int k) { heap_.reserve(static_cast<std::size_t>(k)); }

    std::size_t size() const { return heap_.size(); }
    double worst() const { return heap_.front(); }

    void offer(double d2, std::size_t capacity) {
        if (heap_.size() < capacity) {
            heap_.push_back(d2);
            std::push_heap(heap_.begin(), heap_.end());
        } else if (d2 < heap_.front()) {
            std::pop_heap(heap_.begin(), heap_.end());
            heap_.back() = d2;
            std::push_heap(heap_.begin(), heap_.end());
        }
    }

    // Writes sorted ascending distances (not squared) into out[0..k).
    void extract_sorted(double* out, int k) {
        std::sort_heap(heap_.begin(), heap_.end());
        for (int j = 0; j < k; ++j) out[j] = std::sqrt(heap_[static_cast<std::size_t>(j)]);
        heap_.clear();
    }

private:
    std::vector<double> heap_;
};

// Median-split kd-tree over a reordered copy of the points. Nodes refer to
// contiguous ranges of the reordered buffer; leaves are scanned linearly.
class KdTree {
public:
    explicit KdTree(const Sample& s) : d_(s.dim()), n_(s.size()) {
        ids_.resize(n_);
        std::iota(ids_.begin(), ids_.end(), 0u);
        points_ = s.data();  // copied, then permuted in place during build
        src_ = points_.data();
        nodes_.reserve(2 * n_ / kLeafSize + 2);
        root_ = build(0, n_, 0);
    }

    // k smallest distances from q to stored points, skipping the point whose
    // original row index equals `exclude`.
    void query(const double* q, int k, std::uint32_t exclude, double* out) const {
        BoundedHeap heap(k);
        const std::size_t capacity =
            static_cast<std::size_t>(k) + (exclude == kNoExclude ? 0u : 1u);
        // Over-provisioning by one slot when excluding lets the search treat
        // every stored point uniformly; the excluded entry (distance 0 to
        // itself) is dropped below.
        search(root_, q, exclude, capacity, heap);
        if (exclude != kNoExclude) {
            // The self point always enters the heap with distance 0 unless
            // capacity+pruning removed it; rebuild without the smallest if a
            // zero is present. Simpler and exact: gather, erase one zero.
            std::vector<double> got(heap.size());
            heap.extract_sorted(got.data(), static_cast<int>(got.size()));
            int w = 0;
            bool dropped = false;
            for (double v : got) {
                if (!dropped && v == 0.0) {
                    dropped = true;
                    continue;
                }
                if (w < k) out[w++] = v;
            }
            if (w < k) {
                throw std::runtime_error("knn_within: fewer neighbours than requested");
            }
            return;
        }
        heap.extract_sorted(out, k);
    }

private:
    struct Node {
        double split = 0.0;
        int axis = -1;  // -1 marks a leaf
        std::uint32_t left = kNoChild, right = kNoChild;
        std::uint32_t begin = 0, end = 0;
    };

    std::uint32_t build(std::size_t begin, std::size_t end, int depth) {
        Node node;
        node.begin = static_cast<std::uint32_t>(begin);
        node.end = static_cast<std::uint32_t>(end);
        if (end - begin <= kLeafSize) {
            nodes_.push_back(node);
            return static_cast<std::uint32_t>(nodes_.size() - 1);
        }
        const int axis = depth % static_cast<int>(d_);
        const std::size_t mid = begin + (end - begin) / 2;
        // Partition rows [begin,end) of the buffer around the median on
        // `axis`, moving whole rows together with their original ids.
        nth_element_rows(begin, mid, end, axis);
        node.axis = axis;
        node.split = src_[mid * d_ + static_cast<std::size_t>(axis)];
        const std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
        nodes_.push_back(node);
        const std::uint32_t left = build(begin, mid, depth + 1);
        const std::uint32_t right = build(mid, end, depth + 1);
        nodes_[self].left = left;
        nodes_[self].right = right;
        return self;
    }

    void nth_element_rows(std::size_t begin, std::size_t mid, std::size_t end, int axis) {
        std::vector<std::uint32_t> perm(end - begin);
        std::iota(perm.begin(), perm.end(), 0u);
        const double* p = src_;
        const std::size_t d = d_;
        const std::size_t ax = static_cast<std::size_t>(axis);
        std::nth_element(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(mid - begin),
                         perm.end(), [p, d, ax, begin](std::uint32_t a, std::uint32_t b) {
                             return p[(begin + a) * d + ax] < p[(begin + b) * d + ax];
                         });
        apply_row_permutation(begin, perm);
    }

    void apply_row_permutation(std::size_t begin, const std::vector<std::uint32_t>& perm) {
        std::vector<double> row_buf(perm.size() * d_);
        std::vector<std::uint32_t> id_buf(perm.size());
        for (std::size_t i = 0; i < perm.size(); ++i) {
            const std::size_t from = begin + perm[i];
            std::copy_n(src_ + from * d_, d_, row_buf.begin() + static_cast<std::ptrdiff_t>(i * d_));
            id_buf[i] = ids_[from];
        }
        std::copy(row_buf.begin(), row_buf.end(),
                  points_.begin() + static_cast<std::ptrdiff_t>(begin * d_));
        std::copy(id_buf.begin(), id_buf.end(),
                  ids_.begin() + static_cast<std::ptrdiff_t>(begin));
    }

    void search(std::uint32_t node_id, const double* q, std::uint32_t exclude,
                std::size_t capacity, BoundedHeap& heap) const {
        const Node& node = nodes_[node_id];
        if (node.axis < 0) {
            for (std::uint32_t i = node.begin; i < node.end; ++i) {
                if (ids_[i] == exclude) {
                    heap.offer(0.0, capacity);
                    continue;
                }
                heap.offer(squared_distance(q, src_ + i * d_, d_), capacity);
            }
            return;
        }
        const double diff = q[static_cast<std::size_t>(node.axis)] - node.split;
        const std::uint32_t near = diff < 0.0 ? node.left : node.right;
        const std::uint32_t far = diff < 0.0 ? node.right : node.left;
        search(near, q, exclude, capacity, heap);
        if (heap.size() < capacity || diff * diff < heap.worst()) {
            search(far, q, exclude, capacity, heap);
        }
    }

    std::size_t d_, n_;
    std::vector<double> points_;
    const double* src_ = nullptr;
    std::vector<std::uint32_t> ids_;
    std::vector<Node> nodes_;
    std::uint32_t root_ = 0;
};

void check_within_args(const Sample& sample, int k) {
    if (sample.size() < 2) {
        throw std::invalid_argument("knn_within: need at least two points");
    }
    if (k < 1 || static_cast<std::size_t>(k) > sample.size() - 1) {
        throw std::invalid_argument("knn_within: k=" + std::to_string(k) +
                                    " outside [1, m-1] with m=" +
                                    std::to_string(sample.size()));
    }
}

void check_cross_args(const Sample& queries, const Sample& reference, int k) {
    if (queries.dim() != reference.dim()) {
        throw std::invalid_argument("knn_cross: dimension mismatch, queries d=" +
                                    std::to_string(queries.dim()) + " reference d=" +
                                    std::to_string(reference.dim()));
    }
    if (k < 1 || static_cast<std::size_t>(k) > reference.size()) {
        throw std::invalid_argument("knn_cross: k=" + std::to_string(k) +
                                    " outside [1, n] with n=" +
                                    std::to_string(reference.size()));
    }
}

void check_within_positive(const KnnDistances& out) {
    // With duplicates rejected at ingestion this cannot fire; it guards
    // Samples assembled by hand around the validating constructor.
    for (double v : out.dists) {
        if (v == 0.0) {
            throw std::runtime_error(
                "knn_within: zero neighbour distance, coincident points in sample");
        }
    }
}

}  // namespace

KnnDistances knn_within(const Sample& sample, int k) {
    check_within_args(sample, k);
    if (sample.dim() > kKdTreeMaxDim) return knn_within_brute(sample, k);
    KnnDistances out;
    out.rows = sample.size();
    out.k = k;
    out.mode = KnnMode::Within;
    out.dists.resize(out.rows * static_cast<std::size_t>(k));
    KdTree tree(sample);
    for (std::size_t i = 0; i < sample.size(); ++i) {
        tree.query(sample.row(i).data(), k, static_cast<std::uint32_t>(i),
                   out.dists.data() + i * static_cast<std::size_t>(k));
    }
    check_within_positive(out);
    return out;
}

KnnDistances knn_cross(const Sample& queries, const Sample& reference, int k) {
    check_cross_args(queries, reference, k);
    if (queries.dim() > kKdTreeMaxDim) return knn_cross_brute(queries, reference, k);
    KnnDistances out;
    out.rows = queries.size();
    out.k = k;
    out.mode = KnnMode::Cross;
    out.dists.resize(out.rows * static_cast<std::size_t>(k));
    KdTree tree(reference);
    for (std::size_t i = 0; i < queries.size(); ++i) {
        tree.query(queries.row(i).data(), k, kNoExclude,
                   out.dists.data() + i * static_cast<std::size_t>(k));
    }
    return out;
}

KnnDistances knn_within_brute(const Sample& sample, int k) {
    check_within_args(sample, k);
    KnnDistances out;
    out.rows = sample.size();
    out.k = k;
    out.mode = KnnMode::Within;
    out.dists.resize(out.rows * static_cast<std::size_t>(k));
    const std::size_t m = sample.size(), d = sample.dim();
    std::vector<double> d2(m - 1);
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t w = 0;
        for (std::size_t l = 0; l < m; ++l) {
            if (l == i) continue;
            d2[w++] = squared_distance(sample.row(i).data(), sample.row(l).data(), d);
        }
        std::partial_sort(d2.begin(), d2.begin() + k, d2.end());
        for (int j = 0; j < k; ++j) {
            out.dists[i * static_cast<std::size_t>(k) + static_cast<std::size_t>(j)] =
                std::sqrt(d2[static_cast<std::size_t>(j)]);
        }
    }
    check_within_positive(out);
    return out;
}

KnnDistances knn_cross_brute(const Sample& queries, const Sample& reference, int k) {
    check_cross_args(queries, reference, k);
    KnnDistances out;
    out.rows = queries.size();
    out.k = k;
    out.mode = KnnMode::Cross;
    out.dists.resize(out.rows * static_cast<std::size_t>(k));
    const std::size_t n = reference.size(), d = queries.dim();
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < queries.size(); ++i) {
        for (std::size_t l = 0; l < n; ++l) {
            d2[l] = squared_distance(queries.row(i).data(), reference.row(l).data(), d);
        }
        std::partial_sort(d2.begin(), d2.begin() + k, d2.end());
        for (int j = 0; j < k; ++j) {
            out.dists[i * static_cast<std::size_t>(k) + static_cast<std::size_t>(j)] =
                std::sqrt(d2[static_cast<std::size_t>(j)]);
        }
    }
    return out;
}

std::vector<double> density_estimate(const KnnDistances& dists,
                                     std::size_t sample_size, int d, int j) {
    if (j < 1 || j > dists.k) {
        throw std::invalid_argument("density_estimate: rank j=" + std::to_string(j) +
                                    " outside [1, k] with k=" + std::to_string(dists.k));
    }
    if (sample_size < 1) {
        throw std::invalid_argument("density_estimate: sample_size must be >= 1");
    }
    const double vd = unit_ball_volume(d);
    const double scale = static_cast<double>(j) /
                         (static_cast<double>(sample_size) * vd);
    std::vector<double> out(dists.rows);
    for (std::size_t i = 0; i < dists.rows; ++i) {
        const double rho = dists.rank_distance(i, j);
        if (rho == 0.0) {
            throw std::runtime_error(
                "density_estimate: zero distance at row " + std::to_string(i) +
                ", coincident points make the density estimate infinite");
        }
        double rho_d = rho;
        for (int t = 1; t < d; ++t) rho_d *= rho;
        out[i] = scale / rho_d;
    }
    return out;
}

}  // namespace nnfe
