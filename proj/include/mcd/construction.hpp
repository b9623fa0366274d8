#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "mcd/contrast.hpp"
#include "mcd/data.hpp"

//! Contrast-dataset constructions: the five ways of turning supervised data
//! (optionally with extra marginal samples or multiple target draws) into a
//! labelled set of matched / mismatched (x, y) rows whose labels follow the
//! marginal discrimination condition with ratio r.
//!
//! Two families exist.  The independent-pairs family (build_iid,
//! build_iid_additional) produces genuinely i.i.d. samples with Bernoulli(r)
//! labels, at the cost of halving the sample.  The index-grid family
//! (build_id, build_id_additional, build_id_multitarget) enumerates all
//! candidate (row, row) pairings, then samples exact counts of matched and
//! mismatched pairs without replacement, producing identically distributed
//! (not independent) samples of size up to n² and beyond.
//!
//! All constructions are deterministic given the passed engine state, and
//! the index-grid family never materializes the full candidate grid: a
//! partial Fisher–Yates over the pair-index space keeps memory at O(output).

namespace mcd {

namespace detail {

//! Sorts row indices lexicographically and errors on the first adjacent
//! duplicate, naming the two offending rows.  The index-grid constructions
//! pair rows purely by index, so exact duplicate rows would make matched and
//! mismatched samples indistinguishable; rejection keeps label semantics
//! exact (for continuous data duplicates have probability zero anyway).
inline void require_distinct_rows(const Eigen::MatrixXd& m, const char* what,
                                  const char* op)
{
    const Eigen::Index n = m.rows();
    if (n < 2)
        return;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    auto row_less = [&m](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (m(a, c) != m(b, c))
                return m(a, c) < m(b, c);
        }
        return false;
    };
    std::sort(order.begin(), order.end(), row_less);
    for (std::size_t i = 1; i < order.size(); ++i) {
        const Eigen::Index a = order[i - 1];
        const Eigen::Index b = order[i];
        if (m.row(a) == m.row(b)) {
            std::ostringstream msg;
            msg << op << ": " << what << " rows " << std::min(a, b) << " and "
                << std::max(a, b) << " are identical; the index-grid "
                << "constructions pair rows by index and require pairwise "
                << "distinct rows";
            throw std::invalid_argument(msg.str());
        }
    }
}

//! Draws `k` distinct indices uniformly from {0, …, m−1} by a partial
//! Fisher–Yates over the virtual index array, storing only displaced
//! positions.  Memory O(k), independent of m.
inline std::vector<std::int64_t>
sample_without_replacement(std::int64_t m, std::int64_t k, std::mt19937_64& rng)
{
    std::unordered_map<std::int64_t, std::int64_t> displaced;
    displaced.reserve(static_cast<std::size_t>(2 * k));
    std::vector<std::int64_t> out;
    out.reserve(static_cast<std::size_t>(k));
    for (std::int64_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::int64_t> pick(i, m - 1);
        const std::int64_t j = pick(rng);
        auto it_j = displaced.find(j);
        const std::int64_t value_j = (it_j == displaced.end()) ? j : it_j->second;
        auto it_i = displaced.find(i);
        const std::int64_t value_i = (it_i == displaced.end()) ? i : it_i->second;
        displaced[j] = value_i;
        out.push_back(value_j);
    }
    return out;
}

//! In-place Fisher–Yates shuffle of contrast rows and their labels together.
inline void shuffle_rows(Eigen::MatrixXd& w, std::vector<std::uint8_t>& z,
                         std::mt19937_64& rng)
{
    const Eigen::Index n = w.rows();
    for (Eigen::Index i = n - 1; i > 0; --i) {
        std::uniform_int_distribution<Eigen::Index> pick(0, i);
        const Eigen::Index j = pick(rng);
        if (j != i) {
            w.row(i).swap(w.row(j));
            std::swap(z[static_cast<std::size_t>(i)], z[static_cast<std::size_t>(j)]);
        }
    }
}

//! One source pairing of the index-grid family: feature row and target row,
//! each tagged with which pool it comes from (0 = paired data, 1 = extra
//! marginal pool).  Target rows of the multi-target construction address a
//! (row, draw) cell instead, flattened by the caller.
struct PairRef
{
    Eigen::Index x_row;
    Eigen::Index y_row;
    bool x_from_extra = false;
    bool y_from_extra = false;
};

//! Assembles W from pair references, appends labels, shuffles, and wraps the
//! result.  `fetch_x` / `fetch_y` map a PairRef to the actual rows.
template <typename FetchX, typename FetchY>
ContrastDataset assemble_shuffled(const std::vector<PairRef>& matched,
                                  const std::vector<PairRef>& mismatched,
                                  Eigen::Index p, Eigen::Index k,
                                  FetchX&& fetch_x, FetchY&& fetch_y,
                                  std::mt19937_64& rng)
{
    const Eigen::Index n_joint = static_cast<Eigen::Index>(matched.size());
    const Eigen::Index n_marg = static_cast<Eigen::Index>(mismatched.size());
    const Eigen::Index total = n_joint + n_marg;
    Eigen::MatrixXd w(total, p + k);
    std::vector<std::uint8_t> z(static_cast<std::size_t>(total));
    Eigen::Index row = 0;
    for (const auto& pr : matched) {
        w.block(row, 0, 1, p) = fetch_x(pr);
        w.block(row, p, 1, k) = fetch_y(pr);
        z[static_cast<std::size_t>(row)] = 1;
        ++row;
    }
    for (const auto& pr : mismatched) {
        w.block(row, 0, 1, p) = fetch_x(pr);
        w.block(row, p, 1, k) = fetch_y(pr);
        z[static_cast<std::size_t>(row)] = 0;
        ++row;
    }
    shuffle_rows(w, z, rng);
    return ContrastDataset(std::move(w), std::move(z), n_joint, n_marg);
}

inline void check_grid_counts(std::int64_t n_joint, std::int64_t n_marg,
                              std::int64_t max_joint, std::int64_t max_marg,
                              const char* op)
{
    if (n_joint < 1 || n_joint > max_joint) {
        std::ostringstream msg;
        msg << op << ": n_joint must lie in [1, " << max_joint << "], got "
            << n_joint;
        throw std::invalid_argument(msg.str());
    }
    if (n_marg < 1 || n_marg > max_marg) {
        std::ostringstream msg;
        msg << op << ": n_marg must lie in [1, " << max_marg << "], got "
            << n_marg;
        throw std::invalid_argument(msg.str());
    }
}

} // namespace detail

//! Requested matched / mismatched sample counts for the index-grid
//! constructions.
struct JointMargCounts
{
    Eigen::Index n_joint;
    Eigen::Index n_marg;
};

//! Translates a target ratio into exact sample counts: keeps all available
//! matched pairs and requests n_marg = min(cap_marg, ⌊n_joint·(1−r)/r⌋)
//! mismatched pairs, which realizes a contrast set of size ⌊n_joint/r⌋ when
//! the cap does not bind.  The floor division is guarded against binary
//! round-off (100/0.05 must count as 2000, not 1999).
//! @param n_available_joint number of matched candidates to keep, ≥ 1.
//! @param r target ratio of matched pairs.
//! @param cap_marg number of mismatched candidates available, ≥ 1.
//! @throw std::invalid_argument if r is so large the floor reaches 0.
inline JointMargCounts ratio_to_counts(Eigen::Index n_available_joint,
                                       const Ratio& r, Eigen::Index cap_marg)
{
    if (n_available_joint < 1)
        throw std::invalid_argument("ratio_to_counts: n_available_joint must be >= 1");
    if (cap_marg < 1)
        throw std::invalid_argument("ratio_to_counts: cap_marg must be >= 1");
    const double raw = static_cast<double>(n_available_joint)
        * (1.0 - r.value()) / r.value();
    const double guard = std::max(1e-9, raw * 1e-12);
    auto wanted = static_cast<Eigen::Index>(std::floor(raw + guard));
    if (wanted < 1) {
        std::ostringstream msg;
        msg << "ratio_to_counts: ratio r = " << r.value() << " with "
            << n_available_joint << " matched samples leaves no mismatched "
            << "samples (floor(n_joint*(1-r)/r) = 0); choose a smaller r";
        throw std::invalid_argument(msg.str());
    }
    return {n_available_joint, std::min<Eigen::Index>(wanted, cap_marg)};
}

//! Independent-pairs construction.  Halves the dataset: for each of the
//! first N = ⌊n/2⌋ rows an independent Bernoulli(r) label decides whether
//! the row keeps its own target (z = 1) or receives the target of row
//! i + N (z = 0).  The output rows are genuinely i.i.d. with ratio r.
//! @param d paired training data with n ≥ 2 rows.
//! @param r Bernoulli parameter of the labels.
//! @param rng seeded engine; consumed one Bernoulli draw per output row.
inline ContrastDataset build_iid(const SupervisedDataset& d, const Ratio& r,
                                 std::mt19937_64& rng)
{
    const Eigen::Index n = d.n();
    if (n < 2)
        throw std::invalid_argument(
            "build_iid: dataset too small for the independent-pairs "
            "construction (need n >= 2, the second half donates targets)");
    const Eigen::Index half = n / 2;
    const Eigen::Index p = d.p();
    const Eigen::Index k = d.k();
    Eigen::MatrixXd w(half, p + k);
    std::vector<std::uint8_t> z(static_cast<std::size_t>(half));
    std::bernoulli_distribution label(r.value());
    Eigen::Index ones = 0;
    for (Eigen::Index i = 0; i < half; ++i) {
        const bool matched = label(rng);
        w.block(i, 0, 1, p) = d.X.row(i);
        w.block(i, p, 1, k) = matched ? d.Y.row(i) : d.Y.row(i + half);
        z[static_cast<std::size_t>(i)] = matched ? 1 : 0;
        ones += matched ? 1 : 0;
    }
    return ContrastDataset(std::move(w), std::move(z), ones, half - ones);
}

//! Index-grid construction.  Conceptually enumerates all n² pairings
//! (X_i, Y_j) labelled by 1{i = j}, then samples n_joint matched and n_marg
//! mismatched pairings uniformly without replacement and shuffles the
//! concatenation.  Mismatched pairings are enumerated row-major in (i, j)
//! with the diagonal removed.  Output rows are identically distributed with
//! exact label counts (ratio exactly n_joint/N), at the price of sample
//! dependence.
//! @param d paired training data; X rows and Y rows must be pairwise
//!   distinct so matched and mismatched pairs cannot collide.
//! @param n_joint matched pairs to draw, in [1, n].
//! @param n_marg mismatched pairs to draw, in [1, n(n−1)].
//! @param rng seeded engine.
inline ContrastDataset build_id(const SupervisedDataset& d, Eigen::Index n_joint,
                                Eigen::Index n_marg, std::mt19937_64& rng)
{
    const Eigen::Index n = d.n();
    detail::check_grid_counts(n_joint, n_marg, n,
                              static_cast<std::int64_t>(n) * (n - 1), "build_id");
    detail::require_distinct_rows(d.X, "X", "build_id");
    detail::require_distinct_rows(d.Y, "Y", "build_id");

    const auto matched_idx = detail::sample_without_replacement(n, n_joint, rng);
    const auto mismatched_idx = detail::sample_without_replacement(
        static_cast<std::int64_t>(n) * (n - 1), n_marg, rng);

    std::vector<detail::PairRef> matched;
    matched.reserve(matched_idx.size());
    for (auto i : matched_idx)
        matched.push_back({static_cast<Eigen::Index>(i),
                           static_cast<Eigen::Index>(i)});
    std::vector<detail::PairRef> mismatched;
    mismatched.reserve(mismatched_idx.size());
    for (auto t : mismatched_idx) {
        const auto i = static_cast<Eigen::Index>(t / (n - 1));
        const auto o = static_cast<Eigen::Index>(t % (n - 1));
        const Eigen::Index j = (o < i) ? o : o + 1;
        mismatched.push_back({i, j});
    }
    return detail::assemble_shuffled(
        matched, mismatched, d.p(), d.k(),
        [&d](const detail::PairRef& pr) { return d.X.row(pr.x_row); },
        [&d](const detail::PairRef& pr) { return d.Y.row(pr.y_row); }, rng);
}

//! Independent-pairs construction with extra marginal samples.  The paired
//! rows are split three ways (sizes N_X = min(n, n_x), N_Y = min(n_y, n−N_X),
//! N_XY = ⌊(n−N_X−N_Y)/2⌋) and consumed in this order:
//!   - the first 2·N_XY rows feed the plain independent-pairs construction;
//!   - the next N_Y rows keep their own target when z = 1 and receive an
//!     extra marginal target otherwise;
//!   - the next N_X rows keep their own features when z = 1 and receive
//!     extra marginal features otherwise.
//! The three blocks are concatenated in construction order; every output row
//! is i.i.d. with ratio r, and the total N = N_X + N_Y + N_XY equals
//! min(n, ⌊(n + n_x + n_y)/2⌋).
//! @param d paired training data.
//! @param extra marginal pools; widths must match d where nonempty.
//! @param r Bernoulli parameter of the labels.
//! @param rng seeded engine.
inline ContrastDataset build_iid_additional(const SupervisedDataset& d,
                                            const MarginalDatasets& extra,
                                            const Ratio& r, std::mt19937_64& rng)
{
    const Eigen::Index n = d.n();
    const Eigen::Index p = d.p();
    const Eigen::Index k = d.k();
    if (extra.n_x() > 0 && extra.extra_x.cols() != p)
        throw std::invalid_argument(
            "build_iid_additional: extra_x width does not match the feature width");
    if (extra.n_y() > 0 && extra.extra_y.cols() != k)
        throw std::invalid_argument(
            "build_iid_additional: extra_y width does not match the target width");

    const Eigen::Index big_nx = std::min(n, extra.n_x());
    const Eigen::Index big_ny = std::min(extra.n_y(), n - big_nx);
    const Eigen::Index big_nxy = (n - big_nx - big_ny) / 2;
    const Eigen::Index total = big_nx + big_ny + big_nxy;
    if (total < 1)
        throw std::invalid_argument(
            "build_iid_additional: the split yields zero samples (n too small "
            "and no usable marginal rows)");

    Eigen::MatrixXd w(total, p + k);
    std::vector<std::uint8_t> z(static_cast<std::size_t>(total));
    std::bernoulli_distribution label(r.value());
    Eigen::Index row = 0;
    Eigen::Index ones = 0;
    auto emit = [&](const auto& x_row, const auto& y_row, bool matched) {
        w.block(row, 0, 1, p) = x_row;
        w.block(row, p, 1, k) = y_row;
        z[static_cast<std::size_t>(row)] = matched ? 1 : 0;
        ones += matched ? 1 : 0;
        ++row;
    };

    // Block 1: plain independent-pairs construction on the first 2·N_XY rows.
    for (Eigen::Index i = 0; i < big_nxy; ++i) {
        const bool matched = label(rng);
        emit(d.X.row(i), matched ? d.Y.row(i) : d.Y.row(i + big_nxy), matched);
    }
    // Block 2: target substitution from the extra marginal targets.
    const Eigen::Index y_base = 2 * big_nxy;
    for (Eigen::Index i = 0; i < big_ny; ++i) {
        const bool matched = label(rng);
        emit(d.X.row(y_base + i),
             matched ? d.Y.row(y_base + i) : extra.extra_y.row(i), matched);
    }
    // Block 3: feature substitution from the extra marginal features.
    const Eigen::Index x_base = 2 * big_nxy + big_ny;
    for (Eigen::Index i = 0; i < big_nx; ++i) {
        const bool matched = label(rng);
        emit(matched ? d.X.row(x_base + i) : extra.extra_x.row(i),
             d.Y.row(x_base + i), matched);
    }
    return ContrastDataset(std::move(w), std::move(z), ones, total - ones);
}

//! Index-grid construction with extra marginal samples.  The matched pool is
//! unchanged (the n diagonal pairings), while the mismatched pool grows to
//! (n+n_x)(n+n_y) − n candidates, enumerated in four blocks:
//!   (A) paired-feature × paired-target, diagonal removed (as build_id);
//!   (B) extra-feature × paired-target;
//!   (C) paired-feature × extra-target;
//!   (D) extra-feature × extra-target.
//! Then exact counts are drawn without replacement and shuffled exactly as
//! in build_id.  With empty pools this reduces bit-for-bit to build_id.
//! @param d paired training data.
//! @param extra marginal pools; rows must be distinct from the paired rows.
//! @param n_joint matched pairs to draw, in [1, n].
//! @param n_marg mismatched pairs to draw, in [1, (n+n_x)(n+n_y) − n].
//! @param rng seeded engine.
inline ContrastDataset build_id_additional(const SupervisedDataset& d,
                                           const MarginalDatasets& extra,
                                           Eigen::Index n_joint,
                                           Eigen::Index n_marg,
                                           std::mt19937_64& rng)
{
    const Eigen::Index n = d.n();
    const Eigen::Index p = d.p();
    const Eigen::Index k = d.k();
    const Eigen::Index nx = extra.n_x();
    const Eigen::Index ny = extra.n_y();
    if (nx > 0 && extra.extra_x.cols() != p)
        throw std::invalid_argument(
            "build_id_additional: extra_x width does not match the feature width");
    if (ny > 0 && extra.extra_y.cols() != k)
        throw std::invalid_argument(
            "build_id_additional: extra_y width does not match the target width");

    const std::int64_t pool = static_cast<std::int64_t>(n + nx) * (n + ny) - n;
    detail::check_grid_counts(n_joint, n_marg, n, pool, "build_id_additional");

    // Distinctness across the union of paired and extra rows: duplicates
    // anywhere would let a mismatched candidate coincide with a matched pair.
    Eigen::MatrixXd all_x(n + nx, p);
    all_x.topRows(n) = d.X;
    if (nx > 0)
        all_x.bottomRows(nx) = extra.extra_x;
    Eigen::MatrixXd all_y(n + ny, k);
    all_y.topRows(n) = d.Y;
    if (ny > 0)
        all_y.bottomRows(ny) = extra.extra_y;
    detail::require_distinct_rows(all_x, "feature (paired + extra)",
                                  "build_id_additional");
    detail::require_distinct_rows(all_y, "target (paired + extra)",
                                  "build_id_additional");

    const auto matched_idx = detail::sample_without_replacement(n, n_joint, rng);
    const auto mismatched_idx =
        detail::sample_without_replacement(pool, n_marg, rng);

    std::vector<detail::PairRef> matched;
    matched.reserve(matched_idx.size());
    for (auto i : matched_idx)
        matched.push_back({static_cast<Eigen::Index>(i),
                           static_cast<Eigen::Index>(i)});

    const std::int64_t size_a = static_cast<std::int64_t>(n) * (n - 1);
    const std::int64_t size_b = static_cast<std::int64_t>(n) * nx;
    const std::int64_t size_c = static_cast<std::int64_t>(n) * ny;
    std::vector<detail::PairRef> mismatched;
    mismatched.reserve(mismatched_idx.size());
    for (auto t : mismatched_idx) {
        detail::PairRef pr{};
        if (t < size_a) {
            const auto i = static_cast<Eigen::Index>(t / (n - 1));
            const auto o = static_cast<Eigen::Index>(t % (n - 1));
            pr = {i, (o < i) ? o : o + 1, false, false};
        } else if (t < size_a + size_b) {
            const std::int64_t u = t - size_a;
            pr = {static_cast<Eigen::Index>(u % nx),
                  static_cast<Eigen::Index>(u / nx), true, false};
        } else if (t < size_a + size_b + size_c) {
            const std::int64_t u = t - size_a - size_b;
            pr = {static_cast<Eigen::Index>(u / ny),
                  static_cast<Eigen::Index>(u % ny), false, true};
        } else {
            const std::int64_t u = t - size_a - size_b - size_c;
            pr = {static_cast<Eigen::Index>(u / ny),
                  static_cast<Eigen::Index>(u % ny), true, true};
        }
        mismatched.push_back(pr);
    }
    return detail::assemble_shuffled(
        matched, mismatched, p, k,
        [&](const detail::PairRef& pr) {
            return pr.x_from_extra ? extra.extra_x.row(pr.x_row)
                                   : d.X.row(pr.x_row);
        },
        [&](const detail::PairRef& pr) {
            return pr.y_from_extra ? extra.extra_y.row(pr.y_row)
                                   : d.Y.row(pr.y_row);
        },
        rng);
}

//! Index-grid construction for data with m target draws per observation.
//! The candidate grid pairs every feature row with every target draw of
//! every observation: (X_i, Y_{j,l}) is matched when i = j, giving n·m
//! matched and n(n−1)·m mismatched candidates, enumerated feature-major,
//! observation-minor, draw-innermost.  With m = 1 this reduces bit-for-bit
//! to build_id.
//! @param d multi-target training data; feature rows distinct, and all n·m
//!   target draws pairwise distinct.
//! @param n_joint matched pairs to draw, in [1, n·m].
//! @param n_marg mismatched pairs to draw, in [1, n(n−1)·m].
//! @param rng seeded engine.
inline ContrastDataset build_id_multitarget(const MultiTargetDataset& d,
                                            Eigen::Index n_joint,
                                            Eigen::Index n_marg,
                                            std::mt19937_64& rng)
{
    const Eigen::Index n = d.n();
    const Eigen::Index p = d.p();
    const Eigen::Index m = d.m();
    detail::check_grid_counts(n_joint, n_marg,
                              static_cast<std::int64_t>(n) * m,
                              static_cast<std::int64_t>(n) * (n - 1) * m,
                              "build_id_multitarget");
    detail::require_distinct_rows(d.X, "X", "build_id_multitarget");
    // Flatten the n×m target draws row-major into a single column so the
    // pairwise-distinct check covers draws across observations too.
    Eigen::MatrixXd flat(n * m, 1);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index l = 0; l < m; ++l)
            flat(i * m + l, 0) = d.Y(i, l);
    detail::require_distinct_rows(flat, "target draw", "build_id_multitarget");

    const auto matched_idx = detail::sample_without_replacement(
        static_cast<std::int64_t>(n) * m, n_joint, rng);
    const auto mismatched_idx = detail::sample_without_replacement(
        static_cast<std::int64_t>(n) * (n - 1) * m, n_marg, rng);

    // PairRef.y_row addresses the flattened (observation, draw) cell.
    std::vector<detail::PairRef> matched;
    matched.reserve(matched_idx.size());
    for (auto s : matched_idx)
        matched.push_back({static_cast<Eigen::Index>(s / m),
                           static_cast<Eigen::Index>(s)});
    std::vector<detail::PairRef> mismatched;
    mismatched.reserve(mismatched_idx.size());
    const std::int64_t per_feature = static_cast<std::int64_t>(n - 1) * m;
    for (auto t : mismatched_idx) {
        const auto i = static_cast<Eigen::Index>(t / per_feature);
        const std::int64_t u = t % per_feature;
        const auto jj = static_cast<Eigen::Index>(u / m);
        const auto l = static_cast<Eigen::Index>(u % m);
        const Eigen::Index j = (jj < i) ? jj : jj + 1;
        mismatched.push_back({i, j * m + l});
    }
    return detail::assemble_shuffled(
        matched, mismatched, p, 1,
        [&d](const detail::PairRef& pr) { return d.X.row(pr.x_row); },
        [&d, m](const detail::PairRef& pr) {
            return d.Y.block(pr.y_row / m, pr.y_row % m, 1, 1);
        },
        rng);
}

} // namespace mcd
