#include "omegacond/scaling.hpp"

#include <cmath>

#include "omegacond/factor.hpp"
#include "omegacond/kernels.hpp"

namespace omegacond {

BlockPartition BlockPartition::uniform(int n, int block_width) {
    BlockPartition partition;
    for (int begin = 0; begin < n; begin += block_width)
        partition.blocks.push_back({begin, std::min(begin + block_width, n)});
    return partition;
}

void BlockPartition::validate(int n) const {
    int expected = 0;
    for (const Range& range : blocks) {
        if (range.begin != expected || range.end <= range.begin)
            throw Error(ErrorCode::DimensionMismatch, "block partition is not contiguous");
        expected = range.end;
    }
    if (expected != n)
        throw Error(ErrorCode::DimensionMismatch, "block partition does not cover all columns");
}

Vector optimal_column_scaling(const DenseMatrix& a) {
    Vector d(static_cast<std::size_t>(a.cols()));
    for (int j = 0; j < a.cols(); ++j) {
        double norm_sq = 0.0;
        for (int i = 0; i < a.rows(); ++i) norm_sq += a(i, j) * a(i, j);
        if (norm_sq == 0.0)
            throw Error(ErrorCode::ZeroColumn, "column " + std::to_string(j) + " is zero", j);
        d[static_cast<std::size_t>(j)] = 1.0 / std::sqrt(norm_sq);
    }
    return d;
}

std::vector<DenseMatrix> optimal_block_scaling(const DenseMatrix& a, const BlockPartition& partition) {
    partition.validate(a.cols());
    std::vector<DenseMatrix> scalings;
    scalings.reserve(partition.blocks.size());
    for (std::size_t k = 0; k < partition.blocks.size(); ++k) {
        const auto [begin, end] = partition.blocks[k];
        const int width = end - begin;
        DenseMatrix block(a.rows(), width);
        for (int i = 0; i < a.rows(); ++i)
            for (int j = 0; j < width; ++j) block(i, j) = a(i, begin + j);

        const DenseMatrix gram = kernels::gram(block);
        CholeskyDecomp gram_chol;
        try {
            gram_chol = cholesky(SymPDMatrix(gram));
        } catch (const Error& err) {
            if (err.code() != ErrorCode::NotPositiveDefinite) throw;
            throw Error(ErrorCode::RankDeficientBlock,
                        "block " + std::to_string(k) + " is rank deficient", static_cast<long>(k));
        }

        // (A_i^T A_i)^{-1} column by column through the Gram Cholesky, then
        // its lower Cholesky factor is the (deterministic) D_i.
        DenseMatrix inverse(width, width);
        Vector unit(static_cast<std::size_t>(width), 0.0);
        for (int j = 0; j < width; ++j) {
            unit[static_cast<std::size_t>(j)] = 1.0;
            const Vector col = cholesky_solve(gram_chol, unit);
            unit[static_cast<std::size_t>(j)] = 0.0;
            for (int i = 0; i < width; ++i) inverse(i, j) = col[static_cast<std::size_t>(i)];
        }
        scalings.push_back(cholesky(SymPDMatrix(inverse)).l);
    }
    return scalings;
}

DenseMatrix apply_column_scaling(const DenseMatrix& a, std::span<const double> d) {
    if (d.size() != static_cast<std::size_t>(a.cols()))
        throw Error(ErrorCode::DimensionMismatch, "scaling length does not match column count");
    DenseMatrix scaled = a;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) scaled(i, j) *= d[static_cast<std::size_t>(j)];
    return scaled;
}

DenseMatrix apply_block_scaling(const DenseMatrix& a, const BlockPartition& partition,
                                const std::vector<DenseMatrix>& d_blocks) {
    partition.validate(a.cols());
    if (d_blocks.size() != partition.blocks.size())
        throw Error(ErrorCode::DimensionMismatch, "scaling block count mismatch");
    DenseMatrix scaled(a.rows(), a.cols());
    for (std::size_t k = 0; k < partition.blocks.size(); ++k) {
        const auto [begin, end] = partition.blocks[k];
        const int width = end - begin;
        const DenseMatrix& d = d_blocks[k];
        if (d.rows() != width || d.cols() != width)
            throw Error(ErrorCode::DimensionMismatch, "scaling block has wrong shape");
        for (int i = 0; i < a.rows(); ++i)
            for (int j = 0; j < width; ++j) {
                double s = 0.0;
                for (int p = 0; p < width; ++p) s += a(i, begin + p) * d(p, j);
                scaled(i, begin + j) = s;
            }
    }
    return scaled;
}

} // namespace omegacond
