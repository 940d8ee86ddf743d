#pragma once

#include <vector>

#include "omegacond/dense.hpp"

namespace omegacond {

/// Contiguous column ranges [begin, end) partitioning {0..n-1}.
struct BlockPartition {
    struct Range {
        int begin;
        int end;
    };
    std::vector<Range> blocks;

    static BlockPartition uniform(int n, int block_width);
    void validate(int n) const;
};

/// d_i = 1 / ||A_:,i||_2; minimizes omega((AD)^T (AD)) over positive
/// diagonal scalings. Throws ZeroColumn.
Vector optimal_column_scaling(const DenseMatrix& a);

/// Block-diagonal scaling with D_i D_i^T = (A_i^T A_i)^{-1}; D_i is the lower
/// Cholesky factor of the inverse Gram block (the factor is only determined
/// up to a right rotation, the Cholesky choice makes it deterministic).
/// Throws RankDeficientBlock.
std::vector<DenseMatrix> optimal_block_scaling(const DenseMatrix& a, const BlockPartition& partition);

/// A * D for a diagonal scaling.
DenseMatrix apply_column_scaling(const DenseMatrix& a, std::span<const double> d);

/// A * D for a block-diagonal scaling.
DenseMatrix apply_block_scaling(const DenseMatrix& a, const BlockPartition& partition,
                                const std::vector<DenseMatrix>& d_blocks);

} // namespace omegacond
