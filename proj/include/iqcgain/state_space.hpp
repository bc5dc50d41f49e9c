#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

namespace iqcgain {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Discrete-time LTI realization x(k+1) = A x + B u, y = C x + D u with
/// partitioned input/output channels. Immutable after construction.
struct StateSpace {
    MatrixXd A, B, C, D;
    std::vector<int> input_partition;   // channel widths, sum = nu
    std::vector<int> output_partition;  // channel widths, sum = ny

    StateSpace() = default;
    StateSpace(MatrixXd A_, MatrixXd B_, MatrixXd C_, MatrixXd D_,
               std::vector<int> in_part = {}, std::vector<int> out_part = {});

    int nx() const { return static_cast<int>(A.rows()); }
    int nu() const { return static_cast<int>(B.cols()); }
    int ny() const { return static_cast<int>(C.rows()); }

    // Offset of channel i in the input/output vector.
    int input_offset(int channel) const;
    int output_offset(int channel) const;
    int input_width(int channel) const { return input_partition.at(channel); }
    int output_width(int channel) const { return output_partition.at(channel); }

    // Sub-blocks of B / C / D by channel index.
    MatrixXd B_block(int in_channel) const;
    MatrixXd C_block(int out_channel) const;
    MatrixXd D_block(int out_channel, int in_channel) const;

    // Transfer function C (zI - A)^{-1} B + D at a complex point z.
    Eigen::MatrixXcd transfer_at(std::complex<double> z) const;
};

/// Finite-horizon sampled signals. Column k of a channel is the value at
/// time k; indices before 0 are implicitly zero.
struct Trajectory {
    int horizon = 0;  // T0; every channel has T0+1 columns
    std::map<std::string, MatrixXd> channels;

    Trajectory() = default;
    explicit Trajectory(int T0) : horizon(T0) {}

    void set(const std::string& name, MatrixXd values);
    const MatrixXd& at(const std::string& name) const;
    bool has(const std::string& name) const { return channels.count(name) > 0; }
};

/// One entry of a first-order transfer-function grid: either a constant
/// or a strictly proper scalar term gain/(z - pole).
struct FirstOrderTerm {
    double gain = 0.0;
    double pole = 0.0;
    bool dynamic = false;

    static FirstOrderTerm constant(double c) { return {c, 0.0, false}; }
    static FirstOrderTerm first_order(double c, double a) { return {c, a, true}; }
};

/// Row-major grid of first-order terms describing a MIMO transfer matrix.
struct FirstOrderGrid {
    int rows = 0, cols = 0;
    std::vector<FirstOrderTerm> entries;  // row-major, rows*cols
    std::vector<int> input_partition;
    std::vector<int> output_partition;

    const FirstOrderTerm& at(int r, int c) const { return entries.at(r * cols + c); }
    Eigen::MatrixXcd evaluate(std::complex<double> z) const;
};

/// Realize a grid of scalar first-order terms as a single StateSpace with
/// one state per dynamic entry. States are ordered row-major over the grid.
StateSpace realize_first_order_bank(const FirstOrderGrid& grid);

/// Largest eigenvalue magnitude of A; 0 for a static (nx = 0) system.
double spectral_radius(const StateSpace& sys);

/// Simulate the recursion over the input horizon. `inputs` must hold a
/// channel "u" of width nu. Returns channels "y" (ny wide) and "x"
/// (nx wide, the state *before* the update at each k).
Trajectory simulate(const StateSpace& sys, const Trajectory& inputs,
                    const VectorXd& x0);

/// H-infinity norm estimate of the full (unpartitioned) system by dense
/// frequency gridding of the unit circle.
double hinf_norm_gridded(const StateSpace& sys, int grid_points = 4096);

/// Partitioned plant view: inputs (w: m, d: nd), outputs (v: m, e: ne).
struct PlantBlocks {
    MatrixXd A, B1, B2, C1, C2, D11, D12, D21, D22;
    int m, nd, ne, nx;
};

/// Slice a two-input/two-output partitioned plant into named blocks.
/// Requires exactly two input and two output channels with matching
/// nonlinearity width m.
PlantBlocks plant_blocks(const StateSpace& plant);

}  // namespace iqcgain
