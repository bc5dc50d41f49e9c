#include "iqcgain/state_space.hpp"

#include <complex>
#include <numeric>
#include <stdexcept>

namespace iqcgain {

namespace {
int partition_sum(const std::vector<int>& p) {
    return std::accumulate(p.begin(), p.end(), 0);
}

void check_partition(const std::vector<int>& p, int total, const char* what) {
    for (int w : p) {
        if (w <= 0) throw std::invalid_argument(std::string(what) + ": partition widths must be positive");
    }
    if (partition_sum(p) != total) {
        throw std::invalid_argument(std::string(what) + ": partition does not sum to total width");
    }
}
}  // namespace

StateSpace::StateSpace(MatrixXd A_, MatrixXd B_, MatrixXd C_, MatrixXd D_,
                       std::vector<int> in_part, std::vector<int> out_part)
    : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)), D(std::move(D_)),
      input_partition(std::move(in_part)), output_partition(std::move(out_part)) {
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n) throw std::invalid_argument("StateSpace: A must be square");
    if (B.rows() != n) throw std::invalid_argument("StateSpace: B row count must match A");
    if (C.cols() != n) throw std::invalid_argument("StateSpace: C column count must match A");
    if (D.rows() != C.rows() || D.cols() != B.cols()) {
        throw std::invalid_argument("StateSpace: D must be ny x nu");
    }
    if (input_partition.empty()) input_partition = {static_cast<int>(B.cols())};
    if (output_partition.empty()) output_partition = {static_cast<int>(C.rows())};
    if (nu() > 0 || !input_partition.empty()) check_partition(input_partition, nu(), "input");
    if (ny() > 0 || !output_partition.empty()) check_partition(output_partition, ny(), "output");
}

int StateSpace::input_offset(int channel) const {
    int off = 0;
    for (int i = 0; i < channel; ++i) off += input_partition.at(i);
    return off;
}

int StateSpace::output_offset(int channel) const {
    int off = 0;
    for (int i = 0; i < channel; ++i) off += output_partition.at(i);
    return off;
}

MatrixXd StateSpace::B_block(int in_channel) const {
    return B.middleCols(input_offset(in_channel), input_width(in_channel));
}

MatrixXd StateSpace::C_block(int out_channel) const {
    return C.middleRows(output_offset(out_channel), output_width(out_channel));
}

MatrixXd StateSpace::D_block(int out_channel, int in_channel) const {
    return D.block(output_offset(out_channel), input_offset(in_channel),
                   output_width(out_channel), input_width(in_channel));
}

Eigen::MatrixXcd StateSpace::transfer_at(std::complex<double> z) const {
    const int n = nx();
    if (n == 0) return D.cast<std::complex<double>>();
    Eigen::MatrixXcd zi = z * Eigen::MatrixXcd::Identity(n, n) - A.cast<std::complex<double>>();
    return C.cast<std::complex<double>>() * zi.lu().solve(B.cast<std::complex<double>>()) +
           D.cast<std::complex<double>>();
}

void Trajectory::set(const std::string& name, MatrixXd values) {
    if (values.cols() != horizon + 1) {
        throw std::invalid_argument("Trajectory: channel '" + name + "' must have horizon+1 columns");
    }
    channels[name] = std::move(values);
}

const MatrixXd& Trajectory::at(const std::string& name) const {
    auto it = channels.find(name);
    if (it == channels.end()) throw std::invalid_argument("Trajectory: missing channel '" + name + "'");
    return it->second;
}

Eigen::MatrixXcd FirstOrderGrid::evaluate(std::complex<double> z) const {
    Eigen::MatrixXcd out(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const FirstOrderTerm& t = at(r, c);
            out(r, c) = t.dynamic ? t.gain / (z - t.pole) : std::complex<double>(t.gain);
        }
    }
    return out;
}

StateSpace realize_first_order_bank(const FirstOrderGrid& grid) {
    if (grid.rows <= 0 || grid.cols <= 0 ||
        static_cast<int>(grid.entries.size()) != grid.rows * grid.cols) {
        throw std::invalid_argument("realize_first_order_bank: malformed grid");
    }
    int n_states = 0;
    for (const auto& t : grid.entries) {
        if (t.dynamic) ++n_states;
    }
    MatrixXd A = MatrixXd::Zero(n_states, n_states);
    MatrixXd B = MatrixXd::Zero(n_states, grid.cols);
    MatrixXd C = MatrixXd::Zero(grid.rows, n_states);
    MatrixXd D = MatrixXd::Zero(grid.rows, grid.cols);

    // One state per dynamic entry, scanned row-major:
    //   s(k+1) = a s(k) + u_c(k),  contribution to y_r is gain * s.
    int s = 0;
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            const FirstOrderTerm& t = grid.at(r, c);
            if (t.dynamic) {
                A(s, s) = t.pole;
                B(s, c) = 1.0;
                C(r, s) = t.gain;
                ++s;
            } else {
                D(r, c) += t.gain;
            }
        }
    }
    std::vector<int> in_part = grid.input_partition.empty()
                                   ? std::vector<int>{grid.cols}
                                   : grid.input_partition;
    std::vector<int> out_part = grid.output_partition.empty()
                                    ? std::vector<int>{grid.rows}
                                    : grid.output_partition;
    return StateSpace(std::move(A), std::move(B), std::move(C), std::move(D),
                      std::move(in_part), std::move(out_part));
}

double spectral_radius(const StateSpace& sys) {
    if (sys.nx() == 0) return 0.0;
    return sys.A.eigenvalues().cwiseAbs().maxCoeff();
}

Trajectory simulate(const StateSpace& sys, const Trajectory& inputs, const VectorXd& x0) {
    const MatrixXd& u = inputs.at("u");
    if (u.rows() != sys.nu()) throw std::invalid_argument("simulate: input width mismatch");
    if (x0.size() != sys.nx()) throw std::invalid_argument("simulate: x0 length mismatch");

    const int T = inputs.horizon;
    MatrixXd x(sys.nx(), T + 1);
    MatrixXd y(sys.ny(), T + 1);
    VectorXd xk = x0;
    for (int k = 0; k <= T; ++k) {
        x.col(k) = xk;
        y.col(k) = sys.C * xk + sys.D * u.col(k);
        xk = sys.A * xk + sys.B * u.col(k);
    }
    Trajectory out(T);
    out.set("y", std::move(y));
    out.set("x", std::move(x));
    return out;
}

double hinf_norm_gridded(const StateSpace& sys, int grid_points) {
    double peak = 0.0;
    for (int i = 0; i < grid_points; ++i) {
        const double theta = 2.0 * M_PI * i / grid_points;
        Eigen::MatrixXcd g = sys.transfer_at(std::polar(1.0, theta));
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(g);
        peak = std::max(peak, svd.singularValues()(0));
    }
    return peak;
}

PlantBlocks plant_blocks(const StateSpace& plant) {
    if (plant.input_partition.size() != 2 || plant.output_partition.size() != 2) {
        throw std::invalid_argument("plant_blocks: plant must have (w,d) inputs and (v,e) outputs");
    }
    const int m = plant.input_width(0);
    if (plant.output_width(0) != m) {
        throw std::invalid_argument("plant_blocks: nonlinearity channel widths differ (v vs w)");
    }
    PlantBlocks b;
    b.m = m;
    b.nd = plant.input_width(1);
    b.ne = plant.output_width(1);
    b.nx = plant.nx();
    b.A = plant.A;
    b.B1 = plant.B_block(0);
    b.B2 = plant.B_block(1);
    b.C1 = plant.C_block(0);
    b.C2 = plant.C_block(1);
    b.D11 = plant.D_block(0, 0);
    b.D12 = plant.D_block(0, 1);
    b.D21 = plant.D_block(1, 0);
    b.D22 = plant.D_block(1, 1);
    return b;
}

}  // namespace iqcgain
