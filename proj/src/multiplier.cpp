#include "iqcgain/multiplier.hpp"

#include <sstream>
#include <stdexcept>
#include <utility>

namespace iqcgain {

namespace {

void check_family_shape(const std::vector<MatrixXd>& q, size_t count, int m, const char* what) {
    if (q.size() != count) throw std::invalid_argument(std::string(what) + ": wrong list length");
    for (const auto& Qi : q) {
        if (Qi.rows() != m || Qi.cols() != m) {
            throw std::invalid_argument(std::string(what) + ": block size mismatch");
        }
    }
}

// Arrowhead matrix of size m(N+1): first block row holds row_blocks[0..N],
// first block column holds col_blocks[0..N] (col_blocks[0] must equal
// row_blocks[0]); zeros elsewhere.
MatrixXd arrowhead(const std::vector<MatrixXd>& row_blocks,
                   const std::vector<MatrixXd>& col_blocks, int m, int N) {
    MatrixXd M0 = MatrixXd::Zero(m * (N + 1), m * (N + 1));
    for (int j = 0; j <= N; ++j) M0.block(0, j * m, m, m) = row_blocks[j];
    for (int i = 1; i <= N; ++i) M0.block(i * m, 0, m, m) = col_blocks[i];
    return M0;
}

MatrixXd compose_slope(const MatrixXd& M0) {
    const long n = M0.rows();
    MatrixXd M(2 * n, 2 * n);
    M.topLeftCorner(n, n).setZero();
    M.topRightCorner(n, n) = M0.transpose();
    M.bottomLeftCorner(n, n) = M0;
    M.bottomRightCorner(n, n) = -(M0 + M0.transpose());
    return M;
}

MatrixXd compose_relu(const MatrixXd& M1, const MatrixXd& M2, const MatrixXd& M3) {
    const long n = M1.rows();
    MatrixXd M(2 * n, 2 * n);
    M.topLeftCorner(n, n) = M1;
    M.topRightCorner(n, n) = -M3.transpose() - M1;
    M.bottomLeftCorner(n, n) = -M3 - M1;
    M.bottomRightCorner(n, n) = M1 + M2 + M3 + M3.transpose();
    return M;
}

std::string entry_tag(const char* family, int i, int r, int c) {
    std::ostringstream os;
    os << family << "_" << i << "(" << r << "," << c << ")";
    return os.str();
}

std::string full_entry_tag(const char* name, long r, long c) {
    std::ostringstream os;
    os << name << "(" << r << "," << c << ")";
    return os.str();
}

}  // namespace

std::vector<std::string> validate(const SlopeMultiplier& q, double slack) {
    check_family_shape(q.Q, 2 * q.N + 1, q.m, "SlopeMultiplier");
    std::vector<std::string> bad;
    for (int i = -q.N; i <= q.N; ++i) {
        const MatrixXd& Qi = q.at(i);
        for (int r = 0; r < q.m; ++r) {
            for (int c = 0; c < q.m; ++c) {
                const bool constrained = (i != 0) || (r != c);
                if (constrained && Qi(r, c) > slack) {
                    bad.push_back("(i/ii) entry must be <= 0: " + entry_tag("Q", i, r, c));
                }
            }
        }
    }
    for (int r = 0; r < q.m; ++r) {
        double row_sum = 0.0, col_sum = 0.0;
        for (int i = -q.N; i <= q.N; ++i) {
            row_sum += q.at(i).row(r).sum();
            col_sum += q.at(i).col(r).sum();
        }
        if (row_sum < -slack) bad.push_back("(iii) M_row row sum negative at row " + std::to_string(r));
        if (col_sum < -slack) bad.push_back("(iv) M_col column sum negative at column " + std::to_string(r));
    }
    return bad;
}

std::vector<std::string> validate(const ReluMultiplier& q, double slack) {
    const long blk = static_cast<long>(q.m) * (q.N + 1);
    for (const auto& [name, M] : {std::pair<const char*, const MatrixXd*>{"M1", &q.M1},
                                  {"M2", &q.M2},
                                  {"M3", &q.M3}}) {
        if (M->rows() != blk || M->cols() != blk) {
            throw std::invalid_argument(std::string("ReluMultiplier.") + name + ": size mismatch");
        }
    }
    std::vector<std::string> bad;
    for (int j = 1; j <= 2; ++j) {
        const MatrixXd& M = (j == 1) ? q.M1 : q.M2;
        const char* name = (j == 1) ? "M1" : "M2";
        if ((M - M.transpose()).cwiseAbs().maxCoeff() > slack) {
            bad.push_back(std::string(name) + " not symmetric");
        }
        for (long r = 0; r < blk; ++r) {
            for (long c = 0; c < blk; ++c) {
                if (M(r, c) < -slack) {
                    bad.push_back(full_entry_tag(name, r, c) + " must be >= 0");
                }
            }
        }
    }
    for (long r = 0; r < blk; ++r) {
        for (long c = 0; c < blk; ++c) {
            if (r != c && q.M3(r, c) < -slack) {  // M3 diagonal is free
                bad.push_back(full_entry_tag("M3", r, c) + " must be >= 0");
            }
        }
    }
    return bad;
}

namespace {
void throw_on_violations(const std::vector<std::string>& bad, const char* which) {
    if (bad.empty()) return;
    std::ostringstream os;
    os << which << " multiplier violates its class conditions:";
    for (const auto& s : bad) os << "\n  - " << s;
    throw std::invalid_argument(os.str());
}
}  // namespace

MiddleMatrix assemble_slope_M(const SlopeMultiplier& q, double slack) {
    throw_on_violations(validate(q, slack), "slope");
    std::vector<MatrixXd> row(q.N + 1), col(q.N + 1);
    for (int j = 0; j <= q.N; ++j) row[j] = q.at(j);
    for (int i = 0; i <= q.N; ++i) col[i] = q.at(-i);
    MatrixXd M0 = arrowhead(row, col, q.m, q.N);
    return {compose_slope(M0), MultiplierKind::Slope, q.N, q.m};
}

MiddleMatrix assemble_relu_M(const ReluMultiplier& q, double slack) {
    throw_on_violations(validate(q, slack), "relu");
    return {compose_relu(q.M1, q.M2, q.M3), MultiplierKind::Relu, q.N, q.m};
}

ReluMultiplier relu_from_families(int N, int m, const std::vector<MatrixXd>& q1,
                                  const std::vector<MatrixXd>& q2,
                                  const std::vector<MatrixXd>& q3) {
    check_family_shape(q1, N + 1, m, "relu_from_families: Q1");
    check_family_shape(q2, N + 1, m, "relu_from_families: Q2");
    check_family_shape(q3, 2 * N + 1, m, "relu_from_families: Q3");
    std::vector<MatrixXd> r3(N + 1), c3(N + 1);
    for (int i = 0; i <= N; ++i) {
        r3[i] = q3[i + N];
        c3[i] = q3[-i + N];
    }
    ReluMultiplier out;
    out.N = N;
    out.m = m;
    out.M1 = arrowhead(q1, q1, m, N);
    out.M2 = arrowhead(q2, q2, m, N);
    out.M3 = arrowhead(r3, c3, m, N);
    return out;
}

MatrixXd block_toeplitz(const std::vector<MatrixXd>& q, int m, int T0) {
    if (T0 < 0) throw std::invalid_argument("block_toeplitz: T0 must be >= 0");
    if (q.empty() || q.size() % 2 == 0) {
        throw std::invalid_argument("block_toeplitz: family must hold 2N+1 blocks");
    }
    const int N = static_cast<int>(q.size() / 2);
    MatrixXd out = MatrixXd::Zero(m * (T0 + 1), m * (T0 + 1));
    for (int r = 0; r <= T0; ++r) {
        for (int c = 0; c <= T0; ++c) {
            const int i = c - r;
            if (i < -N || i > N) continue;
            out.block(r * m, c * m, m, m) = q[i + N];
        }
    }
    return out;
}

MatrixXd block_toeplitz_symmetric(const std::vector<MatrixXd>& q, int m, int T0) {
    const int N = static_cast<int>(q.size()) - 1;
    std::vector<MatrixXd> full(2 * N + 1);
    for (int i = -N; i <= N; ++i) full[i + N] = q[std::abs(i)];
    return block_toeplitz(full, m, T0);
}

bool is_doubly_hyperdominant(const MatrixXd& M, double slack) {
    if (M.rows() != M.cols()) throw std::invalid_argument("is_doubly_hyperdominant: matrix not square");
    const long n = M.rows();
    for (long r = 0; r < n; ++r) {
        for (long c = 0; c < n; ++c) {
            if (r != c && M(r, c) > slack) return false;
        }
    }
    for (long r = 0; r < n; ++r) {
        if (M.row(r).sum() < -slack) return false;
    }
    for (long c = 0; c < n; ++c) {
        if (M.col(c).sum() < -slack) return false;
    }
    return true;
}

bool is_metzler(const MatrixXd& M, double slack) {
    if (M.rows() != M.cols()) throw std::invalid_argument("is_metzler: matrix not square");
    const long n = M.rows();
    for (long r = 0; r < n; ++r) {
        for (long c = 0; c < n; ++c) {
            if (r != c && M(r, c) < -slack) return false;
        }
    }
    return true;
}

bool is_symmetric_nonnegative(const MatrixXd& M, double slack) {
    if (M.rows() != M.cols()) return false;
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > slack) return false;
    return M.minCoeff() >= -slack;
}

ReluMultiplier embed_slope_in_relu(const SlopeMultiplier& q) {
    std::vector<MatrixXd> row(q.N + 1), col(q.N + 1);
    for (int j = 0; j <= q.N; ++j) row[j] = -q.at(j);
    for (int i = 0; i <= q.N; ++i) col[i] = -q.at(-i);
    ReluMultiplier out;
    out.N = q.N;
    out.m = q.m;
    const long blk = static_cast<long>(q.m) * (q.N + 1);
    out.M1 = MatrixXd::Zero(blk, blk);
    out.M2 = MatrixXd::Zero(blk, blk);
    out.M3 = arrowhead(row, col, q.m, q.N);
    return out;
}

MultiplierParam MultiplierParam::make(MultiplierKind kind, int N, int m) {
    MultiplierParam p;
    p.kind = kind;
    p.N = N;
    p.m = m;

    auto unit = [m](int r, int c) {
        MatrixXd E = MatrixXd::Zero(m, m);
        E(r, c) = 1.0;
        return E;
    };
    const MatrixXd zero = MatrixXd::Zero(m * (N + 1), m * (N + 1));

    // Place a block perturbation into the arrowhead at family index i.
    auto slope_arrow = [&](int i, const MatrixXd& dQ) {
        MatrixXd M0 = zero;
        if (i >= 0) M0.block(0, i * m, m, m) = dQ;
        if (i < 0) M0.block(-i * m, 0, m, m) = dQ;
        return M0;
    };
    if (kind == MultiplierKind::Slope) {
        // All entries of every Q_i are free scalars, indexed (i, r, c) row-major.
        for (int i = -N; i <= N; ++i) {
            for (int r = 0; r < m; ++r) {
                for (int c = 0; c < m; ++c) {
                    const int var = p.num_vars++;
                    p.basis.push_back(compose_slope(slope_arrow(i, unit(r, c))));
                    if (i != 0 || r != c) {
                        p.inequalities.push_back({{{var, -1.0}}, entry_tag("Q", i, r, c) + " <= 0"});
                    }
                }
            }
        }
        auto var_index = [N, m](int i, int r, int c) {
            return (i + N) * m * m + r * m + c;
        };
        for (int r = 0; r < m; ++r) {
            LinIneq row_sum{{}, "M_row row sum " + std::to_string(r) + " >= 0"};
            LinIneq col_sum{{}, "M_col column sum " + std::to_string(r) + " >= 0"};
            for (int i = -N; i <= N; ++i) {
                for (int k = 0; k < m; ++k) {
                    row_sum.terms.push_back({var_index(i, r, k), 1.0});
                    col_sum.terms.push_back({var_index(i, k, r), 1.0});
                }
            }
            p.inequalities.push_back(std::move(row_sum));
            p.inequalities.push_back(std::move(col_sum));
        }
    } else {
        // M1 and M2 contribute their upper triangles (symmetric by
        // construction); M3 contributes every entry.
        const long blk = static_cast<long>(m) * (N + 1);
        auto sym_full = [blk](long r, long c) {
            MatrixXd E = MatrixXd::Zero(blk, blk);
            E(r, c) = 1.0;
            if (r != c) E(c, r) = 1.0;
            return E;
        };
        for (int j = 1; j <= 2; ++j) {
            const char* name = (j == 1) ? "M1" : "M2";
            for (long r = 0; r < blk; ++r) {
                for (long c = r; c < blk; ++c) {
                    const int var = p.num_vars++;
                    const MatrixXd E = sym_full(r, c);
                    p.basis.push_back(j == 1 ? compose_relu(E, zero, zero)
                                             : compose_relu(zero, E, zero));
                    p.inequalities.push_back({{{var, 1.0}}, full_entry_tag(name, r, c) + " >= 0"});
                }
            }
        }
        for (long r = 0; r < blk; ++r) {
            for (long c = 0; c < blk; ++c) {
                const int var = p.num_vars++;
                MatrixXd E = MatrixXd::Zero(blk, blk);
                E(r, c) = 1.0;
                p.basis.push_back(compose_relu(zero, zero, E));
                if (r != c) {
                    p.inequalities.push_back({{{var, 1.0}}, full_entry_tag("M3", r, c) + " >= 0"});
                }
            }
        }
    }
    return p;
}

SlopeMultiplier MultiplierParam::to_slope(const VectorXd& x) const {
    if (kind != MultiplierKind::Slope) throw std::logic_error("to_slope: wrong class");
    if (x.size() != num_vars) throw std::invalid_argument("to_slope: wrong vector length");
    SlopeMultiplier q;
    q.N = N;
    q.m = m;
    q.Q.assign(2 * N + 1, MatrixXd::Zero(m, m));
    int var = 0;
    for (int i = -N; i <= N; ++i) {
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) q.at(i)(r, c) = x(var++);
        }
    }
    return q;
}

ReluMultiplier MultiplierParam::to_relu(const VectorXd& x) const {
    if (kind != MultiplierKind::Relu) throw std::logic_error("to_relu: wrong class");
    if (x.size() != num_vars) throw std::invalid_argument("to_relu: wrong vector length");
    const long blk = static_cast<long>(m) * (N + 1);
    ReluMultiplier q;
    q.N = N;
    q.m = m;
    q.M1 = MatrixXd::Zero(blk, blk);
    q.M2 = MatrixXd::Zero(blk, blk);
    q.M3 = MatrixXd::Zero(blk, blk);
    int var = 0;
    for (int j = 1; j <= 2; ++j) {
        MatrixXd& M = (j == 1) ? q.M1 : q.M2;
        for (long r = 0; r < blk; ++r) {
            for (long c = r; c < blk; ++c) {
                M(r, c) = x(var);
                M(c, r) = x(var);
                ++var;
            }
        }
    }
    for (long r = 0; r < blk; ++r) {
        for (long c = 0; c < blk; ++c) q.M3(r, c) = x(var++);
    }
    return q;
}

MiddleMatrix MultiplierParam::to_middle(const VectorXd& x, double slack) const {
    return kind == MultiplierKind::Slope ? assemble_slope_M(to_slope(x), slack)
                                         : assemble_relu_M(to_relu(x), slack);
}

}  // namespace iqcgain
