#pragma once

#include <cassert>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace dora {

// Dense row-major matrix of doubles.
struct Mat {
    int rows = 0, cols = 0;
    std::vector<double> v;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0)
        : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, fill) {}

    double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
    std::size_t size() const { return v.size(); }
};

using Var = int;

// Reverse-mode autodiff tape over matrix ops. Values are computed eagerly;
// backward() replays the recorded closures in reverse.
class Tape {
public:
    Var leaf(Mat m) {
        nodes_.push_back({std::move(m), {}, nullptr});
        Node& n = nodes_.back();
        n.grad = Mat(n.value.rows, n.value.cols);
        return static_cast<Var>(nodes_.size() - 1);
    }

    Var constant(Mat m) { return leaf(std::move(m)); }

    const Mat& value(Var id) const { return nodes_[id].value; }
    const Mat& grad(Var id) const { return nodes_[id].grad; }

    // C = A B
    Var matmul(Var a, Var b) {
        const Mat& A = nodes_[a].value;
        const Mat& B = nodes_[b].value;
        if (A.cols != B.rows) throw std::invalid_argument("matmul: shape mismatch");
        Mat C(A.rows, B.cols);
        gemm(A, B, C);
        return record(std::move(C), [this, a, b](const Mat& dC) {
            const Mat& A = nodes_[a].value;
            const Mat& B = nodes_[b].value;
            // dA += dC B^T ; dB += A^T dC
            gemm_nt_acc(dC, B, nodes_[a].grad);
            gemm_tn_acc(A, dC, nodes_[b].grad);
        });
    }

    // C = A B^T
    Var matmul_bt(Var a, Var b) {
        const Mat& A = nodes_[a].value;
        const Mat& B = nodes_[b].value;
        if (A.cols != B.cols) throw std::invalid_argument("matmul_bt: shape mismatch");
        Mat C(A.rows, B.rows);
        gemm_nt(A, B, C);
        return record(std::move(C), [this, a, b](const Mat& dC) {
            // dA += dC B ; dB += dC^T A
            gemm_acc(dC, nodes_[b].value, nodes_[a].grad);
            gemm_tn_acc(dC, nodes_[a].value, nodes_[b].grad);
        });
    }

    Var add(Var a, Var b) {
        const Mat& A = nodes_[a].value;
        const Mat& B = nodes_[b].value;
        if (A.rows != B.rows || A.cols != B.cols) throw std::invalid_argument("add: shape mismatch");
        Mat C = A;
        for (std::size_t i = 0; i < C.size(); ++i) C.v[i] += B.v[i];
        return record(std::move(C), [this, a, b](const Mat& dC) {
            accumulate(nodes_[a].grad, dC);
            accumulate(nodes_[b].grad, dC);
        });
    }

    // broadcast a 1 x cols row vector over every row
    Var add_row(Var a, Var row) {
        const Mat& A = nodes_[a].value;
        const Mat& R = nodes_[row].value;
        if (R.rows != 1 || R.cols != A.cols) throw std::invalid_argument("add_row: shape mismatch");
        Mat C = A;
        for (int r = 0; r < C.rows; ++r)
            for (int c = 0; c < C.cols; ++c) C.at(r, c) += R.at(0, c);
        return record(std::move(C), [this, a, row](const Mat& dC) {
            accumulate(nodes_[a].grad, dC);
            Mat& dR = nodes_[row].grad;
            for (int r = 0; r < dC.rows; ++r)
                for (int c = 0; c < dC.cols; ++c) dR.at(0, c) += dC.at(r, c);
        });
    }

    Var scale(Var a, double s) {
        Mat C = nodes_[a].value;
        for (double& x : C.v) x *= s;
        return record(std::move(C), [this, a, s](const Mat& dC) {
            Mat& dA = nodes_[a].grad;
            for (std::size_t i = 0; i < dC.size(); ++i) dA.v[i] += s * dC.v[i];
        });
    }

    Var softmax_rows(Var a) {
        Mat C = nodes_[a].value;
        for (int r = 0; r < C.rows; ++r) {
            double mx = C.at(r, 0);
            for (int c = 1; c < C.cols; ++c) mx = std::max(mx, C.at(r, c));
            double sum = 0.0;
            for (int c = 0; c < C.cols; ++c) {
                C.at(r, c) = std::exp(C.at(r, c) - mx);
                sum += C.at(r, c);
            }
            for (int c = 0; c < C.cols; ++c) C.at(r, c) /= sum;
        }
        Var out = record(std::move(C), nullptr);
        nodes_[out].backward = [this, a, out](const Mat& dC) {
            const Mat& Y = nodes_[out].value;
            Mat& dA = nodes_[a].grad;
            for (int r = 0; r < Y.rows; ++r) {
                double inner = 0.0;
                for (int c = 0; c < Y.cols; ++c) inner += dC.at(r, c) * Y.at(r, c);
                for (int c = 0; c < Y.cols; ++c)
                    dA.at(r, c) += Y.at(r, c) * (dC.at(r, c) - inner);
            }
        };
        return out;
    }

    // row-wise layer norm with learned gain/bias (1 x cols each)
    Var layer_norm(Var a, Var gain, Var bias, double eps = 1e-5) {
        const Mat& A = nodes_[a].value;
        const Mat& G = nodes_[gain].value;
        const Mat& B = nodes_[bias].value;
        Mat C(A.rows, A.cols);
        Mat xhat(A.rows, A.cols);
        std::vector<double> inv_sigma(A.rows);
        for (int r = 0; r < A.rows; ++r) {
            double mean = 0.0;
            for (int c = 0; c < A.cols; ++c) mean += A.at(r, c);
            mean /= A.cols;
            double var = 0.0;
            for (int c = 0; c < A.cols; ++c) {
                double d = A.at(r, c) - mean;
                var += d * d;
            }
            var /= A.cols;
            inv_sigma[r] = 1.0 / std::sqrt(var + eps);
            for (int c = 0; c < A.cols; ++c) {
                xhat.at(r, c) = (A.at(r, c) - mean) * inv_sigma[r];
                C.at(r, c) = xhat.at(r, c) * G.at(0, c) + B.at(0, c);
            }
        }
        return record(std::move(C),
                      [this, a, gain, bias, xhat = std::move(xhat),
                       inv_sigma = std::move(inv_sigma)](const Mat& dC) {
            const Mat& G = nodes_[gain].value;
            Mat& dA = nodes_[a].grad;
            Mat& dG = nodes_[gain].grad;
            Mat& dB = nodes_[bias].grad;
            int cols = dC.cols;
            for (int r = 0; r < dC.rows; ++r) {
                double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
                for (int c = 0; c < cols; ++c) {
                    double dxhat = dC.at(r, c) * G.at(0, c);
                    sum_dxhat += dxhat;
                    sum_dxhat_xhat += dxhat * xhat.at(r, c);
                    dG.at(0, c) += dC.at(r, c) * xhat.at(r, c);
                    dB.at(0, c) += dC.at(r, c);
                }
                for (int c = 0; c < cols; ++c) {
                    double dxhat = dC.at(r, c) * G.at(0, c);
                    dA.at(r, c) += inv_sigma[r] *
                                   (dxhat - sum_dxhat / cols - xhat.at(r, c) * sum_dxhat_xhat / cols);
                }
            }
        });
    }

    Var gelu(Var a) {
        const Mat& A = nodes_[a].value;
        Mat C = A;
        for (double& x : C.v) x = x * phi(x);
        return record(std::move(C), [this, a](const Mat& dC) {
            const Mat& A = nodes_[a].value;
            Mat& dA = nodes_[a].grad;
            for (std::size_t i = 0; i < dC.size(); ++i) {
                double x = A.v[i];
                dA.v[i] += dC.v[i] * (phi(x) + x * pdf(x));
            }
        });
    }

    Var sigmoid(Var a) {
        Mat C = nodes_[a].value;
        for (double& x : C.v) x = 1.0 / (1.0 + std::exp(-x));
        Var out = record(std::move(C), nullptr);
        nodes_[out].backward = [this, a, out](const Mat& dC) {
            const Mat& Y = nodes_[out].value;
            Mat& dA = nodes_[a].grad;
            for (std::size_t i = 0; i < dC.size(); ++i)
                dA.v[i] += dC.v[i] * Y.v[i] * (1.0 - Y.v[i]);
        };
        return out;
    }

    Var slice_cols(Var a, int start, int count) {
        const Mat& A = nodes_[a].value;
        if (start < 0 || start + count > A.cols)
            throw std::invalid_argument("slice_cols: out of range");
        Mat C(A.rows, count);
        for (int r = 0; r < A.rows; ++r)
            for (int c = 0; c < count; ++c) C.at(r, c) = A.at(r, start + c);
        return record(std::move(C), [this, a, start, count](const Mat& dC) {
            Mat& dA = nodes_[a].grad;
            for (int r = 0; r < dC.rows; ++r)
                for (int c = 0; c < count; ++c) dA.at(r, start + c) += dC.at(r, c);
        });
    }

    Var concat_cols(const std::vector<Var>& parts) {
        int rows = nodes_[parts[0]].value.rows;
        int cols = 0;
        for (Var p : parts) {
            if (nodes_[p].value.rows != rows)
                throw std::invalid_argument("concat_cols: row mismatch");
            cols += nodes_[p].value.cols;
        }
        Mat C(rows, cols);
        int offset = 0;
        for (Var p : parts) {
            const Mat& P = nodes_[p].value;
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < P.cols; ++c) C.at(r, offset + c) = P.at(r, c);
            offset += P.cols;
        }
        return record(std::move(C), [this, parts](const Mat& dC) {
            int offset = 0;
            for (Var p : parts) {
                Mat& dP = nodes_[p].grad;
                for (int r = 0; r < dC.rows; ++r)
                    for (int c = 0; c < dP.cols; ++c) dP.at(r, c) += dC.at(r, offset + c);
                offset += dP.cols;
            }
        });
    }

    // z = mean + exp(logvar / 2) * noise (elementwise)
    Var reparameterize(Var mean, Var logvar, const Mat& noise) {
        const Mat& M = nodes_[mean].value;
        const Mat& L = nodes_[logvar].value;
        Mat C(M.rows, M.cols);
        for (std::size_t i = 0; i < C.size(); ++i)
            C.v[i] = M.v[i] + std::exp(0.5 * L.v[i]) * noise.v[i];
        return record(std::move(C), [this, mean, logvar, noise](const Mat& dC) {
            const Mat& L = nodes_[logvar].value;
            Mat& dM = nodes_[mean].grad;
            Mat& dL = nodes_[logvar].grad;
            for (std::size_t i = 0; i < dC.size(); ++i) {
                dM.v[i] += dC.v[i];
                dL.v[i] += dC.v[i] * 0.5 * std::exp(0.5 * L.v[i]) * noise.v[i];
            }
        });
    }

    // mean squared error against a constant target; returns a 1x1 node
    Var mse(Var pred, const Mat& target) {
        const Mat& P = nodes_[pred].value;
        if (P.rows != target.rows || P.cols != target.cols)
            throw std::invalid_argument("mse: shape mismatch");
        double sum = 0.0;
        for (std::size_t i = 0; i < P.size(); ++i) {
            double d = P.v[i] - target.v[i];
            sum += d * d;
        }
        double n = static_cast<double>(P.size());
        Mat C(1, 1);
        C.v[0] = sum / n;
        return record(std::move(C), [this, pred, target, n](const Mat& dC) {
            const Mat& P = nodes_[pred].value;
            Mat& dP = nodes_[pred].grad;
            for (std::size_t i = 0; i < P.size(); ++i)
                dP.v[i] += dC.v[0] * 2.0 * (P.v[i] - target.v[i]) / n;
        });
    }

    // mean over entries of KL(N(mean, exp(logvar)) || N(0,1)); 1x1 node
    Var kl_divergence(Var mean, Var logvar) {
        const Mat& M = nodes_[mean].value;
        const Mat& L = nodes_[logvar].value;
        double sum = 0.0;
        for (std::size_t i = 0; i < M.size(); ++i)
            sum += 0.5 * (M.v[i] * M.v[i] + std::exp(L.v[i]) - 1.0 - L.v[i]);
        double n = static_cast<double>(M.size());
        Mat C(1, 1);
        C.v[0] = sum / n;
        return record(std::move(C), [this, mean, logvar, n](const Mat& dC) {
            const Mat& M = nodes_[mean].value;
            const Mat& L = nodes_[logvar].value;
            Mat& dM = nodes_[mean].grad;
            Mat& dL = nodes_[logvar].grad;
            for (std::size_t i = 0; i < M.size(); ++i) {
                dM.v[i] += dC.v[0] * M.v[i] / n;
                dL.v[i] += dC.v[0] * 0.5 * (std::exp(L.v[i]) - 1.0) / n;
            }
        });
    }

    // a + w * b for 1x1 nodes
    Var add_scaled(Var a, Var b, double w) {
        Mat C(1, 1);
        C.v[0] = nodes_[a].value.v[0] + w * nodes_[b].value.v[0];
        return record(std::move(C), [this, a, b, w](const Mat& dC) {
            nodes_[a].grad.v[0] += dC.v[0];
            nodes_[b].grad.v[0] += w * dC.v[0];
        });
    }

    void backward(Var loss) {
        Mat& seed = nodes_[loss].grad;
        if (seed.size() != 1) throw std::invalid_argument("backward: loss must be scalar");
        seed.v[0] = 1.0;
        for (int i = loss; i >= 0; --i)
            if (nodes_[i].backward) nodes_[i].backward(nodes_[i].grad);
    }

    std::size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Mat value;
        Mat grad;
        std::function<void(const Mat&)> backward;
    };

    Var record(Mat value, std::function<void(const Mat&)> backward) {
        nodes_.push_back({std::move(value), {}, std::move(backward)});
        Node& n = nodes_.back();
        n.grad = Mat(n.value.rows, n.value.cols);
        return static_cast<Var>(nodes_.size() - 1);
    }

    static double phi(double x) { return 0.5 * (1.0 + std::erf(x / 1.4142135623730951)); }
    static double pdf(double x) { return std::exp(-0.5 * x * x) / 2.5066282746310002; }

    static void accumulate(Mat& dst, const Mat& src) {
        for (std::size_t i = 0; i < dst.size(); ++i) dst.v[i] += src.v[i];
    }

    // C = A B
    static void gemm(const Mat& A, const Mat& B, Mat& C) {
        const int n = B.cols;
        for (int i = 0; i < A.rows; ++i) {
            double* __restrict crow = &C.v[static_cast<std::size_t>(i) * C.cols];
            int k = 0;
            for (; k + 2 <= A.cols; k += 2) {
                double a0 = A.at(i, k), a1 = A.at(i, k + 1);
                if (a0 == 0.0 && a1 == 0.0) continue;
                const double* __restrict b0 = &B.v[static_cast<std::size_t>(k) * n];
                const double* __restrict b1 = b0 + n;
                for (int j = 0; j < n; ++j) crow[j] += a0 * b0[j] + a1 * b1[j];
            }
            for (; k < A.cols; ++k) {
                double a = A.at(i, k);
                if (a == 0.0) continue;
                const double* __restrict brow = &B.v[static_cast<std::size_t>(k) * n];
                for (int j = 0; j < n; ++j) crow[j] += a * brow[j];
            }
        }
    }

    // C += A B
    static void gemm_acc(const Mat& A, const Mat& B, Mat& C) { gemm(A, B, C); }

    // C = A B^T
    static void gemm_nt(const Mat& A, const Mat& B, Mat& C) {
        const int kc = A.cols;
        for (int i = 0; i < A.rows; ++i)
            for (int j = 0; j < B.rows; ++j) {
                const double* arow = &A.v[static_cast<std::size_t>(i) * A.cols];
                const double* brow = &B.v[static_cast<std::size_t>(j) * B.cols];
                // four accumulators break the dependency chain for SIMD/ILP
                double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
                int k = 0;
                for (; k + 4 <= kc; k += 4) {
                    s0 += arow[k] * brow[k];
                    s1 += arow[k + 1] * brow[k + 1];
                    s2 += arow[k + 2] * brow[k + 2];
                    s3 += arow[k + 3] * brow[k + 3];
                }
                double sum = (s0 + s1) + (s2 + s3);
                for (; k < kc; ++k) sum += arow[k] * brow[k];
                C.at(i, j) += sum;
            }
    }

    // C += A B^T
    static void gemm_nt_acc(const Mat& A, const Mat& B, Mat& C) { gemm_nt(A, B, C); }

    // C += A^T B
    static void gemm_tn_acc(const Mat& A, const Mat& B, Mat& C) {
        const int n = B.cols;
        int k = 0;
        for (; k + 2 <= A.rows; k += 2) {
            const double* __restrict b0 = &B.v[static_cast<std::size_t>(k) * n];
            const double* __restrict b1 = b0 + n;
            for (int i = 0; i < A.cols; ++i) {
                double a0 = A.at(k, i), a1 = A.at(k + 1, i);
                if (a0 == 0.0 && a1 == 0.0) continue;
                double* __restrict crow = &C.v[static_cast<std::size_t>(i) * C.cols];
                for (int j = 0; j < n; ++j) crow[j] += a0 * b0[j] + a1 * b1[j];
            }
        }
        for (; k < A.rows; ++k) {
            const double* __restrict brow = &B.v[static_cast<std::size_t>(k) * n];
            for (int i = 0; i < A.cols; ++i) {
                double a = A.at(k, i);
                if (a == 0.0) continue;
                double* __restrict crow = &C.v[static_cast<std::size_t>(i) * C.cols];
                for (int j = 0; j < n; ++j) crow[j] += a * brow[j];
            }
        }
    }

    std::vector<Node> nodes_;
};

}  // namespace dora
