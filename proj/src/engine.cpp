#include "mqclab/engine.hpp"

#include <cblas.h>
#include <lapacke.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <mutex>
#include <numeric>
#include <vector>

#include "mqclab/errors.hpp"

extern "C" void openblas_set_num_threads(int num_threads);

namespace mqclab {

void use_single_threaded_blas() {
  static std::once_flag once;
  std::call_once(once, [] { openblas_set_num_threads(1); });
}

namespace {

// ---------------------------------------------------------------------------
// BLAS kernels, precision-dispatched
// ---------------------------------------------------------------------------

template <typename Real>
struct Blas;

template <>
struct Blas<double> {
  using Cx = std::complex<double>;
  static void gemm(CBLAS_TRANSPOSE tb, int m, int n, int k, const Cx* a,
                   int lda, const Cx* b, int ldb, Cx* c, int ldc) {
    const Cx one{1.0, 0.0}, zero{0.0, 0.0};
    cblas_zgemm(CblasColMajor, CblasNoTrans, tb, m, n, k, &one, a, lda, b, ldb,
                &zero, c, ldc);
  }
  static void herk(int n, int k, double alpha, const Cx* a, int lda,
                   double beta, Cx* c, int ldc) {
    cblas_zherk(CblasColMajor, CblasLower, CblasNoTrans, n, k, alpha, a, lda,
                beta, c, ldc);
  }
};

template <>
struct Blas<float> {
  using Cx = std::complex<float>;
  static void gemm(CBLAS_TRANSPOSE tb, int m, int n, int k, const Cx* a,
                   int lda, const Cx* b, int ldb, Cx* c, int ldc) {
    const Cx one{1.0f, 0.0f}, zero{0.0f, 0.0f};
    cblas_cgemm(CblasColMajor, CblasNoTrans, tb, m, n, k, &one, a, lda, b, ldb,
                &zero, c, ldc);
  }
  static void herk(int n, int k, float alpha, const Cx* a, int lda, float beta,
                   Cx* c, int ldc) {
    cblas_cherk(CblasColMajor, CblasLower, CblasNoTrans, n, k, alpha, a, lda,
                beta, c, ldc);
  }
};

// Real symmetric eigensolve in double regardless of the engine precision;
// one factorisation per Hamiltonian is cheap and the eigenphases feed long
// time evolutions.
void sym_eig(Eigen::MatrixXd& a_inout_vectors, Eigen::VectorXd& w) {
  const lapack_int n = static_cast<lapack_int>(a_inout_vectors.rows());
  w.resize(n);
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                                         a_inout_vectors.data(), n, w.data());
  if (info != 0) {
    throw NumericalError("sector eigensolver failed (dsyevd info = " +
                         std::to_string(info) + ")");
  }
}

// ---------------------------------------------------------------------------
// Parity-sector layout
// ---------------------------------------------------------------------------

struct Sector {
  std::vector<int> global;   // slot -> Zeeman index, sorted by (2M, index)
  std::vector<int> twice_m;  // ascending along slots
  struct MBlock {
    int begin, end, twice_m;
  };
  std::vector<MBlock> m_blocks;
  int n_negative = 0;  // slots with M < 0 (first), then M = 0, then M > 0
  int n_zero = 0;
  int dim() const { return static_cast<int>(global.size()); }
};

std::array<Sector, 2> make_sectors(const Basis& basis) {
  std::array<Sector, 2> sectors;
  const std::size_t dim = basis.dimension();
  for (std::size_t s = 0; s < dim; ++s) {
    sectors[std::popcount(s) & 1u].global.push_back(static_cast<int>(s));
  }
  for (Sector& sec : sectors) {
    std::sort(sec.global.begin(), sec.global.end(), [&](int a, int b) {
      const int ma = basis.twice_m(static_cast<std::size_t>(a));
      const int mb = basis.twice_m(static_cast<std::size_t>(b));
      return ma != mb ? ma < mb : a < b;
    });
    sec.twice_m.reserve(sec.global.size());
    for (int g : sec.global) sec.twice_m.push_back(basis.twice_m(static_cast<std::size_t>(g)));
    for (int i = 0; i < sec.dim();) {
      int j = i;
      while (j < sec.dim() && sec.twice_m[j] == sec.twice_m[i]) ++j;
      sec.m_blocks.push_back({i, j, sec.twice_m[i]});
      if (sec.twice_m[i] < 0) sec.n_negative += j - i;
      if (sec.twice_m[i] == 0) sec.n_zero += j - i;
      i = j;
    }
  }
  return sectors;
}

// ---------------------------------------------------------------------------
// Sector runner
// ---------------------------------------------------------------------------

template <typename Real>
class SectorRunner final : public Runner {
 public:
  using Cx = std::complex<Real>;
  using Mat = Eigen::Matrix<Cx, Eigen::Dynamic, Eigen::Dynamic>;

  explicit SectorRunner(const SpinSystem& sys) : basis_(build_basis(sys.n_spins)) {
    use_single_threaded_blas();
    sectors_ = make_sectors(*basis_);

    std::vector<int> slot_of(basis_->dimension());
    for (int s = 0; s < 2; ++s) {
      for (int slot = 0; slot < sectors_[s].dim(); ++slot) {
        slot_of[static_cast<std::size_t>(sectors_[s].global[slot])] = slot;
      }
    }

    // Thermal weights: rho_0 = scale * diag(M), Tr{rho_0^2} = 1.
    const int n = sys.n_spins;
    const double scale = 2.0 / std::sqrt(static_cast<double>(n) *
                                         std::pow(2.0, n));
    for (int s = 0; s < 2; ++s) {
      auto& w = weights_[s];
      w.resize(sectors_[s].dim());
      for (int slot = 0; slot < sectors_[s].dim(); ++slot) {
        w[slot] = scale * 0.5 * sectors_[s].twice_m[static_cast<std::size_t>(slot)];
      }
    }

    // Sector Hamiltonians in double, then their spectra.
    for (int s = 0; s < 2; ++s) {
      const Sector& sec = sectors_[s];
      const int dim = sec.dim();
      Eigen::MatrixXd h0 = Eigen::MatrixXd::Zero(dim, dim);
      Eigen::MatrixXd hdd = Eigen::MatrixXd::Zero(dim, dim);
      for (int slot = 0; slot < dim; ++slot) {
        const std::size_t a = static_cast<std::size_t>(sec.global[slot]);
        double diag = 0.0;
        for (int i = 0; i < n; ++i) {
          const bool up_i = (a >> i) & 1u;
          for (int j = i + 1; j < n; ++j) {
            const double d = sys.couplings(i, j);
            if (d == 0.0) continue;
            const bool up_j = (a >> j) & 1u;
            const std::size_t b = a ^ ((std::size_t{1} << i) | (std::size_t{1} << j));
            if (up_i == up_j) {
              diag += 0.5 * d;
              h0(slot_of[b], slot) += -0.5 * d;  // pair flip, same sector
            } else {
              diag += -0.5 * d;
              hdd(slot_of[b], slot) += -0.5 * d;  // flip-flop, same M block
            }
          }
        }
        hdd(slot, slot) = diag;
      }

      sym_eig(h0, lam0_[s]);
      v0_[s] = h0.cast<Cx>();

      // H_dd per M block.
      for (const auto& blk : sec.m_blocks) {
        const int bsize = blk.end - blk.begin;
        Eigen::MatrixXd sub = hdd.block(blk.begin, blk.begin, bsize, bsize);
        Eigen::VectorXd lam;
        sym_eig(sub, lam);
        vdd_[s].push_back(sub.cast<Cx>());
        lamdd_[s].push_back(std::move(lam));
      }
    }
  }

  const BasisPtr& basis() const override { return basis_; }

  DensityOperator h0_state(double t) override {
    std::array<Mat, 2> u;
    for (int s = 0; s < 2; ++s) u[s] = h0_unitary(s, t);
    return assemble(u);
  }

  void prepare_cycles(double tau0, double tau_sigma) override {
    for (int s = 0; s < 2; ++s) {
      Mat p = h0_unitary(s, tau0);
      if (tau_sigma > 0.0) {
        apply_udd_left(s, tau_sigma, p);
      }
      powers_[s].clear();
      powers_[s].push_back(std::move(p));
    }
    cycles_ready_ = true;
  }

  void set_preparation(double t_prep) override {
    if (t_prep <= 0.0) {
      has_prep_ = false;
      prep_[0].resize(0, 0);
      prep_[1].resize(0, 0);
      return;
    }
    for (int s = 0; s < 2; ++s) prep_[s] = h0_unitary(s, t_prep);
    has_prep_ = true;
  }

  DensityOperator cycle_state(int n) override {
    if (!cycles_ready_) throw ValidationError("cycle propagator not prepared");
    if (n < 0) throw ValidationError("cycle count must be nonnegative");
    std::array<Mat, 2> u;
    for (int s = 0; s < 2; ++s) {
      if (n == 0) {
        u[s] = has_prep_ ? prep_[s] : identity(s);
      } else {
        u[s] = unit_power(s, n);
        if (has_prep_) {
          Mat w(u[s].rows(), u[s].cols());
          const int dim = sectors_[s].dim();
          Blas<Real>::gemm(CblasNoTrans, dim, dim, dim, u[s].data(), dim,
                           prep_[s].data(), dim, w.data(), dim);
          u[s] = std::move(w);
        }
      }
    }
    return assemble(u);
  }

 private:
  Mat identity(int s) const {
    return Mat::Identity(sectors_[s].dim(), sectors_[s].dim());
  }

  // exp(-i H_0 t) in sector s: V e^(-i lam t) V^T with real eigenvectors.
  Mat h0_unitary(int s, double t) {
    const int dim = sectors_[s].dim();
    if (t == 0.0) return identity(s);
    Mat b = v0_[s];
    for (int col = 0; col < dim; ++col) {
      const double ang = -lam0_[s](col) * t;
      const Cx phase(static_cast<Real>(std::cos(ang)), static_cast<Real>(std::sin(ang)));
      b.col(col) *= phase;
    }
    Mat u(dim, dim);
    Blas<Real>::gemm(CblasTrans, dim, dim, dim, b.data(), dim, v0_[s].data(),
                     dim, u.data(), dim);
    return u;
  }

  // In place: target <- exp(-i H_dd tau) * target, using the M-block
  // structure of H_dd.
  void apply_udd_left(int s, double tau, Mat& target) {
    const int dim = sectors_[s].dim();
    const auto& blocks = sectors_[s].m_blocks;
    Mat rows_out(dim, dim);
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      const auto& blk = blocks[bi];
      const int bsize = blk.end - blk.begin;
      // Small block unitary exp(-i H_dd,b tau).
      Mat bb = vdd_[s][bi];
      for (int col = 0; col < bsize; ++col) {
        const double ang = -lamdd_[s][bi](col) * tau;
        bb.col(col) *= Cx(static_cast<Real>(std::cos(ang)), static_cast<Real>(std::sin(ang)));
      }
      Mat ub(bsize, bsize);
      Blas<Real>::gemm(CblasTrans, bsize, bsize, bsize, bb.data(), bsize,
                       vdd_[s][bi].data(), bsize, ub.data(), bsize);
      // rows [begin, end) of the product.
      Blas<Real>::gemm(CblasNoTrans, bsize, dim, bsize, ub.data(), bsize,
                       target.data() + blk.begin, dim,
                       rows_out.data() + blk.begin, dim);
    }
    target = std::move(rows_out);
  }

  // P^n with a product order fixed by the bits of n alone, so sampled states
  // never depend on the sampling schedule. Squarings are cached while the
  // sector is small enough for that to be free memory-wise.
  Mat unit_power(int s, int n) {
    auto& pow2 = powers_[s];
    const bool cache = sectors_[s].dim() <= 2048;
    std::vector<Mat> local;
    std::vector<Mat>* store = &pow2;
    if (!cache) {
      local.push_back(pow2[0]);
      store = &local;
    }
    int msb = 0;
    while ((1 << (msb + 1)) <= n) ++msb;
    const int dim = sectors_[s].dim();
    while (static_cast<int>(store->size()) <= msb) {
      const Mat& prev = store->back();
      Mat next(dim, dim);
      Blas<Real>::gemm(CblasNoTrans, dim, dim, dim, prev.data(), dim,
                       prev.data(), dim, next.data(), dim);
      store->push_back(std::move(next));
    }
    Mat result = (*store)[static_cast<std::size_t>(msb)];
    Mat tmp(dim, dim);
    for (int k = msb - 1; k >= 0; --k) {
      if ((n >> k) & 1) {
        Blas<Real>::gemm(CblasNoTrans, dim, dim, dim, result.data(), dim,
                         (*store)[static_cast<std::size_t>(k)].data(), dim,
                         tmp.data(), dim);
        std::swap(result, tmp);
      }
    }
    return result;
  }

  // rho = U diag(w) U^dagger with w the thermal weights: two rank-k updates
  // over the negative- and positive-M columns (M = 0 columns drop out).
  DensityOperator assemble(const std::array<Mat, 2>& u) const {
    const std::size_t full = basis_->dimension();
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(full, full);
    for (int s = 0; s < 2; ++s) {
      const Sector& sec = sectors_[s];
      const int dim = sec.dim();
      const int k_neg = sec.n_negative;
      const int k_pos = dim - sec.n_negative - sec.n_zero;

      Mat a_pos(dim, k_pos);
      Mat a_neg(dim, k_neg);
      for (int j = 0; j < k_neg; ++j) {
        a_neg.col(j) = u[s].col(j) * static_cast<Real>(std::sqrt(-weights_[s][static_cast<std::size_t>(j)]));
      }
      const int pos_begin = sec.n_negative + sec.n_zero;
      for (int j = 0; j < k_pos; ++j) {
        const int col = pos_begin + j;
        a_pos.col(j) = u[s].col(col) * static_cast<Real>(std::sqrt(weights_[s][static_cast<std::size_t>(col)]));
      }

      Mat block(dim, dim);
      Blas<Real>::herk(dim, k_pos, Real{1}, a_pos.data(), dim, Real{0}, block.data(), dim);
      Blas<Real>::herk(dim, k_neg, Real{-1}, a_neg.data(), dim, Real{1}, block.data(), dim);

      for (int j = 0; j < dim; ++j) {
        const int gj = sec.global[static_cast<std::size_t>(j)];
        rho(gj, gj) = std::complex<double>(static_cast<double>(block(j, j).real()), 0.0);
        for (int i = j + 1; i < dim; ++i) {
          const int gi = sec.global[static_cast<std::size_t>(i)];
          const std::complex<double> v(static_cast<double>(block(i, j).real()),
                                       static_cast<double>(block(i, j).imag()));
          rho(gi, gj) = v;
          rho(gj, gi) = std::conj(v);
        }
      }
    }
    return DensityOperator(std::move(rho), basis_);
  }

  BasisPtr basis_;
  std::array<Sector, 2> sectors_;
  std::array<std::vector<double>, 2> weights_;
  std::array<Mat, 2> v0_;
  std::array<Eigen::VectorXd, 2> lam0_;
  std::array<std::vector<Mat>, 2> vdd_;
  std::array<std::vector<Eigen::VectorXd>, 2> lamdd_;
  std::array<std::vector<Mat>, 2> powers_;
  std::array<Mat, 2> prep_;
  bool cycles_ready_ = false;
  bool has_prep_ = false;
};

}  // namespace

std::unique_ptr<Runner> make_runner(const SpinSystem& sys, Precision precision) {
  Precision chosen = precision;
  if (chosen == Precision::automatic) {
    chosen = sys.n_spins >= 12 ? Precision::float32 : Precision::float64;
  }
  if (chosen == Precision::float32) {
    return std::make_unique<SectorRunner<float>>(sys);
  }
  return std::make_unique<SectorRunner<double>>(sys);
}

}  // namespace mqclab
