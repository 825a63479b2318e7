#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace gfcpanel::num {

// ---------------------------------------------------------------- distributions

// Standard normal upper tail P(X > x).
double normal_sf(double x);

// Chi-square upper tail P(X > x) with df degrees of freedom. df = 0 returns 0 for x > 0.
double chi2_sf(double x, int df);

// Student-t two-sided p-value P(|T| > |t|) with df degrees of freedom.
double student_t_two_sided(double t, int df);

// Regularized incomplete gamma P(a, x) and incomplete beta I_x(a, b); exposed for tests.
double gamma_p(double a, double x);
double inc_beta(double a, double b, double x);

// ---------------------------------------------------------------- linear algebra

struct PsdInverse {
    Eigen::MatrixXd inverse;
    int rank = 0;
    bool deficient = false; // true when eigenvalues below tolerance were dropped
};

// Pseudo-inverse of a symmetric positive semidefinite matrix. Eigenvalues
// below rel_tol * max_eigenvalue are treated as zero.
PsdInverse pinv_psd(const Eigen::MatrixXd& m, double rel_tol);

struct PsdSqrt {
    Eigen::MatrixXd root;      // symmetric, root * root^T reproduces the clipped input
    double clipped_mass = 0.0; // total magnitude of negative eigenvalues clipped to zero
    int clipped_count = 0;
};

// Symmetric square root of a covariance matrix with negative eigenvalues clipped at zero.
PsdSqrt psd_sqrt(const Eigen::MatrixXd& m);

// ---------------------------------------------------------------- quantiles

// Linear-interpolated order statistic at probability q in [0, 1].
// Sorts a copy of the input.
double quantile(std::vector<double> values, double q);

// ---------------------------------------------------------------- rng

std::uint64_t splitmix64(std::uint64_t& state);

// Deterministic substream seed derived from a master seed and up to two tags.
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t tag_a, std::uint64_t tag_b = 0);

// Self-contained normal sampler (Marsaglia polar on mt19937_64) so draws do not
// depend on the standard library's distribution internals.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}

    double operator()();
    double uniform(); // in (0, 1)

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// ---------------------------------------------------------------- misc

std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64(const std::string& s);

// Shortest decimal representation that round-trips a double (17 significant digits).
std::string format_double(double v);

// Runs fn(i) for i in [0, n) over the given number of worker threads with a
// static partition; results must be written to caller-owned, index-disjoint slots.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

} // namespace gfcpanel::num
